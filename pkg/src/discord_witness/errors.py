"""Exception types raised across the package.

Everything derives from :class:`WitnessError` so callers (and the CLI) can
separate domain failures from programming errors.
"""


class WitnessError(ValueError):
    """Base class for domain errors."""


class NotHermitian(WitnessError):
    pass


class DimensionMismatch(WitnessError):
    pass


class InvalidDimension(WitnessError):
    pass


class UnsupportedDimension(WitnessError):
    pass


class OutOfRange(WitnessError):
    pass


class InvalidProbabilities(WitnessError):
    pass


class InvalidRank(WitnessError):
    pass


class NotUnit(WitnessError):
    pass


class SettingCountMismatch(WitnessError):
    pass


class InvalidConfig(WitnessError):
    pass


class EmptySetting(WitnessError):
    pass


class InvalidParams(WitnessError):
    pass


class InvalidState(WitnessError):
    """A density matrix failed one or more of its invariants.

    ``failed`` lists the names of the violated invariants.
    """

    def __init__(self, failed, detail=""):
        self.failed = list(failed)
        msg = "density matrix invariant(s) violated: " + ", ".join(self.failed)
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InvalidObservable(WitnessError):
    pass
