"""Command-line interface.

Subcommands: ``state``, ``witness``, ``optimize``, ``simulate``,
``sweep-werner`` and ``selftest``. Exit status is 0 on success, 1 on a domain
error (invalid state, dimension mismatch, ...) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import measurements as meas
from . import simulator as sim
from . import states
from . import witness as wit
from .errors import InvalidParams, InvalidState, UnsupportedDimension, WitnessError

# efficiencies of the imperfect-device curve: alpha_0, alpha_1 / beta_0, beta_1
DEFAULT_ALPHA = (0.75, 0.8)
DEFAULT_BETA = (0.8, 0.625)
DEFAULT_GRID = "0:1:0.05"


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError as exc:
            raise InvalidParams(f"bad grid {text!r}") from exc
        if step <= 0 or stop < start:
            raise InvalidParams(f"bad grid {text!r}")
        n = int(round((stop - start) / step)) + 1
        values = [round(start + i * step, 12) for i in range(n)]
    else:
        values = [float(v) for v in text.split(",") if v.strip()]
    if not values or any(not 0.0 <= v <= 1.0 for v in values):
        raise InvalidParams("grid values must lie in [0, 1]")
    return values


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


# -- commands ----------------------------------------------------------------

def cmd_state(args) -> int:
    if args.kind == "werner":
        if args.p is None:
            raise InvalidParams("--p is required for werner states")
        rho = states.werner(float(args.p))
    elif args.kind == "classical-quantum":
        if args.p is None:
            raise InvalidParams("--p (comma-separated weights) is required")
        probs = _floats(args.p)
        rng = np.random.default_rng(args.seed)
        locals_ = [states.random_local_state(args.db, rng) for _ in probs]
        basis = states.random_unitary(len(probs), rng) if args.random_basis else None
        rho = states.classical_quantum(probs, locals_, basis)
    else:
        rho = states.random_density(args.da, args.db, args.rank, args.seed)
    text = json.dumps(states.state_to_dict(rho)) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _load_sets(args):
    rho = states.read_state(args.state)
    alice = meas.read_measurements(args.alice, "A")
    bob = meas.read_measurements(args.bob, "B")
    return rho, alice, bob


def cmd_witness(args) -> int:
    rho, alice, bob = _load_sets(args)
    _emit(wit.witness_value(rho, alice, bob).to_dict())
    return 0


def cmd_optimize(args) -> int:
    rho = states.read_state(args.state)
    if (rho.d_a, rho.d_b) != (2, 2):
        raise UnsupportedDimension("optimize supports two-qubit states only")
    alice, bob, w_max = meas.optimal_pair(states.bloch_decompose(rho).s_hat)
    if args.alice_out:
        meas.write_measurements(alice, args.alice_out)
    if args.bob_out:
        meas.write_measurements(bob, args.bob_out)
    _emit({"w_max": w_max,
           "alice": meas.measurements_to_dict(alice),
           "bob": meas.measurements_to_dict(bob)})
    return 0


def cmd_simulate(args) -> int:
    rho, alice, bob = _load_sets(args)
    config = sim.ExperimentConfig(rho, alice, bob, args.alpha, args.beta, args.rounds, args.seed)
    tally = sim.run(config, workers=args.workers)
    if args.tally_out:
        sim.write_tally(tally, args.tally_out)
    report = sim.estimate(tally)
    report = wit.WitnessReport(report.q, report.w, rho.d_a, rho.d_b, "estimated")
    low, high, sigma = sim.bootstrap_ci(tally, args.resamples, args.level, args.seed)
    out = report.to_dict()
    out.update({"ci_low": low, "ci_high": high, "sigma": sigma, "level": args.level})
    _emit(out)
    return 0


def sweep_rows(grid, alpha, beta, rounds=None, seed=0, resamples=1000, level=0.95):
    """Rows ``(p, w_max, w_imp[, w_est, ci_low, ci_high])`` of the Werner sweep.

    ``w_max`` uses the optimal measurements; ``w_imp`` and the simulated
    estimate use sharp x and z measurements on both sides with the given
    per-setting efficiencies.
    """
    if len(alpha) != 2 or len(beta) != 2:
        raise InvalidParams("the sweep needs two efficiencies per side")
    xz_a = meas.pauli_set("A", "x", "z")
    xz_b = meas.pauli_set("B", "x", "z")
    lossy_a = meas.MeasurementSet("A", tuple(meas.apply_efficiency(o, e) for o, e in zip(xz_a, alpha)))
    lossy_b = meas.MeasurementSet("B", tuple(meas.apply_efficiency(o, e) for o, e in zip(xz_b, beta)))
    rows = []
    for i, p in enumerate(grid):
        rho = states.werner(p)
        alice, bob, _ = meas.optimal_pair(states.bloch_decompose(rho).s_hat)
        row = [p, wit.witness_value(rho, alice, bob).w, wit.witness_value(rho, lossy_a, lossy_b).w]
        if rounds:
            config = sim.ExperimentConfig(rho, xz_a, xz_b, alpha, beta, rounds, seed + i)
            tally = sim.run(config)
            low, high, _ = sim.bootstrap_ci(tally, resamples, level, seed + i)
            row += [sim.estimate(tally).w, low, high]
        rows.append(row)
    return rows


def cmd_sweep_werner(args) -> int:
    grid = parse_grid(args.grid)
    rows = sweep_rows(grid, args.alpha, args.beta, args.rounds, args.seed, args.resamples, args.level)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["p", "w_max", "w_imp"] + (["w_est", "ci_low", "ci_high"] if args.rounds else [])
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8", newline="")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def selftest_checks() -> list[tuple[str, bool, str]]:
    """Small, seeded versions of the package's core invariants."""
    rng = np.random.default_rng(20240601)
    results = []

    worst = 0.0
    for d_a, d_b in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        for _ in range(5):
            rho = states.random_classical_quantum(d_a, d_b, rng)
            for _ in range(4):
                a = meas.random_measurement_set(d_a, d_a, rng, "A")
                b = meas.random_measurement_set(d_b, d_a, rng, "B")
                worst = max(worst, abs(wit.witness_value(rho, a, b).w))
    results.append(("zero-discord vanishing", worst < 1e-8, f"max |w| = {worst:.3e}"))

    worst = 0.0
    for _ in range(20):
        rho = states.random_density(2, 2, seed=int(rng.integers(2**31)))
        a = meas.random_measurement_set(2, 2, rng, "A")
        b = meas.random_measurement_set(2, 2, rng, "B")
        eff = rng.uniform(0, 1, 4)
        la = meas.MeasurementSet("A", tuple(meas.apply_efficiency(o, e) for o, e in zip(a, eff[:2])))
        lb = meas.MeasurementSet("B", tuple(meas.apply_efficiency(o, e) for o, e in zip(b, eff[2:])))
        w0 = wit.witness_value(rho, a, b).w
        w1 = wit.witness_value(rho, la, lb).w
        worst = max(worst, abs(w1 - np.prod(eff) * w0))
    results.append(("loss scaling", worst < 1e-12, f"max deviation = {worst:.3e}"))

    excess, gap = -np.inf, 0.0
    for _ in range(20):
        rho = states.random_density(2, 2, seed=int(rng.integers(2**31)))
        bound = wit.max_witness_bound(rho)
        for _ in range(50):
            a = meas.random_measurement_set(2, 2, rng, "A")
            b = meas.random_measurement_set(2, 2, rng, "B")
            excess = max(excess, wit.witness_value(rho, a, b).w - bound)
        alice, bob, _ = meas.optimal_pair(states.bloch_decompose(rho).s_hat)
        gap = max(gap, abs(wit.witness_value(rho, alice, bob).w - bound))
    results.append(("bound tightness", excess <= 1e-9 and gap <= 1e-9,
                    f"sampled excess = {excess:.3e}, optimum gap = {gap:.3e}"))

    worst = 0.0
    for _ in range(20):
        rho = states.random_density(2, 2, seed=int(rng.integers(2**31)))
        a = meas.random_measurement_set(2, 2, rng, "A")
        b = meas.random_measurement_set(2, 2, rng, "B")
        s_hat = states.bloch_decompose(rho).s_hat
        w_det = wit.witness_value(rho, a, b).w
        w_bloch = wit.witness_from_bloch(s_hat, [o.vector for o in a], [o.vector for o in b])
        w_cross = wit.cross_product_witness(s_hat, a[0].vector, a[1].vector, b[0].vector, b[1].vector)
        worst = max(worst, abs(w_det - w_bloch), abs(w_det - w_cross))
    results.append(("dual-path agreement", worst < 1e-9, f"max deviation = {worst:.3e}"))

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "corrupt.json"
        bad = states.state_to_dict(states.werner(0.5))
        bad["matrix"][0][0] = [0.9, 0.0]
        path.write_text(json.dumps(bad), encoding="utf-8")
        try:
            states.read_state(path)
            ok, detail = False, "corrupted state accepted"
        except InvalidState as exc:
            ok, detail = "unit_trace" in exc.failed, "rejected: " + ", ".join(exc.failed)
    results.append(("corrupted state rejected", ok, detail))
    return results


def cmd_selftest(args) -> int:
    results = selftest_checks()
    for name, ok, detail in results:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
    passed = sum(ok for _, ok, _ in results)
    sys.stdout.write(f"{passed}/{len(results)} checks passed\n")
    return 0 if passed == len(results) else 1


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discord-witness",
        description="Witness quantum discord with uncharacterized dichotomic measurements.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="write a state file")
    p.add_argument("--kind", choices=["werner", "classical-quantum", "random"], required=True)
    p.add_argument("--p", help="Werner weight, or comma-separated classical-quantum weights")
    p.add_argument("--da", type=int, default=2)
    p.add_argument("--db", type=int, default=2)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-basis", action="store_true",
                   help="classical-quantum: use a random orthonormal basis on Alice's side")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_state)

    for name, func, helptext in [("witness", cmd_witness, "evaluate the witness exactly"),
                                 ("simulate", cmd_simulate, "simulate the experiment and estimate")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("state")
        p.add_argument("--alice", required=True, help="Alice's measurement file")
        p.add_argument("--bob", required=True, help="Bob's measurement file")
        p.set_defaults(func=func)
        if name == "simulate":
            p.add_argument("--alpha", type=_floats, default=None, help="Alice's efficiencies per setting")
            p.add_argument("--beta", type=_floats, default=None, help="Bob's efficiencies per setting")
            p.add_argument("--rounds", type=int, default=1_000_000)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--resamples", type=int, default=1000)
            p.add_argument("--level", type=float, default=0.95)
            p.add_argument("--workers", type=int, default=1)
            p.add_argument("--tally-out")

    p = sub.add_parser("optimize", help="synthesize witness-maximizing qubit measurements")
    p.add_argument("state")
    p.add_argument("--alice-out")
    p.add_argument("--bob-out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep-werner", help="CSV of the Werner-state witness curves")
    p.add_argument("--grid", default=DEFAULT_GRID, help="start:stop:step or comma list")
    p.add_argument("--alpha", type=_floats, default=list(DEFAULT_ALPHA))
    p.add_argument("--beta", type=_floats, default=list(DEFAULT_BETA))
    p.add_argument("--rounds", type=int, default=None, help="simulated rounds per grid point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_werner)

    p = sub.add_parser("selftest", help="run the embedded invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (WitnessError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
