import csv
import io
import json

import numpy as np
import pytest

from discord_witness import measurements as meas
from discord_witness import states
from discord_witness.cli import main, parse_grid
from discord_witness.errors import InvalidParams


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def xz_files(tmp_path):
    paths = []
    for side in ("A", "B"):
        path = tmp_path / f"xz_{side}.json"
        meas.write_measurements(meas.pauli_set(side, "x", "z"), path)
        paths.append(path)
    return paths


# -- state ---------------------------------------------------------------------

def test_state_werner(tmp_path, capsys):
    out = tmp_path / "w.json"
    code, _, _ = run_cli(capsys, "state", "--kind", "werner", "--p", 0.5, "--out", out)
    assert code == 0
    rho = states.read_state(out)
    assert np.trace(rho.matrix) == pytest.approx(1)


def test_state_random_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run_cli(capsys, "state", "--kind", "random", "--da", 3, "--db", 3, "--seed", 7, "--out", path)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_state_classical_quantum_vanishes(tmp_path, capsys):
    state = tmp_path / "cq.json"
    assert run_cli(capsys, "state", "--kind", "classical-quantum", "--p", "0.5,0.5", "--db", 2,
                   "--seed", 3, "--random-basis", "--out", state)[0] == 0
    rng = np.random.default_rng(0)
    for i in range(20):
        fa, fb = tmp_path / "ma.json", tmp_path / "mb.json"
        meas.write_measurements(meas.random_measurement_set(2, 2, rng, "A"), fa)
        meas.write_measurements(meas.random_measurement_set(2, 2, rng, "B"), fb)
        code, out, _ = run_cli(capsys, "witness", state, "--alice", fa, "--bob", fb)
        assert code == 0 and abs(json.loads(out)["w"]) < 1e-9


def test_state_invalid_params(capsys):
    code, _, err = run_cli(capsys, "state", "--kind", "werner", "--p", 1.5)
    assert code == 1 and "error" in err
    code, _, _ = run_cli(capsys, "state", "--kind", "classical-quantum", "--p", "0.7,0.7")
    assert code == 1
    with pytest.raises(SystemExit) as exc:
        main(["state", "--kind", "bogus"])
    assert exc.value.code == 2


# -- witness -------------------------------------------------------------------------

def test_witness_singlet(tmp_path, capsys, xz_files):
    state = tmp_path / "s.json"
    states.write_state(states.werner(1.0), state)
    code, out, _ = run_cli(capsys, "witness", state, "--alice", xz_files[0], "--bob", xz_files[1])
    report = json.loads(out)
    assert code == 0
    assert set(report) == {"q", "w", "d_a", "d_b", "path"} and report["path"] == "analytic"
    assert report["w"] == pytest.approx(1.0, abs=1e-12)


def test_witness_product_state(tmp_path, capsys, xz_files):
    rng = np.random.default_rng(0)
    state = tmp_path / "p.json"
    states.write_state(states.product_state(states.random_local_state(2, rng), states.random_local_state(2, rng)), state)
    code, out, _ = run_cli(capsys, "witness", state, "--alice", xz_files[0], "--bob", xz_files[1])
    assert code == 0 and abs(json.loads(out)["w"]) < 1e-12


def test_witness_werner_optimal(tmp_path, capsys):
    state, fa, fb = tmp_path / "w.json", tmp_path / "a.json", tmp_path / "b.json"
    states.write_state(states.werner(0.6), state)
    assert run_cli(capsys, "optimize", state, "--alice-out", fa, "--bob-out", fb)[0] == 0
    code, out, _ = run_cli(capsys, "witness", state, "--alice", fa, "--bob", fb)
    assert json.loads(out)["w"] == pytest.approx(0.36, abs=1e-9)


def test_witness_errors_name_the_problem(tmp_path, capsys, xz_files):
    bad = tmp_path / "bad.json"
    data = states.state_to_dict(states.werner(0.5))
    data["matrix"][3][3] = [2.0, 0.0]
    bad.write_text(json.dumps(data))
    code, _, err = run_cli(capsys, "witness", bad, "--alice", xz_files[0], "--bob", xz_files[1])
    assert code == 1 and "unit_trace" in err
    state3 = tmp_path / "r.json"
    states.write_state(states.random_density(3, 2, seed=0), state3)
    code, _, err = run_cli(capsys, "witness", state3, "--alice", xz_files[0], "--bob", xz_files[1])
    assert code == 1 and "error" in err
    code, _, _ = run_cli(capsys, "witness", tmp_path / "missing.json", "--alice", xz_files[0], "--bob", xz_files[1])
    assert code == 1


# -- optimize -----------------------------------------------------------------------

@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_optimize_werner(tmp_path, capsys, p):
    state, fa, fb = tmp_path / "w.json", tmp_path / "a.json", tmp_path / "b.json"
    states.write_state(states.werner(p), state)
    code, out, _ = run_cli(capsys, "optimize", state, "--alice-out", fa, "--bob-out", fb)
    assert code == 0 and json.loads(out)["w_max"] == pytest.approx(p * p, abs=1e-12)
    for f in (fa, fb):
        m = meas.read_measurements(f)
        g = m.blochs().T @ m.blochs()
        assert np.max(np.abs(g - np.eye(2))) < 1e-10


def test_optimize_product_and_random_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(2)
    state, fa, fb = tmp_path / "s.json", tmp_path / "a.json", tmp_path / "b.json"
    states.write_state(states.product_state(states.random_local_state(2, rng), states.random_local_state(2, rng)), state)
    code, out, _ = run_cli(capsys, "optimize", state)
    assert json.loads(out)["w_max"] == pytest.approx(0, abs=1e-12)
    for seed in range(5):
        states.write_state(states.random_density(2, 2, seed=seed), state)
        _, out, _ = run_cli(capsys, "optimize", state, "--alice-out", fa, "--bob-out", fb)
        w_max = json.loads(out)["w_max"]
        _, out, _ = run_cli(capsys, "witness", state, "--alice", fa, "--bob", fb)
        assert abs(json.loads(out)["w"] - w_max) < 1e-9


def test_optimize_rejects_high_dim(tmp_path, capsys):
    state = tmp_path / "s.json"
    states.write_state(states.random_density(3, 2, seed=1), state)
    assert run_cli(capsys, "optimize", state)[0] == 1


# -- simulate -------------------------------------------------------------------

@pytest.fixture
def singlet_optimal(tmp_path, capsys):
    state, fa, fb = tmp_path / "w1.json", tmp_path / "a.json", tmp_path / "b.json"
    states.write_state(states.werner(1.0), state)
    run_cli(capsys, "optimize", state, "--alice-out", fa, "--bob-out", fb)
    return state, fa, fb


def test_simulate_singlet(tmp_path, capsys, singlet_optimal):
    state, fa, fb = singlet_optimal
    tally = tmp_path / "t.json"
    code, out, _ = run_cli(capsys, "simulate", state, "--alice", fa, "--bob", fb,
                           "--rounds", 1_000_000, "--seed", 1, "--tally-out", tally)
    rep = json.loads(out)
    assert code == 0 and rep["path"] == "estimated"
    assert abs(rep["w"] - 1.0) <= 3 * rep["sigma"]
    assert rep["ci_low"] <= rep["w"] <= rep["ci_high"]
    first = tally.read_bytes()
    run_cli(capsys, "simulate", state, "--alice", fa, "--bob", fb,
            "--rounds", 1_000_000, "--seed", 1, "--tally-out", tally, "--workers", 4)
    assert tally.read_bytes() == first


def test_simulate_imperfect_devices(tmp_path, capsys, xz_files):
    state = tmp_path / "w1.json"
    states.write_state(states.werner(1.0), state)
    code, out, _ = run_cli(capsys, "simulate", state, "--alice", xz_files[0], "--bob", xz_files[1],
                           "--alpha", "0.75,0.8", "--beta", "0.8,0.625", "--rounds", 1_000_000, "--seed", 2)
    rep = json.loads(out)
    assert code == 0 and abs(rep["w"] - 0.3) <= 3 * rep["sigma"]


def test_simulate_invalid_config(capsys, singlet_optimal):
    state, fa, fb = singlet_optimal
    assert run_cli(capsys, "simulate", state, "--alice", fa, "--bob", fb, "--alpha", "0.5")[0] == 1
    assert run_cli(capsys, "simulate", state, "--alice", fa, "--bob", fb, "--rounds", 0)[0] == 1


# -- sweep ------------------------------------------------------------------------

def _read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_default_grid(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert run_cli(capsys, "sweep-werner", "--out", out)[0] == 0
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.startswith(b"p,w_max,w_imp\n")
    rows = _read_csv(raw.decode())
    assert len(rows) == 21
    for row in rows:
        p = float(row["p"])
        assert float(row["w_max"]) == pytest.approx(p * p, abs=1e-9)
        assert float(row["w_imp"]) == pytest.approx(0.3 * p * p, abs=1e-9)
        assert float(row["w_imp"]) <= float(row["w_max"]) + 1e-12
    assert all(float(rows[0][k]) == 0 for k in ("p", "w_max", "w_imp"))


def test_sweep_with_simulation_coverage(capsys):
    code, out, _ = run_cli(capsys, "sweep-werner", "--rounds", 100_000, "--seed", 5)
    rows = _read_csv(out)
    assert list(rows[0]) == ["p", "w_max", "w_imp", "w_est", "ci_low", "ci_high"]
    hits = sum(float(r["ci_low"]) <= float(r["w_imp"]) <= float(r["ci_high"]) for r in rows)
    assert hits >= 19


def test_sweep_deterministic(capsys):
    outs = [run_cli(capsys, "sweep-werner", "--grid", "0.2,0.7", "--rounds", 20_000, "--seed", 3)[1]
            for _ in range(2)]
    assert outs[0] == outs[1]


def test_sweep_invalid_grid(capsys):
    assert run_cli(capsys, "sweep-werner", "--grid", "0:2:0.5")[0] == 1
    assert run_cli(capsys, "sweep-werner", "--grid", "0.5", "--alpha", "0.5")[0] == 1


def test_parse_grid():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len(parse_grid("0:1:0.05")) == 21
    assert parse_grid("0.1,0.3") == [0.1, 0.3]
    with pytest.raises(InvalidParams):
        parse_grid("1:0:0.1")


# -- selftest -------------------------------------------------------------------

def test_selftest(capsys):
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 0
    assert out.splitlines()[-1] == "5/5 checks passed"
    assert "PASS  corrupted state rejected: rejected: unit_trace" in out
    assert run_cli(capsys, "selftest")[1] == out
