import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcv import cli, instances, io
from lcv.cones import Box, ConeSpec, NonPos, SecondOrder, Zero
from lcv.errors import DimensionMismatch, NotPsd, ParseError
from lcv.model import QpProblem

MINIMAL = {"n": 1, "G": [[2]], "c": [0], "H": [[1]], "h": [0], "cones": [{"nonpos": 1}]}


def write(tmp_path, obj, name="p.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


def run(argv, env=None):
    out, err = _Buf(), _Buf()
    code = cli.main(argv, out=out, err=err)
    return code, out.text, err.text


class _Buf:
    def __init__(self):
        self.text = ""

    def write(self, s):
        self.text += s


def test_minimal_file(tmp_path):
    p = io.parse_problem(write(tmp_path, MINIMAL))
    assert p.n == 1 and p.m == 1


def test_cone_rows_short(tmp_path):
    bad = dict(MINIMAL, H=[[1], [2]], h=[0, 0])
    with pytest.raises(DimensionMismatch):
        io.parse_problem(write(tmp_path, bad))


def test_coo_out_of_range(tmp_path):
    bad = dict(MINIMAL, H={"rows": [1], "cols": [0], "vals": [1.0], "shape": [1, 1]})
    with pytest.raises(ParseError, match="'H'"):
        io.parse_problem(write(tmp_path, bad))


def test_coo_reads_like_dense(tmp_path):
    coo = dict(MINIMAL, G={"rows": [0, 0], "cols": [0, 0], "vals": [1.5, 0.5], "shape": [1, 1]})
    assert io.parse_problem(write(tmp_path, coo)) == io.parse_problem(write(tmp_path, MINIMAL, "q.json"))


@pytest.mark.parametrize("text,match", [
    ('{"n": 1,', "line 1"),
    ('[1, 2]', "object"),
    (json.dumps({k: v for k, v in MINIMAL.items() if k != "h"}), "missing"),
    (json.dumps(dict(MINIMAL, extra=1)), "unknown"),
    (json.dumps(dict(MINIMAL, cones=[{"cube": 1}])), "cones"),
    (json.dumps(dict(MINIMAL, c="zero")), "'c'"),
])
def test_parse_errors(tmp_path, text, match):
    with pytest.raises(ParseError, match=match):
        io.parse_problem(write(tmp_path, text))


def test_validation_passes_through(tmp_path):
    with pytest.raises(NotPsd):
        io.parse_problem(write(tmp_path, dict(MINIMAL, G=[[-1]])))
    with pytest.raises(DimensionMismatch):
        io.parse_problem(write(tmp_path, dict(MINIMAL, n=2)))


def test_round_trip_all_cone_kinds(tmp_path):
    cone = ConeSpec([Zero(1), NonPos(1), Box([-np.inf, 0.1], [1.0, np.inf]), SecondOrder(3)])
    rng = np.random.default_rng(0)
    H = rng.standard_normal((7, 3)) / 3
    p = QpProblem(np.eye(3) * 0.1, rng.standard_normal(3), H, rng.standard_normal(7), cone)
    io.write_problem(p, tmp_path / "a.json")
    q = io.parse_problem(tmp_path / "a.json")
    assert q == p
    io.write_problem(q, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_large_matrices_use_coo(tmp_path):
    p = instances.feasible_qp(3, 70, 0)
    d = io.problem_to_dict(p)
    assert isinstance(d["H"], dict) and isinstance(d["G"], list)
    io.write_problem(p, tmp_path / "big.json")
    assert io.parse_problem(tmp_path / "big.json") == p


@given(st.sampled_from(instances.FAMILIES), st.integers(1, 12), st.integers(2, 12),
       st.integers(0, 2**64 - 1))
def test_generate_round_trip_bit_identical(family, n, m, seed):
    p = instances.generate(family, n, m, seed)
    text = io.dumps(io.problem_to_dict(p))
    assert text == io.dumps(io.problem_to_dict(instances.generate(family, n, m, seed)))
    q = io.problem_from_dict(json.loads(text))
    assert q == p and io.dumps(io.problem_to_dict(q)) == text


def test_generator_families_are_as_named():
    from lcv.oracle import least_shift
    assert least_shift(instances.generate("feasible_qp", 6, 10, 1)).norm < 1e-9
    for fam in instances.FAMILIES[1:]:
        assert least_shift(instances.generate(fam, 6, 10, 1)).norm > 1e-3


def test_generate_rejects_bad_input():
    with pytest.raises(ValueError):
        instances.generate("nope", 2, 2, 0)
    with pytest.raises(ValueError):
        instances.generate("random_infeasible", 2, 1, 0)


# command line


@pytest.fixture
def fx(tmp_path):
    path = tmp_path / "two.json"
    io.write_problem(instances.two_halfspace(), path)
    return path


def test_cli_solve(fx, tmp_path):
    code, out, _ = run(["solve", str(fx), "--tol", "1e-8", "--trace", str(tmp_path / "t.csv")])
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "LeastViolationSolution"
    assert np.allclose(rep["shift"]["s"], [-1, -1], atol=1e-6)
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "k,r,shift_norm,opt_residual,proj_residual,lambda_norm,inner_iters,l_r_value"


def test_cli_solve_is_deterministic(fx):
    assert run(["solve", str(fx)])[1] == run(["solve", str(fx)])[1]


def test_cli_shift(fx):
    code, out, _ = run(["shift", str(fx)])
    assert code == 0 and abs(json.loads(out)["norm"] - 1.41421356) < 1e-6


def test_cli_diagnose(fx):
    code, out, _ = run(["diagnose", str(fx)])
    d = json.loads(out)
    assert code == 0 and d["shift_set_closed"]["kind"] == "ShiftSetClosed"
    assert set(d) == {"shift_set_closed", "level_bounded", "unbounded_below"}


def test_cli_diagnose_soc(tmp_path):
    p = QpProblem(np.eye(1), [0.0], [[1.0], [0.0]], [0.0, 0.0], ConeSpec([SecondOrder(2)]))
    io.write_problem(p, tmp_path / "soc.json")
    code, out, _ = run(["diagnose", str(tmp_path / "soc.json")])
    assert code == 0 and json.loads(out)["level_bounded"]["kind"] == "Unsupported"


def test_cli_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["gen", "random_infeasible", "--n", "4", "--m", "6", "--seed", "18446744073709551615",
                    "-o", str(path)])[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert io.parse_problem(a) == instances.generate("random_infeasible", 4, 6, 2**64 - 1)


def test_cli_verify(fx, tmp_path):
    rep = tmp_path / "rep.json"
    rep.write_text(run(["solve", str(fx)])[1])
    code, out, _ = run(["verify", str(fx), str(rep)])
    assert code == 0 and json.loads(out)["ok"]
    d = json.loads(rep.read_text())
    d["x"] = [1.1]
    rep.write_text(json.dumps(d))
    code, out, _ = run(["verify", str(fx), str(rep)])
    assert code == 2 and not json.loads(out)["certificate"]


def test_cli_verify_feasible(tmp_path):
    path = tmp_path / "f.json"
    io.write_problem(instances.feasible_qp(4, 6, 2), path)
    rep = tmp_path / "rep.json"
    rep.write_text(run(["solve", str(path)])[1])
    code, out, _ = run(["verify", str(path), str(rep)])
    assert code == 0 and json.loads(out)["oracle_x_gap"] < 1e-5


def test_cli_lambda0(fx, tmp_path):
    lam = tmp_path / "lam.json"
    lam.write_text("[0.0, 2.0]")
    code, out, _ = run(["solve", str(fx), "--lambda0", str(lam)])
    assert code == 0
    lam.write_text("[1.0]")
    code, _, err = run(["solve", str(fx), "--lambda0", str(lam)])
    assert code == 3 and json.loads(err)["exit_code"] == 3


def test_cli_nonconvergence(fx):
    code, out, _ = run(["solve", str(fx), "--max-outer", "2"])
    assert code == 2 and json.loads(out)["status"] == "MaxOuterExceeded"


def test_cli_scientific_integer_flag(fx):
    assert run(["solve", str(fx), "--max-outer", "1e3"])[0] == 0
    assert run(["solve", str(fx), "--max-outer", "1.5"])[0] == 3


@pytest.mark.parametrize("argv", [
    ["solve"], ["solve", "missing.json"], ["bogus"], ["solve", "x.json", "--unknown", "1"],
    ["solve", "x.json", "--tol", "abc"], ["solve", "x.json", "--tol", "nan"],
    ["gen", "nope", "--n", "1", "--m", "1", "--seed", "0"],
])
def test_cli_input_errors(argv):
    code, out, err = run(argv)
    assert code == 3 and out == ""
    assert set(json.loads(err)) == {"error", "message", "exit_code"}


def test_cli_bad_problem_file(tmp_path):
    code, _, err = run(["solve", str(write(tmp_path, dict(MINIMAL, G=[[-1]])))])
    assert code == 3 and json.loads(err)["error"] == "NotPsd"


def test_cli_bad_config(fx):
    code, _, err = run(["solve", str(fx), "--r-growth", "0.5"])
    assert code == 3


def test_cli_log_env(fx, monkeypatch):
    monkeypatch.setenv("LCV_LOG", "verbose")
    assert run(["solve", str(fx)])[0] == 3
    monkeypatch.setenv("LCV_LOG", "info")
    assert run(["solve", str(fx)])[0] == 0


def test_cli_batch(tmp_path):
    folder = tmp_path / "batch"
    folder.mkdir()
    for i, fam in enumerate(instances.FAMILIES):
        io.write_problem(instances.generate(fam, 4, 6, i), folder / f"{i}_{fam}.json")
    code, out, _ = run(["solve", "--batch", str(folder), "--max-outer", "5000"])
    res = json.loads(out)
    assert code == 0 and [r["file"] for r in res] == sorted(p.name for p in folder.glob("*.json"))
    assert all(r["report"]["status"] in ("FeasibleOptimal", "LeastViolationSolution") for r in res)
    (folder / "z_bad.json").write_text("{")
    code, out, _ = run(["solve", "--batch", str(folder)])
    assert code == 3 and json.loads(out)[-1]["error"] == "ParseError"


def test_entry_point_subprocess(fx):
    proc = subprocess.run([sys.executable, "-m", "lcv.cli", "shift", str(fx)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["source"] == "oracle.least_shift"
    proc = subprocess.run([sys.executable, "-m", "lcv.cli", "solve", "nope.json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 3 and json.loads(proc.stderr.strip().splitlines()[-1])["exit_code"] == 3
