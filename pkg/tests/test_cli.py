from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from deltafpt import cli
from deltafpt.io import InstanceFile, ResultFile
from deltafpt.linalg import IntMatrix


def write(tmp_path, name, rows, **extra):
    M = IntMatrix.from_rows(rows)
    obj = {"rows": M.rows, "cols": M.cols, "data": [str(x) for x in M.entries]}
    obj.update({k: (v if k == "p" else [str(x) for x in v]) for k, v in extra.items()})
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_svp_identity(tmp_path, capsys):
    path = write(tmp_path, "id.json", [[1, 0], [0, 1]], p=2)
    code, out, _ = run(["svp", "--input", path], capsys)
    res = ResultFile.parse(out)
    assert code == 0 and res.status == "optimal" and res.objective == 1 and res.delta == 1


@pytest.mark.parametrize("method", ["dp", "brute", "auto"])
def test_svp_methods_agree(tmp_path, capsys, method):
    path = write(tmp_path, "h.json", [[2, 1], [0, 3]])
    code, out, _ = run(["svp", "--input", path, "--p", "2", "--method", method, "--cross-check"], capsys)
    assert code == 0 and ResultFile.parse(out).objective == 4


def test_svp_fastpath_unsupported(tmp_path, capsys):
    path = write(tmp_path, "h.json", [[2, 1], [0, 3]], p=2)
    code, out, err = run(["svp", "--input", path, "--method", "fastpath"], capsys)
    res = ResultFile.parse(out)
    assert code == 3 and res.status == "error" and res.solution is None
    assert "unsupported" in err


def test_svp_cross_check_mismatch(tmp_path, capsys, monkeypatch):
    import deltafpt.svp as svp_mod

    real = svp_mod.brute_force_svp

    def off_by_one(H, p, **kw):
        s = real(H, p, **kw)
        return svp_mod.SvpSolution(s.coeffs, s.vector, s.norm_p + 1, s.method, s.states)

    monkeypatch.setattr(svp_mod, "brute_force_svp", off_by_one)
    path = write(tmp_path, "h.json", [[2, 1], [0, 3]], p=2)
    code, out, err = run(["svp", "--input", path, "--method", "dp", "--cross-check"], capsys)
    res = ResultFile.parse(out)
    assert code == 1 and res.status == "error"
    assert res.stats["primary"]["objective"] == "4" and res.stats["oracle"]["objective"] == "5"


def test_svp_needs_p(tmp_path, capsys):
    path = write(tmp_path, "h.json", [[1]])
    code, _, err = run(["svp", "--input", path], capsys)
    assert code == 1 and "p" in err


def test_ilp_example(tmp_path, capsys):
    path = write(tmp_path, "ilp.json", [[2], [-1]], b=(3, 0), c=(1,))
    code, out, _ = run(["ilp", "--input", path, "--cross-check"], capsys)
    res = ResultFile.parse(out)
    assert code == 0 and res.objective == 1 and res.solution == (1,)
    assert json.loads(out)["solution"] == ["1"]


def test_ilp_infeasible(tmp_path, capsys):
    path = write(tmp_path, "ilp.json", [[2], [-2]], b=(1, -1), c=(1,))
    code, out, _ = run(["ilp", "--input", path], capsys)
    assert code == 2 and ResultFile.parse(out).status == "infeasible"


def test_ilp_unbounded(tmp_path, capsys):
    path = write(tmp_path, "ilp.json", [[1, 0], [0, 1]], b=(0, 0), c=(-1, 0))
    code, out, _ = run(["ilp", "--input", path], capsys)
    assert code == 2 and ResultFile.parse(out).status == "unbounded"


def test_ilp_two_extra_rows(tmp_path, capsys):
    path = write(tmp_path, "ilp.json", [[1, 0], [0, 1], [1, 1], [1, -1]], b=(1, 1, 1, 1), c=(1, 1))
    code, out, _ = run(["ilp", "--input", path], capsys)
    assert code == 3 and ResultFile.parse(out).status == "error"
    code, out, _ = run(["ilp", "--input", path, "--allow-brute-fallback"], capsys)
    res = ResultFile.parse(out)
    assert code == 0 and res.method == "brute" and res.objective == 1


def test_delta(tmp_path, capsys):
    path = write(tmp_path, "h.json", [[1, 0], [0, 2], [1, 1]])
    code, out, _ = run(["delta", "--input", path], capsys)
    assert code == 0 and json.loads(out) == {"delta": "2", "singular_submatrix": False}


def test_bounds(capsys):
    code, out, _ = run(["bounds", "--delta", "2", "--s", "1"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["lemma1"] == ["4", "2"] and obj["lemma3_threshold"] == "73"
    code, out, _ = run(["bounds", "--delta", "2", "--s", "3", "--n", "4", "--p", "1"], capsys)
    assert json.loads(out)["lemma2"]["beta_abs"] == ["3", "6", "12"]


def test_bounds_from_matrix(tmp_path, capsys):
    path = write(tmp_path, "h.json", [[1, 0], [0, 2], [1, 1]])
    code, out, _ = run(["bounds", "--input", path, "--p", "2"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["lemma1_ok"] is True and obj["delta"] == "2"


def test_hnf_and_snf(tmp_path, capsys):
    path = write(tmp_path, "h.json", [[1, 0], [0, 2], [1, 1]])
    code, out, _ = run(["hnf", "--input", path], capsys)
    obj = json.loads(out)
    assert code == 0 and (obj["k"], obj["s"], obj["m"]) == (1, 1, 1)
    path = write(tmp_path, "b.json", [[2, 1], [0, 2]])
    code, out, _ = run(["snf", "--input", path], capsys)
    assert code == 0 and json.loads(out)["diagonal"] == ["1", "4"]
    code, _, err = run(["snf", "--input", write(tmp_path, "z.json", [[1, 2], [2, 4]])], capsys)
    assert code == 1 and "singular" in err


def test_gen_deterministic(tmp_path, capsys):
    args = ["gen", "--n", "3", "--d", "4", "--seed", "11", "--p", "2"]
    _, first, _ = run(args, capsys)
    _, second, _ = run(args, capsys)
    assert first == second
    assert InstanceFile.parse(first).p == 2
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"n": 2, "d": 3, "seed": 4}))
    code, out, _ = run(["gen", "--spec", str(spec), "--kind", "ilp", "--output", str(tmp_path / "o.json")], capsys)
    inst = InstanceFile.parse((tmp_path / "o.json").read_text())
    assert code == 0 and inst.b is not None and inst.c is not None


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    code, out, err = run(["svp", "--input", str(bad), "--p", "2"], capsys)
    assert code == 1 and out == "" and "malformed" in err


def test_stdin_and_entry_point(tmp_path):
    text = json.dumps({"rows": 2, "cols": 2, "data": ["1", "0", "0", "1"], "p": 2})
    proc = subprocess.run(
        [sys.executable, "-m", "deltafpt", "svp", "--input", "-"],
        input=text,
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert ResultFile.parse(proc.stdout).objective == 1


def test_stdin_in_process(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps({"rows": 1, "cols": 1, "data": ["3"], "p": 1})))
    code, out, _ = run(["svp", "--input", "-"], capsys)
    assert code == 0 and ResultFile.parse(out).objective == 3
