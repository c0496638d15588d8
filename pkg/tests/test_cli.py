import io
import json
import subprocess
import sys

import dworklab as dl
from dworklab.cli import run
from dworklab.laurent import LaurentPoly


def invoke(argv):
    out = io.StringIO()
    code = run(argv, out=out)
    lines = [json.loads(x) for x in out.getvalue().splitlines()]
    return code, lines


def test_congruence_symbolic_pass():
    code, docs = invoke(
        ["congruence", "--theorem", "1.6ii", "--p", "3", "--N", "4",
         "--s", "2", "--symbolic", "--g", "1"]
    )
    assert code == 0
    (doc,) = docs
    assert doc["$schema"] == "dworklab/report-v1"
    assert doc["verdict"] == "pass"
    assert doc["observed_min_valuation"] >= 2
    assert doc["ctx"]["p"] == 3


def test_congruence_rejects_p2():
    code, docs = invoke(
        ["congruence", "--theorem", "der", "--p", "2", "--N", "4",
         "--s", "1", "--symbolic", "--g", "1"]
    )
    assert code == 2 and docs == []


def test_congruence_rejects_low_precision():
    code, _ = invoke(
        ["congruence", "--theorem", "1.6ii", "--p", "3", "--N", "2",
         "--s", "2", "--symbolic", "--g", "1"]
    )
    assert code == 2


def test_all_theorem_flags_pointwise():
    for theorem in ("decomp", "1.6i", "1.6ii", "det", "der", "der2"):
        code, docs = invoke(
            ["congruence", "--theorem", theorem, "--p", "3", "--N", "4",
             "--s", "1", "--g", "1", "--points", "3", "--seed", "1",
             "--ext", "2"]
        )
        assert code == 0, theorem
        assert docs[0]["verdict"] == "pass"
        assert docs[0]["points"] == 3


def test_kz_verify_residual_pointwise():
    code, docs = invoke(
        ["kz-verify", "--check", "residual", "--p", "5", "--N", "4",
         "--g", "2", "--s", "3", "--points", "5", "--seed", "7", "--ext", "2"]
    )
    assert code == 0
    assert docs[0]["verdict"] == "pass"
    assert docs[0]["observed_min_valuation"] >= 3


def test_kz_verify_other_checks():
    code, docs = invoke(
        ["kz-verify", "--check", "phi", "--p", "3", "--N", "3", "--g", "1",
         "--s", "1"]
    )
    assert code == 0 and docs[0]["verdict"] == "pass"
    code, docs = invoke(
        ["kz-verify", "--check", "coS", "--p", "3", "--N", "3", "--g", "1",
         "--s", "1", "--points", "3", "--seed", "5", "--ext", "2"]
    )
    assert code == 0 and docs[0]["verdict"] == "pass"
    code, docs = invoke(
        ["kz-verify", "--check", "minor", "--p", "7", "--N", "2", "--g", "2",
         "--s", "1", "--points", "3", "--seed", "5", "--ext", "2"]
    )
    assert code == 0 and docs[0]["verdict"] == "pass"


def test_ghosts_command(tmp_path):
    ctx = dl.ctx_new(3, 3, 1)
    cfg = dl.KZConfig(ctx, 1)
    F = dl.master_polynomial(cfg, 1)
    Ft = LaurentPoly(ctx, 1, 3, dict(F.terms))
    path = tmp_path / "tuple.json"
    path.write_text(json.dumps(
        {"lambdas": [Ft.to_json(), Ft.to_json()], "periodic": False}
    ))
    code, docs = invoke(
        ["ghosts", "--p", "3", "--N", "3", "--l", "1",
         "--tuple", str(path), "--delta", "1..1"]
    )
    assert code == 0
    assert [d["s"] for d in docs] == [0, 1]
    assert docs[1]["min_coefficient_valuation"] >= 1
    assert all(d["admissible"] for d in docs)


def test_hw_command(tmp_path):
    point = tmp_path / "point.json"
    point.write_text(json.dumps(["0", "1", "3"]))
    code, docs = invoke(
        ["hw", "--p", "3", "--N", "2", "--m", "1", "--g", "1",
         "--at", str(point)]
    )
    assert code == 0
    assert docs[0]["det"] == ["5"]
    assert docs[0]["det_valuation"] == 0
    code, docs = invoke(["hw", "--p", "3", "--N", "2", "--m", "1", "--g", "1"])
    assert code == 0
    assert docs[0]["det_valuation"] == 0


def test_kz_solve_command(tmp_path):
    code, docs = invoke(["kz-solve", "--p", "3", "--N", "3", "--g", "1",
                         "--s", "1"])
    assert code == 0
    assert docs[0]["solution"]["entries"] == [
        [{"r": 0, "n": 3, "terms": [{"t": [], "z": [0, 0, 0], "c": "1"}]}]
    ] * 3
    point = tmp_path / "point.json"
    point.write_text(json.dumps(["0", "1", "2"]))
    code, docs = invoke(["kz-solve", "--p", "3", "--N", "3", "--g", "1",
                         "--s", "2", "--at", str(point)])
    assert code == 0
    assert docs[0]["column_sum_valuations"][0] >= 2


def test_domain_scan_command():
    code, docs = invoke(["domain-scan", "--p", "3", "--g", "1", "--m", "2",
                         "--exhaustive"])
    assert code == 0
    assert docs[0]["in_D"] == 648
    assert docs[0]["nonempty_bound"] == 638
    assert docs[0]["bound_verdict"] == "pass"


def test_limit_command():
    code, docs = invoke(["limit", "--p", "3", "--N", "4", "--g", "1",
                         "--m", "2", "--point", "0", "--smax", "3"])
    assert code == 0
    doc = docs[0]
    assert all(v >= s + 1 for s, v in enumerate(doc["A_decay"]))
    assert all(c["passed"] for c in doc["certificates"])
    assert doc["ctx"]["m"] == 2


def test_admissible_command(tmp_path):
    code, docs = invoke(["admissible", "--p", "3", "--delta", "0,1",
                         "--boxes=-1:3", "--periodic"])
    assert code == 0 and docs[0]["ok"] and docs[0]["complete"]
    code, docs = invoke(["admissible", "--p", "3", "--delta", "1",
                         "--boxes=0:9", "--periodic"])
    assert code == 1 and not docs[0]["ok"]
    assert docs[0]["witness"]["q"] == [2]
    # tuple-file form
    ctx = dl.ctx_new(3, 2, 1)
    cfg = dl.KZConfig(ctx, 1)
    F = dl.master_polynomial(cfg, 1)
    Ft = LaurentPoly(ctx, 1, 3, dict(F.terms))
    path = tmp_path / "tuple.json"
    path.write_text(json.dumps({"lambdas": [Ft.to_json()] * 3}))
    code, docs = invoke(["admissible", "--p", "3", "--N", "2",
                         "--delta", "1..1", "--tuple", str(path)])
    assert code == 0 and docs[0]["ok"]


def test_reports_are_reproducible():
    argv = ["kz-verify", "--check", "residual", "--p", "3", "--N", "3",
            "--g", "1", "--s", "1", "--points", "4", "--seed", "3",
            "--ext", "2"]
    out1, out2 = io.StringIO(), io.StringIO()
    assert run(argv, out=out1) == 0
    assert run(argv, out=out2) == 0
    assert out1.getvalue() == out2.getvalue()


def test_worker_pool_does_not_change_reports(monkeypatch):
    argv = ["congruence", "--theorem", "1.6ii", "--p", "3", "--N", "4",
            "--s", "2", "--g", "1", "--points", "6", "--seed", "11",
            "--ext", "2"]
    out1 = io.StringIO()
    assert run(argv, out=out1) == 0
    monkeypatch.setenv("DWORKLAB_THREADS", "4")
    out2 = io.StringIO()
    assert run(argv, out=out2) == 0
    assert out1.getvalue() == out2.getvalue()


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dworklab", "congruence", "--theorem",
         "ratio", "--p", "3", "--N", "3", "--s", "1", "--symbolic",
         "--g", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["verdict"] == "pass"
