import json
import subprocess
import sys

import pytest

from hlsplit import jsonio
from hlsplit.cli import BAD_GENERATOR, HL_VIOLATION, MALFORMED, OK, PROPERTY_FAILURE, main
from hlsplit.exactla import Mat
from hlsplit.filt import FilteredSpace
from hlsplit.hlpair import make_pair
from hlsplit.kunneth import snzdiff


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def cli(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "hlsplit", *args],
        input=stdin,
        capture_output=True,
        text=True,
        check=False,
    )


@pytest.fixture
def snz_file(tmp_path, capsys):
    path = tmp_path / "snz.json"
    assert main(["gen", "snzdiff", "--out", str(path)]) == OK
    capsys.readouterr()
    return path


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


# -- validate --------------------------------------------------------------------


def test_validate_snzdiff(snz_file, capsys):
    code, out, _ = run(["validate", str(snz_file)], capsys)
    rep = json.loads(out)
    assert code == OK
    assert rep["range"] == [-2, 2]
    assert rep["graded_dims"] == {"-2": 1, "0": 1, "2": 1}
    assert rep["hl"]["ok"] and rep["hl"]["ranks"]["2"] == {"dim_low": 1, "dim_high": 1, "rank": 1}


def test_validate_non_nested(tmp_path, capsys):
    path = write(
        tmp_path,
        "bad.json",
        {
            "ambient_dim": 2,
            "filtration": [{"index": 0, "basis": [["1", "0"]]}, {"index": 1, "basis": [["0", "1"]]}],
            "e": [["0", "0"], ["0", "0"]],
        },
    )
    code, out, _ = run(["validate", str(path)], capsys)
    assert code == MALFORMED
    assert json.loads(out)["field"] == "filtration"


def test_validate_zeroed_e(tmp_path, capsys):
    obj = jsonio.pair_to_json(snzdiff())
    obj["e"][1][0] = "0"
    code, out, _ = run(["validate", str(write(tmp_path, "z.json", obj))], capsys)
    assert code == HL_VIOLATION
    assert json.loads(out)["hl"]["failing"] == [2]


def test_validate_missing_file(tmp_path, capsys):
    code, _, _ = run(["validate", str(tmp_path / "nope.json")], capsys)
    assert code == MALFORMED


def test_validate_several_files_worst_code(snz_file, tmp_path, capsys):
    obj = jsonio.pair_to_json(snzdiff())
    obj["e"][1][0] = "0"
    bad = write(tmp_path, "z.json", obj)
    code, out, _ = run(["validate", str(snz_file), str(bad)], capsys)
    assert code == HL_VIOLATION and len(json.loads(out)) == 2


# -- split -----------------------------------------------------------------------


def test_split_all_snzdiff(snz_file, capsys):
    code, out, _ = run(["split", str(snz_file), "--method", "all"], capsys)
    rep = json.loads(out)
    assert code == OK
    sp = rep["splittings"]
    assert sp["phi1"]["columns"] == [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
    assert sp["omega1"]["columns"] == [["1", "0", "0"], ["-1", "1", "0"], ["0", "0", "1"]]
    assert sp["omega2"]["columns"] == [["1", "0", "0"], ["-1", "1", "0"], ["-1", "0", "1"]]
    assert sp["phi2"]["columns"] == [["1", "0", "0"], ["-1", "1", "0"], ["0", "-1", "1"]]
    assert sp["phi3"]["columns"] == [["1", "0", "0"], ["-1/3", "1", "0"], ["-1/18", "-2/3", "1"]]
    assert rep["e_good_splitting_exists"] is False
    assert not any(rep["e_good"].values())
    assert rep["comparison"]["phi1|phi2"] is False
    assert rep["conjugated_e"]["phi1"]["e_tilde"]["0"] == [["0", "0", "0"], ["0", "0", "0"], ["0", "0", "1"]]


def test_split_homogeneous_model(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert main(["gen", "random", "r=2", "q=1,1,1", "density=0", "--out", str(path)]) == OK
    code, out, _ = run(["split", str(path)], capsys)
    rep = json.loads(out)
    ident = [[("1" if a == b else "0") for a in range(6)] for b in range(6)]
    assert code == OK
    assert all(s["columns"] == ident for s in rep["splittings"].values())
    assert all(rep["comparison"].values())


def test_split_fiber_class_all_equal(tmp_path, capsys):
    path = tmp_path / "p.json"
    assert main(["gen", "product", "pn:1", "pn:1", "eta=1⊗h", "--out", str(path)]) == OK
    code, out, _ = run(["split", str(path)], capsys)
    rep = json.loads(out)
    assert code == OK and all(rep["comparison"].values()) and rep["e_good_splitting_exists"]


def test_split_single_method_and_latex(snz_file, capsys):
    code, out, _ = run(["split", str(snz_file), "--method", "phi3"], capsys)
    rep = json.loads(out)
    assert code == OK and list(rep["splittings"]) == ["phi3"] and "comparison" not in rep
    code, out, _ = run(["split", str(snz_file), "--method", "phi3", "--latex"], capsys)
    assert code == OK
    assert "-\\frac{1}{18}" in out and "\\begin{pmatrix}" in out


def test_split_rejects_non_hl(tmp_path, capsys):
    obj = jsonio.pair_to_json(snzdiff())
    obj["e"][1][0] = "0"
    code, _, err = run(["split", str(write(tmp_path, "z.json", obj))], capsys)
    assert code == HL_VIOLATION and "HL" in err


def test_split_malformed(tmp_path, capsys):
    path = tmp_path / "x.json"
    path.write_text("[]", encoding="utf-8")
    code, _, _ = run(["split", str(path)], capsys)
    assert code == MALFORMED


# -- gen -------------------------------------------------------------------------


def test_gen_snzdiff_matches_instance(capsys):
    code, out, _ = run(["gen", "snzdiff"], capsys)
    assert code == OK
    assert out == jsonio.dumps(jsonio.pair_to_json(snzdiff()))


def test_gen_random_validates(tmp_path, capsys):
    path = tmp_path / "r.json"
    assert main(["gen", "random", "r=2", "q=1,0,1", "seed=7", "--out", str(path)]) == OK
    code, out, _ = run(["validate", str(path)], capsys)
    assert code == OK and json.loads(out)["range"] == [-2, 2]
    meta = json.loads(path.read_text())["metadata"]
    assert meta["seed"] == 7 and meta["generator"] == "random"


def test_gen_seed_flag(capsys):
    _, a, _ = run(["gen", "random", "r=1", "--seed", "5"], capsys)
    _, b, _ = run(["gen", "random", "r=1", "seed=5"], capsys)
    assert a == b


@pytest.mark.parametrize(
    "spec",
    [
        ["product", "pn:1", "pn:1", "eta=h⊗h"],
        ["product", "pn:1", "pn:1", "eta=h⊗1"],
        ["product", "pn:1", "torus", "eta=1⊗h"],
        ["random", "r=2", "q=1,1"],
        ["random"],
        ["random", "r=1", "noise=2"],
        ["random", "r=1", "colour=red"],
        ["snzdiff", "r=1"],
        ["klein"],
    ],
)
def test_gen_bad_specs(spec, capsys):
    code, _, err = run(["gen", *spec], capsys)
    assert code == BAD_GENERATOR and err


def test_gen_product_elliptic(capsys):
    code, out, _ = run(
        ["gen", "product", "elliptic", "elliptic", "eta=1⊗omega + omega⊗1 + alpha⊗beta - beta⊗alpha"],
        capsys,
    )
    assert code == OK and json.loads(out)["ambient_dim"] == 16


# -- check -----------------------------------------------------------------------


def test_check_snzdiff_all(snz_file, capsys):
    code, out, _ = run(["check", str(snz_file), "--suite", "all"], capsys)
    rep = json.loads(out)
    assert code == OK
    assert all(r["ok"] for r in rep["results"]) and "counterexample" not in rep


def test_check_fiber_class_reports_coincidence(tmp_path, capsys):
    path = tmp_path / "p.json"
    main(["gen", "product", "pn:1", "pn:1", "eta=1⊗h", "--out", str(path)])
    capsys.readouterr()
    code, out, _ = run(["check", str(path), "--suite", "paper"], capsys)
    res = {r["name"]: r for r in json.loads(out)["results"]}
    assert code == OK and res["eunico"]["detail"] == "five-way coincidence"


def test_check_failure_dumps_counterexample(tmp_path, capsys):
    pair = make_pair(FilteredSpace.trivial(2, 0), Mat([[0, 0], [1, 0]]))
    path = write(tmp_path, "n.json", jsonio.pair_to_json(pair))
    code, out, err = run(["check", str(path), "--suite", "paper"], capsys)
    rep = json.loads(out)
    assert code == PROPERTY_FAILURE
    assert rep["counterexample"]["failed"] == ["eecc11"]
    assert rep["counterexample"]["instance"]["e"] == [["0", "0"], ["1", "0"]]
    assert "eecc11" in err


def test_check_tensor_suite_on_random(tmp_path, capsys):
    path = tmp_path / "r.json"
    main(["gen", "random", "r=1", "q=1,1", "density=0.6", "noise=1", "seed=3", "--out", str(path)])
    capsys.readouterr()
    code, out, _ = run(["check", str(path), "--suite", "tensor"], capsys)
    assert code == OK
    assert {r["name"] for r in json.loads(out)["results"]} == {"tensor_hl", "tensor_phi3"}


def test_usage_errors_exit_malformed(capsys):
    with pytest.raises(SystemExit) as info:
        main(["split"])
    assert info.value.code == MALFORMED
    with pytest.raises(SystemExit) as info:
        main(["check", "x.json", "--suite", "bogus"])
    assert info.value.code == MALFORMED


# -- process-level behaviour -----------------------------------------------------


def test_stdin_and_determinism(snz_file):
    text = snz_file.read_text()
    first = cli("split", "-", "--method", "all", stdin=text)
    second = cli("split", "-", "--method", "all", stdin=text)
    from_file = cli("split", str(snz_file), "--method", "all")
    assert first.returncode == OK
    assert first.stdout == second.stdout == from_file.stdout


def test_out_files_byte_identical(snz_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli("check", str(snz_file), "--out", str(a)).returncode == OK
    assert cli("check", str(snz_file), "--out", str(b)).returncode == OK
    assert a.read_bytes() == b.read_bytes()


def test_jobs_matches_serial(snz_file, tmp_path):
    other = tmp_path / "p.json"
    assert cli("gen", "product", "pn:1", "pn:1", "eta=h⊗1 + 1⊗h", "--out", str(other)).returncode == OK
    serial = cli("check", str(snz_file), str(other))
    parallel = cli("check", str(snz_file), str(other), "--jobs", "2")
    assert serial.returncode == parallel.returncode == OK
    assert serial.stdout == parallel.stdout
    v = cli("validate", str(snz_file), str(other), "--jobs", "2")
    assert v.returncode == OK and len(json.loads(v.stdout)) == 2
