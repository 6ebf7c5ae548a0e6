import json

import pytest

from cubicstring.cli import dumps, main

JOB = {"l": 1.0, "alpha": 0.6, "k_max": 12,
       "potential": {"type": "coeffs", "entries": [
           {"k": 1, "eps": 1, "re": 1.0}, {"k": 2, "eps": -1, "re": 0.3, "im": -0.5},
           {"k": 3, "eps": 1, "im": 0.2}]}}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def job(tmp_path):
    return _write(tmp_path, "job.json", JOB)


def test_spectrum_l0(job, capsys):
    code, out, _ = _run(["spectrum-l0", "--config", job], capsys)
    d = json.loads(out)
    assert code == 0 and d["N"] == 24
    assert d["lambda"][0] == pytest.approx(5.225154248768964, abs=1e-13)


def test_forward_then_inverse_four(job, tmp_path, capsys):
    fwd = str(tmp_path / "fwd.json")
    plot = tmp_path / "plot.csv"
    code, _, _ = _run(["forward", "--config", job, "--four", "--out", fwd,
                       "--plot-data", str(plot)], capsys)
    assert code == 0
    assert plot.read_text().splitlines()[0] == "lambda,delta0,delta_alpha"
    d = json.loads(open(fwd).read())
    assert d["agreement"]["metric"] <= d["agreement"]["tolerance"]
    code, out, _ = _run(["inverse", "four", fwd, "--config", job], capsys)
    res = json.loads(out)
    assert code == 0 and res["alpha"] == pytest.approx(0.6, rel=1e-9)
    assert res["l2_error"] < 1e-9
    code, out, _ = _run(["inverse", "two", fwd], capsys)
    assert code == 0 and json.loads(out)["alpha"] == pytest.approx(0.6, rel=1e-9)


def test_output_is_deterministic(job, capsys):
    a = _run(["forward", "--config", job], capsys)[1]
    b = _run(["forward", "--config", job], capsys)[1]
    assert a == b


def test_inverse_rejects_and_force(tmp_path, capsys):
    s0 = {"l": 1.0, "eigenvalues": [-8.0, -1.0, 1.0, 8.0]}
    bad = {"l": 1.0, "eigenvalues": [-5.0, 0.0, 2.0, 9.0]}
    f0, f1 = _write(tmp_path, "s0.json", s0), _write(tmp_path, "s1.json", bad)
    code, out, err = _run(["inverse", "two", f0, f1], capsys)
    assert code == 4 and "zero_eigenvalue" in err
    assert json.loads(out)["admissibility"][0]["reason"] == "zero_eigenvalue"


@pytest.mark.parametrize("patch", [
    {"bogus": 1}, {"k_max": 0}, {"alpha": "x"}, {"potential": {"type": "nope"}},
    {"tolerances": {"speed": 1}},
])
def test_bad_config_exit_2(tmp_path, capsys, patch):
    cfg = _write(tmp_path, "bad.json", {**JOB, **patch})
    assert _run(["forward", "--config", cfg], capsys)[0] == 2


def test_usage_and_missing_files(capsys, tmp_path):
    assert _run(["frobnicate"], capsys)[0] == 2
    assert _run(["forward", "--config", str(tmp_path / "absent.json")], capsys)[0] == 2
    assert _run(["inverse", "four", str(tmp_path / "absent.json")], capsys)[0] == 2


def test_thread_variable_validated(monkeypatch, capsys):
    monkeypatch.setenv("CUBICSTRING_THREADS", "zero")
    assert _run(["verify", "--suite", "rankone"], capsys)[0] == 2
    monkeypatch.setenv("CUBICSTRING_THREADS", "2")
    assert _run(["verify", "--suite", "rankone"], capsys)[0] == 0


def test_verify_all(capsys):
    code, out, _ = _run(["verify", "--seed", "3"], capsys)
    d = json.loads(out)
    assert code == 0 and d["passed"] and len(d["checks"]) > 15


def test_dumps_float_format():
    assert dumps({"a": 0.1, "b": [1, float("nan")], "c": True}) == \
        '{"a": 0.10000000000000001, "b": [1, null], "c": true}\n'
