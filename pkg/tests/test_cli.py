import csv
import json

import numpy as np
import pytest

from fidlab.cli import fixture_path, main

SQRT_HALF = 0.7071067811865476


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_fidelity_routes(capsys):
    code, out, _ = run(capsys, "fidelity", "ket0.json", "ketplus.json", "--routes", "direct,mu,var1,block")
    assert code == 0
    assert out["fidelity"] == pytest.approx(SQRT_HALF, abs=1e-12)
    for name in ("direct", "mu", "block"):
        assert out["routes"][name] == pytest.approx(SQRT_HALF, abs=1e-10)
    assert out["routes"]["var1"] == pytest.approx(SQRT_HALF, abs=1e-4)
    assert "var1" in out["witness_diagnostics"]


def test_unknown_route(capsys):
    code, out, err = run(capsys, "fidelity", "ket0.json", "ket1.json", "--routes", "direct,zzz")
    assert code == 2 and out is None and "zzz" in err


def test_orthogonal_exact_routes(capsys):
    code, out, _ = run(capsys, "fidelity", "ket0.json", "ket1.json", "--routes", "direct,mu,block")
    assert code == 0
    assert all(abs(v) <= 1e-12 for v in out["routes"].values())


def test_bures(capsys):
    code, out, _ = run(capsys, "bures", "ket0.json", "ket1.json")
    assert code == 0 and out["bures"] == 1.0
    code, out, _ = run(capsys, "bures", "ket0.json", "ket0.json")
    assert out["bures"] == pytest.approx(0, abs=1e-6)


def test_channel_apply(capsys):
    code, out, _ = run(capsys, "channel", "apply", "depolarizing-0.5.json", "ket0.json")
    assert code == 0
    block = np.array([[complex(*z) for z in row] for row in out["output"]["blocks"][0]])
    np.testing.assert_allclose(block, np.diag([0.75, 0.25]), atol=1e-14)


def test_channel_certify(capsys):
    code, out, _ = run(capsys, "channel", "certify", "amplitude-damping-0.3.json", "--n", "100")
    assert code == 0
    assert out["completely_positive"]["verdict"] is True
    assert out["trace_preserving"] is True
    assert out["dual_schwarz"]["verdict"] is True
    assert out["order_zero"]["verdict"] is False


def test_order_fixtures(capsys):
    _, omega, _ = run(capsys, "order", "paper-omega.json")
    assert omega["predual_positive"] is True and omega["operator_matrix_psd"] is False
    assert omega["operator_min_eig"] == pytest.approx(-1)
    _, delta, _ = run(capsys, "order", "paper-delta.json")
    assert delta["predual_positive"] is False and delta["operator_matrix_psd"] is True
    _, n1, _ = run(capsys, "order", str(fixture_path("predual-n1-psd.json")))
    assert n1["predual_positive"] and n1["operator_matrix_psd"]


def test_sweep_monotonicity_and_csv(capsys, tmp_path):
    path = tmp_path / "m.csv"
    code, out, err = run(capsys, "sweep", "monotonicity", "--d", "3", "--n", "50",
                         "--seed", "4", "--csv", str(path))
    assert code == 0 and out["pass"] and out["n_trials"] == 50
    assert "runtime_ms" not in out
    assert err.strip()
    assert len(list(csv.DictReader(open(path)))) == 50


def test_sweep_byte_identical(capsys):
    main(["--seed", "7", "sweep", "metric", "--n", "30"])
    first = capsys.readouterr().out
    main(["sweep", "metric", "--n", "30", "--seed", "7"])
    assert capsys.readouterr().out == first
    main(["sweep", "metric", "--n", "30", "--seed", "8"])
    assert capsys.readouterr().out != first


def test_sweep_channel_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"margin_tol": 1e-9}))
    code, out, _ = run(capsys, "sweep", "monotonicity", "--channel", "depolarizing-0.5.json",
                       "--n", "20", "--config", str(cfg))
    assert code == 0 and out["pass"] and out["min_margin"] >= 0
    assert out["details"]["source"] != "random_cptp"


def test_sweep_preserve(capsys):
    code, out, _ = run(capsys, "sweep", "preserve", "--channel", "unitary-channel.json", "--n", "20")
    assert code == 0 and out["classification"] == "Preserving"
    assert out["unitary"] is not None and out["injectivity"]["injective"]
    code, out, _ = run(capsys, "sweep", "preserve", "--channel", "depolarizing-0.5.json", "--n", "20")
    assert out["classification"] == "StrictlyIncreasingSomewhere"
    code, _, err = run(capsys, "sweep", "preserve")
    assert code == 2 and "--channel" in err


def test_car(capsys):
    code, out, _ = run(capsys, "car", "--car-level", "2", "--depth", "2")
    assert code == 0 and out["dim"] == 4 and len(out["fidelities"]) == 3
    assert out["spread"] <= 1e-12
    code, _, err = run(capsys, "car", "--car-level", "2", "ket0.json", "ket1.json")
    assert code == 2
    code, _, _ = run(capsys, "car", "--car-level", "11")
    assert code == 2


@pytest.mark.parametrize("argv, needle", [
    (["bures", "missing.json", "ket0.json"], "sigma"),
    (["fidelity", "ket0.json", "BAD"], "rho"),
    (["channel", "apply", "ket0.json", "ket0.json"], "channel"),
    (["sweep", "metric", "--n", "0"], "--n"),
])
def test_invalid_input(capsys, tmp_path, monkeypatch, argv, needle):
    bad = tmp_path / "BAD"
    bad.write_text(json.dumps({"algebra": {"blocks": [{"dim": 2}]},
                               "blocks": [[[1, 0], [0, 1]]]}))  # trace 2
    monkeypatch.chdir(tmp_path)
    code, out, err = run(capsys, *argv)
    assert code == 2 and out is None and needle in err


def test_algebra_mismatch(capsys, tmp_path):
    other = tmp_path / "three.json"
    other.write_text(json.dumps({"algebra": {"blocks": [{"dim": 3, "weight": 1.0}]},
                                 "blocks": [np.diag([1, 0, 0]).tolist()]}))
    code, _, err = run(capsys, "bures", "ket0.json", str(other))
    assert code == 2 and "algebra" in err


def test_config_sabotage(capsys, tmp_path, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"not_a_tol": 1}))
    code, _, err = run(capsys, "--config", str(bad), "bures", "ket0.json", "ket1.json")
    assert code == 2 and "not_a_tol" in err
    loose = tmp_path / "loose.json"
    loose.write_text(json.dumps({"psd_tol": 100.0}))
    monkeypatch.setenv("FIDLAB_CONFIG", str(loose))
    code, out, err = run(capsys, "selftest", "--only", "5")
    assert code == 1 and out["passed"] is False and "[FAIL]  5" in err


def test_selftest_subset(capsys):
    code, out, err = run(capsys, "selftest", "--only", "5,9")
    assert code == 0 and out["passed"]
    assert [c["number"] for c in out["criteria"]] == [5, 9]
    assert "2/2 criteria passed" in err
    code, _, _ = run(capsys, "selftest", "--only", "11")
    assert code == 2
