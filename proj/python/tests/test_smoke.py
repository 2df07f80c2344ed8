import math

import pytest

import twoendlab as tl


def test_constants():
    assert abs(tl.c0() - 2 * math.sqrt(2) / 3) < 1e-10
    assert abs(tl.c1() - 8.0) < 1e-8
    assert tl.profile(0.0) == 0.0
    assert abs(tl.profile(1.0, 1) - (1 - math.tanh(1 / math.sqrt(2)) ** 2) / math.sqrt(2)) < 1e-14


def test_toda_equation():
    c0, c1 = 2 * math.sqrt(2) / 3, 8.0
    for eps in (1.0, 0.1):
        for r in (0.5, 3.0):
            q, q1, q2 = (tl.toda(eps, r, n) for n in range(3))
            assert abs(c0 * (q2 + q1 / r) - c1 * math.exp(-2 * math.sqrt(2) * q)) < 1e-9


def test_jacobi_wronskian():
    for z in (-3.0, 0.0, 2.5):
        assert tl.jacobi_fields(z)["wronskian"] == pytest.approx(math.cosh(z) ** 2, rel=1e-12)


def test_probe():
    rep = tl.probe(math.sqrt(2) / 2, trials=10)
    assert rep["verdict"] == "no-two-end-regime"
    assert rep["delta_obs"] > 0
    assert len(rep["final_mu"]) == 10


def test_config_errors():
    with pytest.raises(tl.ConfigError, match="sqrt2"):
        tl.normalize_config("mode = solve\nk = 1.0\n")
    with pytest.raises(ValueError):
        tl.normalize_config("k = 6\n")
    text = tl.normalize_config("mode = probe\n")
    assert tl.normalize_config(text) == text


def test_oracle_suite():
    checks = tl.oracle_suite()
    assert checks and all(c["pass"] for c in checks)


def test_verify_run(tmp_path):
    code, report = tl.run("mode = verify\n", out=tmp_path)
    assert code == 0
    assert report["status"] == "pass"
    assert (tmp_path / "report.json").exists()
