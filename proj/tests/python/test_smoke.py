import math

import pytest

import mmdlab


def test_covering_number():
    assert mmdlab.covering_number([0.0, 0.05, 0.5, 1.0], 0.1) == 3
    with pytest.raises(mmdlab.Error, match="empty set"):
        mmdlab.covering_number([], 0.1)


def test_spectral_radius():
    r = mmdlab.spectral_radius([[1, 1], [1, 0]])
    assert r["estimate"] == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-7)
    assert r["certified_upper"] >= r["estimate"]
    assert r["gershgorin"] == 2


def test_full_square_slope():
    est = mmdlab.sandwich(map="full-square", eps_start="2^-3", eps_stop="2^-8")
    assert est["slope_upper"] == pytest.approx(1.0, abs=1e-3)
    assert [r["eps"] for r in est["records"]] == mmdlab.ladder(eps_start="2^-3", eps_stop="2^-8")


def test_box_dimension_of_harmonic_points():
    fit = mmdlab.box_dimension(set="harmonic", points=100000, eps_start="2^-6", eps_stop="2^-14")
    assert abs(fit["slope"] - 0.5) <= 0.05
    assert fit["table"][0][0] == 2.0**-6


def test_run_and_hash(tmp_path):
    text = f"command = boxdim\nset = cantor\neps_start = 0.111111\neps_stop = 0.0001\neps_ratio = 3\nout = {tmp_path}\n"
    code, report = mmdlab.run(text)
    assert code == 0
    assert "verdict: PASS" in report
    assert (tmp_path / "boxdim.csv").exists()
    assert mmdlab.config_hash(text) == mmdlab.config_hash(text.replace(str(tmp_path), "elsewhere"))


def test_errors_surface_as_value_error():
    with pytest.raises(mmdlab.Error, match="unknown key"):
        mmdlab.sandwich(colour="red")
    with pytest.raises(ValueError):
        mmdlab.spectral_radius([[1.0]], tol=1.0)
