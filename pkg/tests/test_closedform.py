import math
import warnings

import numpy as np
import pytest

from ruin2d.closedform import omega, residue_terms, ruin, survival
from ruin2d.errors import InvalidReserve, UnsupportedClaimLaw
from ruin2d.mc import conditional_survival
from ruin2d.model import Exponential, RiskModel, derive
from ruin2d.transform import g, invert_2d

from conftest import z_score


def test_omega_boundary_identity_p0(p0):
    dc = derive(p0)
    expected = dc.C1 * math.exp(-dc.gamma1) - dc.C2 * math.exp(-dc.gamma2)
    assert expected == pytest.approx(-0.132127, abs=1e-6)
    val, err = omega(p0, 1.0, 1.0, tol=1e-9)
    assert val == pytest.approx(expected, abs=1e-7)
    assert err < 1e-9


def test_omega_decays_in_x2(p0):
    val, _ = omega(p0, 1.0, 50.0, tol=1e-12)
    assert abs(val) < 1e-10


def test_omega_finite_at_zero_x1(p0):
    val, err = omega(p0, 0.0, 1.0)
    assert abs(val) < 1.0
    assert math.isfinite(val) and err < 1e-8


def test_omega_underflow_saturation(p0):
    val, err = omega(p0, 3000.0, 3001.0)
    assert val == 0.0 and err == 0.0
    res = survival(p0, 3000.0, 3001.0)
    assert res.saturated
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_survival_lower_cone(p0):
    res = survival(p0, 2.0, 1.0)
    assert res.value == pytest.approx(1.0 - 0.5 * math.exp(-0.5), abs=1e-12)
    assert res.value == pytest.approx(0.696735, abs=1e-6)
    assert res.omega == 0.0


def test_survival_cone_boundary_continuity(p0, p1):
    for m in (p0, p1):
        dc = derive(m)
        for x in (0.25, 0.5, 1.0, 2.0, 4.0):
            upper = survival(m, x, x * (1.0 + 1e-12) + 1e-13, tol=1e-8).value
            cone = 1.0 - dc.C2 * math.exp(-dc.gamma2 * x)
            assert abs(upper - cone) <= 1e-6


def test_survival_interior_pinned_by_mc(p0, p1):
    for m, pt in ((p0, (1.0, 3.0)), (p1, (1.0, 2.0))):
        res = survival(m, *pt)
        est = conditional_survival(m, pt[0], pt[1], 200_000, seed=31)
        assert abs(z_score(res.value, est)) <= 3.5


def test_survival_p0_value_frozen(p0):
    # frozen against the double-inversion route and the conditional MC oracle
    assert survival(p0, 1.0, 3.0).value == pytest.approx(0.8059766742, abs=1e-8)
    assert survival(p0, 1.0, 2.0).value == pytest.approx(0.7782018140, abs=1e-8)


def test_residue_terms_case1(p0):
    terms = residue_terms(p0, 1.0, 2.0)
    dc = derive(p0)
    # z1(-gamma2) = 0 in case 1, so the cross term cancels company2 exactly
    assert terms["cross"] == pytest.approx(-terms["company2"], abs=1e-14)
    assert terms["company1"] == pytest.approx(-dc.C1 * math.exp(-dc.gamma1), abs=1e-14)
    assert terms["constant"] == 1.0


def test_residue_terms_case2(p1):
    dc = derive(p1)
    x1, x2 = 1.0, 2.0
    terms = residue_terms(p1, x1, x2)
    expected_cross = (dc.p2 / dc.p1) * math.exp(-dc.gamma3 * x1 - dc.gamma2 * x2)
    assert terms["cross"] == pytest.approx(expected_cross, rel=1e-12)
    assert dc.gamma3 == pytest.approx(0.469091, abs=1e-6)


def test_residue_zero_pole_coefficient_matches_g_limit(p0, p1):
    """a * (residue at 0) recovers lim q g(q) = C1 to 1e-8."""
    for m in (p0, p1):
        dc = derive(m)
        eps = 1e-6
        lim = 2.0 * (eps / 2.0) * g(m, eps / 2.0) - eps * g(m, eps)
        assert lim == pytest.approx(dc.C1, abs=1e-8)
        terms = residue_terms(m, 1.0, 2.0)
        assert terms["company1"] == pytest.approx(-lim * math.exp(-dc.gamma1), abs=1e-7)


def test_ruin_at_origin(p0):
    assert ruin(p0, 0.0, 0.0) == pytest.approx(0.5, abs=1e-12)


def test_ruin_monotone_in_reserves(p0):
    assert ruin(p0, 1.0, 3.0) >= ruin(p0, 2.0, 3.0) >= ruin(p0, 2.0, 4.0)
    assert ruin(p0, 30.0, 40.0) < 1e-8


def test_survival_monotone_on_grid(p0):
    xs = np.linspace(0.0, 4.0, 10)
    vals = np.array([[survival(p0, x1, x2).value for x2 in xs] for x1 in xs])
    assert np.all(np.diff(vals, axis=0) >= -1e-8)
    assert np.all(np.diff(vals, axis=1) >= -1e-8)
    assert np.all(vals >= -1e-9) and np.all(vals <= 1.0 + 1e-9)


def test_regime_seam_continuity():
    # vary rho across p2^2/p1 = 4/3 with +-1e-3 perturbations; the one-sided
    # linear extrapolations to the seam must agree (the gamma3 term merges
    # with -C2 e^{-gamma2 x2} as gamma3 -> 0), isolating any regime jump from
    # the smooth dependence on lambda
    star, h = 4.0 / 3.0, 1e-3

    def s_at(rho):
        m = RiskModel(lam=rho, claim=Exponential(1.0), c1=3.0, c2=2.0)
        return survival(m, 1.0, 2.0, tol=1e-10).value

    left = 2.0 * s_at(star - h) - s_at(star - 2 * h)
    right = 2.0 * s_at(star + h) - s_at(star + 2 * h)
    assert abs(left - right) < 1e-4
    m_lo = RiskModel(lam=star - h, claim=Exponential(1.0), c1=3.0, c2=2.0)
    m_hi = RiskModel(lam=star + h, claim=Exponential(1.0), c1=3.0, c2=2.0)
    assert derive(m_lo).regime == "case1" and derive(m_hi).regime == "case2"


def test_cross_method_against_inversion(p0):
    for pt in ((0.5, 1.5), (1.0, 2.0), (2.0, 3.0)):
        assert survival(p0, *pt).value == pytest.approx(
            invert_2d(p0, *pt), abs=2e-3
        )


def test_errors(p0, erlang2_model):
    with pytest.raises(InvalidReserve):
        survival(p0, -0.5, 1.0)
    with pytest.raises(UnsupportedClaimLaw):
        survival(erlang2_model, 1.0, 2.0)


def test_quadrature_error_reported_below_tol(p0):
    res = survival(p0, 1.0, 2.0, tol=1e-8)
    assert 0.0 <= res.quadrature_error <= 1e-8


def test_unreachable_tolerance_raises(p0):
    from ruin2d.errors import ToleranceNotMet

    with pytest.raises(ToleranceNotMet):
        omega(p0, 1.0, 2.0, tol=1e-16)


def test_ruin_clips_with_warning(p0, monkeypatch):
    import ruin2d.closedform as cf

    class FakeRes:
        value = 1.0 + 5e-9
        regime = "case1"

    monkeypatch.setattr(cf, "survival", lambda *a, **k: FakeRes())
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        val = cf.ruin(p0, 1.0, 2.0)
    assert val == 0.0
    assert rec and "outside" in str(rec[0].message)
