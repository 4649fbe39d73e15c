import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruin2d.errors import DomainError, UnsupportedClaimLaw
from ruin2d.model import (
    Empirical,
    Exponential,
    PhaseType,
    RiskModel,
    denormalize,
    derive,
    load_model,
    model_from_dict,
    model_to_dict,
    normalize,
    validate,
)
from ruin2d.transform import kappa


def test_validate_passes_p0(p0):
    report = validate(p0)
    assert report.ok
    assert report.violations == ()


def test_validate_rejects_wrong_premium_ordering():
    m = RiskModel(lam=1.0, claim=Exponential(1.0), c1=2.0, c2=3.0)
    report = validate(m)
    assert not report.ok
    assert any("net-profit ordering" in v for v in report.violations)


def test_validate_rejects_negative_loading():
    m = RiskModel(lam=3.0, claim=Exponential(1.0), c1=3.0, c2=2.0)
    report = validate(m)
    assert not report.ok
    assert any("p2 > rho" in v for v in report.violations)


def test_validate_warns_on_unnormalized_proportions(p0):
    # delta = (1, 1) sums to 2; accepted with a warning
    assert validate(p0).warnings


def test_validate_rejects_degenerate_boundaries():
    equal_p = RiskModel(lam=1.0, claim=Exponential(1.0), c1=2.0, c2=2.0)
    assert not validate(equal_p).ok
    p2_eq_rho = RiskModel(lam=2.0, claim=Exponential(1.0), c1=3.0, c2=2.0)
    assert not validate(p2_eq_rho).ok


def test_derive_p0_constants(p0):
    dc = derive(p0)
    assert dc.gamma1 == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert dc.gamma2 == pytest.approx(0.5, abs=1e-14)
    assert dc.C1 == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert dc.C2 == pytest.approx(0.5, abs=1e-14)
    assert dc.gamma3 == pytest.approx(-1.0 / 6.0, abs=1e-14)
    assert dc.q_plus_end == pytest.approx(-7.464102, abs=1e-6)
    assert dc.q_minus_end == pytest.approx(-0.535898, abs=1e-6)
    assert dc.regime == "case1"
    assert dc.d == pytest.approx(-1.0)


def test_derive_p1_constants(p1):
    dc = derive(p1)
    assert dc.rho == pytest.approx(2.0)
    assert dc.gamma2 == pytest.approx(0.090909, abs=1e-6)
    assert dc.C2 == pytest.approx(0.909091, abs=1e-6)
    assert dc.gamma3 == pytest.approx(0.469091, abs=1e-6)
    assert dc.regime == "case2"  # p2^2/p1 = 0.968 < rho


def test_derive_rejects_invalid_model():
    bad = RiskModel(lam=1.0, claim=Exponential(1.0), c1=2.0, c2=3.0)
    with pytest.raises(DomainError):
        derive(bad)


def test_kappa_consistency_at_minus_gamma2(p0, p1):
    for m in (p0, p1):
        dc = derive(m)
        assert abs(kappa(m, 2, -dc.gamma2)) < 1e-12


def test_phasetype_derive_partial(erlang2_model):
    dc = derive(erlang2_model)
    assert dc.p1 == 3.0 and dc.p2 == 2.0
    assert dc.rho == pytest.approx(1.0)
    assert dc.d == pytest.approx(-1.0)
    with pytest.raises(UnsupportedClaimLaw):
        _ = dc.gamma1
    with pytest.raises(UnsupportedClaimLaw):
        _ = dc.q_plus_end


valid_exponential_models = st.builds(
    RiskModel,
    lam=st.floats(0.05, 5.0),
    claim=st.builds(Exponential, mu=st.floats(0.1, 5.0)),
    c1=st.floats(0.1, 20.0),
    c2=st.floats(0.1, 20.0),
    delta1=st.floats(0.1, 2.0),
    delta2=st.floats(0.1, 2.0),
)


@given(valid_exponential_models)
@settings(max_examples=200, deadline=None)
def test_derived_constant_ordering(m):
    if not validate(m).ok:
        return
    dc = derive(m)
    assert m.p1 > m.p2 > m.rho
    assert dc.gamma1 > dc.gamma2 > 0
    assert 0 < dc.C1 < dc.C2 < 1
    assert dc.d < 0
    # exactly on the regime seam rho = p2^2/p1 the cut endpoint q_minus
    # touches -gamma2 (the ordering is strict off the seam)
    assert dc.q_plus_end < dc.q_minus_end < 0
    if abs(dc.gamma3) > 1e-9 * dc.mu:
        assert dc.q_minus_end < -dc.gamma2
    else:
        assert dc.q_minus_end <= -dc.gamma2 + 1e-12 * dc.gamma2
    # regime flag is "case2" exactly when gamma3 > 0
    assert (dc.regime == "case2") == (dc.gamma3 > 0) or dc.gamma3 == 0
    # kappa_i(-gamma_i) = 0; the strict 1e-12 relative check lives on the
    # canonical models, here the bound carries the cancellation condition
    # number mu/(mu - gamma_i) = mu p_i / lam of evaluating kappa at the root.
    for i, gamma in ((1, dc.gamma1), (2, dc.gamma2)):
        assert abs(kappa(m, i, 0.0)) == 0.0
        p = m.p1 if i == 1 else m.p2
        scale = p * gamma * max(1.0, dc.mu * p / m.lam)
        assert abs(kappa(m, i, -gamma)) < 64 * np.finfo(float).eps * scale


def test_normalize_examples():
    m = RiskModel(lam=1.0, claim=Exponential(1.0), c1=3.0, c2=2.0)
    assert normalize(m, 2.0, 3.0) == (2.0, 3.0)
    m2 = RiskModel(lam=1.0, claim=Exponential(1.0), c1=1.5, c2=1.0,
                   delta1=0.5, delta2=0.5)
    assert normalize(m2, 2.0, 3.0) == (4.0, 6.0)


@given(
    u1=st.floats(0.0, 1e6),
    u2=st.floats(0.0, 1e6),
    d1=st.floats(0.1, 2.0),
    d2=st.floats(0.1, 2.0),
)
@settings(max_examples=100, deadline=None)
def test_normalize_round_trip(u1, u2, d1, d2):
    m = RiskModel(lam=1.0, claim=Exponential(1.0), c1=3.0 * d1, c2=2.0 * d2,
                  delta1=d1, delta2=d2)
    x1, x2 = normalize(m, u1, u2)
    v1, v2 = denormalize(m, x1, x2)
    assert v1 == pytest.approx(u1, rel=1e-12, abs=1e-12)
    assert v2 == pytest.approx(u2, rel=1e-12, abs=1e-12)


def test_json_round_trip(tmp_path, p0, erlang2_model):
    for m in (p0, erlang2_model):
        data = model_to_dict(m)
        again = model_from_dict(json.loads(json.dumps(data)))
        assert again.lam == m.lam and again.c1 == m.c1 and again.c2 == m.c2
        assert type(again.claim) is type(m.claim)
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model_to_dict(p0)))
    loaded = load_model(path)
    assert loaded == p0


def test_empirical_law_validation():
    emp = Empirical(sampler=lambda rng, n: rng.exponential(1.0, n), mean=1.0)
    m = RiskModel(lam=1.0, claim=emp, c1=3.0, c2=2.0)
    assert validate(m).ok
    bad = RiskModel(lam=1.0, claim=Empirical(sampler=emp.sampler, mean=math.inf),
                    c1=3.0, c2=2.0)
    assert not validate(bad).ok


def test_phasetype_invariant_checks():
    bad_beta = RiskModel(
        lam=1.0,
        claim=PhaseType(beta=[0.7, 0.7], B=[[-2.0, 1.0], [0.0, -2.0]]),
        c1=3.0,
        c2=2.0,
    )
    assert not validate(bad_beta).ok
    bad_diag = RiskModel(
        lam=1.0,
        claim=PhaseType(beta=[1.0, 0.0], B=[[2.0, 1.0], [0.0, -2.0]]),
        c1=3.0,
        c2=2.0,
    )
    assert not validate(bad_diag).ok


def test_mu_property_guard(erlang2_model):
    with pytest.raises(UnsupportedClaimLaw):
        _ = erlang2_model.mu


def test_phasetype_mean():
    claim = PhaseType(beta=[1.0, 0.0], B=[[-2.0, 2.0], [0.0, -2.0]])
    assert claim.mean == pytest.approx(1.0)
    assert np.allclose(claim.exit_rates, [0.0, 2.0])
