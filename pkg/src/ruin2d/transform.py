"""Laplace-domain machinery for the joint survival probability.

For compound-Poisson claims with intensity ``lam`` and exponential sizes of
intensity ``mu``, the net process of company ``i`` has Laplace exponent

    kappa_i(theta) = p_i * theta - lam * theta / (mu + theta).

The double space transform of the survival probability factors through the two
roots ``z1(q) <= z2(q)`` of the quadratic ``kappa_1(z + q) = q (p1 - p2)``.
For real ``q`` inside the cut ``[q_plus_end, q_minus_end]`` the roots form a
conjugate pair ``a(q) -+ i b(q)``; that cut is what produces the oscillatory
integral evaluated by :mod:`ruin2d.closedform`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    ConvergenceWarning,
    CutError,
    DomainError,
    NoRealRoot,
    PoleError,
    UnsupportedClaimLaw,
)
from .model import DerivedConstants, Exponential, RiskModel, derive

__all__ = [
    "LaplaceExponent",
    "RootPair",
    "CutPoint",
    "kappa",
    "kappa_roots",
    "z_roots",
    "q_plus",
    "g",
    "ab",
    "psi_tilde",
    "psi_tilde_general",
    "invert_2d",
]


def _require_exponential(model: RiskModel) -> float:
    if not isinstance(model.claim, Exponential):
        raise UnsupportedClaimLaw("transform layer is instantiated for exponential claims only")
    return model.claim.mu


def _p(model: RiskModel, i: int) -> float:
    if i == 1:
        return model.p1
    if i == 2:
        return model.p2
    raise ValueError("company index must be 1 or 2")


def kappa(model: RiskModel, i: int, theta):
    """Laplace exponent ``kappa_i(theta) = p_i theta - lam theta/(mu+theta)``.

    Real arguments must satisfy ``theta > -mu``; complex arguments are
    evaluated by analytic continuation away from the pole.
    """
    mu = _require_exponential(model)
    p = _p(model, i)
    if isinstance(theta, complex) or np.iscomplexobj(theta):
        if theta == -mu:
            raise DomainError("kappa has a pole at theta = -mu")
        return p * theta - model.lam * theta / (mu + theta)
    theta = float(theta)
    if theta <= -mu:
        raise DomainError(f"kappa_{i} requires theta > -mu = {-mu}")
    return p * theta - model.lam * theta / (mu + theta)


def kappa_derivative_origin(model: RiskModel, i: int) -> float:
    """``kappa_i'(0+) = p_i - rho``."""
    return _p(model, i) - model.rho


def kappa_roots(model: RiskModel, q: float, i: int = 1) -> tuple[float, float]:
    """Real roots ``theta_minus <= theta_plus`` of ``kappa_i(theta) = q``.

    Clearing ``mu + theta`` turns the equation into
    ``p theta^2 + (p mu - lam - q) theta - q mu = 0``.
    Raises :class:`NoRealRoot` when the discriminant is negative.
    """
    mu = _require_exponential(model)
    p = _p(model, i)
    b = p * mu - model.lam - q
    disc = b * b + 4.0 * p * q * mu
    if disc < 0.0:
        raise NoRealRoot(f"kappa_{i}(theta) = {q} has no real root")
    root = math.sqrt(disc)
    return (-b - root) / (2.0 * p), (-b + root) / (2.0 * p)


@dataclass(frozen=True)
class LaplaceExponent:
    """Abstract Laplace exponent with its derivative at the origin.

    The general transform path accepts any spectrally negative exponent, but
    only the compound-Poisson-exponential case ships tested end to end; treat
    other inputs as experimental.
    """

    kappa: Callable[[complex], complex]
    derivative_origin: float
    params: dict | None = None

    @classmethod
    def compound_poisson_exponential(cls, model: RiskModel, i: int = 1) -> "LaplaceExponent":
        mu = _require_exponential(model)
        p = _p(model, i)
        return cls(
            kappa=lambda theta: p * theta - model.lam * theta / (mu + theta),
            derivative_origin=p - model.rho,
            params={"p": p, "lam": model.lam, "mu": mu},
        )


@dataclass(frozen=True)
class RootPair:
    """The two branches ``z1`` (minus the square root) and ``z2`` (plus)."""

    z1: complex
    z2: complex
    q: complex


def _sqrt_principal(z: complex) -> complex:
    """Principal square root, cut along the negative half-line.

    Every branch-sensitive computation in the package funnels through here.
    """
    return cmath.sqrt(complex(z))


def _root_quadratic_parts(dc: DerivedConstants, q):
    """Coefficients of the monic-cleared quadratic behind the z-roots."""
    beta = dc.p2 * q + dc.p1 * (q + dc.gamma1)
    disc = beta * beta - 4.0 * dc.p1 * q * dc.p2 * (q + dc.gamma2)
    return beta, disc


def z_roots(model: RiskModel, q, dc: DerivedConstants | None = None) -> RootPair:
    """Roots of ``kappa_1(z + q) = q (p1 - p2)`` for complex or real ``q``.

    Real ``q`` outside the cut yields two real values with ``z1 <= z2``.
    """
    dc = dc or derive(model)
    beta, disc = _root_quadratic_parts(dc, q)
    if not (isinstance(q, complex) or np.iscomplexobj(q)) and disc >= 0.0:
        root = math.sqrt(disc)
        return RootPair((-beta - root) / (2 * dc.p1), (-beta + root) / (2 * dc.p1), q)
    root = _sqrt_principal(disc)
    return RootPair((-beta - root) / (2 * dc.p1), (-beta + root) / (2 * dc.p1), q)


def q_plus(model: RiskModel, r: float) -> float:
    """Largest real root of ``kappa_1(alpha) = r``.

    Satisfies the identification ``q_plus((p1 - p2) q) = z2(q) + q`` for real
    ``q`` to the right of the cut.
    """
    _, theta_plus = kappa_roots(model, r, i=1)
    return theta_plus


def g(model: RiskModel, q, dc: DerivedConstants | None = None, cut_margin: float = 1e-9):
    """Residual factor of the partially inverted transform.

    ``g(q) = (p2 - rho)(mu + z1(q) + q) / (q (mu p2 - lam + p2 q))`` with
    simple poles at ``0`` and ``-gamma2``; rejected on (and within
    ``cut_margin`` of) the cut, where :func:`ab` applies instead.
    """
    dc = dc or derive(model)
    mu = dc.mu
    qc = complex(q)
    if abs(qc) < 1e-14 or abs(qc + dc.gamma2) < 1e-14:
        raise PoleError("g has simple poles at q = 0 and q = -gamma2")
    if abs(qc.imag) <= cut_margin and (
        dc.q_plus_end - cut_margin <= qc.real <= dc.q_minus_end + cut_margin
    ):
        raise CutError("g is not defined on the cut; use ab(q) there")
    z1 = z_roots(model, q, dc).z1
    val = (dc.p2 - dc.rho) * (mu + z1 + qc) / (qc * (mu * dc.p2 - model.lam + dc.p2 * qc))
    if not (isinstance(q, complex) or np.iscomplexobj(q)):
        return val.real if abs(val.imag) < 1e-13 * max(1.0, abs(val.real)) else val
    return val


class CutPoint(NamedTuple):
    a: float
    b: float
    f: float


def ab(model: RiskModel, q: float, dc: DerivedConstants | None = None) -> CutPoint:
    """Real and imaginary parts ``a(q)``, ``b(q)`` of ``z1`` on the cut.

    Also returns ``f(q) = mu + q + a(q)``.  The radicand vanishes at the cut
    endpoints; tiny negative round-off there is clamped to zero.
    """
    dc = dc or derive(model)
    if not (dc.q_plus_end <= q <= dc.q_minus_end):
        raise DomainError(f"q={q} outside the cut [{dc.q_plus_end}, {dc.q_minus_end}]")
    mu, lam, p1, p2 = dc.mu, model.lam, dc.p1, dc.p2
    lin = p1 * mu - lam + p2 * q + p1 * q
    a = -lin / (2.0 * p1)
    radicand = 4.0 * p1 * (p2 * q * mu + p2 * q * q - lam * q) - lin * lin
    if radicand < 0.0:
        if radicand < -1e-9 * max(1.0, lin * lin):
            raise DomainError("negative radicand on the cut; inconsistent model constants")
        radicand = 0.0
    b = math.sqrt(radicand) / (2.0 * p1)
    return CutPoint(a=a, b=b, f=mu + q + a)


def psi_tilde(model: RiskModel, p, q, dc: DerivedConstants | None = None):
    """Double Laplace transform of the survival probability, exponential claims.

    ``(mu + p + q)(p2 - rho) / (p p1 (z1(q) - p) z2(q))`` for ``Re p, Re q > 0``.
    """
    dc = dc or derive(model)
    roots = z_roots(model, q, dc)
    val = (dc.mu + p + q) * (dc.p2 - dc.rho) / (p * dc.p1 * (roots.z1 - p) * roots.z2)
    if not any(isinstance(v, complex) or np.iscomplexobj(v) for v in (p, q)):
        return val.real if isinstance(val, complex) else val
    return val


def psi_tilde_general(
    exponent1: LaplaceExponent,
    p1: float,
    p2: float,
    p: float,
    q: float,
    q_plus_fn: Callable[[float], float],
    form: str = "simplified",
):
    """General-exponent double transform on real ``p, q > 0`` (experimental).

    ``form="simplified"`` evaluates
    ``kappa_2'(0+) / (p (kappa_1(p+q) - q(p1-p2))) * [1 + p/(q - q_plus(q(p1-p2)))]``
    with ``kappa_2'(0+) = kappa_1'(0+) + (p2 - p1)``; ``form="first"`` keeps the
    unsimplified arrangement of the same quantity for cross-checking.
    """
    s = p + q
    r = (p1 - p2) * q
    k1s = exponent1.kappa(s)
    qp = q_plus_fn(r)
    k2_prime0 = exponent1.derivative_origin + (p2 - p1)
    if form == "simplified":
        return k2_prime0 / (p * (k1s - r)) * (1.0 + p / (q - qp))
    if form == "first":
        num = k2_prime0 * (r + (p1 - p2) * (p - qp))
        den = p * (r + (p2 - p1) * qp) * (k1s - r)
        return num / den
    raise ValueError("form must be 'simplified' or 'first'")


# ---------------------------------------------------------------------------
# Numeric double inversion (Bromwich discretization with Euler summation).
# ---------------------------------------------------------------------------

def _euler_weights(m: int) -> np.ndarray:
    w = np.array([math.comb(m, k) for k in range(m + 1)], dtype=float)
    return w / 2.0 ** m


def _invert_real(fhat, t: float, m: int, a: float) -> float:
    """Invert at ``t`` a transform of a real-valued function.

    Alternating-series discretization of the Bromwich integral at abscissa
    ``a/(2t)`` with binomial (Euler) acceleration of the partial sums
    ``s_m .. s_2m``; conjugate symmetry halves the evaluations.
    """
    base = a / (2.0 * t)
    step = math.pi / t
    k = np.arange(2 * m + 1)
    values = fhat(base + 1j * k * step)
    seq = np.real(values) * (-1.0) ** k
    seq[0] *= 0.5
    partial = np.cumsum(seq)
    est = float(np.dot(_euler_weights(m), partial[m:]))
    return math.exp(a / 2.0) / t * est


def _invert_complex(fhat, t: float, m: int, a: float) -> complex:
    """As :func:`_invert_real` but without conjugate symmetry.

    Needed for the inner inversion, whose target (a transform slice in the
    other variable) is complex-valued; sums ``k = -2m .. 2m`` symmetrically.
    """
    base = a / (2.0 * t)
    step = math.pi / t
    k = np.arange(-2 * m, 2 * m + 1)
    values = fhat(base + 1j * k * step)
    signed = values * (-1.0) ** np.abs(k)
    center = 2 * m
    partial = np.empty(2 * m + 1, dtype=complex)
    partial[0] = signed[center]
    acc = partial[0]
    for n in range(1, 2 * m + 1):
        acc += signed[center - n] + signed[center + n]
        partial[n] = acc
    est = complex(np.dot(_euler_weights(m), partial[m:]))
    return cmath.exp(a / 2.0) / (2.0 * t) * est


def _invert_2d_once(model, dc, x1, x2, m, a_inner, a_outer):
    def inner(q_vec):
        out = np.empty(len(q_vec), dtype=complex)
        for idx, qv in enumerate(q_vec):
            out[idx] = _invert_complex(
                lambda p_vec: psi_tilde(model, p_vec, qv, dc), x1, m, a_inner
            )
        return out

    return _invert_real(inner, x2, m, a_outer)


def invert_2d(
    model: RiskModel,
    x1: float,
    x2: float,
    m: int = 25,
    a_inner: float = 30.0,
    a_outer: float = 18.4,
    check_tol: float = 1e-3,
) -> float:
    """Numerically invert the double transform at ``(x1, x2)``, ``x2 > x1 > 0``.

    Nested one-dimensional inversions (inner in the first variable, outer in
    the second); the abscissas default to alias errors far below the 1e-3
    accuracy this cross-check targets.  Emits :class:`ConvergenceWarning` when
    estimates at ``m`` and ``m + 5`` terms disagree beyond ``check_tol``.
    """
    if not (x2 > x1 > 0):
        raise DomainError("invert_2d requires x2 > x1 > 0")
    dc = derive(model)
    _require_exponential(model)
    value = _invert_2d_once(model, dc, x1, x2, m, a_inner, a_outer)
    value_hi = _invert_2d_once(model, dc, x1, x2, m + 5, a_inner, a_outer)
    if abs(value - value_hi) > check_tol:
        warnings.warn(
            f"double inversion at ({x1}, {x2}) moved by {abs(value - value_hi):.2e} "
            f"between m={m} and m={m + 5}",
            ConvergenceWarning,
        )
    return value
