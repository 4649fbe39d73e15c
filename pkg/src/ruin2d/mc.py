"""Monte Carlo oracles: direct path simulation, the unbiased conditional
estimator, the fluid embedding, and ruin-time transform estimation.

Randomness contract: paths are generated in fixed-size chunks and chunk ``k``
draws from a counter-based Philox stream that is a pure function of
``(seed, stream_offset + k)``.  Reductions accumulate per-chunk partial sums in
chunk order (numpy's pairwise summation inside each chunk), so every estimate
is bit-reproducible for a fixed ``(seed, n)`` and parallel fan-out over chunks
cannot change the result.

Ruin is checked at claim epochs only: both reserves strictly increase between
claims, so the running minimum over continuous time is attained immediately
after a jump.  Survival therefore means "no post-jump reserve below zero".
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, UnsupportedClaimLaw
from .model import Empirical, Exponential, PhaseType, RiskModel
from .onedim import survival_one_company

__all__ = [
    "PathEvent",
    "PathRecord",
    "MCEstimate",
    "FluidPath",
    "sample_claims",
    "sample_path",
    "simulate_joint_ruin",
    "simulate_joint_ruin_fluid",
    "conditional_survival",
    "ruin_time_lt",
    "fluid_embed",
    "killed_position_frequencies",
]

CHUNK = 1 << 14


@dataclass(frozen=True)
class PathEvent:
    time: float
    kind: str  # "claim" | "horizon"
    claim_size: Optional[float] = None


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n: int
    seed: int
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PathRecord:
    """A realized compound-Poisson path on ``[0, horizon]``."""

    interarrivals: np.ndarray
    claim_sizes: np.ndarray
    horizon: float

    @property
    def epochs(self) -> np.ndarray:
        return np.cumsum(self.interarrivals)

    @property
    def events(self) -> list[PathEvent]:
        out = [
            PathEvent(time=float(t), kind="claim", claim_size=float(c))
            for t, c in zip(self.epochs, self.claim_sizes)
        ]
        out.append(PathEvent(time=self.horizon, kind="horizon"))
        return out


def stream(seed: int, k: int) -> np.random.Generator:
    """Counter-based stream ``k`` of master ``seed`` (pure function of both)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))
    )


def sample_claims(claim, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` i.i.d. claim sizes from the model's claim law."""
    if isinstance(claim, Exponential):
        return rng.exponential(1.0 / claim.mu, size=size)
    if isinstance(claim, PhaseType):
        return _sample_phasetype(claim, rng, size)
    if isinstance(claim, Empirical):
        out = np.asarray(claim.sampler(rng, size), dtype=float)
        if out.shape != (size,):
            raise ValueError("empirical sampler returned wrong shape")
        return out
    raise UnsupportedClaimLaw(f"cannot sample {type(claim).__name__} claims")


def _sample_phasetype(claim: PhaseType, rng: np.random.Generator, size: int) -> np.ndarray:
    """Absorption times via the embedded jump chain."""
    m = len(claim.beta)
    rates = -np.diag(claim.B)
    trans = claim.B / rates[:, None]
    np.fill_diagonal(trans, 0.0)
    # last column: absorption
    table = np.column_stack([trans, claim.exit_rates / rates])
    cum = np.cumsum(table, axis=1)
    cum[:, -1] = 1.0
    init = np.concatenate([claim.beta, [max(0.0, 1.0 - claim.beta.sum())]])
    init = init / init.sum()
    state = rng.choice(m + 1, size=size, p=init)
    out = np.zeros(size)
    active = state < m
    while active.any():
        idx = np.flatnonzero(active)
        st = state[idx]
        out[idx] += rng.exponential(1.0, size=len(idx)) / rates[st]
        u = rng.random(len(idx))
        nxt = (u[:, None] < cum[st]).argmax(axis=1)
        state[idx] = nxt
        active[idx] = nxt < m
    return out


def sample_path(model: RiskModel, horizon: float, rng: np.random.Generator) -> PathRecord:
    """Sample one claims path on ``[0, horizon]`` (sequential draws)."""
    inter = []
    t = 0.0
    while True:
        tau = rng.exponential(1.0 / model.lam)
        t += tau
        if t > horizon:
            break
        inter.append(tau)
    sizes = sample_claims(model.claim, rng, len(inter))
    return PathRecord(np.asarray(inter), sizes, horizon)


def reserves_at_epochs(model: RiskModel, u1: float, u2: float,
                       cum_up: np.ndarray, cum_claims: np.ndarray):
    """Post-jump reserves of both companies at the claim epochs.

    Shared by direct simulation and the fluid embedding so the two agree
    bit-for-bit (same operations in the same order).
    """
    U1 = u1 + model.c1 * cum_up - model.delta1 * cum_claims
    U2 = u2 + model.c2 * cum_up - model.delta2 * cum_claims
    return U1, U2


# ---------------------------------------------------------------------------
# Vectorized chunk kernels.
# ---------------------------------------------------------------------------

def _epoch_panel(model: RiskModel, horizons, rng: np.random.Generator, n: int):
    """Flat arrays of sorted claim epochs and within-path claim cumsums.

    ``horizons`` is scalar or per-path.  Returns ``(starts, has, t, s_within,
    totals)`` where ``starts[has]`` index the first epoch of each nonempty
    path, ``t`` are epochs sorted within paths, ``s_within`` the running claim
    totals at those epochs and ``totals`` the per-path total claim amounts.
    """
    horizons = np.broadcast_to(np.asarray(horizons, dtype=float), (n,))
    counts = rng.poisson(model.lam * horizons)
    tot = int(counts.sum())
    starts = np.concatenate(([0], np.cumsum(counts)))[:-1]
    has = counts > 0
    u = rng.random(tot)
    sizes = sample_claims(model.claim, rng, tot)
    pid = np.repeat(np.arange(n), counts)
    order = np.argsort(pid + u, kind="stable")  # u < 1 keeps path blocks intact
    t = u[order] * np.repeat(horizons, counts)
    s = sizes[order]
    cs = np.cumsum(s)
    base = np.concatenate(([0.0], cs))[starts]
    s_within = cs - np.repeat(base, counts)
    totals = np.zeros(n)
    if tot:
        totals[has] = np.add.reduceat(s, starts[has])
    return starts, has, t, s_within, totals


def _joint_tau_chunk(model, u1, u2, horizon, rng, n):
    """First joint-ruin time within ``horizon`` per path (inf if none)."""
    starts, has, t, s_within, _ = _epoch_panel(model, horizon, rng, n)
    tau = np.full(n, np.inf)
    if t.size:
        U1 = u1 + model.c1 * t - model.delta1 * s_within
        U2 = u2 + model.c2 * t - model.delta2 * s_within
        hit = np.minimum(U1, U2) < 0.0
        tau[has] = np.minimum.reduceat(np.where(hit, t, np.inf), starts[has])
    return tau


def _company1_chunk(model, x1, horizons, rng, n):
    """Normalized company-1 sweep: (alive flags, terminal values X1(T))."""
    p1 = model.p1
    starts, has, t, s_within, totals = _epoch_panel(model, horizons, rng, n)
    alive = np.ones(n, dtype=bool)
    if t.size:
        X = x1 + p1 * t - s_within
        alive[has] = np.minimum.reduceat(X, starts[has]) >= 0.0
    horizons = np.broadcast_to(np.asarray(horizons, dtype=float), (n,))
    x_T = x1 + p1 * horizons - totals
    return alive, x_T


def _chunk_sizes(n: int) -> Iterable[tuple[int, int]]:
    k = 0
    done = 0
    while done < n:
        size = min(CHUNK, n - done)
        yield k, size
        done += size
        k += 1


def _accumulate(chunks: Iterable[np.ndarray], n: int, seed: int, meta: dict) -> MCEstimate:
    total = 0.0
    total_sq = 0.0
    for vals in chunks:
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
    mean = total / n
    if n > 1:
        var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return MCEstimate(mean=mean, std_error=se, n=n, seed=seed, meta=meta)


def _map_chunks(worker, n: int, threads: int):
    jobs = list(_chunk_sizes(n))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda kv: worker(*kv), jobs))
    return [worker(k, size) for k, size in jobs]


# ---------------------------------------------------------------------------
# Estimators.
# ---------------------------------------------------------------------------

def ruin_time_lt(
    model: RiskModel,
    u1: float,
    u2: float,
    s: float,
    horizon: float,
    n: int,
    seed: int,
    stream_offset: int = 0,
    threads: int = 1,
) -> MCEstimate:
    """Estimate ``E[e^{-s tau} 1{tau <= horizon}]`` from raw reserves.

    The deterministic truncation bias for the untruncated transform is at most
    ``exp(-s * horizon)``, reported in ``meta['bias_bound']``.  At ``s = 0``
    this is exactly the finite-horizon ruin frequency on the same draws.
    """
    if s < 0:
        raise DomainError("discount rate must be nonnegative")

    def worker(k, size):
        rng = stream(seed, stream_offset + k)
        tau = _joint_tau_chunk(model, u1, u2, horizon, rng, size)
        finite = np.isfinite(tau)
        return np.where(finite, np.exp(-s * np.where(finite, tau, 0.0)), 0.0)

    meta = {"horizon": horizon, "s": s, "bias_bound": math.exp(-s * horizon) if s > 0 else 1.0}
    return _accumulate(_map_chunks(worker, n, threads), n, seed, meta)


def _lundberg_tail(model: RiskModel, u2: float, horizon: float) -> Optional[float]:
    """Crude bound on post-horizon ruin mass from the drifted mean reserve."""
    if not isinstance(model.claim, Exponential):
        return None
    gamma2 = model.mu - model.lam / model.p2
    C2 = model.lam / (model.mu * model.p2)
    x2_T = u2 / model.delta2 + (model.p2 - model.rho) * horizon
    return C2 * math.exp(-gamma2 * x2_T)


def simulate_joint_ruin(
    model: RiskModel,
    u1: float,
    u2: float,
    horizon: float,
    n: int,
    seed: int,
    stream_offset: int = 0,
    threads: int = 1,
) -> MCEstimate:
    """Frequency of joint ruin by ``horizon`` from raw reserves ``(u1, u2)``."""
    est = ruin_time_lt(
        model, u1, u2, 0.0, horizon, n, seed, stream_offset=stream_offset, threads=threads
    )
    meta = {"horizon": horizon, "lundberg_tail": _lundberg_tail(model, u2, horizon)}
    return MCEstimate(est.mean, est.std_error, est.n, est.seed, meta)


def conditional_survival(
    model: RiskModel,
    x1: float,
    x2: float,
    n: int,
    seed: int,
    stream_offset: int = 0,
    threads: int = 1,
) -> MCEstimate:
    """Unbiased estimator of the joint survival at normalized ``(x1, x2)``.

    Simulates only company 1 up to the crossing time
    ``T = (x2 - x1)/(p1 - p2)`` and, on survival, plugs the terminal value
    into the exact one-dimensional survival of company 2.  ``x2 = x1`` is the
    degenerate ``T = 0`` case with zero variance.
    """
    if isinstance(model.claim, Empirical):
        raise UnsupportedClaimLaw(
            "conditional estimator needs the exact one-dimensional survival "
            "(exponential or phase-type claims)"
        )
    if x2 < x1:
        raise DomainError("conditional estimator requires x2 >= x1 (upper cone)")
    if x1 < 0:
        raise DomainError("reserves must be nonnegative")
    T = (x2 - x1) / (model.p1 - model.p2)
    meta = {"crossing_time": T}
    if T == 0.0:
        exact = float(survival_one_company(model, x1))
        return MCEstimate(mean=exact, std_error=0.0, n=n, seed=seed, meta=meta)

    def worker(k, size):
        rng = stream(seed, stream_offset + k)
        alive, x_T = _company1_chunk(model, x1, T, rng, size)
        vals = survival_one_company(model, np.maximum(x_T, 0.0))
        return np.where(alive, vals, 0.0)

    return _accumulate(_map_chunks(worker, n, threads), n, seed, meta)


def killed_position_frequencies(
    model: RiskModel,
    q: float,
    x1: float,
    bin_edges: np.ndarray,
    n: int,
    seed: int,
    stream_offset: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies of company 1's position at an independent Exp(q) kill time.

    Runs the normalized company-1 process from ``x1`` to ``e_q ~ Exp(q)`` and
    bins the terminal position of paths that never went below zero.  Returns
    ``(freq, std_err)`` per bin; the matching prediction is ``q`` times the
    killed-resolvent mass of the bin.
    """
    edges = np.asarray(bin_edges, dtype=float)
    hits = np.zeros(len(edges) - 1, dtype=np.int64)
    for k, size in _chunk_sizes(n):
        rng = stream(seed, stream_offset + k)
        kill = rng.exponential(1.0 / q, size=size)
        alive, x_T = _company1_chunk(model, x1, kill, rng, size)
        hist, _ = np.histogram(x_T[alive], bins=edges)
        hits += hist
    freq = hits / n
    return freq, np.sqrt(freq * (1.0 - freq) / n)


# ---------------------------------------------------------------------------
# Fluid embedding.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FluidPath:
    """Alternating-phase embedding of a claims path.

    Jumps are unfolded into linear descent in direction
    ``(-delta1, -delta2)`` of duration equal to the claim size, so the
    embedded reserves are continuous and share the original path's extrema.
    Phase ``+1`` (up) intervals reproduce the premium drift; ``up_clock``
    holds the accumulated up time at each switch epoch.
    """

    switch_times: np.ndarray      # S_0 = 0 < S_1 < ... (up phase first)
    phases: np.ndarray            # phase value on [S_k, S_{k+1})
    up_clock: np.ndarray          # I(S_k)
    claim_clock: np.ndarray       # unfolded claim amount at S_k
    u1: float
    u2: float
    model: RiskModel

    def up_time(self, t: float) -> float:
        """Accumulated up time ``I(t)``: 1-Lipschitz, flat on down phases."""
        k = int(np.searchsorted(self.switch_times, t, side="right")) - 1
        k = max(0, min(k, len(self.phases) - 1))
        base = self.up_clock[k]
        if self.phases[k] == 1:
            return base + (t - self.switch_times[k])
        return base

    def reserves(self, t: float) -> tuple[float, float]:
        up = self.up_time(t)
        down = t - up
        m = self.model
        return (
            self.u1 + m.c1 * up - m.delta1 * down,
            self.u2 + m.c2 * up - m.delta2 * down,
        )

    def _claim_cums(self) -> tuple[np.ndarray, np.ndarray]:
        """Cumulative (up time, claim amount) at each down-phase end.

        Stored directly rather than reconstructed from switch times, so the
        values are the very cumsums the direct simulation uses.
        """
        return self.up_clock[2::2], self.claim_clock[2::2]

    def minimum_reserves(self) -> tuple[float, float]:
        """Running minima over the whole embedding, one per company."""
        up, claims = self._claim_cums()
        U1, U2 = reserves_at_epochs(self.model, self.u1, self.u2, up, claims)
        m1 = float(np.min(U1)) if U1.size else self.u1
        m2 = float(np.min(U2)) if U2.size else self.u2
        return min(m1, self.u1), min(m2, self.u2)

    def ruin_time_embedded(self) -> float:
        """First time the embedded pair leaves the positive quadrant (inf if never)."""
        up, claims = self._claim_cums()
        U1, U2 = reserves_at_epochs(self.model, self.u1, self.u2, up, claims)
        low = np.minimum(U1, U2) < 0.0
        if not low.any():
            return math.inf
        k = int(np.argmax(low))
        m = self.model
        # reserves at the start of down phase k (pre-jump values)
        pre1 = U1[k] + m.delta1 * (claims[k] - (claims[k - 1] if k else 0.0))
        pre2 = U2[k] + m.delta2 * (claims[k] - (claims[k - 1] if k else 0.0))
        cross = math.inf
        if U1[k] < 0:
            cross = min(cross, pre1 / m.delta1)
        if U2[k] < 0:
            cross = min(cross, pre2 / m.delta2)
        return float(self.switch_times[2 * k + 1] + cross)

    def ruin_time_original(self) -> float:
        """``I(tau~)``: the original joint ruin time recovered from the embedding."""
        up, claims = self._claim_cums()
        U1, U2 = reserves_at_epochs(self.model, self.u1, self.u2, up, claims)
        low = np.minimum(U1, U2) < 0.0
        if not low.any():
            return math.inf
        return float(up[int(np.argmax(low))])


def fluid_embed(path: PathRecord, u1: float, u2: float, model: RiskModel) -> FluidPath:
    """Build the alternating up/down embedding of a realized claims path."""
    taus = np.asarray(path.interarrivals, dtype=float)
    sigmas = np.asarray(path.claim_sizes, dtype=float)
    n = len(taus)
    switch = np.empty(2 * n + 1)
    phases = np.empty(2 * n + 1, dtype=np.int8)
    up_clock = np.empty(2 * n + 1)
    claim_clock = np.empty(2 * n + 1)
    switch[0] = 0.0
    up_clock[0] = 0.0
    claim_clock[0] = 0.0
    phases[0] = 1
    cum_tau = np.cumsum(taus)
    cum_sig = np.cumsum(sigmas)
    if n:
        prev_sig = np.concatenate(([0.0], cum_sig[:-1]))
        switch[1::2] = cum_tau + prev_sig
        switch[2::2] = cum_tau + cum_sig
        up_clock[1::2] = cum_tau
        up_clock[2::2] = cum_tau
        claim_clock[1::2] = prev_sig
        claim_clock[2::2] = cum_sig
        phases[1::2] = -1
        phases[2::2] = 1
    return FluidPath(
        switch_times=switch,
        phases=phases,
        up_clock=up_clock,
        claim_clock=claim_clock,
        u1=u1,
        u2=u2,
        model=model,
    )


def path_ruin_time(path: PathRecord, u1: float, u2: float, model: RiskModel) -> float:
    """Joint ruin time of the original path, checked at claim epochs."""
    cum_tau = np.cumsum(path.interarrivals)
    cum_sig = np.cumsum(path.claim_sizes)
    U1, U2 = reserves_at_epochs(model, u1, u2, cum_tau, cum_sig)
    low = np.minimum(U1, U2) < 0.0
    if not low.any():
        return math.inf
    return float(cum_tau[int(np.argmax(low))])


def simulate_joint_ruin_fluid(
    model: RiskModel,
    u1: float,
    u2: float,
    horizon: float,
    n: int,
    seed: int,
) -> MCEstimate:
    """Finite-horizon ruin frequency computed through the fluid embedding.

    Per-path reference implementation (one embedding per path); exists to
    exercise the embedding identities, not for throughput.
    """
    hits = np.empty(n)
    rng = stream(seed, 0)
    for i in range(n):
        path = sample_path(model, horizon, rng)
        fp = fluid_embed(path, u1, u2, model)
        hits[i] = 1.0 if fp.ruin_time_original() <= horizon else 0.0
    mean = float(np.mean(hits))
    se = float(np.std(hits, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(mean, se, n, seed, {"horizon": horizon, "method": "fluid"})
