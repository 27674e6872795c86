"""Monte Carlo realization of the joint discrete/lazy/continuous construction.

One base trajectory (X_k) plus two independent rate-1 Poisson processes N, M
drive all three chains: the superposition N_L = N + M has events T_1, T_2, ...
and q_k = 1 when the k-th event came from N, so

    S(l)  = q_1 + ... + q_l ~ Bin(l, 1/2)
    X^L_l = X_{S(l)}            (lazy chain)
    X^c_t = X_{N(t)} = X^L_{N_L(t)}   (continuous chain; pathwise identity)

The averaged chain is X_{l + xi} for an independent fair bit xi.  Sampling is
vectorized over trajectories with a single seeded generator in fixed draw
order, so a given seed reproduces the table bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ValidatedChain, tv_distance
from .errors import UnnormalizedPmf, ZeroSamples
from .verifiers import VerifierPoint, VerifierReport, log_poisson_pmf


@dataclass(frozen=True)
class CouplingTable:
    """Empirical marginals of the coupled triple at the requested horizon."""

    t_max: float
    n_samples: int
    seed: int
    start: int
    counts_continuous: np.ndarray
    counts_lazy: np.ndarray
    counts_averaged: np.ndarray
    identity_violations: int

    def marginal(self, which: str) -> np.ndarray:
        counts = {
            "continuous": self.counts_continuous,
            "lazy": self.counts_lazy,
            "averaged": self.counts_averaged,
        }[which]
        return counts / self.n_samples


def _sample_paths(P: np.ndarray, start: int, steps: np.ndarray, rng) -> np.ndarray:
    """Vectorized trajectories: row i holds X_0..X_{steps.max()} from `start`."""
    n_samples = steps.shape[0]
    horizon = int(steps.max())
    cum = np.cumsum(P, axis=1)
    paths = np.empty((n_samples, horizon + 1), dtype=np.int64)
    paths[:, 0] = start
    state = paths[:, 0]
    for k in range(1, horizon + 1):
        u = rng.random(n_samples)
        state = (cum[state] < u[:, None]).sum(axis=1)
        paths[:, k] = state
    return paths


@dataclass(frozen=True)
class CouplingArrays:
    """Per-sample realizations of the coupled triple (diagnostic surface)."""

    x_continuous: np.ndarray       # X^c_{t_max} = X_{N(t_max)}
    x_lazy: np.ndarray             # X^L_{floor(t_max)} = X_{S(floor(t_max))}
    x_averaged: np.ndarray         # X_{floor(t_max) + xi}
    n_continuous: np.ndarray       # N(t_max)
    n_superposition: np.ndarray    # N_L(t_max) = N + M
    s_lazy: np.ndarray             # S(floor(t_max)) ~ Bin(floor(t_max), 1/2)
    identity_violations: int


def sample_coupling_arrays(
    chain: ValidatedChain,
    t_max: float,
    n_samples: int,
    seed: int,
    start: int = 0,
) -> CouplingArrays:
    """Sample the coupled triple, returning per-sample arrays.

    The pathwise identity X_{N(t)} = X^L_{N_L(t)} is recounted through the
    thinning cumsum as a regression guard (violations is 0 by construction).
    """
    if n_samples < 1:
        raise ZeroSamples("n_samples must be >= 1")
    if t_max <= 0:
        raise ValueError("t_max must be > 0")
    rng = np.random.default_rng(seed)
    lazy_horizon = int(math.floor(t_max))
    # Draw order is fixed: superposition counts, thinning bits, trajectory
    # steps, averaged offset.  Any reordering changes the stream.
    n_events = rng.poisson(2.0 * t_max, size=n_samples)
    q_len = int(max(n_events.max(), lazy_horizon, 1))
    q = rng.integers(0, 2, size=(n_samples, q_len), dtype=np.int64)
    mask = np.arange(q_len)[None, :] < n_events[:, None]
    n_continuous = (q * mask).sum(axis=1)          # N(t_max)
    s_lazy = q[:, :lazy_horizon].sum(axis=1)       # S(floor(t_max))
    base_steps = np.maximum(np.maximum(n_continuous, s_lazy), lazy_horizon + 1)
    paths = _sample_paths(chain.P, start, base_steps, rng)
    xi = rng.integers(0, 2, size=n_samples)

    rows = np.arange(n_samples)
    x_cont = paths[rows, n_continuous]
    x_lazy = paths[rows, s_lazy]
    x_ave = paths[rows, lazy_horizon + xi]
    # Pathwise identity, via the lazy route: X^L at lazy index N_L(t) is
    # X_{S(N_L(t))}, with S taken from the running thinning cumsum.
    cum_q = np.concatenate([np.zeros((n_samples, 1), dtype=np.int64), np.cumsum(q, axis=1)], axis=1)
    x_cont_via_lazy = paths[rows, cum_q[rows, n_events]]
    violations = int(np.sum(x_cont_via_lazy != x_cont))
    return CouplingArrays(
        x_continuous=x_cont,
        x_lazy=x_lazy,
        x_averaged=x_ave,
        n_continuous=n_continuous,
        n_superposition=n_events,
        s_lazy=s_lazy,
        identity_violations=violations,
    )


def simulate_natural_coupling(
    chain: ValidatedChain,
    t_max: float,
    n_samples: int,
    seed: int,
    start: int = 0,
) -> CouplingTable:
    """Empirical marginals of X^c_{t_max}, X^L_{floor(t_max)}, X_{floor(t_max)+xi}."""
    arrays = sample_coupling_arrays(chain, t_max, n_samples, seed, start)
    n = chain.n
    return CouplingTable(
        t_max=t_max,
        n_samples=n_samples,
        seed=seed,
        start=start,
        counts_continuous=np.bincount(arrays.x_continuous, minlength=n),
        counts_lazy=np.bincount(arrays.x_lazy, minlength=n),
        counts_averaged=np.bincount(arrays.x_averaged, minlength=n),
        identity_violations=arrays.identity_violations,
    )


def thinning_sample(tau: float, n_samples: int, seed: int) -> np.ndarray:
    """Draw Z = Z_1 + eta 1{Y > 0}: Y ~ Pois(2 tau), Z_1 | Y=n ~ Bin((n-1) v 0, 1/2),
    eta an independent fair bit.  Z should be Poisson(tau)."""
    if n_samples < 1:
        raise ZeroSamples("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    y = rng.poisson(2.0 * tau, size=n_samples)
    z1 = rng.binomial(np.maximum(y - 1, 0), 0.5)
    eta = rng.integers(0, 2, size=n_samples)
    return z1 + eta * (y > 0)


def check_poisson_thinning(tau: float, n_samples: int, seed: int) -> VerifierReport:
    """Compare the empirical law of the thinned sum against exact Poisson(tau).

    Lhs is the total-variation distance of binned histograms (the exact tail
    beyond the largest observed value counts in full); rhs is the
    pre-registered threshold 5 sqrt(support / n_samples).
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    z = thinning_sample(tau, n_samples, seed)
    k_max = int(z.max())
    counts = np.bincount(z, minlength=k_max + 1)
    empirical = counts / n_samples
    exact = np.exp([log_poisson_pmf(tau, k) for k in range(k_max + 1)])
    tail = max(0.0, 1.0 - exact.sum())
    tv = 0.5 * (np.abs(empirical - exact).sum() + tail)
    support = k_max + 1
    threshold = 5.0 * math.sqrt(support / n_samples)
    return VerifierReport(
        "poisson_thinning_tv",
        (VerifierPoint(tau, float(n_samples), float(tv), threshold),),
        extras={"mean": float(z.mean()), "support": support, "seed": seed},
    )


def maximal_coupling_check(
    chain: ValidatedChain,
    mu,
    t: float,
    n_samples: int = 0,
    seed: int = 0,
) -> VerifierReport:
    """Meeting probability of the lazy chain at a Poissonized time vs. a
    stationary copy, realized as an explicit maximal coupling.

    The law of the lazy chain at an independent Poisson(t) time equals the
    heat kernel at t/2, so the largest possible meeting probability is
    1 - d_heat(t/2, mu).  The coupling puts the overlap min(law, pi) on the
    diagonal and couples the residuals independently; the report compares the
    achieved meeting mass (and, when n_samples > 0, its empirical rate)
    against the exact TV complement.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    mu = np.asarray(mu, dtype=float)
    n = chain.n
    P_lazy = (np.eye(n) + chain.P) / 2.0
    # law = sum_k Pois(t; k) mu P_lazy^k, truncated like the series oracle
    k_cap = int(math.ceil(t + 12.0 * math.sqrt(max(t, 1.0)) + 20.0))
    log_w = -t
    state = mu.copy()
    law = np.zeros(n)
    for k in range(k_cap + 1):
        if k > 0:
            state = state @ P_lazy
            log_w += math.log(t) - math.log(k)
        law += math.exp(log_w) * state
    law /= law.sum()

    overlap = np.minimum(law, chain.pi)
    meet_exact = float(overlap.sum())
    tv = tv_distance(law, chain.pi)
    points = [VerifierPoint(t, 0.0, 1.0 - tv, meet_exact)]
    extras: dict = {"tv": tv}
    if n_samples > 0:
        rng = np.random.default_rng(seed)
        diag_mass = meet_exact
        res_a = np.clip(law - overlap, 0.0, None)
        res_b = np.clip(chain.pi - overlap, 0.0, None)
        meets = rng.random(n_samples) < diag_mass
        empirical = float(meets.mean())
        # Sample the off-diagonal residuals only to confirm they never meet.
        if res_a.sum() > 0 and res_b.sum() > 0:
            k = min(n_samples, 1000)
            xs = rng.choice(n, size=k, p=res_a / res_a.sum())
            ys = rng.choice(n, size=k, p=res_b / res_b.sum())
            extras["residual_collisions"] = int(np.sum(xs == ys))
        se = math.sqrt(max(meet_exact * (1 - meet_exact), 1e-12) / n_samples)
        points.append(VerifierPoint(t, float(n_samples), abs(empirical - meet_exact), 5 * se))
        extras["empirical_meeting_rate"] = empirical
    return VerifierReport("maximal_coupling_meeting_mass", tuple(points), extras=extras)


def _validate_pmf(pmf) -> np.ndarray:
    p = np.asarray(pmf, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise UnnormalizedPmf("pmf must be a nonempty 1-d array")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise UnnormalizedPmf(f"pmf sums to {p.sum()!r}")
    return p


def randomized_stopping_tv(chain: ValidatedChain, mu, T1_pmf, T2_pmf) -> tuple[float, float]:
    """Exact TV to stationarity at the randomized times T1 + T2 and T1.

    T1, T2 are independent pmfs on {0, 1, 2, ...} with finite support;
    returns (left, right) where adding independent steps can only help:
    left <= right always.
    """
    p1 = _validate_pmf(T1_pmf)
    p2 = _validate_pmf(T2_pmf)
    mu = np.asarray(mu, dtype=float)
    conv = np.convolve(p1, p2)

    def mixture(pmf: np.ndarray) -> np.ndarray:
        out = np.zeros(chain.n)
        state = mu.copy()
        for t, w in enumerate(pmf):
            if t > 0:
                state = state @ chain.P
            out += w * state
        return out

    left = tv_distance(mixture(conv), chain.pi)
    right = tv_distance(mixture(p1), chain.pi)
    return left, right
