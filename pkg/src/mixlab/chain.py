"""Construction, validation, and elementary transforms of finite Markov chains.

The entry point is :func:`validate_chain`, which certifies stochasticity,
irreducibility, and reversibility of a transition matrix and computes the
stationary distribution by a dense linear solve.  Everything downstream
(spectral calculus, distance profiles, verifiers) consumes the resulting
:class:`ValidatedChain`.

All values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph

from .errors import (
    LengthMismatch,
    NegativeEntry,
    ReducibleChain,
    RowSumError,
)

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
REVERSIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class ChainSpec:
    """A labelled transition matrix, not yet validated.

    Attributes:
        n: number of states (>= 1).
        P: row-stochastic (n, n) matrix; rows must sum to 1 within 1e-12.
        label: free-form identifier used in reports.
    """

    n: int
    P: np.ndarray
    label: str = ""

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "P", P)
        P.setflags(write=False)


@dataclass(frozen=True)
class ValidatedChain:
    """A chain with certified stochasticity plus stationary/reversibility data.

    Attributes:
        spec: the validated ChainSpec.
        pi: stationary distribution (pi @ P = pi within 1e-10).
        reversible: detailed-balance certificate at relative tolerance 1e-12.
        irreducible: strong-connectivity certificate (always True; reducible
            chains are rejected with :class:`ReducibleChain`).
    """

    spec: ChainSpec
    pi: np.ndarray
    reversible: bool
    irreducible: bool

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def P(self) -> np.ndarray:
        return self.spec.P

    @property
    def label(self) -> str:
        return self.spec.label


def ensure_distribution(weights, n: int | None = None, tol: float = 1e-12) -> np.ndarray:
    """Validate and return a probability vector.

    Raises LengthMismatch if `n` is given and differs, UnnormalizedPmf-style
    errors are folded into ValueError here because callers construct these
    vectors themselves; chain-file inputs go through stricter paths.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise LengthMismatch(f"distribution must be 1-d, got shape {w.shape}")
    if n is not None and w.shape[0] != n:
        raise LengthMismatch(f"distribution has length {w.shape[0]}, expected {n}")
    if np.any(w < -tol):
        raise ValueError("distribution has negative entries")
    s = float(w.sum())
    if abs(s - 1.0) > tol:
        raise ValueError(f"distribution sums to {s!r}, expected 1")
    return np.clip(w, 0.0, None)


def point_mass(x: int, n: int) -> np.ndarray:
    """Dirac distribution at state x on n states."""
    d = np.zeros(n)
    d[x] = 1.0
    return d


def _check_stochastic(spec: ChainSpec) -> None:
    P = spec.P
    if spec.n < 1:
        raise ValueError(f"state count must be >= 1, got {spec.n}")
    if P.shape != (spec.n, spec.n):
        raise ValueError(f"matrix shape {P.shape} does not match n={spec.n}")
    if np.any(P < 0):
        x, y = np.argwhere(P < 0)[0]
        raise NegativeEntry(f"P[{x},{y}] = {float(P[x, y])} is negative")
    rows = P.sum(axis=1)
    bad = np.flatnonzero(np.abs(rows - 1.0) > ROW_SUM_TOL)
    if bad.size:
        x = int(bad[0])
        raise RowSumError(f"row {x} sums to {float(rows[x])} (|deviation| > {ROW_SUM_TOL})")


def _strongly_connected(P: np.ndarray) -> bool:
    graph = scipy.sparse.csr_matrix(P > 0)
    ncomp, _ = scipy.sparse.csgraph.connected_components(graph, connection="strong")
    return ncomp == 1


def _stationary(P: np.ndarray) -> np.ndarray:
    """Solve (P^T - I) pi = 0 with sum(pi) = 1 by dense LU with partial pivoting.

    The normalization replaces the last equation of the (rank n-1) system.
    Entries within solver noise of zero are clamped to 0; genuinely negative
    output indicates a reducible or corrupt matrix and is rejected upstream.
    """
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = scipy.linalg.solve(A, b)
    # Stationary masses of strongly-biased chains underflow double precision;
    # the clamp removes LU noise without disturbing resolvable entries.
    pi[(pi < 0) & (pi > -1e-12)] = 0.0
    return pi / pi.sum()


def _reversibility_certificate(P: np.ndarray, pi: np.ndarray) -> bool:
    flux = pi[:, None] * P
    gap = np.abs(flux - flux.T)
    scale = np.maximum(1.0, flux)
    return bool(np.all(gap <= REVERSIBILITY_TOL * scale))


def validate_chain(spec: ChainSpec) -> ValidatedChain:
    """Certify a ChainSpec and compute its stationary distribution.

    Raises:
        RowSumError: a row deviates from sum 1 by more than 1e-12.
        NegativeEntry: some P(x, y) < 0.
        ReducibleChain: the transition graph is not strongly connected, so
            the stationary distribution is not unique.
    """
    _check_stochastic(spec)
    if not _strongly_connected(spec.P):
        raise ReducibleChain(f"chain {spec.label!r} is not irreducible")
    pi = _stationary(spec.P)
    if np.any(pi < 0):
        raise ReducibleChain(
            f"stationary solve for {spec.label!r} produced negative mass; "
            "matrix is numerically reducible"
        )
    residual = float(np.max(np.abs(pi @ spec.P - pi)))
    if residual > STATIONARY_TOL:
        raise ReducibleChain(
            f"stationary residual {residual:.3e} exceeds {STATIONARY_TOL} "
            f"for {spec.label!r}"
        )
    pi.setflags(write=False)
    return ValidatedChain(
        spec=spec,
        pi=pi,
        reversible=_reversibility_certificate(spec.P, pi),
        irreducible=True,
    )


def lazy_kernel(chain: ValidatedChain) -> ValidatedChain:
    """Return the lazy version of a validated chain: matrix (I + P) / 2.

    The stationary distribution is unchanged; reversibility is preserved.
    """
    n = chain.n
    P_lazy = (np.eye(n) + chain.P) / 2.0
    spec = ChainSpec(n=n, P=P_lazy, label=f"lazy({chain.label})")
    return ValidatedChain(
        spec=spec,
        pi=chain.pi,
        reversible=chain.reversible,
        irreducible=True,
    )


def tv_distance(mu, nu) -> float:
    """Total-variation distance: half the L1 distance of two probability vectors."""
    a = np.asarray(mu, dtype=float)
    b = np.asarray(nu, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape} differ")
    return 0.5 * float(np.abs(a - b).sum())


def tv_to_stationary(rows: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Vector of TV distances between each row of a kernel matrix and pi."""
    return 0.5 * np.abs(rows - pi[None, :]).sum(axis=1)
