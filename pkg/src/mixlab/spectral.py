"""Spectral and direct evaluation of the four kernel families.

For a reversible chain, :func:`decompose` produces a pi-orthonormal
eigenbasis via cyclic Jacobi rotations on the symmetrized matrix
``D^{1/2} P D^{-1/2}``; the resulting :class:`Spectrum` evaluates

    disc: P^t        lazy: ((I+P)/2)^t
    ave:  (P^t + P^{t+1})/2        heat: exp(-t (I - P))

through the scalar maps g_t(lambda).  Chains whose stationary masses span
more than ~12 decades (strongly biased birth-death chains) lose all
precision in the symmetrized basis, so :class:`DirectKernel` provides the
same four families by binary matrix powering and a dense matrix
exponential; :func:`make_engine` picks the appropriate backend.

:func:`heat_series_reference` is an independent Poisson-series oracle for
the heat kernel and also covers non-reversible chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chain import ValidatedChain, ensure_distribution
from .errors import JacobiNoConvergence, NegativeMass, NotReversible, SpectralUnavailable

KERNEL_MODES = ("disc", "lazy", "ave", "heat")
INTEGER_MODES = ("disc", "lazy", "ave")

JACOBI_OFF_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60
NEGATIVE_MASS_TOL = 1e-11

# Above this ratio of stationary masses the symmetrized eigenbasis amplifies
# rounding beyond the 1e-10 kernel tolerances; fall back to direct powering.
# Measured: ratio 6e7 -> 3e-10 kernel error, ratio 1e11 -> 3e-5.
SPECTRAL_PI_RATIO_LIMIT = 1e7


def check_mode(mode: str) -> str:
    if mode not in KERNEL_MODES:
        raise ValueError(f"unknown kernel mode {mode!r}; expected one of {KERNEL_MODES}")
    return mode


def check_time(mode: str, t) -> None:
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t!r}")
    if mode in INTEGER_MODES and t != int(t):
        raise ValueError(f"mode {mode!r} requires integer time, got {t!r}")


def scalar_map(mode: str, eigenvalues: np.ndarray, t) -> np.ndarray:
    """Evaluate g_t on the eigenvalues for one kernel mode.

    g_t(1) = 1 and |g_t| <= 1 on [-1, 1] for every mode and t >= 0.
    """
    lam = eigenvalues
    if mode == "disc":
        return lam ** int(t)
    if mode == "lazy":
        return ((1.0 + lam) / 2.0) ** int(t)
    if mode == "ave":
        p = lam ** int(t)
        return (p + p * lam) / 2.0
    if mode == "heat":
        return np.exp(-float(t) * (1.0 - lam))
    raise ValueError(mode)


def _jacobi(S: np.ndarray):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps row-cyclically until the off-diagonal Frobenius norm drops to
    1e-13, raising JacobiNoConvergence past 60 sweeps.  Returns
    (eigenvalues, eigenvector columns), unsorted.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return np.diag(A).copy(), V
    for _ in range(JACOBI_MAX_SWEEPS):
        # Zero the diagonal before taking the norm: subtracting sum-of-squares
        # cancels catastrophically once the off-part is near machine zero.
        off_part = A - np.diag(np.diag(A))
        off = float(np.linalg.norm(off_part))
        if off <= JACOBI_OFF_TOL:
            return np.diag(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    raise JacobiNoConvergence(f"off-diagonal norm still above {JACOBI_OFF_TOL} after {JACOBI_MAX_SWEEPS} sweeps")


@dataclass(frozen=True)
class Spectrum:
    """Pi-orthonormal eigendecomposition of a reversible kernel.

    eigenvalues are sorted descending with eigenvalues[0] = 1; basis columns
    f_i satisfy <f_i, f_j>_pi = delta_ij and P f_i = eigenvalues[i] f_i.
    Immutable; kernel evaluations on a shared Spectrum may run concurrently.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    pi: np.ndarray

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        """Expansion coefficients <f, f_i>_pi of a function f."""
        return self.basis.T @ (self.pi * f)

    def kernel(self, mode: str, t) -> np.ndarray:
        """Full n-by-n kernel matrix K_t for the given mode."""
        check_mode(mode)
        check_time(mode, t)
        g = scalar_map(mode, self.eigenvalues, t)
        return (self.basis * g) @ (self.basis.T * self.pi[None, :])

    def reconstruct(self) -> np.ndarray:
        """Rebuild P from the eigendata (reconstruction invariant oracle)."""
        return self.kernel("disc", 1)


def decompose(chain: ValidatedChain) -> Spectrum:
    """Symmetrize, run cyclic Jacobi, and back-transform to a pi-orthonormal basis.

    Raises NotReversible for chains without the detailed-balance certificate
    and JacobiNoConvergence if the sweep budget is exhausted.
    """
    if not chain.reversible:
        raise NotReversible(f"chain {chain.label!r} is not reversible")
    pi = chain.pi
    if float(pi.min()) <= 0.0:
        raise SpectralUnavailable(
            f"stationary mass of {chain.label!r} underflows double precision; "
            "use the direct kernel engine"
        )
    sqrt_pi = np.sqrt(pi)
    S = sqrt_pi[:, None] * chain.P / sqrt_pi[None, :]
    S = (S + S.T) / 2.0
    eigvals, V = _jacobi(S)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    V = V[:, order]
    if abs(eigvals[0] - 1.0) > 1e-10 or eigvals[-1] < -1.0 - 1e-10:
        raise JacobiNoConvergence(
            f"eigenvalues escaped [-1, 1]: top {eigvals[0]!r}, bottom {eigvals[-1]!r}"
        )
    # Snap onto the certified structure: spectrum inside [-1, 1] and values
    # within the eigensolver resolution of +-1 set exactly to +-1 (a phantom
    # gap of 1e-13 cannot be distinguished from periodicity and would poison
    # horizon bounds downstream).
    eigvals = np.clip(eigvals, -1.0, 1.0)
    eigvals[np.abs(eigvals - 1.0) <= 1e-12] = 1.0
    eigvals[np.abs(eigvals + 1.0) <= 1e-12] = -1.0
    eigvals[0] = 1.0
    basis = V / sqrt_pi[:, None]
    # Fix signs so the top eigenvector is the positive constant function.
    for i in range(basis.shape[1]):
        j = int(np.argmax(np.abs(basis[:, i])))
        if basis[j, i] < 0:
            basis[:, i] = -basis[:, i]
    eigvals.setflags(write=False)
    basis.setflags(write=False)
    return Spectrum(eigenvalues=eigvals, basis=basis, pi=pi)


def kernel_row(spectrum: Spectrum, mode: str, t, start) -> np.ndarray:
    """Distribution of the mode-t kernel started from `start` (a distribution).

    Negative entries in [-1e-11, 0) are eigensolver noise and are clipped
    and renormalized; anything below -1e-11 raises NegativeMass.
    """
    mu = ensure_distribution(start, spectrum.n)
    check_mode(mode)
    check_time(mode, t)
    g = scalar_map(mode, spectrum.eigenvalues, t)
    c = spectrum.basis.T @ mu
    row = (spectrum.basis @ (g * c)) * spectrum.pi
    low = float(row.min())
    if low < -NEGATIVE_MASS_TOL:
        raise NegativeMass(f"kernel row entry {low:.3e} below -{NEGATIVE_MASS_TOL}")
    row = np.clip(row, 0.0, None)
    return row / row.sum()


def heat_series_reference(chain: ValidatedChain, t: float, tol: float = 1e-15) -> np.ndarray:
    """Heat kernel by the Poisson-weighted lazy-power series.

    Truncates at K = ceil(2t + 12 sqrt(2t) + 20), extending until the
    dropped Poisson(2t) mass is below tol.  Works for non-reversible
    chains; serves as the independent oracle for the spectral heat kernel.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    n = chain.n
    if t == 0:
        return np.eye(n)
    mu = 2.0 * t
    K = int(math.ceil(mu + 12.0 * math.sqrt(mu) + 20.0))
    while _poisson_upper_tail_mass(mu, K) >= tol:
        K = int(K * 1.25) + 10
    P_lazy = (np.eye(n) + chain.P) / 2.0
    log_w0 = -mu
    out = np.zeros((n, n))
    power = np.eye(n)
    log_w = log_w0
    for k in range(K + 1):
        if k > 0:
            power = power @ P_lazy
            log_w += math.log(mu) - math.log(k)
        w = math.exp(log_w)
        if w > 0.0:
            out += w * power
    # Renormalize the truncated Poisson weights so rows sum to exactly 1.
    out /= out.sum(axis=1, keepdims=True)
    return out


def _poisson_upper_tail_mass(mu: float, K: int) -> float:
    """P[Poisson(mu) > K], summed in log space until terms vanish."""
    total = 0.0
    log_term = -mu + (K + 1) * math.log(mu) - math.lgamma(K + 2)
    k = K + 1
    while True:
        term = math.exp(log_term)
        total += term
        if term < 1e-22 * max(total, 1e-300) or k > K + 10_000:
            return total
        k += 1
        log_term += math.log(mu) - math.log(k)


class DirectKernel:
    """Kernel evaluation by cached binary matrix powers and expm.

    Backend for chains beyond spectral reach (huge stationary-mass ratios)
    and for non-reversible chains, and the cross-validation oracle for the
    spectral path.  Matrix powers are assembled from cached squarings;
    heat uses scipy's Pade expm of t(P - I).
    """

    def __init__(self, chain: ValidatedChain):
        self.chain = chain
        self.pi = chain.pi
        self.n = chain.n
        self._squares: dict[tuple[str, int], np.ndarray] = {}
        self._bases = {
            "disc": chain.P,
            "lazy": (np.eye(chain.n) + chain.P) / 2.0,
        }

    def matrix_power(self, base: str, t: int) -> np.ndarray:
        M = self._bases[base]
        if t == 0:
            return np.eye(self.n)
        result = None
        square = M
        j = 0
        while (1 << j) <= t:
            key = (base, j)
            if key not in self._squares:
                self._squares[key] = square if j == 0 else (
                    self._squares[(base, j - 1)] @ self._squares[(base, j - 1)]
                )
            if t & (1 << j):
                block = self._squares[key]
                result = block if result is None else result @ block
            j += 1
        return result

    def kernel(self, mode: str, t) -> np.ndarray:
        check_mode(mode)
        check_time(mode, t)
        if mode == "disc":
            return self.matrix_power("disc", int(t))
        if mode == "lazy":
            return self.matrix_power("lazy", int(t))
        if mode == "ave":
            Pt = self.matrix_power("disc", int(t))
            return (Pt + Pt @ self.chain.P) / 2.0
        Q = self.chain.P - np.eye(self.n)
        return scipy.linalg.expm(float(t) * Q)


def spectral_safe(chain: ValidatedChain) -> bool:
    """Whether the pi-symmetrized basis stays within double-precision reach."""
    pi = chain.pi
    positive = pi[pi > 0]
    if positive.size < pi.size:
        return False
    return float(positive.max() / positive.min()) <= SPECTRAL_PI_RATIO_LIMIT


def make_engine(chain: ValidatedChain, prefer: str = "auto"):
    """Pick a kernel engine: 'spectral', 'direct', or 'auto'.

    Auto selects the spectral path only for reversible chains whose
    stationary masses are within SPECTRAL_PI_RATIO_LIMIT of each other.
    """
    if prefer not in ("auto", "spectral", "direct"):
        raise ValueError(f"unknown engine preference {prefer!r}")
    if prefer == "spectral" or (prefer == "auto" and chain.reversible and spectral_safe(chain)):
        return decompose(chain)
    return DirectKernel(chain)
