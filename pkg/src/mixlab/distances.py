"""Total-variation distance profiles, mixing times, and the phi/psi calibrators.

All distance functions take a kernel *engine*: either a
:class:`~mixlab.spectral.Spectrum` (reversible functional calculus) or a
:class:`~mixlab.spectral.DirectKernel` (matrix powers / expm), both of which
expose ``kernel(mode, t)`` and ``pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import tv_distance, tv_to_stationary
from .errors import DomainError, NoMixing

MONOTONICITY_SLACK = 1e-12
T_MAX = 10**7
HEAT_REL_WIDTH = 1e-6


@dataclass(frozen=True)
class DistanceProfile:
    """Sampled map t -> TV distance for one kernel mode.

    `start` is "worst" for the worst-case profile or a state index rendered
    as a string for a fixed point-mass start.
    """

    mode: str
    times: tuple
    values: tuple
    start: str = "worst"

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if any(not (-1e-12 <= v <= 1 + 1e-12) for v in self.values):
            raise ValueError("profile values must lie in [0, 1]")
        for a, b in zip(self.values, self.values[1:]):
            if b > a + MONOTONICITY_SLACK:
                raise ValueError(
                    f"profile for mode {self.mode!r} is not non-increasing: "
                    f"{a!r} -> {b!r}"
                )

    def rows(self):
        for t, v in zip(self.times, self.values):
            yield (t, self.mode, self.start, v)


@dataclass(frozen=True)
class MixingReport:
    """epsilon-mixing time for one mode, with the worst starting state."""

    mode: str
    epsilon: float
    t_mix: float
    argmax_state: int
    d_at_t_mix: float


def distance_from(engine, mode: str, t, start) -> float:
    """TV distance to stationarity at time t from a fixed start distribution."""
    row = np.asarray(start, float) @ engine.kernel(mode, t)
    return tv_distance(row, engine.pi)


def worst_case_distance(engine, mode: str, t) -> tuple[float, int]:
    """Worst-case TV distance at time t and its argmax starting state.

    Ties resolve to the smallest state index.
    """
    dists = tv_to_stationary(engine.kernel(mode, t), engine.pi)
    x = int(np.argmax(dists))
    return float(dists[x]), x


def profile(engine, mode: str, times, start=None) -> DistanceProfile:
    """Evaluate a distance profile over sorted times for one mode."""
    ts = sorted(times)
    if start is None:
        values = [worst_case_distance(engine, mode, t)[0] for t in ts]
        tag = "worst"
    else:
        values = [distance_from(engine, mode, t, start) for t in ts]
        arr = np.asarray(start, float)
        hot = np.flatnonzero(arr == 1.0)
        tag = str(int(hot[0])) if hot.size == 1 else "custom"
    return DistanceProfile(mode=mode, times=tuple(ts), values=tuple(values), start=tag)


def _d(engine, mode, t, start=None) -> float:
    if start is None:
        return worst_case_distance(engine, mode, t)[0]
    return distance_from(engine, mode, t, start)


def mixing_time(engine, mode: str, epsilon: float, start=None) -> MixingReport:
    """Smallest t with d(t) <= epsilon, by doubling bracket plus binary search.

    The search exploits monotonicity of d in t (each kernel family satisfies
    K_{t+1} = K_t P or its continuous analogue).  Heat mode bisects real t to
    relative width 1e-6.  Raises NoMixing when the bracket exceeds 1e7.
    """
    if not (0 < epsilon < 1):
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    if mode == "heat":
        return _mixing_time_heat(engine, epsilon, start)
    if _d(engine, mode, 0, start) <= epsilon:
        d0 = _d(engine, mode, 0, start)
        state = worst_case_distance(engine, mode, 0)[1]
        return MixingReport(mode, epsilon, 0, state, d0)
    hi = 1
    while _d(engine, mode, hi, start) > epsilon:
        hi *= 2
        if hi > T_MAX:
            raise NoMixing(f"d_{mode} never reached {epsilon} before t = {T_MAX}")
    lo = hi // 2  # d(lo) > epsilon >= d(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _d(engine, mode, mid, start) <= epsilon:
            hi = mid
        else:
            lo = mid
    state = worst_case_distance(engine, mode, max(hi - 1, 0))[1]
    return MixingReport(mode, epsilon, hi, state, _d(engine, mode, hi, start))


def _mixing_time_heat(engine, epsilon: float, start=None) -> MixingReport:
    if _d(engine, "heat", 0.0, start) <= epsilon:
        state = worst_case_distance(engine, "heat", 0.0)[1]
        return MixingReport("heat", epsilon, 0.0, state, _d(engine, "heat", 0.0, start))
    hi = 1.0
    while _d(engine, "heat", hi, start) > epsilon:
        hi *= 2.0
        if hi > T_MAX:
            raise NoMixing(f"d_heat never reached {epsilon} before t = {T_MAX}")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > HEAT_REL_WIDTH * hi:
        mid = (lo + hi) / 2.0
        if _d(engine, "heat", mid, start) <= epsilon:
            hi = mid
        else:
            lo = mid
    state = worst_case_distance(engine, "heat", hi / 2.0)[1]
    return MixingReport("heat", epsilon, hi, state, _d(engine, "heat", hi, start))


def phi(alpha: float, C: float, t: float) -> float:
    """Time dilation t + ceil(C t^((1+2a)/2) sqrt(a log t)), natural log.

    phi(t)/t -> 1 as t grows; at t = 1 the correction vanishes.
    """
    if not (0 < alpha <= 0.5):
        raise DomainError(f"alpha must be in (0, 1/2], got {alpha}")
    if C <= 0:
        raise DomainError(f"C must be > 0, got {C}")
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    bump = C * t ** ((1 + 2 * alpha) / 2) * math.sqrt(alpha * math.log(t))
    return t + math.ceil(bump)


def psi(alpha: float, C: float, x: float) -> float:
    """Distance dilation min(1, x + C |log(2x)|^(-alpha)), natural log.

    Saturates to 1 at x = 1/2 where the penalty diverges; tends to 0 with x.
    """
    if not (0 < alpha < 0.5):
        raise DomainError(f"alpha must be in (0, 1/2), got {alpha}")
    if C <= 0:
        raise DomainError(f"C must be > 0, got {C}")
    if not (0 < x < 1):
        raise DomainError(f"x must be in (0, 1), got {x}")
    log_term = abs(math.log(2 * x))
    if log_term == 0.0:
        return 1.0
    return min(1.0, x + C * log_term ** (-alpha))
