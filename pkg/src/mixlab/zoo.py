"""Parametrized constructors for the chain families used across the test bench.

Families:

    af_section6   -- upward-biased birth-death walk on {0, ..., 2n+1} with a
                     holding band near the top; the sharpness example for the
                     averaged-vs-continuous comparison.  Requires
                     s = ceil(n^(0.5+alpha)) >= 2.
    biased_cycle  -- non-reversible walk on the n-cycle, down-rate n^(-ell).
    fragile_bd    -- near-deterministic birth-death chain on n states with
                     back-rate e^(-n); the time-shift counterexample.
    ehrenfest     -- lazy Ehrenfest urn on {0, ..., n} (hypercube projection).
    flip          -- the two-state period-2 chain [[0,1],[1,0]].
    complete      -- random walk on the complete graph K_n.
    path          -- reflecting simple random walk on n path vertices.

Rows are assembled in exact rational arithmetic and converted to float once,
so validated row sums are exact.  Exact stationary distributions for the
birth-death families are exposed for verifier-grade comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chain import ChainSpec
from .errors import ParamError

FAMILIES = ("af_section6", "biased_cycle", "fragile_bd", "ehrenfest", "flip", "complete", "path")


@dataclass(frozen=True)
class FamilySpec:
    """A chain family name plus its parameter map."""

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParamError(f"unknown family {self.family!r}; expected one of {FAMILIES}")


def section6_holding_count(n: int, alpha: float) -> int:
    """The band width s = ceil(n^(0.5 + alpha)) of the af_section6 chain."""
    if not (0 < alpha <= 0.5):
        raise ParamError(f"alpha must be in (0, 1/2], got {alpha}")
    if n < 1:
        raise ParamError(f"n must be >= 1, got {n}")
    s = math.ceil(n ** (0.5 + alpha))
    if s < 2:
        raise ParamError(f"af_section6 needs ceil(n^(0.5+alpha)) >= 2, got s={s}")
    return s


def _af_section6_rows(n: int, alpha: float) -> list[dict[int, Fraction]]:
    """Exact sparse rows of the af_section6 chain on states {0, ..., 2n+1}."""
    s = section6_holding_count(n, alpha)
    band_start = 2 * n - 2 * s
    hold = Fraction(1, 3 * s)
    up_band = Fraction(3, 4) - Fraction(1, 4 * s)
    up_free = Fraction(3, 4)
    rows: list[dict[int, Fraction]] = []
    for i in range(2 * n + 2):
        if i == 0:
            rows.append({1: Fraction(1)})
        elif i == 2 * n + 1:
            # The top row's remainder 1/(3s) is holding mass, forced by
            # stochasticity since 2n+1 always lies in the holding band.
            rows.append({2 * n: 1 - hold, 2 * n + 1: hold})
        else:
            up = up_band if i >= band_start else up_free
            row = {i + 1: up, i - 1: up / 3}
            if i >= band_start:
                row[i] = hold
            rows.append(row)
    for row in rows:
        assert sum(row.values()) == 1
    return rows


def _rows_to_matrix(rows: list[dict[int, Fraction]]) -> np.ndarray:
    n = len(rows)
    P = np.zeros((n, n))
    for i, row in enumerate(rows):
        for j, p in row.items():
            P[i, j] = float(p)
    return P


def _bd_exact_pi(rows: list[dict[int, Fraction]]) -> list[Fraction]:
    """Exact stationary distribution of a birth-death chain from detailed balance."""
    n = len(rows)
    weights = [Fraction(1)]
    for i in range(n - 1):
        up = rows[i].get(i + 1, Fraction(0))
        down = rows[i + 1].get(i, Fraction(0))
        if up == 0 or down == 0:
            raise ParamError("birth-death chain has a broken nearest-neighbor edge")
        weights.append(weights[-1] * up / down)
    total = sum(weights)
    return [w / total for w in weights]


def section6_exact_pi(n: int, alpha: float) -> list[Fraction]:
    """Exact rational stationary distribution of the af_section6 chain."""
    return _bd_exact_pi(_af_section6_rows(n, alpha))


def section6_even_odd_sets(n: int, alpha: float) -> tuple[list[int], list[int], list[int]]:
    """The even/odd/holding-band index sets of the af_section6 chain.

    Returns (Even, Odd, B) with Even = {2i : 0 <= i <= n},
    Odd = {2i+1 : 0 <= i <= n}, B = {i : i >= 2n - 2s}.
    """
    s = section6_holding_count(n, alpha)
    even = [2 * i for i in range(n + 1)]
    odd = [2 * i + 1 for i in range(n + 1)]
    b = [i for i in range(2 * n + 2) if i >= 2 * n - 2 * s]
    return even, odd, b


def make_chain(spec: FamilySpec) -> ChainSpec:
    """Build the transition matrix for a family instance.

    Raises ParamError for parameters outside the documented domains.
    """
    family, params = spec.family, dict(spec.params)
    if family == "af_section6":
        n = int(params.pop("n"))
        alpha = float(params.pop("alpha", 0.5))
        _reject_extras(family, params)
        rows = _af_section6_rows(n, alpha)
        return ChainSpec(n=len(rows), P=_rows_to_matrix(rows), label=f"af_section6(n={n},alpha={alpha})")
    if family == "biased_cycle":
        n = int(params.pop("n"))
        ell = float(params.pop("ell", 1.0))
        _reject_extras(family, params)
        if n < 3:
            raise ParamError(f"biased_cycle needs n >= 3, got {n}")
        if ell <= 0:
            raise ParamError(f"biased_cycle needs ell > 0, got {ell}")
        down = float(n) ** (-ell)
        P = np.zeros((n, n))
        for i in range(n):
            P[i, (i - 1) % n] = down
            P[i, (i + 1) % n] = 1.0 - down
        return ChainSpec(n=n, P=P, label=f"biased_cycle(n={n},ell={ell})")
    if family == "fragile_bd":
        n = int(params.pop("n"))
        _reject_extras(family, params)
        if n < 3:
            raise ParamError(f"fragile_bd needs n >= 3, got {n}")
        # States carry the paper-style labels 1..n at indices 0..n-1.
        back = math.exp(-n)
        P = np.zeros((n, n))
        P[0, 1] = 1.0
        P[n - 1, n - 2] = 1.0
        for j in range(1, n - 1):
            P[j, j - 1] = back
            P[j, j + 1] = 1.0 - back
        return ChainSpec(n=n, P=P, label=f"fragile_bd(n={n})")
    if family == "ehrenfest":
        n = int(params.pop("n"))
        laziness = params.pop("laziness", Fraction(1, 2))
        _reject_extras(family, params)
        if n < 1:
            raise ParamError(f"ehrenfest needs n >= 1, got {n}")
        lazy = Fraction(laziness).limit_denominator(10**9)
        if not (0 <= lazy < 1):
            raise ParamError(f"ehrenfest laziness must be in [0, 1), got {laziness}")
        move = 1 - lazy
        rows: list[dict[int, Fraction]] = []
        for i in range(n + 1):
            row: dict[int, Fraction] = {}
            if lazy > 0:
                row[i] = lazy
            if i < n:
                row[i + 1] = move * Fraction(n - i, n)
            if i > 0:
                row[i - 1] = move * Fraction(i, n)
            rows.append(row)
        return ChainSpec(n=n + 1, P=_rows_to_matrix(rows), label=f"ehrenfest(n={n})")
    if family == "flip":
        n = int(params.pop("n", 2))
        _reject_extras(family, params)
        if n != 2:
            raise ParamError(f"flip is the two-state chain; got n={n}")
        return ChainSpec(n=2, P=np.array([[0.0, 1.0], [1.0, 0.0]]), label="flip")
    if family == "complete":
        n = int(params.pop("n"))
        _reject_extras(family, params)
        if n < 2:
            raise ParamError(f"complete needs n >= 2, got {n}")
        P = np.full((n, n), 1.0 / (n - 1))
        np.fill_diagonal(P, 0.0)
        return ChainSpec(n=n, P=P, label=f"complete(n={n})")
    if family == "path":
        n = int(params.pop("n"))
        _reject_extras(family, params)
        if n < 2:
            raise ParamError(f"path needs n >= 2, got {n}")
        P = np.zeros((n, n))
        P[0, 1] = 1.0
        P[n - 1, n - 2] = 1.0
        for i in range(1, n - 1):
            P[i, i - 1] = 0.5
            P[i, i + 1] = 0.5
        return ChainSpec(n=n, P=P, label=f"path(n={n})")
    raise ParamError(f"unknown family {family!r}")


def _reject_extras(family: str, leftovers: dict) -> None:
    if leftovers:
        raise ParamError(f"unexpected parameters for {family}: {sorted(leftovers)}")
