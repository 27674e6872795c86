"""Family-level cutoff diagnostics across a size grid.

For each size the scan computes epsilon-mixing times of the heat, lazy, and
averaged families, the profile-shoulder ratios t(eps)/t(1-eps), the window
t(1/4) - t(3/4), and the cross-mode columns t_ave/t_heat and
t_lazy/(2 t_heat).  Limits are reported as monotone trends over the size
grid, never asserted as asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import validate_chain
from .distances import mixing_time
from .errors import ParamError
from .spectral import make_engine
from .zoo import FamilySpec, make_chain

SCAN_MODES = ("heat", "lazy", "ave")
DEFAULT_EPS = (0.01, 0.1, 0.25, 0.4)


@dataclass(frozen=True)
class SizeResult:
    size: int
    t_mix: dict            # (mode, eps) -> t
    ratios: dict           # (mode, eps) -> t(eps) / t(1 - eps)
    windows: dict          # mode -> t(1/4) - t(3/4)
    t_ave_over_t_heat: float
    t_lazy_over_2t_heat: float
    lazy_window_ge_half_sqrt: bool


@dataclass(frozen=True)
class CutoffReport:
    family: str
    sizes: tuple[int, ...]
    eps_list: tuple[float, ...]
    results: tuple[SizeResult, ...]

    def column(self, key: str) -> list[float]:
        return [getattr(r, key) for r in self.results]

    def csv_rows(self):
        """Rows of the flat table family,size,mode,epsilon,t_mix."""
        for r in self.results:
            for (mode, eps), t in sorted(r.t_mix.items()):
                yield (self.family, r.size, mode, eps, t)

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "sizes": list(self.sizes),
            "eps": list(self.eps_list),
            "results": [
                {
                    "size": r.size,
                    "t_mix": {f"{m},{e}": t for (m, e), t in sorted(r.t_mix.items())},
                    "ratios": {f"{m},{e}": v for (m, e), v in sorted(r.ratios.items())},
                    "windows": dict(r.windows),
                    "t_ave_over_t_heat": r.t_ave_over_t_heat,
                    "t_lazy_over_2t_heat": r.t_lazy_over_2t_heat,
                    "lazy_window_ge_half_sqrt": r.lazy_window_ge_half_sqrt,
                }
                for r in self.results
            ],
        }


def scan_family(family: str, sizes, eps_list=DEFAULT_EPS, params=None, modes=SCAN_MODES) -> CutoffReport:
    """Scan one family over ascending sizes.

    eps values must lie in (0, 1/2) so that each t(eps)/t(1-eps) ratio is a
    shoulder-width diagnostic.  The lazy-window flag records whether the lazy
    window at 1/4 is at least half of sqrt(t_heat) (a reported qualitative
    comparison, not a hard failure).
    """
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes):
        raise ParamError("sizes must be ascending")
    eps_list = tuple(float(e) for e in eps_list)
    for e in eps_list:
        if not (0 < e < 0.5):
            raise ParamError(f"eps must be in (0, 1/2), got {e}")
    params = dict(params or {})
    results = []
    for size in sizes:
        chain = validate_chain(make_chain(FamilySpec(family, {"n": size, **params})))
        engine = make_engine(chain)
        t_mix, ratios = {}, {}
        for mode in modes:
            for eps in sorted(set(eps_list) | {0.25}):
                t_lo = mixing_time(engine, mode, eps).t_mix
                t_hi = mixing_time(engine, mode, 1 - eps).t_mix
                t_mix[(mode, eps)] = float(t_lo)
                t_mix[(mode, 1 - eps)] = float(t_hi)
                ratios[(mode, eps)] = float(t_lo / t_hi) if t_hi > 0 else math.inf
        windows = {mode: t_mix[(mode, 0.25)] - t_mix[(mode, 0.75)] for mode in modes}
        t_heat = t_mix.get(("heat", 0.25), math.nan)
        t_ave = t_mix.get(("ave", 0.25), math.nan)
        t_lazy = t_mix.get(("lazy", 0.25), math.nan)
        lazy_flag = bool(windows.get("lazy", math.nan) >= 0.5 * math.sqrt(t_heat)) if "lazy" in modes and "heat" in modes else False
        results.append(
            SizeResult(
                size=size,
                t_mix=t_mix,
                ratios=ratios,
                windows=windows,
                t_ave_over_t_heat=float(t_ave / t_heat) if t_heat else math.inf,
                t_lazy_over_2t_heat=float(t_lazy / (2 * t_heat)) if t_heat else math.inf,
                lazy_window_ge_half_sqrt=lazy_flag,
            )
        )
    return CutoffReport(family=family, sizes=tuple(sizes), eps_list=eps_list, results=tuple(results))
