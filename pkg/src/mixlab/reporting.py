"""Report emission: delimited profiles, JSON verifier records, and figures.

All writes are atomic (temp file in the target directory, then rename), so
interrupted batch runs never leave truncated outputs.  Figures are rendered
with matplotlib under pinned deterministic settings: identical inputs yield
identical bytes for the SVG backend.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .distances import DistanceProfile
from .errors import EmptyProfile

# Pinned rendering parameters; svg.hashsalt makes element ids input-determined.
_RC = {
    "svg.hashsalt": "mixlab",
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}

_MODE_STYLE = {
    "disc": {"color": "#444444", "linestyle": ":"},
    "lazy": {"color": "#1f77b4", "linestyle": "--"},
    "ave": {"color": "#d62728", "linestyle": "-"},
    "heat": {"color": "#2ca02c", "linestyle": "-."},
}


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def profiles_to_csv(profiles, meta: dict | None = None) -> str:
    """Delimited profile table: header t,mode,start,value at 17 significant digits.

    Metadata (seed, grids) is echoed as leading '#' comment lines.
    """
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append("t,mode,start,value")
    for p in profiles:
        for t, mode, start, value in p.rows():
            lines.append(f"{t:.17g},{mode},{start},{value:.17g}")
    return "\n".join(lines) + "\n"


def cutoff_to_csv(report, meta: dict | None = None) -> str:
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append("family,size,mode,epsilon,t_mix")
    for family, size, mode, eps, t in report.csv_rows():
        lines.append(f"{family},{size},{mode},{eps:.17g},{t:.17g}")
    return "\n".join(lines) + "\n"


def reports_to_json(reports, meta: dict | None = None) -> str:
    """Serialize anything exposing to_json_dict (single report or a list)."""
    if hasattr(reports, "to_json_dict"):
        body = reports.to_json_dict()
    else:
        body = [r.to_json_dict() for r in reports]
    doc = {"meta": meta or {}, "reports": body}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_profiles(profiles, path, title: str | None = None) -> None:
    """Render distance profiles as one line per profile; format from suffix.

    Raises EmptyProfile when there is nothing to draw.  SVG output is
    byte-deterministic for identical inputs (hashed ids, no date metadata).
    """
    profiles = list(profiles)
    if not profiles:
        raise EmptyProfile("no profiles to plot")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for p in profiles:
            style = _MODE_STYLE.get(p.mode, {})
            label = p.mode if p.start == "worst" else f"{p.mode} (from {p.start})"
            ax.plot(p.times, p.values, label=label, **style)
        ax.set_xlabel("t")
        ax.set_ylabel("total-variation distance")
        ax.set_ylim(-0.02, 1.02)
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=path.suffix)
        os.close(fd)
        try:
            fig.savefig(tmp, format=path.suffix.lstrip(".") or "svg", metadata=_no_date_metadata(path.suffix))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        finally:
            plt.close(fig)


def render_scan(report, path) -> None:
    """Mixing-time-vs-size figure for a cutoff scan, one line per mode."""
    sizes = list(report.sizes)
    if not sizes:
        raise EmptyProfile("no scan results to plot")
    modes = sorted({mode for r in report.results for (mode, _) in r.t_mix})
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for mode in modes:
            ys = [r.t_mix.get((mode, 0.25)) for r in report.results]
            ax.plot(sizes, ys, marker="o", label=f"{mode} t(1/4)", **_MODE_STYLE.get(mode, {}))
        ax.set_xlabel("size parameter")
        ax.set_ylabel("mixing time")
        ax.set_title(report.family)
        ax.legend(loc="upper left")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=path.suffix)
        os.close(fd)
        try:
            fig.savefig(tmp, format=path.suffix.lstrip(".") or "svg", metadata=_no_date_metadata(path.suffix))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        finally:
            plt.close(fig)


def _no_date_metadata(suffix: str) -> dict | None:
    if suffix.lstrip(".").lower() == "svg":
        return {"Date": None}
    return None
