"""Chain-spec file format: JSON with either an explicit matrix or a family.

    {"label": "...", "n": 3, "P": [[...], [...], [...]]}
    {"family": "ehrenfest", "params": {"n": 40}}

Family entries are resolved through the zoo constructors.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .chain import ChainSpec
from .errors import ValidationError
from .zoo import FamilySpec, make_chain


def chain_from_dict(data: dict) -> ChainSpec:
    if "family" in data:
        return make_chain(FamilySpec(data["family"], dict(data.get("params", {}))))
    try:
        n = int(data["n"])
        P = np.asarray(data["P"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"chain spec needs 'n' and 'P' (or 'family'): {exc}") from exc
    return ChainSpec(n=n, P=P, label=str(data.get("label", "")))


def chain_to_dict(spec: ChainSpec) -> dict:
    return {"label": spec.label, "n": spec.n, "P": spec.P.tolist()}


def load_chain_file(path) -> ChainSpec:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read chain file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"chain file {path} must hold a JSON object")
    return chain_from_dict(data)
