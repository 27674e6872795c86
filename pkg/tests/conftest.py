"""Shared fixtures: cached zoo instances and engines.

Chain construction and decomposition are cached per session because several
suites reuse the same instances; everything downstream is pure.
"""

from __future__ import annotations

import numpy as np
import pytest

from mixlab import FamilySpec, decompose, make_chain, validate_chain
from mixlab.spectral import DirectKernel

# Reversible test bench: one instance per family, sized so direct kernel
# evaluation stays fast.  Spectral-safe instances (stationary ratio <= ~1e7)
# are a subset; strongly biased chains are evaluated by matrix powers only.
REVERSIBLE_INSTANCES = {
    "flip": ("flip", {}),
    "complete10": ("complete", {"n": 10}),
    "path12": ("path", {"n": 12}),
    "ehrenfest30": ("ehrenfest", {"n": 30}),
    "fragile30": ("fragile_bd", {"n": 30}),
    "af20": ("af_section6", {"n": 20, "alpha": 0.5}),
}

SPECTRAL_SAFE_INSTANCES = {
    "flip": ("flip", {}),
    "complete10": ("complete", {"n": 10}),
    "path12": ("path", {"n": 12}),
    "ehrenfest16": ("ehrenfest", {"n": 16}),
    "fragile5": ("fragile_bd", {"n": 5}),
    "af6": ("af_section6", {"n": 6, "alpha": 0.5}),
}


@pytest.fixture(scope="session")
def chains():
    out = {}
    for name, (family, params) in REVERSIBLE_INSTANCES.items():
        out[name] = validate_chain(make_chain(FamilySpec(family, params)))
    out["biased20"] = validate_chain(make_chain(FamilySpec("biased_cycle", {"n": 20, "ell": 1.0})))
    return out


@pytest.fixture(scope="session")
def engines(chains):
    return {name: DirectKernel(chain) for name, chain in chains.items()}


@pytest.fixture(scope="session")
def safe_chains():
    return {
        name: validate_chain(make_chain(FamilySpec(family, params)))
        for name, (family, params) in SPECTRAL_SAFE_INSTANCES.items()
    }


@pytest.fixture(scope="session")
def spectra(safe_chains):
    return {name: decompose(chain) for name, chain in safe_chains.items()}


def random_reversible_chain(n: int, rng: np.random.Generator):
    """Random reversible chain from symmetric conductances on a random tree
    plus extra symmetric edges (detailed balance holds by construction)."""
    W = np.zeros((n, n))
    for v in range(1, n):
        u = int(rng.integers(0, v))
        w = float(rng.uniform(0.5, 2.0))
        W[u, v] = W[v, u] = w
    extra = rng.uniform(0.0, 1.0, size=(n, n))
    extra = (extra + extra.T) / 2 * (rng.random((n, n)) < 0.3)
    W += np.triu(extra, 1) + np.triu(extra, 1).T
    P = W / W.sum(axis=1, keepdims=True)
    from mixlab import ChainSpec

    return validate_chain(ChainSpec(n=n, P=P, label=f"random_reversible({n})"))
