"""Exception hierarchy for chain validation, spectral, and verifier failures."""

from __future__ import annotations


class MixLabError(Exception):
    """Base class for all mixlab errors."""


class ValidationError(MixLabError):
    """A chain or input failed a structural check; maps to CLI exit code 1."""


class RowSumError(ValidationError):
    """A transition-matrix row deviates from sum 1 by more than 1e-12."""


class NegativeEntry(ValidationError):
    """A transition-matrix entry is negative."""


class ReducibleChain(ValidationError):
    """The chain is not irreducible; the stationary distribution is not unique."""


class LengthMismatch(ValidationError):
    """Two vectors that must share a length do not."""


class UnnormalizedPmf(ValidationError):
    """A probability mass function does not sum to 1."""


class ParamError(ValidationError):
    """A chain-family parameter is outside its documented domain."""


class DomainError(ValidationError):
    """A scalar argument is outside the function's domain."""


class GridError(ValidationError):
    """An evaluation grid violates a precondition (e.g. s > sqrt(t))."""


class EmptySet(ValidationError):
    """A target state set is empty."""


class ZeroSamples(ValidationError):
    """A Monte Carlo routine was asked for zero samples."""


class NotReversible(MixLabError):
    """Spectral decomposition requested for a non-reversible chain."""


class SpectralUnavailable(MixLabError):
    """Stationary masses underflow double precision; spectral path unusable."""


class JacobiNoConvergence(MixLabError):
    """The cyclic Jacobi sweep did not converge within the sweep budget."""


class NegativeMass(MixLabError):
    """A kernel row produced mass below -1e-11; signals eigensolver failure."""


class NoMixing(MixLabError):
    """Mixing-time bracket search exceeded the configured time cap."""


class SingularSystem(MixLabError):
    """The hitting-time linear system is singular (absorbing-complement pathology)."""


class SpectrumOutOfRange(MixLabError):
    """A maximal-function order requires spectrum in [0, 1] but got ave mode."""


class EmptyProfile(ValidationError):
    """A plot was requested for an empty profile list."""


class VerificationFailure(MixLabError):
    """An explicit-constant inequality was violated; maps to CLI exit code 2."""
