"""Spectral decomposition, functional calculus, and the direct-kernel oracle."""

import numpy as np
import pytest

from mixlab import (
    ChainSpec,
    FamilySpec,
    decompose,
    heat_series_reference,
    kernel_row,
    make_chain,
    make_engine,
    point_mass,
    validate_chain,
)
from mixlab.errors import NotReversible, SpectralUnavailable
from mixlab.spectral import DirectKernel, Spectrum
from mixlab.verifiers import projected_two_state_chain

from conftest import random_reversible_chain


def test_flip_eigenvalues():
    spec = decompose(validate_chain(make_chain(FamilySpec("flip"))))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, -1.0], atol=1e-12)


def test_projected_two_state_eigenvalues():
    s = 5
    lam = 2.0 / (3 * s)
    spec = decompose(validate_chain(projected_two_state_chain(s)))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, lam - 1.0], atol=1e-12)


def test_top_eigenvector_is_constant(spectra):
    for spec in spectra.values():
        f0 = spec.basis[:, 0]
        np.testing.assert_allclose(f0, np.ones_like(f0), atol=1e-8)


def test_random_reversible_reconstruction():
    rng = np.random.default_rng(11)
    for _ in range(5):
        vc = random_reversible_chain(8, rng)
        spec = decompose(vc)
        assert np.abs(spec.reconstruct() - vc.P).max() <= 1e-9


def test_pi_orthonormality(spectra):
    for spec in spectra.values():
        gram = spec.basis.T @ (spec.basis * spec.pi[:, None])
        np.testing.assert_allclose(gram, np.eye(spec.n), atol=1e-9)


def test_jacobi_matches_library_eigenvalues():
    rng = np.random.default_rng(3)
    for n in (4, 9, 17):
        vc = random_reversible_chain(n, rng)
        spec = decompose(vc)
        sq = np.sqrt(vc.pi)
        S = sq[:, None] * vc.P / sq[None, :]
        ref = np.sort(np.linalg.eigvalsh((S + S.T) / 2))[::-1]
        np.testing.assert_allclose(spec.eigenvalues, ref, atol=1e-11)


def test_kernel_row_examples():
    flip = decompose(validate_chain(make_chain(FamilySpec("flip"))))
    np.testing.assert_allclose(kernel_row(flip, "ave", 0, point_mass(0, 2)), [0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(kernel_row(flip, "heat", 20.0, point_mass(0, 2)), [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(kernel_row(flip, "disc", 0, point_mass(1, 2)), [0.0, 1.0], atol=0)


def test_kernel_row_rejects_bad_times(spectra):
    spec = spectra["flip"]
    with pytest.raises(ValueError):
        kernel_row(spec, "disc", 1.5, point_mass(0, 2))
    with pytest.raises(ValueError):
        kernel_row(spec, "heat", -1.0, point_mass(0, 2))


def test_heat_series_identity_at_zero(chains):
    vc = chains["complete10"]
    np.testing.assert_array_equal(heat_series_reference(vc, 0.0), np.eye(vc.n))


def test_heat_series_matches_spectral_on_flip():
    vc = validate_chain(make_chain(FamilySpec("flip")))
    spec = decompose(vc)
    assert np.abs(spec.kernel("heat", 1.0) - heat_series_reference(vc, 1.0)).max() <= 1e-10


def test_heat_series_non_reversible_rows_sum_to_one(chains):
    H = heat_series_reference(chains["biased20"], 2.0)
    np.testing.assert_allclose(H.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(H >= -1e-15)


def test_spectral_disc_matches_matrix_powers(safe_chains, spectra):
    for name, vc in safe_chains.items():
        spec = spectra[name]
        power = np.eye(vc.n)
        for t in range(0, 31):
            if t > 0:
                power = power @ vc.P
            assert np.abs(spec.kernel("disc", t) - power).max() <= 1e-9, (name, t)


def test_spectral_heat_matches_series(safe_chains, spectra):
    for name, vc in safe_chains.items():
        spec = spectra[name]
        for t in (0.5, 1.0, 5.0, 20.0):
            gap = np.abs(spec.kernel("heat", t) - heat_series_reference(vc, t)).max()
            assert gap <= 1e-10, (name, t, gap)


def test_heat_semigroup(spectra):
    for spec in spectra.values():
        H = lambda t: spec.kernel("heat", t)
        assert np.abs(H(1.5) @ H(2.5) - H(4.0)).max() <= 1e-9


def test_averaged_one_step_recursion(spectra):
    for spec in spectra.values():
        P = spec.kernel("disc", 1)
        for t in (0, 3, 11):
            assert np.abs(spec.kernel("ave", t) @ P - spec.kernel("ave", t + 1)).max() <= 1e-12


def test_averaged_difference_halves_squared_difference(spectra):
    # (A_{2t+1} - A_{2t}) f = ((P^2)^{t+1} - (P^2)^t) f / 2
    rng = np.random.default_rng(5)
    for spec in spectra.values():
        P2 = spec.kernel("disc", 2)
        for t in (0, 2, 7):
            lhs = spec.kernel("ave", 2 * t + 1) - spec.kernel("ave", 2 * t)
            rhs = 0.5 * (np.linalg.matrix_power(P2, t + 1) - np.linalg.matrix_power(P2, t))
            for _ in range(20):
                f = rng.standard_normal(spec.n)
                assert np.abs(lhs @ f - rhs @ f).max() <= 1e-10


def test_decompose_rejects_non_reversible(chains):
    with pytest.raises(NotReversible):
        decompose(chains["biased20"])


def test_decompose_rejects_underflowed_pi():
    vc = validate_chain(make_chain(FamilySpec("ehrenfest", {"n": 80})))
    with pytest.raises(SpectralUnavailable):
        decompose(vc)


def test_engine_selection(chains, safe_chains):
    assert isinstance(make_engine(safe_chains["flip"]), Spectrum)
    assert isinstance(make_engine(chains["af20"]), DirectKernel)
    assert isinstance(make_engine(chains["biased20"]), DirectKernel)
    assert isinstance(make_engine(safe_chains["flip"], prefer="direct"), DirectKernel)


def test_direct_kernel_modes_agree_with_definitions(chains):
    vc = chains["af20"]
    eng = DirectKernel(vc)
    P = vc.P
    np.testing.assert_allclose(eng.kernel("disc", 3), P @ P @ P, atol=1e-14)
    lazy = (np.eye(vc.n) + P) / 2
    np.testing.assert_allclose(eng.kernel("lazy", 2), lazy @ lazy, atol=1e-14)
    np.testing.assert_allclose(eng.kernel("ave", 2), (P @ P + P @ P @ P) / 2, atol=1e-14)
    assert np.abs(eng.kernel("heat", 3.0) - heat_series_reference(vc, 3.0)).max() <= 1e-10


def test_kernel_row_negative_mass_gate():
    """Entries below -1e-11 signal eigensolver failure and must raise."""
    from mixlab.errors import NegativeMass

    flip = validate_chain(make_chain(FamilySpec("flip")))
    spec = decompose(flip)
    corrupt = Spectrum(
        eigenvalues=spec.eigenvalues,
        basis=spec.basis + np.array([[0.0, 2e-5], [0.0, 0.0]]),
        pi=spec.pi,
    )
    with pytest.raises(NegativeMass):
        kernel_row(corrupt, "disc", 1, point_mass(0, 2))


def test_kernel_row_clips_solver_noise():
    flip = validate_chain(make_chain(FamilySpec("flip")))
    spec = decompose(flip)
    noisy = Spectrum(
        eigenvalues=spec.eigenvalues,
        basis=spec.basis + np.array([[0.0, 5e-12], [0.0, 0.0]]),
        pi=spec.pi,
    )
    row = kernel_row(noisy, "disc", 1, point_mass(0, 2))
    assert np.all(row >= 0.0)
    assert row.sum() == pytest.approx(1.0, abs=1e-15)
