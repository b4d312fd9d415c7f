"""Generalized eigensystem operations against a 2x2 hand-worked oracle
and the cached grid runs."""

import csv

import numpy as np
import pytest

from qtoboggan import spectra
from qtoboggan.errors import (
    DegeneratePairing,
    EmptySpectrum,
    IncompleteBasis,
    SelfOrthogonalMode,
    VanishingParityOverlap,
    ZeroKappa,
)

# Hand-worked pair: H = [[1, 1], [0, 2]], W = I.
# lambda = 1: right (1,0);           lambda = 2: right (1,1)/sqrt(2)
# left eigvecs of H^dag: (1,-1)/sqrt(2) and (0,1); sigma = 1/sqrt(2) each;
# after sigma-normalization: left_1 = (1,-1), left_2 = (0, sqrt(2)).
H2 = np.array([[1.0, 1.0], [0.0, 2.0]], dtype=complex)


@pytest.fixture()
def hand():
    es = spectra.solve_generalized(H2, tol=1e-12)
    return spectra.normalize_biorthogonal(es)


def _angle(u, v):
    c = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return np.arccos(min(1.0, c))


def test_hand_eigenvalues_and_vectors(hand):
    assert np.allclose(hand.lambdas, [1.0, 2.0], atol=1e-12)
    # arccos of a rounded unit overlap cannot resolve angles below ~2e-8,
    # so exactly-collinear vectors still report up to that much.
    assert _angle(hand.right[:, 0], [1.0, 0.0]) < 1e-7
    assert _angle(hand.right[:, 1], [1.0, 1.0]) < 1e-7
    assert _angle(hand.left[:, 0], [1.0, -1.0]) < 1e-7
    assert _angle(hand.left[:, 1], [0.0, 1.0]) < 1e-7
    # sigma-normalized left columns have the exact hand magnitudes
    assert np.linalg.norm(hand.left[:, 0]) == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert np.linalg.norm(hand.left[:, 1]) == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_hand_biorthogonality_and_identities(hand):
    assert np.allclose(hand.sigmas, 1.0)
    assert np.allclose(hand.gram, np.eye(2), atol=1e-12)
    assert spectra.completeness_residual(hand) < 1e-14
    assert spectra.spectral_rebuild_residual(hand, H2) < 1e-14
    assert hand.residual_right.max() < 1e-12
    assert hand.residual_left.max() < 1e-12


def test_right_kets_unit_norm_with_positive_leading_phase(hand):
    norms = np.linalg.norm(hand.right, axis=0)
    assert np.allclose(norms, 1.0, atol=1e-13)
    for j in range(2):
        lead = hand.right[np.argmax(np.abs(hand.right[:, j])), j]
        assert abs(lead.imag) < 1e-14
        assert lead.real > 0


def test_degenerate_pairing_detected():
    with pytest.raises(DegeneratePairing):
        spectra.solve_generalized(np.eye(2, dtype=complex), tol=1e-10)


def test_solver_reports_sorted_spectrum():
    H = np.diag([3.0, 1.0, 2.0]).astype(complex)
    es = spectra.solve_generalized(H, tol=1e-12)
    assert np.allclose(es.lambdas, [1.0, 2.0, 3.0])
    assert es.ambient_n == 3 and es.m == 3


def test_filter_real_keeps_and_sorts():
    H = np.diag([3.0, 1.0 + 0.5j, 2.0]).astype(complex)
    es = spectra.solve_generalized(H, tol=1e-12)
    sub = spectra.filter_real(es, tol_im=1e-6)
    assert np.allclose(sub.lambdas, [2.0, 3.0])
    assert sub.discarded == 1
    assert sub.ambient_n == 3


def test_filter_real_empty_raises():
    H = np.diag([1.0 + 1.0j, 2.0 - 1.0j]).astype(complex)
    es = spectra.solve_generalized(H, tol=1e-12)
    with pytest.raises(EmptySpectrum):
        spectra.filter_real(es, tol_im=1e-6)


def test_self_orthogonal_mode_detected():
    H = np.array([[1.0, 1.0], [0.0, 1.0 + 1e-8]], dtype=complex)
    es = spectra.solve_generalized(H, tol=1e-12)
    with pytest.raises(SelfOrthogonalMode):
        spectra.normalize_biorthogonal(es, sigma_tol=1e-6)


def test_completeness_requires_full_set():
    H = np.diag([1.0, 2.0 + 1.0j, 3.0]).astype(complex)
    es = spectra.solve_generalized(H, tol=1e-12)
    sub = spectra.normalize_biorthogonal(spectra.filter_real(es))
    with pytest.raises(IncompleteBasis):
        spectra.completeness_residual(sub)
    with pytest.raises(IncompleteBasis):
        spectra.spectral_rebuild_residual(sub, H)


def test_apply_kappa_rescales_and_accumulates(hand):
    k1 = np.array([2.0, 0.5j])
    k2 = np.array([1.0 + 1.0j, 3.0])
    once = spectra.apply_kappa(hand, k1)
    twice = spectra.apply_kappa(once, k2)
    assert np.allclose(twice.kappa, k1 * k2)
    assert np.allclose(twice.right, hand.right / (k1 * k2)[np.newaxis, :])
    assert np.allclose(twice.left, hand.left * (k1 * k2).conj()[np.newaxis, :])
    # spectrum and sigma untouched
    assert np.array_equal(twice.lambdas, hand.lambdas)
    assert np.allclose(twice.sigmas, 1.0)


def test_apply_kappa_gram_moves_by_exact_ratio(harmonic_small):
    pair, es_full, es_sub = harmonic_small
    rng = np.random.default_rng(11)
    kappa = rng.uniform(0.5, 2.0, es_sub.m) * np.exp(
        2j * np.pi * rng.uniform(size=es_sub.m)
    )
    es_k = spectra.apply_kappa(es_sub, kappa)
    gram_k = es_k.left.conj().T @ (pair.W @ es_k.right)
    predicted = (kappa[:, None] / kappa[None, :]) * es_sub.gram
    assert np.abs(gram_k - predicted).max() < 1e-12


def test_apply_kappa_rejects_zero(hand):
    with pytest.raises(ZeroKappa):
        spectra.apply_kappa(hand, np.array([1.0, 0.0]))


def test_quasiparity_vanishing_overlap(hand):
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(VanishingParityOverlap):
        spectra.quasiparity_leftkets(hand, P)


def test_quasiparity_matches_solved_left_vectors(harmonic_small):
    pair, es_full, es_sub = harmonic_small
    lowest = es_sub.take(np.arange(5))
    kets, Q = spectra.quasiparity_leftkets(lowest, pair.P)
    angles = spectra.collinearity_angles(lowest, kets)
    # measurement floor of arccos near 1 is ~2e-8 even for exact collinearity
    assert angles.max() < 1e-7
    # alternating parity overlap sign along the oscillator ladder
    signs = np.sign(np.real(1.0 / Q))
    assert np.allclose(signs, [1.0, -1.0, 1.0, -1.0, 1.0])


def test_lowest_eigenvalues_matches_dense(harmonic_small):
    pair, es_full, es_sub = harmonic_small
    low = spectra.lowest_eigenvalues(pair, k=4, sigma=0.0)
    assert np.allclose(low.real, es_sub.lambdas[:4].real, atol=1e-9)
    assert np.abs(low.imag).max() < 1e-9


def test_lowest_eigenvalues_small_matrix_fallback():
    H = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    low = spectra.lowest_eigenvalues(H, k=3, sigma=0.0)
    assert np.allclose(low, [1.0, 2.0, 3.0])


def test_residuals_small_on_grid_run(harmonic_small):
    pair, es_full, es_sub = harmonic_small
    assert es_sub.residual_right.max() < 1e-9
    assert es_sub.residual_left.max() < 1e-9
    assert np.abs(es_sub.gram - np.eye(es_sub.m)).max() < 1e-9


def test_save_spectrum_csv(tmp_path, hand):
    out = tmp_path / "spec.csv"
    spectra.save_spectrum_csv(hand, str(out))
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["re_lambda"] for r in rows] == ["1.0", "2.0"]
    assert {"index", "re_lambda", "im_lambda", "residual_right", "residual_left",
            "sigma_re", "sigma_im"} <= set(rows[0])
