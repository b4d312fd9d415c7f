"""Generalized eigenproblem H psi = E W psi: paired left/right eigenvectors.

Right kets |lam> and left double-kets <<lam| (stored as the column whose
conjugate transpose is the bra) are solved together, verified by residual,
normalized biorthogonally with respect to W, and checked against the
completeness and spectral-decomposition identities.  The kappa-rescaling
freedom |lam> -> |lam>/kappa, <<lam| -> kappa*<<lam| is first-class.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from .discrete import OperatorPair
from .errors import (
    DegeneratePairing,
    EmptySpectrum,
    IncompleteBasis,
    NoConvergence,
    SelfOrthogonalMode,
    SolverFailure,
    VanishingParityOverlap,
    ZeroKappa,
)

__all__ = [
    "Eigensystem",
    "solve_generalized",
    "generalized_eigenvalues",
    "lowest_eigenvalues",
    "filter_real",
    "normalize_biorthogonal",
    "completeness_residual",
    "spectral_rebuild_residual",
    "apply_kappa",
    "quasiparity_leftkets",
    "collinearity_angles",
    "save_spectrum_csv",
]

MatrixOrPair = Union[OperatorPair, np.ndarray]


def _unpack(operators: MatrixOrPair, W: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(operators, OperatorPair):
        return operators.H, operators.W
    H = np.asarray(operators, dtype=complex)
    Wm = np.eye(H.shape[0]) if W is None else np.asarray(W, dtype=complex)
    return H, Wm


def _is_identity(Wm: np.ndarray) -> bool:
    """True iff Wm is exactly the identity (zero-winding weights are)."""
    return bool(
        np.all(np.diagonal(Wm) == 1.0) and np.count_nonzero(Wm) == Wm.shape[0]
    )


@dataclass(frozen=True, eq=False)
class Eigensystem:
    """Paired eigensystem of H psi = lambda W psi.

    `left[:, j]` stores the vector whose conjugate transpose is the double-ket
    bra <<lambda_j|; `right[:, j]` is the ket.  `ambient_n` is the dimension of
    the underlying operators (m = len(lambdas) may be smaller after filtering).
    """

    lambdas: np.ndarray
    right: np.ndarray
    left: np.ndarray
    sigmas: np.ndarray
    kappa: np.ndarray
    residual_right: np.ndarray
    residual_left: np.ndarray
    ambient_n: int
    discarded: int = 0
    gram: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return len(self.lambdas)

    def take(self, idx: np.ndarray, discarded: int = 0) -> "Eigensystem":
        return replace(
            self,
            lambdas=self.lambdas[idx],
            right=self.right[:, idx],
            left=self.left[:, idx],
            sigmas=self.sigmas[idx],
            kappa=self.kappa[idx],
            residual_right=self.residual_right[idx],
            residual_left=self.residual_left[idx],
            discarded=self.discarded + discarded,
            gram=None,
        )


def _normalize_columns(V: np.ndarray) -> np.ndarray:
    """Unit 2-norm columns with the largest-magnitude entry rotated real-positive."""
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    anchor = V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])]
    phase = anchor / np.abs(anchor)
    return V / phase[np.newaxis, :]


def solve_generalized(
    operators: MatrixOrPair, tol: float = 1e-10, W: Optional[np.ndarray] = None
) -> Eigensystem:
    """All n eigenpairs with right kets and left double-kets, index-paired.

    `tol` is the pairing-ambiguity threshold: two eigenvalues closer than
    tol*max(1, |lambda|) make the left/right pairing non-canonical and raise
    DegeneratePairing.  Per-mode residuals ||H v - lam W v|| / ||W v|| (and the
    left analogue) are reported, not gated.
    """
    H, Wm = _unpack(operators, W)
    n = H.shape[0]
    try:
        # Standard eigensolve when the weight is exactly the identity: same
        # pairs, and it avoids the ~10x cost of the QZ iteration.
        if _is_identity(Wm):
            lam, VL, VR = scipy.linalg.eig(H, left=True, right=True)
        else:
            lam, VL, VR = scipy.linalg.eig(H, Wm.copy(), left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise SolverFailure(f"generalized eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise SolverFailure("non-finite eigenvalues returned (W effectively singular)")

    order = np.lexsort((lam.imag, lam.real))
    lam, VL, VR = lam[order], VL[:, order], VR[:, order]

    # Pairing-ambiguity gate: scan real-sorted neighbors for coincidence.
    scale = np.maximum(1.0, np.abs(lam))
    for k in range(1, min(4, n)):
        d = np.abs(lam[k:] - lam[:-k])
        s = np.maximum(scale[k:], scale[:-k])
        if np.any(d < tol * s):
            j = int(np.argmin(d / s))
            raise DegeneratePairing(
                f"eigenvalues {lam[j]} and {lam[j + k]} coincide within tol={tol}"
            )

    VR = _normalize_columns(VR)
    VL = _normalize_columns(VL)
    res_r = np.linalg.norm(H @ VR - (Wm @ VR) * lam, axis=0) / np.linalg.norm(Wm @ VR, axis=0)
    res_l = np.linalg.norm(H.conj().T @ VL - (Wm.conj().T @ VL) * lam.conj(), axis=0) / (
        np.linalg.norm(Wm.conj().T @ VL, axis=0)
    )
    sig = np.einsum("ij,ij->j", VL.conj(), Wm @ VR)
    return Eigensystem(
        lambdas=lam,
        right=VR,
        left=VL,
        sigmas=sig,
        kappa=np.ones(n, dtype=complex),
        residual_right=res_r,
        residual_left=res_l,
        ambient_n=n,
    )


def generalized_eigenvalues(operators: MatrixOrPair, W: Optional[np.ndarray] = None) -> np.ndarray:
    """Eigenvalues only (no vectors), sorted by (Re, Im) — cheap convergence studies."""
    H, Wm = _unpack(operators, W)
    if _is_identity(Wm):
        lam = scipy.linalg.eigvals(H)
    else:
        lam = scipy.linalg.eigvals(H, Wm.copy())
    return lam[np.lexsort((lam.imag, lam.real))]


def _as_tridiagonal_sparse(A: np.ndarray):
    """CSC view of a tridiagonal dense matrix, or None if A is not tridiagonal."""
    import scipy.sparse as sp

    n = A.shape[0]
    bands = [np.diagonal(A, k).copy() for k in (-1, 0, 1)]
    tri = sp.diags(bands, (-1, 0, 1), shape=(n, n), format="csc", dtype=complex)
    if np.count_nonzero(A) != tri.count_nonzero() and not np.array_equal(
        tri.toarray(), A
    ):
        return None
    return tri


def lowest_eigenvalues(
    operators: MatrixOrPair,
    k: int = 5,
    sigma: complex = 0.0,
    W: Optional[np.ndarray] = None,
) -> np.ndarray:
    """The k eigenvalues of H psi = lambda W psi nearest `sigma`, sorted by (Re, Im).

    Shift-invert Arnoldi on the tridiagonal-plus-diagonal structure the grid
    discretization produces, so large n stays cheap; falls back to the dense
    solve when the structure is absent.  W must be diagonal and non-singular
    (guaranteed for grid operator pairs).
    """
    import scipy.sparse.linalg as spla

    H, Wm = _unpack(operators, W)
    n = H.shape[0]
    if k >= n - 1:
        lam = generalized_eigenvalues(operators, W=W)
        return lam[np.argsort(np.abs(lam - sigma), kind="stable")[:k]]

    tri = _as_tridiagonal_sparse(H)
    diag_w = np.diagonal(Wm)
    w_is_diagonal = np.count_nonzero(Wm) <= n and np.all(diag_w != 0)
    if tri is None or not w_is_diagonal:
        lam = generalized_eigenvalues(operators, W=W)
        lam = lam[np.argsort(np.abs(lam - sigma), kind="stable")[:k]]
        return lam[np.lexsort((lam.imag, lam.real))]

    if not np.all(diag_w == 1.0):
        # H v = lam W v with invertible diagonal W is the standard problem
        # (W^{-1} H) v = lam v, and diagonal scaling preserves tridiagonality.
        import scipy.sparse as sp

        tri = sp.diags(1.0 / diag_w.astype(complex)) @ tri
    try:
        lam = spla.eigs(tri.tocsc(), k=k, sigma=sigma, which="LM", return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise NoConvergence(f"shift-invert Arnoldi did not converge: {exc}") from exc
    return lam[np.lexsort((lam.imag, lam.real))]


def filter_real(es: Eigensystem, tol_im: float = 1e-6) -> Eigensystem:
    """Retain modes with |Im lambda| < tol_im * max(1, |Re lambda|), sorted by Re."""
    keep = np.abs(es.lambdas.imag) < tol_im * np.maximum(1.0, np.abs(es.lambdas.real))
    if not np.any(keep):
        raise EmptySpectrum(f"no modes pass |Im| < {tol_im}*max(1,|Re|)")
    idx = np.where(keep)[0]
    idx = idx[np.argsort(es.lambdas.real[idx], kind="stable")]
    return es.take(idx, discarded=es.m - len(idx))


def normalize_biorthogonal(
    es: Eigensystem, W: Optional[MatrixOrPair] = None, sigma_tol: float = 1e-12
) -> Eigensystem:
    """Rescale double-kets so sigma_lam = <<lam|W|lam> = 1 exactly.

    Right kets are untouched; the weighted Gram matrix after rescaling is
    stored on the result for inspection.
    """
    if isinstance(W, OperatorPair):
        Wm = W.W
    elif W is None:
        Wm = np.eye(es.ambient_n)
    else:
        Wm = np.asarray(W, dtype=complex)
    WV = Wm @ es.right
    sig = np.einsum("ij,ij->j", es.left.conj(), WV)
    floor = sigma_tol * max(1.0, float(np.median(np.abs(sig))))
    if np.any(np.abs(sig) < floor):
        j = int(np.argmin(np.abs(sig)))
        raise SelfOrthogonalMode(
            f"mode {j} (lambda={es.lambdas[j]}) has |sigma|={abs(sig[j]):.3e} "
            "below threshold (exceptional point)"
        )
    left = es.left / sig.conj()[np.newaxis, :]
    gram = left.conj().T @ WV
    return replace(es, left=left, sigmas=np.ones(es.m, dtype=complex), gram=gram)


def completeness_residual(es: Eigensystem, W: Optional[np.ndarray] = None) -> float:
    """|| sum_lam |lam> sigma^-1 <<lam| W  -  I ||_F / sqrt(n); full mode set only."""
    if es.m < es.ambient_n:
        raise IncompleteBasis(f"m={es.m} < n={es.ambient_n}: completeness is undefined")
    Wm = np.eye(es.ambient_n) if W is None else np.asarray(W, dtype=complex)
    T = (es.right / es.sigmas[np.newaxis, :]) @ (es.left.conj().T @ Wm)
    T[np.diag_indices_from(T)] -= 1.0
    return float(np.linalg.norm(T) / np.sqrt(es.ambient_n))


def spectral_rebuild_residual(es: Eigensystem, pair: MatrixOrPair, W: Optional[np.ndarray] = None) -> float:
    """|| sum_lam W|lam> (lam/sigma) <<lam|W  -  H ||_F / ||H||_F; full mode set only."""
    if es.m < es.ambient_n:
        raise IncompleteBasis(f"m={es.m} < n={es.ambient_n}: rebuild is undefined")
    H, Wm = _unpack(pair, W)
    rebuilt = (Wm @ es.right * (es.lambdas / es.sigmas)[np.newaxis, :]) @ (es.left.conj().T @ Wm)
    return float(np.linalg.norm(rebuilt - H) / np.linalg.norm(H))


def apply_kappa(es: Eigensystem, kappa: np.ndarray) -> Eigensystem:
    """|lam> -> |lam>/kappa and <<lam| -> kappa*<<lam| simultaneously.

    sigma, Gram, completeness and rebuild residuals are invariant; the stored
    kets change.  The cumulative kappa vector is tracked on the result.
    """
    kappa = np.asarray(kappa, dtype=complex)
    if kappa.shape != (es.m,):
        raise ValueError(f"kappa must have shape ({es.m},), got {kappa.shape}")
    if np.any(np.abs(kappa) < 1e-300):
        raise ZeroKappa("kappa entries must be nonzero")
    return replace(
        es,
        right=es.right / kappa[np.newaxis, :],
        left=es.left * kappa.conj()[np.newaxis, :],
        kappa=es.kappa * kappa,
    )


def quasiparity_leftkets(
    es: Eigensystem,
    P: np.ndarray,
    W: Optional[np.ndarray] = None,
    overlap_tol: float = 1e-12,
) -> Tuple[np.ndarray, np.ndarray]:
    """Candidate double-kets built from parity alone: bra_n = Q_n * (P|n>)^dag.

    Q_n = 1/<n|P|n> under the sigma = 1 convention (the weight is inserted in
    the overlap when W is supplied, so the convention holds for W != I too).
    Returns (stored left columns, Q).  Compare against solved left vectors
    with collinearity_angles.
    """
    P = np.asarray(P, dtype=float)
    target = es.right if W is None else np.asarray(W, dtype=complex) @ es.right
    overlaps = np.einsum("ij,ij->j", es.right.conj(), P @ target)
    if np.any(np.abs(overlaps) < overlap_tol):
        j = int(np.argmin(np.abs(overlaps)))
        raise VanishingParityOverlap(
            f"mode {j} (lambda={es.lambdas[j]}) has |<n|P|n>|={abs(overlaps[j]):.3e}"
        )
    Q = 1.0 / overlaps
    kets = (P @ es.right) * Q.conj()[np.newaxis, :]
    return kets, Q


def collinearity_angles(es: Eigensystem, candidate_left: np.ndarray) -> np.ndarray:
    """Angle (radians) between each candidate left column and the solved one."""
    num = np.abs(np.einsum("ij,ij->j", candidate_left.conj(), es.left))
    den = np.linalg.norm(candidate_left, axis=0) * np.linalg.norm(es.left, axis=0)
    return np.arccos(np.clip(num / den, -1.0, 1.0))


def save_spectrum_csv(es: Eigensystem, path: str) -> None:
    """CSV columns: index, re_lambda, im_lambda, residual_right, residual_left, sigma_re, sigma_im."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["index", "re_lambda", "im_lambda", "residual_right", "residual_left", "sigma_re", "sigma_im"]
        )
        for j in range(es.m):
            writer.writerow(
                [
                    j,
                    repr(float(es.lambdas[j].real)),
                    repr(float(es.lambdas[j].imag)),
                    repr(float(es.residual_right[j])),
                    repr(float(es.residual_left[j])),
                    repr(float(es.sigmas[j].real)),
                    repr(float(es.sigmas[j].imag)),
                ]
            )
