"""Physical metric Theta built from the eigensystem's double series.

With S_{ll'} = <<l|W^2|l'> and M = S^{-1}, the candidate metric is

    Theta[kappa] = sum_{l,l'} W^dag |l>> kappa*_l M_{ll'} kappa_l' <<l'| W.

The module certifies quasi-Hermiticity of H and W with respect to Theta,
measures (never assumes) Hermiticity and positivity, probes the kappa
ambiguity, degenerates to the single-series expansion when W = I, and
realizes physical-space operators through the Hermitian square root of Theta.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from .discrete import OperatorPair
from .errors import (
    IllConditionedS,
    IncompleteBasisWarning,
    NonPositiveTheta,
    SingularTheta,
)
from .spectra import Eigensystem

__all__ = [
    "MetricResult",
    "build_S",
    "build_metric",
    "quasi_hermiticity_residuals",
    "positivity_report",
    "kappa_dependence_probe",
    "physical_operators",
    "physical_inner_product",
    "single_series_theta",
    "delta_identity_residual",
]

COND_S_THRESHOLD = 1e12

MatrixOrPair = Union[OperatorPair, np.ndarray]


def _weight_of(operators: MatrixOrPair) -> Tuple[Optional[np.ndarray], np.ndarray]:
    """Returns (H or None, W) from an OperatorPair or a bare weight matrix."""
    if isinstance(operators, OperatorPair):
        return operators.H, operators.W
    return None, np.asarray(operators, dtype=complex)


@dataclass(frozen=True, eq=False)
class MetricResult:
    """Metric operator with its mode-space ingredients and residual diagnostics.

    diagnostics keys: quasiH, quasiW, hermiticity, min_eig, cond_S, cond_Theta.
    When the eigensystem is a strict subset of the modes (m < n), Theta is a
    subspace metric and min_eig / cond_Theta are restricted to the retained
    span (quasiH/quasiW stay ambient: the defect lives in the full space).
    """

    S: np.ndarray
    M: np.ndarray
    Theta: np.ndarray
    diagnostics: Dict[str, Optional[float]]
    kappa_used: np.ndarray


def build_S(es: Eigensystem, W: MatrixOrPair) -> np.ndarray:
    """Mode-space overlap matrix S_{ll'} = <<l|W^2|l'> over retained modes."""
    _, Wm = _weight_of(W)
    return es.left.conj().T @ (Wm @ (Wm @ es.right))


def _invert_full(S: np.ndarray) -> np.ndarray:
    lu, piv = scipy.linalg.lu_factor(S)
    d = np.abs(np.diag(lu))
    if d.min() == 0.0:
        raise SingularTheta("S factorization produced an exact zero pivot")
    return scipy.linalg.lu_solve((lu, piv), np.eye(S.shape[0], dtype=complex))


def build_metric(
    es: Eigensystem,
    operators: MatrixOrPair,
    kappa: Optional[np.ndarray] = None,
    cond_threshold: float = COND_S_THRESHOLD,
) -> MetricResult:
    """Assemble Theta[kappa] from the double series with M = S^{-1}.

    On the full mode set (m = n) the identity <l|Theta W|l'> = delta_{ll'}
    holds within tolerance for kappa = 1.  For m < n an IncompleteBasisWarning
    is emitted and Theta is a subspace object only.
    """
    H, Wm = _weight_of(operators)
    n = Wm.shape[0]
    m = es.m
    if kappa is None:
        kappa = np.ones(m, dtype=complex)
    kappa = np.asarray(kappa, dtype=complex)
    if kappa.shape != (m,):
        raise ValueError(f"kappa must have shape ({m},), got {kappa.shape}")
    if m < n:
        warnings.warn(
            f"retained modes m={m} < n={n}: Theta is a subspace metric",
            IncompleteBasisWarning,
            stacklevel=2,
        )
    S = build_S(es, Wm)
    cond_S = float(np.linalg.cond(S))
    if not np.isfinite(cond_S) or cond_S > cond_threshold:
        raise IllConditionedS(f"cond(S) = {cond_S:.3e} exceeds {cond_threshold:.1e}")
    M = _invert_full(S)
    A = (Wm.conj().T @ es.left) * kappa.conj()[np.newaxis, :]
    B = kappa[:, np.newaxis] * (es.left.conj().T @ Wm)
    Theta = A @ M @ B

    herm, _ = positivity_report(Theta)
    if m < n:
        Q, _ = np.linalg.qr(es.right)
        span = Q.conj().T @ Theta @ Q
        herm_part = (span + span.conj().T) / 2.0
        min_eig = float(scipy.linalg.eigvalsh(herm_part).min())
        cond_T = float(np.linalg.cond(span))
    else:
        herm_part = (Theta + Theta.conj().T) / 2.0
        min_eig = float(scipy.linalg.eigvalsh(herm_part).min())
        cond_T = float(np.linalg.cond(Theta))
    quasiH = quasiW = None
    if H is not None:
        quasiH, quasiW = quasi_hermiticity_residuals(
            Theta, OperatorPair(H=H, W=Wm, P=np.eye(n), gridspec=None), check_invertible=False
        )
    diagnostics = {
        "quasiH": quasiH,
        "quasiW": quasiW,
        "hermiticity": herm,
        "min_eig": min_eig,
        "cond_S": cond_S,
        "cond_Theta": cond_T,
    }
    return MetricResult(S=S, M=M, Theta=Theta, diagnostics=diagnostics, kappa_used=kappa)


def quasi_hermiticity_residuals(
    theta: np.ndarray, pair: MatrixOrPair, check_invertible: bool = True
) -> Tuple[float, float]:
    """(||H^dag Theta - Theta H||_F, same for W), each / (||Theta||_F * ||op||_F)."""
    H, Wm = _weight_of(pair)
    if H is None:
        raise ValueError("quasi_hermiticity_residuals needs an OperatorPair with H")
    if not np.all(np.isfinite(theta)):
        raise SingularTheta("Theta contains non-finite entries")
    if check_invertible:
        with warnings.catch_warnings():
            # singularity is detected from the pivots below, not the warning
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, _ = scipy.linalg.lu_factor(theta)
        if np.abs(np.diag(lu)).min() == 0.0:
            raise SingularTheta("Theta is numerically singular")
    tnorm = np.linalg.norm(theta)
    rH = np.linalg.norm(H.conj().T @ theta - theta @ H) / (tnorm * np.linalg.norm(H))
    rW = np.linalg.norm(Wm.conj().T @ theta - theta @ Wm) / (tnorm * np.linalg.norm(Wm))
    return float(rH), float(rW)


def positivity_report(theta: np.ndarray) -> Tuple[float, float]:
    """(||Theta - Theta^dag||_F / ||Theta||_F, min eigenvalue of the Hermitian part)."""
    herm = float(np.linalg.norm(theta - theta.conj().T) / np.linalg.norm(theta))
    min_eig = float(scipy.linalg.eigvalsh((theta + theta.conj().T) / 2.0).min())
    return herm, min_eig


def kappa_dependence_probe(
    es: Eigensystem,
    operators: MatrixOrPair,
    kappa1: np.ndarray,
    kappa2: np.ndarray,
) -> Dict[str, Optional[float]]:
    """Two metrics from two kappa vectors: distance apart, both still admissible."""
    H, _ = _weight_of(operators)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompleteBasisWarning)
        r1 = build_metric(es, operators, kappa=kappa1)
        r2 = build_metric(es, operators, kappa=kappa2)
    diff = float(np.linalg.norm(r1.Theta - r2.Theta))
    ref = float(np.linalg.norm(r1.Theta))
    report: Dict[str, Optional[float]] = {
        "theta_diff_fro": diff,
        "theta_ref_fro": ref,
        "theta_diff_rel": diff / ref,
        "quasiH_1": r1.diagnostics["quasiH"],
        "quasiW_1": r1.diagnostics["quasiW"],
        "quasiH_2": r2.diagnostics["quasiH"],
        "quasiW_2": r2.diagnostics["quasiW"],
    }
    return report


def physical_operators(
    pair: MatrixOrPair, theta: np.ndarray, herm_tol: float = 1e-6
) -> Tuple[float, float]:
    """Hermiticity residuals of h = Omega H Omega^-1 and w = Omega W Omega^-1.

    Omega = Theta^{1/2} (principal Hermitian square root) is the
    representative factor of Theta = Omega^dag Omega.
    """
    H, Wm = _weight_of(pair)
    if H is None:
        raise ValueError("physical_operators needs an OperatorPair with H")
    herm, _ = positivity_report(theta)
    if herm > herm_tol:
        raise NonPositiveTheta(f"Theta Hermiticity residual {herm:.3e} exceeds {herm_tol:.1e}")
    d, Q = scipy.linalg.eigh((theta + theta.conj().T) / 2.0)
    if d.min() <= 0.0:
        raise NonPositiveTheta(f"Hermitian part of Theta has min eigenvalue {d.min():.3e} <= 0")
    root = np.sqrt(d)
    Omega = (Q * root[np.newaxis, :]) @ Q.conj().T
    Omega_inv = (Q / root[np.newaxis, :]) @ Q.conj().T
    h = Omega @ H @ Omega_inv
    w = Omega @ Wm @ Omega_inv
    rh = float(np.linalg.norm(h - h.conj().T) / np.linalg.norm(h))
    rw = float(np.linalg.norm(w - w.conj().T) / np.linalg.norm(w))
    return rh, rw


def physical_inner_product(psi: np.ndarray, phi: np.ndarray, theta: np.ndarray) -> complex:
    """<psi, phi>_Theta = psi^dag Theta phi; real positive for psi = phi, Theta > 0."""
    return complex(np.asarray(psi).conj() @ (theta @ np.asarray(phi)))


def single_series_theta(es: Eigensystem) -> np.ndarray:
    """W -> I degeneration: Theta = sum_l |l>> sigma_l^{-1} <<l| (normalized es)."""
    return (es.left / es.sigmas[np.newaxis, :]) @ es.left.conj().T


def delta_identity_residual(es: Eigensystem, operators: MatrixOrPair, theta: np.ndarray) -> float:
    """max |<l|Theta W|l'> - delta_{ll'}| over the retained mode set (kappa = 1)."""
    _, Wm = _weight_of(operators)
    G = es.right.conj().T @ theta @ (Wm @ es.right)
    G[np.diag_indices_from(G)] -= 1.0
    return float(np.abs(G).max())
