"""Field-generic dense matrix primitives.

Real and complex matrices are plain ndarrays (float64 / complex128); the
factorization helpers normalize triangular factors to a real nonnegative
diagonal, which makes QR/LQ unique on full-rank input. Where noted, routines
accept stacked input: leading axes broadcast and the last two are the matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg

__all__ = [
    "SingularInputError",
    "NumericError",
    "SvdTriple",
    "QrPair",
    "LqPair",
    "qr_positive",
    "lq_positive",
    "svd_descending",
    "eig_by_modulus",
    "count_complex_pairs",
    "principal_minor",
    "RANK_RTOL",
]

# Smallest acceptable ratio of the smallest to largest column residual /
# singular value before input is treated as rank deficient.
RANK_RTOL = 1e-12


class SingularInputError(ValueError):
    """Input is numerically rank deficient where full rank is required."""


class NumericError(RuntimeError):
    """An underlying iterative factorization failed to converge."""


@dataclass(frozen=True)
class SvdTriple:
    """Factorization a = left @ diag(sigma) @ right with sigma descending."""

    left: np.ndarray
    sigma: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.left @ (self.sigma[..., :, None] * self.right)


@dataclass(frozen=True)
class QrPair:
    """Factorization a = q @ r, q unitary, r upper triangular, diag(r) >= 0."""

    q: np.ndarray
    r: np.ndarray


@dataclass(frozen=True)
class LqPair:
    """Factorization a = t @ o, t lower triangular with diag(t) >= 0,
    o with orthonormal rows."""

    t: np.ndarray
    o: np.ndarray


def _as_matrix(a, name: str = "a") -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim < 2:
        raise ValueError(f"{name} must be a matrix (ndim >= 2), got ndim={arr.ndim}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _require_square(a: np.ndarray, name: str = "a") -> None:
    if a.shape[-1] != a.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")


def _positive_qr(a: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR with the diagonal of r made exactly real nonnegative.

    Raises SingularInputError when any column residual |r_jj| falls below
    RANK_RTOL relative to the largest one.
    """
    q, r = np.linalg.qr(a)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(diag)
    if np.any(mag <= RANK_RTOL * np.max(mag, axis=-1, keepdims=True)):
        raise SingularInputError(
            f"{name} is numerically rank deficient (column residual below "
            f"{RANK_RTOL} of the largest)"
        )
    phase = diag / mag
    q = q * phase[..., None, :]
    r = r * np.conj(phase)[..., :, None]
    k = r.shape[-2]
    idx = np.arange(k)
    r[..., idx, idx] = mag  # exact, kills rounding residue in the phase product
    return q, r


def qr_positive(a) -> QrPair:
    """Unique QR factorization of a square full-rank matrix.

    q is unitary, r upper triangular with strictly positive real diagonal.
    Accepts stacks; a single rank-deficient member fails the whole call.
    """
    arr = _as_matrix(a)
    _require_square(arr)
    q, r = _positive_qr(arr, "qr_positive input")
    return QrPair(q, r)


def lq_positive(a) -> LqPair:
    """Row-wise orthogonalization a = t @ o of a full-row-rank i x d matrix.

    t is i x i lower triangular with strictly positive diagonal and o has
    orthonormal rows (o @ o* = identity). Accepts stacks.
    """
    arr = _as_matrix(a)
    rows, cols = arr.shape[-2], arr.shape[-1]
    if rows > cols:
        raise ValueError(f"lq_positive needs rows <= cols, got shape {arr.shape}")
    ah = np.conj(arr.swapaxes(-1, -2))
    try:
        q, r = _positive_qr(ah, "lq_positive input")
    except SingularInputError:
        raise SingularInputError(
            "lq_positive input has numerically dependent rows"
        ) from None
    return LqPair(np.conj(r.swapaxes(-1, -2)), np.conj(q.swapaxes(-1, -2)))


def svd_descending(a) -> SvdTriple:
    """Full SVD with singular values in descending order.

    Accepts stacks. Non-convergence of the underlying iteration raises
    NumericError carrying the input shape.
    """
    arr = _as_matrix(a)
    try:
        left, sigma, right = np.linalg.svd(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge on input of shape {arr.shape}") from exc
    return SvdTriple(left, sigma, right)


def eig_by_modulus(a) -> np.ndarray:
    """Eigenvalues sorted by descending modulus.

    Ties in modulus break by descending real part, then descending imaginary
    part, so the output order is deterministic.
    """
    arr = _as_matrix(a)
    _require_square(arr)
    if arr.ndim != 2:
        raise ValueError("eig_by_modulus takes a single matrix, not a stack")
    try:
        w = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue iteration did not converge (shape {arr.shape})") from exc
    w = np.asarray(w, dtype=np.complex128)
    order = np.lexsort((-w.imag, -w.real, -np.abs(w)))
    return w[order]


def count_complex_pairs(a) -> int:
    """Number of complex-conjugate eigenvalue pairs of a real square matrix.

    Counted as the 2x2 blocks of the real Schur form (nonzero entries on the
    first subdiagonal of the quasi-triangular factor), never by thresholding
    imaginary parts. Zero exactly when every eigenvalue is real.
    """
    arr = np.asarray(a)
    if np.iscomplexobj(arr):
        raise ValueError("count_complex_pairs requires a real matrix")
    arr = _as_matrix(arr)
    _require_square(arr)
    if arr.ndim != 2:
        raise ValueError("count_complex_pairs takes a single matrix, not a stack")
    if arr.shape[0] == 1:
        return 0
    try:
        t, _ = scipy.linalg.schur(arr, output="real")
    except scipy.linalg.LinAlgError as exc:
        raise NumericError(f"Schur iteration did not converge (shape {arr.shape})") from exc
    return int(np.count_nonzero(np.diagonal(t, -1)))


def principal_minor(a, index_set: Iterable[int]):
    """Determinant of the submatrix on rows and columns ``index_set``.

    Indices are 0-based, must be distinct and within range; the set must be
    nonempty. Returns a float for real input, complex otherwise.
    """
    arr = _as_matrix(a)
    _require_square(arr)
    if arr.ndim != 2:
        raise ValueError("principal_minor takes a single matrix, not a stack")
    idx = sorted(int(i) for i in index_set)
    if not idx:
        raise ValueError("index set must be nonempty")
    if len(set(idx)) != len(idx):
        raise ValueError(f"index set has duplicates: {idx}")
    d = arr.shape[0]
    if idx[0] < 0 or idx[-1] >= d:
        raise ValueError(f"index set {idx} out of range for dimension {d}")
    sub = arr[np.ix_(idx, idx)]
    det = np.linalg.det(sub)
    return complex(det) if np.iscomplexobj(arr) else float(det)
