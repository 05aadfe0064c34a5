"""Product-state recursion, exponent estimators, and closed-form spectra.

The running product P_n is never formed explicitly: a ProductState keeps its
singular values on log scale together with the left/right unitary frames, so
products of hundreds of factors stay representable. Estimators and analytic
reference spectra for the supported ensembles live alongside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .ensembles import (
    EnsembleSpec,
    Ginibre,
    TruncatedHaar,
    sample_haar_unitary,
    sample_isotropic,
    sample_singular_values,
)
from .linalg import (
    RANK_RTOL,
    NumericError,
    SingularInputError,
    eig_by_modulus,
    qr_positive,
    svd_descending,
    _as_matrix,
)
from .rng import as_generator

__all__ = [
    "SPREAD_HARD_CAP",
    "SPREAD_ACCURACY_CAP",
    "SpreadOverflowError",
    "ProductState",
    "init_state",
    "advance",
    "stability_from_state",
    "QrStreamResult",
    "lyapunov_qr_stream",
    "ExponentEstimate",
    "single_step_estimate",
    "AnalyticSpectrum",
    "analytic_spectrum",
    "supports_analytic_spectrum",
    "digamma",
    "trigamma",
    "elog_chisq",
    "analytic_truncated_logdet",
]

# Log-scale spread caps: beyond the hard cap exp() leaves double range; beyond
# the accuracy cap (condition ~1e13) the smallest exponents lose their digits.
SPREAD_HARD_CAP = 690.0
SPREAD_ACCURACY_CAP = 30.0

_BATCH = 8192
_LOG2 = math.log(2.0)


class SpreadOverflowError(OverflowError):
    """Log-singular-value spread exceeds what double precision can carry."""


@dataclass(frozen=True)
class ProductState:
    """Running product in factored form: u @ diag(exp(log_sigma)) @ v.

    accuracy_warning turns on (and stays on) once the spread has exceeded
    SPREAD_ACCURACY_CAP, marking the smallest exponents as untrusted.
    """

    n: int
    log_sigma: np.ndarray
    u_frame: np.ndarray
    v_frame: np.ndarray
    accuracy_warning: bool = False

    @property
    def d(self) -> int:
        return self.log_sigma.shape[0]

    @property
    def spread(self) -> float:
        return float(self.log_sigma[0] - self.log_sigma[-1])


def init_state(m1) -> ProductState:
    """State of the one-factor product: straight SVD of the first factor."""
    arr = _as_matrix(m1, "m1")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"m1 must be a single square matrix, got shape {arr.shape}")
    triple = svd_descending(arr)
    if triple.sigma[-1] <= RANK_RTOL * triple.sigma[0]:
        raise SingularInputError("initial factor is numerically singular")
    return ProductState(1, np.log(triple.sigma), triple.left, triple.right)


def advance(state: ProductState, m) -> ProductState:
    """State of P_n @ m from the state of P_n.

    Works entirely on the shifted scale exp(log_sigma - max): the new log
    singular values are exact up to the conditioning of the single step,
    independent of how large the accumulated spread is.
    """
    arr = _as_matrix(m, "m")
    if arr.shape != state.u_frame.shape:
        raise ValueError(f"factor shape {arr.shape} does not match state dimension {state.d}")
    spread = state.spread
    if spread > SPREAD_HARD_CAP:
        raise SpreadOverflowError(
            f"log-singular-value spread {spread:.1f} exceeds hard cap {SPREAD_HARD_CAP}"
        )
    factor_sv = np.linalg.svd(arr, compute_uv=False)
    if factor_sv[-1] <= RANK_RTOL * factor_sv[0]:
        raise SingularInputError("factor is numerically singular")
    c = float(state.log_sigma[0])
    scaled = np.exp(state.log_sigma - c)[:, None] * (state.v_frame @ arr)
    triple = svd_descending(scaled)
    if triple.sigma[-1] <= 0.0:
        raise SingularInputError("factor drove the product to numerical singularity")
    log_sigma = np.log(triple.sigma) + c
    warn = (
        state.accuracy_warning
        or spread > SPREAD_ACCURACY_CAP
        or float(log_sigma[0] - log_sigma[-1]) > SPREAD_ACCURACY_CAP
    )
    return ProductState(
        n=state.n + 1,
        log_sigma=log_sigma,
        u_frame=state.u_frame @ triple.left,
        v_frame=triple.right,
        accuracy_warning=warn,
    )


# Above this spread the ratio of extreme eigenvalue moduli of the similarity
# approaches 1/eps and double-precision QR iteration starts to lose (or zero
# out) the small ones, so the spectrum is extracted in extended precision.
_EIG_DOUBLE_SPREAD = 25.0


def _log_eig_moduli_extended(q: np.ndarray, log_scale: np.ndarray) -> np.ndarray:
    """Descending log-moduli of eig(q @ diag(exp(log_scale))), extended precision.

    Working precision grows with the total log range so that even the
    smallest eigenvalue keeps plenty of significant digits.
    """
    d = q.shape[0]
    digits = 30 + int(math.ceil(0.4343 * d * float(log_scale[0] - log_scale[-1])))
    is_complex = np.iscomplexobj(q)
    with mp.workdps(digits):
        b = mp.matrix(d, d)
        for j in range(d):
            col = mp.exp(mp.mpf(float(log_scale[j])))
            for i in range(d):
                if is_complex:
                    b[i, j] = mp.mpc(q[i, j].real, q[i, j].imag) * col
                else:
                    b[i, j] = mp.mpf(float(q[i, j])) * col
        ev = mp.eig(b, left=False, right=False)
        logs = sorted((float(mp.log(abs(e))) for e in ev), reverse=True)
    return np.array(logs)


def stability_from_state(state: ProductState) -> np.ndarray:
    """Descending log-moduli of the eigenvalues of the running product.

    Uses the similarity v @ u @ diag(exp(log_sigma - c)), which shares the
    product's spectrum after undoing the shift c, so no explicit (and
    overflowing) product is ever formed. Mild spreads go through LAPACK;
    wide ones through the extended-precision path.
    """
    if state.spread > SPREAD_HARD_CAP:
        raise SpreadOverflowError(
            f"log-singular-value spread {state.spread:.1f} exceeds hard cap {SPREAD_HARD_CAP}"
        )
    c = float(state.log_sigma[0])
    q = state.v_frame @ state.u_frame
    if state.spread > _EIG_DOUBLE_SPREAD:
        return _log_eig_moduli_extended(q, state.log_sigma - c) + c
    w = q * np.exp(state.log_sigma - c)[None, :]
    ev = eig_by_modulus(w)
    mod = np.abs(ev)
    if np.any(mod == 0.0):
        raise NumericError("eigenvalue modulus underflowed to zero")
    return np.log(mod) + c


@dataclass(frozen=True)
class QrStreamResult:
    """Per-step log-diagonal increments of the streaming QR recursion."""

    increments: np.ndarray  # (n_steps, d)
    skipped: int = 0

    @property
    def mean(self) -> np.ndarray:
        return self.increments.mean(axis=0)

    @property
    def se(self) -> np.ndarray:
        n = self.increments.shape[0]
        return self.increments.std(axis=0, ddof=1) / math.sqrt(n)

    @property
    def running_mean(self) -> np.ndarray:
        counts = np.arange(1, self.increments.shape[0] + 1)[:, None]
        return np.cumsum(self.increments, axis=0) / counts


def lyapunov_qr_stream(spec: EnsembleSpec, n_steps: int, rng) -> QrStreamResult:
    """Streaming QR estimate of the Lyapunov exponent vector.

    Maintains an orthonormal frame q; each step factors (sample @ q) with the
    positive-diagonal QR and records log diag(r). Running means of the rows
    estimate the exponents. The underlying product multiplies new factors on
    the left, so per-step values are not comparable realization-by-realization
    with the advance() recursion - only in distribution.

    Singular samples (probability zero) are skipped and counted.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    gen = as_generator(rng)
    d = spec.d
    q = np.eye(d, dtype=spec.dtype)
    rows = np.empty((n_steps, d), dtype=np.float64)
    skipped = 0
    k = 0
    while k < n_steps:
        m = sample_isotropic(spec, gen)
        try:
            pair = qr_positive(m @ q)
        except SingularInputError:
            skipped += 1
            if skipped > 1000:
                raise NumericError(
                    "more than 1000 singular samples in a row; ensemble is degenerate"
                ) from None
            continue
        rows[k] = np.log(np.diagonal(pair.r).real)
        q = pair.q
        k += 1
    return QrStreamResult(rows, skipped)


@dataclass(frozen=True)
class ExponentEstimate:
    """Monte Carlo mean/covariance of an exponent vector."""

    mean: np.ndarray
    cov: np.ndarray
    count: int

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov) / self.count)

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "ExponentEstimate":
        samples = np.asarray(samples, dtype=np.float64)
        count = samples.shape[0]
        if count < 2:
            raise ValueError("need at least 2 samples for a covariance")
        mean = samples.mean(axis=0)
        cov = np.atleast_2d(np.cov(samples, rowvar=False, ddof=1))
        return cls(mean=mean, cov=cov, count=count)


def single_step_estimate(spec: EnsembleSpec, n_samples: int, rng) -> ExponentEstimate:
    """Exponent estimate from single factors.

    Each sample draws singular values D and a Haar matrix v, factors
    diag(D) @ v with the positive-diagonal QR, and takes log diag(r); the
    left singular frame of the factor never enters, so the estimate only
    depends on the singular-value law. Means converge to the Lyapunov
    exponents and the sample covariance estimates the fluctuation covariance.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    gen = as_generator(rng)
    d = spec.d
    logs = np.empty((n_samples, d), dtype=np.float64)
    done = 0
    while done < n_samples:
        b = min(_BATCH, n_samples - done)
        dvals = sample_singular_values(spec, gen, size=b)
        v = sample_haar_unitary(d, spec.field, gen, size=b)
        pair = qr_positive(dvals[:, :, None] * v)
        logs[done:done + b] = np.log(np.diagonal(pair.r, axis1=-2, axis2=-1).real)
        done += b
    return ExponentEstimate.from_samples(logs)


@dataclass(frozen=True)
class AnalyticSpectrum:
    """Closed-form Lyapunov exponents and per-component fluctuation variances."""

    lyapunov: np.ndarray
    variance: np.ndarray
    independent_components: bool
    source: str


def supports_analytic_spectrum(spec: EnsembleSpec) -> bool:
    return isinstance(spec.kind, (Ginibre, TruncatedHaar))


def analytic_spectrum(spec: EnsembleSpec) -> AnalyticSpectrum:
    """Closed-form spectrum for Ginibre and truncated-Haar ensembles.

    Ginibre: the i-th squared QR diagonal is chi-square with d-i+1 (real) or
    2(d-i+1) (complex) degrees of freedom. Truncated Haar (corner of an
    m x m Haar matrix): the squared diagonal is Beta(d-i+1, m-d) in the
    complex case and Beta((d-i+1)/2, (m-d)/2) in the real case. Components
    are independent in all four cases, so the fluctuation covariance is
    diagonal.
    """
    d = spec.d
    k = np.arange(d, 0, -1, dtype=np.float64)  # d-i+1 for i = 1..d
    if isinstance(spec.kind, Ginibre):
        a = k / 2 if spec.field == "real" else k
        lam = 0.5 * (_LOG2 + _digamma_vec(a))
        var = 0.25 * _trigamma_vec(a)
    elif isinstance(spec.kind, TruncatedHaar):
        m = spec.kind.m
        km = np.arange(m, m - d, -1, dtype=np.float64)  # m-i+1 for i = 1..d
        if spec.field == "real":
            k, km = k / 2, km / 2
        lam = 0.5 * (_digamma_vec(k) - _digamma_vec(km))
        var = 0.25 * (_trigamma_vec(k) - _trigamma_vec(km))
    else:
        raise ValueError(
            f"no closed-form spectrum for ensemble {spec.ensemble_text!r}; "
            "supported: ginibre, truncated-haar"
        )
    return AnalyticSpectrum(
        lyapunov=lam,
        variance=var,
        independent_components=True,
        source=spec.tag(),
    )


# --- special functions -------------------------------------------------------
#
# Recurrence up to x >= 12, then the asymptotic (Bernoulli) series. Absolute
# error is far below the 1e-12 contract for x >= 1/4.

_PSI_SERIES = (
    1.0 / 12.0,
    1.0 / 120.0,
    1.0 / 252.0,
    1.0 / 240.0,
    1.0 / 132.0,
    691.0 / 32760.0,
    1.0 / 12.0,
)

_PSI1_SERIES = (
    1.0 / 6.0,
    1.0 / 30.0,
    1.0 / 42.0,
    1.0 / 30.0,
    5.0 / 66.0,
    691.0 / 2730.0,
    7.0 / 6.0,
)


def digamma(x: float) -> float:
    """Logarithmic derivative of the gamma function, for x > 0."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < 12.0:
        acc -= 1.0 / x
        x += 1.0
    r2 = 1.0 / (x * x)
    series = 0.0
    for coef in reversed(_PSI_SERIES):
        series = r2 * (coef - series)
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """Derivative of digamma, for x > 0."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"trigamma requires x > 0, got {x}")
    acc = 0.0
    while x < 12.0:
        acc += 1.0 / (x * x)
        x += 1.0
    r = 1.0 / x
    r2 = r * r
    series = 0.0
    for coef in reversed(_PSI1_SERIES):
        series = r2 * (coef - series)
    return acc + r + 0.5 * r2 + r * series


def _digamma_vec(a: np.ndarray) -> np.ndarray:
    return np.array([digamma(x) for x in np.atleast_1d(a)])


def _trigamma_vec(a: np.ndarray) -> np.ndarray:
    return np.array([trigamma(x) for x in np.atleast_1d(a)])


def elog_chisq(k: int) -> float:
    """Expected log of a chi-square variable with k degrees of freedom."""
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError(f"elog_chisq requires an integer k >= 1, got {k!r}")
    return _LOG2 + digamma(k / 2.0)


def analytic_truncated_logdet(i: int, d: int, field: str) -> float:
    """Expected log absolute determinant of the i x i corner of a d x d
    Haar unitary (orthogonal) matrix.

    Telescopes out of the triangular-times-corner factorization of a
    Gaussian matrix: the corner's log-determinant is the difference of two
    chi-square log sums (degrees of freedom doubled in the complex case).
    """
    if not (isinstance(i, (int, np.integer)) and isinstance(d, (int, np.integer))):
        raise ValueError("i and d must be integers")
    if not 1 <= i <= d:
        raise ValueError(f"need 1 <= i <= d, got i={i}, d={d}")
    if field not in ("real", "complex"):
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    mult = 2 if field == "complex" else 1
    return 0.5 * sum(
        elog_chisq(mult * (i - j + 1)) - elog_chisq(mult * (d - j + 1))
        for j in range(1, i + 1)
    )
