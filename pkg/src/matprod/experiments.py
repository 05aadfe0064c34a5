"""Replication-parallel experiment runners.

Each runner turns one limit statement into a desk-scale Monte Carlo check
with standard errors or Wilson intervals. Replications are processed in
fixed-size chunks, each chunk on its own derived random stream, and chunk
results are folded in index order - so aggregated statistics are identical
for any thread count adopted.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .ensembles import EnsembleSpec, sample_haar_unitary, sample_isotropic, sample_singular_values
from .exponents import (
    SPREAD_ACCURACY_CAP,
    ExponentEstimate,
    SpreadOverflowError,
    advance,
    analytic_spectrum,
    analytic_truncated_logdet,
    init_state,
    single_step_estimate,
    stability_from_state,
    supports_analytic_spectrum,
)
from .linalg import NumericError, SingularInputError, count_complex_pairs, eig_by_modulus, lq_positive, principal_minor, svd_descending
from .rng import RngStream

__all__ = [
    "ExperimentConfig",
    "GapStats",
    "EqualityAtN",
    "EqualityResult",
    "FluctResult",
    "RealProbAtN",
    "RealProbResult",
    "CheckRow",
    "FactorizationReport",
    "MinorIdentityReport",
    "run_equality",
    "run_fluctuations",
    "run_real_probability",
    "run_factorization_checks",
    "run_minor_identity",
    "wilson_interval",
]

# Replications per work unit; fixed so that stream derivation, and therefore
# every sampled bit, is independent of the thread count.
_CHUNK = 256

# Stream derivation indices: (experiment, role, index) with role 0 for the
# reference estimator and role 1 for replication chunks.
_EXP_EQUALITY = 1
_EXP_FLUCT = 2
_EXP_REALPROB = 3
_EXP_FACTOR = 4
_EXP_MINOR = 5

_Z95 = 1.959963984540054

_SKIP_ERRORS = (SingularInputError, SpreadOverflowError, NumericError)


@dataclass(frozen=True)
class ExperimentConfig:
    """Reproducible description of one experiment run."""

    seed: int
    spec: EnsembleSpec
    n_grid: tuple[int, ...]
    replications: int
    mc_samples: int = 100_000
    threads: int = 1
    estimators: frozenset[str] = frozenset()
    out: Optional[str] = None
    format: str = "jsonl"

    def __post_init__(self) -> None:
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(n < 1 for n in grid):
            raise ValueError(f"n_grid must be positive integers, got {self.n_grid!r}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"n_grid must be strictly increasing, got {grid}")
        object.__setattr__(self, "n_grid", grid)
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if self.mc_samples < 2:
            raise ValueError(f"mc_samples must be >= 2, got {self.mc_samples}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.format not in ("jsonl", "csv"):
            raise ValueError(f"format must be jsonl or csv, got {self.format!r}")
        unknown = set(self.estimators) - {"single-step-reference"}
        if unknown:
            raise ValueError(f"unknown estimator toggles: {sorted(unknown)}")
        object.__setattr__(self, "estimators", frozenset(self.estimators))

    def stream(self) -> RngStream:
        return RngStream(self.seed)


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Score confidence interval for a binomial proportion.

    Stays inside [0, 1] and behaves sensibly for proportions near the
    endpoints, which is exactly the regime the reality experiment lives in.
    """
    if trials < 1:
        raise ValueError("wilson_interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    # rounding may land a bound a few ulps past p or outside [0, 1]
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def _chunk_jobs(total: int) -> list[tuple[int, int]]:
    """(chunk_index, count) pairs covering range(total)."""
    return [(ci, min(_CHUNK, total - ci * _CHUNK)) for ci in range((total + _CHUNK - 1) // _CHUNK)]


def _map_chunks(jobs, worker: Callable, threads: int) -> list:
    if threads <= 1:
        return [worker(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda job: worker(*job), jobs))


def _reference_estimate(config: ExperimentConfig, exp_index: int) -> tuple[np.ndarray, np.ndarray, str]:
    """Reference exponent vector, its SE per component, and its source tag."""
    if "single-step-reference" not in config.estimators and supports_analytic_spectrum(config.spec):
        spectrum = analytic_spectrum(config.spec)
        return spectrum.lyapunov, np.zeros(config.spec.d), "analytic"
    est = single_step_estimate(
        config.spec, config.mc_samples, config.stream().derive(exp_index, 0, 0)
    )
    return est.mean, est.se, "single-step"


def _evolve_through_grid(spec: EnsembleSpec, n_grid: Sequence[int], gen) -> list:
    """One replication: advance a fresh product through the grid.

    Returns the list of states at the grid points. All factor samples for the
    trajectory are drawn up front in one batch so the draw order is a fixed
    function of the stream.
    """
    n_max = n_grid[-1]
    factors = sample_isotropic(spec, gen, size=n_max) if n_max > 1 else sample_isotropic(spec, gen)[None, ...]
    state = init_state(factors[0])
    out = []
    targets = iter(n_grid)
    target = next(targets)
    while True:
        if state.n == target:
            out.append(state)
            nxt = next(targets, None)
            if nxt is None:
                return out
            target = nxt
        state = advance(state, factors[state.n])


@dataclass(frozen=True)
class GapStats:
    """Componentwise gap statistics over replications."""

    mean: np.ndarray
    max: np.ndarray
    se: np.ndarray


@dataclass(frozen=True)
class EqualityAtN:
    n: int
    count: int
    gap_singular_ref: GapStats
    gap_stability_ref: GapStats
    gap_singular_stability: GapStats
    maxgap_mean: float  # mean over replications of max_i |singular_i - stability_i|
    maxgap_se: float
    maxgap_max: float
    mean_singular: np.ndarray
    se_singular: np.ndarray
    mean_stability: np.ndarray
    se_stability: np.ndarray


@dataclass(frozen=True)
class EqualityResult:
    spec: EnsembleSpec
    n_grid: tuple[int, ...]
    reference: np.ndarray
    reference_se: np.ndarray
    reference_source: str
    per_n: tuple[EqualityAtN, ...]
    skipped: int


def _gap_stats(values: np.ndarray) -> GapStats:
    count = values.shape[0]
    return GapStats(
        mean=values.mean(axis=0),
        max=values.max(axis=0),
        se=values.std(axis=0, ddof=1) / math.sqrt(count),
    )


def run_equality(config: ExperimentConfig) -> EqualityResult:
    """Convergence of scaled log singular values and log eigenvalue moduli.

    Per replication the product advances through n_grid on one trajectory
    (grid points are checkpoints of the same path, hence dependent across n);
    at each grid point both exponent vectors are recorded and compared to the
    reference. Replications that overflow or hit a singular step are dropped
    and counted.
    """
    spec = config.spec
    ref, ref_se, ref_source = _reference_estimate(config, _EXP_EQUALITY)
    grid = config.n_grid
    base = config.stream()

    def worker(ci: int, count: int):
        gen = base.derive(_EXP_EQUALITY, 1, ci).generator()
        sig = np.full((count, len(grid), spec.d), np.nan)
        stab = np.full((count, len(grid), spec.d), np.nan)
        ok = np.zeros(count, dtype=bool)
        for t in range(count):
            try:
                states = _evolve_through_grid(spec, grid, gen)
                for gi, st in enumerate(states):
                    sig[t, gi] = st.log_sigma / st.n
                    stab[t, gi] = stability_from_state(st) / st.n
                ok[t] = True
            except _SKIP_ERRORS:
                continue
        return sig, stab, ok

    parts = _map_chunks(_chunk_jobs(config.replications), worker, config.threads)
    sig = np.concatenate([p[0] for p in parts])
    stab = np.concatenate([p[1] for p in parts])
    ok = np.concatenate([p[2] for p in parts])
    sig, stab = sig[ok], stab[ok]
    used = int(ok.sum())
    if used < 2:
        raise NumericError("fewer than 2 replications survived; cannot report statistics")

    per_n = []
    for gi, n in enumerate(grid):
        s, e = sig[:, gi, :], stab[:, gi, :]
        maxgap = np.abs(s - e).max(axis=1)
        per_n.append(
            EqualityAtN(
                n=n,
                count=used,
                gap_singular_ref=_gap_stats(np.abs(s - ref)),
                gap_stability_ref=_gap_stats(np.abs(e - ref)),
                gap_singular_stability=_gap_stats(np.abs(s - e)),
                maxgap_mean=float(maxgap.mean()),
                maxgap_se=float(maxgap.std(ddof=1) / math.sqrt(used)),
                maxgap_max=float(maxgap.max()),
                mean_singular=s.mean(axis=0),
                se_singular=s.std(axis=0, ddof=1) / math.sqrt(used),
                mean_stability=e.mean(axis=0),
                se_stability=e.std(axis=0, ddof=1) / math.sqrt(used),
            )
        )
    return EqualityResult(
        spec=spec,
        n_grid=grid,
        reference=ref,
        reference_se=ref_se,
        reference_source=ref_source,
        per_n=tuple(per_n),
        skipped=config.replications - used,
    )


@dataclass(frozen=True)
class FluctResult:
    spec: EnsembleSpec
    n: int
    count: int
    cov_singular: np.ndarray          # covariance of sqrt(n) * (log sigma / n)
    cov_stability: np.ndarray         # covariance of sqrt(n) * (log |eig| / n)
    cov_singular_se: np.ndarray       # large-sample SEs of the entries
    cov_stability_se: np.ndarray
    cov_diff_se: np.ndarray           # paired SEs of cov_singular - cov_stability
    reference_cov: np.ndarray
    reference_source: str
    skipped: int


def _cov_entry_se(cov: np.ndarray, count: int) -> np.ndarray:
    diag = np.diag(cov)
    return np.sqrt((np.outer(diag, diag) + cov**2) / (count - 1))


def run_fluctuations(config: ExperimentConfig) -> FluctResult:
    """Covariance of sqrt(n)-scaled fluctuations at n = last grid point.

    Both the singular-value and the eigenvalue-modulus fluctuation
    covariances are estimated from the same replications; the paired SE of
    the entrywise difference is reported alongside the marginal SEs.
    """
    if config.replications < 100:
        raise ValueError("fluctuation runs need replications >= 100")
    spec = config.spec
    n = config.n_grid[-1]
    base = config.stream()

    def worker(ci: int, count: int):
        gen = base.derive(_EXP_FLUCT, 1, ci).generator()
        sig = np.full((count, spec.d), np.nan)
        stab = np.full((count, spec.d), np.nan)
        ok = np.zeros(count, dtype=bool)
        for t in range(count):
            try:
                (state,) = _evolve_through_grid(spec, (n,), gen)
                sig[t] = state.log_sigma / n
                stab[t] = stability_from_state(state) / n
                ok[t] = True
            except _SKIP_ERRORS:
                continue
        return sig, stab, ok

    parts = _map_chunks(_chunk_jobs(config.replications), worker, config.threads)
    sig = np.concatenate([p[0] for p in parts])
    stab = np.concatenate([p[1] for p in parts])
    ok = np.concatenate([p[2] for p in parts])
    sig, stab = sig[ok], stab[ok]
    used = int(ok.sum())
    if used < 2:
        raise NumericError("fewer than 2 replications survived; cannot report statistics")

    x = math.sqrt(n) * sig
    y = math.sqrt(n) * stab
    cov_x = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    cov_y = np.atleast_2d(np.cov(y, rowvar=False, ddof=1))
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    prod_diff = xc[:, :, None] * xc[:, None, :] - yc[:, :, None] * yc[:, None, :]
    diff_se = prod_diff.std(axis=0, ddof=1) / math.sqrt(used)

    if "single-step-reference" not in config.estimators and supports_analytic_spectrum(spec):
        ref_cov = np.diag(analytic_spectrum(spec).variance)
        ref_source = "analytic"
    else:
        est = single_step_estimate(spec, config.mc_samples, base.derive(_EXP_FLUCT, 0, 0))
        ref_cov = est.cov
        ref_source = "single-step"

    return FluctResult(
        spec=spec,
        n=n,
        count=used,
        cov_singular=cov_x,
        cov_stability=cov_y,
        cov_singular_se=_cov_entry_se(cov_x, used),
        cov_stability_se=_cov_entry_se(cov_y, used),
        cov_diff_se=diff_se,
        reference_cov=ref_cov,
        reference_source=ref_source,
        skipped=config.replications - used,
    )


@dataclass(frozen=True)
class RealProbAtN:
    n: int
    trials: int          # classified trials
    all_real: int
    p_hat: float
    wilson_low: float
    wilson_high: float
    excluded: int        # spread over accuracy cap, overflow, or singular step

    def __post_init__(self) -> None:
        if not self.wilson_low <= self.p_hat <= self.wilson_high:
            raise ValueError("Wilson interval must contain the point estimate")


@dataclass(frozen=True)
class RealProbResult:
    spec: EnsembleSpec
    n_grid: tuple[int, ...]
    replications: int
    per_n: tuple[RealProbAtN, ...]


def run_real_probability(config: ExperimentConfig) -> RealProbResult:
    """Probability that every eigenvalue of the running product is real.

    Classification counts the 2x2 blocks of the real Schur form of the
    shift-scaled similarity carrying the product's spectrum. Replications
    whose spread exceeds the accuracy cap at a grid point are excluded and
    counted there rather than classified.
    """
    spec = config.spec
    if spec.field != "real":
        raise ValueError("realprob requires field=real")
    grid = config.n_grid
    base = config.stream()

    def worker(ci: int, count: int):
        gen = base.derive(_EXP_REALPROB, 1, ci).generator()
        real = np.zeros(len(grid), dtype=np.int64)
        classified = np.zeros(len(grid), dtype=np.int64)
        for _ in range(count):
            try:
                states = _evolve_through_grid(spec, grid, gen)
            except _SKIP_ERRORS:
                continue
            for gi, st in enumerate(states):
                if st.spread > SPREAD_ACCURACY_CAP:
                    continue
                c = float(st.log_sigma[0])
                w = (st.v_frame @ st.u_frame) * np.exp(st.log_sigma - c)[None, :]
                try:
                    pairs = count_complex_pairs(w)
                except NumericError:
                    continue
                classified[gi] += 1
                if pairs == 0:
                    real[gi] += 1
        return real, classified

    parts = _map_chunks(_chunk_jobs(config.replications), worker, config.threads)
    real = np.sum([p[0] for p in parts], axis=0)
    classified = np.sum([p[1] for p in parts], axis=0)

    per_n = []
    for gi, n in enumerate(grid):
        trials = int(classified[gi])
        hits = int(real[gi])
        if trials == 0:
            raise NumericError(f"no classifiable replications at n={n}")
        lo, hi = wilson_interval(hits, trials)
        per_n.append(
            RealProbAtN(
                n=n,
                trials=trials,
                all_real=hits,
                p_hat=hits / trials,
                wilson_low=lo,
                wilson_high=hi,
                excluded=config.replications - trials,
            )
        )
    return RealProbResult(
        spec=spec, n_grid=grid, replications=config.replications, per_n=tuple(per_n)
    )


@dataclass(frozen=True)
class CheckRow:
    """One line of a verification table: estimate vs reference."""

    check: str
    field: str
    d: int
    index: int           # corner size i, diagonal slot j, or minor order
    estimate: float
    reference: float
    se: float
    samples: int

    @property
    def z(self) -> float:
        return (self.estimate - self.reference) / self.se if self.se > 0 else 0.0

    @property
    def passed(self) -> bool:
        # 1e-12 floor absorbs pure rounding noise in exactly-zero checks
        return abs(self.estimate - self.reference) <= 3.0 * self.se + 1e-12


@dataclass(frozen=True)
class FactorizationReport:
    rows: tuple[CheckRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


class _Moments:
    """Streaming first four power sums per column."""

    def __init__(self, width: int) -> None:
        self.n = 0
        self.s1 = np.zeros(width)
        self.s2 = np.zeros(width)
        self.s3 = np.zeros(width)
        self.s4 = np.zeros(width)

    def add(self, block: np.ndarray) -> None:
        self.n += block.shape[0]
        self.s1 += block.sum(axis=0)
        self.s2 += (block**2).sum(axis=0)
        self.s3 += (block**3).sum(axis=0)
        self.s4 += (block**4).sum(axis=0)

    def mean(self) -> np.ndarray:
        return self.s1 / self.n

    def mean_se(self) -> np.ndarray:
        var = np.maximum(self.s2 / self.n - self.mean() ** 2, 0.0)
        return np.sqrt(var / self.n)

    def var(self) -> np.ndarray:
        return (self.s2 - self.s1**2 / self.n) / (self.n - 1)

    def var_se(self) -> np.ndarray:
        # large-sample SE of the sample variance via the fourth central moment
        m = self.mean()
        m2 = self.s2 / self.n - m**2
        m4 = (self.s4 - 4 * m * self.s3 + 6 * m**2 * self.s2) / self.n - 3 * m**4
        return np.sqrt(np.maximum(m4 - m2**2, 0.0) / self.n)


def run_factorization_checks(config: ExperimentConfig) -> FactorizationReport:
    """Triangular-factorization checks tying Gaussian and Haar samples together.

    (a) Monte Carlo mean of log |det(corner of a Haar matrix)| against the
        chi-square telescoping value, for every corner size i <= d <= spec.d.
    (b) Row-orthogonalization of Gaussian matrices: squared diagonal entries
        against their chi-square mean/variance, off-diagonals against the
        standard normal, for square and one-row-short shapes.
    (c) Scaling: corner entries of an (m = 4d) Haar matrix times sqrt(m) have
        unit second moment.
    """
    spec = config.spec
    field = spec.field
    mc = config.mc_samples
    base = config.stream()
    rows: list[CheckRow] = []

    for d in range(1, spec.d + 1):
        gen = base.derive(_EXP_FACTOR, 1, d).generator()
        corner = [_Moments(1) for _ in range(d)]
        done = 0
        while done < mc:
            b = min(_BATCH_CHECKS, mc - done)
            u = sample_haar_unitary(d, field, gen, size=b)
            for i in range(1, d + 1):
                dets = np.linalg.det(u[:, :i, :i])
                corner[i - 1].add(np.log(np.abs(dets))[:, None])
            done += b
        for i in range(1, d + 1):
            mom = corner[i - 1]
            rows.append(
                CheckRow(
                    check="corner-logdet",
                    field=field,
                    d=d,
                    index=i,
                    estimate=float(mom.mean()[0]),
                    reference=analytic_truncated_logdet(i, d, field),
                    se=float(mom.mean_se()[0]),
                    samples=mom.n,
                )
            )

    dof_scale = 2 if field == "complex" else 1
    for d in range(1, spec.d + 1):
        shapes = [d] if d == 1 else [d, d - 1]
        for nrows in shapes:
            gen = base.derive(_EXP_FACTOR, 2, d, nrows).generator()
            diag_mom = _Moments(nrows)
            off_mom = _Moments(1) if nrows > 1 else None
            done = 0
            while done < mc:
                b = min(_BATCH_CHECKS, mc - done)
                g = _ginibre_block(nrows, d, field, gen, b)
                t = lq_positive(g).t
                tdiag = np.diagonal(t, axis1=-2, axis2=-1).real
                diag_mom.add(tdiag**2)
                if off_mom is not None:
                    li, lj = np.tril_indices(nrows, k=-1)
                    tril = t[:, li, lj]
                    parts = [tril.real, tril.imag] if field == "complex" else [tril]
                    off_mom.add(np.concatenate(parts, axis=1).reshape(-1, 1))
                done += b
            for j in range(1, nrows + 1):
                k = dof_scale * (d - j + 1)
                rows.append(
                    CheckRow(
                        check=f"lq-diag-mean:rows={nrows}",
                        field=field,
                        d=d,
                        index=j,
                        estimate=float(diag_mom.mean()[j - 1]),
                        reference=float(k),
                        se=float(diag_mom.mean_se()[j - 1]),
                        samples=diag_mom.n,
                    )
                )
                rows.append(
                    CheckRow(
                        check=f"lq-diag-var:rows={nrows}",
                        field=field,
                        d=d,
                        index=j,
                        estimate=float(diag_mom.var()[j - 1]),
                        reference=float(2 * k),
                        se=float(diag_mom.var_se()[j - 1]),
                        samples=diag_mom.n,
                    )
                )
            if off_mom is not None:
                rows.append(
                    CheckRow(
                        check=f"lq-offdiag-mean:rows={nrows}",
                        field=field,
                        d=d,
                        index=nrows,
                        estimate=float(off_mom.mean()[0]),
                        reference=0.0,
                        se=float(off_mom.mean_se()[0]),
                        samples=off_mom.n,
                    )
                )
                rows.append(
                    CheckRow(
                        check=f"lq-offdiag-var:rows={nrows}",
                        field=field,
                        d=d,
                        index=nrows,
                        estimate=float(off_mom.var()[0]),
                        reference=1.0,
                        se=float(off_mom.var_se()[0]),
                        samples=off_mom.n,
                    )
                )

    for d in range(1, spec.d + 1):
        m = 4 * d
        gen = base.derive(_EXP_FACTOR, 3, d).generator()
        mom = _Moments(1)
        done = 0
        samples = min(mc, 20_000)
        while done < samples:
            b = min(_BATCH_CHECKS, samples - done)
            u = sample_haar_unitary(m, field, gen, size=b)
            block = m * np.abs(u[:, :d, :d]) ** 2
            mom.add(block.reshape(b, -1).mean(axis=1)[:, None])
            done += b
        rows.append(
            CheckRow(
                check="corner-scaling",
                field=field,
                d=d,
                index=m,
                estimate=float(mom.mean()[0]),
                reference=1.0,
                se=float(mom.mean_se()[0]),
                samples=mom.n,
            )
        )

    return FactorizationReport(rows=tuple(rows))


_BATCH_CHECKS = 8192


def _ginibre_block(rows: int, cols: int, field: str, gen, size: int) -> np.ndarray:
    if field == "real":
        return gen.standard_normal((size, rows, cols))
    return gen.standard_normal((size, rows, cols)) + 1j * gen.standard_normal((size, rows, cols))


@dataclass(frozen=True)
class MinorIdentityReport:
    """Worst relative residuals of the exact minor identities."""

    spec: EnsembleSpec
    trials: int
    tol: float
    max_coefficient_residual: float   # minor sums vs char-poly coefficients
    max_factorization_residual: float  # [w s]_J vs [w]_J [s]_J
    max_partial_product_excess: float             # eigenvalue over singular partial products

    @property
    def passed(self) -> bool:
        return (
            self.max_coefficient_residual <= self.tol
            and self.max_factorization_residual <= self.tol
            and self.max_partial_product_excess <= self.tol
        )


def run_minor_identity(config: ExperimentConfig, tol: float = 1e-8) -> MinorIdentityReport:
    """Exact identities on random unitary-times-diagonal matrices.

    For each trial, checks (i) that order-i principal-minor sums equal the
    corresponding elementary symmetric functions of the eigenvalues, (ii)
    the minor factorization across the diagonal factor, and (iii) that
    eigenvalue-modulus partial products never exceed singular-value partial
    products beyond rounding.
    """
    spec = config.spec
    if spec.d > 6:
        raise ValueError("minor identity checks are limited to d <= 6")
    base = config.stream()
    worst_coeff = 0.0
    worst_factor = 0.0
    worst_bound = 0.0

    def worker(ci: int, count: int):
        gen = base.derive(_EXP_MINOR, 1, ci).generator()
        wc = wf = wh = 0.0
        d = spec.d
        for _ in range(count):
            s = sample_singular_values(spec, gen)
            w = sample_haar_unitary(d, spec.field, gen)
            a = w * s[None, :]
            eig = eig_by_modulus(a)
            coeffs = np.poly(eig)
            sigma = svd_descending(a).sigma
            for i in range(1, d + 1):
                total = 0.0 + 0.0j
                for subset in itertools.combinations(range(d), i):
                    minor_a = principal_minor(a, subset)
                    total += minor_a
                    ref = principal_minor(w, subset) * np.prod(s[list(subset)])
                    scale = max(abs(minor_a), abs(ref))
                    if scale > 0:
                        wf = max(wf, abs(minor_a - ref) / scale)
                elem = (-1) ** i * coeffs[i]
                scale = max(abs(total), abs(elem))
                if scale > 0:
                    wc = max(wc, abs(total - elem) / scale)
            excess = np.cumsum(np.log(np.abs(eig))) - np.cumsum(np.log(sigma))
            wh = max(wh, float(np.exp(excess.max()) - 1.0))
        return wc, wf, wh

    parts = _map_chunks(_chunk_jobs(config.replications), worker, config.threads)
    for wc, wf, wh in parts:
        worst_coeff = max(worst_coeff, wc)
        worst_factor = max(worst_factor, wf)
        worst_bound = max(worst_bound, wh)
    return MinorIdentityReport(
        spec=spec,
        trials=config.replications,
        tol=tol,
        max_coefficient_residual=worst_coeff,
        max_factorization_residual=worst_factor,
        max_partial_product_excess=worst_bound,
    )
