"""Replicate-level simulation studies.

Draws R independent datasets of size n (one deterministic RNG substream
per replicate, so results are identical no matter how replicates are
partitioned across workers), fits every requested spec on each dataset,
and reports empirical means, n-scaled covariances and batch-means
standard errors.  Non-converged fits are excluded from the moments but
counted, with a hard 1% failure budget.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .composite import CompositeSpec
from .errors import (ClikError, DomainError, FailureBudgetExceeded,
                     NoRootInDomain)
from .estimators import fit
from .fileio import atomic_csv, fmt
from .models import Model, ParamVector, substream

CSV_ESTIMATES_HEADER = ["spec", "replicate", "param", "estimate", "converged"]
CSV_SUMMARY_HEADER = ["spec", "param", "mean", "n_var", "std_err", "failures"]

MIN_N = 10
MIN_REPLICATES = 100
FAILURE_BUDGET = 0.01
DEFAULT_BATCHES = 20


@dataclass(frozen=True)
class SpecRun:
    """One spec to fit per replicate, with optional fixed parameters."""

    spec: CompositeSpec
    fixed: tuple = ()            # ((name, value), ...) or a dict at init
    label: str = ""

    def __post_init__(self):
        fixed = self.fixed
        if isinstance(fixed, dict):
            fixed = tuple(sorted(fixed.items()))
        object.__setattr__(self, "fixed", tuple(fixed))
        if not self.label:
            suffix = "".join(f"!{name}" for name, _ in self.fixed)
            object.__setattr__(self, "label", self.spec.name + suffix)

    @property
    def fixed_dict(self) -> dict:
        return dict(self.fixed)


@dataclass(frozen=True)
class SimConfig:
    model: Model
    theta_true: ParamVector
    runs: tuple
    n: int
    replicates: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(self.runs))
        if self.n < MIN_N:
            raise ValueError(f"n must be >= {MIN_N}")
        if self.replicates < MIN_REPLICATES:
            raise ValueError(f"replicates must be >= {MIN_REPLICATES}")
        labels = [r.label for r in self.runs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate run labels: {labels}")
        self.model.validate(self.theta_true)

    def free_names(self, run: SpecRun) -> tuple:
        fixed = run.fixed_dict
        return tuple(n for n in self.theta_true.free_names if n not in fixed)


@dataclass
class SimResult:
    """Estimates keyed by run label; failed replicates hold NaN rows."""

    config: SimConfig
    estimates: dict = field(default_factory=dict)     # label -> (R, d)
    converged: dict = field(default_factory=dict)     # label -> (R,) bool

    def labels(self):
        return [run.label for run in self.config.runs]

    def param_names(self, label: str) -> tuple:
        run = next(r for r in self.config.runs if r.label == label)
        return self.config.free_names(run)

    def failures(self, label: str) -> int:
        return int((~self.converged[label]).sum())

    def valid_rows(self, label: str) -> np.ndarray:
        return self.estimates[label][self.converged[label]]

    def mean(self, label: str) -> np.ndarray:
        return self.valid_rows(label).mean(axis=0)

    def ncov(self, label: str) -> np.ndarray:
        """n-scaled empirical covariance of the estimates."""
        rows = self.valid_rows(label)
        dev = rows - rows.mean(axis=0)
        return self.config.n * (dev.T @ dev) / (rows.shape[0] - 1)

    def ncov_batches(self, label: str, batches: int = DEFAULT_BATCHES) -> np.ndarray:
        rows = self.valid_rows(label)
        edges = np.linspace(0, rows.shape[0], batches + 1).astype(int)
        out = []
        for a, b in zip(edges[:-1], edges[1:]):
            part = rows[a:b]
            dev = part - part.mean(axis=0)
            out.append(self.config.n * (dev.T @ dev) / (part.shape[0] - 1))
        return np.stack(out)

    def ncov_se(self, label: str, batches: int = DEFAULT_BATCHES) -> np.ndarray:
        bats = self.ncov_batches(label, batches)
        return bats.std(axis=0, ddof=1) / np.sqrt(batches)

    def cross_ncov(self, label_a: str, col_a: int, label_b: str, col_b: int,
                   batches: int = DEFAULT_BATCHES):
        """n-scaled covariance between estimate columns of two runs, paired
        by replicate, with a batch-means standard error."""
        ok = self.converged[label_a] & self.converged[label_b]
        x = self.estimates[label_a][ok, col_a]
        y = self.estimates[label_b][ok, col_b]
        n = self.config.n

        def scaled_cov(xv, yv):
            return n * float(np.cov(xv, yv, ddof=1)[0, 1])

        edges = np.linspace(0, x.size, batches + 1).astype(int)
        bats = [scaled_cov(x[a:b], y[a:b]) for a, b in zip(edges[:-1], edges[1:])]
        se = float(np.std(bats, ddof=1) / np.sqrt(batches))
        return scaled_cov(x, y), se

    # -- serialization -----------------------------------------------------

    def write_estimates_csv(self, path) -> None:
        rows = []
        for label in self.labels():
            names = self.param_names(label)
            est = self.estimates[label]
            conv = self.converged[label]
            for r in range(est.shape[0]):
                for j, name in enumerate(names):
                    rows.append([label, r, name, fmt(est[r, j]),
                                 str(bool(conv[r]))])
        atomic_csv(path, CSV_ESTIMATES_HEADER, rows)

    def summary_rows(self) -> list:
        rows = []
        for label in self.labels():
            names = self.param_names(label)
            mean = self.mean(label)
            ncov = self.ncov(label)
            se = self.ncov_se(label)
            fails = self.failures(label)
            for j, name in enumerate(names):
                rows.append([label, name, fmt(mean[j]), fmt(ncov[j, j]),
                             fmt(se[j, j]), str(fails)])
        return rows

    def write_summary_csv(self, path) -> None:
        atomic_csv(path, CSV_SUMMARY_HEADER, self.summary_rows())


def _fit_replicate(config: SimConfig, r: int):
    """Fit every run on replicate ``r``; deterministic in (seed, r)."""
    Y = config.model.sample(config.theta_true, config.n,
                            substream(config.seed, r))
    out = []
    for run in config.runs:
        names = config.free_names(run)
        try:
            res = fit(run.spec, config.model, Y, config.theta_true,
                      fixed=run.fixed_dict)
            if res.converged:
                out.append((np.array([res.params[n] for n in names]), True))
            else:
                out.append((np.full(len(names), np.nan), False))
        except (DomainError, NoRootInDomain, np.linalg.LinAlgError):
            out.append((np.full(len(names), np.nan), False))
    return out


def _run_chunk(config: SimConfig, lo: int, hi: int):
    rows = {run.label: [] for run in config.runs}
    flags = {run.label: [] for run in config.runs}
    for r in range(lo, hi):
        for run, (est, ok) in zip(config.runs, _fit_replicate(config, r)):
            rows[run.label].append(est)
            flags[run.label].append(ok)
    return rows, flags


def worker_count(threads=None) -> int:
    """Resolve the worker count: explicit argument, else the CLIK_THREADS
    environment variable (0 means all cores), else serial."""
    if threads is None:
        raw = os.environ.get("CLIK_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ClikError(f"CLIK_THREADS={raw!r} is not an integer") from None
    if threads < 0:
        raise ClikError("worker count must be >= 0")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def run(config: SimConfig, threads=None) -> SimResult:
    """Run the study.  The result is identical for any worker count."""
    workers = worker_count(threads)
    R = config.replicates
    if workers <= 1:
        chunks = [_run_chunk(config, 0, R)]
    else:
        edges = np.linspace(0, R, workers * 4 + 1).astype(int)
        spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, [config] * len(spans),
                                   [a for a, _ in spans], [b for _, b in spans]))

    result = SimResult(config)
    for run_ in config.runs:
        est = np.concatenate([np.asarray(rows[run_.label]) for rows, _ in chunks])
        conv = np.concatenate([np.asarray(flags[run_.label], dtype=bool)
                               for _, flags in chunks])
        result.estimates[run_.label] = est
        result.converged[run_.label] = conv
        fails = int((~conv).sum())
        if fails > FAILURE_BUDGET * R:
            raise FailureBudgetExceeded(
                f"{run_.label}: {fails}/{R} replicates failed "
                f"(budget {FAILURE_BUDGET:.0%})")
    return result


# ---------------------------------------------------------------------------
# numeric Hessian (oracle utility)
# ---------------------------------------------------------------------------


def numeric_hessian(f, x, h=None) -> np.ndarray:
    """Symmetrized central-difference Hessian of a scalar function.

    Exact on quadratics up to round-off; the default step is
    ``1e-4 * max(|x_i|, 1)`` per coordinate.  Domain errors raised by
    ``f`` on stencil points propagate.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    steps = np.array([h if h is not None else 1e-4 * max(1.0, abs(v))
                      for v in x])
    f0 = f(x)
    hess = np.empty((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = steps[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / steps[i] ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = steps[j]
            val = (f(x + ei + ej) - f(x + ei - ej)
                   - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = val
    return 0.5 * (hess + hess.T)


# ---------------------------------------------------------------------------
# known-nuisance paradox diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParadoxReport:
    """Replicate covariances behind the known-nuisance efficiency reversal.

    The reversal can occur only when the jointly-estimated pair is
    asymptotically uncorrelated while the known-nuisance interest
    estimator stays correlated with the nuisance estimator.
    """

    interest: str
    nuisance: str
    n: int
    replicates: int
    ncov_joint: float               # n cov(psi_hat, lambda_hat)
    ncov_joint_se: float
    ncov_mixed: float               # n cov(psi_tilde, lambda_hat)
    ncov_mixed_se: float
    joint_uncorrelated: bool
    mixed_correlated: bool
    sigma: float

    @property
    def reversal_condition(self) -> bool:
        return self.joint_uncorrelated and self.mixed_correlated


def paradox_covariance_diagnostics(spec: CompositeSpec, model: Model,
                                   theta: ParamVector, n: int = 500,
                                   replicates: int = 2000, seed: int = 0,
                                   sigma: float = 3.0,
                                   threads=None) -> ParadoxReport:
    """Estimate the two estimator covariances by replicate simulation.

    ``theta`` must have exactly one interest and one nuisance parameter.
    Fits the spec twice per replicate (nuisance free, nuisance fixed at
    the truth) and reports the n-scaled covariances with batch errors.
    """
    if len(theta.interest_names) != 1 or len(theta.nuisance_names) != 1:
        raise ValueError("diagnostics need exactly one interest and one "
                         "nuisance parameter")
    psi, lam = theta.interest_names[0], theta.nuisance_names[0]
    config = SimConfig(
        model, theta,
        (SpecRun(spec, (), "joint"), SpecRun(spec, {lam: theta[lam]}, "mixed")),
        n, replicates, seed)
    result = run(config, threads=threads)

    joint_names = result.param_names("joint")
    i_psi, i_lam = joint_names.index(psi), joint_names.index(lam)
    cov_joint, se_joint = result.cross_ncov("joint", i_psi, "joint", i_lam)
    mixed_names = result.param_names("mixed")
    cov_mixed, se_mixed = result.cross_ncov("mixed", mixed_names.index(psi),
                                            "joint", i_lam)
    return ParadoxReport(
        interest=psi, nuisance=lam, n=n, replicates=replicates,
        ncov_joint=cov_joint, ncov_joint_se=se_joint,
        ncov_mixed=cov_mixed, ncov_mixed_se=se_mixed,
        joint_uncorrelated=bool(abs(cov_joint) < sigma * se_joint),
        mixed_correlated=bool(abs(cov_mixed) > sigma * se_mixed),
        sigma=sigma,
    )
