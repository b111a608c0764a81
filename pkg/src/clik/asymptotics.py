"""Closed-form asymptotic variances, efficiency ratios and thresholds.

All variances are reported on the per-observation scale (asymptotic
variance multiplied by the sample size).  The equicorrelated-normal
pairwise formulas and the four-cell multinomial information scalars are
exact; the full-conditional ratio curve has no closed form here and is
produced by the Monte Carlo sandwich with batch standard errors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .composite import (_godambe, _partitioned_from_mats, full_conditional,
                        info_monte_carlo)
from .errors import DomainError
from .fileio import atomic_csv, fmt
from .models import EMVN, Multinomial4, substream


# ---------------------------------------------------------------------------
# curve container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EfficiencyCurve:
    """A swept parameter grid with named value columns.

    ``rows[:, 0]`` is the swept parameter (strictly increasing); the
    remaining columns are the named values.  CSV round-trips are
    bit-exact (shortest round-trip decimal formatting).
    """

    x_name: str
    value_names: tuple
    rows: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "value_names", tuple(self.value_names))
        if rows.ndim != 2 or rows.shape[1] != 1 + len(self.value_names):
            raise ValueError(f"rows shape {rows.shape} does not match "
                             f"{len(self.value_names)} value columns")
        if not np.all(np.isfinite(rows)):
            raise ValueError("curve contains non-finite values")
        if np.any(np.diff(rows[:, 0]) <= 0):
            raise ValueError(f"{self.x_name} grid must be strictly increasing")

    @property
    def x(self) -> np.ndarray:
        return self.rows[:, 0]

    def value(self, name: str) -> np.ndarray:
        return self.rows[:, 1 + self.value_names.index(name)]

    def to_csv(self, path) -> None:
        atomic_csv(path, [self.x_name, *self.value_names],
                   ([fmt(v) for v in row] for row in self.rows))

    @classmethod
    def from_csv(cls, path) -> "EfficiencyCurve":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader]
        return cls(header[0], tuple(header[1:]), np.asarray(rows))


def default_grid(lo: float, hi: float, size: int = 201,
                 margin: float = 0.01) -> np.ndarray:
    """Equispaced grid clipped ``margin`` inside an open interval."""
    if size < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(lo + margin, hi - margin, size)


# ---------------------------------------------------------------------------
# equicorrelated normal, pairwise likelihood (variances of the rho estimator)
# ---------------------------------------------------------------------------


def _check_emvn_domain(p: int, rho) -> None:
    # the closed forms extend continuously to the lower endpoint, where the
    # free-variance estimator becomes exact; the model domain itself is open
    if int(p) != p or p < 3:
        raise DomainError("p must be an integer >= 3")
    lo = -1.0 / (p - 1)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < lo) or np.any(rho >= 1.0):
        raise DomainError(f"rho must lie in [{lo}, 1)")


def avar_rho_known_sigma(p: int, rho):
    """Per-observation asymptotic variance of the pairwise correlation
    estimator when the common variance is known:

        2 (1-rho)^2 c(p, rho) / (p (p-1) (1+rho^2)^2),
        c(p, rho) = (1-rho)^2 (3 rho^2 + p^2 rho^2 + 1)
                    + p rho (-3 rho^3 + 8 rho^2 - 3 rho + 2).
    """
    _check_emvn_domain(p, rho)
    rho = np.asarray(rho, dtype=float)
    c = ((1 - rho) ** 2 * (3 * rho ** 2 + p ** 2 * rho ** 2 + 1)
         + p * rho * (-3 * rho ** 3 + 8 * rho ** 2 - 3 * rho + 2))
    out = 2 * (1 - rho) ** 2 * c / (p * (p - 1) * (1 + rho ** 2) ** 2)
    return float(out) if out.ndim == 0 else out


def avar_rho_free_sigma(p: int, rho):
    """Per-observation asymptotic variance of the pairwise correlation
    estimator with the common variance estimated jointly:

        2 (1-rho)^2 (1 + (p-1) rho)^2 / (p (p-1)).

    Vanishes at the lower domain boundary ``rho = -1/(p-1)``.
    """
    _check_emvn_domain(p, rho)
    rho = np.asarray(rho, dtype=float)
    out = 2 * (1 - rho) ** 2 * (1 + (p - 1) * rho) ** 2 / (p * (p - 1))
    return float(out) if out.ndim == 0 else out


def pairwise_ratio_curve(p: int, grid=None) -> EfficiencyCurve:
    """Ratio of the two pairwise variances (variance known over variance
    estimated) across the correlation range.

    Equals 1 at rho = 0, stays below 1 on the positive side, and diverges
    at the lower boundary where the free-variance estimator becomes exact.
    """
    if grid is None:
        grid = default_grid(-1.0 / (p - 1), 1.0)
    grid = np.asarray(grid, dtype=float)
    ratio = avar_rho_known_sigma(p, grid) / avar_rho_free_sigma(p, grid)
    return EfficiencyCurve("rho", ("ratio",), np.column_stack([grid, ratio]),
                           {"p": p})


def pairwise_rho_sigma_acov(p: int, rho, sigma2):
    """Per-observation asymptotic covariance between the pairwise estimators
    of the correlation and of the common variance (both estimated):

        2 rho (1-rho) (1 + (p-1) rho) sigma2 / p.

    Vanishes at rho = 0 and at the lower domain boundary.
    """
    _check_emvn_domain(p, rho)
    if np.any(np.asarray(sigma2) <= 0):
        raise DomainError("sigma2 must be positive")
    rho = np.asarray(rho, dtype=float)
    out = 2 * rho * (1 - rho) * (1 + (p - 1) * rho) * sigma2 / p
    return float(out) if out.ndim == 0 else out


def full_conditional_ratio_curve(p: int, grid=None, draws: int = 200_000,
                                 seed=0, sigma2: float = 1.0) -> EfficiencyCurve:
    """Monte Carlo ratio of known-variance to free-variance asymptotic
    variance for the full-conditional correlation estimator.

    Each grid point gets an independent substream; ``std_err`` is the
    batch-means error of the ratio.
    """
    if grid is None:
        grid = default_grid(-1.0 / (p - 1), 1.0, size=21)
    grid = np.asarray(grid, dtype=float)
    _check_emvn_domain(p, grid)
    model = EMVN(p)
    spec = full_conditional(p)
    rows = []
    for i, rho in enumerate(grid):
        theta = model.params(rho=float(rho), sigma2=sigma2)
        triple = info_monte_carlo(spec, model, theta, draws, substream(seed, i))
        i_idx = [triple.param_names.index("rho")]
        n_idx = [triple.param_names.index("sigma2")]
        prof, known = _partitioned_from_mats(
            triple.sensitivity, triple.variability, triple.godambe, i_idx, n_idx)
        ratio = float(known[0, 0] / prof[0, 0])
        batch_ratios = []
        for hb, jb in zip(triple.batch_sensitivity, triple.batch_variability):
            pb, kb = _partitioned_from_mats(hb, jb, _godambe(hb, jb), i_idx, n_idx)
            batch_ratios.append(float(kb[0, 0] / pb[0, 0]))
        se = float(np.std(batch_ratios, ddof=1) / np.sqrt(len(batch_ratios)))
        rows.append([rho, ratio, se])
    return EfficiencyCurve("rho", ("ratio", "std_err"), np.asarray(rows),
                           {"p": p, "draws": draws, "sigma2": sigma2})


# ---------------------------------------------------------------------------
# two-block normal model: when an extra independent coordinate hurts
# ---------------------------------------------------------------------------


def two_block_mean_variances(sigma2: float, rho: float):
    """Per-observation variances of the two mean estimators in the
    two-block normal model: the mean of the correlated pair, and the
    weighted mean that adds the independent third coordinate.

    Returns ``(v12, v123)`` with ``v12 = (1+rho)/2`` and
    ``v123 = (2 (1+rho) sigma2^2 + sigma2) / (1 + 2 sigma2)^2``.
    """
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    if not -1.0 <= rho <= 1.0:
        raise DomainError("rho must lie in [-1, 1]")
    v12 = (1.0 + rho) / 2.0
    v123 = (2.0 * (1.0 + rho) * sigma2 ** 2 + sigma2) / (1.0 + 2.0 * sigma2) ** 2
    return v12, v123


def two_block_threshold(sigma2: float) -> float:
    """The correlation below which adding the independent third coordinate
    makes the mean estimator worse: ``rho* = -(1 + 2 sigma2)/(1 + 4 sigma2)``.

    Tends to -1/2 as ``sigma2`` grows, so an arbitrarily precise extra
    coordinate still hurts on a nonvanishing correlation range.
    """
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    return -(1.0 + 2.0 * sigma2) / (1.0 + 4.0 * sigma2)


# ---------------------------------------------------------------------------
# four-cell multinomial: independence vs pairwise vs full
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultinomialInfo:
    """The five information scalars of the four-cell multinomial."""

    h_ind: float
    j_ind: float
    h_pair: float
    j_pair: float
    fisher_full: float

    @property
    def nvar_full(self) -> float:
        return 1.0 / self.fisher_full

    @property
    def nvar_ind(self) -> float:
        return self.j_ind / self.h_ind ** 2

    @property
    def nvar_pair(self) -> float:
        return self.j_pair / self.h_pair ** 2


def _check_multinomial_domain(theta, k: float) -> None:
    if k <= 0:
        raise DomainError("k must be positive")
    tmax = k / (2.0 * k + 1.0)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= tmax):
        raise DomainError(f"theta must lie in (0, {tmax})")


def multinomial_info_scalars(theta: float, k: float) -> MultinomialInfo:
    """Exact sensitivity/variability scalars of the independence and
    pairwise likelihoods, plus the full-likelihood Fisher information.
    """
    _check_multinomial_domain(theta, k)
    t = float(theta)
    h_ind = 2 / t + 2 / (1 - t) + 1 / (k * t) + 1 / (k * (k - t))
    j_ind = (2 / (t * (1 - t)) + 1 / (t * (k - t))
             - 2 / (1 - t) ** 2 - 4 / ((1 - t) * (k - t)))
    h_pair = (4 / t + 2 / (k * t) + 4 / (1 - 2 * t)
              + 2 * (1 + 1 / k) ** 2 / (1 - (1 + 1 / k) * t))
    a = 2 / t + 2 / (1 - 2 * t) + (1 + 1 / k) / (1 - t - t / k)
    b = 2 / t + 2 * (1 + 1 / k) / (1 - t - t / k)
    j_pair = (2 * a ** 2 * t * (1 - t) + b ** 2 * (t / k) * (1 - t / k)
              - 2 * a ** 2 * t ** 2 - 4 * a * b * t ** 2 / k)
    fisher = 1.0 / (t / (2 + 1 / k) - t ** 2)
    return MultinomialInfo(h_ind, j_ind, h_pair, j_pair, fisher)


def multinomial_variance_curves(k: float, grid=None) -> EfficiencyCurve:
    """Per-observation asymptotic variances of the three estimators across
    the admissible range, and the pairwise-over-independence ratio."""
    model = Multinomial4(k)
    if grid is None:
        grid = default_grid(0.0, model.theta_max, margin=0.01 * model.theta_max)
    grid = np.asarray(grid, dtype=float)
    _check_multinomial_domain(grid, k)
    rows = []
    for t in grid:
        info = multinomial_info_scalars(float(t), k)
        rows.append([t, info.nvar_full, info.nvar_ind, info.nvar_pair,
                     info.nvar_pair / info.nvar_ind])
    return EfficiencyCurve(
        "theta", ("nvar_full", "nvar_ind", "nvar_pair", "ratio_pair_over_ind"),
        np.asarray(rows), {"k": k})
