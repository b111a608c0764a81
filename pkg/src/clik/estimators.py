"""Maximum composite likelihood estimation.

Small-dimension Newton iteration on the total composite score, plus the
handful of estimators with registered fast paths: the four-cell
multinomial MLE, the two mean estimators of the two-block normal model,
and the equicorrelated-normal pairwise correlation estimators (variance
known or profiled out), which reduce to scalar root finding on a pair of
sufficient statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .composite import CompositeSpec, composite_loglik, composite_score
from .errors import DomainError, NoRootInDomain
from .models import EMVN, Model, Multinomial4, ParamVector, TriNormal

NEWTON_MAX_ITER = 100
NEWTON_TOL_PER_OBS = 1e-8
#: Number of equispaced scan points used to bracket score roots.
ROOT_SCAN_POINTS = 16
#: How far inside the open domain the scan grid starts.
ROOT_SCAN_MARGIN = 1e-6


@dataclass(frozen=True)
class EstimateResult:
    """A fitted parameter point with solver metadata."""

    params: ParamVector
    iterations: int
    converged: bool
    score_norm: float
    solver: str                         # "closed-form" | "newton"

    def csv_row(self, estimator: str) -> list:
        vals = [repr(self.params[n]) for n in self.params.free_names]
        return [estimator, *vals, str(self.converged), str(self.iterations)]


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------


def mcle_newton(spec: CompositeSpec, model: Model, data, theta0: ParamVector,
                fixed=None, max_iter: int = NEWTON_MAX_ITER) -> EstimateResult:
    """Newton iteration on the summed composite score.

    ``fixed`` maps parameter names to values held at those values (tagged
    known); the remaining 1 or 2 free parameters are iterated with a
    finite-difference score Jacobian and step halving that keeps every
    iterate inside the model domain.  Convergence means the sup norm of
    the total score fell below ``1e-8 * n``.
    """
    Y = model.check_data(data)
    n = Y.shape[0]
    theta = theta0
    if fixed:
        theta = theta.with_values(**fixed).with_roles(
            **{name: "known" for name in fixed})
    model.validate(theta)
    free = theta.free_names
    if not 1 <= len(free) <= 2:
        raise ValueError(f"Newton solver expects 1 or 2 free parameters, "
                         f"got {len(free)}")

    def total_score(th):
        return composite_score(spec, model, Y, th).sum(axis=0)

    tol = NEWTON_TOL_PER_OBS * n
    score = total_score(theta)
    best = (float(np.max(np.abs(score))), theta)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if np.max(np.abs(score)) < tol:
            return EstimateResult(theta, iterations - 1, True,
                                  float(np.max(np.abs(score))), "newton")
        jac = np.empty((len(free), len(free)))
        for a, name in enumerate(free):
            h = 1e-5 * max(1.0, abs(theta[name]))
            up = total_score(theta.with_values(**{name: theta[name] + h}))
            dn = total_score(theta.with_values(**{name: theta[name] - h}))
            jac[:, a] = (up - dn) / (2.0 * h)
        try:
            delta = np.linalg.solve(jac, -score)
        except np.linalg.LinAlgError:
            delta, *_ = np.linalg.lstsq(jac, -score, rcond=None)
        step = 1.0
        for _ in range(60):
            try:
                candidate = theta.replace_free(theta.free_values + step * delta)
                model.validate(candidate)
                trial = total_score(candidate)
                if np.all(np.isfinite(trial)):
                    break
            except DomainError:
                pass
            step *= 0.5
        else:
            break
        theta, score = candidate, trial
        norm = float(np.max(np.abs(score)))
        if norm < best[0]:
            best = (norm, theta)

    norm, theta = best
    return EstimateResult(theta, iterations, bool(norm < tol), norm, "newton")


# ---------------------------------------------------------------------------
# equicorrelated-normal pairwise machinery
# ---------------------------------------------------------------------------
#
# Every bivariate margin has covariance sigma2 * [[1, rho], [rho, 1]], so the
# total pairwise log likelihood depends on the data only through
#   Q = sum of squared entries,   W = sum of squared row sums:
#   cl(rho, sigma2) = -Nc log(2 pi) - Nc log sigma2 - (Nc/2) log(1 - rho^2)
#                     - T(rho) / (2 sigma2),
# with Nc = n p (p-1)/2 and T(rho) = ((p-1) Q - (W - Q) rho) / (1 - rho^2).
# Maximizing over sigma2 gives sigma2_hat(rho) = T(rho) / (2 Nc).


def _pair_stats(Y):
    n, p = Y.shape
    q = float(np.sum(Y * Y))
    w = float(np.sum(Y.sum(axis=1) ** 2))
    return n, p, q, w


def _t_and_deriv(rho, p, q, w):
    a = (p - 1) * q
    c = 0.5 * (w - q)
    om = 1.0 - rho * rho
    t = (a - 2.0 * rho * c) / om
    tp = (2.0 * rho * a - 2.0 * c * (1.0 + rho * rho)) / (om * om)
    return t, tp


def _scan_roots(score, loglik, lo, hi):
    """Bracket roots of ``score`` on a scan grid, polish with brentq, and
    keep the root with the highest objective value."""
    grid = np.linspace(lo, hi, ROOT_SCAN_POINTS)
    vals = np.array([score(x) for x in grid])
    roots = []
    for x0, x1, f0, f1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if not (np.isfinite(f0) and np.isfinite(f1)):
            continue
        if f0 == 0.0:
            roots.append(float(x0))
        elif f0 * f1 < 0.0:
            roots.append(float(brentq(score, x0, x1, xtol=1e-13)))
    if np.isfinite(vals[-1]) and vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    if not roots:
        raise NoRootInDomain(f"no score root in ({lo}, {hi})")
    objective = [loglik(r) for r in roots]
    return roots[int(np.argmax(objective))]


def _emvn_rho_pairwise(Y, sigma2=None):
    """Stationary point of the pairwise log likelihood in rho.

    With ``sigma2`` given, solves the known-variance score; otherwise
    profiles sigma2 out and returns its profile maximizer alongside rho.
    """
    n, p, q, w = _pair_stats(Y)
    nc = n * p * (p - 1) / 2.0
    lo = -1.0 / (p - 1) + ROOT_SCAN_MARGIN
    hi = 1.0 - ROOT_SCAN_MARGIN

    if sigma2 is not None:
        def score(r):
            t, tp = _t_and_deriv(r, p, q, w)
            return nc * r / (1.0 - r * r) - tp / (2.0 * sigma2)

        def loglik(r):
            t, _ = _t_and_deriv(r, p, q, w)
            return (-nc * np.log(sigma2) - 0.5 * nc * np.log(1.0 - r * r)
                    - t / (2.0 * sigma2))

        rho = _scan_roots(score, loglik, lo, hi)
        return rho, float(sigma2), abs(score(rho))

    def score(r):
        t, tp = _t_and_deriv(r, p, q, w)
        return -nc * tp / t + nc * r / (1.0 - r * r)

    def loglik(r):
        t, _ = _t_and_deriv(r, p, q, w)
        return -nc * np.log(t) - 0.5 * nc * np.log(1.0 - r * r)

    rho = _scan_roots(score, loglik, lo, hi)
    t, _ = _t_and_deriv(rho, p, q, w)
    return rho, t / (2.0 * nc), abs(score(rho))


# ---------------------------------------------------------------------------
# registered estimators
# ---------------------------------------------------------------------------


def closed_form(name: str, data, known=None) -> EstimateResult:
    """Evaluate a registered estimator by id.

    Known ids: ``trinormal_mu12``, ``trinormal_mu123`` (needs ``sigma2``),
    ``multinomial4_mle`` (needs ``k``), ``emvn_pairwise_rho`` and
    ``emvn_pairwise_rho_known_sigma`` (needs ``sigma2``).
    """
    known = known or {}
    Y = np.asarray(data, dtype=float)

    if name == "trinormal_mu12":
        mu = 0.5 * (Y[:, 0].mean() + Y[:, 1].mean())
        params = ParamVector(("mu",), (mu,), ("interest",))
        return EstimateResult(params, 0, True, 0.0, "closed-form")

    if name == "trinormal_mu123":
        s2 = float(known["sigma2"])
        mu = (s2 * (Y[:, 0].mean() + Y[:, 1].mean()) + Y[:, 2].mean()) / (1.0 + 2.0 * s2)
        params = ParamVector(("mu", "sigma2"), (mu, s2), ("interest", "known"))
        return EstimateResult(params, 0, True, 0.0, "closed-form")

    if name == "multinomial4_mle":
        k = float(known["k"])
        theta = float(Y.mean(axis=0).sum() / (2.0 + 1.0 / k))
        params = ParamVector(("theta",), (theta,), ("interest",))
        return EstimateResult(params, 0, True, 0.0, "closed-form")

    if name == "emvn_pairwise_rho":
        rho, s2, resid = _emvn_rho_pairwise(Y)
        params = ParamVector(("rho", "sigma2"), (rho, s2),
                             ("interest", "nuisance"))
        return EstimateResult(params, 0, True, resid, "closed-form")

    if name == "emvn_pairwise_rho_known_sigma":
        rho, s2, resid = _emvn_rho_pairwise(Y, sigma2=float(known["sigma2"]))
        params = ParamVector(("rho", "sigma2"), (rho, s2),
                             ("interest", "known"))
        return EstimateResult(params, 0, True, resid, "closed-form")

    raise KeyError(f"unknown closed-form estimator {name!r}")


def _is_singleton_margins(spec: CompositeSpec, indices) -> bool:
    want = {(i,) for i in indices}
    got = set()
    for comp in spec.components:
        if comp.kind != "margin" or len(comp.indices) != 1 or comp.weight != 1.0:
            return False
        got.add(comp.indices)
    return got == want


def _is_all_pairs(spec: CompositeSpec, p: int) -> bool:
    want = {(r, s) for r in range(p) for s in range(r + 1, p)}
    got = set()
    for comp in spec.components:
        if comp.kind != "margin" or len(comp.indices) != 2 or comp.weight != 1.0:
            return False
        got.add(tuple(sorted(comp.indices)))
    return got == want


def _is_full(spec: CompositeSpec, p: int) -> bool:
    return (len(spec.components) == 1
            and spec.components[0].kind == "margin"
            and tuple(sorted(spec.components[0].indices)) == tuple(range(p))
            and spec.components[0].weight == 1.0)


def registered_closed_form(model: Model, spec: CompositeSpec, theta_like,
                           fixed=None):
    """Return a ``data -> EstimateResult`` fast path, or None.

    Matching is structural (spec components plus which parameters are
    fixed), so hand-built specs qualify as well as the constructors.
    """
    fixed = dict(fixed or {})
    free_after = [n for n in theta_like.free_names if n not in fixed]

    if isinstance(model, EMVN) and _is_all_pairs(spec, model.dim):
        if not fixed and free_after == ["rho", "sigma2"]:
            return lambda Y: closed_form("emvn_pairwise_rho", Y)
        if set(fixed) == {"sigma2"} and free_after == ["rho"]:
            return lambda Y: closed_form("emvn_pairwise_rho_known_sigma", Y,
                                         {"sigma2": fixed["sigma2"]})

    if isinstance(model, Multinomial4) and _is_full(spec, 3) and not fixed:
        return lambda Y: closed_form("multinomial4_mle", Y, {"k": model.k})

    if isinstance(model, TriNormal) and free_after == ["mu"]:
        if _is_singleton_margins(spec, (0, 1)):
            return lambda Y: closed_form("trinormal_mu12", Y)
        if _is_singleton_margins(spec, (0, 1, 2)):
            sigma2 = fixed.get("sigma2", theta_like["sigma2"])
            return lambda Y: closed_form("trinormal_mu123", Y,
                                         {"sigma2": sigma2})
    return None


# ---------------------------------------------------------------------------
# default starting points (method of moments)
# ---------------------------------------------------------------------------


def method_of_moments_start(model: Model, Y, theta_like: ParamVector,
                            fixed=None) -> ParamVector:
    """A data-driven interior starting point for the Newton solver."""
    fixed = dict(fixed or {})
    Y = np.asarray(Y, dtype=float)
    updates = {}
    if isinstance(model, EMVN):
        n, p, q, w = _pair_stats(Y)
        s2 = max(q / (n * p), 1e-6)
        lo, hi = -1.0 / (p - 1), 1.0
        pad = 0.02 * (hi - lo)
        rho = np.clip((w / q - 1.0) / (p - 1), lo + pad, hi - pad)
        updates = {"rho": float(rho), "sigma2": float(s2)}
    elif isinstance(model, TriNormal):
        corr = np.corrcoef(Y[:, 0], Y[:, 1])[0, 1]
        updates = {"mu": float(Y.mean()),
                   "rho": float(np.clip(corr, -0.96, 0.96)),
                   "sigma2": float(max(Y[:, 2].var(ddof=1), 1e-6))}
    elif isinstance(model, Multinomial4):
        t = Y.mean(axis=0).sum() / (2.0 + 1.0 / model.k)
        pad = 0.02 * model.theta_max
        updates = {"theta": float(np.clip(t, pad, model.theta_max - pad))}
    for name in fixed:
        updates.pop(name, None)
    theta = theta_like.with_values(**updates, **fixed)
    if fixed:
        theta = theta.with_roles(**{name: "known" for name in fixed})
    return theta


def fit(spec: CompositeSpec, model: Model, data, theta_like: ParamVector,
        fixed=None) -> EstimateResult:
    """Fit a spec: registered fast path when one matches, Newton otherwise."""
    fast = registered_closed_form(model, spec, theta_like, fixed)
    if fast is not None:
        return fast(np.asarray(data, dtype=float))
    start = method_of_moments_start(model, data, theta_like, fixed)
    return mcle_newton(spec, model, data, start, fixed=fixed)
