import numpy as np
import pytest

from clik.errors import DimensionMismatch, DomainError
from clik.models import (EMVN, Multinomial4, ParamVector, TriNormal,
                         read_dataset, substream, write_dataset)
from clik.montecarlo import numeric_hessian

LOG_2PI = np.log(2 * np.pi)


def all_models():
    return [
        (EMVN(3), EMVN(3).params(rho=0.4, sigma2=1.3)),
        (TriNormal(), TriNormal().params(mu=0.5, rho=-0.3, sigma2=2.0)),
        (Multinomial4(5.0), Multinomial4(5.0).params(0.2)),
    ]


# -- ParamVector -------------------------------------------------------------


def test_param_vector_basics():
    pv = ParamVector(("rho", "sigma2"), (0.4, 1.0), ("interest", "nuisance"))
    assert pv["rho"] == 0.4
    assert pv.free_names == ("rho", "sigma2")
    assert pv.with_roles(sigma2="known").free_names == ("rho",)
    assert pv.with_values(rho=0.1)["rho"] == 0.1
    np.testing.assert_array_equal(pv.replace_free([0.2, 2.0]).free_values,
                                  [0.2, 2.0])
    with pytest.raises(ValueError):
        ParamVector(("a", "a"), (1.0, 2.0), ("interest", "interest"))
    with pytest.raises(ValueError):
        ParamVector(("a",), (1.0,), ("wat",))
    with pytest.raises(KeyError):
        pv.with_values(nope=1.0)
    with pytest.raises(DimensionMismatch):
        pv.replace_free([1.0])


def test_domain_boundaries_rejected():
    emvn = EMVN(3)
    with pytest.raises(DomainError):
        emvn.params(rho=-0.5)                     # exactly the lower bound
    with pytest.raises(DomainError):
        emvn.params(rho=-0.5 + 1e-12)             # within the 1e-8 margin
    with pytest.raises(DomainError):
        emvn.params(rho=1.0)
    with pytest.raises(DomainError):
        emvn.params(rho=0.2, sigma2=0.0)
    mult = Multinomial4(5.0)
    with pytest.raises(DomainError):
        mult.params(0.0)
    with pytest.raises(DomainError):
        mult.params(mult.theta_max)
    with pytest.raises(DomainError):
        TriNormal().params(rho=1.0)


# -- margins and conditionals -------------------------------------------------


def test_emvn_univariate_margin_is_standard_normal():
    model = EMVN(3)
    theta = model.params(rho=0.0, sigma2=1.0)
    y = np.zeros(3)
    assert model.margin_loglik((0,), y, theta) == pytest.approx(
        -0.5 * LOG_2PI, abs=1e-14)


def test_emvn_bivariate_margin_at_origin():
    model = EMVN(3)
    theta = model.params(rho=0.5, sigma2=1.0)
    val = model.margin_loglik((0, 1), np.zeros(3), theta)
    # bivariate normal density at the origin with unit variances, corr 0.5
    assert val == pytest.approx(-LOG_2PI - 0.5 * np.log(1 - 0.25), abs=1e-13)


def test_multinomial_margin_cell_probability():
    model = Multinomial4(5.0)
    theta = model.params(0.2)
    val = model.margin_loglik((2,), np.array([0.0, 0.0, 1.0]), theta)
    assert val == pytest.approx(np.log(0.04), abs=1e-13)


def test_conditional_equals_marginal_under_independence():
    model = EMVN(3)
    theta = model.params(rho=0.0, sigma2=1.7)
    y = np.array([0.3, -1.2, 0.8])
    for target in range(3):
        given = tuple(j for j in range(3) if j != target)
        assert model.conditional_loglik(target, given, y, theta) == \
            pytest.approx(model.margin_loglik((target,), y, theta), abs=1e-12)


def test_emvn_conditional_variance_formula():
    model = EMVN(3)
    theta = model.params(rho=0.5, sigma2=1.0)
    _, _, var = model.conditional_moments(0, (1, 2), theta)
    # partitioned-covariance arithmetic: (1-rho)(1+2 rho)/(1+rho)
    assert var == pytest.approx(2.0 / 3.0, abs=1e-12)

    # Monte Carlo residual-variance cross-check
    Y = model.sample(theta, 100_000, 314)
    icpt, w, _ = model.conditional_moments(0, (1, 2), theta)
    resid = Y[:, 0] - (icpt + Y[:, 1:] @ w)
    assert resid.var(ddof=1) == pytest.approx(2.0 / 3.0, abs=0.01)


def test_chain_rule_identity_all_models():
    rng = np.random.default_rng(4)
    for model, theta in all_models():
        Y = model.sample(theta, 40, rng.integers(2**32))
        total = model.margin_loglik((0,), Y, theta)
        for i in range(1, model.dim):
            total = total + model.conditional_loglik(i, tuple(range(i)), Y, theta)
        np.testing.assert_allclose(total, model.loglik(Y, theta),
                                   rtol=0, atol=1e-10)


def test_conditional_rejects_target_in_given():
    model = EMVN(3)
    theta = model.params(rho=0.2)
    with pytest.raises(ValueError):
        model.conditional_loglik(1, (1, 2), np.zeros(3), theta)


def test_margin_index_validation():
    model = EMVN(3)
    theta = model.params(rho=0.2)
    with pytest.raises(ValueError):
        model.margin_loglik((), np.zeros(3), theta)
    with pytest.raises(DimensionMismatch):
        model.margin_loglik((3,), np.zeros(3), theta)
    with pytest.raises(DimensionMismatch):
        model.margin_loglik((0,), np.zeros(4), theta)


# -- samplers ------------------------------------------------------------------


def test_sampler_determinism():
    for model, theta in all_models():
        a = model.sample(theta, 100, 9)
        b = model.sample(theta, 100, 9)
        np.testing.assert_array_equal(a, b)


def test_substreams_differ_and_are_deterministic():
    a = substream(5, 0).standard_normal(4)
    b = substream(5, 1).standard_normal(4)
    a2 = substream(5, 0).standard_normal(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, a2)


def test_multinomial_sampler_mean_band():
    model = Multinomial4(5.0)
    theta = model.params(0.2)
    n = 100_000
    Y = model.sample(theta, n, 11)
    band = 3 * np.sqrt(0.2 * 0.8 / n)
    assert abs(Y[:, 0].mean() - 0.2) < band
    assert abs(Y[:, 1].mean() - 0.2) < band
    assert abs(Y[:, 2].mean() - 0.04) < 3 * np.sqrt(0.04 * 0.96 / n)
    model.check_data(Y)


def test_emvn_sampler_covariance_band():
    model = EMVN(3)
    theta = model.params(rho=0.5, sigma2=1.0)
    n = 100_000
    Y = model.sample(theta, n, 12)
    emp = np.cov(Y.T, ddof=1)
    cov = model._cov(theta)
    for i in range(3):
        for j in range(3):
            se = np.sqrt((cov[i, i] * cov[j, j] + cov[i, j] ** 2) / n)
            assert abs(emp[i, j] - cov[i, j]) < 3 * se


def test_trinormal_sampler_matches_structure():
    model = TriNormal()
    theta = model.params(mu=0.7, rho=-0.4, sigma2=2.5)
    Y = model.sample(theta, 100_000, 13)
    assert abs(Y.mean() - 0.7) < 0.02
    assert abs(np.corrcoef(Y[:, 0], Y[:, 1])[0, 1] + 0.4) < 0.01
    assert abs(np.cov(Y[:, 0], Y[:, 2])[0, 1]) < 0.02
    assert abs(Y[:, 2].var(ddof=1) - 2.5) < 0.05


def test_multinomial_check_data_rejects_bad_rows():
    model = Multinomial4(2.0)
    with pytest.raises(ValueError):
        model.check_data(np.array([[1.0, 1.0, 0.0]]))
    with pytest.raises(ValueError):
        model.check_data(np.array([[0.5, 0.0, 0.0]]))


def test_multinomial_cells_sum_to_one():
    for k in (0.5, 1.0, 5.0, 100.0):
        model = Multinomial4(k)
        for t in np.linspace(0.01, model.theta_max - 0.01, 7):
            assert model.cell_probs(model.params(t)).sum() == pytest.approx(
                1.0, abs=1e-12)


# -- scores ---------------------------------------------------------------------


def _fd_full_score(model, y, theta):
    free = theta.free_names
    out = np.empty(len(free))
    for a, name in enumerate(free):
        h = 1e-5 * max(1.0, abs(theta[name]))
        up = model.loglik(y, theta.with_values(**{name: theta[name] + h}))
        dn = model.loglik(y, theta.with_values(**{name: theta[name] - h}))
        out[a] = (up - dn) / (2 * h)
    return out


def test_full_score_matches_finite_differences():
    rng = np.random.default_rng(5)
    for model, theta in all_models():
        Y = model.sample(theta, 10, rng.integers(2**32))
        scores = model.full_score(Y, theta)
        for i in range(10):
            fd = _fd_full_score(model, Y[i], theta)
            np.testing.assert_allclose(scores[i], fd, rtol=1e-6, atol=1e-8)


def test_multinomial_score_zero_at_mle():
    model = Multinomial4(5.0)
    theta = model.params(0.2)
    Y = model.sample(theta, 4000, 17)
    theta_hat = model.params(Y.mean(axis=0).sum() / (2 + 1 / 5.0))
    total = model.full_score(Y, theta_hat).sum(axis=0)
    assert abs(total[0]) < 1e-8 * Y.shape[0]


def test_score_unbiasedness():
    for model, theta in all_models():
        Y = model.sample(theta, 100_000, 19)
        U = model.full_score(Y, theta)
        se = U.std(axis=0, ddof=1) / np.sqrt(U.shape[0])
        assert np.all(np.abs(U.mean(axis=0)) < 4 * se)


# -- Fisher information ------------------------------------------------------------


def test_multinomial_fisher_exact_value():
    model = Multinomial4(5.0)
    est = model.fisher_information(model.params(0.2))
    assert est.provenance == "analytic"
    # reciprocal of theta/(2 + 1/k) - theta^2 at theta = 0.2, k = 5
    assert est.matrix[0, 0] == pytest.approx(1 / (0.2 / 2.2 - 0.04), rel=1e-12)
    assert est.matrix[0, 0] == pytest.approx(19.642857142857, rel=1e-10)


def test_trinormal_mu_information_independent_case():
    model = TriNormal()
    theta = model.params(mu=0.0, rho=0.0, sigma2=2.0,
                         roles={"rho": "known", "sigma2": "known"})
    est = model.fisher_information(theta, draws=100_000, seed=23)
    # sum of reciprocal variances: 1 + 1 + 1/2
    assert abs(est.matrix[0, 0] - 2.5) < 3 * est.std_err[0, 0]


def test_emvn_fisher_matches_numeric_hessian_oracle():
    model = EMVN(3)
    theta = model.params(rho=0.4, sigma2=1.3)
    est = model.fisher_information(theta, draws=200_000, seed=29)
    Y = model.sample(theta, 200_000, 31)
    names = theta.free_names

    def mean_loglik(x):
        pv = theta.replace_free(x)
        return model.loglik(Y, pv).mean()

    hess = -numeric_hessian(mean_loglik, theta.free_values, h=1e-4)
    for i in range(len(names)):
        for j in range(len(names)):
            assert abs(est.matrix[i, j] - hess[i, j]) < 3 * max(
                est.std_err[i, j], 1e-3)


# -- dataset serialization -----------------------------------------------------


def test_dataset_csv_round_trip(tmp_path):
    model = EMVN(4)
    Y = model.sample(model.params(rho=0.3), 25, 37)
    path = tmp_path / "data.csv"
    write_dataset(path, Y)
    header = path.read_text().splitlines()[0]
    assert header == "rep,y1,y2,y3,y4"
    np.testing.assert_array_equal(read_dataset(path), Y)
