import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from _oracles import normal_block_marginal_quad, normal_posterior_moments_quad
from ntr_mix.kernels import (
    BlockStatistics,
    NormalNormal,
    UnitKernel,
    log_block_marginal,
    log_block_predictive,
    posterior_params,
)


def _stats(ys):
    return BlockStatistics.from_values(ys)


class TestMarginal:
    @pytest.mark.parametrize("y", [-3.0, 0.0, 0.7, 5.0])
    def test_single_observation(self, y):
        model = NormalNormal(0.8, 2.5)
        expected = -0.5 * math.log(2 * math.pi * 3.3) - y**2 / (2 * 3.3)
        assert log_block_marginal(model, _stats([y])) == pytest.approx(expected, rel=1e-14)

    def test_empty_block(self):
        assert log_block_marginal(NormalNormal(), BlockStatistics()) == 0.0

    def test_two_observations_vs_quadrature(self):
        model = NormalNormal(1.0, 1.0)
        ys = [0.4, -1.1]
        ref = normal_block_marginal_quad(ys, 1.0, 1.0)
        assert math.exp(log_block_marginal(model, _stats(ys))) == pytest.approx(ref, rel=1e-8)

    def test_against_multivariate_normal(self):
        s, a = 0.6, 1.7
        ys = np.array([0.2, 1.5, -0.3, 0.9])
        cov = s * np.eye(4) + a * np.ones((4, 4))
        ref = stats.multivariate_normal(np.zeros(4), cov).logpdf(ys)
        assert log_block_marginal(NormalNormal(s, a), _stats(ys)) == pytest.approx(ref, rel=1e-12)


class TestPosterior:
    def test_symmetric_case(self):
        mean, var = posterior_params(NormalNormal(0.5, 2.0), _stats([0.0]))
        assert mean == 0.0
        assert var == pytest.approx(1 / (1 / 0.5 + 1 / 2.0), rel=1e-15)

    def test_plug_in(self):
        mean, var = posterior_params(NormalNormal(1.0, 1.0), _stats([2.0]))
        assert (mean, var) == (pytest.approx(1.0), pytest.approx(0.5))
        m_q, v_q = normal_posterior_moments_quad([2.0], 1.0, 1.0)
        assert mean == pytest.approx(m_q, rel=1e-8)
        assert var == pytest.approx(v_q, rel=1e-8)

    def test_flat_prior_limit(self):
        ys = [1.0, 2.0, 4.5]
        mean, var = posterior_params(NormalNormal(0.7, 1e8), _stats(ys))
        assert var == pytest.approx(0.7 / 3, rel=1e-7)
        assert mean == pytest.approx(np.mean(ys), rel=1e-7)

    def test_formula_reproduced_exactly(self):
        s, a, ys = 1.3, 0.4, [0.5, -2.0, 1.25]
        mean, var = posterior_params(NormalNormal(s, a), _stats(ys))
        sigma = 1 / (len(ys) / s + 1 / a)
        assert var == sigma
        assert mean == sigma / s * math.fsum(ys)

    def test_empty_block_rejected(self):
        with pytest.raises(ValueError):
            posterior_params(NormalNormal(), BlockStatistics())
        with pytest.raises(ValueError):
            log_block_predictive(NormalNormal(), BlockStatistics(), 0.0)


class TestPredictive:
    def test_example(self):
        got = log_block_predictive(NormalNormal(1.0, 1.0), _stats([0.0]), 0.0)
        assert got == pytest.approx(stats.norm(0, math.sqrt(1.5)).logpdf(0.0), rel=1e-14)

    def test_prior_predictive_is_singleton_marginal(self):
        model = NormalNormal(0.9, 2.0)
        for y in [-1.0, 0.0, 3.0]:
            assert model.log_prior_predictive(y) == pytest.approx(
                log_block_marginal(model, _stats([y])), rel=1e-14
            )

    def test_ratio_identity(self):
        model = NormalNormal(1.0, 2.0)
        block = [0.3, -0.8, 1.1]
        for y in [-2.0, 0.1, 2.5]:
            ratio = log_block_marginal(model, _stats(block + [y])) - log_block_marginal(
                model, _stats(block)
            )
            assert abs(math.expm1(ratio - log_block_predictive(model, _stats(block), y))) < 1e-10

    def test_vectorised(self):
        model = NormalNormal(1.0, 2.0)
        st_ = _stats([0.5, 1.0])
        grid = np.linspace(-3, 3, 7)
        vec = model.log_predictive(st_, grid)
        assert vec.shape == (7,)
        assert vec == pytest.approx([model.log_predictive(st_, float(g)) for g in grid], rel=1e-14)

    def test_integrates_to_one(self):
        model = NormalNormal(0.5, 3.0)
        grid = np.linspace(-30, 30, 20001)
        dens = np.exp(model.log_predictive(_stats([1.0, 2.0]), grid))
        assert integrate.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    ys=st.lists(st.floats(-5, 5), min_size=1, max_size=6),
    s=st.floats(0.05, 5.0),
    a=st.floats(0.05, 10.0),
)
def test_chain_rule(ys, s, a):
    model = NormalNormal(s, a)
    acc = 0.0
    stats_ = BlockStatistics()
    for y in ys:
        acc += model.log_predictive(stats_, y)
        stats_ = stats_.add(y)
    assert abs(math.expm1(acc - log_block_marginal(model, _stats(ys)))) < 1e-10


def test_randomised_quadrature_agreement():
    rng = np.random.default_rng(11)
    for _ in range(100):
        s = float(rng.uniform(0.1, 3.0))
        a = float(rng.uniform(0.1, 5.0))
        d = int(rng.integers(1, 5))
        ys = rng.normal(0, 2, size=d)
        model = NormalNormal(s, a)
        ref = normal_block_marginal_quad(ys, s, a)
        assert abs(math.exp(log_block_marginal(model, _stats(ys))) / ref - 1) < 1e-8


class TestValidation:
    def test_tiny_kernel_variance_rejected(self):
        with pytest.raises(ValueError):
            NormalNormal(1e-13, 1.0)
        NormalNormal(1e-12, 1.0)

    def test_prior_variance_positive(self):
        with pytest.raises(ValueError):
            NormalNormal(1.0, 0.0)

    def test_stats_consistency(self):
        with pytest.raises(ValueError):
            BlockStatistics(0, 1.0, 1.0)
        with pytest.raises(ValueError):
            BlockStatistics(-1)
        assert BlockStatistics().add(2.0) == BlockStatistics(1, 2.0, 4.0)


def test_unit_kernel():
    k = UnitKernel()
    assert k.log_marginal(_stats([1.0, 2.0])) == 0.0
    assert k.log_predictive(_stats([1.0]), 3.0) == 0.0
    assert np.all(k.log_predictive(_stats([1.0]), np.zeros(3)) == 0.0)
    with pytest.raises(NotImplementedError):
        k.sample_posterior(_stats([1.0]), np.random.default_rng(0))


def test_posterior_sampler_moments():
    model = NormalNormal(1.0, 1.0)
    st_ = _stats([2.0, 1.0])
    rng = np.random.default_rng(3)
    xs = np.array([model.sample_posterior(st_, rng) for _ in range(20000)])
    mean, var = model.posterior_params(st_)
    assert abs(xs.mean() - mean) < 4 * math.sqrt(var / xs.size)
