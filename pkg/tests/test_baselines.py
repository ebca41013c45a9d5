import numpy as np
import pytest

from models.lambda_seq import LambdaSeq
from models.prior import PriorSpec
from services.baselines import (
    default_step,
    fista_run,
    ista_run,
    power_iteration_sigma_max,
    reference_solution,
    slope_cost,
)
from services.experiments import gen_instance, opt_error
from services.sorted_l1 import subgradient_distance
from utils.errors import ConfigError, DimensionError, NonConvergence

COST_SLACK = 1e-12


@pytest.fixture
def tall_instance():
    # n > p keeps the cost strongly convex, so the solvers converge to machine precision
    return gen_instance(120, 60, PriorSpec.bernoulli_gaussian(0.2), sigma_w=0.1, seed=5)


class TestCost:
    def test_at_zero(self, small_instance):
        X, y = small_instance.X, small_instance.y
        lam = LambdaSeq.bhq(200, 0.2)
        assert slope_cost(np.zeros(200), X, y, lam) == pytest.approx(0.5 * y @ y)

    def test_constant_weights_match_lasso(self, small_instance):
        X, y = small_instance.X, small_instance.y
        b = np.random.default_rng(0).standard_normal(200)
        r = y - X @ b
        expected = 0.5 * r @ r + 0.7 * np.abs(b).sum()
        assert slope_cost(b, X, y, LambdaSeq.constant(200, 0.7)) == pytest.approx(expected, rel=1e-12)

    def test_shape_checks(self, small_instance):
        X, y = small_instance.X, small_instance.y
        with pytest.raises(DimensionError):
            slope_cost(np.zeros(10), X, y, LambdaSeq.constant(200, 1.0))
        with pytest.raises(DimensionError):
            slope_cost(np.zeros(200), X, y[:10], LambdaSeq.constant(200, 1.0))


class TestPowerIteration:
    def test_diagonal(self):
        assert power_iteration_sigma_max(np.diag([1.0, 5.0, 3.0])) == pytest.approx(5.0, rel=1e-6)

    def test_rank_one(self):
        u, v = np.array([1.0, 2.0, 2.0]), np.array([3.0, 4.0])
        assert power_iteration_sigma_max(np.outer(u, v)) == pytest.approx(15.0, rel=1e-8)

    def test_gaussian_design_edge(self):
        X = np.random.default_rng(1).standard_normal((500, 1000)) / np.sqrt(500)
        # largest singular value of an n x p N(0, 1/n) matrix is close to 1 + sqrt(p/n)
        assert power_iteration_sigma_max(X) == pytest.approx(1.0 + np.sqrt(2.0), rel=0.05)
        assert power_iteration_sigma_max(X) == pytest.approx(np.linalg.norm(X, 2), rel=1e-4)

    def test_zero_matrix(self):
        with pytest.raises(ConfigError):
            power_iteration_sigma_max(np.zeros((3, 3)))

    def test_iteration_cap(self):
        X = np.random.default_rng(2).standard_normal((50, 80))
        with pytest.raises(NonConvergence):
            power_iteration_sigma_max(X, max_iter=1)


class TestProximalGradient:
    def test_ista_cost_is_monotone(self, small_instance):
        X, y = small_instance.X, small_instance.y
        lam = LambdaSeq.bhq(200, 0.2, scale=0.2)
        costs = ista_run(X, y, lam, max_iter=300).column('cost')
        assert np.all(np.diff(costs) <= COST_SLACK * max(1.0, costs[0]))

    def test_zero_response(self, small_instance):
        X = small_instance.X
        trace = ista_run(X, np.zeros(X.shape[0]), LambdaSeq.constant(200, 0.1))
        assert trace.converged
        assert trace.iterations == 1
        assert not np.any(trace.beta)

    def test_fista_and_ista_agree(self, tall_instance):
        X, y = tall_instance.X, tall_instance.y
        lam = LambdaSeq.linear(60, 0.3, 0.1)
        fista = fista_run(X, y, lam, max_iter=5000)
        ista = ista_run(X, y, lam, max_iter=30000)
        assert fista.converged and ista.converged
        assert opt_error(fista.beta, ista.beta) <= 1e-9

    @pytest.mark.parametrize('start, stop', [(0.3, 0.1), (0.5, 0.25)])
    def test_reference_solution_is_stationary(self, tall_instance, start, stop):
        X, y = tall_instance.X, tall_instance.y
        lam = LambdaSeq.linear(60, start, stop)
        beta = reference_solution(X, y, lam)
        assert subgradient_distance(beta, X.T @ (y - X @ beta), lam, tol=0.0) <= 1e-6

    def test_reference_does_not_depend_on_start(self, small_instance):
        X, y = small_instance.X, small_instance.y
        lam = LambdaSeq.bhq(200, 0.2, scale=0.3)
        step = default_step(X)
        start = np.random.default_rng(3).standard_normal(200)
        from_zero = reference_solution(X, y, lam, step=step)
        from_random = reference_solution(X, y, lam, step=step, beta0=start)
        assert opt_error(from_zero, from_random) <= 1e-8

    def test_records_reference_metrics(self, small_instance):
        X, y = small_instance.X, small_instance.y
        lam = LambdaSeq.bhq(200, 0.2, scale=0.3)
        trace = fista_run(X, y, lam, max_iter=20, beta_ref=np.zeros(200))
        record = trace.records[-1]
        assert record['iter'] == 20
        assert {'opt_error', 'set_diff', 'cost', 'step_diff'} <= set(record)

    def test_stop_when(self, small_instance):
        X, y = small_instance.X, small_instance.y
        lam = LambdaSeq.bhq(200, 0.2, scale=0.3)
        trace = ista_run(X, y, lam, max_iter=100, stop_when=lambda r: r['iter'] >= 7)
        assert trace.iterations == 7

    def test_missing_weights(self, small_instance):
        with pytest.raises(ConfigError):
            ista_run(small_instance.X, small_instance.y, None)
