import json
import os

import numpy as np
import pandas as pd
import pytest

from cli import SlopeAmpCli
from config import (
    BENCH_REPORT_COLUMNS,
    EXIT_CALIBRATION_ERROR,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    MSE_REPORT_COLUMNS,
    SE_TRAJECTORY_COLUMNS,
    TRACE_COLUMNS,
)
from models.prior import PriorSpec
from services.experiments import gen_instance
from services.sorted_l1 import prox_sorted_l1
from utils.helpers import read_json, read_vector, write_matrix, write_vector

SMALL_SE = {'p_se': 200, 'mc_reps': 8}


def run(tmp_path, config, *args):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(config))
    return SlopeAmpCli().run(['--config', str(path), '--out', str(tmp_path / 'out'), *args])


class TestProx:
    def test_output_matches_library(self, tmp_path):
        v = np.random.default_rng(0).standard_normal(12)
        write_vector(str(tmp_path / 'v.csv'), v)
        theta = {'kind': 'linear', 'start': 1.0, 'stop': 0.1}
        assert run(tmp_path, {'command': 'prox', 'input': 'v.csv', 'theta': theta}) == EXIT_OK

        out = tmp_path / 'out' / 'prox.csv'
        expected = prox_sorted_l1(v, np.linspace(1.0, 0.1, 12))
        np.testing.assert_array_equal(read_vector(str(out)), expected)
        assert out.read_text().startswith('# divergence=')

    def test_zero_thresholds(self, tmp_path):
        write_vector(str(tmp_path / 'v.csv'), [3.0, -1.0, 0.5])
        theta = {'kind': 'constant', 'value': 0.0}
        assert run(tmp_path, {'command': 'prox', 'input': 'v.csv', 'theta': theta}) == EXIT_OK
        np.testing.assert_array_equal(read_vector(str(tmp_path / 'out' / 'prox.csv')), [3.0, -1.0, 0.5])

    def test_parse_error(self, tmp_path):
        (tmp_path / 'v.csv').write_text('1.0\nabc\n')
        config = {'command': 'prox', 'input': 'v.csv', 'theta': [1.0, 0.5]}
        assert run(tmp_path, config) == EXIT_CONFIG_ERROR


class TestConfigErrors:
    def test_unknown_key(self, tmp_path):
        assert run(tmp_path, {'command': 'prox', 'input': 'v.csv', 'theta': [1.0], 'verbose': True}) == EXIT_CONFIG_ERROR

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text('{"command": ')
        assert SlopeAmpCli().run(['--config', str(path)]) == EXIT_CONFIG_ERROR

    def test_increasing_lambda(self, tmp_path):
        config = {'command': 'calibrate', 'lambda': [0.5, 1.0], 'prior': {'kind': 'point_mass'}}
        assert run(tmp_path, config) == EXIT_CONFIG_ERROR

    def test_zero_lambda_entry(self, tmp_path):
        config = {'command': 'solve', 'n': 4, 'p': 4, 'prior': {'kind': 'bernoulli_gaussian', 'eps': 0.1},
                  'lambda': [1.0, 0.5, 0.5, 0.0]}
        assert run(tmp_path, config) != EXIT_OK


class TestSe:
    CONFIG = {
        'command': 'se',
        'alpha': {'kind': 'linear', 'start': 2.0, 'stop': 1.0},
        'prior': {'kind': 'bernoulli_gaussian', 'eps': 0.1},
        'sigma_w': 0.2,
        **SMALL_SE
    }

    def test_trajectory(self, tmp_path):
        assert run(tmp_path, self.CONFIG, '--seed', '3') == EXIT_OK
        frame = pd.read_csv(tmp_path / 'out' / 'se_trajectory.csv')
        assert list(frame.columns) == SE_TRAJECTORY_COLUMNS
        summary = read_json(str(tmp_path / 'out' / 'se_summary.json'))
        assert summary['converged']
        assert summary['tau_star_sq'] == pytest.approx(frame['tau_sq'].iloc[-1])
        assert 0 < summary['f_alpha'] < 0.5
        slack = 4 * (summary['f_alpha_stderr'] + summary['f_alpha_stein_stderr']) + 1e-3
        assert abs(summary['f_alpha_stein'] - summary['f_alpha']) <= slack

    def test_reproducible(self, tmp_path):
        assert run(tmp_path, self.CONFIG, '--seed', '3') == EXIT_OK
        first = (tmp_path / 'out' / 'se_trajectory.csv').read_text()
        assert run(tmp_path, self.CONFIG, '--seed', '3', '--threads', '3') == EXIT_OK
        assert (tmp_path / 'out' / 'se_trajectory.csv').read_text() == first

    def test_below_amin(self, tmp_path):
        config = dict(self.CONFIG, alpha={
            'kind': 'amin_multiple',
            'direction': {'kind': 'linear', 'start': 1.0, 'stop': 0.5},
            'factor': 0.5
        })
        assert run(tmp_path, config) == EXIT_CALIBRATION_ERROR


class TestCalibrate:
    def test_alpha_file(self, tmp_path):
        config = {
            'command': 'calibrate',
            'lambda': {'kind': 'linear', 'start': 0.6, 'stop': 0.2},
            'prior': {'kind': 'bernoulli_gaussian', 'eps': 0.1},
            'sigma_w': 0.2,
            **SMALL_SE
        }
        assert run(tmp_path, config) == EXIT_OK
        data = read_json(str(tmp_path / 'out' / 'alpha.json'))
        lam = np.array(data['lambda'])
        assert len(data['alpha']) == 200
        slack = 3 * np.array(data['lambda_stderr']) + 5e-3 * lam
        assert np.all(np.abs(np.array(data['lambda_check']) - lam) <= slack)


class TestSolve:
    def test_zero_response_solves_instantly(self, tmp_path):
        instance = gen_instance(10, 20, PriorSpec.point_mass(0.0), seed=1)
        write_matrix(str(tmp_path / 'X.csv'), instance.X)
        write_vector(str(tmp_path / 'y.csv'), np.zeros(10))
        config = {
            'command': 'solve',
            'design': 'X.csv',
            'response': 'y.csv',
            'prior': {'kind': 'bernoulli_gaussian', 'eps': 0.1},
            'lambda': {'kind': 'constant', 'value': 0.5},
            'reference': False,
            'p_se': 20,
            'mc_reps': 8
        }
        assert run(tmp_path, config) == EXIT_OK
        summary = read_json(str(tmp_path / 'out' / 'solve_summary.json'))
        assert summary['iterations'] == 1
        assert summary['converged']
        assert not np.any(read_vector(str(tmp_path / 'out' / 'solution.csv')))

    def test_generated_instance(self, tmp_path):
        config = {
            'command': 'solve',
            'n': 100,
            'p': 200,
            'prior': {'kind': 'bernoulli_gaussian', 'eps': 0.1},
            'sigma_w': 0.1,
            'lambda': {'kind': 'bhq', 'q': 0.2, 'scale': 0.3},
            'opt_tol': 1e-20,
            **SMALL_SE
        }
        assert run(tmp_path, config) == EXIT_OK
        summary = read_json(str(tmp_path / 'out' / 'solve_summary.json'))
        assert summary['reference'] == 'effective'
        assert summary['kkt_distance_effective'] <= 1e-6
        trace = pd.read_csv(tmp_path / 'out' / 'trace.csv')
        assert list(trace.columns) == ['solver', 'iter', 'opt_error', 'set_diff', 'cost', 'tau_hat']
        assert trace['opt_error'].iloc[-1] <= 1e-6


class TestBench:
    def test_report_files(self, tmp_path):
        config = {
            'command': 'bench',
            'n': 60,
            'p': 120,
            'prior': {'kind': 'bernoulli_gaussian', 'eps': 0.1},
            'sigma_w': 0.1,
            'lambda': {'kind': 'bhq', 'q': 0.2, 'scale': 0.3},
            'thresholds': [1e-2, 1e-3],
            'ista_max_iter': 2000,
            'mc_reps': 8
        }
        assert run(tmp_path, config) == EXIT_OK
        report = pd.read_csv(tmp_path / 'out' / 'bench_report.csv')
        assert list(report.columns) == BENCH_REPORT_COLUMNS
        assert set(report['solver']) == {'amp', 'fista', 'ista'}
        trace = pd.read_csv(tmp_path / 'out' / 'bench_trace.csv')
        assert list(trace.columns) == TRACE_COLUMNS
        summary = read_json(str(tmp_path / 'out' / 'bench_summary.json'))
        assert summary['meta']['target'] == 'effective'
        assert summary['meta']['target_ratio'] > 0
        assert set(summary['first_iters']) == {'amp', 'fista', 'ista'}


class TestMse:
    def test_report(self, tmp_path):
        config = {
            'command': 'mse',
            'n': 60,
            'p': 120,
            'prior': {'kind': 'bernoulli_gaussian', 'eps': 0.1},
            'sigma_w': 0.3,
            'lambda': {'kind': 'bhq', 'q': 0.2, 'scale': 0.5},
            'n_seeds': 2,
            'p_se': 120,
            'mc_reps': 8
        }
        assert run(tmp_path, config) == EXIT_OK
        frame = pd.read_csv(tmp_path / 'out' / 'mse_report.csv')
        assert list(frame.columns) == MSE_REPORT_COLUMNS
        assert frame['predicted_mse'].iloc[0] > 0


CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')


class TestShippedConfigs:
    def test_prox_example(self, tmp_path):
        path = os.path.join(CONFIG_DIR, 'prox.json')
        assert SlopeAmpCli().run(['--config', path, '--out', str(tmp_path)]) == EXIT_OK
        out = tmp_path / 'prox.csv'
        np.testing.assert_allclose(read_vector(str(out)), [1.25, -1.0, 0.1, 1.25, -0.2], atol=1e-15)
        assert out.read_text().splitlines()[0] == '# divergence=4'

    @pytest.mark.slow
    def test_solve_example_reaches_reference(self, tmp_path):
        path = os.path.join(CONFIG_DIR, 'solve.json')
        assert SlopeAmpCli().run(['--config', path, '--out', str(tmp_path)]) == EXIT_OK
        trace = pd.read_csv(tmp_path / 'trace.csv')
        assert trace.loc[trace['iter'] <= 40, 'opt_error'].iloc[-1] <= 1e-6
