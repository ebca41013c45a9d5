import json

import numpy as np
import pytest
from scipy.special import ndtri

from config import DEFAULT_SEED, SEED_ENV_VAR
from models.amp_state import AmpConfig, AmpState
from models.lambda_seq import LambdaSeq
from models.prior import PriorSpec
from models.reports import BenchReport, MseReport, SolverTrace
from models.run_config import RunConfig, build_sequence, resolve_seed
from models.se import SeConfig, SeResult
from utils.errors import ConfigError, DimensionError, ParseError
from utils.helpers import (
    format_duration,
    read_json,
    read_matrix,
    read_vector,
    write_json,
    write_matrix,
    write_vector,
)
from utils.rng import stream


class TestLambdaSeq:
    def test_rejects_increasing(self):
        with pytest.raises(ConfigError):
            LambdaSeq([1.0, 2.0])

    def test_rejects_negative(self):
        with pytest.raises(ConfigError):
            LambdaSeq([1.0, -0.5])

    def test_all_zero(self):
        with pytest.raises(ConfigError):
            LambdaSeq([0.0, 0.0])
        assert LambdaSeq([0.0, 0.0], penalty=False).max == 0.0

    def test_read_only(self):
        seq = LambdaSeq([2.0, 1.0])
        with pytest.raises(ValueError):
            seq.values[0] = 5.0

    def test_bhq(self):
        seq = LambdaSeq.bhq(100, 0.2, scale=0.5)
        assert seq.max == pytest.approx(0.5 * ndtri(1 - 0.2 / 200))
        assert np.all(np.diff(seq.values) < 0)
        with pytest.raises(ConfigError):
            LambdaSeq.bhq(10, 1.5)

    def test_normalized_and_scaled(self):
        seq = LambdaSeq([4.0, 2.0, 1.0])
        np.testing.assert_array_equal(seq.normalized().values, [1.0, 0.5, 0.25])
        np.testing.assert_array_equal(seq.scaled(0.5).values, [2.0, 1.0, 0.5])
        assert len(seq) == 3
        assert seq.min == 1.0


class TestPrior:
    def test_second_moment(self):
        assert PriorSpec.bernoulli_gaussian(0.1, 2.0).second_moment == pytest.approx(0.4)
        assert PriorSpec.point_mass(3.0).second_moment == 9.0
        assert PriorSpec.empirical([1.0, -1.0, 2.0]).second_moment == pytest.approx(2.0)

    def test_sample(self):
        values = PriorSpec.empirical([1.0, 5.0]).sample(stream(0, 'signal'), 50)
        assert set(values.tolist()) <= {1.0, 5.0}
        np.testing.assert_array_equal(PriorSpec.point_mass(2.0).sample(stream(0, 'signal'), 3), [2.0] * 3)

    def test_from_dict(self):
        prior = PriorSpec.from_dict({'kind': 'bernoulli_gaussian', 'eps': 0.2})
        assert prior.eps == 0.2 and prior.sigma_b == 1.0
        with pytest.raises(ConfigError):
            PriorSpec.from_dict({'kind': 'bernoulli_gaussian', 'epsilon': 0.2})
        with pytest.raises(ConfigError):
            PriorSpec.from_dict({'kind': 'laplace'})
        with pytest.raises(ConfigError):
            PriorSpec.bernoulli_gaussian(1.5)


class TestSeModels:
    def test_validation(self):
        with pytest.raises(ConfigError):
            SeConfig(p_se=0)
        with pytest.raises(ConfigError):
            SeConfig(delta=0.0)
        with pytest.raises(ConfigError):
            SeConfig(sigma_w=-0.1)

    def test_with_p(self):
        cfg = SeConfig(p_se=100, mc_reps=4, seed=7).with_p(30)
        assert (cfg.p_se, cfg.mc_reps, cfg.seed) == (30, 4, 7)
        assert cfg.n_se == 15.0

    def test_result_iterations(self):
        result = SeResult([1.0, 0.5, 0.4], 0.4, True, 0.01)
        assert result.iterations == 2
        assert SeResult.from_dict(result.to_dict()).tau_star_sq == 0.4


class TestAmpModels:
    def test_tau_schedule_reuses_last_entry(self):
        cfg = AmpConfig(LambdaSeq([1.0, 1.0]), tau_schedule=[3.0, 2.0])
        assert [cfg.tau_at(t) for t in range(4)] == [3.0, 2.0, 2.0, 2.0]
        assert AmpConfig(LambdaSeq([1.0])).tau_at(0) is None

    def test_rejects_bad_settings(self):
        with pytest.raises(ConfigError):
            AmpConfig(LambdaSeq([1.0]), max_iter=0)
        with pytest.raises(ConfigError):
            AmpConfig(LambdaSeq([1.0]), tau_schedule=[-1.0])

    def test_state_dict(self):
        state = AmpState(np.zeros(3), np.array([3.0, 4.0]), 2)
        data = state.to_dict()
        assert data['tau_hat'] == pytest.approx(np.sqrt(12.5))
        assert AmpState.from_dict(data).iter == 2


class TestReports:
    def test_first_iter_skips_start(self):
        trace = SolverTrace('ista')
        trace.add(iter=0, opt_error=0.001)
        trace.add(iter=1, opt_error=0.5)
        trace.add(iter=2, opt_error=0.01)
        assert trace.first_iter('opt_error', 0.1) == 2
        assert trace.first_iter('opt_error', 1e-9) is None

    def test_monotone(self):
        good = BenchReport([1e-2, 1e-3], {'amp': {1e-2: 3, 1e-3: 5}}, {'amp': 4}, {})
        bad = BenchReport([1e-2, 1e-3], {'amp': {1e-2: 6, 1e-3: 5}}, {'amp': 4}, {})
        missing = BenchReport([1e-2, 1e-3], {'amp': {1e-2: 3, 1e-3: None}}, {'amp': None}, {})
        assert good.is_monotone()
        assert not bad.is_monotone()
        assert missing.is_monotone()

    def test_mse_report(self):
        report = MseReport(500, 1000, 0.5, 0.105, 0.002, 0.1, per_seed=[0.1, 0.11])
        assert report.delta == 0.5
        assert report.relative_error == pytest.approx(0.05)
        assert not report.single_seed


class TestSeed:
    def test_precedence(self):
        env = {SEED_ENV_VAR: '5'}
        assert resolve_seed(3, env, 7) == 3
        assert resolve_seed(None, env, 7) == 5
        assert resolve_seed(None, {}, 7) == 7
        assert resolve_seed(None, {}, None) == DEFAULT_SEED

    def test_range(self):
        assert resolve_seed(2 ** 64 - 1, {}, None) == 2 ** 64 - 1
        with pytest.raises(ConfigError):
            resolve_seed(-1, {}, None)
        with pytest.raises(ConfigError):
            resolve_seed(None, {SEED_ENV_VAR: 'abc'}, None)


class TestRunConfig:
    def test_defaults_and_overrides(self):
        cfg = RunConfig.from_dict(
            {'command': 'se', 'alpha': [1.0], 'prior': {'kind': 'point_mass'}, 'p_se': 1},
            seed=4, threads=2, out='elsewhere', env={}
        )
        assert cfg.seed == 4
        assert cfg.out == 'elsewhere'
        se_cfg = cfg.se_config()
        assert (se_cfg.p_se, se_cfg.workers, se_cfg.seed) == (1, 2, 4)

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({'command': 'prox', 'input': 'v.csv', 'theta': [1.0], 'colour': 1}, env={})

    def test_unknown_command(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({'command': 'plot'}, env={})

    def test_missing_keys(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({'command': 'solve', 'lambda': [1.0], 'prior': {'kind': 'point_mass'}}, env={})

    def test_type_coercion(self):
        base = {'command': 'mse', 'p': 10, 'prior': {'kind': 'point_mass'}, 'lambda': [1.0]}
        assert RunConfig.from_dict(dict(base, n=5.0), env={}).get('n') == 5
        with pytest.raises(ConfigError):
            RunConfig.from_dict(dict(base, n=5.5), env={})
        with pytest.raises(ConfigError):
            RunConfig.from_dict(dict(base, n=True), env={})
        with pytest.raises(ConfigError):
            RunConfig.from_dict(dict(base, n=5, sigma_w=-1), env={})

    def test_invalid_target(self):
        base = {'command': 'bench', 'n': 5, 'p': 10, 'prior': {'kind': 'point_mass'}, 'lambda': [1.0]}
        with pytest.raises(ConfigError):
            RunConfig.from_dict(dict(base, target='exact'), env={})

    def test_build_sequence(self):
        assert build_sequence({'kind': 'constant', 'value': 2.0}, 3).values.tolist() == [2.0] * 3
        assert build_sequence({'kind': 'linear', 'start': 3.0, 'stop': 1.0}, 3).values.tolist() == [3.0, 2.0, 1.0]
        assert build_sequence({'kind': 'explicit', 'values': [2.0, 1.0]}, None).values.tolist() == [2.0, 1.0]
        assert len(build_sequence({'kind': 'bhq', 'q': 0.1}, 7)) == 7
        with pytest.raises(ConfigError):
            build_sequence({'kind': 'constant', 'value': 0.0}, 3)
        with pytest.raises(ConfigError):
            build_sequence({'kind': 'linear', 'start': 1.0}, 3)
        with pytest.raises(ConfigError):
            build_sequence({'kind': 'constant', 'value': 1.0, 'extra': 1}, 3)

    def test_sequence_from_file(self, tmp_path):
        write_vector(str(tmp_path / 'lam.csv'), [3.0, 2.0])
        cfg = RunConfig.from_dict(
            {'command': 'calibrate', 'lambda': 'lam.csv', 'prior': {'kind': 'point_mass'}},
            env={}, base_dir=str(tmp_path)
        )
        assert cfg.sequence('lambda', None).values.tolist() == [3.0, 2.0]


class TestFiles:
    def test_vector_round_trip_is_exact(self, tmp_path):
        path = str(tmp_path / 'v.csv')
        values = np.random.default_rng(0).standard_normal(20)
        write_vector(path, values, header='divergence=3')
        with open(path) as f:
            assert f.readline() == '# divergence=3\n'
        np.testing.assert_array_equal(read_vector(path), values)

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text('1.0\n\n2.0\nabc\n')
        with pytest.raises(ParseError) as info:
            read_vector(str(path))
        assert info.value.line == 4

    def test_non_finite_value(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text('1.0\nnan\n')
        with pytest.raises(ParseError):
            read_vector(str(path))

    def test_matrix_sidecar(self, tmp_path):
        path = str(tmp_path / 'X.csv')
        matrix = np.arange(6, dtype=float).reshape(2, 3)
        write_matrix(path, matrix)
        np.testing.assert_array_equal(read_matrix(path), matrix)
        write_json(path + '.json', {'rows': 3, 'cols': 3})
        with pytest.raises(DimensionError):
            read_matrix(path)
        write_json(path + '.json', {'rows': 2, 'cols': 2})
        with pytest.raises(ParseError):
            read_matrix(path)

    def test_json(self, tmp_path):
        path = str(tmp_path / 'out.json')
        write_json(path, {'a': np.float64(1.5), 'b': np.arange(2)})
        assert read_json(path) == {'a': 1.5, 'b': [0, 1]}
        (tmp_path / 'list.json').write_text(json.dumps([1, 2]))
        with pytest.raises(ConfigError):
            read_json(str(tmp_path / 'list.json'))
        with pytest.raises(ConfigError):
            read_json(str(tmp_path / 'missing.json'))

    def test_format_duration(self):
        assert format_duration(0) == "0:00"
        assert format_duration(75) == "1:15"
        assert format_duration(3725) == "1:02:05"
