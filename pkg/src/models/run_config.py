"""
Run configuration model: one flat JSON object per command invocation
"""

import os
from typing import Any, Dict, Mapping, Optional

from config import (
    AMP_MAX_ITER,
    AMP_OPT_TOL,
    BENCH_THRESHOLDS,
    COMMAND_KEYS,
    COMMON_KEYS,
    DEFAULT_OUT_DIR,
    DEFAULT_SEED,
    FISTA_MAX_ITER,
    ISTA_MAX_ITER,
    MSE_N_SEEDS,
    REFERENCE_TARGET,
    REFERENCE_TARGETS,
    SE_DELTA,
    SE_FP_TOL,
    SE_MAX_FP_ITER,
    SE_MC_REPS,
    SE_P,
    SEED_ENV_VAR,
)
from models.lambda_seq import LambdaSeq
from models.prior import PriorSpec
from models.se import SeConfig
from utils.errors import ConfigError
from utils.helpers import read_vector

SEQUENCE_KINDS = ('explicit', 'constant', 'linear', 'bhq')

# numeric keys and the type they are coerced to
PARAM_TYPES = {
    'n': int,
    'p': int,
    'p_se': int,
    'mc_reps': int,
    'max_fp_iter': int,
    'max_iter': int,
    'n_seeds': int,
    'amp_max_iter': int,
    'fista_max_iter': int,
    'ista_max_iter': int,
    'sigma_w': float,
    'delta': float,
    'fp_tol': float,
    'opt_tol': float,
    'tau0_sq': float,
}

DEFAULTS = {
    'sigma_w': 0.0,
    'delta': SE_DELTA,
    'p_se': SE_P,
    'mc_reps': SE_MC_REPS,
    'fp_tol': SE_FP_TOL,
    'max_fp_iter': SE_MAX_FP_ITER,
    'max_iter': AMP_MAX_ITER,
    'opt_tol': AMP_OPT_TOL,
    'amp_max_iter': AMP_MAX_ITER,
    'fista_max_iter': FISTA_MAX_ITER,
    'ista_max_iter': ISTA_MAX_ITER,
    'n_seeds': MSE_N_SEEDS,
    'thresholds': BENCH_THRESHOLDS,
    'target': REFERENCE_TARGET,
    'reference': REFERENCE_TARGET,
}

REQUIRED = {
    'prox': ['input', 'theta'],
    'solve': ['lambda', 'prior'],
    'se': ['alpha', 'prior'],
    'calibrate': ['lambda', 'prior'],
    'bench': ['n', 'p', 'prior', 'lambda'],
    'mse': ['n', 'p', 'prior', 'lambda'],
}


def resolve_seed(flag: Optional[int], env: Mapping[str, str], file_value: Any) -> int:
    """
    Seed precedence: --seed flag, then the environment variable, then the file, then the default

    Args:
        flag: Value of --seed (None if absent)
        env: Environment mapping
        file_value: 'seed' key of the config file (None if absent)

    Returns:
        Non-negative integer seed
    """
    if flag is not None:
        value, source = flag, '--seed'
    elif env.get(SEED_ENV_VAR):
        value, source = env[SEED_ENV_VAR], SEED_ENV_VAR
    elif file_value is not None:
        value, source = file_value, 'seed'
    else:
        return DEFAULT_SEED
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{source} must be an integer, got {value!r}")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"{source} must be an unsigned 64-bit integer, got {seed}")
    return seed


def build_sequence(spec: Any, p: Optional[int], penalty: bool = True) -> LambdaSeq:
    """
    Build a LambdaSeq from a config value

    Args:
        spec: A list of values or an object with kind explicit / constant / linear / bhq
        p: Length for the generated kinds
        penalty: Reject the all-zero sequence

    Returns:
        LambdaSeq
    """
    if isinstance(spec, (list, tuple)):
        return LambdaSeq(spec, penalty=penalty)
    if not isinstance(spec, dict):
        raise ConfigError(f"Sequence must be a list or an object, got {type(spec).__name__}")

    kind = spec.get('kind')
    allowed = {
        'explicit': {'kind', 'values'},
        'constant': {'kind', 'value'},
        'linear': {'kind', 'start', 'stop'},
        'bhq': {'kind', 'q', 'scale'},
    }.get(kind)
    if allowed is None:
        raise ConfigError(f"Unknown sequence kind '{kind}' (expected one of {', '.join(SEQUENCE_KINDS)})")
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"Unknown keys for sequence kind '{kind}': {', '.join(sorted(unknown))}")

    if kind == 'explicit':
        return LambdaSeq(spec.get('values', []), penalty=penalty)
    if p is None:
        raise ConfigError(f"Sequence kind '{kind}' needs a length")
    try:
        if kind == 'constant':
            seq = LambdaSeq.constant(p, float(spec['value']))
        elif kind == 'linear':
            seq = LambdaSeq.linear(p, float(spec['start']), float(spec['stop']))
        else:
            seq = LambdaSeq.bhq(p, float(spec['q']), float(spec.get('scale', 1.0)))
    except KeyError as e:
        raise ConfigError(f"Sequence kind '{kind}' is missing '{e.args[0]}'")
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid sequence parameters: {e}")
    if penalty and not seq.penalty:
        raise ConfigError("All-zero sequence is not a valid penalty")
    return seq


class RunConfig:
    def __init__(
        self,
        command: str,
        params: Dict[str, Any],
        seed: int = DEFAULT_SEED,
        threads: Optional[int] = None,
        out: str = DEFAULT_OUT_DIR,
        base_dir: str = '.'
    ):
        self.command = command
        self.params = params
        self.seed = seed
        self.threads = threads
        self.out = out
        # relative paths in the config resolve against the config file's directory
        self.base_dir = base_dir

    @classmethod
    def from_dict(
        cls,
        data: dict,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        out: Optional[str] = None,
        env: Optional[Mapping[str, str]] = None,
        base_dir: str = '.'
    ) -> 'RunConfig':
        """
        Validate a config object; command-line values override the file

        Args:
            data: Parsed JSON
            seed: --seed
            threads: --threads
            out: --out
            env: Environment (default os.environ)
            base_dir: Directory relative paths are resolved against

        Returns:
            RunConfig
        """
        if not isinstance(data, dict):
            raise ConfigError("Config must be a JSON object")
        command = data.get('command')
        if command not in COMMAND_KEYS:
            raise ConfigError(f"Unknown command '{command}' (expected one of {', '.join(COMMAND_KEYS)})")

        unknown = set(data) - set(COMMON_KEYS) - set(COMMAND_KEYS[command])
        if unknown:
            raise ConfigError(f"Unknown keys for '{command}': {', '.join(sorted(unknown))}")
        missing = [k for k in REQUIRED[command] if data.get(k) is None]
        if command == 'solve' and data.get('design') is None and (data.get('n') is None or data.get('p') is None):
            missing.append('n/p or design')
        if missing:
            raise ConfigError(f"Missing keys for '{command}': {', '.join(missing)}")

        params = {}
        for key in COMMAND_KEYS[command]:
            value = data.get(key, DEFAULTS.get(key))
            if value is not None and key in PARAM_TYPES:
                value = _coerce(key, value, PARAM_TYPES[key])
            params[key] = value

        threads = threads if threads is not None else data.get('threads')
        if threads is not None:
            threads = _coerce('threads', threads, int)
            if threads < 1:
                raise ConfigError(f"threads must be >= 1, got {threads}")

        config = cls(
            command=command,
            params=params,
            seed=resolve_seed(seed, os.environ if env is None else env, data.get('seed')),
            threads=threads,
            out=out or data.get('out') or DEFAULT_OUT_DIR,
            base_dir=base_dir
        )
        config.validate()
        return config

    def validate(self):
        """Range checks that do not need any computation"""
        params = self.params
        for key in ('n', 'p', 'p_se', 'mc_reps', 'max_fp_iter', 'max_iter', 'n_seeds',
                    'amp_max_iter', 'fista_max_iter', 'ista_max_iter'):
            if params.get(key) is not None and params[key] < 1:
                raise ConfigError(f"{key} must be >= 1, got {params[key]}")
        for key in ('fp_tol', 'opt_tol', 'delta'):
            if params.get(key) is not None and not params[key] > 0:
                raise ConfigError(f"{key} must be > 0, got {params[key]}")
        if params.get('sigma_w') is not None and params['sigma_w'] < 0:
            raise ConfigError(f"sigma_w must be >= 0, got {params['sigma_w']}")
        if params.get('tau0_sq') is not None and params['tau0_sq'] < 0:
            raise ConfigError(f"tau0_sq must be >= 0, got {params['tau0_sq']}")
        for key in ('target', 'reference'):
            value = params.get(key)
            if value is not None and value is not False and value not in REFERENCE_TARGETS:
                raise ConfigError(f"{key} must be one of {', '.join(REFERENCE_TARGETS)} or false")
        thresholds = params.get('thresholds')
        if thresholds is not None:
            if not isinstance(thresholds, list) or not thresholds:
                raise ConfigError("thresholds must be a non-empty list")
            params['thresholds'] = [_coerce('thresholds', t, float) for t in thresholds]
            if min(params['thresholds']) <= 0:
                raise ConfigError("thresholds must be positive")
        if params.get('prior') is not None:
            # parse early so prior errors surface before any computation
            self.prior()
        schedule = params.get('tau_schedule')
        if schedule is not None and schedule != 'se' and not isinstance(schedule, list):
            raise ConfigError("tau_schedule must be 'se' or a list of tau values")

    def path(self, value: str) -> str:
        return value if os.path.isabs(value) else os.path.join(self.base_dir, value)

    def get(self, key: str, default: Any = None) -> Any:
        value = self.params.get(key)
        return default if value is None else value

    def prior(self) -> PriorSpec:
        """Signal prior, with 'sample_file' read into an empirical sample"""
        spec = self.params.get('prior')
        if not isinstance(spec, dict):
            raise ConfigError("prior must be an object")
        if 'sample_file' in spec:
            spec = {k: v for k, v in spec.items() if k != 'sample_file'}
            spec['sample'] = read_vector(self.path(self.params['prior']['sample_file'])).tolist()
        return PriorSpec.from_dict(spec)

    def sequence(self, key: str, p: Optional[int], penalty: bool = True) -> LambdaSeq:
        """lambda / alpha / theta built to length p (a string value is read as a vector file)"""
        spec = self.params.get(key)
        if isinstance(spec, str):
            return LambdaSeq(read_vector(self.path(spec)), penalty=penalty)
        return build_sequence(spec, p, penalty=penalty)

    def se_config(self, p_se: Optional[int] = None, delta: Optional[float] = None,
                  sigma_w: Optional[float] = None) -> SeConfig:
        """SeConfig from the Monte-Carlo keys, with optional dimension overrides"""
        return SeConfig(
            p_se=p_se if p_se is not None else self.get('p_se', SE_P),
            mc_reps=self.get('mc_reps', SE_MC_REPS),
            seed=self.seed,
            fp_tol=self.get('fp_tol', SE_FP_TOL),
            max_fp_iter=self.get('max_fp_iter', SE_MAX_FP_ITER),
            sigma_w=sigma_w if sigma_w is not None else self.get('sigma_w', 0.0),
            delta=delta if delta is not None else self.get('delta', SE_DELTA),
            workers=self.threads
        )

    def to_dict(self) -> dict:
        """Convert config to dictionary (effective values after defaults and overrides)"""
        data = {'command': self.command, 'seed': self.seed, 'threads': self.threads, 'out': self.out}
        data.update({k: v for k, v in self.params.items() if v is not None})
        return data

    def __str__(self) -> str:
        return f"RunConfig(command={self.command}, seed={self.seed}, out={self.out})"

    def __repr__(self) -> str:
        return self.__str__()


def _coerce(key: str, value: Any, kind: type):
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    try:
        coerced = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be {'an integer' if kind is int else 'a number'}, got {value!r}")
    if kind is int and float(value) != coerced:
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return coerced
