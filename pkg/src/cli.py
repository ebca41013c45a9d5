"""
SLOPE-AMP command-line entry point
Runs one command (prox, solve, se, calibrate, bench, mse) from a JSON run configuration
"""

import argparse
import logging
import os
import sys
import time
from typing import List, Optional

from config import (
    AMP_MAX_ITER,
    AMP_OPT_TOL,
    BENCH_THRESHOLDS,
    CLI_MESSAGES,
    COMMAND_KEYS,
    DEFAULT_OUT_DIR,
    DEFAULT_SEED,
    EXIT_OK,
    EXIT_UNEXPECTED,
    LOG_FORMAT,
    LOG_LEVEL,
    MSE_N_SEEDS,
    REFERENCE_TARGET,
    SE_DELTA,
    SE_FP_TOL,
    SE_MAX_FP_ITER,
    SE_MC_REPS,
    SE_P,
    SEED_ENV_VAR,
)
from handlers.commands import COMMANDS
from models.run_config import RunConfig
from utils.errors import SlopeAmpError
from utils.helpers import format_duration, read_json

logger = logging.getLogger(__name__)

HELP_EPILOG = f"""
config file: flat JSON object with a "command" key ({', '.join(COMMAND_KEYS)})
  accepted keys per command:
""" + "\n".join(f"    {cmd:<10} {', '.join(keys)}" for cmd, keys in COMMAND_KEYS.items()) + f"""

defaults:
  seed {DEFAULT_SEED} (precedence: --seed > ${SEED_ENV_VAR} > config file)
  out {DEFAULT_OUT_DIR}/
  p_se {SE_P}, mc_reps {SE_MC_REPS}, fp_tol {SE_FP_TOL:g}, max_fp_iter {SE_MAX_FP_ITER}, delta {SE_DELTA}
  max_iter {AMP_MAX_ITER}, opt_tol {AMP_OPT_TOL:g}
  thresholds {', '.join(f'{t:g}' for t in BENCH_THRESHOLDS)}; reference / target '{REFERENCE_TARGET}'
  n_seeds {MSE_N_SEEDS}

sequences (lambda, alpha, theta): a list, a vector file path, or
  {{"kind": "explicit", "values": [...]}}, {{"kind": "constant", "value": c}},
  {{"kind": "linear", "start": a, "stop": b}}, {{"kind": "bhq", "q": q, "scale": s}};
  se alpha also accepts {{"kind": "amin_multiple", "direction": <sequence>, "factor": f}}
priors: {{"kind": "bernoulli_gaussian", "eps": e, "sigma_b": s}}, {{"kind": "point_mass", "value": v}},
  {{"kind": "empirical", "sample": [...]}} or {{"kind": "empirical", "sample_file": path}}

exit codes: 0 ok, 1 unexpected, 2 config, 3 numeric failure, 4 non-convergence, 5 calibration
"""


class SlopeAmpCli:
    def __init__(self):
        self.parser = self.build_parser()
        self.handlers = {}

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog='slope-amp',
            description='SLOPE regression via approximate message passing',
            epilog=HELP_EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter
        )
        parser.add_argument('--config', required=True, help='Path to the JSON run configuration')
        parser.add_argument('--seed', type=int, default=None, help='Base seed (unsigned 64-bit)')
        parser.add_argument('--threads', type=int, default=None,
                            help='Worker cap for Monte-Carlo replicates and seeds (results do not depend on it)')
        parser.add_argument('--out', default=None, help=f'Output directory (default: {DEFAULT_OUT_DIR})')
        parser.add_argument('--log-level', default=LOG_LEVEL,
                            choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Logging level')
        return parser

    def setup_handlers(self):
        """Register one handler per command"""
        self.handlers = dict(COMMANDS)

    def error_handler(self, error: Exception) -> int:
        """Log the failure and map it to its exit code"""
        if isinstance(error, SlopeAmpError):
            logger.error(CLI_MESSAGES[error.message_key].format(error=error))
            return error.exit_code
        logger.exception(CLI_MESSAGES['unexpected'].format(error=error))
        return EXIT_UNEXPECTED

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Run one command and return the process exit code"""
        args = self.parser.parse_args(argv)
        logging.basicConfig(format=LOG_FORMAT, level=getattr(logging, args.log_level))
        self.setup_handlers()

        started = time.monotonic()
        try:
            data = read_json(args.config)
            cfg = RunConfig.from_dict(
                data,
                seed=args.seed,
                threads=args.threads,
                out=args.out,
                base_dir=os.path.dirname(os.path.abspath(args.config))
            )
            logger.info(CLI_MESSAGES['start'].format(
                command=cfg.command, seed=cfg.seed, threads=cfg.threads or 'auto', out=cfg.out
            ))
            written = self.handlers[cfg.command](cfg)
        except Exception as e:
            return self.error_handler(e)

        for path in written:
            logger.info(CLI_MESSAGES['written'].format(path=path))
        logger.info(CLI_MESSAGES['done'].format(command=cfg.command, out=cfg.out)
                    + f" in {format_duration(time.monotonic() - started)}")
        return EXIT_OK


def main():
    sys.exit(SlopeAmpCli().run())


if __name__ == "__main__":
    main()
