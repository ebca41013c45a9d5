"""
Solver trace, benchmark report and MSE report models
"""

import math
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config import BENCH_REPORT_COLUMNS, MSE_REPORT_COLUMNS, TRACE_COLUMNS


class SolverTrace:
    """Per-iteration records of one solver run plus its final iterate"""

    def __init__(
        self,
        solver: str,
        records: Optional[List[dict]] = None,
        beta: Optional[np.ndarray] = None,
        iterations: int = 0,
        converged: bool = False
    ):
        self.solver = solver
        self.records = records if records is not None else []
        self.beta = beta
        self.iterations = int(iterations)
        self.converged = bool(converged)

    def add(self, **record):
        self.records.append(record)

    def column(self, name: str) -> np.ndarray:
        """Values of one metric over iterations (nan where not recorded)"""
        return np.array([r.get(name, np.nan) for r in self.records], dtype=float)

    def first_iter(self, name: str, threshold: float) -> Optional[int]:
        """First iteration t >= 1 with metric <= threshold, None if never"""
        for record in self.records:
            if record.get('iter', 0) < 1:
                continue
            value = record.get(name)
            if value is not None and not math.isnan(value) and value <= threshold:
                return int(record['iter'])
        return None

    def to_frame(self) -> pd.DataFrame:
        """Trace rows with the stable trace columns"""
        rows = [{col: r.get(col, np.nan) for col in TRACE_COLUMNS if col != 'solver'}
                for r in self.records]
        frame = pd.DataFrame(rows, columns=[c for c in TRACE_COLUMNS if c != 'solver'])
        frame.insert(0, 'solver', self.solver)
        return frame

    def to_dict(self) -> dict:
        """Convert trace to dictionary"""
        return {
            'solver': self.solver,
            'iterations': self.iterations,
            'converged': self.converged,
            'records': self.records,
            'beta': None if self.beta is None else self.beta.tolist()
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'SolverTrace':
        """Create trace from dictionary"""
        beta = data.get('beta')
        return cls(
            solver=data.get('solver', ''),
            records=data.get('records', []),
            beta=None if beta is None else np.array(beta, dtype=float),
            iterations=data.get('iterations', 0),
            converged=data.get('converged', False)
        )

    def __str__(self) -> str:
        return f"SolverTrace(solver={self.solver}, iterations={self.iterations}, converged={self.converged})"

    def __repr__(self) -> str:
        return self.__str__()


class BenchReport:
    def __init__(
        self,
        thresholds: List[float],
        first_iters: Dict[str, Dict[float, Optional[int]]],
        set_diff_iters: Dict[str, Optional[int]],
        traces: Dict[str, SolverTrace],
        meta: Optional[dict] = None
    ):
        self.thresholds = sorted(thresholds, reverse=True)
        self.first_iters = first_iters
        self.set_diff_iters = set_diff_iters
        self.traces = traces
        # calibration and target details of the run
        self.meta = meta if meta is not None else {}

    @classmethod
    def from_traces(
        cls,
        traces: Dict[str, SolverTrace],
        thresholds: List[float],
        meta: Optional[dict] = None
    ) -> 'BenchReport':
        first_iters = {
            name: {t: trace.first_iter('opt_error', t) for t in thresholds}
            for name, trace in traces.items()
        }
        set_diff_iters = {name: trace.first_iter('set_diff', 0) for name, trace in traces.items()}
        return cls(thresholds, first_iters, set_diff_iters, traces, meta)

    @property
    def solvers(self) -> List[str]:
        return list(self.first_iters)

    def is_monotone(self) -> bool:
        """First-hit iterations never decrease as the threshold tightens"""
        for iters in self.first_iters.values():
            hits = [iters[t] for t in self.thresholds]
            hits = [math.inf if h is None else h for h in hits]
            if any(b < a for a, b in zip(hits, hits[1:])):
                return False
        return True

    def report_frame(self) -> pd.DataFrame:
        """Rows (solver, threshold, first_iter); set-difference rows use threshold 'set_diff'"""
        rows = []
        for solver, iters in self.first_iters.items():
            for t in self.thresholds:
                rows.append({'solver': solver, 'threshold': t, 'first_iter': iters[t]})
            rows.append({'solver': solver, 'threshold': 'set_diff',
                         'first_iter': self.set_diff_iters[solver]})
        return pd.DataFrame(rows, columns=BENCH_REPORT_COLUMNS)

    def trace_frame(self) -> pd.DataFrame:
        frames = [trace.to_frame() for trace in self.traces.values()]
        if not frames:
            return pd.DataFrame(columns=TRACE_COLUMNS)
        return pd.concat(frames, ignore_index=True)

    def to_dict(self) -> dict:
        """Convert report to dictionary"""
        return {
            'thresholds': self.thresholds,
            'first_iters': {s: {str(t): i for t, i in it.items()} for s, it in self.first_iters.items()},
            'set_diff_iters': self.set_diff_iters,
            'meta': self.meta
        }

    def __str__(self) -> str:
        parts = [f"{s}@{self.thresholds[-1]:g}={self.first_iters[s][self.thresholds[-1]]}"
                 for s in self.solvers]
        return f"BenchReport({', '.join(parts)})"

    def __repr__(self) -> str:
        return self.__str__()


class MseReport:
    def __init__(
        self,
        n: int,
        p: int,
        sigma_w: float,
        empirical_mse: float,
        stderr: float,
        predicted_mse: float,
        per_seed: Optional[List[float]] = None,
        tau_star_sq: Optional[float] = None
    ):
        self.n = int(n)
        self.p = int(p)
        self.sigma_w = float(sigma_w)
        self.empirical_mse = float(empirical_mse)
        self.stderr = float(stderr)
        self.predicted_mse = float(predicted_mse)
        self.per_seed = per_seed if per_seed is not None else []
        self.tau_star_sq = tau_star_sq

    @property
    def delta(self) -> float:
        return self.n / self.p

    @property
    def single_seed(self) -> bool:
        return len(self.per_seed) <= 1

    @property
    def relative_error(self) -> float:
        if self.predicted_mse == 0:
            return 0.0 if self.empirical_mse == 0 else math.inf
        return abs(self.empirical_mse - self.predicted_mse) / self.predicted_mse

    def to_frame(self) -> pd.DataFrame:
        row = {
            'n': self.n,
            'p': self.p,
            'delta': self.delta,
            'sigma_w': self.sigma_w,
            'empirical_mse': self.empirical_mse,
            'stderr': self.stderr,
            'predicted_mse': self.predicted_mse
        }
        return pd.DataFrame([row], columns=MSE_REPORT_COLUMNS)

    def to_dict(self) -> dict:
        """Convert report to dictionary"""
        return {
            'n': self.n,
            'p': self.p,
            'delta': self.delta,
            'sigma_w': self.sigma_w,
            'empirical_mse': self.empirical_mse,
            'stderr': self.stderr,
            'predicted_mse': self.predicted_mse,
            'per_seed': list(self.per_seed),
            'tau_star_sq': self.tau_star_sq
        }

    def __str__(self) -> str:
        return (f"MseReport(empirical={self.empirical_mse:.6g}+-{self.stderr:.2g}, "
                f"predicted={self.predicted_mse:.6g})")

    def __repr__(self) -> str:
        return self.__str__()
