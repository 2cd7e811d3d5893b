"""Phase-transition sweeps over synthetic recovery problems.

A grid enumerates (n, rank, ratio, sampler) cells; each cell runs a fixed
number of seeded trials and reports the empirical success probability.
For completion the ratio is the oversampling factor m / (r (n1+n2-r));
for robust PCA it is the corruption fraction.  Per-trial seeds derive
from (master seed, cell index, trial index) alone, so results never
depend on scheduling and a parallel run reproduces a serial one.
"""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .instances import make_mc_instance, make_rpca_instance
from .rng import derive_seed
from .solvers import SolverConfig, solve_mc_bidual, solve_rpca_bidual

GRID_SCHEMA_VERSION = 1

CSV_COLUMNS = ("problem", "n1", "n2", "rank", "ratio", "sampler", "m",
               "trials", "successes", "success_rate", "mean_rel_error",
               "mean_iterations", "errors")

_SAMPLERS = ("uniform", "bernoulli")


@dataclass(frozen=True)
class PhaseGrid:
    """Sweep definition; cells = product of n x rank x ratio x sampler."""

    problem: str = "mc"
    n: tuple = (40,)
    rank: tuple = (2,)
    ratio: tuple = (6.0,)
    sampler: tuple = ("uniform",)
    trials: int = 20
    threshold: float = 1e-4
    max_iters: int = 2000
    tol: float = 1e-9

    def __post_init__(self):
        if self.problem not in ("mc", "rpca"):
            raise ValueError(f"unknown problem: {self.problem!r}")
        for name in ("n", "rank", "ratio", "sampler"):
            seq = tuple(getattr(self, name))
            if not seq:
                raise ValueError(f"{name} must be a nonempty list")
            object.__setattr__(self, name, seq)
        if any(int(v) < 1 for v in self.n) or any(int(v) < 1 for v in self.rank):
            raise ValueError("n and rank entries must be positive")
        if any(float(v) <= 0 for v in self.ratio):
            raise ValueError("ratio entries must be positive")
        for s in self.sampler:
            if s not in _SAMPLERS:
                raise ValueError(f"unknown sampler: {s!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")

    def cells(self) -> list:
        out = []
        index = 0
        for n in self.n:
            for r in self.rank:
                for ratio in self.ratio:
                    for sampler in self.sampler:
                        out.append({"index": index, "n": int(n),
                                    "rank": int(r), "ratio": float(ratio),
                                    "sampler": sampler})
                        index += 1
        return out

    @classmethod
    def from_json(cls, path) -> "PhaseGrid":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ParseError(path, 0, 0, f"cannot read file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, exc.colno, exc.msg) from exc
        if not isinstance(data, dict):
            raise ParseError(path, 1, 1, "grid config must be a JSON object")
        version = data.pop("schema_version", GRID_SCHEMA_VERSION)
        if version != GRID_SCHEMA_VERSION:
            raise ParseError(path, 1, 1,
                             f"unsupported schema_version {version!r}")
        known = {"problem", "n", "rank", "ratio", "sampler", "trials",
                 "threshold", "max_iters", "tol"}
        unknown = set(data) - known
        if unknown:
            raise ParseError(path, 1, 1,
                             f"unknown grid keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ParseError(path, 1, 1, str(exc)) from exc

    def to_json_dict(self) -> dict:
        return {"schema_version": GRID_SCHEMA_VERSION,
                "problem": self.problem, "n": list(self.n),
                "rank": list(self.rank), "ratio": list(self.ratio),
                "sampler": list(self.sampler), "trials": self.trials,
                "threshold": self.threshold, "max_iters": self.max_iters,
                "tol": self.tol}


def cell_samples(problem: str, n: int, rank: int, ratio: float) -> int:
    """Observation count (mc) or corruption count (rpca) for a cell."""
    if problem == "mc":
        m = int(round(ratio * rank * (2 * n - rank)))
        return max(1, min(m, n * n))
    return max(0, min(int(round(ratio * n * n)), n * n))


def _run_cell(args) -> dict:
    grid_dict, cell, master_seed = args
    grid = PhaseGrid(**grid_dict)
    n, rank, ratio = cell["n"], cell["rank"], cell["ratio"]
    sampler = cell["sampler"]
    m = cell_samples(grid.problem, n, rank, ratio)
    cfg = SolverConfig(max_iters=grid.max_iters, tol=grid.tol)
    spectrum = (1.0,) * rank

    successes = 0
    rel_errors = []
    iterations = []
    errors = 0
    for trial in range(grid.trials):
        seed = derive_seed(master_seed, cell["index"], trial)
        try:
            if grid.problem == "mc":
                inst = make_mc_instance(n, n, rank, spectrum, m=m,
                                        sampler=sampler, seed=seed)
                rep = solve_mc_bidual(inst.obs, inst.obs_values, rank, cfg)
                scale = np.linalg.norm(inst.x_star)
                rel = float(np.linalg.norm(rep.solution - inst.x_star) / scale)
            else:
                model = ("signed_uniform" if sampler == "uniform"
                         else "bernoulli_sign")
                inst = make_rpca_instance(n, n, rank, spectrum, m_corr=m,
                                          model=model, seed=seed)
                rep = solve_rpca_bidual(inst.d, rank, inst.lambda_default, cfg)
                scale = np.linalg.norm(inst.x_star)
                rel = float(np.linalg.norm(rep.solution - inst.x_star) / scale)
                s_scale = max(1.0, float(np.linalg.norm(inst.s_star)))
                rel = max(rel, float(
                    np.linalg.norm(rep.solution_sparse - inst.s_star) / s_scale))
        except Exception:
            errors += 1
            continue
        rel_errors.append(rel)
        iterations.append(rep.iterations_run)
        successes += rel <= grid.threshold

    done = len(rel_errors)
    return {"problem": grid.problem, "n1": n, "n2": n, "rank": rank,
            "ratio": ratio, "sampler": sampler, "m": m,
            "trials": grid.trials, "successes": successes,
            "success_rate": successes / grid.trials,
            "mean_rel_error": float(np.mean(rel_errors)) if done else float("nan"),
            "mean_iterations": float(np.mean(iterations)) if done else float("nan"),
            "errors": errors}


def run_grid(grid: PhaseGrid, master_seed: int = 0, jobs: int = 1) -> list:
    """Run every cell; returns rows in cell-enumeration order.

    Trial seeds depend only on (master_seed, cell index, trial index), so
    any jobs count produces identical rows.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    payload = [(_grid_kwargs(grid), cell, master_seed)
               for cell in grid.cells()]
    if jobs == 1 or len(payload) == 1:
        return [_run_cell(p) for p in payload]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell, payload))


def _grid_kwargs(grid: PhaseGrid) -> dict:
    d = grid.to_json_dict()
    d.pop("schema_version")
    return d


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, rows) -> None:
    """Fixed-schema CSV; header mandatory, UTF-8, newline-terminated lines."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in CSV_COLUMNS])


def read_csv(path) -> list:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ParseError(path, 1, 1, "unexpected CSV header")
        return [dict(zip(CSV_COLUMNS, row)) for row in reader]
