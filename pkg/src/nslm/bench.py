"""Side-by-side runs of the exact- and inexact-projection variants on random CAVEs."""

from __future__ import annotations

import csv
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .cave import default_start, generate_instance
from .ilmm import solve
from .problem import SolverConfig

RUNS_HEADER = ["n", "seed", "method", "iterations", "time_s", "status", "final_residual"]
TABLE_HEADER = ["n", "seed", "ep_it", "ep_time", "ip_it", "ip_time", "flag"]
METHODS = {"ilmm-ep": "exact", "ilmm-ip": "inexact"}


@dataclass(frozen=True)
class RunRecord:
    n: int
    seed: int
    method: str
    iterations: int
    time_s: float
    status: str
    final_residual: float
    max_violation: float

    @property
    def converged(self) -> bool:
        return self.status == "Converged"


def config_for(method: str, base: SolverConfig) -> SolverConfig:
    return replace(base, projection_mode=METHODS[method])


def max_violation(trace, d: float) -> float:
    """Largest bound or cap violation over a list of iterates."""
    worst = 0.0
    for x in trace:
        worst = max(worst, float(-x.min()), float(x.sum() - d))
    return worst


def run_case(n: int, seed: int, density: float, base: SolverConfig) -> list[RunRecord]:
    inst = generate_instance(n, density, seed)
    problem = inst.to_problem()
    out = []
    for method in METHODS:
        rep = solve(problem, default_start(inst), config_for(method, base))
        out.append(RunRecord(n, seed, method, rep.iterations, rep.time_s, rep.status.value,
                             rep.final_residual, max_violation(rep.trace, inst.d)))
    return out


def _run_case_args(args):
    return run_case(*args)


def run_bench(sizes, repeats: int, seed_base: int = 0, density: float = 0.05,
              config: SolverConfig | None = None, jobs: int = 1) -> list[RunRecord]:
    """One instance per (size, repeat) with seed ``seed_base + repeat``; both methods on each."""
    config = config or SolverConfig()
    cases = [(n, seed_base + r, density, config) for n in sizes for r in range(repeats)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_case_args, cases))
    else:
        chunks = [run_case(*c) for c in cases]
    return [rec for chunk in chunks for rec in chunk]


def _median(values):
    return statistics.median(values) if values else float("nan")


def comparison_rows(records: list[RunRecord]) -> list[dict]:
    """Wide rows per (n, seed) followed by one median row per n.

    Runs that did not converge are flagged and left out of the medians.
    """
    by_case: dict[tuple[int, int], dict[str, RunRecord]] = {}
    for rec in records:
        by_case.setdefault((rec.n, rec.seed), {})[rec.method] = rec
    rows = []
    for (n, seed), recs in by_case.items():
        ep, ip = recs["ilmm-ep"], recs["ilmm-ip"]
        flags = [f"{m}:{r.status}" for m, r in recs.items() if not r.converged]
        rows.append({"n": n, "seed": seed, "ep_it": ep.iterations, "ep_time": ep.time_s,
                     "ip_it": ip.iterations, "ip_time": ip.time_s, "flag": ";".join(flags)})
    sizes = list(dict.fromkeys(r.n for r in records))
    for n in sizes:
        summary = {"n": n, "seed": "median", "flag": ""}
        for key, method in (("ep", "ilmm-ep"), ("ip", "ilmm-ip")):
            ok = [r for r in records if r.n == n and r.method == method and r.converged]
            summary[f"{key}_it"] = _median([r.iterations for r in ok])
            summary[f"{key}_time"] = _median([r.time_s for r in ok])
        rows.append(summary)
    return rows


def summary_rows(rows: list[dict]) -> list[dict]:
    return [r for r in rows if r["seed"] == "median"]


def write_runs_csv(records: list[RunRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUNS_HEADER)
        for r in records:
            w.writerow([r.n, r.seed, r.method, r.iterations, f"{r.time_s:.6f}", r.status,
                        f"{r.final_residual:.6e}"])


def write_table_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TABLE_HEADER)
        w.writeheader()
        for row in rows:
            row = dict(row)
            for key in ("ep_time", "ip_time"):
                row[key] = f"{row[key]:.6f}"
            w.writerow(row)


def format_table(rows: list[dict]) -> str:
    """Aligned text version of :func:`comparison_rows`."""
    lines = [f"{'n':>6} {'seed':>7} | {'EP it':>6} {'EP time':>9} | {'IP it':>6} {'IP time':>9}  flag"]
    lines.append("-" * len(lines[0]))
    for r in rows:
        lines.append(f"{r['n']:>6} {str(r['seed']):>7} | {r['ep_it']:>6g} {r['ep_time']:>9.3f} | "
                     f"{r['ip_it']:>6g} {r['ip_time']:>9.3f}  {r['flag']}")
    return "\n".join(lines)
