"""Error norms, convergence studies and text emitters."""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DomainError
from .problems import check_manufactured, get_problem
from .solver import ProblemSpec, SchemeConfig, SolutionHistory, run
from .spline import ConsistencyCoefficients, Mesh, optimal_consistency_coefficients

__all__ = [
    "ErrorReport",
    "ConvergenceRow",
    "ConvergenceTable",
    "error_norms",
    "order",
    "fit_order",
    "solve_problem",
    "convergence_study",
    "temporal_study",
    "emit_table",
    "emit_solution_dump",
]


@dataclass(frozen=True)
class ErrorReport:
    """Maximum nodal error and the relative discrete L2 error.

    ``l2 = sqrt(sum |y_i - Y_i|**2 / sum |y_i|**2)`` with ``y`` exact, without
    mesh weighting.
    """

    linf: float
    l2: float
    n: int | None = None
    dt: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    t_eval: float | None = None


def error_norms(numeric, exact, **params) -> ErrorReport:
    numeric = np.asarray(numeric, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if numeric.shape != exact.shape:
        raise ValueError("numeric and exact must have the same shape")
    diff = numeric - exact
    denom = float(np.sum(exact**2))
    if denom == 0.0:
        raise ZeroDivisionError("exact solution vanishes identically; L2 undefined")
    return ErrorReport(
        linf=float(np.max(np.abs(diff))),
        l2=math.sqrt(float(np.sum(diff**2)) / denom),
        **params,
    )


def order(err_coarse: float, err_fine: float) -> float:
    """``log2(err_coarse / err_fine)``; ``inf`` when the fine error is zero."""
    if err_fine == 0.0:
        return math.inf if err_coarse > 0.0 else math.nan
    if err_coarse == 0.0:
        return -math.inf
    return math.log2(err_coarse / err_fine)


def fit_order(steps: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``(slope, constant)`` of ``log err = log C + slope log step``."""
    slope, intercept = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope), float(math.exp(intercept))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    dt: float
    linf: float
    l2: float
    chi_linf: float | None = None
    chi_l2: float | None = None
    stable: bool = True


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    gamma: float | None = None
    label: str = ""

    @property
    def chi_linf(self) -> list[float]:
        return [r.chi_linf for r in self.rows[1:]]

    @property
    def chi_l2(self) -> list[float]:
        return [r.chi_l2 for r in self.rows[1:]]


def _table(results: Iterable[tuple[int, float, ErrorReport]], gamma, label) -> ConvergenceTable:
    rows: list[ConvergenceRow] = []
    prev = None
    for n, dt, rep in results:
        stable = math.isfinite(rep.linf) and math.isfinite(rep.l2)
        if prev is None:
            chi_inf = chi_2 = None
        else:
            chi_inf = order(prev.linf, rep.linf)
            chi_2 = order(prev.l2, rep.l2)
        row = ConvergenceRow(n, dt, rep.linf, rep.l2, chi_inf, chi_2, stable)
        rows.append(row)
        prev = rep
    return ConvergenceTable(tuple(rows), gamma=gamma, label=label)


def solve_problem(
    problem: ProblemSpec,
    n: int,
    dt: float,
    coeffs: ConsistencyCoefficients | None = None,
    theta: float = 0.0,
) -> tuple[SolutionHistory, ErrorReport | None]:
    """Run one configuration; compare with the exact solution at ``t = T`` if known."""
    mesh = Mesh.from_steps(n, dt, L=problem.L, T=problem.T)
    config = SchemeConfig(mesh, coeffs or optimal_consistency_coefficients(), theta)
    history = run(problem, config)
    report = None
    if problem.exact is not None:
        with np.errstate(over="ignore", invalid="ignore"):
            report = error_norms(
                history.final,
                problem.exact(mesh.x, problem.T),
                n=n,
                dt=mesh.dt,
                gamma=problem.gamma,
                alpha=problem.alpha,
                t_eval=problem.T,
            )
    return history, report


def _resolve(problem, gamma) -> ProblemSpec:
    if isinstance(problem, ProblemSpec):
        return problem
    if callable(problem):
        return problem(gamma)
    return get_problem(problem, gamma)


def _gate(problem: ProblemSpec) -> None:
    if problem.solution is not None:
        check_manufactured(problem)


def convergence_study(
    problem,
    gammas: Sequence[float],
    n_list: Sequence[int],
    dt_rule: float | str = "h",
    coeffs: ConsistencyCoefficients | None = None,
    theta: float = 0.0,
    workers: int = 1,
) -> list[ConvergenceTable]:
    """Spatial refinement study, one table per fractional order.

    ``problem`` is a problem index, a factory ``gamma -> ProblemSpec`` or a
    fixed :class:`ProblemSpec`.  ``dt_rule`` is either a fixed step or
    ``"h"`` to tie the time step to the mesh width.  Manufactured problems
    must pass the PDE-residual check before any run starts.
    """
    n_list = [int(n) for n in n_list]
    if any(b != 2 * a for a, b in zip(n_list, n_list[1:])):
        raise ValueError(f"n_list must double at every step, got {n_list}")
    if dt_rule != "h" and not (isinstance(dt_rule, (int, float)) and dt_rule > 0):
        raise DomainError(f"dt_rule must be 'h' or a positive step, got {dt_rule!r}")

    problems = [_resolve(problem, g) for g in gammas]
    for p in problems:
        _gate(p)

    tables = []
    for p in problems:
        def one(n, p=p):
            dt = p.L / n if dt_rule == "h" else float(dt_rule)
            _, rep = solve_problem(p, n, dt, coeffs, theta)
            return n, rep.dt, rep

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, n_list))
        else:
            results = [one(n) for n in n_list]
        tables.append(_table(results, p.gamma, p.name))
    return tables


def temporal_study(
    problem: ProblemSpec,
    n: int,
    k_list: Sequence[int],
    coeffs: ConsistencyCoefficients | None = None,
    theta: float = 0.0,
) -> ConvergenceTable:
    """Refine the time step at fixed ``n``; orders are per halving of ``dt``."""
    _gate(problem)
    results = []
    for K in k_list:
        _, rep = solve_problem(problem, n, problem.T / K, coeffs, theta)
        results.append((n, rep.dt, rep))
    return _table(results, problem.gamma, problem.name)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.6g}"
    return str(v)


_COLUMNS = {
    "both": ("n", "dt", "linf", "chi_linf", "l2", "chi_l2"),
    "linf": ("n", "dt", "linf", "chi_linf"),
    "l2": ("n", "dt", "l2", "chi_l2"),
}


def emit_table(table: ConvergenceTable, format: str = "csv", norm: str = "both") -> str:
    """Render a convergence table as CSV or a markdown pipe table."""
    if not table.rows:
        raise ValueError("empty table")
    cols = _COLUMNS[norm]
    body = [[_fmt(getattr(r, c)) for c in cols] for r in table.rows]
    if format == "csv":
        lines = [",".join(cols)] + [",".join(r) for r in body]
        return "\n".join(lines) + "\n"
    if format == "markdown":
        widths = [max(len(c), *(len(r[i]) for r in body)) for i, c in enumerate(cols)]

        def line(cells):
            return "| " + " | ".join(s.rjust(w) for s, w in zip(cells, widths)) + " |"

        out = [line(cols), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        out += [line(r) for r in body]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown format {format!r}")


def emit_solution_dump(
    history: SolutionHistory,
    problem: ProblemSpec,
    mesh: Mesh | None = None,
    stride: int = 1,
    level_stride: int | None = None,
) -> str:
    """CSV ``x,t,numeric,exact,abs_error`` over a strided subset of the grid.

    Knots ``0, stride, 2 stride, ...`` are written for levels
    ``0, level_stride, ...`` and always for the final level.  Values are
    written with full precision; ``exact`` and ``abs_error`` stay empty when
    the problem has no exact solution.
    """
    mesh = mesh or history.mesh
    if stride < 1:
        raise ValueError("stride must be >= 1")
    level_stride = level_stride or stride
    x = mesh.x
    t = mesh.t
    knots = np.arange(0, mesh.n + 1, stride)
    levels = list(range(0, mesh.K + 1, level_stride))
    if levels[-1] != mesh.K:
        levels.append(mesh.K)

    buf = io.StringIO()
    buf.write("x,t,numeric,exact,abs_error\n")
    for p in levels:
        num = history.levels[p, knots]
        if problem.exact is not None:
            ex = np.asarray(problem.exact(x[knots], t[p]), dtype=float)
            err = np.abs(num - ex)
        tp = repr(float(t[p]))
        for j, i in enumerate(knots):
            head = f"{float(x[i])!r},{tp},{float(num[j])!r}"
            if problem.exact is not None:
                buf.write(f"{head},{float(ex[j])!r},{float(err[j])!r}\n")
            else:
                buf.write(f"{head},,\n")
    return buf.getvalue()
