"""Command-line driver: ``solve``, ``converge`` and ``verify``.

Settings may also come from a line-oriented ``key = value`` file passed
with ``--config``; flags given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .exceptions import DomainError, ManufacturedResidualError
from .harness import convergence_study, emit_solution_dump, emit_table, solve_problem
from .problems import check_manufactured, get_problem, manufactured_from_mapping
from .solver import stability_monitor
from .spline import consistency_coefficients_from_theta, optimal_consistency_coefficients

logger = logging.getLogger("fracbeam")


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes become underscores."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def parse_coeffs(text: str):
    """``optimal`` or ``theta=<v>`` to a ``(coefficients, theta)`` pair."""
    text = text.strip()
    if text == "optimal":
        return optimal_consistency_coefficients(), 0.0
    key, sep, value = text.partition("=")
    if key.strip() == "theta" and sep:
        theta = float(value)
        return consistency_coefficients_from_theta(theta), theta
    raise argparse.ArgumentTypeError(f"--coeffs must be 'optimal' or 'theta=<v>', got {text!r}")


def _float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def build_problem(spec: str, gamma: float, alpha: float | None, T: float):
    spec = str(spec)
    if spec.startswith("manufactured:"):
        mapping = read_config(spec.split(":", 1)[1])
        return manufactured_from_mapping(mapping, gamma, alpha, T)
    return get_problem(int(spec), gamma, alpha, T)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracbeam",
        description="Spline collocation solver for the time-fractional beam equation.",
    )
    parser.add_argument("--config", help="file of 'key = value' settings")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one configuration")
    s.add_argument("--problem", default="1", help="1, 2, 3 or manufactured:<file>")
    s.add_argument("--gamma", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--t-final", dest="t_final", type=float, default=1.0)
    s.add_argument("--coeffs", default="optimal", help="'optimal' or 'theta=<v>'")
    s.add_argument("--dump", help="write x,t,numeric,exact,abs_error CSV here")
    s.add_argument("--stride", type=int, default=1)

    c = sub.add_parser("converge", help="spatial refinement study")
    c.add_argument("--problem", default="2")
    c.add_argument("--gamma", type=_float_list, help="one value or a comma list")
    c.add_argument("--alpha", type=float)
    c.add_argument("--n", type=_int_list, help="comma list, doubling")
    c.add_argument("--dt", default="h", help="'h' or a fixed step")
    c.add_argument("--t-final", dest="t_final", type=float, default=1.0)
    c.add_argument("--coeffs", default="optimal")
    c.add_argument("--norm", choices=("linf", "l2", "both"), default="both")
    c.add_argument("--format", choices=("csv", "markdown"), default="csv")
    c.add_argument("--out", help="output file (default: stdout)")
    c.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", type=_int_list, help="comma list of check numbers")
    parser.commands = {"solve": s, "converge": c, "verify": v}
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    settings = read_config(known.config)
    args = parser.parse_args(argv)
    sub = parser.commands[args.command]
    converted = {}
    for action in sub._actions:
        if action.dest in settings:
            value = settings[action.dest]
            converted[action.dest] = action.type(value) if action.type else value
    sub.set_defaults(**converted)
    return parser.parse_args(argv)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise SystemExit(f"missing required setting(s): {', '.join('--' + m for m in missing)}")


def cmd_solve(args) -> int:
    _require(args, "gamma", "n", "dt")
    coeffs, theta = parse_coeffs(args.coeffs)
    problem = build_problem(args.problem, args.gamma, args.alpha, args.t_final)
    if problem.solution is not None:
        check_manufactured(problem)
    history, report = solve_problem(problem, args.n, args.dt, coeffs, theta)
    print(f"problem={problem.name} gamma={problem.gamma} alpha={problem.alpha} "
          f"n={args.n} dt={history.mesh.dt} T={problem.T}")
    if report is not None:
        print(f"linf={report.linf:.6e} l2={report.l2:.6e}")
    mon = stability_monitor(history, problem)
    print(f"stability monitor: {'ok' if mon.ok else 'VIOLATED'} (max ratio {mon.max_ratio:.4f})")
    if args.dump:
        text = emit_solution_dump(history, problem, stride=args.stride)
        Path(args.dump).write_text(text)
        logger.info("wrote %s", args.dump)
    return 0


def cmd_converge(args) -> int:
    _require(args, "gamma", "n")
    coeffs, theta = parse_coeffs(args.coeffs)
    dt_rule = "h" if str(args.dt).strip() == "h" else float(args.dt)

    def factory(g):
        return build_problem(args.problem, g, args.alpha, args.t_final)

    tables = convergence_study(
        factory, args.gamma, args.n, dt_rule, coeffs, theta, workers=args.workers
    )
    chunks = []
    for table in tables:
        text = emit_table(table, args.format, args.norm)
        if len(tables) > 1:
            head = f"# gamma = {table.gamma}\n" if args.format == "csv" else f"gamma = {table.gamma}\n\n"
            text = head + text
        chunks.append(text)
    out = "\n".join(chunks)
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_verify(args) -> int:
    from .verification import run_checks

    results = run_checks(args.only)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 0 if not failed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"solve": cmd_solve, "converge": cmd_converge, "verify": cmd_verify}[args.command]
    try:
        return handler(args)
    except (DomainError, ValueError, ManufacturedResidualError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
