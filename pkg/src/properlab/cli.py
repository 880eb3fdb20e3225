"""Command-line interface: validate, solve, certify and corpus.

Exit codes: 0 ok, 1 parse error, 2 invariant violation, 3 solver or
certification failure, 4 problem/solution hash mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .certify import FAIL, SKIP, CertifyOptions, certify, fmt, rows_failed, rows_to_csv
from .corpus import CorpusSpec, generate_corpus
from .errors import InvariantError, ProblemParseError, ProperLabError
from .game import EXACT, MW, SolverConfig, solve_game
from .problem import FiniteProblem
from .serialize import HashMismatch, load_problem, load_solution, save_problem, save_solution, solution_to_dict

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_SOLVER, EXIT_MISMATCH = 0, 1, 2, 3, 4
METHODS = {"exact": EXACT, "mw": MW}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ProblemParseError):
        return EXIT_PARSE
    if isinstance(exc, InvariantError):
        return EXIT_INVARIANT
    if isinstance(exc, HashMismatch):
        return EXIT_MISMATCH
    return EXIT_SOLVER


def _solve(problem: FiniteProblem, marginal: str | None, n: int, method: str, tol, cap):
    name = marginal or "uniform"
    marg = problem.marginal(name)
    cfg = SolverConfig(method=METHODS[method], tolerance=tol, cap=cap)
    return solve_game(problem, marg, n, cfg, marginal_id=name)


def cmd_validate(args) -> int:
    load_problem(args.problem)
    print("ok")
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    sol = _solve(problem, args.marginal, args.n, args.method, args.tol, args.cap)
    if args.out:
        save_solution(sol, problem, args.out)
    else:
        print(json.dumps(solution_to_dict(sol, problem), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_certify(args) -> int:
    problem = load_problem(args.problem)
    sol = load_solution(args.solution, problem)
    marg = problem.marginal(sol.marginal_id)
    opts = CertifyOptions(budget=args.budget, seed=args.seed, max_learners=args.max_learners, cap=args.cap)
    rows = certify(problem, sol, marg, opts)
    text = rows_to_csv(args.instance or Path(args.problem).stem, rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_SOLVER if rows_failed(rows) else EXIT_OK


SUMMARY_FIELDS = (
    "instance",
    "n",
    "marginal",
    "value",
    "factor2_witness",
    "factor2_ratio",
    "factor_e_ratio",
    "passed",
    "failed",
    "skipped",
    "observations",
    "status",
)


def _run_instance(job):
    inst, out_dir, opts = job
    target = Path(out_dir) / inst.name
    target.mkdir(parents=True, exist_ok=True)
    save_problem(inst.problem, target / "problem.json")
    summary = {"instance": inst.name, "n": inst.n, "marginal": inst.marginal_id}
    try:
        sol = solve_game(inst.problem, inst.marginal, inst.n, SolverConfig(cap=opts.cap), inst.marginal_id)
        save_solution(sol, inst.problem, target / "solution.json")
        # certify from the files on disk, as the certify command would
        problem = load_problem(target / "problem.json")
        sol = load_solution(target / "solution.json", problem)
        rows = certify(problem, sol, problem.marginal(sol.marginal_id), opts)
    except Exception as exc:  # recorded per instance; the corpus keeps going
        summary["status"] = f"error:{type(exc).__name__}"
        return summary, None
    (target / "certify.csv").write_text(rows_to_csv(inst.name, rows))
    f2 = next(r for r in rows if r.quantity.startswith("factor2:"))
    fe = next(r for r in rows if r.quantity == "factor_e")
    verdicts = [r.verdict for r in rows]
    summary.update(
        value=sol.value,
        factor2_witness=f2.quantity.split(":", 1)[1],
        factor2_ratio=f2.ratio,
        factor_e_ratio=fe.ratio,
        passed=verdicts.count("pass"),
        failed=verdicts.count(FAIL),
        skipped=verdicts.count(SKIP),
        observations=";".join(f"{r.quantity}={r.verdict}" for r in rows if r.verdict not in ("pass", FAIL, SKIP)),
        status="fail" if rows_failed(rows) else "ok",
    )
    return summary, rows


def run_corpus(spec: CorpusSpec, out_dir, opts: CertifyOptions, jobs: int = 1) -> list:
    """Generate, solve and certify every instance; returns the summary records."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    work = [(inst, str(out), opts) for inst in generate_corpus(spec)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_instance, work))
    else:
        results = [_run_instance(w) for w in work]
    summaries = [s for s, _ in results]
    _write_summary(out / "summary.csv", summaries)
    return summaries


def _max(values):
    values = [v for v in values if v is not None]
    return max(values) if values else None


def _write_summary(path: Path, summaries) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_FIELDS)
        for s in summaries:
            writer.writerow([s.get(k) if isinstance(s.get(k), str) else fmt(s.get(k)) for k in SUMMARY_FIELDS])
        ok = [s for s in summaries if s.get("status") == "ok"]
        writer.writerow(
            [
                "ALL",
                "",
                "",
                "",
                "",
                fmt(_max(s.get("factor2_ratio") for s in summaries)),
                fmt(_max(s.get("factor_e_ratio") for s in summaries)),
                sum(s.get("passed", 0) for s in summaries),
                sum(s.get("failed", 0) for s in summaries),
                sum(s.get("skipped", 0) for s in summaries),
                "",
                f"{len(ok)}/{len(summaries)} ok",
            ]
        )


def cmd_corpus(args) -> int:
    spec = CorpusSpec(count=args.count, seed=args.seed)
    opts = CertifyOptions(budget=args.budget, seed=args.seed, max_learners=args.max_learners, cap=args.cap)
    summaries = run_corpus(spec, args.out, opts, args.jobs)
    bad = [s["instance"] for s in summaries if s.get("status") != "ok"]
    print(f"{len(summaries) - len(bad)}/{len(summaries)} instances ok; summary in {Path(args.out) / 'summary.csv'}")
    return EXIT_SOLVER if bad else EXIT_OK


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="properlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=_positive, default=None, help="enumeration cap (default: $PROPERLAB_CAP or 2000000)")

    checking = argparse.ArgumentParser(add_help=False)
    checking.add_argument("--budget", type=_positive, default=300, help="prior-search evaluations")
    checking.add_argument("--seed", type=int, default=0)
    checking.add_argument("--max-learners", type=_positive, default=10**6, help="oracle enumeration budget")

    p = sub.add_parser("validate", help="check a problem file")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[common], help="solve the learning game")
    p.add_argument("problem")
    p.add_argument("--marginal", default=None, help="named marginal from the problem file (default: uniform)")
    p.add_argument("--n", type=_positive, default=1, help="sample size")
    p.add_argument("--method", choices=sorted(METHODS), default="exact")
    p.add_argument("--tol", type=_positive_float, default=None)
    p.add_argument("--out", default=None, help="solution file (default: stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", parents=[common, checking], help="check a solution and write a CSV report")
    p.add_argument("problem")
    p.add_argument("solution")
    p.add_argument("--instance", default=None, help="instance id in the report (default: problem file stem)")
    p.add_argument("--out", default=None, help="CSV report (default: stdout)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("corpus", parents=[common, checking], help="generate, solve and certify a random corpus")
    p.add_argument("--count", type=_positive, default=50)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_corpus, seed=7)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProperLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE if isinstance(exc, OSError) else EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
