"""JSON files for problems and solutions, bound together by content hashes.

Exact rationals are written as ``"p/q"`` strings and floats as JSON numbers,
so a reloaded solution compares equal to the one that was saved.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from .errors import ProblemParseError, ProperLabError
from .game import GameSolution
from .problem import FiniteProblem, fraction_str, to_fraction, validate_problem

SCHEMA_VERSION = 1


class HashMismatch(ProperLabError):
    """A solution file does not belong to the given problem, or was edited."""


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _digest(obj) -> str:
    return hashlib.sha256(_canonical(obj).encode()).hexdigest()


def problem_to_dict(problem: FiniteProblem) -> dict:
    """Canonical, fully explicit form of a problem (loss always as a matrix)."""
    return {
        "domain": list(problem.domain),
        "labels": list(problem.labels),
        "hypotheses": [[problem.labels[y] for y in row] for row in problem.hypotheses],
        "loss": [[fraction_str(v) for v in row] for row in problem.loss],
        "marginals": {
            name: [fraction_str(w) for w in m.weights] for name, m in sorted(problem.marginals.items())
        },
    }


def problem_hash(problem: FiniteProblem) -> str:
    return _digest(problem_to_dict(problem))


def read_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_problem(path) -> FiniteProblem:
    return validate_problem(read_json(path))


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def save_problem(problem: FiniteProblem, path) -> None:
    dump_json(problem_to_dict(problem), path)


def _encode_number(v):
    if isinstance(v, Fraction):
        return fraction_str(v)
    if isinstance(v, int):
        return str(v)
    return float(v)


def _decode_number(v):
    if isinstance(v, str):
        return to_fraction(v)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise ProblemParseError(f"not a number: {v!r}")


def solution_to_dict(sol: GameSolution, problem: FiniteProblem) -> dict:
    body = {
        "schema": SCHEMA_VERSION,
        "problem_hash": problem_hash(problem),
        "n": sol.n,
        "marginal_id": sol.marginal_id,
        "method": sol.method,
        "value": _encode_number(sol.value),
        "adversary_prior": [_encode_number(p) for p in sol.adversary_prior],
        "duality_gap": _encode_number(sol.duality_gap),
        "converged": sol.converged,
        "degenerate": sol.degenerate,
        "iterations": sol.iterations,
    }
    body["solution_hash"] = _digest(body)
    return body


def solution_from_dict(data, problem: FiniteProblem | None = None) -> GameSolution:
    """Rebuild a solution, checking its own hash and, if given, the problem's."""
    if not isinstance(data, dict):
        raise ProblemParseError("solution file must hold a JSON object")
    body = dict(data)
    stored = body.pop("solution_hash", None)
    if stored != _digest(body):
        raise HashMismatch("solution file content does not match its hash")
    if problem is not None and body.get("problem_hash") != problem_hash(problem):
        raise HashMismatch("solution was computed for a different problem")
    try:
        return GameSolution(
            value=_decode_number(body["value"]),
            adversary_prior=tuple(_decode_number(p) for p in body["adversary_prior"]),
            method=body["method"],
            duality_gap=_decode_number(body["duality_gap"]),
            n=int(body["n"]),
            marginal_id=body["marginal_id"],
            converged=bool(body["converged"]),
            degenerate=bool(body["degenerate"]),
            iterations=int(body["iterations"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemParseError(f"malformed solution file: {exc}") from None


def save_solution(sol: GameSolution, problem: FiniteProblem, path) -> None:
    dump_json(solution_to_dict(sol, problem), path)


def load_solution(path, problem: FiniteProblem | None = None) -> GameSolution:
    return solution_from_dict(read_json(path), problem)
