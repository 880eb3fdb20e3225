"""Seeded generation of small random learning problems."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .problem import FiniteProblem, Marginal, fraction_str, validate_problem


@dataclass(frozen=True)
class CorpusSpec:
    count: int = 50
    seed: int = 7
    points: tuple = (2, 4)
    labels: tuple = (2, 3)
    hypotheses: tuple = (2, 6)
    sample_sizes: tuple = (1, 3)
    max_denominator: int = 20
    marginal_modes: tuple = ("uniform", "random")

    def __post_init__(self):
        for lo, hi in (self.points, self.labels, self.hypotheses, self.sample_sizes):
            if lo > hi:
                raise ValueError("empty range in corpus spec")
        if self.points[0] < 1 or self.labels[0] < 2 or self.hypotheses[0] < 1 or self.sample_sizes[0] < 1:
            raise ValueError("corpus ranges out of bounds")


@dataclass(frozen=True)
class CorpusInstance:
    name: str
    raw: dict
    problem: FiniteProblem
    marginal: Marginal
    marginal_id: str
    n: int


def _random_marginal(rng: random.Random, size: int, max_den: int) -> list:
    den = rng.randint(2, max_den)
    cuts = sorted(rng.randint(0, den) for _ in range(size - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return [Fraction(p, den) for p in parts]


def generate_instance(rng: random.Random, spec: CorpusSpec, name: str) -> CorpusInstance:
    n_points = rng.randint(*spec.points)
    n_labels = rng.randint(*spec.labels)
    n_hyp = rng.randint(spec.hypotheses[0], min(spec.hypotheses[1], n_labels**n_points))
    codes = rng.sample(range(n_labels**n_points), n_hyp)
    rows = []
    for code in codes:
        row = []
        for _ in range(n_points):
            code, digit = divmod(code, n_labels)
            row.append(str(digit))
        rows.append(row)
    if rng.random() < 0.5:
        loss = "zero_one"
    else:
        # off-diagonal entries in [1/2, 1] always satisfy the triangle inequality
        loss = [[Fraction(0)] * n_labels for _ in range(n_labels)]
        for a in range(n_labels):
            for b in range(a + 1, n_labels):
                loss[a][b] = loss[b][a] = Fraction(rng.randint(10, 20), 20)
        loss = [[fraction_str(v) for v in row] for row in loss]
    mode = rng.choice(spec.marginal_modes)
    if mode == "uniform":
        weights = [Fraction(1, n_points)] * n_points
    else:
        weights = _random_marginal(rng, n_points, spec.max_denominator)
    raw = {
        "domain": [f"x{i + 1}" for i in range(n_points)],
        "labels": [str(y) for y in range(n_labels)],
        "hypotheses": rows,
        "loss": loss,
        "marginals": {mode: [fraction_str(w) for w in weights]},
    }
    problem = validate_problem(raw)
    n = rng.randint(*spec.sample_sizes)
    return CorpusInstance(name, raw, problem, problem.marginal(mode), mode, n)


def generate_corpus(spec: CorpusSpec) -> list:
    rng = random.Random(spec.seed)
    return [generate_instance(rng, spec, f"inst{i:03d}") for i in range(spec.count)]
