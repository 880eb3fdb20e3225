"""Finite realizable learning problems and their exact loss functionals.

A problem is a finite domain, a finite label set, a table of hypotheses
(one label per domain point) and a bounded metric loss on labels.  All
probabilities and losses are kept as :class:`fractions.Fraction` so that
every quantity computed here is exact.

Labeled samples are plain tuples of ``(point_index, label_index)`` pairs.
Predictors are ``|X| x |Y|`` row-stochastic tuples of fractions; a
deterministic predictor has one-hot rows.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import (
    DuplicateHypothesis,
    EmptyClass,
    EmptySample,
    EnumerationCapExceeded,
    InvalidMarginal,
    NonMetricLoss,
    OutOfRangeEntry,
    ProblemParseError,
)

DEFAULT_CAP = 2_000_000

Sample = tuple  # tuple[tuple[int, int], ...]
Predictor = tuple  # tuple[tuple[Fraction, ...], ...]


def default_cap() -> int:
    """Enumeration cap, overridable through ``PROPERLAB_CAP``."""
    raw = os.environ.get("PROPERLAB_CAP")
    return int(raw) if raw else DEFAULT_CAP


def to_fraction(value) -> Fraction:
    """Parse ``"p/q"`` strings, integers and finite decimals exactly."""
    if isinstance(value, bool):
        raise ProblemParseError(f"expected a rational, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # repr gives the shortest decimal that round-trips, which is what the
        # author of the file typed.
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ProblemParseError(f"bad rational {value!r}") from exc
    raise ProblemParseError(f"expected a rational, got {value!r}")


def fraction_str(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Marginal:
    """Probability vector over the domain points."""

    weights: tuple

    def __post_init__(self):
        weights = tuple(to_fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if not weights:
            raise InvalidMarginal("marginal has no entries")
        if any(w < 0 for w in weights):
            raise InvalidMarginal(f"negative weight in {weights}")
        if sum(weights) != 1:
            raise InvalidMarginal(f"weights sum to {sum(weights)}, not 1")

    @classmethod
    def uniform(cls, size: int) -> "Marginal":
        return cls((Fraction(1, size),) * size)

    @classmethod
    def empirical(cls, points: Sequence[int], size: int) -> "Marginal":
        """Uniform over the positions of ``points`` (multiplicities count)."""
        counts = [0] * size
        for x in points:
            counts[x] += 1
        return cls(tuple(Fraction(c, len(points)) for c in counts))

    @property
    def support(self) -> tuple:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]


@dataclass(frozen=True)
class FiniteProblem:
    domain: tuple
    labels: tuple
    hypotheses: tuple
    loss: tuple
    marginals: Mapping = field(default_factory=dict, compare=False, hash=False)

    @property
    def n_points(self) -> int:
        return len(self.domain)

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    @property
    def n_hypotheses(self) -> int:
        return len(self.hypotheses)

    def marginal(self, name: str | None) -> Marginal:
        if name is None or name == "uniform":
            if name in self.marginals:
                return self.marginals[name]
            return Marginal.uniform(self.n_points)
        try:
            return self.marginals[name]
        except KeyError:
            raise InvalidMarginal(f"no marginal named {name!r}") from None

    def label_sample(self, points: Sequence[int], truth: int) -> Sample:
        row = self.hypotheses[truth]
        return tuple((x, row[x]) for x in points)


def zero_one_loss(n_labels: int) -> tuple:
    return tuple(
        tuple(Fraction(int(a != b)) for b in range(n_labels)) for a in range(n_labels)
    )


def metric_violation(loss: Sequence[Sequence[Fraction]]):
    """Return ``(reason, label_indices)`` for the first metric axiom that fails."""
    k = len(loss)
    for a in range(k):
        if loss[a][a] != 0:
            return "nonzero diagonal", (a, a)
    for a, b in itertools.combinations(range(k), 2):
        if loss[a][b] <= 0:
            return "zero distance between distinct labels", (a, b)
        if loss[a][b] != loss[b][a]:
            return "asymmetric", (a, b)
    for a, c in itertools.product(range(k), repeat=2):
        for b in range(k):
            if loss[a][c] > loss[a][b] + loss[b][c]:
                return "triangle inequality", (a, b, c)
    return None


def _require(raw, key):
    try:
        return raw[key]
    except (KeyError, TypeError):
        raise ProblemParseError(f"missing field {key!r}") from None


def validate_problem(raw: Mapping) -> FiniteProblem:
    """Build a :class:`FiniteProblem` from a JSON-like mapping.

    Raises the first violated invariant: ``EmptyClass``, ``OutOfRangeEntry``,
    ``DuplicateHypothesis``, ``NonMetricLoss`` or ``InvalidMarginal``.
    """
    if not isinstance(raw, Mapping):
        raise ProblemParseError("problem description must be a mapping")
    domain = _require(raw, "domain")
    labels = _require(raw, "labels")
    hypotheses = _require(raw, "hypotheses")
    loss_raw = _require(raw, "loss")
    if isinstance(domain, int) and not isinstance(domain, bool):
        domain = [f"x{i + 1}" for i in range(domain)]
    if not isinstance(domain, list) or not isinstance(labels, list):
        raise ProblemParseError("domain and labels must be lists")
    if not isinstance(hypotheses, list):
        raise ProblemParseError("hypotheses must be a list of label lists")
    domain = tuple(str(d) for d in domain)
    labels = tuple(str(y) for y in labels)
    if len(set(domain)) != len(domain) or len(set(labels)) != len(labels):
        raise ProblemParseError("domain points and labels must be distinct")
    if not domain or not labels:
        raise ProblemParseError("domain and label set must be nonempty")
    if not hypotheses:
        raise EmptyClass("hypothesis class is empty")

    label_index = {y: i for i, y in enumerate(labels)}
    rows = []
    for h, row in enumerate(hypotheses):
        if not isinstance(row, list) or len(row) != len(domain):
            raise OutOfRangeEntry(f"hypothesis {h} must list one label per domain point")
        try:
            rows.append(tuple(label_index[str(y)] for y in row))
        except KeyError as exc:
            raise OutOfRangeEntry(f"hypothesis {h} emits unknown label {exc.args[0]!r}") from None

    if loss_raw == "zero_one":
        loss = zero_one_loss(len(labels))
    else:
        if not isinstance(loss_raw, list) or len(loss_raw) != len(labels):
            raise ProblemParseError("loss must be 'zero_one' or a |Y| x |Y| matrix")
        loss = []
        for row in loss_raw:
            if not isinstance(row, list) or len(row) != len(labels):
                raise ProblemParseError("loss must be a square |Y| x |Y| matrix")
            loss.append(tuple(to_fraction(v) for v in row))
        loss = tuple(loss)
        for a, row in enumerate(loss):
            for b, v in enumerate(row):
                if not 0 <= v <= 1:
                    raise OutOfRangeEntry(f"loss[{labels[a]}][{labels[b]}] = {v} outside [0, 1]")

    seen = {}
    for h, row in enumerate(rows):
        if row in seen:
            raise DuplicateHypothesis(seen[row], h)
        seen[row] = h

    bad = metric_violation(loss)
    if bad is not None:
        reason, idx = bad
        raise NonMetricLoss(reason, [labels[i] for i in idx])

    marginals = {}
    for name, weights in (raw.get("marginals") or {}).items():
        if not isinstance(weights, list) or len(weights) != len(domain):
            raise InvalidMarginal(f"marginal {name!r} must have one weight per point")
        marginals[str(name)] = Marginal(tuple(to_fraction(w) for w in weights))

    return FiniteProblem(domain, labels, tuple(rows), loss, marginals)


def deterministic_predictor(row: Sequence[int], n_labels: int) -> Predictor:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if y == lab else zero for y in range(n_labels)) for lab in row)


def hypothesis_predictor(problem: FiniteProblem, h: int) -> Predictor:
    return deterministic_predictor(problem.hypotheses[h], problem.n_labels)


def _expected_loss(dist: Sequence[Fraction], target: int, loss) -> Fraction:
    return sum((p * loss[y][target] for y, p in enumerate(dist) if p), Fraction(0))


def empirical_risk(pred: Predictor, sample: Sample, problem: FiniteProblem) -> Fraction:
    if not sample:
        raise EmptySample("empirical risk of an empty sample is undefined")
    total = sum(_expected_loss(pred[x], y, problem.loss) for x, y in sample)
    return Fraction(total, len(sample))


def true_error(pred: Predictor, marg: Marginal, truth: int, problem: FiniteProblem) -> Fraction:
    row = problem.hypotheses[truth]
    return sum(
        (marg[x] * _expected_loss(pred[x], row[x], problem.loss) for x in marg.support),
        Fraction(0),
    )


def consistent_set(sample: Sample, problem: FiniteProblem) -> tuple:
    """Indices of hypotheses with zero empirical risk on ``sample``."""
    return tuple(
        h for h, row in enumerate(problem.hypotheses) if all(row[x] == y for x, y in sample)
    )


def _multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def count_sequences(support_size: int, n: int, collapse: bool = False) -> int:
    if collapse:
        return math.comb(support_size + n - 1, n)
    return support_size**n


def weighted_point_sequences(
    marg: Marginal, n: int, cap: int | None = None, collapse: bool = False
) -> Iterator[tuple]:
    """Yield ``(points, probability)`` for i.i.d. draws of ``n`` points from ``marg``."""
    cap = default_cap() if cap is None else cap
    support = marg.support
    required = count_sequences(len(support), n, collapse)
    if required > cap:
        raise EnumerationCapExceeded(required, cap)
    if collapse:
        for points in itertools.combinations_with_replacement(support, n):
            counts = [points.count(x) for x in sorted(set(points))]
            prob = Fraction(_multinomial(counts))
            for x in points:
                prob *= marg[x]
            yield points, prob
        return
    for points in itertools.product(support, repeat=n):
        prob = Fraction(1)
        for x in points:
            prob *= marg[x]
        yield points, prob


def enumerate_weighted_samples(
    marg: Marginal,
    truth: int,
    n: int,
    problem: FiniteProblem,
    cap: int | None = None,
    collapse: bool = False,
) -> list:
    """All size-``n`` samples labeled by ``truth`` with their probabilities.

    With ``collapse`` each multiset appears once (as its sorted sequence)
    carrying its multinomial weight.  Learners that are invariant to sample
    order give identical expectations under both forms.
    """
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    return [
        (problem.label_sample(points, truth), prob)
        for points, prob in weighted_point_sequences(marg, n, cap, collapse)
    ]


def realizable_samples(marg: Marginal, n: int, problem: FiniteProblem, cap: int | None = None) -> list:
    """Every labeled sample of size ``n`` that some hypothesis can produce.

    Returns ``(sample, point_probability, consistent_hypotheses)`` triples in
    lexicographic order of the points, then of the labels.
    """
    out = []
    for points, prob in weighted_point_sequences(marg, n, cap):
        groups: dict = {}
        for h, row in enumerate(problem.hypotheses):
            groups.setdefault(tuple(row[x] for x in points), []).append(h)
        for labels in sorted(groups):
            out.append((tuple(zip(points, labels)), prob, tuple(groups[labels])))
    return out
