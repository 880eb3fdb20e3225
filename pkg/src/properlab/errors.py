"""Exception hierarchy shared by every module of the package."""


class ProperLabError(Exception):
    """Base class for all errors raised by properlab."""


class ProblemParseError(ProperLabError):
    """The raw problem description could not be parsed."""


class InvariantError(ProperLabError):
    """A parsed object violates one of its type invariants."""


class NonMetricLoss(InvariantError):
    def __init__(self, reason, labels):
        self.reason = reason
        self.labels = tuple(labels)
        super().__init__(f"loss is not a metric ({reason}) on labels {self.labels}")


class DuplicateHypothesis(InvariantError):
    def __init__(self, first, second):
        self.indices = (first, second)
        super().__init__(f"hypotheses {first} and {second} are identical")


class EmptyClass(InvariantError):
    pass


class OutOfRangeEntry(InvariantError):
    pass


class InvalidMarginal(InvariantError):
    pass


class EmptySample(ProperLabError):
    pass


class EnumerationCapExceeded(ProperLabError):
    def __init__(self, required, cap):
        self.required = required
        self.cap = cap
        super().__init__(f"enumeration needs {required} items, cap is {cap}")


class ZeroEvidence(ProperLabError):
    """The prior puts no mass on the hypotheses consistent with a sample."""


class ComponentZeroEvidence(ZeroEvidence):
    def __init__(self, indices):
        self.indices = tuple(indices)
        super().__init__(f"mixture components with zero evidence: {self.indices}")


class UndefinedSample(ProperLabError, KeyError):
    """A table learner was queried on a sample it does not define."""


class NumericNonconvergence(ProperLabError):
    def __init__(self, grad_norm, iterations):
        self.grad_norm = grad_norm
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})"
        )


class IterationCapExceeded(ProperLabError):
    def __init__(self, solution):
        self.solution = solution
        super().__init__(
            f"iteration cap reached with duality gap {solution.duality_gap:.3e}"
        )


class BudgetExceeded(ProperLabError):
    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(f"oracle needs {required} learners, budget is {budget}")


class InfeasibleLP(ProperLabError):
    pass


class UnboundedLP(ProperLabError):
    pass
