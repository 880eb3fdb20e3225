"""Two-phase tableau simplex in exact rational arithmetic.

Solves ``max c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``,
``x >= 0``.  Bland's rule is used for both the entering and leaving
variable so the method terminates on degenerate problems.  Rows are kept
as sparse dicts because the game LPs are mostly zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InfeasibleLP, UnboundedLP

ZERO = Fraction(0)


@dataclass
class LPResult:
    value: Fraction
    x: tuple
    duals_ub: tuple
    duals_eq: tuple
    pivots: int
    primal_degenerate: bool
    dual_degenerate: bool


def _sparse(row: Sequence) -> dict:
    return {j: Fraction(v) for j, v in enumerate(row) if v}


class _Tableau:
    def __init__(self, rows, rhs, basis, n_cols, barred):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.n_cols = n_cols
        self.barred = barred
        self.pivots = 0

    def objective_row(self, cost: dict):
        z = {}
        for r, b in enumerate(self.basis):
            cb = cost.get(b, ZERO)
            if cb:
                for j, v in self.rows[r].items():
                    z[j] = z.get(j, ZERO) + cb * v
        for j, cj in cost.items():
            z[j] = z.get(j, ZERO) - cj
        value = sum((cost.get(b, ZERO) * self.rhs[r] for r, b in enumerate(self.basis)), ZERO)
        return {j: v for j, v in z.items() if v}, value

    def pivot(self, r: int, col: int, z: dict, value: Fraction) -> Fraction:
        prow = self.rows[r]
        inv = 1 / prow[col]
        if inv != 1:
            for j in prow:
                prow[j] *= inv
            self.rhs[r] *= inv
        pr_rhs = self.rhs[r]
        items = list(prow.items())
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(col)
            if not f:
                continue
            for j, v in items:
                new = row.get(j, ZERO) - f * v
                if new:
                    row[j] = new
                else:
                    row.pop(j, None)
            self.rhs[i] -= f * pr_rhs
        f = z.get(col)
        if f:
            for j, v in items:
                new = z.get(j, ZERO) - f * v
                if new:
                    z[j] = new
                else:
                    z.pop(j, None)
            value -= f * pr_rhs
        self.basis[r] = col
        self.pivots += 1
        return value

    def optimize(self, cost: dict):
        z, value = self.objective_row(cost)
        while True:
            entering = None
            for j in sorted(z):
                if z[j] < 0 and j not in self.barred:
                    entering = j
                    break
            if entering is None:
                return z, value
            best_r, best_ratio = None, None
            for r, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    ratio = self.rhs[r] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[r] < self.basis[best_r])
                    ):
                        best_r, best_ratio = r, ratio
            if best_r is None:
                raise UnboundedLP("objective is unbounded")
            value = self.pivot(best_r, entering, z, value)


def solve_lp(c, A_ub=(), b_ub=(), A_eq=(), b_eq=()) -> LPResult:
    """Maximize ``c.x`` exactly; see the module docstring for the form."""
    n = len(c)
    specs = [(row, b, "ub") for row, b in zip(A_ub, b_ub)] + [(row, b, "eq") for row, b in zip(A_eq, b_eq)]
    rows, rhs, basis, signs, identity_cols = [], [], [], [], []
    artificial = set()
    col = n
    for row, b, kind in specs:
        b = Fraction(b)
        entries = _sparse(row)
        sign = 1
        if b < 0:
            sign = -1
            b = -b
            entries = {j: -v for j, v in entries.items()}
        signs.append(sign)
        if kind == "ub" and sign == 1:
            entries[col] = Fraction(1)
            basis.append(col)
            identity_cols.append(col)
            col += 1
        else:
            if kind == "ub":
                # negated <= row becomes >=: surplus plus an artificial
                entries[col] = Fraction(-1)
                col += 1
            entries[col] = Fraction(1)
            basis.append(col)
            identity_cols.append(col)
            artificial.add(col)
            col += 1
        rows.append(entries)
        rhs.append(b)

    tab = _Tableau(rows, rhs, basis, col, barred=set())
    if artificial:
        _, phase1 = tab.optimize({j: Fraction(-1) for j in artificial})
        if phase1 < 0:
            raise InfeasibleLP("constraints are infeasible")
        for r in range(len(tab.rows)):
            if tab.basis[r] in artificial:
                # degenerate artificial left in the basis at level zero
                for j in sorted(tab.rows[r]):
                    if j not in artificial and tab.rows[r][j] != 0:
                        z, v = tab.objective_row({})
                        tab.pivot(r, j, z, v)
                        break
        tab.barred = artificial

    cost = {j: Fraction(v) for j, v in enumerate(c) if v}
    z, value = tab.optimize(cost)

    x = [ZERO] * n
    basic = set()
    primal_degenerate = False
    for r, b in enumerate(tab.basis):
        basic.add(b)
        if b < n:
            x[b] = tab.rhs[r]
        if tab.rhs[r] == 0:
            primal_degenerate = True
    dual_degenerate = any(
        z.get(j, ZERO) == 0 for j in range(tab.n_cols) if j not in basic and j not in tab.barred
    )
    duals = [sign * z.get(j, ZERO) for sign, j in zip(signs, identity_cols)]
    n_ub = len(b_ub)
    return LPResult(
        value=value,
        x=tuple(x),
        duals_ub=tuple(duals[:n_ub]),
        duals_eq=tuple(duals[n_ub:]),
        pivots=tab.pivots,
        primal_degenerate=primal_degenerate,
        dual_degenerate=dual_degenerate,
    )


def duality_gap(c, A_ub, b_ub, A_eq, b_eq, x, y_ub, y_eq) -> Fraction:
    """Exact certificate check; returns ``b.y - c.x`` after verifying feasibility.

    Raises ``ValueError`` if either the primal point or the dual point is
    infeasible.
    """
    for row, b in zip(A_ub, b_ub):
        if sum((a * v for a, v in zip(row, x)), ZERO) > b:
            raise ValueError("primal point violates an inequality")
    for row, b in zip(A_eq, b_eq):
        if sum((a * v for a, v in zip(row, x)), ZERO) != b:
            raise ValueError("primal point violates an equality")
    if any(v < 0 for v in x) or any(y < 0 for y in y_ub):
        raise ValueError("sign constraint violated")
    for j, cj in enumerate(c):
        lhs = sum((row[j] * y for row, y in zip(A_ub, y_ub)), ZERO)
        lhs += sum((row[j] * y for row, y in zip(A_eq, y_eq)), ZERO)
        if lhs < cj:
            raise ValueError(f"dual point violates column {j}")
    dual = sum((b * y for b, y in zip(b_ub, y_ub)), ZERO) + sum((b * y for b, y in zip(b_eq, y_eq)), ZERO)
    primal = sum((a * v for a, v in zip(c, x)), ZERO)
    return dual - primal
