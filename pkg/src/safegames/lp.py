"""Exact two-phase simplex over :class:`fractions.Fraction`.

Bland's rule is used for both entering and leaving variables, so the
returned vertex is a deterministic function of the input and the method
cannot cycle. Problem sizes in this package are tiny (tens of variables),
so a dense tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

__all__ = [
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "Constraint",
    "LinearProgram",
    "LPResult",
    "SlackResult",
    "solve_lp",
    "solve_max_slack",
]

OPTIMAL, INFEASIBLE, UNBOUNDED = "Optimal", "Infeasible", "Unbounded"

_ZERO = Fraction(0)


class Constraint(NamedTuple):
    coefficients: Mapping[str, Fraction]
    relation: str  # "<=", ">=", "="
    rhs: Fraction


@dataclass
class LinearProgram:
    """``direction`` objective over ``variables`` subject to ``constraints``.

    ``bounds`` maps a variable to ``(lower, upper)``; either end may be None.
    Variables without an entry default to ``(0, None)``.
    """

    variables: List[str]
    objective: Mapping[str, Fraction]
    direction: str = "min"
    constraints: List[Constraint] = field(default_factory=list)
    bounds: Dict[str, Tuple[Optional[Fraction], Optional[Fraction]]] = field(default_factory=dict)

    def add(self, coefficients, relation, rhs):
        if relation not in ("<=", ">=", "="):
            raise ValueError(f"unsupported relation {relation!r}")
        unknown = set(coefficients) - set(self.variables)
        if unknown:
            raise ValueError(f"constraint references undeclared variables {sorted(unknown)}")
        self.constraints.append(Constraint(dict(coefficients), relation, Fraction(rhs)))
        return len(self.constraints) - 1

    def bound(self, var: str):
        return self.bounds.get(var, (_ZERO, None))

    def is_feasible(self, x: Mapping[str, Fraction]) -> bool:
        for v in self.variables:
            lo, hi = self.bound(v)
            if lo is not None and x[v] < lo or hi is not None and x[v] > hi:
                return False
        for c in self.constraints:
            lhs = sum((q * x[v] for v, q in c.coefficients.items()), _ZERO)
            if c.relation == "<=" and lhs > c.rhs:
                return False
            if c.relation == ">=" and lhs < c.rhs:
                return False
            if c.relation == "=" and lhs != c.rhs:
                return False
        return True

    def value_at(self, x: Mapping[str, Fraction]) -> Fraction:
        return sum((q * x[v] for v, q in self.objective.items()), _ZERO)


class LPResult(NamedTuple):
    status: str
    assignment: Optional[Dict[str, Fraction]] = None
    value: Optional[Fraction] = None


class SlackResult(NamedTuple):
    status: str
    slack: Optional[Fraction] = None
    assignment: Optional[Dict[str, Fraction]] = None


class _Tableau:
    """Rows ``A x = b`` with ``b >= 0`` and an explicit basis."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r: int, c: int):
        row, piv = self.rows[r], self.rows[r][c]
        if piv != 1:
            inv = 1 / piv
            self.rows[r] = row = [e * inv for e in row]
            self.rhs[r] *= inv
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[c]
                if f:
                    self.rows[i] = [e - f * p if p else e for e, p in zip(other, row)]
                    self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def optimize(self, cost: Sequence[Fraction], allowed: int) -> bool:
        """Minimize ``cost . x`` using columns ``< allowed`` as entering
        candidates. Returns False when unbounded."""
        while True:
            cb = [cost[j] for j in self.basis]
            entering = None
            for j in range(allowed):
                if j in self.basis:
                    continue
                reduced = cost[j] - sum(
                    (cb[i] * self.rows[i][j] for i in range(len(self.rows)) if self.rows[i][j]),
                    _ZERO,
                )
                if reduced < 0:
                    entering = j
                    break
            if entering is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], entering)


def _standard_form(lp: LinearProgram):
    """Rewrite ``lp`` as ``min c.y, A y = b, y >= 0``.

    Returns the matrix data plus a recipe mapping each original variable to
    ``offset + sum(sign * y_col)``.
    """
    columns = 0
    recipe = {}
    extra = []  # upper-bound rows: (col, bound)
    for v in lp.variables:
        lo, hi = lp.bound(v)
        lo = None if lo is None else Fraction(lo)
        hi = None if hi is None else Fraction(hi)
        if lo is not None:
            recipe[v] = (lo, [(columns, 1)])
            if hi is not None:
                extra.append((columns, hi - lo))
            columns += 1
        elif hi is not None:
            recipe[v] = (hi, [(columns, -1)])
            columns += 1
        else:
            recipe[v] = (_ZERO, [(columns, 1), (columns + 1, -1)])
            columns += 2

    rows = []  # (coeff dict over y, relation, rhs)
    for c in lp.constraints:
        coeffs: Dict[int, Fraction] = {}
        rhs = Fraction(c.rhs)
        for v, q in c.coefficients.items():
            q = Fraction(q)
            if not q:
                continue
            off, cols = recipe[v]
            rhs -= q * off
            for col, sign in cols:
                coeffs[col] = coeffs.get(col, _ZERO) + sign * q
        rows.append((coeffs, c.relation, rhs))
    for col, ub in extra:
        rows.append(({col: Fraction(1)}, "<=", ub))

    cost = [_ZERO] * columns
    const = _ZERO
    flip = -1 if lp.direction == "max" else 1
    for v, q in lp.objective.items():
        q = Fraction(q) * flip
        off, cols = recipe[v]
        const += q * off
        for col, sign in cols:
            cost[col] += sign * q
    return columns, rows, cost, const, recipe


def solve_lp(lp: LinearProgram) -> LPResult:
    """Solve ``lp`` exactly; returns an optimal basic solution when one exists."""
    if lp.direction not in ("min", "max"):
        raise ValueError(f"unknown direction {lp.direction!r}")
    n, rows, cost, const, recipe = _standard_form(lp)

    # Slack columns, then artificial columns for rows lacking a unit slack.
    n_slack = sum(1 for _, rel, _ in rows if rel != "=")
    matrix, rhs, basis = [], [], []
    slack_col = n
    needs_artificial = []
    for coeffs, rel, b in rows:
        row = [_ZERO] * (n + n_slack)
        for col, q in coeffs.items():
            row[col] = q
        unit = None
        if rel != "=":
            row[slack_col] = Fraction(1 if rel == "<=" else -1)
            unit = slack_col
            slack_col += 1
        if b < 0:
            row = [-e for e in row]
            b = -b
        if unit is not None and row[unit] == 1:
            basis.append(unit)
        else:
            basis.append(None)
            needs_artificial.append(len(matrix))
        matrix.append(row)
        rhs.append(b)

    width = n + n_slack
    n_art = len(needs_artificial)
    for row in matrix:
        row.extend([_ZERO] * n_art)
    for k, r in enumerate(needs_artificial):
        matrix[r][width + k] = Fraction(1)
        basis[r] = width + k

    tab = _Tableau(matrix, rhs, basis)
    if n_art:
        phase1 = [_ZERO] * width + [Fraction(1)] * n_art
        tab.optimize(phase1, width + n_art)
        if any(tab.rhs[i] != 0 for i, j in enumerate(tab.basis) if j >= width):
            return LPResult(INFEASIBLE)
        # Drive zero-level artificials out of the basis; drop redundant rows.
        for i in reversed(range(len(tab.rows))):
            if tab.basis[i] < width:
                continue
            col = next((j for j in range(width) if tab.rows[i][j] != 0), None)
            if col is None:
                del tab.rows[i], tab.rhs[i], tab.basis[i]
            else:
                tab.pivot(i, col)
        tab.rows = [row[:width] for row in tab.rows]

    full_cost = list(cost) + [_ZERO] * n_slack
    if not tab.optimize(full_cost, width):
        return LPResult(UNBOUNDED)

    y = [_ZERO] * width
    for i, j in enumerate(tab.basis):
        y[j] = tab.rhs[i]
    x = {}
    for v in lp.variables:
        off, cols = recipe[v]
        x[v] = off + sum((sign * y[col] for col, sign in cols), _ZERO)
    if not lp.is_feasible(x):
        raise ArithmeticError("simplex returned an infeasible point")
    return LPResult(OPTIMAL, x, lp.value_at(x))


def solve_max_slack(lp: LinearProgram, strict: Sequence[int], slack_name: str = "_t") -> SlackResult:
    """Maximize a common margin ``t`` on the ``>=`` constraints in ``strict``.

    Each listed constraint ``lhs >= rhs`` becomes ``lhs - t >= rhs`` with
    ``0 <= t <= 1``. The strict system is satisfiable iff the returned slack
    is positive.
    """
    if slack_name in lp.variables:
        raise ValueError(f"variable name {slack_name!r} already in use")
    strict = set(strict)
    out = LinearProgram(
        list(lp.variables) + [slack_name],
        {slack_name: Fraction(1)},
        "max",
        bounds=dict(lp.bounds),
    )
    out.bounds[slack_name] = (_ZERO, Fraction(1))
    for i, c in enumerate(lp.constraints):
        coeffs = dict(c.coefficients)
        if i in strict:
            if c.relation != ">=":
                raise ValueError(f"strict constraint {i} must use '>='")
            coeffs[slack_name] = Fraction(-1)
        out.add(coeffs, c.relation, c.rhs)
    res = solve_lp(out)
    if res.status != OPTIMAL:
        return SlackResult(res.status)
    t = res.assignment.pop(slack_name)
    return SlackResult(OPTIMAL, t, res.assignment)
