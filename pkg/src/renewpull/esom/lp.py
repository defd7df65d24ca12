"""Sparse linear-program container, HiGHS-backed solving, and MPS export.

The container is deliberately plain: named variables with bounds and an
objective coefficient, sparse rows with a sense and right-hand side, and a
``meta`` mapping in which the model builders register structure (assets,
balances, production terms). Solutions are checked against the primal
before they are returned; an optimal status implies every constraint holds
within the relative feasibility tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse

DEFAULT_TOLERANCE = 1e-6

_SENSES = ("<=", ">=", "=")


class SolveError(RuntimeError):
    """The solver failed to return a usable optimum."""


class InfeasibleError(SolveError):
    """No feasible point exists; carries a best-effort cause hint."""


class UnboundedError(SolveError):
    """The objective is unbounded below on the feasible set."""


@dataclass
class _Variable:
    name: str
    lb: float | None
    ub: float | None
    cost: float


@dataclass
class _Row:
    name: str
    idx: list[int]
    coef: list[float]
    sense: str
    rhs: float


class LinearProgram:
    """A minimization LP over named continuous variables."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.variables: list[_Variable] = []
        self.rows: list[_Row] = []
        self.meta: dict = {}
        self._index: dict[str, int] = {}

    # --- construction ------------------------------------------------------

    def add_var(self, name: str, lb: float | None = 0.0, ub: float | None = None,
                cost: float = 0.0) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        for label, v in (("lb", lb), ("ub", ub), ("cost", cost)):
            if v is not None and not math.isfinite(v):
                raise ValueError(f"variable {name!r}: non-finite {label} {v}")
        if lb is not None and ub is not None and lb > ub:
            raise ValueError(f"variable {name!r}: lb {lb} > ub {ub}")
        idx = len(self.variables)
        self.variables.append(_Variable(name, lb, ub, float(cost)))
        self._index[name] = idx
        return idx

    def add_cost(self, var: str | int, cost: float) -> None:
        self.variables[self._resolve(var)].cost += float(cost)

    def add_row(self, name: str, terms: Iterable[tuple[str | int, float]], sense: str,
                rhs: float) -> None:
        if sense == "==":
            sense = "="
        if sense not in _SENSES:
            raise ValueError(f"row {name!r}: unknown sense {sense!r}")
        if not math.isfinite(rhs):
            raise ValueError(f"row {name!r}: non-finite rhs {rhs}")
        idx: list[int] = []
        coef: list[float] = []
        for var, c in terms:
            c = float(c)
            if not math.isfinite(c):
                raise ValueError(f"row {name!r}: non-finite coefficient on {var!r}")
            if c == 0.0:
                continue
            idx.append(self._resolve(var))
            coef.append(c)
        if not idx:
            raise ValueError(f"row {name!r}: no nonzero terms")
        self.rows.append(_Row(name, idx, coef, sense, float(rhs)))

    def _resolve(self, var: str | int) -> int:
        if isinstance(var, int):
            return var
        try:
            return self._index[var]
        except KeyError:
            raise KeyError(f"unknown variable {var!r}") from None

    # --- introspection -----------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def var_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def costs(self) -> np.ndarray:
        return np.array([v.cost for v in self.variables])

    def bounds(self) -> list[tuple[float | None, float | None]]:
        return [(v.lb, v.ub) for v in self.variables]

    # --- conversion --------------------------------------------------------

    def to_matrices(self):
        """Split rows into (c, A_ub, b_ub, A_eq, b_eq, bounds) for scipy."""
        c = self.costs()
        ub_rows, eq_rows = [], []
        for r in self.rows:
            if r.sense == "=":
                eq_rows.append(r)
            else:
                ub_rows.append(r)

        def build(rows, flip_ge: bool):
            data, ri, ci, rhs = [], [], [], []
            for k, r in enumerate(rows):
                sign = -1.0 if (flip_ge and r.sense == ">=") else 1.0
                rhs.append(sign * r.rhs)
                for j, cf in zip(r.idx, r.coef):
                    ri.append(k)
                    ci.append(j)
                    data.append(sign * cf)
            if not rows:
                return None, None
            mat = scipy.sparse.csr_matrix(
                (data, (ri, ci)), shape=(len(rows), self.n_vars)
            )
            return mat, np.array(rhs)

        a_ub, b_ub = build(ub_rows, flip_ge=True)
        a_eq, b_eq = build(eq_rows, flip_ge=False)
        return c, a_ub, b_ub, a_eq, b_eq, self.bounds()

    # --- export -------------------------------------------------------------

    def write_mps(self, path) -> None:
        """Free-format MPS export for cross-checking with external solvers."""
        sense_code = {"<=": "L", ">=": "G", "=": "E"}
        lines = [f"NAME {self.name}", "ROWS", " N  OBJ"]
        for r in self.rows:
            lines.append(f" {sense_code[r.sense]}  {r.name}")
        lines.append("COLUMNS")
        per_var: list[list[tuple[str, float]]] = [[] for _ in self.variables]
        for r in self.rows:
            for j, cf in zip(r.idx, r.coef):
                per_var[j].append((r.name, cf))
        for v, entries in zip(self.variables, per_var):
            if v.cost != 0.0:
                lines.append(f"    {v.name}  OBJ  {v.cost!r}")
            for row_name, cf in entries:
                lines.append(f"    {v.name}  {row_name}  {cf!r}")
        lines.append("RHS")
        for r in self.rows:
            if r.rhs != 0.0:
                lines.append(f"    RHS  {r.name}  {r.rhs!r}")
        lines.append("BOUNDS")
        for v in self.variables:
            if v.lb is None and v.ub is None:
                lines.append(f" FR BND  {v.name}")
                continue
            if v.lb is None:
                lines.append(f" MI BND  {v.name}")
            elif v.lb != 0.0:
                lines.append(f" LO BND  {v.name}  {v.lb!r}")
            if v.ub is not None:
                lines.append(f" UP BND  {v.name}  {v.ub!r}")
        lines.append("ENDATA")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    # --- validation ---------------------------------------------------------

    def validate(self) -> None:
        for v in self.variables:
            if v.lb is not None and v.ub is not None and v.lb > v.ub:
                raise ValueError(f"variable {v.name!r}: lb > ub")
        for r in self.rows:
            for j in r.idx:
                if not 0 <= j < self.n_vars:
                    raise ValueError(f"row {r.name!r}: dangling variable index {j}")


@dataclass
class SystemSolution:
    """An optimal point with its objective and feasibility diagnostics."""

    lp: LinearProgram
    x: np.ndarray
    objective: float
    status: str
    max_violation: float
    message: str = ""

    def value(self, var: str) -> float:
        return float(self.x[self.lp._resolve(var)])

    def values(self, names: Sequence[str]) -> np.ndarray:
        return np.array([self.value(n) for n in names])

    def term_total(self, terms: Sequence[tuple[str, float]]) -> float:
        """Evaluate a registered sum of (variable, coefficient) terms."""
        return float(sum(c * self.value(n) for n, c in terms))

    def row_residuals(self) -> dict[str, float]:
        """Signed slack of every row (positive means satisfied with room)."""
        out = {}
        for r in self.lp.rows:
            act = sum(cf * self.x[j] for j, cf in zip(r.idx, r.coef))
            if r.sense == "<=":
                out[r.name] = r.rhs - act
            elif r.sense == ">=":
                out[r.name] = act - r.rhs
            else:
                out[r.name] = -abs(act - r.rhs)
        return out


def _impossible_rows(lp: LinearProgram, limit: int = 5) -> list[str]:
    """Rows unsatisfiable by interval arithmetic on the variable boxes."""
    bad = []
    for r in lp.rows:
        lo = hi = 0.0
        for j, cf in zip(r.idx, r.coef):
            v = lp.variables[j]
            lo_b = -math.inf if v.lb is None else v.lb
            hi_b = math.inf if v.ub is None else v.ub
            a, b = sorted((cf * lo_b, cf * hi_b))
            lo += a
            hi += b
        violated = (
            (r.sense == "<=" and lo > r.rhs + 1e-9)
            or (r.sense == ">=" and hi < r.rhs - 1e-9)
            or (r.sense == "=" and not (lo - 1e-9 <= r.rhs <= hi + 1e-9))
        )
        if violated:
            bad.append(r.name)
            if len(bad) >= limit:
                break
    return bad


def solve(lp: LinearProgram, tolerance: float = DEFAULT_TOLERANCE) -> SystemSolution:
    """Minimize the LP and return a verified optimal solution.

    Solving is deterministic for identical input. Raises
    :class:`InfeasibleError` or :class:`UnboundedError` with a cause hint
    when no optimum exists, and :class:`SolveError` if the returned point
    violates feasibility beyond the relative tolerance.
    """
    lp.validate()
    c, a_ub, b_ub, a_eq, b_eq, bounds = lp.to_matrices()
    options = {
        "primal_feasibility_tolerance": min(1e-7, tolerance),
        "dual_feasibility_tolerance": min(1e-7, tolerance),
    }
    res = scipy.optimize.linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options=options,
    )
    if res.status == 2:
        hints = _impossible_rows(lp)
        detail = f"; unsatisfiable rows by bound analysis: {hints}" if hints else ""
        raise InfeasibleError(f"{lp.name}: infeasible ({res.message}){detail}")
    if res.status == 3:
        raise UnboundedError(f"{lp.name}: unbounded ({res.message})")
    if res.status != 0:
        raise SolveError(f"{lp.name}: solver failure ({res.message})")

    x = np.asarray(res.x, dtype=float)
    objective = float(lp.costs() @ x)

    max_violation = 0.0
    for r in lp.rows:
        act = sum(cf * x[j] for j, cf in zip(r.idx, r.coef))
        scale = max(abs(act), abs(r.rhs), 1.0)
        if r.sense == "<=":
            gap = (act - r.rhs) / scale
        elif r.sense == ">=":
            gap = (r.rhs - act) / scale
        else:
            gap = abs(act - r.rhs) / scale
        max_violation = max(max_violation, gap)
    for v, xi in zip(lp.variables, x):
        scale = max(abs(xi), 1.0)
        if v.lb is not None:
            max_violation = max(max_violation, (v.lb - xi) / scale)
        if v.ub is not None:
            max_violation = max(max_violation, (xi - v.ub) / scale)
    if max_violation > tolerance:
        raise SolveError(
            f"{lp.name}: solution violates constraints by {max_violation:.3e} "
            f"(tolerance {tolerance:.1e})"
        )

    return SystemSolution(
        lp=lp,
        x=x,
        objective=objective,
        status="optimal",
        max_violation=max_violation,
        message=str(res.message),
    )
