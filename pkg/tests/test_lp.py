import numpy as np
import pytest

from renewpull.esom.lp import (
    InfeasibleError,
    LinearProgram,
    UnboundedError,
    solve,
)

from oracles import simplex_solve


def test_min_with_lower_bound():
    lp = LinearProgram("tiny")
    lp.add_var("x", lb=0.0, cost=1.0)
    lp.add_row("floor", [("x", 1.0)], ">=", 3.0)
    sol = solve(lp)
    assert sol.value("x") == pytest.approx(3.0, abs=1e-9)
    assert sol.objective == pytest.approx(3.0, rel=1e-9)


def test_degenerate_ties_still_have_unique_objective():
    # two routes with identical cost; any optimal vertex is fine
    lp = LinearProgram("ties")
    lp.add_var("a", cost=2.0)
    lp.add_var("b", cost=2.0)
    lp.add_row("need", [("a", 1.0), ("b", 1.0)], ">=", 5.0)
    sol = solve(lp)
    assert sol.objective == pytest.approx(10.0, rel=1e-9)
    assert sol.value("a") + sol.value("b") == pytest.approx(5.0, abs=1e-8)


def test_infeasible_reports_cause():
    lp = LinearProgram("broken")
    lp.add_var("x", lb=0.0, ub=1.0, cost=1.0)
    lp.add_row("impossible", [("x", 1.0)], ">=", 2.0)
    with pytest.raises(InfeasibleError, match="impossible"):
        solve(lp)


def test_unbounded_detected():
    lp = LinearProgram("open")
    lp.add_var("x", lb=None, ub=None, cost=1.0)
    lp.add_row("anchor", [("x", 1.0)], "<=", 10.0)
    with pytest.raises(UnboundedError):
        solve(lp)


def _random_feasible_lp(rng, n=20, m=15):
    """Random bounded-feasible instance: A x <= b with b >= 0 and box tops."""
    a = rng.uniform(-1.0, 1.0, size=(m, n))
    b = np.abs(rng.uniform(0.5, 5.0, size=m))
    c = rng.uniform(-2.0, 2.0, size=n)
    u = rng.uniform(1.0, 10.0, size=n)
    return c, a, b, u


def _to_linear_program(c, a, b, u):
    lp = LinearProgram("rand")
    for j in range(len(c)):
        lp.add_var(f"x{j}", lb=0.0, ub=float(u[j]), cost=float(c[j]))
    for i in range(a.shape[0]):
        terms = [(f"x{j}", float(a[i, j])) for j in range(a.shape[1])]
        lp.add_row(f"r{i}", terms, "<=", float(b[i]))
    return lp


def test_random_lps_match_simplex_oracle():
    rng = np.random.default_rng(2024)
    for trial in range(60):
        c, a, b, u = _random_feasible_lp(rng)
        lp = _to_linear_program(c, a, b, u)
        sol = solve(lp)
        # oracle handles the box tops as explicit rows
        a_o = np.vstack([a, np.eye(len(c))])
        b_o = np.concatenate([b, u])
        obj_oracle, _ = simplex_solve(c, a_o, b_o)
        scale = max(abs(obj_oracle), 1.0)
        assert abs(sol.objective - obj_oracle) <= 1e-6 * scale, f"trial {trial}"


def test_objective_recomputed_from_primal():
    rng = np.random.default_rng(1)
    c, a, b, u = _random_feasible_lp(rng)
    lp = _to_linear_program(c, a, b, u)
    sol = solve(lp)
    recomputed = float(np.array([v.cost for v in lp.variables]) @ sol.x)
    assert sol.objective == pytest.approx(recomputed, rel=1e-12)
    assert sol.max_violation <= 1e-6


def test_solve_is_deterministic():
    rng = np.random.default_rng(5)
    c, a, b, u = _random_feasible_lp(rng)
    one = solve(_to_linear_program(c, a, b, u))
    two = solve(_to_linear_program(c, a, b, u))
    assert np.array_equal(one.x, two.x)
    assert one.objective == two.objective


def test_duplicate_variable_rejected():
    lp = LinearProgram()
    lp.add_var("x")
    with pytest.raises(ValueError, match="duplicate"):
        lp.add_var("x")


def test_row_referencing_unknown_variable_rejected():
    lp = LinearProgram()
    lp.add_var("x")
    with pytest.raises(KeyError):
        lp.add_row("r", [("y", 1.0)], "<=", 1.0)


def test_nan_rejected_everywhere():
    lp = LinearProgram()
    with pytest.raises(ValueError):
        lp.add_var("x", cost=float("nan"))
    lp.add_var("x")
    with pytest.raises(ValueError):
        lp.add_row("r", [("x", float("nan"))], "<=", 1.0)
    with pytest.raises(ValueError):
        lp.add_row("r", [("x", 1.0)], "<=", float("nan"))


def test_mps_export_round_trips_through_solver(tmp_path):
    lp = LinearProgram("export")
    lp.add_var("x", lb=0.0, ub=4.0, cost=1.0)
    lp.add_var("y", lb=None, ub=None, cost=3.0)
    lp.add_row("r1", [("x", 2.0), ("y", 1.0)], ">=", 4.0)
    lp.add_row("r2", [("y", 1.0)], "<=", 5.0)
    lp.add_row("r3", [("x", 1.0), ("y", -1.0)], "=", 1.0)
    path = tmp_path / "model.mps"
    lp.write_mps(path)
    text = path.read_text()
    for token in ("NAME export", "ROWS", " G  r1", " L  r2", " E  r3",
                  "COLUMNS", "RHS", "BOUNDS", " FR BND  y", " UP BND  x  4.0", "ENDATA"):
        assert token in text, token
    sol = solve(lp)
    # x - y = 1, 2x + y >= 4 -> x = 5/3, y = 2/3 at the optimum
    assert sol.value("x") == pytest.approx(5.0 / 3.0, rel=1e-6)
    assert sol.value("y") == pytest.approx(2.0 / 3.0, rel=1e-6)
