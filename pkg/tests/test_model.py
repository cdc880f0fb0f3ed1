import math

import highspy
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasflex.model import LinearConstraint, ModelError, OptModel, VariableSpec, export_mps


def test_dense_ids():
    m = OptModel()
    assert m.add_variable(VariableSpec("a", 0, 10)) == 0
    m.var("b")
    m.var("c")
    assert m.add_variable(VariableSpec("d", 0, 1, "binary")) == 3


def test_inconsistent_bounds():
    with pytest.raises(ModelError, match="inconsistent bounds"):
        OptModel().add_variable(VariableSpec("x", 5, 2))


def test_binary_bounds_must_lie_in_unit_interval():
    with pytest.raises(ModelError):
        OptModel().var("y", 0, 2, "binary")


def test_constraint_ids_and_errors():
    m = OptModel()
    x0, x1 = m.var("x0"), m.var("x1")
    assert m.add([(x0, 1.0), (x1, 2.0)], "<=", 5.0) == 0
    with pytest.raises(ModelError, match="unknown variable id"):
        m.add([(99, 1.0)], "<=", 1.0)
    with pytest.raises(ModelError, match="duplicate term"):
        m.add([(x0, 1.0), (x0, 1.0)], "<=", 1.0)
    with pytest.raises(ModelError, match="non-finite"):
        m.add([(x0, math.inf)], "<=", 1.0)
    with pytest.raises(ModelError, match="unknown sense"):
        m.add_constraint(LinearConstraint([(x0, 1.0)], "<", 1.0))


def test_fix_pins_without_touching_original():
    m = OptModel()
    x = m.var("x", 0, 10)
    f = m.fix({x: 4.0})
    assert (f.variables[x].lower, f.variables[x].upper) == (4.0, 4.0)
    assert m.variables[x].upper == 10


def _highs_solve(text: str, tmp_path):
    path = tmp_path / "m.mps"
    path.write_text(text)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    h.run()
    return h


def test_mps_single_variable_round_trip(tmp_path):
    m = OptModel(name="one")
    x = m.var("x", 1.0)
    m.set_objective([(x, 1.0)])
    h = _highs_solve(export_mps(m), tmp_path)
    assert h.getInfo().objective_function_value == pytest.approx(1.0)


def test_mps_keeps_names_and_integrality(tmp_path):
    m = OptModel(name="mix")
    x = m.var("pr_m1_t1", 0, 10)
    y = m.var("y_m1_m2_t1", 0, 1, "binary")
    m.add([(x, 1.0), (y, -5.0)], ">=", 2.5, "gate")
    m.set_objective([(x, 1.0), (y, 3.0)])
    text = export_mps(m)
    assert "pr_m1_t1" in text and "MARKER" in text
    h = _highs_solve(text, tmp_path)
    lp = h.getLp()
    assert (lp.num_col_, lp.num_row_) == (2, 1)
    assert list(lp.integrality_)[1] == highspy.HighsVarType.kInteger
    assert h.getInfo().objective_function_value == pytest.approx(2.5)


def test_unnamed_variables_warn():
    m = OptModel()
    m.add_variable(VariableSpec())
    with pytest.warns(UserWarning, match="unnamed"):
        text = export_mps(m)
    assert "x0" in text


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(1, 6),
    rows=st.lists(
        st.tuples(st.lists(st.integers(-5, 5), min_size=6, max_size=6),
                  st.sampled_from(["<=", ">=", "="]), st.floats(-10, 10)),
        max_size=5,
    ),
)
def test_mps_round_trip_counts(tmp_path_factory, n, rows):
    m = OptModel()
    ids = [m.var(f"v{i}", -3.0, 3.0) for i in range(n)]
    nnz = 0
    for r, (coefs, sense, rhs) in enumerate(rows):
        terms = [(ids[i], float(c)) for i, c in enumerate(coefs[:n]) if c]
        nnz += len(terms)
        m.add(terms, sense, rhs, f"r{r}")
    m.set_objective([(i, 1.0) for i in ids])
    path = tmp_path_factory.mktemp("mps") / "m.mps"
    path.write_text(export_mps(m))
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    lp = h.getLp()
    assert lp.num_col_ == n and lp.num_row_ == len(rows)
    assert lp.a_matrix_.start_[-1] == nnz
    np.testing.assert_allclose(lp.col_lower_, -3.0)


def test_mps_infinite_bounds(tmp_path):
    m = OptModel()
    x = m.var("x", -math.inf)
    y = m.var("y", -math.inf, 4.0)
    m.add([(x, 1.0), (y, 1.0)], ">=", 1.0, "r")
    m.set_objective([(x, 1.0)])
    h = _highs_solve(export_mps(m), tmp_path)
    lp = h.getLp()
    assert all(v <= -1e20 for v in lp.col_lower_)
    assert lp.col_upper_[0] >= 1e20 and lp.col_upper_[1] == 4.0
    assert h.getInfo().objective_function_value == pytest.approx(-3.0)
