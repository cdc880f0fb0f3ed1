import dataclasses
import math

import numpy as np
import pytest
from helpers import tiny
from hypothesis import given, settings
from hypothesis import strategies as st

from gasflex.formulation import (
    FormulationConfig,
    FormulationError,
    build_model,
    derive_big_m,
    expansion_points,
    weymouth_plane_coefficients,
)
from gasflex.network import GasSupplier, Generator
from gasflex.runs import SolveFailed, solve_system
from gasflex.solver import Status, extract_schedule, solve
from gasflex.toys import random_system

# --- planes -----------------------------------------------------------------------


def test_plane_coefficients_example():
    cm, cu = weymouth_plane_coefficients(1.0, 2.0, 1.0)
    assert cm == pytest.approx(2 / math.sqrt(3), abs=1e-12)
    assert cu == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    assert (round(cm, 4), round(cu, 4)) == (1.1547, 0.5774)
    assert 2 * cm - cu == pytest.approx(math.sqrt(3), abs=1e-12)


def test_plane_with_zero_downstream_pressure():
    assert weymouth_plane_coefficients(1.0, 1.0, 0.0) == (1.0, 0.0)


@pytest.mark.parametrize("pm,pu", [(1.0, 1.0), (1.0, 2.0)])
def test_degenerate_expansion_point(pm, pu):
    with pytest.raises(ValueError, match="degenerate expansion point"):
        weymouth_plane_coefficients(1.0, pm, pu)


@settings(max_examples=200, deadline=None)
@given(
    k=st.floats(0.1, 50),
    point=st.tuples(st.floats(1, 100), st.floats(0, 0.99)),
    sample=st.tuples(st.floats(0, 100), st.floats(0, 1)),
)
def test_planes_overestimate_weymouth(k, point, sample):
    pm_v, frac = point
    cm, cu = weymouth_plane_coefficients(k, pm_v, pm_v * frac)
    pm, r = sample
    pu = pm * r
    assert cm * pm - cu * pu >= k * math.sqrt(pm * pm - pu * pu) - 1e-9 * max(1.0, k * pm)


@settings(max_examples=200, deadline=None)
@given(k=st.floats(0.1, 50), pm=st.floats(1, 100), frac=st.floats(0, 0.99), t=st.floats(1e-3, 1))
def test_planes_touch_along_ray(k, pm, frac, t):
    pu = pm * frac
    cm, cu = weymouth_plane_coefficients(k, pm, pu)
    exact = k * math.sqrt((t * pm) ** 2 - (t * pu) ** 2)
    assert cm * t * pm - cu * t * pu == pytest.approx(exact, rel=1e-9, abs=1e-9)


# --- expansion points -------------------------------------------------------------


def test_single_point_in_box():
    s = tiny(boxes=((0.0, 100.0), (0.0, 100.0)))
    (pt,) = expansion_points(s.gas.pipelines[0], 1, s)
    assert 100.0 >= pt[0] > pt[1] >= 0.0


def test_points_distinct_and_nested():
    s = tiny()
    p = s.gas.pipelines[0]
    five = expansion_points(p, 5, s)
    assert len(set(five)) == 5 and all(a > b >= 0 for a, b in five)
    for n in (1, 2, 4):
        assert set(expansion_points(p, n, s)) <= set(expansion_points(p, 2 * n, s))
    assert expansion_points(p, 5, s) == five


def test_points_stay_in_boxes():
    s = tiny(boxes=((30.0, 60.0), (20.0, 50.0)))
    for a, b in expansion_points(s.gas.pipelines[0], 8, s) + expansion_points(s.gas.pipelines[0], 8, s, reverse=True):
        assert 20.0 <= a <= 60.0 and 20.0 <= b <= 60.0


def test_box_without_forward_flow():
    s = tiny(boxes=((10.0, 20.0), (30.0, 40.0)))
    with pytest.raises(FormulationError, match="cannot carry forward flow"):
        expansion_points(s.gas.pipelines[0], 3, s)


def test_bi_fixes_direction_when_reverse_impossible():
    s = tiny(boxes=((50.0, 60.0), (20.0, 40.0)))
    art = build_model(s, "bi")
    y = art.ids("y", "A-B")
    assert all(art.model.variables[v].lower == 1.0 for v in y)


# --- big-M ------------------------------------------------------------------------


def test_big_m_examples():
    s = tiny(k=1.0, boxes=((0.0, 80.0), (0.0, 80.0)))
    m = derive_big_m(s)
    assert m.flow["A-B"] == 80.0
    assert m.slope["A-B"] == pytest.approx(10 * 80.0 / 0.1)
    s = tiny(boxes=((0.0, 77.0), (0.0, 50.0)))
    assert derive_big_m(s).pressure["A-B"] == 77.0


def test_big_m_overrides():
    s = tiny()
    m = derive_big_m(s, FormulationConfig(m_flow={"A-B": 7.0}, m_slope=3.0, eps_pr=1.0))
    assert m.flow["A-B"] == 7.0 and m.slope["A-B"] == 3.0
    with pytest.raises(ValueError):
        derive_big_m(s, FormulationConfig(m_flow=-1.0))


@pytest.mark.parametrize("mode", ["uni"])
def test_halved_flow_bound_binds(reversal, mode):
    base = solve_system(reversal, mode)
    peak = float(np.max(np.abs(base.get("q", "A-B"))))
    # the derived bound never binds at the optimum
    assert peak < derive_big_m(reversal).flow["A-B"] * (1 - 1e-6)
    try:
        worse = solve_system(reversal, mode, FormulationConfig(m_flow=0.5 * peak))
    except SolveFailed as exc:
        assert exc.status == Status.INFEASIBLE
    else:
        assert worse.objective > base.objective * (1 + 1e-6)


# --- objective and power block ----------------------------------------------------


def test_objective_term_count():
    s = tiny(generators=[Generator("G1", "n1", 100.0, 10.0)], suppliers=[GasSupplier("SA", "A", 50.0, 3.0)])
    art = build_model(s, "uni")
    assert sorted(c for _, c in art.model.objective) == [3.0, 3.0, 10.0, 10.0]


def test_all_gfpp_objective_has_only_gas_terms():
    gens = [Generator("F1", "n1", 100.0, 0.0, True, 2.0, "B")]
    art = build_model(tiny(generators=gens), "uni")
    gas_ids = {v for ids in art.index["g"].values() for v in ids}
    assert {v for v, _ in art.model.objective} == gas_ids


@pytest.mark.parametrize("mode", ["uni", "bi"])
def test_zero_demand_costs_nothing(mode):
    assert solve_system(tiny(), mode).objective == pytest.approx(0.0, abs=1e-9)


def test_dc_flow_row():
    s = tiny()
    art = build_model(s, "uni")
    c, a, lo, hi, *_ = art.model.to_arrays()
    row = art.model.constraint_names().index("dcflow_n1_n2_t1")
    x = np.zeros(art.model.num_variables)
    x[art.ids("theta", "n1")[0]] = 0.1
    # row reads f - B*theta_n1 + B*theta_n2 = 0, so f = row residual with f = 0
    assert -(a @ x)[row] == pytest.approx(1.0)


def test_missing_reference_node_rejected():
    s = tiny()
    nodes = tuple(dataclasses.replace(n, reference=False) for n in s.power.nodes)
    bad = dataclasses.replace(s, power=dataclasses.replace(s.power, nodes=nodes))
    with pytest.raises(FormulationError, match="reference node"):
        build_model(bad, "uni")


def test_islanded_load_is_infeasible():
    s = tiny(elec=20.0, lines=False)
    with pytest.raises(SolveFailed) as info:
        solve_system(s, "uni")
    assert info.value.status == Status.INFEASIBLE


def test_merit_order_dispatch():
    gens = [Generator("G1", "n1", 100.0, 10.0), Generator("G2", "n1", 100.0, 20.0)]
    sched = solve_system(tiny(elec=30.0, generators=gens), "uni")
    np.testing.assert_allclose(sched.get("p", "G1"), 30.0, atol=1e-9)
    np.testing.assert_allclose(sched.get("p", "G2"), 0.0, atol=1e-9)
    assert sched.objective == pytest.approx(2 * 300.0)


# --- gas blocks -------------------------------------------------------------------


def test_compression_row_coefficients():
    art = build_model(tiny(gamma=1.5), "uni")
    m = art.model
    row = m.constraints[m.constraint_names().index("compress_A_B_t1")]
    assert sorted(c for _, c in row.terms) == [-1.5, 1.0]
    art = build_model(tiny(), "uni")
    row = art.model.constraints[art.model.constraint_names().index("compress_A_B_t1")]
    assert sorted(c for _, c in row.terms) == [-1.0, 1.0]


def test_compressor_boost_admissible():
    s = tiny(gamma=1.5, boxes=((40.0, 40.0), (20.0, 70.0)), h0=50.0)
    art = build_model(s, "uni")
    pu = art.ids("pr", "B")[0]
    res = solve(art.model.fix({pu: 60.0}))
    assert res.status == Status.OPTIMAL
    res = solve(art.model.fix({pu: 60.5}))
    assert res.status == Status.INFEASIBLE


def test_supplier_at_capacity():
    sups = [GasSupplier("SA", "A", 10.0, 1.0), GasSupplier("SB", "B", 100.0, 50.0)]
    sched = solve_system(tiny(gas=30.0, suppliers=sups), "uni")
    np.testing.assert_allclose(sched.get("g", "SA"), 10.0, atol=1e-7)


def test_single_hour_steady_state():
    s = tiny(hours=1, gas=25.0, suppliers=[GasSupplier("SA", "A", 500.0, 3.0)])
    sched = solve_system(s, "uni")
    assert sched.get("q", "A-B")[0] == pytest.approx(25.0, abs=1e-7)
    assert sched.get("h", "A-B")[0] == pytest.approx(40.0, abs=1e-7)


def test_steady_state_keeps_linepack():
    s = tiny(hours=3, gas=20.0)
    art = build_model(s, "uni")
    fix = {v: 20.0 for sym in ("qin", "qout") for v in art.ids(sym, "A-B")}
    sched = extract_schedule(art, solve(art.model.fix(fix)), s)
    np.testing.assert_allclose(sched.get("h", "A-B"), 40.0, atol=1e-9)


def test_equal_pressures_force_zero_flow():
    s = tiny(hours=1, boxes=((30.0, 60.0), (30.0, 60.0)), h0=45.0)
    art = build_model(s, "uni")
    fixed = art.model.fix({art.ids("pr", "A")[0]: 45.0, art.ids("pr", "B")[0]: 45.0})
    # objective now rewards flow; the slope row still pins it to zero
    fixed.set_objective([(art.ids("q", "A-B")[0], -1.0)])
    res = solve(fixed)
    assert res.status == Status.OPTIMAL and res.objective == pytest.approx(0.0, abs=1e-9)


def test_empty_point_set_rejected():
    from gasflex.formulation import build_unidirectional_gas_block

    s = tiny()
    art = build_model(s, "uni")
    with pytest.raises(FormulationError, match="no expansion points"):
        build_unidirectional_gas_block(s, art, {"A-B": []}, art.bigm)


def test_binary_counts():
    s = random_system(3, 4, 5, 4)
    uni, bi = build_model(s, "uni"), build_model(s, "bi")
    assert uni.model.num_binaries == 0
    assert bi.model.num_binaries == len(s.gas.pipelines) * s.hours
    assert "y" not in uni.index


def _fix_y(art, value):
    return art.model.fix({v: value for ids in art.index["y"].values() for v in ids})


@pytest.mark.parametrize("seed", range(6))
def test_forward_directions_reproduce_uni(seed):
    s = random_system(seed, 3, 3, 3, compressor_prob=0.3)
    uni = solve(build_model(s, "uni").model)
    fixed = solve(_fix_y(build_model(s, "bi"), 1.0))
    assert uni.status == fixed.status == Status.OPTIMAL
    assert fixed.objective == pytest.approx(uni.objective, rel=1e-6)


def test_forward_directions_reproduce_uni_on_reversal(reversal):
    uni = solve(build_model(reversal, "uni").model)
    fixed = solve(_fix_y(build_model(reversal, "bi"), 1.0))
    assert fixed.objective == pytest.approx(uni.objective, rel=1e-6)


def test_reverse_direction_substitution():
    s = tiny(hours=1, gas=10.0, suppliers=[GasSupplier("SB", "B", 100.0, 1.0)], boxes=((30.0, 60.0), (30.0, 60.0)))
    art = build_model(s, "bi")
    res = solve(_fix_y(art, 0.0))
    sched = extract_schedule(art, res, s)
    assert sched.get("qp", "A-B")[0] == pytest.approx(0.0, abs=1e-9)
    assert sched.get("phim", "A-B")[0] == pytest.approx(0.0, abs=1e-9)
    assert sched.get("phiu", "A-B")[0] == pytest.approx(0.0, abs=1e-9)
    assert sched.get("pr", "B")[0] >= sched.get("pr", "A")[0] - 1e-9


def test_reversal_instance_flips(reversal):
    sched = solve_system(reversal, "bi")
    y = np.round(sched.get("y", "A-B"))
    assert len(set(y)) == 2
