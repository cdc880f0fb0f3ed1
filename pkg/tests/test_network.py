import copy

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from gasflex.network import (
    SystemLoadError,
    dump_system,
    load_system,
    load_system_file,
    to_document,
    validate_system,
)
from gasflex.toys import random_system, shipped_path, shipped_system


@pytest.fixture
def doc():
    return yaml.safe_load(shipped_path("toy_minimal").read_text())


def load_error(d) -> list[str]:
    with pytest.raises(SystemLoadError) as info:
        load_system(d)
    return info.value.problems


def test_minimal_document(doc):
    s = load_system(doc)
    assert s.hours == 3 and list(s.horizon) == [1, 2, 3]
    assert len(s.power.nodes) == 2 and len(s.gas.nodes) == 2
    assert validate_system(s) == []


def test_gfpp_with_missing_gas_node_names_it(doc):
    doc["power"]["generators"][1]["gas_node"] = "Z"
    (problem,) = load_error(doc)
    assert "'Z'" in problem and problem.startswith("power.generators[1].gas_node")


def test_series_length_mismatch(doc):
    doc["series"]["L1"] = [1.0, 2.0]
    (problem,) = load_error(doc)
    assert "length 2, expected 3" in problem


def test_schema_violation_is_path_qualified(doc):
    del doc["gas"]["nodes"][0]["pr_min"]
    assert load_error(doc) == ["gas.nodes[0]: 'pr_min' is a required property"]


def test_units_are_checked(doc):
    doc["meta"]["units"]["pressure"] = "psi"
    assert load_error(doc)[0].startswith("meta.units.pressure")


def test_dangling_series_reference(doc):
    doc["gas"]["loads"][0]["demand"] = "nope"
    assert "nope" in load_error(doc)[0]


def test_duplicate_ids(doc):
    doc["gas"]["nodes"][1]["id"] = "A"
    assert any("duplicate" in p for p in load_error(doc))


def test_pressure_bounds_violation(doc):
    doc["gas"]["nodes"][0]["pr_min"] = 70.0
    (v,) = validate_system(load_system(doc))
    assert v.entity == "gas node A" and v.rule == "pressure-bounds"


def test_unreachable_initial_linepack(doc):
    # S * (60 + 50) / 2 = 55
    doc["gas"]["pipelines"][0]["initial_linepack"] = 55.5
    (v,) = validate_system(load_system(doc))
    assert v.rule == "initial-linepack"
    doc["gas"]["pipelines"][0]["initial_linepack"] = 55.0
    assert validate_system(load_system(doc)) == []


def test_reference_node_required(doc):
    doc["power"]["nodes"][0]["reference"] = False
    assert [v.rule for v in validate_system(load_system(doc))] == ["reference-node"]


def test_gfpp_needs_eta(doc):
    del doc["power"]["generators"][1]["eta"]
    assert any("eta" in str(v) for v in validate_system(load_system(doc)))


def test_file_loading_and_missing_file(tmp_path):
    s = load_system_file(shipped_path("toy_reversal"))
    assert s.name == "toy_reversal"
    with pytest.raises(OSError):
        load_system_file(tmp_path / "absent.yaml")


def test_case24_dimensions():
    s = shipped_system("case24_12")
    assert (len(s.power.nodes), len(s.gas.nodes)) == (24, 12)
    assert len(s.gas.pipelines) == 12 and s.hours == 24
    assert validate_system(s) == []


@pytest.mark.parametrize("name", ["toy_minimal", "toy_reversal", "toy_counterexample", "case24_12"])
def test_shipped_round_trip(name):
    s = shipped_system(name)
    assert load_system(dump_system(s)) == s


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), nodes=st.integers(2, 5), extra=st.integers(0, 2), hours=st.integers(1, 6))
def test_round_trip_random(seed, nodes, extra, hours):
    pipes = min(nodes - 1 + extra, nodes * (nodes - 1) // 2)
    s = random_system(seed, nodes, pipes, hours, compressor_prob=0.3)
    assert validate_system(s) == []
    back = load_system(dump_system(s))
    assert back == s
    assert to_document(back) == to_document(s)
    assert back.fingerprint() == s.fingerprint()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), nodes=st.integers(2, 5))
def test_coupling_sets_partition_entities(seed, nodes):
    s = random_system(seed, nodes, nodes - 1, 2)
    assert sum(map(len, s.suppliers_at.values())) == len(s.gas.suppliers)
    assert sum(map(len, s.gfpps_at.values())) == len(s.gfpps)
    assert sum(map(len, s.gas_loads_at.values())) == len(s.gas.loads)
    assert sum(map(len, s.generators_at.values())) == len(s.power.generators)
    assert sum(map(len, s.electric_loads_at.values())) == len(s.power.loads)
    assert sum(map(len, s.wind_at.values())) == len(s.power.wind)


def test_window_shifts_hours(reversal):
    w = reversal.window(2, 5)
    assert w.hours == 3 and list(w.horizon) == [3, 4, 5]
    assert w.gas.loads[0].demand == reversal.gas.loads[0].demand[2:5]


def test_schema_violation_lists_every_problem(doc):
    bad = copy.deepcopy(doc)
    del bad["gas"]["nodes"][0]["pr_min"]
    bad["power"]["lines"][0]["capacity"] = "high"
    assert len(load_error(bad)) == 2
