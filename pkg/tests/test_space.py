import json

import pytest

from coomforge import (
    InstantiationError,
    Model,
    apply_user_input,
    instantiate,
    load_explanations,
    parse_model,
    parse_user_input,
    serialize_facts,
    solution_to_coom,
    solve,
    space_to_json,
)
from coomforge.space import VarKind

from conftest import FIXTURES, GOLDEN, fixture_source, load_ast, load_space


def test_kids_bike_variables(kids_bike):
    assert list(kids_bike.variables) == [
        "root",
        "root.color[0]",
        "root.frontWheel[0]",
        "root.frontWheel[0].size[0]",
        "root.frontWheel[0].price[0]",
        "root.rearWheel[0]",
        "root.rearWheel[0].size[0]",
        "root.rearWheel[0].price[0]",
        "root.wheelSupport[0]",
    ]
    assert kids_bike.variables["root"].kind is VarKind.PART
    assert kids_bike.variables["root.color[0]"].kind is VarKind.DISCRETE
    assert kids_bike.variables["root.frontWheel[0].size[0]"].kind is VarKind.INTEGER
    assert kids_bike.variables["root.frontWheel[0].size[0]"].parent == "root.frontWheel[0]"


def test_attribute_domains(kids_bike):
    assert kids_bike.domain("root.color[0]") == ("Green", "Red", "Yellow")
    assert kids_bike.domain("root.wheelSupport[0]") == ("true", "false")
    assert kids_bike.domain("root.frontWheel[0].size[0]") == (16, 20, 24)
    assert kids_bike.domain("root.frontWheel[0].price[0]") == (60, 80, 100)


def test_sets_and_lower_bounds(kids_bike):
    assert kids_bike.sets["root.color"].members == ("root.color[0]",)
    bounds = {lb.set_id: lb.lo for lb in kids_bike.lower_bounds}
    assert bounds["root.color"] == 1
    assert bounds["root.frontWheel[0].size"] == 1


def test_enum_compatibility_tables(kids_bike):
    table = next(t for t in kids_bike.tables if t.id == "t_root.frontWheel[0]")
    assert table.internal
    assert table.columns == (
        "root.frontWheel[0]",
        "root.frontWheel[0].size[0]",
        "root.frontWheel[0].price[0]")
    assert table.rows[0] == (("W16",), (16,), (60,))


def test_optional_cardinality_expansion():
    space = load_space("travel-bike-simplified")
    carrier_bags = space.sets["root.carrier[0].bag"].members
    assert carrier_bags == tuple(f"root.carrier[0].bag[{i}]" for i in range(3))
    lb = space.lower_bound_of("root.carrier[0].bag")
    assert lb.lo == 0


def test_unbounded_cardinality_uses_max_bound():
    ast = load_ast("cargo-bike")
    for bound in (1, 3):
        space = instantiate(ast, max_bound=bound)
        assert len(space.sets["root.carrier[0].bag"].members) == bound


def test_max_bound_below_lower_bound_rejected():
    ast = parse_model("""
    product { S s 2..* }
    structure S { Bool b }
    """)
    with pytest.raises(InstantiationError):
        instantiate(ast, max_bound=1)
    assert len(instantiate(ast, max_bound=2).sets["root.s"].members) == 2


def test_aggregate_function_sets():
    space = load_space("travel-bike-simplified")
    members = space.function_sets["root.carrier.bag.volume"]
    assert members == tuple(
        f"root.carrier[0].bag[{i}].volume[0]" for i in range(3))
    kinds = {fn.kind for fn in space.functions.values()}
    assert kinds == {"count", "sum"}


def test_golden_fact_serialization(kids_bike):
    golden = (GOLDEN / "kids-bike.facts.lp").read_text()
    assert serialize_facts(kids_bike) == golden


def test_fact_serialization_with_explanations(travel_bike):
    sidecar = (FIXTURES / "travel-bike.explanations.json").read_text()
    explanations, warnings = load_explanations(travel_bike, sidecar)
    assert warnings == []
    facts = serialize_facts(travel_bike, explanations)
    assert ('configuration_explanation("c0","If the color is red, then the '
            'size of the front wheel should be 20.").') in facts


def test_space_to_json_round_trips_through_json(kids_bike):
    doc = space_to_json(kids_bike)
    again = json.loads(json.dumps(doc))
    assert {v["id"] for v in again["variable"]} == set(kids_bike.variables)
    assert len(again["boolean"]) == 2
    assert len(again["table"]) == 3


def test_user_input_warning_classes(travel_bike_simplified):
    ui = parse_user_input(
        (FIXTURES / "travel-bike-simplified.warnings.input.coom").read_text())
    applied = apply_user_input(travel_bike_simplified, ui)
    kinds = [w.kind for w in applied.warnings]
    assert kinds == ["UnknownVariable", "NotAnAttribute", "ValueOutOfDomain"]
    assert applied.values == (("root.requestedVolume[0]", 30),)
    assert applied.includes == ("root.frame[0].bag[1]",)


def test_solution_to_coom_format(kids_bike):
    model = solve(kids_bike)
    text = solution_to_coom(kids_bike, model)
    lines = text.splitlines()
    assert lines[0] == "add root"
    assert any(line.startswith("set color[0] = ") for line in lines)
    assert all(line.startswith(("add ", "set ")) for line in lines)


def test_solution_to_coom_rejects_invalid_model(kids_bike):
    with pytest.raises(ValueError):
        solution_to_coom(kids_bike, Model(frozenset(), {}))


def test_load_explanations_unknown_id(travel_bike):
    explanations, warnings = load_explanations(
        travel_bike, '{"c0": "text", "c99": "other"}')
    assert explanations == {"c0": "text"}
    assert warnings and "c99" in warnings[0]


def test_load_explanations_malformed(travel_bike):
    with pytest.raises(ValueError):
        load_explanations(travel_bike, "{not json")
    with pytest.raises(ValueError):
        load_explanations(travel_bike, '{"c0": 5}')
