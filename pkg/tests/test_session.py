import pytest

from coomforge import (
    EXHAUSTED,
    Exclude,
    Fix,
    Include,
    Session,
    incremental_solve,
    load_explanations,
    minimal_unsat_subset,
    parse_model,
    parse_user_input,
    solve,
)

from conftest import FIXTURES, load_ast, load_space

ALL_BAGS = [f"root.carrier[0].bag[{i}]" for i in range(3)] + [
    f"root.frame[0].bag[{i}]" for i in range(2)]


def travel_session(travel_bike):
    sidecar = (FIXTURES / "travel-bike.explanations.json").read_text()
    explanations, _ = load_explanations(travel_bike, sidecar)
    return Session(travel_bike, explanations)


def test_initial_view_shows_mandatory_features(travel_bike):
    view = travel_session(travel_bike).view()
    assert view.satisfiable
    color = view.attribute("root.color[0]")
    assert color.shown and color.selected_value is None
    assert color.valid_values == ("Green", "Red", "Yellow")
    assert color.inferred_value is None
    bag = next(p for p in view.parts if p.id == "root.carrier[0].bag[0]")
    assert bag.addable and not bag.forced and not bag.shown


def test_fix_red_infers_front_wheel(travel_bike):
    session = travel_session(travel_bike)
    session.add_assumption(Fix("root.color[0]", "Red"))
    view = session.view()
    front = view.attribute("root.frontWheel[0]")
    assert front.valid_values == ("W20",)
    assert front.inferred_value == "W20"
    assert front.selected_value is None
    size = view.attribute("root.frontWheel[0].size[0]")
    assert size.inferred_value == 20
    # the rear wheel is forced too, through the equal-size constraint
    rear = view.attribute("root.rearWheel[0]")
    assert rear.inferred_value == "W20"


def test_selected_value_not_reported_as_inferred(travel_bike):
    session = travel_session(travel_bike)
    session.add_assumption(Fix("root.color[0]", "Red"))
    session.add_assumption(Fix("root.frontWheel[0]", "W20"))
    view = session.view()
    front = view.attribute("root.frontWheel[0]")
    assert front.selected_value == "W20"
    assert front.inferred_value is None


def test_conflict_produces_minimal_explanation(travel_bike):
    session = travel_session(travel_bike)
    a_red = session.add_assumption(Fix("root.color[0]", "Red"))
    a_w16 = session.add_assumption(Fix("root.frontWheel[0]", "W16"))
    view = session.view()
    assert not view.satisfiable
    mus = view.mus
    assert set(mus.assumption_ids) == {a_red, a_w16}
    assert mus.constraint_ids == ("c0",)
    assert mus.messages == (
        "If the color is red, then the size of the front wheel should be 20.",)


def test_mus_message_falls_back_to_constraint_text(travel_bike):
    session = Session(travel_bike)  # no explanation sidecar
    session.add_assumption(Fix("root.color[0]", "Red"))
    session.add_assumption(Fix("root.frontWheel[0]", "W16"))
    mus = session.view().mus
    assert "frontWheel.size = 20" in mus.messages[0]


def test_mus_requires_unsat_state(travel_bike):
    with pytest.raises(ValueError):
        minimal_unsat_subset(travel_bike, [], [c.id for c in travel_bike.booleans])


def test_retracting_assumption_restores_satisfiability(travel_bike):
    session = travel_session(travel_bike)
    session.add_assumption(Fix("root.color[0]", "Red"))
    num = session.add_assumption(Fix("root.frontWheel[0]", "W16"))
    assert not session.view().satisfiable
    assert session.remove_assumption(num)
    assert session.view().satisfiable
    assert not session.remove_assumption(num)


def test_remove_for_target(travel_bike):
    session = travel_session(travel_bike)
    session.add_assumption(Fix("root.color[0]", "Red"))
    session.add_assumption(Fix("root.frontWheel[0]", "W16"))
    session.remove_for_target("root.frontWheel[0]")
    assert session.view().satisfiable


def test_unknown_assumption_target(travel_bike):
    with pytest.raises(KeyError):
        travel_session(travel_bike).add_assumption(Fix("root.ghost[0]", 1))


def test_integer_attribute_with_wide_domain(travel_bike):
    session = travel_session(travel_bike)
    view = session.view()
    total = view.attribute("root.totalVolume[0]")
    assert total.valid_values is None and total.invalid_values is None
    assert (total.lo, total.hi) == (0, 100)
    assert total.inferred_value is None
    # excluding every bag forces the volume sum, hence totalVolume, to zero
    for bag in ALL_BAGS:
        session.add_assumption(Exclude(bag))
    total = session.view().attribute("root.totalVolume[0]")
    assert total.inferred_value == 0


def test_part_views_track_inclusion(travel_bike_simplified):
    session = Session(travel_bike_simplified)
    view = session.view()
    carrier = next(p for p in view.parts if p.id == "root.carrier[0]")
    assert carrier.forced and carrier.shown and not carrier.addable
    bag = next(p for p in view.parts if p.id == "root.carrier[0].bag[0]")
    assert bag.addable and not bag.removable
    session.add_assumption(Include("root.carrier[0].bag[0]"))
    view = session.view()
    bag = next(p for p in view.parts if p.id == "root.carrier[0].bag[0]")
    assert bag.shown and bag.removable and not bag.addable


def test_browse_enumerates_and_exhausts():
    session = Session(load_space("mini-color"))
    seen = []
    for _ in range(3):
        model = session.browse("next")
        assert model is not EXHAUSTED
        seen.append(model.values["root.color[0]"])
    assert seen == ["Green", "Red", "Yellow"]
    assert session.browse("next") is EXHAUSTED
    first_again = session.browse("reset")
    assert first_again.values["root.color[0]"] == "Green"


def test_browse_respects_assumptions():
    session = Session(load_space("mini-color"))
    session.add_assumption(Fix("root.color[0]", "Yellow"))
    model = session.browse("next")
    assert model.values["root.color[0]"] == "Yellow"
    assert session.browse("next") is EXHAUSTED


def test_browsed_model_extends_shown_parts(travel_bike_simplified):
    session = Session(travel_bike_simplified)
    session.add_assumption(Include("root.frame[0].bag[0]"))
    model = session.browse("next")
    assert "root.frame[0].bag[0]" in model.included
    view = session.view()
    bag = next(p for p in view.parts if p.id == "root.frame[0].bag[0]")
    assert bag.shown


# --- incremental bounds ------------------------------------------------------

def test_incremental_bounds_cargo():
    ast = load_ast("cargo-bike")
    ui = parse_user_input((FIXTURES / "cargo-bike.vol60.input.coom").read_text())
    result = incremental_solve(ast, ui)
    assert result.status == "sat"
    assert result.final_bound == 3
    assert result.bounds_tried == (1, 2, 3)
    bags = [v for v in result.model.included
            if ".bag[" in v and not v.endswith(".volume[0]")]
    assert len(bags) >= 3


def test_incremental_bounds_step_and_start():
    ast = load_ast("cargo-bike")
    ui = parse_user_input((FIXTURES / "cargo-bike.vol60.input.coom").read_text())
    result = incremental_solve(ast, ui, n=2, k=2)
    assert result.status == "sat"
    assert result.bounds_tried == (2, 4)
    assert result.final_bound == 4


def test_incremental_bounds_unsat_without_unbounded_cardinality():
    ast = parse_model("""
    product { Bool b }
    behavior { require b = true
               require b = false }
    """)
    result = incremental_solve(ast)
    assert result.status == "unsat_bounded"
    assert result.bounds_tried == (1,)


def test_incremental_bounds_cap():
    ast = load_ast("cargo-bike")
    ui = parse_user_input((FIXTURES / "cargo-bike.vol60.input.coom").read_text())
    result = incremental_solve(ast, ui, max_bound_cap=2)
    assert result.status == "cap_exceeded"
    assert result.bounds_tried == (1, 2)


def test_incremental_bounds_skips_infeasible_low_bounds():
    ast = parse_model("""
    product { S s 2..* }
    structure S { Bool b }
    """)
    result = incremental_solve(ast)
    assert result.status == "sat"
    assert result.final_bound == 2
    assert result.bounds_tried == (1, 2)
