"""End-to-end acceptance checks.

Each test prints one PASS line when its criterion holds (run pytest with -s
to see them); a failing criterion fails the test itself.
"""

import random
import time

import pytest

from coomforge import (
    Fix,
    Session,
    apply_user_input,
    brute_force_enumerate,
    check_model,
    enumerate_models,
    incremental_solve,
    instantiate,
    load_explanations,
    minimal_unsat_subset,
    parse_model,
    parse_user_input,
    pretty_print,
    serialize_facts,
    solution_to_coom,
    solve,
    validate_ast,
)
from coomforge.session import assumptions_from_user_input

from conftest import FIXTURES, MODEL_FIXTURES, fixture_source, load_ast, load_space


def report(number: int, text: str) -> None:
    print(f"PASS criterion {number}: {text}")


def test_criterion_01_kids_bike_yellow_semantics():
    started = time.monotonic()
    space = load_space("kids-bike")
    models = enumerate_models(space, [Fix("root.color[0]", "Yellow")])
    assert models
    for model in models:
        front = model.values["root.frontWheel[0].size[0]"]
        rear = model.values["root.rearWheel[0].size[0]"]
        assert front > 16
        assert front == rear
    elapsed = time.monotonic() - started
    assert elapsed < 5
    report(1, f"{len(models)} Yellow models, size > 16 and equal wheels "
              f"({elapsed:.2f}s)")


def test_criterion_02_wheel_data_fidelity():
    facts = serialize_facts(load_space("kids-bike"))
    lines = facts.splitlines()
    for table in ("t_root.frontWheel[0]", "t_root.rearWheel[0]"):
        w16_rows = [line for line in lines
                    if line.startswith(f'allow("{table}",')
                    and line.endswith(',"W16").')]
        assert len(w16_rows) == 1
        row = w16_rows[0].split("(", 2)[2].split(",")[0]
        assert f'allow("{table}",({row},1),16).' in lines
        assert f'allow("{table}",({row},2),60).' in lines
    report(2, "W16 carries size 16 and price 60 in both wheel tables")


def test_criterion_03_oracle_equivalence():
    started = time.monotonic()
    fixtures = ["kids-bike", "travel-bike-mini", "mini-color", "mini-bool",
                "mini-parts", "mini-nested"]
    counts = {}
    for name in fixtures:
        space = load_space(name)
        solver_set = {m.key() for m in enumerate_models(space)}
        oracle_set = {m.key() for m in brute_force_enumerate(space)}
        assert solver_set == oracle_set, name
        counts[name] = len(solver_set)
    elapsed = time.monotonic() - started
    assert elapsed < 60
    report(3, f"solver matches brute-force oracle on {len(fixtures)} fixtures "
              f"{counts} ({elapsed:.1f}s)")


def test_criterion_04_travel_bike_cardinality_and_aggregates():
    space = load_space("travel-bike-simplified")
    bag_vars = [v for v, var in space.variables.items()
                if var.type_name == "Bag"]
    models = enumerate_models(space)
    assert models
    for model in models:
        included_bags = [b for b in bag_vars if b in model.included]
        assert len(included_bags) <= 4
        total = sum(model.values[f"{b}.volume[0]"] for b in included_bags)
        assert model.values["root.totalVolume[0]"] == total
    report(4, f"{len(models)} models: never more than 4 bags, totalVolume "
              "always the exact bag-volume sum")


def test_criterion_05_incremental_bounds_cargo():
    started = time.monotonic()
    ast = load_ast("cargo-bike")
    ui = parse_user_input((FIXTURES / "cargo-bike.vol60.input.coom").read_text())
    result = incremental_solve(ast, ui)
    assert result.status == "sat"
    assert result.final_bound == 3
    bags = [v for v, var in result.space.variables.items()
            if var.type_name == "Bag" and v in result.model.included]
    assert len(bags) >= 3
    # bounds 1 and 2 are unsatisfiable when checked directly
    for bound in (1, 2):
        space = instantiate(ast, max_bound=bound)
        applied = apply_user_input(space, ui)
        assert solve(space, assumptions_from_user_input(applied)) is None
    elapsed = time.monotonic() - started
    assert elapsed < 10
    report(5, f"requestedVolume 60 needs bound 3 ({len(bags)} bags); bounds "
              f"1 and 2 unsat ({elapsed:.2f}s)")


def test_criterion_06_user_input_warning_classes():
    space = load_space("travel-bike-simplified")
    # unknown variable: the simplified model has no color feature
    applied = apply_user_input(space, parse_user_input("set color[0] = Yellow"))
    assert [w.kind for w in applied.warnings] == ["UnknownVariable"]
    assert solve(space, assumptions_from_user_input(applied)) is not None
    # part instead of attribute
    applied = apply_user_input(space, parse_user_input("set carrier[0] = X"))
    assert [w.kind for w in applied.warnings] == ["NotAnAttribute"]
    # out-of-domain value
    applied = apply_user_input(
        space, parse_user_input("set requestedVolume[0] = 99"))
    assert [w.kind for w in applied.warnings] == ["ValueOutOfDomain"]
    report(6, "UnknownVariable, NotAnAttribute and ValueOutOfDomain each "
              "warn without aborting the solve")


def test_criterion_07_inference_and_minimal_explanation():
    space = load_space("travel-bike")
    sidecar = (FIXTURES / "travel-bike.explanations.json").read_text()
    explanations, _ = load_explanations(space, sidecar)
    session = Session(space, explanations)
    a_red = session.add_assumption(Fix("root.color[0]", "Red"))
    view = session.view()
    assert view.attribute("root.frontWheel[0]").inferred_value == "W20"
    assert view.attribute("root.frontWheel[0].size[0]").inferred_value == 20

    a_w16 = session.add_assumption(Fix("root.frontWheel[0]", "W16"))
    view = session.view()
    assert not view.satisfiable
    mus = view.mus
    assert set(mus.assumption_ids) == {a_red, a_w16}
    assert "c0" in mus.constraint_ids

    # minimality: dropping any single element restores satisfiability
    kept = {n: a for n, a in session.assumptions if n in mus.assumption_ids}
    others = frozenset(c.id for c in space.booleans) - set(mus.constraint_ids)
    for dropped in mus.assumption_ids:
        rest = [a for n, a in kept.items() if n != dropped]
        assert solve(space, rest, disabled=others) is not None
    for dropped in mus.constraint_ids:
        assert solve(space, list(kept.values()),
                     disabled=others | {dropped}) is not None
    report(7, "Red infers W20/size 20; Red+W16 explained by a verified-"
              "minimal conflict over both assumptions and the conditional")


# --- criterion 8: random model properties ------------------------------------

def _random_model_source(rng: random.Random) -> str:
    option_values = rng.sample(range(1, 6), 3)
    n_options = rng.randint(2, 3)
    lines = []

    def rand_card() -> str:
        if rng.random() < 0.5:
            return ""
        lo = rng.randint(0, 1)
        hi = rng.randint(max(lo, 1), 3)
        return f" {lo}..{hi}"

    def feature_lines(prefix: str, depth: int):
        feats = []
        # the product-level e0 stays singleton so behaviors can reference it
        feats.append((f"E0 e{depth}", "" if depth == 0 else rand_card()))
        if rng.random() < 0.6:
            feats.append((f"Bool b{depth}", rand_card()))
        if rng.random() < 0.5:
            hi = rng.randint(1, 4)
            feats.append((f"num n{depth} 0..{hi}", rand_card()))
        if depth < 2 and rng.random() < 0.6:
            feats.append((f"S{depth} s{depth}", rand_card()))
        return [f"    {decl}{card}" for decl, card in feats]

    depth_used = 0
    lines.append("product {")
    product_feats = feature_lines("", 0)
    lines.extend(product_feats)
    lines.append("}")
    if any("S0" in line for line in product_feats):
        depth_used = 1
        lines.append("structure S0 {")
        s0_feats = feature_lines("s0", 1)
        lines.extend(s0_feats)
        lines.append("}")
        if any("S1" in line for line in s0_feats):
            depth_used = 2
            lines.append("structure S1 {")
            lines.extend(
                f"    {decl}{card}" for decl, card in
                [(f"E0 e2", rand_card())])
            lines.append("}")

    lines.append("enumeration E0 {")
    lines.append("    attribute num v")
    for i in range(n_options):
        lines.append(f"    O{i} ({option_values[i]})")
    lines.append("}")

    behaviors = []
    option = lambda: f"O{rng.randint(0, n_options - 1)}"
    if rng.random() < 0.8:
        behaviors.append(f"    require e0 = {option()} || e0 != {option()}"
                         if rng.random() < 0.5 else
                         f"    require e0.v <= {rng.randint(1, 5)}")
    if rng.random() < 0.5:
        behaviors.append(f"    condition e0 = {option()}")
        behaviors.append(f"    require e0.v >= {rng.randint(0, 5)}")
    if depth_used >= 1:
        behaviors.append(f"    require count(s0.e1) <= {rng.randint(0, 3)}")
        if rng.random() < 0.5:
            behaviors.append(
                f"    require sum(s0.e1.v) <= {rng.randint(0, 8)}")
    if depth_used >= 2 and rng.random() < 0.7:
        behaviors.append(f"    require count(s0.s1.e2) <= {rng.randint(0, 3)}")
    if rng.random() < 0.4:
        rows = "\n".join(
            f"    allow ([{option()}, {option()}])"
            for _ in range(rng.randint(1, 2)))
        behaviors.append(f"    combinations (e0)\n{rows}")
    if behaviors:
        lines.append("behavior {")
        lines.extend(behaviors)
        lines.append("}")
    return "\n".join(lines) + "\n"


def test_criterion_08_random_model_invariants():
    started = time.monotonic()
    rng = random.Random(20240817)
    cases = 1000
    sat_cases = 0
    checked_models = 0
    for case in range(cases):
        source = _random_model_source(rng)
        ast = parse_model(source)
        assert validate_ast(ast) == [], source
        space = instantiate(ast)
        models = enumerate_models(space, limit=5)
        sat_cases += bool(models)
        for model in models:
            assert check_model(space, model) == [], source
            # excluded subtrees carry no values
            assert set(model.values) <= model.included, source
            for vid in model.included:
                parent = space.variables[vid].parent
                assert parent is None or parent in model.included, source
            # included set indices form prefixes
            for vset in space.sets.values():
                flags = [m in model.included for m in vset.members]
                assert flags == sorted(flags, reverse=True), source
            checked_models += 1
    elapsed = time.monotonic() - started
    assert elapsed < 120
    report(8, f"{cases} random models ({sat_cases} satisfiable, "
              f"{checked_models} models checked) hold all invariants "
              f"({elapsed:.1f}s)")


def test_criterion_09_determinism_and_round_trips():
    # byte-stable fact serialization across independent instantiations
    for name in MODEL_FIXTURES:
        first = serialize_facts(load_space(name))
        second = serialize_facts(load_space(name))
        assert first == second, name
    # parse -> print -> parse structural equality
    for name in MODEL_FIXTURES:
        ast = parse_model(fixture_source(name))
        assert parse_model(pretty_print(ast)) == ast, name
    # solution round-trip reproduces the identical model
    for name in MODEL_FIXTURES:
        space = load_space(name)
        model = solve(space)
        assert model is not None
        text = solution_to_coom(space, model)
        applied = apply_user_input(space, parse_user_input(text))
        assert not applied.warnings, name
        again = solve(space, assumptions_from_user_input(applied))
        assert again is not None and again.key() == model.key(), name
    report(9, f"facts byte-stable, print/parse and solution round-trips "
              f"identical on {len(MODEL_FIXTURES)} fixtures")
