from pathlib import Path

import pytest

from coomforge import instantiate, parse_model, validate_ast

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

MODEL_FIXTURES = [
    "kids-bike", "travel-bike", "travel-bike-simplified", "travel-bike-mini",
    "cargo-bike", "mini-color", "mini-bool", "mini-parts", "mini-nested",
]


def fixture_source(name: str) -> str:
    return (FIXTURES / f"{name}.coom").read_text()


def load_ast(name: str):
    ast = parse_model(fixture_source(name))
    errors = validate_ast(ast)
    assert not errors, errors
    return ast


def load_space(name: str, max_bound: int = 1):
    return instantiate(load_ast(name), max_bound=max_bound)


@pytest.fixture
def kids_bike():
    return load_space("kids-bike")


@pytest.fixture
def travel_bike():
    return load_space("travel-bike")


@pytest.fixture
def travel_bike_simplified():
    return load_space("travel-bike-simplified")
