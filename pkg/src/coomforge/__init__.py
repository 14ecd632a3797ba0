"""COOM product-configuration toolkit: parse, validate, ground, solve,
and reason interactively over configuration models."""

from .parser import CoomParseError, ParseError, parse_model, parse_user_input
from .printer import format_expr, pretty_print, print_user_input
from .session import (
    EXHAUSTED,
    IncrementalResult,
    MusReport,
    Session,
    SessionView,
    assumptions_from_user_input,
    compute_view,
    incremental_solve,
    minimal_unsat_subset,
)
from .solver import (
    CapExceeded,
    Exclude,
    ExcludeValue,
    Fix,
    Include,
    Model,
    UNDEFINED,
    brute_force_enumerate,
    check_model,
    enumerate_models,
    eval_formula,
    solve,
)
from .space import (
    ConfigurationSpace,
    InstantiationError,
    apply_user_input,
    instantiate,
    load_explanations,
    serialize_facts,
    solution_to_coom,
    space_to_json,
)
from .validate import SemanticError, validate_ast

__all__ = [
    "CapExceeded", "ConfigurationSpace", "CoomParseError", "EXHAUSTED",
    "Exclude", "ExcludeValue", "Fix", "Include", "IncrementalResult",
    "InstantiationError", "Model", "MusReport", "ParseError", "SemanticError",
    "Session", "SessionView", "UNDEFINED", "apply_user_input",
    "assumptions_from_user_input", "brute_force_enumerate", "check_model",
    "compute_view", "enumerate_models", "eval_formula", "format_expr",
    "incremental_solve", "instantiate", "load_explanations",
    "minimal_unsat_subset", "parse_model", "parse_user_input", "pretty_print",
    "print_user_input", "serialize_facts", "solution_to_coom", "solve",
    "space_to_json", "validate_ast",
]
