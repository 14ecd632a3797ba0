"""Command line interface: solve, check, convert, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .parser import CoomParseError, parse_model, parse_user_input
from .session import assumptions_from_user_input, incremental_solve
from .solver import enumerate_models, solve
from .space import (
    InstantiationError,
    apply_user_input,
    instantiate,
    load_explanations,
    serialize_facts,
    solution_to_coom,
    space_to_json,
)
from .validate import validate_ast

EXIT_SAT = 0
EXIT_UNSAT = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise CliError(f"cannot read '{path}': {exc.strerror}") from None


def _load_model(path: str):
    try:
        ast = parse_model(_read(path))
    except CoomParseError as exc:
        raise CliError("\n".join(f"{path}:{e}" for e in exc.errors)) from None
    errors = validate_ast(ast)
    if errors:
        raise CliError("\n".join(f"{path}:{e}" for e in errors))
    return ast


def _load_user_input(path: str | None):
    if path is None:
        return None
    try:
        return parse_user_input(_read(path))
    except CoomParseError as exc:
        raise CliError("\n".join(f"{path}:{e}" for e in exc.errors)) from None


def _load_explanations(space, path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        explanations, warnings = load_explanations(space, _read(path))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    for message in warnings:
        print(f"warning: {message}", file=sys.stderr)
    return explanations


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


def cmd_check(args) -> int:
    _load_model(args.model)
    print("ok")
    return EXIT_SAT


def cmd_convert(args) -> int:
    ast = _load_model(args.model)
    try:
        space = instantiate(ast, max_bound=args.max_bound)
    except InstantiationError as exc:
        raise CliError(str(exc)) from None
    explanations = _load_explanations(space, args.explanations)
    if args.format == "json":
        doc = space_to_json(space)
        if explanations:
            doc["configuration_explanation"] = [
                {"id": cid, "text": text} for cid, text in explanations.items()]
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        _emit(serialize_facts(space, explanations), args.output)
    return EXIT_SAT


def _render_models(space, models, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([m.to_json() for m in models], indent=2) + "\n"
    chunks = [solution_to_coom(space, m) for m in models]
    return "\n".join(chunks)


def cmd_solve(args) -> int:
    ast = _load_model(args.model)
    user_input = _load_user_input(args.user_input)

    if args.incremental_bounds:
        def on_bound(bound: int, satisfiable: bool) -> None:
            status = "sat" if satisfiable else "unsat"
            print(f"bound {bound}: {status}", file=sys.stderr)

        result = incremental_solve(
            ast, user_input, n=args.bound_start, k=args.bound_step,
            max_bound_cap=args.bound_cap, on_bound=on_bound)
        for warning in result.warnings:
            print(warning, file=sys.stderr)
        if result.status == "cap_exceeded":
            print(f"no model up to bound cap {args.bound_cap}", file=sys.stderr)
            return EXIT_UNSAT
        if result.status == "unsat_bounded":
            print("unsatisfiable", file=sys.stderr)
            return EXIT_UNSAT
        _emit(_render_models(result.space, [result.model], args.format),
              args.output)
        return EXIT_SAT

    try:
        space = instantiate(ast, max_bound=args.max_bound)
    except InstantiationError as exc:
        raise CliError(str(exc)) from None
    assumptions = []
    if user_input is not None:
        applied = apply_user_input(space, user_input)
        for warning in applied.warnings:
            print(warning, file=sys.stderr)
        assumptions = assumptions_from_user_input(applied)
    if args.models == 1:
        model = solve(space, assumptions)
        models = [] if model is None else [model]
    else:
        limit = None if args.models == 0 else args.models
        models = enumerate_models(space, assumptions, limit=limit)
    if not models:
        print("unsatisfiable", file=sys.stderr)
        return EXIT_UNSAT
    _emit(_render_models(space, models, args.format), args.output)
    return EXIT_SAT


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ast = _load_model(args.model)
    try:
        space = instantiate(ast, max_bound=args.max_bound)
    except InstantiationError as exc:
        raise CliError(str(exc)) from None
    explanations = _load_explanations(space, args.explanations)
    app = create_app(space, explanations)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_SAT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coomforge",
        description="Parse, check, ground and solve COOM product models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_bound=True):
        p.add_argument("model", help="COOM model file")
        if with_bound:
            p.add_argument("--max-bound", type=int, default=1,
                           help="compiled upper bound for unbounded cardinalities")

    p_check = sub.add_parser("check", help="parse and validate a model")
    add_common(p_check, with_bound=False)
    p_check.set_defaults(func=cmd_check)

    p_convert = sub.add_parser(
        "convert", help="ground a model and print the fact representation")
    add_common(p_convert)
    p_convert.add_argument("-f", "--format", choices=("facts", "json"),
                           default="facts")
    p_convert.add_argument("-o", "--output", help="write to a file instead of stdout")
    p_convert.add_argument("--explanations",
                           help="JSON file mapping constraint ids to explanation text")
    p_convert.set_defaults(func=cmd_convert)

    p_solve = sub.add_parser("solve", help="find configurations of a model")
    add_common(p_solve)
    p_solve.add_argument("-u", "--user-input",
                         help="file of add/set directives applied as assumptions")
    p_solve.add_argument("-m", "--models", type=int, default=1,
                         help="number of models to enumerate (0 = all)")
    p_solve.add_argument("-f", "--format", choices=("coom", "json"), default="coom")
    p_solve.add_argument("-o", "--output", help="write to a file instead of stdout")
    p_solve.add_argument("--incremental-bounds", action="store_true",
                         help="raise the bound for unbounded cardinalities until "
                              "a model exists")
    p_solve.add_argument("--bound-start", type=int, default=1, metavar="N",
                         help="first bound tried by --incremental-bounds")
    p_solve.add_argument("--bound-step", type=int, default=1, metavar="K",
                         help="bound increment of --incremental-bounds")
    p_solve.add_argument("--bound-cap", type=int, default=64,
                         help="give up beyond this bound")
    p_solve.set_defaults(func=cmd_solve)

    p_serve = sub.add_parser("serve", help="run the configuration HTTP service")
    add_common(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("COOMFORGE_PORT", "8000")))
    p_serve.add_argument("--explanations",
                         help="JSON file mapping constraint ids to explanation text")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
