"""Canonical pretty printer for COOM ASTs.

The output is valid COOM that reparses to a structurally equal AST.
"""

from __future__ import annotations

from .syntax import (
    Aggregate,
    Binary,
    Cardinality,
    Combinations,
    ConditionalRequire,
    Const,
    CoomAst,
    DEFAULT_CARDINALITY,
    Expr,
    FeatureDecl,
    PathExpr,
    Require,
    Unary,
    UserInputAst,
)

# precedence levels for parenthesization, higher binds tighter
_PREC = {
    "||": 1, "&&": 2,
    "=": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4, "*": 5,
}
_UNARY_PREC = 6


def format_expr(expr: Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, PathExpr):
        return expr.text
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Aggregate):
        return f"{expr.fn}({expr.arg.text})"
    if isinstance(expr, Unary):
        text = f"{expr.op}{format_expr(expr.operand, _UNARY_PREC)}"
        return f"({text})" if parent_prec > _UNARY_PREC else text
    if isinstance(expr, Binary):
        prec = _PREC[expr.op]
        left = format_expr(expr.left, prec)
        # right operand of a left-associative op needs parens at equal precedence
        right = format_expr(expr.right, prec + 1)
        text = f"{left} {expr.op} {right}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"not an expression node: {expr!r}")


def _format_cardinality(card: Cardinality) -> str:
    if card == DEFAULT_CARDINALITY:
        return ""
    hi = "*" if card.hi is None else str(card.hi)
    return f" {card.lo}..{hi}"


def _format_feature(feat: FeatureDecl) -> str:
    card = _format_cardinality(feat.cardinality)
    if feat.type_name == "num":
        rng = feat.num_range
        return f"    num {feat.name} {rng.lo}..{rng.hi}{card}"
    return f"    {feat.type_name} {feat.name}{card}"


def _format_entry(entry: tuple[int | str, ...]) -> str:
    if len(entry) == 1:
        return str(entry[0])
    return "[" + ", ".join(str(v) for v in entry) + "]"


def pretty_print(ast: CoomAst) -> str:
    lines: list[str] = []
    lines.append("product {")
    lines.extend(_format_feature(f) for f in ast.product.features)
    lines.append("}")
    for struct in ast.structures:
        lines.append("")
        lines.append(f"structure {struct.name} {{")
        lines.extend(_format_feature(f) for f in struct.features)
        lines.append("}")
    for enum in ast.enumerations:
        lines.append("")
        lines.append(f"enumeration {enum.name} {{")
        for attr in enum.attributes:
            lines.append(f"    attribute num {attr}")
        for opt in enum.options:
            if opt.attr_values:
                values = ", ".join(str(v) for v in opt.attr_values)
                lines.append(f"    {opt.name} ({values})")
            else:
                lines.append(f"    {opt.name}")
        lines.append("}")
    if ast.behaviors:
        lines.append("")
        lines.append("behavior {")
        for behavior in ast.behaviors:
            if isinstance(behavior, ConditionalRequire):
                lines.append(f"    condition {format_expr(behavior.condition)}")
                lines.append(f"    require {format_expr(behavior.requirement)}")
            elif isinstance(behavior, Require):
                lines.append(f"    require {format_expr(behavior.requirement)}")
            elif isinstance(behavior, Combinations):
                columns = ", ".join(c.text for c in behavior.columns)
                lines.append(f"    combinations ({columns})")
                for row in behavior.rows:
                    entries = ", ".join(_format_entry(e) for e in row.entries)
                    lines.append(f"    allow ({entries})")
        lines.append("}")
    return "\n".join(lines) + "\n"


def print_user_input(ast: UserInputAst) -> str:
    return "".join(d.text + "\n" for d in ast.directives)
