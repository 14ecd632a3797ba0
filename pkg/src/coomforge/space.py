"""Refinement of a validated AST into the instantiated configuration tree.

The configuration space holds all variables the model can ever include
(upper bounds are compiled away by creating that many variables), the
cardinality sets with their lower-bound constraints, and the lowered
Boolean/table constraints and aggregate functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .printer import format_expr
from .syntax import (
    Aggregate,
    Binary,
    Combinations,
    ConditionalRequire,
    Const,
    CoomAst,
    Expr,
    PathExpr,
    Require,
    Unary,
    UserInputAst,
    AddDirective,
    SetDirective,
)

ROOT_ID = "root"
ROOT_TYPE = "Product"


class InstantiationError(Exception):
    pass


class VarKind(Enum):
    PART = "part"
    DISCRETE = "discrete"
    INTEGER = "integer"


@dataclass(frozen=True)
class Variable:
    id: str
    type_name: str  # structure name for parts, attribute-definition name otherwise
    index: int
    parent: str | None
    kind: VarKind
    set_id: str | None  # cardinality set this variable belongs to


@dataclass(frozen=True)
class AttributeDef:
    name: str
    kind: str  # "discrete" | "integer"
    symbols: tuple[str, ...] | None = None
    lo: int | None = None
    hi: int | None = None
    values: tuple[int, ...] | None = None  # explicit integer domain, if finite set

    def domain(self) -> tuple[int | str, ...]:
        if self.kind == "discrete":
            return self.symbols
        if self.values is not None:
            return self.values
        return tuple(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class VariableSet:
    id: str
    parent: str  # variable owning the feature
    members: tuple[str, ...]  # ascending index order


@dataclass(frozen=True)
class LowerBound:
    set_id: str
    lo: int
    parent: str


# --- lowered formula nodes --------------------------------------------------

@dataclass(frozen=True)
class FVar:
    var: str


@dataclass(frozen=True)
class FConst:
    value: int | str


@dataclass(frozen=True)
class FFn:
    fn: str  # FunctionDef id


@dataclass(frozen=True)
class FUnary:
    op: str
    arg: "FormulaNode"


@dataclass(frozen=True)
class FBinary:
    op: str
    left: "FormulaNode"
    right: "FormulaNode"


FormulaNode = FVar | FConst | FFn | FUnary | FBinary


@dataclass(frozen=True)
class FunctionDef:
    id: str
    kind: str  # "count" | "sum"
    set_id: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class BooleanConstraint:
    id: str
    formula: FormulaNode
    text: str  # human-readable rendering, fallback explanation


@dataclass(frozen=True)
class TableConstraint:
    id: str
    columns: tuple[str, ...]
    # one tuple of allowed values per column, per row
    rows: tuple[tuple[tuple[int | str, ...], ...], ...]
    internal: bool = False


@dataclass
class ConfigurationSpace:
    variables: dict[str, Variable] = field(default_factory=dict)  # pre-order
    attributes: dict[str, AttributeDef] = field(default_factory=dict)
    sets: dict[str, VariableSet] = field(default_factory=dict)
    lower_bounds: list[LowerBound] = field(default_factory=list)
    booleans: list[BooleanConstraint] = field(default_factory=list)
    tables: list[TableConstraint] = field(default_factory=list)
    functions: dict[str, FunctionDef] = field(default_factory=dict)
    function_sets: dict[str, tuple[str, ...]] = field(default_factory=dict)
    max_bound: int = 1

    def order(self, var_id: str) -> int:
        return self._order[var_id]

    def finalize(self) -> None:
        self._order = {vid: i for i, vid in enumerate(self.variables)}
        self._lb_by_set = {lb.set_id: lb for lb in self.lower_bounds}

    def lower_bound_of(self, set_id: str) -> LowerBound | None:
        return self._lb_by_set.get(set_id)

    def domain(self, var_id: str) -> tuple[int | str, ...]:
        return self.attributes[self.variables[var_id].type_name].domain()

    def is_attribute(self, var_id: str) -> bool:
        return self.variables[var_id].kind is not VarKind.PART

    def attribute_vars(self) -> list[Variable]:
        return [v for v in self.variables.values() if v.kind is not VarKind.PART]

    def part_vars(self) -> list[Variable]:
        return [v for v in self.variables.values() if v.kind is VarKind.PART]

    def children(self, var_id: str) -> list[str]:
        return self._children.get(var_id, [])

    def resolve_set(self, parts: tuple[str, ...], start: str = ROOT_ID) -> list[str]:
        """All variables denoted by a path expression from ``start``."""
        current = [start]
        for part in parts:
            step: list[str] = []
            for vid in current:
                vset = self.sets.get(f"{vid}.{part}")
                if vset is None:
                    raise InstantiationError(
                        f"path segment '{part}' does not resolve under '{vid}'")
                step.extend(vset.members)
            current = step
        return current


@dataclass(frozen=True)
class Warning:
    kind: str  # "UnknownVariable" | "NotAnAttribute" | "ValueOutOfDomain"
    directive: str
    message: str

    def __str__(self) -> str:
        return f"warning [{self.kind}]: {self.message} ({self.directive})"


@dataclass(frozen=True)
class UserAssumptions:
    includes: tuple[str, ...]
    values: tuple[tuple[str, int | str], ...]
    warnings: tuple[Warning, ...]


# --- instantiation ----------------------------------------------------------

class _Builder:
    def __init__(self, ast: CoomAst, max_bound: int):
        self.ast = ast
        self.max_bound = max_bound
        self.space = ConfigurationSpace(max_bound=max_bound)
        self.space._children = {}
        self._fn_count = 0

    def build(self) -> ConfigurationSpace:
        space = self.space
        root = Variable(ROOT_ID, ROOT_TYPE, 0, None, VarKind.PART, None)
        space.variables[ROOT_ID] = root
        self.expand_features(ROOT_ID, ROOT_TYPE, self.ast.product.features)
        for n, behavior in enumerate(self.ast.behaviors):
            self.lower_behavior(f"c{n}", behavior)
        space.finalize()
        return space

    def add_variable(self, var: Variable) -> None:
        self.space.variables[var.id] = var
        if var.parent is not None:
            self.space._children.setdefault(var.parent, []).append(var.id)

    def expand_features(self, parent_id: str, owner: str, features) -> None:
        for feat in features:
            lo = feat.cardinality.lo
            hi = feat.cardinality.hi
            if hi is None:
                hi = self.max_bound
                if hi < lo:
                    raise InstantiationError(
                        f"feature '{feat.name}': maximum bound {self.max_bound} is below "
                        f"the declared lower bound {lo}")
            set_id = f"{parent_id}.{feat.name}"
            members = []
            for index in range(hi):
                var_id = f"{set_id}[{index}]"
                members.append(var_id)
                self.expand_variable(var_id, parent_id, set_id, index, owner, feat)
            self.space.sets[set_id] = VariableSet(set_id, parent_id, tuple(members))
            self.space.lower_bounds.append(LowerBound(set_id, lo, parent_id))

    def expand_variable(self, var_id, parent_id, set_id, index, owner, feat) -> None:
        space = self.space
        if feat.type_name == "num":
            attr_name = f"{owner}.{feat.name}"
            if attr_name not in space.attributes:
                space.attributes[attr_name] = AttributeDef(
                    attr_name, "integer", lo=feat.num_range.lo, hi=feat.num_range.hi)
            self.add_variable(Variable(
                var_id, attr_name, index, parent_id, VarKind.INTEGER, set_id))
            return
        if feat.type_name == "Bool":
            if "Bool" not in space.attributes:
                space.attributes["Bool"] = AttributeDef(
                    "Bool", "discrete", symbols=("true", "false"))
            self.add_variable(Variable(
                var_id, "Bool", index, parent_id, VarKind.DISCRETE, set_id))
            return
        enum = self.ast.enumeration(feat.type_name)
        if enum is not None:
            if enum.name not in space.attributes:
                space.attributes[enum.name] = AttributeDef(
                    enum.name, "discrete",
                    symbols=tuple(o.name for o in enum.options))
            self.add_variable(Variable(
                var_id, enum.name, index, parent_id, VarKind.DISCRETE, set_id))
            self.expand_enum_attributes(var_id, enum)
            return
        struct = self.ast.structure(feat.type_name)
        if struct is None:
            raise InstantiationError(f"unresolved feature type '{feat.type_name}'")
        self.add_variable(Variable(
            var_id, struct.name, index, parent_id, VarKind.PART, set_id))
        self.expand_features(var_id, struct.name, struct.features)

    def expand_enum_attributes(self, var_id: str, enum) -> None:
        """Attribute children plus the option-compatibility table of an enum variable."""
        space = self.space
        columns = [var_id]
        for pos, attr in enumerate(enum.attributes):
            attr_name = f"{enum.name}.{attr}"
            if attr_name not in space.attributes:
                values = tuple(sorted({o.attr_values[pos] for o in enum.options}))
                space.attributes[attr_name] = AttributeDef(
                    attr_name, "integer",
                    lo=values[0], hi=values[-1], values=values)
            attr_set = f"{var_id}.{attr}"
            attr_var = f"{attr_set}[0]"
            self.add_variable(Variable(
                attr_var, attr_name, 0, var_id, VarKind.INTEGER, attr_set))
            space.sets[attr_set] = VariableSet(attr_set, var_id, (attr_var,))
            space.lower_bounds.append(LowerBound(attr_set, 1, var_id))
            columns.append(attr_var)
        if enum.attributes:
            rows = tuple(
                ((opt.name,), *((v,) for v in opt.attr_values))
                for opt in enum.options)
            space.tables.append(TableConstraint(
                f"t_{var_id}", tuple(columns), rows, internal=True))

    # --- behavior lowering --------------------------------------------------

    def lower_behavior(self, cid: str, behavior) -> None:
        if isinstance(behavior, Require):
            formula = self.lower_expr(behavior.requirement)
            text = format_expr(behavior.requirement)
            self.space.booleans.append(BooleanConstraint(cid, formula, text))
        elif isinstance(behavior, ConditionalRequire):
            formula = FBinary(
                "||",
                FUnary("!", self.lower_expr(behavior.condition)),
                self.lower_expr(behavior.requirement))
            text = (f"!({format_expr(behavior.condition)}) || "
                    f"{format_expr(behavior.requirement)}")
            self.space.booleans.append(BooleanConstraint(cid, formula, text))
        elif isinstance(behavior, Combinations):
            columns = []
            for col in behavior.columns:
                vids = self.space.resolve_set(col.parts)
                if len(vids) != 1:
                    raise InstantiationError(
                        f"table column '{col.text}' resolves to {len(vids)} variables, "
                        "expected exactly one")
                columns.append(vids[0])
            rows = tuple(row.entries for row in behavior.rows)
            self.space.tables.append(TableConstraint(cid, tuple(columns), rows))

    def lower_expr(self, expr: Expr) -> FormulaNode:
        if isinstance(expr, Const):
            return FConst(expr.value)
        if isinstance(expr, PathExpr):
            vids = self.space.resolve_set(expr.parts)
            if len(vids) == 0:
                raise InstantiationError(
                    f"path '{expr.text}' resolves to zero variables")
            if len(vids) > 1:
                raise InstantiationError(
                    f"path '{expr.text}' denotes {len(vids)} variables outside "
                    "an aggregate")
            return FVar(vids[0])
        if isinstance(expr, Aggregate):
            members = tuple(self.space.resolve_set(expr.arg.parts))
            set_id = f"{ROOT_ID}.{expr.arg.text}"
            existing = self.space.function_sets.get(set_id)
            if existing is not None and existing != members:
                raise InstantiationError(f"conflicting aggregate set '{set_id}'")
            self.space.function_sets[set_id] = members
            fid = f"fn{self._fn_count}"
            self._fn_count += 1
            self.space.functions[fid] = FunctionDef(fid, expr.fn, set_id, members)
            return FFn(fid)
        if isinstance(expr, Unary):
            return FUnary(expr.op, self.lower_expr(expr.operand))
        if isinstance(expr, Binary):
            return FBinary(expr.op, self.lower_expr(expr.left), self.lower_expr(expr.right))
        raise TypeError(f"not an expression node: {expr!r}")


def instantiate(ast: CoomAst, max_bound: int = 1) -> ConfigurationSpace:
    """Expand a validated AST into the configuration tree.

    ``max_bound`` is the compiled upper bound used for unbounded (``lo..*``)
    cardinalities.
    """
    if max_bound < 1:
        raise ValueError("max_bound must be at least 1")
    return _Builder(ast, max_bound).build()


# --- user input -------------------------------------------------------------

def apply_user_input(space: ConfigurationSpace, user_input: UserInputAst) -> UserAssumptions:
    """Validate directives against the space; invalid ones become warnings."""
    includes: list[str] = []
    values: list[tuple[str, int | str]] = []
    warnings: list[Warning] = []
    for directive in user_input.directives:
        var_id = directive.target.variable_id
        var = space.variables.get(var_id)
        if var is None:
            warnings.append(Warning(
                "UnknownVariable", directive.text,
                f"variable '{var_id}' is not part of the configuration model"))
            continue
        if isinstance(directive, AddDirective):
            includes.append(var_id)
            continue
        if var.kind is VarKind.PART:
            warnings.append(Warning(
                "NotAnAttribute", directive.text,
                f"variable '{var_id}' is not an attribute"))
            continue
        if directive.value not in space.domain(var_id):
            warnings.append(Warning(
                "ValueOutOfDomain", directive.text,
                f"value '{directive.value}' is outside the domain of '{var_id}'"))
            continue
        values.append((var_id, directive.value))
    return UserAssumptions(tuple(includes), tuple(values), tuple(warnings))


# --- serialization ----------------------------------------------------------

def _q(value: int | str) -> str:
    if isinstance(value, int):
        return str(value)
    return f'"{value}"'


def _formula_facts(cid: str, node: FormulaNode, lines: list[str], counter: list[int]) -> str:
    """Emit decomposition facts for a formula; returns the node's operand id."""
    if isinstance(node, FFn):
        return node.fn
    fid = f"f{counter[0]}"
    counter[0] += 1
    if isinstance(node, FVar):
        lines.append(f'term("{fid}",var,"{node.var}").')
    elif isinstance(node, FConst):
        lines.append(f'term("{fid}",const,{_q(node.value)}).')
    elif isinstance(node, FUnary):
        arg = _formula_facts(cid, node.arg, lines, counter)
        lines.append(f'unary("{fid}","{node.op}","{arg}").')
    elif isinstance(node, FBinary):
        left = _formula_facts(cid, node.left, lines, counter)
        right = _formula_facts(cid, node.right, lines, counter)
        lines.append(f'binary("{fid}","{left}","{node.op}","{right}").')
    return fid


def serialize_facts(space: ConfigurationSpace,
                    explanations: dict[str, str] | None = None) -> str:
    """Deterministic fact-format rendering of a space, sorted line by line."""
    lines: list[str] = []
    part_types = sorted({v.type_name for v in space.part_vars()})
    for name in part_types:
        lines.append(f'part("{name}").')
    for var in space.variables.values():
        lines.append(f'variable("{var.id}").')
        lines.append(f'type("{var.id}","{var.type_name}").')
        lines.append(f'index("{var.id}",{var.index}).')
        if var.parent is not None:
            lines.append(f'parent("{var.id}","{var.parent}").')
    for attr in space.attributes.values():
        if attr.kind == "discrete":
            lines.append(f'discrete("{attr.name}").')
            for symbol in attr.symbols:
                lines.append(f'domain("{attr.name}","{symbol}").')
        else:
            lines.append(f'integer("{attr.name}").')
            lines.append(f'range("{attr.name}",{attr.lo},{attr.hi}).')
    member_pairs = {(s.id, m) for s in space.sets.values() for m in s.members}
    member_pairs.update(
        (sid, m) for sid, members in space.function_sets.items() for m in members)
    for set_id, member in sorted(member_pairs):
        lines.append(f'set("{set_id}","{member}").')
    for lb in space.lower_bounds:
        lines.append(f'constraint(("{lb.set_id}",{lb.lo}),"lowerbound").')
    counter = [0]
    for constraint in space.booleans:
        lines.append(f'constraint("{constraint.id}","boolean").')
        root = _formula_facts(constraint.id, constraint.formula, lines, counter)
        lines.append(f'formula("{constraint.id}","{root}").')
    for table in space.tables:
        lines.append(f'constraint("{table.id}","table").')
        for k, column in enumerate(table.columns):
            lines.append(f'column("{table.id}",{k},"{column}").')
        for r, row in enumerate(table.rows):
            for c, entry in enumerate(row):
                for value in entry:
                    lines.append(f'allow("{table.id}",({r},{c}),{_q(value)}).')
    for fn in space.functions.values():
        lines.append(f'function("{fn.id}","{fn.kind}","{fn.set_id}").')
    for cid, text in (explanations or {}).items():
        escaped = text.replace('"', '\\"')
        lines.append(f'configuration_explanation("{cid}","{escaped}").')
    return "\n".join(sorted(lines)) + "\n"


def _formula_to_json(node: FormulaNode):
    if isinstance(node, FVar):
        return {"var": node.var}
    if isinstance(node, FConst):
        return {"const": node.value}
    if isinstance(node, FFn):
        return {"fn": node.fn}
    if isinstance(node, FUnary):
        return {"op": node.op, "args": [_formula_to_json(node.arg)]}
    return {"op": node.op, "args": [_formula_to_json(node.left), _formula_to_json(node.right)]}


def space_to_json(space: ConfigurationSpace) -> dict:
    """JSON interchange document mirroring the fact schema."""
    doc: dict = {
        "variable": [], "type": [], "index": [], "parent": [], "part": [],
        "discrete": [], "domain": [], "integer": [], "range": [],
        "set": [], "lowerbound": [], "boolean": [], "table": [], "function": [],
    }
    for name in sorted({v.type_name for v in space.part_vars()}):
        doc["part"].append({"type": name})
    for var in space.variables.values():
        doc["variable"].append({"id": var.id})
        doc["type"].append({"id": var.id, "type": var.type_name})
        doc["index"].append({"id": var.id, "index": var.index})
        if var.parent is not None:
            doc["parent"].append({"id": var.id, "parent": var.parent})
    for attr in space.attributes.values():
        if attr.kind == "discrete":
            doc["discrete"].append({"name": attr.name})
            doc["domain"].extend(
                {"name": attr.name, "value": s} for s in attr.symbols)
        else:
            doc["integer"].append({"name": attr.name})
            doc["range"].append({"name": attr.name, "lo": attr.lo, "hi": attr.hi})
    member_pairs = {(s.id, m) for s in space.sets.values() for m in s.members}
    member_pairs.update(
        (sid, m) for sid, members in space.function_sets.items() for m in members)
    doc["set"] = [{"set": s, "member": m} for s, m in sorted(member_pairs)]
    doc["lowerbound"] = [{"set": lb.set_id, "lo": lb.lo} for lb in space.lower_bounds]
    for constraint in space.booleans:
        doc["boolean"].append({
            "id": constraint.id,
            "formula": _formula_to_json(constraint.formula),
            "text": constraint.text,
        })
    for table in space.tables:
        doc["table"].append({
            "id": table.id,
            "columns": list(table.columns),
            "rows": [[list(entry) for entry in row] for row in table.rows],
            "internal": table.internal,
        })
    for fn in space.functions.values():
        doc["function"].append({"id": fn.id, "kind": fn.kind, "set": fn.set_id})
    return doc


def solution_to_coom(space: ConfigurationSpace, model) -> str:
    """Render a model in user-input syntax; rejects invalid models."""
    from .solver import check_model

    failures = check_model(space, model)
    if failures:
        raise ValueError(f"not a valid model: {failures[0]}")
    lines = []
    for var in space.variables.values():
        if var.id not in model.included:
            continue
        path = "root" if var.id == ROOT_ID else var.id[len(ROOT_ID) + 1:]
        if var.kind is VarKind.PART:
            lines.append(f"add {path}")
        else:
            lines.append(f"set {path} = {model.values[var.id]}")
    return "\n".join(lines) + "\n"


def load_explanations(space: ConfigurationSpace,
                      sidecar: str) -> tuple[dict[str, str], list[str]]:
    """Parse a JSON sidecar of constraint explanations.

    Returns the mapping for known constraint ids plus warnings for unknown ones.
    """
    try:
        raw = json.loads(sidecar)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed explanation sidecar: {exc}") from None
    if not isinstance(raw, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in raw.items()):
        raise ValueError("explanation sidecar must map constraint ids to text")
    known = {c.id for c in space.booleans}
    explanations: dict[str, str] = {}
    warnings: list[str] = []
    for cid, text in raw.items():
        if cid in known:
            explanations[cid] = text
        else:
            warnings.append(f"unknown constraint id '{cid}' in explanations")
    return explanations, warnings
