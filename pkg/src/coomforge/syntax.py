"""AST node definitions for COOM model and user-input files.

All nodes are frozen dataclasses. Source positions are carried for error
reporting but excluded from equality so that round-tripped ASTs compare
structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Cardinality:
    lo: int
    hi: int | None  # None means unbounded (`lo..*`)

    @property
    def bounded(self) -> bool:
        return self.hi is not None


DEFAULT_CARDINALITY = Cardinality(1, 1)


@dataclass(frozen=True)
class NumRange:
    lo: int
    hi: int


@dataclass(frozen=True)
class FeatureDecl:
    type_name: str
    name: str
    cardinality: Cardinality = DEFAULT_CARDINALITY
    num_range: NumRange | None = None  # present iff type_name == "num"
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ProductDef:
    features: tuple[FeatureDecl, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class StructureDef:
    name: str
    features: tuple[FeatureDecl, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class EnumOption:
    name: str
    attr_values: tuple[int, ...] = ()


@dataclass(frozen=True)
class EnumerationDef:
    name: str
    attributes: tuple[str, ...]  # names of `attribute num` declarations
    options: tuple[EnumOption, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


# --- expressions ------------------------------------------------------------

@dataclass(frozen=True)
class PathExpr:
    parts: tuple[str, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def text(self) -> str:
        return ".".join(self.parts)


@dataclass(frozen=True)
class Const:
    """Integer or symbol literal.

    Booleans are represented as the symbols ``true`` and ``false``.
    """

    value: int | str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def is_int(self) -> bool:
        return isinstance(self.value, int)


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: Expr


@dataclass(frozen=True)
class Binary:
    op: str  # "||", "&&", "=", "!=", "<", "<=", ">", ">=", "+", "-", "*"
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Aggregate:
    fn: str  # "count" or "sum"
    arg: PathExpr
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


Expr = PathExpr | Const | Unary | Binary | Aggregate


# --- behaviors --------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalRequire:
    condition: Expr
    requirement: Expr
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Require:
    requirement: Expr
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class AllowRow:
    # one entry per column; each entry is a non-empty tuple of literal values
    entries: tuple[tuple[int | str, ...], ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Combinations:
    columns: tuple[PathExpr, ...]
    rows: tuple[AllowRow, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


BehaviorDef = ConditionalRequire | Require | Combinations


@dataclass(frozen=True)
class CoomAst:
    product: ProductDef
    enumerations: tuple[EnumerationDef, ...]
    structures: tuple[StructureDef, ...]
    behaviors: tuple[BehaviorDef, ...]

    def enumeration(self, name: str) -> EnumerationDef | None:
        for e in self.enumerations:
            if e.name == name:
                return e
        return None

    def structure(self, name: str) -> StructureDef | None:
        for s in self.structures:
            if s.name == name:
                return s
        return None


# --- user input -------------------------------------------------------------

@dataclass(frozen=True)
class InstancePath:
    """Instance path like ``root.carrier[0].bag[1]``.

    Steps are (feature name, index) pairs below the implicit root.
    """

    steps: tuple[tuple[str, int], ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def variable_id(self) -> str:
        return "root" + "".join(f".{name}[{idx}]" for name, idx in self.steps)

    @property
    def text(self) -> str:
        if not self.steps:
            return "root"
        return ".".join(f"{name}[{idx}]" for name, idx in self.steps)


@dataclass(frozen=True)
class AddDirective:
    target: InstancePath
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def text(self) -> str:
        return f"add {self.target.text}"


@dataclass(frozen=True)
class SetDirective:
    target: InstancePath
    value: int | str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def text(self) -> str:
        return f"set {self.target.text} = {self.value}"


Directive = AddDirective | SetDirective


@dataclass(frozen=True)
class UserInputAst:
    directives: tuple[Directive, ...]
