"""Semantic validation of parsed COOM models."""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Aggregate,
    Binary,
    Combinations,
    ConditionalRequire,
    Const,
    CoomAst,
    EnumerationDef,
    Expr,
    FeatureDecl,
    PathExpr,
    Require,
    Unary,
)


@dataclass(frozen=True)
class SemanticError:
    message: str
    line: int
    column: int
    name: str = ""

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


@dataclass(frozen=True)
class PathType:
    """Static type of a path expression.

    kind is one of "enum", "bool", "int" (num features and enumeration
    attributes). ``singleton`` means every feature on the path has upper
    bound 1, so the path denotes at most one variable.
    """

    kind: str
    enum: EnumerationDef | None = None
    singleton: bool = True


class _Validator:
    def __init__(self, ast: CoomAst):
        self.ast = ast
        self.errors: list[SemanticError] = []

    def error(self, message: str, node, name: str = "") -> None:
        line = getattr(node, "line", 0)
        column = getattr(node, "column", 0)
        self.errors.append(SemanticError(message, line, column, name))

    def run(self) -> list[SemanticError]:
        self.check_declarations()
        self.check_features(self.ast.product.features)
        for struct in self.ast.structures:
            self.check_features(struct.features)
        self.check_type_graph_acyclic()
        for behavior in self.ast.behaviors:
            self.check_behavior(behavior)
        return self.errors

    def check_declarations(self) -> None:
        seen: dict[str, object] = {}
        for decl in (*self.ast.enumerations, *self.ast.structures):
            if decl.name in seen or decl.name == "Bool":
                self.error(f"duplicate type name '{decl.name}'", decl, decl.name)
            seen[decl.name] = decl
        for enum in self.ast.enumerations:
            if len(set(enum.attributes)) != len(enum.attributes):
                self.error(f"duplicate attribute in enumeration '{enum.name}'", enum, enum.name)
            names = [o.name for o in enum.options]
            if len(set(names)) != len(names):
                self.error(f"duplicate option in enumeration '{enum.name}'", enum, enum.name)
            if not enum.options:
                self.error(f"enumeration '{enum.name}' has no options", enum, enum.name)
            for opt in enum.options:
                if len(opt.attr_values) != len(enum.attributes):
                    self.error(
                        f"option '{opt.name}' of '{enum.name}' supplies "
                        f"{len(opt.attr_values)} attribute values, expected "
                        f"{len(enum.attributes)}", enum, opt.name)

    def check_features(self, features: tuple[FeatureDecl, ...]) -> None:
        names: set[str] = set()
        for feat in features:
            if feat.name in names:
                self.error(f"duplicate feature name '{feat.name}'", feat, feat.name)
            names.add(feat.name)
            card = feat.cardinality
            if card.hi is not None and card.lo > card.hi:
                self.error(
                    f"feature '{feat.name}' has cardinality lower bound above upper bound",
                    feat, feat.name)
            if feat.type_name == "num":
                if feat.num_range is None or feat.num_range.lo > feat.num_range.hi:
                    self.error(f"num feature '{feat.name}' needs a valid range", feat, feat.name)
            elif feat.type_name != "Bool":
                if (self.ast.enumeration(feat.type_name) is None
                        and self.ast.structure(feat.type_name) is None):
                    self.error(
                        f"unresolved type '{feat.type_name}' for feature '{feat.name}'",
                        feat, feat.type_name)

    def check_type_graph_acyclic(self) -> None:
        # DFS over structure references; enums and num cannot recurse
        visiting: set[str] = set()
        done: set[str] = set()

        def visit(struct_name: str, node) -> None:
            if struct_name in done:
                return
            if struct_name in visiting:
                self.error(
                    f"cycle in structure references involving '{struct_name}'",
                    node, struct_name)
                return
            struct = self.ast.structure(struct_name)
            if struct is None:
                return
            visiting.add(struct_name)
            for feat in struct.features:
                visit(feat.type_name, feat)
            visiting.discard(struct_name)
            done.add(struct_name)

        for feat in self.ast.product.features:
            visit(feat.type_name, feat)

    # --- path and expression typing ----------------------------------------

    def resolve_path(self, path: PathExpr) -> PathType | None:
        features: tuple[FeatureDecl, ...] = self.ast.product.features
        singleton = True
        for i, part in enumerate(path.parts):
            feat = next((f for f in features if f.name == part), None)
            if feat is None:
                # the last part may name an enumeration attribute of the
                # feature resolved so far
                self.error(f"cannot resolve path '{path.text}' at '{part}'", path, part)
                return None
            singleton = singleton and feat.cardinality.hi == 1
            last = i == len(path.parts) - 1
            if feat.type_name == "num":
                if not last:
                    self.error(f"num feature '{part}' cannot be navigated into", path, part)
                    return None
                return PathType("int", singleton=singleton)
            if feat.type_name == "Bool":
                if not last:
                    self.error(f"Bool feature '{part}' cannot be navigated into", path, part)
                    return None
                return PathType("bool", singleton=singleton)
            enum = self.ast.enumeration(feat.type_name)
            if enum is not None:
                if last:
                    return PathType("enum", enum, singleton)
                if len(path.parts) == i + 2 and path.parts[i + 1] in enum.attributes:
                    return PathType("int", singleton=singleton)
                self.error(
                    f"'{path.parts[i + 1]}' is not an attribute of enumeration "
                    f"'{enum.name}'", path, path.parts[i + 1])
                return None
            struct = self.ast.structure(feat.type_name)
            if struct is None:
                return None  # unresolved type, reported by check_features
            if last:
                self.error(
                    f"path '{path.text}' ends at part feature '{part}'; "
                    "parts have no value", path, part)
                return None
            features = struct.features
        return None

    def type_of(self, expr: Expr) -> str | None:
        """Returns "int", "enum:<Name>", "bool" or None on error."""
        if isinstance(expr, Const):
            if expr.is_int:
                return "int"
            if expr.value in ("true", "false"):
                return "bool"
            return f"sym:{expr.value}"
        if isinstance(expr, PathExpr):
            ptype = self.resolve_path(expr)
            if ptype is None:
                return None
            if not ptype.singleton:
                self.error(
                    f"path '{expr.text}' denotes more than one variable; only "
                    "aggregate arguments may do so", expr, expr.text)
                return None
            if ptype.kind == "enum":
                return f"enum:{ptype.enum.name}"
            return ptype.kind
        if isinstance(expr, Aggregate):
            ptype = self.resolve_path(expr.arg)
            if ptype is None:
                return None
            if expr.fn == "sum" and ptype.kind != "int":
                self.error(
                    f"sum argument '{expr.arg.text}' must denote numeric variables",
                    expr, expr.arg.text)
                return None
            return "int"
        if isinstance(expr, Unary):
            inner = self.type_of(expr.operand)
            if inner is None:
                return None
            expected = "bool" if expr.op == "!" else "int"
            if inner != expected:
                self.error(f"operand of '{expr.op}' must be {expected}", expr.operand)
                return None
            return expected
        if isinstance(expr, Binary):
            return self.type_of_binary(expr)
        return None

    def type_of_binary(self, expr: Binary) -> str | None:
        left = self.type_of(expr.left)
        right = self.type_of(expr.right)
        if left is None or right is None:
            return None
        op = expr.op
        if op in ("||", "&&"):
            if left != "bool" or right != "bool":
                self.error(f"operands of '{op}' must be boolean", expr.left)
                return None
            return "bool"
        if op in ("+", "-"):
            if left != "int" or right != "int":
                self.error(f"operands of '{op}' must be numeric", expr.left)
                return None
            return "int"
        if op == "*":
            if left != "int" or right != "int":
                self.error("operands of '*' must be numeric", expr.left)
                return None
            # only linear forms are solvable: one side must be constant
            if not (self._is_const(expr.left) or self._is_const(expr.right)):
                self.error("multiplication needs at least one constant operand", expr.left)
            return "int"
        if op in ("<", "<=", ">", ">="):
            if left != "int" or right != "int":
                self.error(f"operands of '{op}' must be numeric", expr.left)
                return None
            return "bool"
        # = and != over matching kinds
        if left == "int" and right == "int":
            return "bool"
        if not self._symbols_compatible(left, right):
            self.error(f"incompatible operands for '{op}'", expr.left)
            return None
        return "bool"

    def _symbols_compatible(self, left: str, right: str) -> bool:
        for a, b in ((left, right), (right, left)):
            if a.startswith("enum:") and b.startswith("sym:"):
                enum = self.ast.enumeration(a.split(":", 1)[1])
                if enum and b.split(":", 1)[1] not in {o.name for o in enum.options}:
                    return False
                return True
        if left.startswith("enum:") and left == right:
            return True
        if left == "bool" and right == "bool":
            return True
        return False

    @staticmethod
    def _is_const(expr: Expr) -> bool:
        if isinstance(expr, Const):
            return True
        if isinstance(expr, Unary) and expr.op == "-":
            return _Validator._is_const(expr.operand)
        return False

    def check_behavior(self, behavior) -> None:
        if isinstance(behavior, Require):
            self.check_bool_expr(behavior.requirement)
        elif isinstance(behavior, ConditionalRequire):
            self.check_bool_expr(behavior.condition)
            self.check_bool_expr(behavior.requirement)
        elif isinstance(behavior, Combinations):
            self.check_table(behavior)

    def check_bool_expr(self, expr: Expr) -> None:
        etype = self.type_of(expr)
        if etype is not None and etype != "bool":
            self.error("constraint expression must be boolean", expr)

    def check_table(self, table: Combinations) -> None:
        col_types = []
        for col in table.columns:
            ptype = self.resolve_path(col)
            if ptype is not None and not ptype.singleton:
                self.error(
                    f"table column '{col.text}' must denote a single variable",
                    col, col.text)
                ptype = None
            col_types.append(ptype)
        for row in table.rows:
            if len(row.entries) != len(table.columns):
                self.error(
                    f"allow row has {len(row.entries)} entries, expected "
                    f"{len(table.columns)}", row)
                continue
            for entry, ptype in zip(row.entries, col_types):
                if ptype is None:
                    continue
                for value in entry:
                    self.check_table_value(value, ptype, row)

    def check_table_value(self, value: int | str, ptype: PathType, node) -> None:
        if ptype.kind == "int":
            if not isinstance(value, int):
                self.error(f"table entry '{value}' is not numeric", node)
        elif ptype.kind == "bool":
            if value not in ("true", "false"):
                self.error(f"table entry '{value}' is not a Bool value", node)
        elif ptype.kind == "enum":
            options = {o.name for o in ptype.enum.options}
            if value not in options:
                self.error(
                    f"table entry '{value}' is not an option of enumeration "
                    f"'{ptype.enum.name}'", node)


def validate_ast(ast: CoomAst) -> list[SemanticError]:
    """Check name resolution, typing, and well-formedness of a parsed model."""
    return _Validator(ast).run()
