"""Lexer and recursive descent parser for COOM model and user-input files."""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    AddDirective,
    AllowRow,
    Aggregate,
    Binary,
    Cardinality,
    Combinations,
    ConditionalRequire,
    Const,
    CoomAst,
    DEFAULT_CARDINALITY,
    Directive,
    EnumerationDef,
    EnumOption,
    Expr,
    FeatureDecl,
    InstancePath,
    NumRange,
    PathExpr,
    ProductDef,
    Require,
    SetDirective,
    StructureDef,
    Unary,
    UserInputAst,
)

KEYWORDS = {
    "product", "structure", "enumeration", "behavior", "attribute", "num",
    "condition", "require", "combinations", "allow", "count", "sum",
    "add", "set", "root", "true", "false",
}

_SYMBOLS = [
    "..", "||", "&&", "!=", "<=", ">=",
    "{", "}", "(", ")", "[", "]", ",", ".", "=", "<", ">", "+", "-", "*", "!",
]


@dataclass(frozen=True)
class Token:
    kind: str  # keyword/symbol text, or "IDENT_UC", "IDENT_LC", "INT", "EOF"
    value: str | int
    line: int
    column: int


@dataclass(frozen=True)
class ParseError:
    message: str
    line: int
    column: int
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class CoomParseError(Exception):
    """Raised when a COOM source does not parse; carries all collected errors."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


class _SyntaxError(Exception):
    def __init__(self, error: ParseError):
        self.error = error
        super().__init__(str(error))


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("INT", int(source[i:j]), line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            if word in KEYWORDS:
                tokens.append(Token(word, word, line, col))
            elif word[0].isupper():
                tokens.append(Token("IDENT_UC", word, line, col))
            else:
                tokens.append(Token("IDENT_LC", word, line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise _SyntaxError(ParseError(f"unexpected character {ch!r}", line, col))
    tokens.append(Token("EOF", "", line, col))
    return tokens


_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, *kinds: str) -> bool:
        return self.cur.kind in kinds

    def expect(self, *kinds: str) -> Token:
        if self.cur.kind in kinds:
            return self.advance()
        raise self.fail(f"expected {' or '.join(kinds)}, found {self._describe(self.cur)}", kinds)

    def fail(self, message: str, expected: tuple[str, ...] = ()) -> _SyntaxError:
        return _SyntaxError(ParseError(message, self.cur.line, self.cur.column, tuple(expected)))

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "EOF":
            return "end of input"
        return repr(str(tok.value))

    def signed_int(self) -> int:
        if self.at("-"):
            self.advance()
            return -int(self.expect("INT").value)
        return int(self.expect("INT").value)

    # --- model grammar ------------------------------------------------------

    def model(self) -> CoomAst:
        products: list[ProductDef] = []
        enums: list[EnumerationDef] = []
        structs: list[StructureDef] = []
        behaviors: list = []
        errors: list[ParseError] = []
        while not self.at("EOF"):
            try:
                if self.at("product"):
                    tok = self.advance()
                    product = ProductDef(self.feature_block(), tok.line, tok.column)
                    if products:
                        errors.append(ParseError(
                            "only one product allowed per COOM file", tok.line, tok.column))
                    products.append(product)
                elif self.at("structure"):
                    tok = self.advance()
                    name = self.expect("IDENT_UC")
                    structs.append(StructureDef(
                        str(name.value), self.feature_block(), tok.line, tok.column))
                elif self.at("enumeration"):
                    enums.append(self.enumeration())
                elif self.at("behavior"):
                    self.advance()
                    self.expect("{")
                    while not self.at("}", "EOF"):
                        behaviors.append(self.behavior_item())
                    self.expect("}")
                else:
                    raise self.fail(
                        f"expected a top-level declaration, found {self._describe(self.cur)}",
                        ("product", "structure", "enumeration", "behavior"))
            except _SyntaxError as exc:
                errors.append(exc.error)
                self.sync_toplevel()
        if not products:
            errors.append(ParseError("a COOM file must declare a product", 1, 1))
        if errors:
            raise CoomParseError(errors)
        return CoomAst(products[0], tuple(enums), tuple(structs), tuple(behaviors))

    def sync_toplevel(self) -> None:
        while not self.at("EOF", "product", "structure", "enumeration", "behavior"):
            self.advance()

    def feature_block(self) -> tuple[FeatureDecl, ...]:
        self.expect("{")
        features = []
        while not self.at("}", "EOF"):
            features.append(self.feature())
        self.expect("}")
        return tuple(features)

    def feature(self) -> FeatureDecl:
        if self.at("num"):
            tok = self.advance()
            name = self.expect("IDENT_LC")
            lo = self.signed_int()
            self.expect("..")
            hi = self.signed_int()
            card = self.opt_cardinality()
            return FeatureDecl("num", str(name.value), card, NumRange(lo, hi),
                               tok.line, tok.column)
        type_tok = self.expect("IDENT_UC")
        name = self.expect("IDENT_LC")
        card = self.opt_cardinality()
        return FeatureDecl(str(type_tok.value), str(name.value), card, None,
                           type_tok.line, type_tok.column)

    def opt_cardinality(self) -> Cardinality:
        if not self.at("INT"):
            return DEFAULT_CARDINALITY
        lo = int(self.advance().value)
        self.expect("..")
        if self.at("*"):
            self.advance()
            return Cardinality(lo, None)
        hi = int(self.expect("INT").value)
        return Cardinality(lo, hi)

    def enumeration(self) -> EnumerationDef:
        tok = self.expect("enumeration")
        name = self.expect("IDENT_UC")
        self.expect("{")
        attrs = []
        while self.at("attribute"):
            self.advance()
            self.expect("num")
            attrs.append(str(self.expect("IDENT_LC").value))
        options = []
        while self.at("IDENT_UC"):
            opt_name = str(self.advance().value)
            values: tuple[int, ...] = ()
            if self.at("("):
                self.advance()
                vals = [self.signed_int()]
                while self.at(","):
                    self.advance()
                    vals.append(self.signed_int())
                self.expect(")")
                values = tuple(vals)
            options.append(EnumOption(opt_name, values))
        self.expect("}")
        return EnumerationDef(str(name.value), tuple(attrs), tuple(options),
                              tok.line, tok.column)

    def behavior_item(self):
        if self.at("condition"):
            tok = self.advance()
            condition = self.expr()
            self.expect("require")
            return ConditionalRequire(condition, self.expr(), tok.line, tok.column)
        if self.at("require"):
            tok = self.advance()
            return Require(self.expr(), tok.line, tok.column)
        if self.at("combinations"):
            tok = self.advance()
            self.expect("(")
            columns = [self.path()]
            while self.at(","):
                self.advance()
                columns.append(self.path())
            self.expect(")")
            rows = []
            while self.at("allow"):
                row_tok = self.advance()
                self.expect("(")
                entries = [self.table_entry()]
                while self.at(","):
                    self.advance()
                    entries.append(self.table_entry())
                self.expect(")")
                rows.append(AllowRow(tuple(entries), row_tok.line, row_tok.column))
            if not rows:
                raise self.fail("combinations table needs at least one allow row", ("allow",))
            return Combinations(tuple(columns), tuple(rows), tok.line, tok.column)
        raise self.fail(
            f"expected a behavior item, found {self._describe(self.cur)}",
            ("condition", "require", "combinations"))

    def table_entry(self) -> tuple[int | str, ...]:
        if self.at("["):
            self.advance()
            values = [self.literal()]
            while self.at(","):
                self.advance()
                values.append(self.literal())
            self.expect("]")
            return tuple(values)
        return (self.literal(),)

    def literal(self) -> int | str:
        if self.at("INT"):
            return int(self.advance().value)
        if self.at("-"):
            return self.signed_int()
        if self.at("true", "false"):
            return str(self.advance().value)
        tok = self.expect("IDENT_UC")
        return str(tok.value)

    def path(self) -> PathExpr:
        tok = self.expect("IDENT_LC")
        parts = [str(tok.value)]
        while self.at("."):
            self.advance()
            parts.append(str(self.expect("IDENT_LC").value))
        return PathExpr(tuple(parts), tok.line, tok.column)

    # --- expressions, precedence climbing -----------------------------------

    def expr(self) -> Expr:
        return self.or_expr()

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at("||"):
            self.advance()
            left = Binary("||", left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.cmp_expr()
        while self.at("&&"):
            self.advance()
            left = Binary("&&", left, self.cmp_expr())
        return left

    def cmp_expr(self) -> Expr:
        left = self.add_expr()
        if self.at(*_CMP_OPS):
            op = self.advance().kind
            return Binary(op, left, self.add_expr())
        return left

    def add_expr(self) -> Expr:
        left = self.mul_expr()
        while self.at("+", "-"):
            op = self.advance().kind
            left = Binary(op, left, self.mul_expr())
        return left

    def mul_expr(self) -> Expr:
        left = self.unary_expr()
        while self.at("*"):
            self.advance()
            left = Binary("*", left, self.unary_expr())
        return left

    def unary_expr(self) -> Expr:
        if self.at("!"):
            self.advance()
            return Unary("!", self.unary_expr())
        if self.at("-"):
            self.advance()
            return Unary("-", self.unary_expr())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.cur
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if self.at("count", "sum"):
            self.advance()
            self.expect("(")
            arg = self.path()
            self.expect(")")
            return Aggregate(str(tok.value), arg, tok.line, tok.column)
        if self.at("INT"):
            self.advance()
            return Const(int(tok.value), tok.line, tok.column)
        if self.at("true", "false"):
            self.advance()
            return Const(str(tok.value), tok.line, tok.column)
        if self.at("IDENT_UC"):
            self.advance()
            return Const(str(tok.value), tok.line, tok.column)
        if self.at("IDENT_LC"):
            return self.path()
        raise self.fail(
            f"expected an expression, found {self._describe(self.cur)}",
            ("(", "count", "sum", "INT", "IDENT_UC", "IDENT_LC", "true", "false", "!", "-"))

    # --- user input grammar -------------------------------------------------

    def user_input(self) -> UserInputAst:
        directives: list[Directive] = []
        errors: list[ParseError] = []
        while not self.at("EOF"):
            try:
                if self.at("add"):
                    tok = self.advance()
                    directives.append(AddDirective(self.instance_path(), tok.line, tok.column))
                elif self.at("set"):
                    tok = self.advance()
                    target = self.instance_path()
                    self.expect("=")
                    directives.append(SetDirective(target, self.literal(), tok.line, tok.column))
                else:
                    raise self.fail(
                        f"expected 'add' or 'set', found {self._describe(self.cur)}",
                        ("add", "set"))
            except _SyntaxError as exc:
                errors.append(exc.error)
                while not self.at("EOF", "add", "set"):
                    self.advance()
        if errors:
            raise CoomParseError(errors)
        return UserInputAst(tuple(directives))

    def instance_path(self) -> InstancePath:
        tok = self.cur
        steps: list[tuple[str, int]] = []
        if self.at("root"):
            self.advance()
            while self.at("."):
                self.advance()
                steps.append(self.instance_step())
        else:
            steps.append(self.instance_step())
            while self.at("."):
                self.advance()
                steps.append(self.instance_step())
        return InstancePath(tuple(steps), tok.line, tok.column)

    def instance_step(self) -> tuple[str, int]:
        name = self.expect("IDENT_LC")
        self.expect("[")
        idx = int(self.expect("INT").value)
        self.expect("]")
        return (str(name.value), idx)


def parse_model(source: str) -> CoomAst:
    """Parse a COOM model file. Raises :class:`CoomParseError` on failure."""
    try:
        tokens = tokenize(source)
    except _SyntaxError as exc:
        raise CoomParseError([exc.error]) from None
    return _Parser(tokens).model()


def parse_user_input(source: str) -> UserInputAst:
    """Parse a COOM user-input file (add/set directives)."""
    try:
        tokens = tokenize(source)
    except _SyntaxError as exc:
        raise CoomParseError([exc.error]) from None
    return _Parser(tokens).user_input()
