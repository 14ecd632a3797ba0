"""Complete finite-domain solver over a configuration space.

Search is depth-first backtracking in static tree order: for each variable
an inclusion decision (exclude tried first), then a value decision for
included attribute variables. Every constraint is checked as soon as its
last relevant variable is decided. Three-valued semantics: a constraint
whose formula mentions an excluded variable is undefined and cannot be
violated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .space import (
    BooleanConstraint,
    ConfigurationSpace,
    FBinary,
    FConst,
    FFn,
    FormulaNode,
    FUnary,
    FVar,
    LowerBound,
    ROOT_ID,
    TableConstraint,
    VarKind,
)


class _Undefined:
    def __repr__(self):
        return "UNDEFINED"


UNDEFINED = _Undefined()


@dataclass(frozen=True)
class Model:
    included: frozenset[str]
    values: dict[str, int | str]

    def key(self):
        """Hashable identity for set comparisons."""
        return (self.included, frozenset(self.values.items()))

    def to_json(self) -> dict:
        return {
            "included": sorted(self.included),
            "values": dict(sorted(self.values.items())),
        }


# --- assumptions ------------------------------------------------------------

@dataclass(frozen=True)
class Include:
    var: str


@dataclass(frozen=True)
class Exclude:
    var: str


@dataclass(frozen=True)
class Fix:
    var: str
    value: int | str


@dataclass(frozen=True)
class ExcludeValue:
    var: str
    value: int | str


Assumption = Include | Exclude | Fix | ExcludeValue


@dataclass(frozen=True)
class Failure:
    message: str
    constraint_id: str | None = None

    def __str__(self) -> str:
        return self.message


class CapExceeded(Exception):
    def __init__(self, raw_count: int, cap: int):
        self.raw_count = raw_count
        self.cap = cap
        super().__init__(f"raw candidate count {raw_count} exceeds cap {cap}")


# --- formula evaluation -----------------------------------------------------

def _truth(value) -> bool:
    if value is True or value == "true":
        return True
    if value is False or value == "false":
        return False
    raise TypeError(f"not a boolean value: {value!r}")


def _eval(space: ConfigurationSpace, node: FormulaNode, is_included, values):
    if isinstance(node, FConst):
        return node.value
    if isinstance(node, FVar):
        if not is_included(node.var):
            return UNDEFINED
        value = values.get(node.var, UNDEFINED)
        return value
    if isinstance(node, FFn):
        fn = space.functions[node.fn]
        if fn.kind == "count":
            return sum(1 for m in fn.members if is_included(m))
        return sum(values.get(m, 0) for m in fn.members if is_included(m))
    if isinstance(node, FUnary):
        inner = _eval(space, node.arg, is_included, values)
        if inner is UNDEFINED:
            return UNDEFINED
        if node.op == "!":
            return not _truth(inner)
        return -inner
    left = _eval(space, node.left, is_included, values)
    if left is UNDEFINED:
        return UNDEFINED
    right = _eval(space, node.right, is_included, values)
    if right is UNDEFINED:
        return UNDEFINED
    op = node.op
    if op == "||":
        return _truth(left) or _truth(right)
    if op == "&&":
        return _truth(left) and _truth(right)
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    raise ValueError(f"unknown operator {op!r}")


def eval_formula(space: ConfigurationSpace, model: Model, node: FormulaNode):
    """Three-valued evaluation: True, False, or UNDEFINED.

    The result is UNDEFINED exactly when some variable leaf outside an
    aggregate is excluded; aggregate terms are always defined (count of
    included members, sum over included members, empty sum 0).
    """
    result = _eval(space, node, lambda v: v in model.included, model.values)
    if result is UNDEFINED:
        return UNDEFINED
    return _truth(result)


# --- model checking ---------------------------------------------------------

def _table_satisfied(table: TableConstraint, values) -> bool:
    for row in table.rows:
        if all(values[col] in entry for col, entry in zip(table.columns, row)):
            return True
    return False


def check_model(space: ConfigurationSpace, model: Model,
                first_only: bool = False) -> list[Failure]:
    """All invariant and constraint violations of a candidate model."""
    failures: list[Failure] = []

    def fail(message: str, cid: str | None = None) -> bool:
        failures.append(Failure(message, cid))
        return first_only

    if ROOT_ID not in model.included:
        if fail("root variable is not included"):
            return failures
    for vid in model.included:
        var = space.variables.get(vid)
        if var is None:
            if fail(f"unknown variable '{vid}' included"):
                return failures
            continue
        if var.parent is not None and var.parent not in model.included:
            if fail(f"'{vid}' included but its parent is not"):
                return failures
    for vset in space.sets.values():
        seen_gap = False
        for member in vset.members:
            if member in model.included:
                if seen_gap:
                    if fail(f"set '{vset.id}' breaks the index-prefix property"):
                        return failures
                    break
            else:
                seen_gap = True
    for vid, value in model.values.items():
        var = space.variables.get(vid)
        if var is None or var.kind is VarKind.PART:
            if fail(f"value assigned to non-attribute '{vid}'"):
                return failures
            continue
        if vid not in model.included:
            if fail(f"excluded variable '{vid}' carries a value"):
                return failures
        if value not in space.domain(vid):
            if fail(f"value {value!r} outside the domain of '{vid}'"):
                return failures
    for vid in model.included:
        var = space.variables.get(vid)
        if var is not None and var.kind is not VarKind.PART and vid not in model.values:
            if fail(f"included attribute '{vid}' has no value"):
                return failures
    for lb in space.lower_bounds:
        if lb.parent not in model.included:
            continue
        members = space.sets[lb.set_id].members
        count = sum(1 for m in members if m in model.included)
        if count < lb.lo:
            if fail(f"lower bound {lb.lo} of set '{lb.set_id}' not met", lb.set_id):
                return failures
    for constraint in space.booleans:
        if eval_formula(space, model, constraint.formula) is False:
            if fail(f"constraint '{constraint.id}' violated: {constraint.text}",
                    constraint.id):
                return failures
    for table in space.tables:
        # malformed value sets are reported above; a column with no value
        # cannot make the table violated
        if not all(c in model.included and c in model.values
                   for c in table.columns):
            continue
        if not _table_satisfied(table, model.values):
            if fail(f"table constraint '{table.id}' has no matching row", table.id):
                return failures
    return failures


# --- search -----------------------------------------------------------------

@dataclass
class _Demands:
    must_include: set[str]
    must_exclude: set[str]
    fixed: dict[str, int | str]
    excluded_values: dict[str, set]


def _preprocess(space: ConfigurationSpace, assumptions) -> _Demands | None:
    must_include: set[str] = set()
    must_exclude: set[str] = set()
    fixed: dict[str, int | str] = {}
    excluded_values: dict[str, set] = {}
    for assumption in assumptions:
        if assumption.var not in space.variables:
            raise ValueError(f"assumption references unknown variable '{assumption.var}'")
        if (isinstance(assumption, (Fix, ExcludeValue))
                and not space.is_attribute(assumption.var)):
            raise ValueError(
                f"value assumption targets part variable '{assumption.var}'")
        if isinstance(assumption, Exclude):
            must_exclude.add(assumption.var)
            continue
        if isinstance(assumption, ExcludeValue):
            excluded_values.setdefault(assumption.var, set()).add(assumption.value)
            continue
        if isinstance(assumption, Fix):
            if assumption.value not in space.domain(assumption.var):
                return None
            if fixed.get(assumption.var, assumption.value) != assumption.value:
                return None
            fixed[assumption.var] = assumption.value
        # Include and Fix both force inclusion, transitively upward
        vid = assumption.var
        while vid is not None:
            must_include.add(vid)
            vid = space.variables[vid].parent
    # excluding a member below its set's lower bound forces the parent out
    # too (prefix semantics make the first lo members mandatory), cascading
    # upward; reaching the root this way is immediately infeasible
    frontier = list(must_exclude)
    while frontier:
        var = space.variables[frontier.pop()]
        if var.parent is None:
            return None
        lb = space.lower_bound_of(var.set_id) if var.set_id else None
        if lb is not None and var.index < lb.lo and var.parent not in must_exclude:
            must_exclude.add(var.parent)
            frontier.append(var.parent)
    if must_include & must_exclude:
        return None
    for var, value in fixed.items():
        if value in excluded_values.get(var, ()):
            return None
    return _Demands(must_include, must_exclude, fixed, excluded_values)


def _formula_vars(space: ConfigurationSpace, node: FormulaNode, out: set[str]) -> None:
    if isinstance(node, FVar):
        out.add(node.var)
    elif isinstance(node, FFn):
        out.update(space.functions[node.fn].members)
    elif isinstance(node, FUnary):
        _formula_vars(space, node.arg, out)
    elif isinstance(node, FBinary):
        _formula_vars(space, node.left, out)
        _formula_vars(space, node.right, out)


# interval evaluation for early pruning: a formula is judged before all of
# its variables are decided, treating undecided aggregate members as a count
# or sum range. Any undecided scalar leaf poisons the result (the leaf might
# end up excluded, making the whole constraint undefined, hence satisfied).
_POISON = object()


def _tri(value):
    """Coerce a partial-evaluation result into a three-valued boolean."""
    if value is _POISON:
        return None
    kind = value[0]
    if kind == "bool":
        return value[1]
    if kind == "sym" and value[1] in ("true", "false"):
        return value[1] == "true"
    return None


def _eval_partial(space: ConfigurationSpace, node: FormulaNode, included, values):
    if isinstance(node, FConst):
        if isinstance(node.value, int):
            return ("int", node.value, node.value)
        return ("sym", node.value)
    if isinstance(node, FVar):
        decided = included.get(node.var)
        if decided is None:
            return _POISON
        if decided is False:
            # excluded leaf: the constraint is undefined, never violated
            return _POISON
        value = values[node.var]
        if isinstance(value, int):
            return ("int", value, value)
        return ("sym", value)
    if isinstance(node, FFn):
        fn = space.functions[node.fn]
        if fn.kind == "count":
            lo = hi = 0
            for member in fn.members:
                decided = included.get(member)
                if decided:
                    lo += 1
                    hi += 1
                elif decided is None:
                    hi += 1
            return ("int", lo, hi)
        lo = hi = 0
        for member in fn.members:
            decided = included.get(member)
            if decided:
                lo += values[member]
                hi += values[member]
            elif decided is None:
                domain = space.domain(member)
                lo += min(0, min(domain))
                hi += max(0, max(domain))
        return ("int", lo, hi)
    if isinstance(node, FUnary):
        inner = _eval_partial(space, node.arg, included, values)
        if node.op == "!":
            truth = _tri(inner)
            return _POISON if truth is None else ("bool", not truth)
        if inner is _POISON or inner[0] != "int":
            return _POISON
        return ("int", -inner[2], -inner[1])
    left = _eval_partial(space, node.left, included, values)
    right = _eval_partial(space, node.right, included, values)
    op = node.op
    # a possibly-excluded leaf anywhere can make the whole constraint
    # undefined (hence satisfied), so poison infects even || and &&
    if left is _POISON or right is _POISON:
        return _POISON
    if op in ("||", "&&"):
        a, b = _tri(left), _tri(right)
        if a is None or b is None:
            return _POISON
        return ("bool", (a or b) if op == "||" else (a and b))
    if left[0] == "int" and right[0] == "int":
        _, alo, ahi = left
        _, blo, bhi = right
        if op == "+":
            return ("int", alo + blo, ahi + bhi)
        if op == "-":
            return ("int", alo - bhi, ahi - blo)
        if op == "*":
            products = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
            return ("int", min(products), max(products))
        if op in ("<", "<=", ">", ">="):
            if op in (">", ">="):
                alo, ahi, blo, bhi = blo, bhi, alo, ahi
                op = "<" if op == ">" else "<="
            strictly = int(op == "<")
            if ahi + strictly <= blo:
                return ("bool", True)
            # the negation of a < b is b <= a, and vice versa
            if bhi + (1 - strictly) <= alo:
                return ("bool", False)
            return _POISON
        if op == "=":
            if alo == ahi == blo == bhi:
                return ("bool", True)
            if ahi < blo or bhi < alo:
                return ("bool", False)
            return _POISON
        if op == "!=":
            if ahi < blo or bhi < alo:
                return ("bool", True)
            if alo == ahi == blo == bhi:
                return ("bool", False)
            return _POISON
        return _POISON
    if left[0] == "sym" and right[0] == "sym" and op in ("=", "!="):
        return ("bool", (left[1] == right[1]) == (op == "="))
    return _POISON


def _build_plan(space: ConfigurationSpace):
    """Constraint checks grouped by the decision step that completes them.

    Constraints over aggregates additionally get early interval checks at
    every intermediate relevant step, pruning branches whose partial count
    or sum can no longer satisfy them.
    """
    plan: list[list[tuple[str, object]]] = [[] for _ in space.variables]
    for lb in space.lower_bounds:
        members = space.sets[lb.set_id].members
        last = max((space.order(m) for m in members), default=0)
        plan[max(last, space.order(lb.parent))].append(("lb", lb))
    for constraint in space.booleans:
        vars_: set[str] = set()
        _formula_vars(space, constraint.formula, vars_)
        steps = sorted(space.order(v) for v in vars_)
        last = steps[-1] if steps else 0
        plan[last].append(("bool", constraint))
        has_fn = any(
            isinstance(n, FFn) for n in _formula_nodes(constraint.formula))
        if has_fn:
            for step in steps[:-1]:
                plan[step].append(("bool_early", constraint))
    for table in space.tables:
        last = max(space.order(c) for c in table.columns)
        plan[last].append(("table", table))
    return plan


def _formula_nodes(node: FormulaNode):
    yield node
    if isinstance(node, FUnary):
        yield from _formula_nodes(node.arg)
    elif isinstance(node, FBinary):
        yield from _formula_nodes(node.left)
        yield from _formula_nodes(node.right)


def _plan_for(space: ConfigurationSpace):
    plan = getattr(space, "_solver_plan", None)
    if plan is None:
        plan = _build_plan(space)
        space._solver_plan = plan
    return plan


def solve_iter(space: ConfigurationSpace, assumptions=(),
               disabled: frozenset[str] = frozenset()):
    """Generate all models satisfying the assumptions, in deterministic order.

    ``disabled`` names Boolean constraints to ignore (used for unsat-core
    minimization).
    """
    demands = _preprocess(space, assumptions)
    if demands is None:
        return
    order_vars = list(space.variables.values())
    plan = _plan_for(space)
    included: dict[str, bool] = {}
    values: dict[str, int | str] = {}
    is_included = included.get

    def checks_ok(step: int) -> bool:
        for kind, obj in plan[step]:
            if kind == "lb":
                if included[obj.parent]:
                    members = space.sets[obj.set_id].members
                    if sum(1 for m in members if included[m]) < obj.lo:
                        return False
            elif kind == "bool":
                if obj.id in disabled:
                    continue
                if _eval(space, obj.formula, is_included, values) is False:
                    return False
            elif kind == "bool_early":
                if obj.id in disabled:
                    continue
                partial = _eval_partial(space, obj.formula, included, values)
                if partial is not _POISON and partial == ("bool", False):
                    return False
            else:
                if all(included[c] for c in obj.columns):
                    if not _table_satisfied(obj, values):
                        return False
        return True

    def domain_for(var) -> tuple:
        fixed = demands.fixed.get(var.id)
        if fixed is not None:
            candidates = (fixed,)
        else:
            candidates = space.domain(var.id)
        banned = demands.excluded_values.get(var.id)
        if banned:
            candidates = tuple(v for v in candidates if v not in banned)
        return candidates

    def dfs(step: int):
        if step == len(order_vars):
            yield Model(
                frozenset(v for v, inc in included.items() if inc), dict(values))
            return
        var = order_vars[step]
        allowed = [False, True]
        if var.parent is None:
            allowed = [True]
        else:
            if not included[var.parent]:
                allowed = [False]
            else:
                lb = space.lower_bound_of(var.set_id)
                if lb is not None and var.index < lb.lo:
                    allowed = [True]
            if var.index > 0 and not included[f"{var.set_id}[{var.index - 1}]"]:
                allowed = [x for x in allowed if x is False]
        if var.id in demands.must_include:
            allowed = [x for x in allowed if x is True]
        if var.id in demands.must_exclude:
            allowed = [x for x in allowed if x is False]
        for inc in allowed:
            included[var.id] = inc
            if inc and var.kind is not VarKind.PART:
                for value in domain_for(var):
                    values[var.id] = value
                    if checks_ok(step):
                        yield from dfs(step + 1)
                values.pop(var.id, None)
            else:
                if checks_ok(step):
                    yield from dfs(step + 1)
        included.pop(var.id, None)

    yield from dfs(0)


def solve(space: ConfigurationSpace, assumptions=(),
          disabled: frozenset[str] = frozenset()) -> Model | None:
    """First model satisfying the assumptions, or None when unsatisfiable."""
    return next(solve_iter(space, assumptions, disabled), None)


def enumerate_models(space: ConfigurationSpace, assumptions=(),
                     limit: int | None = None, offset: int = 0) -> list[Model]:
    """Distinct models in deterministic order, complete up to ``limit``."""
    stop = None if limit is None else offset + limit
    return list(itertools.islice(solve_iter(space, assumptions), offset, stop))


# --- independent oracle -----------------------------------------------------

_INCLUDED_PART = object()
_EXCLUDED = object()


def brute_force_enumerate(space: ConfigurationSpace,
                          cap: int = 10 ** 6) -> list[Model]:
    """Exhaustive generate-and-test oracle.

    Enumerates every combination of per-variable choices (excluded, or
    included with each domain value) and keeps the candidates accepted by
    check_model. Shares no search code with solve.
    """
    options = []
    raw_count = 1
    for var in space.variables.values():
        if var.kind is VarKind.PART:
            choices: tuple = (_EXCLUDED, _INCLUDED_PART)
        else:
            choices = (_EXCLUDED, *space.domain(var.id))
        options.append((var.id, var.kind, choices))
        raw_count *= len(choices)
        if raw_count > cap:
            raise CapExceeded(raw_count, cap)
    models = []
    var_ids = [vid for vid, _, _ in options]
    kinds = [kind for _, kind, _ in options]
    for combo in itertools.product(*(choices for _, _, choices in options)):
        included = []
        values = {}
        for vid, kind, choice in zip(var_ids, kinds, combo):
            if choice is _EXCLUDED:
                continue
            included.append(vid)
            if kind is not VarKind.PART:
                values[vid] = choice
        model = Model(frozenset(included), values)
        if not check_model(space, model, first_only=True):
            models.append(model)
    return models
