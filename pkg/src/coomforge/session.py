"""Session-level reasoning: inferred values, MUS explanations, browsing,
and the incremental-bounds driver for unbounded cardinalities."""

from __future__ import annotations

from dataclasses import dataclass, field

from .solver import (
    Assumption,
    Exclude,
    ExcludeValue,
    Fix,
    Include,
    Model,
    enumerate_models,
    solve,
)
from .space import (
    ConfigurationSpace,
    InstantiationError,
    ROOT_ID,
    UserAssumptions,
    VarKind,
    apply_user_input,
    instantiate,
)
from .syntax import CoomAst, UserInputAst

# integer attributes with more candidate values than this are reported as a
# range with no per-value enumeration (the UI renders a number input)
VALUE_ENUMERATION_LIMIT = 20


def assumptions_from_user_input(user: UserAssumptions) -> list[Assumption]:
    out: list[Assumption] = [Include(v) for v in user.includes]
    out.extend(Fix(var, value) for var, value in user.values)
    return out


@dataclass(frozen=True)
class MusReport:
    assumption_ids: tuple[int, ...]
    constraint_ids: tuple[str, ...]
    messages: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "assumptionIds": list(self.assumption_ids),
            "constraintIds": list(self.constraint_ids),
            "messages": list(self.messages),
        }


@dataclass(frozen=True)
class AttributeView:
    id: str
    name: str
    type_name: str
    kind: str  # "discrete" | "integer"
    shown: bool
    selected_value: int | str | None = None
    inferred_value: int | str | None = None
    valid_values: tuple | None = None
    invalid_values: tuple | None = None
    lo: int | None = None
    hi: int | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "type": self.type_name,
            "kind": self.kind,
            "shown": self.shown,
            "selectedValue": self.selected_value,
            "inferredValue": self.inferred_value,
            "validValues": None if self.valid_values is None else list(self.valid_values),
            "invalidValues": None if self.invalid_values is None else list(self.invalid_values),
            "range": None if self.lo is None else {"lo": self.lo, "hi": self.hi},
        }


@dataclass(frozen=True)
class PartView:
    id: str
    name: str
    type_name: str
    shown: bool
    forced: bool
    addable: bool
    removable: bool

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "type": self.type_name,
            "shown": self.shown,
            "forced": self.forced,
            "addable": self.addable,
            "removable": self.removable,
        }


@dataclass(frozen=True)
class SessionView:
    satisfiable: bool
    attributes: tuple[AttributeView, ...]
    parts: tuple[PartView, ...]
    assumptions: tuple[tuple[int, Assumption], ...]
    mus: MusReport | None = None

    def attribute(self, var_id: str) -> AttributeView | None:
        for attr in self.attributes:
            if attr.id == var_id:
                return attr
        return None

    def to_json(self) -> dict:
        return {
            "satisfiable": self.satisfiable,
            "attributes": [a.to_json() for a in self.attributes],
            "parts": [p.to_json() for p in self.parts],
            "assumptions": [_assumption_to_json(n, a) for n, a in self.assumptions],
            "mus": None if self.mus is None else self.mus.to_json(),
        }


def _assumption_to_json(num: int, assumption: Assumption) -> dict:
    action = {Include: "include", Exclude: "exclude",
              Fix: "fix", ExcludeValue: "excludeValue"}[type(assumption)]
    out = {"id": num, "action": action, "target": assumption.var}
    if isinstance(assumption, (Fix, ExcludeValue)):
        out["value"] = assumption.value
    return out


def minimal_unsat_subset(space: ConfigurationSpace,
                         assumptions: list[tuple[int, Assumption]],
                         guarded_constraint_ids: list[str],
                         explanations: dict[str, str] | None = None) -> MusReport:
    """Deletion-based MUS over the assumptions and guarded Boolean constraints.

    Assumptions are tried for removal newest-first, so blame lands on the
    most recent user action where possible.
    """
    guarded = list(guarded_constraint_ids)
    kept_assumptions = list(assumptions)
    kept_constraints = set(guarded)

    def unsat(ass, constraints) -> bool:
        disabled = frozenset(set(guarded) - constraints)
        return solve(space, [a for _, a in ass], disabled=disabled) is None

    if not unsat(kept_assumptions, kept_constraints):
        raise ValueError("minimal_unsat_subset called on a satisfiable state")
    for item in sorted(kept_assumptions, key=lambda pair: -pair[0]):
        trial = [pair for pair in kept_assumptions if pair is not item]
        if unsat(trial, kept_constraints):
            kept_assumptions = trial
    for cid in guarded:
        if cid not in kept_constraints:
            continue
        trial = kept_constraints - {cid}
        if unsat(kept_assumptions, trial):
            kept_constraints = trial
    constraint_ids = tuple(c.id for c in space.booleans if c.id in kept_constraints)
    fallback = {c.id: c.text for c in space.booleans}
    messages = tuple(
        (explanations or {}).get(cid, fallback[cid]) for cid in constraint_ids)
    return MusReport(
        tuple(num for num, _ in kept_assumptions), constraint_ids, messages)


class Exhausted:
    """Marker returned by browse when the enumeration is complete."""

    def __repr__(self):
        return "Exhausted"


EXHAUSTED = Exhausted()


class Session:
    """One interactive configuration session over an immutable space."""

    def __init__(self, space: ConfigurationSpace,
                 explanations: dict[str, str] | None = None,
                 initial: list[Assumption] | None = None):
        self.space = space
        self.explanations = explanations or {}
        self._assumptions: list[tuple[int, Assumption]] = []
        self._next_id = 0
        self.cursor: int | None = None
        self.browsed_model: Model | None = None
        self._cached_view: SessionView | None = None
        for assumption in initial or ():
            self.add_assumption(assumption)

    @property
    def assumptions(self) -> list[tuple[int, Assumption]]:
        return list(self._assumptions)

    def _plain_assumptions(self) -> list[Assumption]:
        return [a for _, a in self._assumptions]

    def _invalidate(self) -> None:
        self._cached_view = None
        self.cursor = None
        self.browsed_model = None

    def add_assumption(self, assumption: Assumption) -> int:
        if assumption.var not in self.space.variables:
            raise KeyError(assumption.var)
        num = self._next_id
        self._next_id += 1
        self._assumptions.append((num, assumption))
        self._invalidate()
        return num

    def remove_assumption(self, num: int) -> bool:
        before = len(self._assumptions)
        self._assumptions = [pair for pair in self._assumptions if pair[0] != num]
        if len(self._assumptions) != before:
            self._invalidate()
            return True
        return False

    def remove_for_target(self, var_id: str) -> bool:
        """Retract all fix/include assumptions on a variable (UI deselect)."""
        before = len(self._assumptions)
        self._assumptions = [
            pair for pair in self._assumptions if pair[1].var != var_id]
        if len(self._assumptions) != before:
            self._invalidate()
            return True
        return False

    def browse(self, direction: str = "next"):
        """Advance (or reset) deterministic solution browsing."""
        if direction == "reset" or self.cursor is None:
            self.cursor = 0
        else:
            self.cursor += 1
        found = enumerate_models(
            self.space, self._plain_assumptions(), limit=1, offset=self.cursor)
        self._cached_view = None
        if not found:
            self.cursor = max(self.cursor - 1, 0) if direction == "next" else None
            return EXHAUSTED
        self.browsed_model = found[0]
        return self.browsed_model

    def view(self) -> SessionView:
        if self._cached_view is None:
            self._cached_view = compute_view(self)
        return self._cached_view


def compute_view(session: Session) -> SessionView:
    space = session.space
    base_assumptions = session._plain_assumptions()
    selected: dict[str, int | str] = {}
    user_included: set[str] = set()
    for _, assumption in session._assumptions:
        if isinstance(assumption, Fix):
            selected[assumption.var] = assumption.value
        elif isinstance(assumption, Include):
            user_included.add(assumption.var)

    base = solve(space, base_assumptions)
    if base is None:
        mus = minimal_unsat_subset(
            space, session.assumptions, [c.id for c in space.booleans],
            session.explanations)
        attributes = tuple(
            AttributeView(
                id=var.id,
                name=_feature_name(var.id),
                type_name=var.type_name,
                kind="discrete" if var.kind is VarKind.DISCRETE else "integer",
                shown=var.id in selected,
                selected_value=selected.get(var.id),
                valid_values=(), invalid_values=())
            for var in space.attribute_vars())
        parts = tuple(
            PartView(var.id, _feature_name(var.id), var.type_name,
                     shown=False, forced=False, addable=False,
                     removable=var.id in user_included)
            for var in space.variables.values() if var.id != ROOT_ID)
        return SessionView(False, attributes, parts,
                           tuple(session.assumptions), mus)

    witnesses: list[Model] = [base]
    browsed = session.browsed_model
    forced_cache: dict[str, bool] = {}

    def query(extra: Assumption) -> Model | None:
        found = solve(space, base_assumptions + [extra])
        if found is not None:
            witnesses.append(found)
        return found

    def included_in_all(var_id: str) -> bool:
        cached = forced_cache.get(var_id)
        if cached is not None:
            return cached
        if any(var_id not in w.included for w in witnesses):
            result = False
        else:
            result = query(Exclude(var_id)) is None
        forced_cache[var_id] = result
        return result

    attributes = []
    for var in space.attribute_vars():
        attr_def = space.attributes[var.type_name]
        kind = "discrete" if attr_def.kind == "discrete" else "integer"
        in_all = included_in_all(var.id)
        shown = in_all or (browsed is not None and var.id in browsed.included)
        entry = {
            "id": var.id,
            "name": _feature_name(var.id),
            "type_name": var.type_name,
            "kind": kind,
            "shown": shown,
            "selected_value": selected.get(var.id),
            "lo": attr_def.lo,
            "hi": attr_def.hi,
        }
        if not shown:
            attributes.append(AttributeView(**entry))
            continue
        domain = space.domain(var.id)
        if len(domain) <= VALUE_ENUMERATION_LIMIT:
            valid = []
            for value in domain:
                if any(w.values.get(var.id) == value for w in witnesses):
                    valid.append(value)
                elif query(Fix(var.id, value)) is not None:
                    valid.append(value)
            invalid = tuple(v for v in domain if v not in valid)
            inferred = None
            if len(valid) == 1 and entry["selected_value"] is None:
                inferred = valid[0]
            attributes.append(AttributeView(
                **entry, inferred_value=inferred,
                valid_values=tuple(valid), invalid_values=invalid))
        else:
            reference = (browsed or base).values.get(var.id)
            inferred = None
            if (reference is not None and entry["selected_value"] is None
                    and query(ExcludeValue(var.id, reference)) is None):
                inferred = reference
            attributes.append(AttributeView(**entry, inferred_value=inferred))

    # every non-root variable in an optional position gets add/remove state;
    # enumeration-typed set members are both an attribute and an addable part
    parts = []
    for var in space.variables.values():
        if var.id == ROOT_ID:
            continue
        forced = included_in_all(var.id)
        if forced:
            addable = False
        elif any(var.id in w.included for w in witnesses):
            addable = var.id not in user_included
        else:
            addable = (query(Include(var.id)) is not None
                       and var.id not in user_included)
        shown = forced or var.id in user_included or (
            browsed is not None and var.id in browsed.included)
        parts.append(PartView(
            var.id, _feature_name(var.id), var.type_name,
            shown=shown, forced=forced, addable=addable,
            removable=var.id in user_included))

    return SessionView(True, tuple(attributes), tuple(parts),
                       tuple(session.assumptions), None)


def _feature_name(var_id: str) -> str:
    # "root.carrier[0].bag[1]" -> "bag"
    last = var_id.rsplit(".", 1)[-1]
    return last.split("[", 1)[0]


# --- incremental bounds -----------------------------------------------------

@dataclass(frozen=True)
class IncrementalResult:
    status: str  # "sat" | "unsat_bounded" | "cap_exceeded"
    model: Model | None
    final_bound: int | None
    bounds_tried: tuple[int, ...]
    space: ConfigurationSpace | None
    warnings: tuple = ()


def has_unbounded_cardinality(ast: CoomAst) -> bool:
    blocks = [ast.product.features]
    blocks.extend(s.features for s in ast.structures)
    return any(f.cardinality.hi is None for block in blocks for f in block)


def incremental_solve(ast: CoomAst, user_input: UserInputAst | None = None,
                      n: int = 1, k: int = 1, max_bound_cap: int = 64,
                      on_bound=None) -> IncrementalResult:
    """Raise the compiled bound for unbounded cardinalities until a model exists.

    ``on_bound(bound, satisfiable)`` is called after each iteration, for
    progress reporting.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")
    unbounded = has_unbounded_cardinality(ast)
    bounds_tried: list[int] = []
    bound = n
    while bound <= max_bound_cap:
        bounds_tried.append(bound)
        try:
            space = instantiate(ast, max_bound=bound)
        except InstantiationError:
            # bound still below a declared lower bound; a larger one may fit
            if on_bound:
                on_bound(bound, False)
            if not unbounded:
                raise
            bound += k
            continue
        assumptions: list[Assumption] = []
        warnings: tuple = ()
        if user_input is not None:
            applied = apply_user_input(space, user_input)
            warnings = applied.warnings
            assumptions = assumptions_from_user_input(applied)
        model = solve(space, assumptions)
        if on_bound:
            on_bound(bound, model is not None)
        if model is not None:
            return IncrementalResult(
                "sat", model, bound, tuple(bounds_tried), space, warnings)
        if not unbounded:
            return IncrementalResult(
                "unsat_bounded", None, bound, tuple(bounds_tried), space, warnings)
        bound += k
    return IncrementalResult(
        "cap_exceeded", None, None, tuple(bounds_tried), None)
