"""Ground-truth evaluation and brute-force bounded model search.

eval_atom / eval_formula interpret the set-theoretic fragment (including
the extension operators) over hereditarily finite assignments.  oracle_sat
searches every assignment of the free variables into the bounded universe,
so it decides any set formula up to the rank bound by construction.  It is
the reference the fast solver is tested against, and it is deliberately
simple: the only cleverness is scheduling each conjunct at the first depth
where all its variables are bound, which prunes the search without
changing what it visits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import (
    InvariantViolation,
    SearchSpaceTooLargeError,
    UnboundVariableError,
    UnsupportedAtomError,
)
from .formulas import (
    And,
    AtomPred,
    Empty,
    Eq,
    ExtOp,
    Formula,
    In,
    Leq,
    Not,
    Or,
    SetOp,
    Subset,
    Term,
    Var,
    and_,
    conjuncts,
    free_vars,
    is_atom,
    nnf,
)
from .hf import (
    HFSet,
    SetAssignment,
    big_inter,
    big_union,
    cross_product,
    enumerate_universe,
    hf,
    is_subset,
    power_set,
    set_diff,
    set_inter,
    set_union,
    unordered_cross,
)

DEFAULT_ASSIGNMENT_GUARD = 10**8


class _BigInterUndefined(Exception):
    """Internal: (bigI t) was evaluated on the empty set."""


def eval_term(t: Term, m: SetAssignment) -> HFSet:
    if isinstance(t, Var):
        v = m.get(t.name)
        if v is None:
            raise UnboundVariableError(f"variable {t.name!r} is not assigned")
        return v
    if isinstance(t, Empty):
        return hf()
    if isinstance(t, SetOp):
        a = eval_term(t.left, m)
        b = eval_term(t.right, m)
        if t.op == "union":
            return set_union(a, b)
        if t.op == "inter":
            return set_inter(a, b)
        return set_diff(a, b)
    if isinstance(t, ExtOp):
        args = [eval_term(a, m) for a in t.args]
        if t.op == "single":
            return hf((args[0],))
        if t.op == "pow":
            return power_set(args[0])
        if t.op == "bigU":
            return big_union(args[0])
        if t.op == "bigI":
            if not args[0].children:
                raise _BigInterUndefined()
            return big_inter(args[0])
        if t.op == "cross":
            return cross_product(args[0], args[1])
        return unordered_cross(args[0], args[1])
    raise UnsupportedAtomError(f"not a set term: {t!r}")


def eval_atom(a, m: SetAssignment) -> bool:
    """Truth of a set-theoretic atom under m.

    An atom whose evaluation hits (bigI empty) counts as false: the big
    intersection is undefined there, and no defined value could make the
    atom hold.
    """
    try:
        if isinstance(a, In):
            return eval_term(a.left, m) in eval_term(a.right, m)
        if isinstance(a, Eq):
            return eval_term(a.left, m) == eval_term(a.right, m)
        if isinstance(a, Subset):
            return is_subset(eval_term(a.left, m), eval_term(a.right, m))
    except _BigInterUndefined:
        return False
    if isinstance(a, (Leq, AtomPred)):
        raise UnsupportedAtomError(f"not a set-theoretic atom: {a!r}")
    raise UnsupportedAtomError(f"not an atom: {a!r}")


def eval_formula(f: Formula, m: SetAssignment) -> bool:
    if isinstance(f, Not):
        return not eval_formula(f.body, m)
    if isinstance(f, And):
        return all(eval_formula(p, m) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_formula(p, m) for p in f.parts)
    return eval_atom(f, m)


@dataclass
class BoundedSat:
    model: SetAssignment

    @property
    def is_sat(self) -> bool:
        return True


@dataclass
class NoModelWithinBound:
    rank_bound: int

    @property
    def is_sat(self) -> bool:
        return False


@dataclass
class ImpliedWithinBound:
    rank_bound: int

    @property
    def implied(self) -> bool:
        return True


@dataclass
class Countermodel:
    model: SetAssignment

    @property
    def implied(self) -> bool:
        return False


def _schedule(f: Formula) -> Tuple[List[str], List[List[Formula]], List[Formula]]:
    """Pick a variable order and attach each conjunct to the first depth
    where all its variables are bound.  Greedy: prefer the variable that
    completes the most pending conjuncts, then the one touching the most of
    them, then first occurrence.  Deterministic throughout."""
    parts = conjuncts(nnf(f))
    order: List[str] = []
    todo = list(free_vars(f))
    part_vars = [set(free_vars(p)) for p in parts]
    pending = list(range(len(parts)))
    ground = [parts[i] for i in pending if not part_vars[i]]
    pending = [i for i in pending if part_vars[i]]
    checks: List[List[Formula]] = []
    bound: set = set()
    while todo:
        best = None
        best_rank = None
        for v in todo:
            completes = sum(1 for i in pending if part_vars[i] <= bound | {v})
            touches = sum(1 for i in pending if v in part_vars[i])
            rank = (-completes, -touches)
            if best_rank is None or rank < best_rank:
                best, best_rank = v, rank
        todo.remove(best)
        bound.add(best)
        order.append(best)
        here = [i for i in pending if part_vars[i] <= bound]
        checks.append([parts[i] for i in here])
        pending = [i for i in pending if i not in here]
    return order, checks, ground


def bounded_models(
    f: Formula,
    rank_bound: int,
    max_assignments: int = DEFAULT_ASSIGNMENT_GUARD,
    node_budget: Optional[int] = None,
) -> Iterator[SetAssignment]:
    """Yield every assignment of free_vars(f) into the rank-bounded universe
    that satisfies f, in a fixed order (variables scheduled greedily, values
    in canonical universe order)."""
    universe = enumerate_universe(rank_bound)
    names = free_vars(f)
    if max_assignments is not None and len(universe) ** len(names) > max_assignments:
        raise SearchSpaceTooLargeError(
            f"{len(universe)}^{len(names)} assignments exceed the guard {max_assignments}"
        )
    order, checks, ground = _schedule(f)
    partial: Dict[str, HFSet] = {}
    wrapped = SetAssignment(partial)
    wrapped._m = partial  # share the dict so bindings are visible immediately
    for g in ground:
        if not eval_formula(g, wrapped):
            return
    n = len(order)
    nodes = 0

    def descend(depth: int) -> Iterator[SetAssignment]:
        nonlocal nodes
        if depth == n:
            yield SetAssignment(partial)
            return
        name = order[depth]
        for value in universe:
            nodes += 1
            if node_budget is not None and nodes > node_budget:
                raise SearchSpaceTooLargeError(f"node budget {node_budget} exhausted")
            partial[name] = value
            if all(eval_formula(c, wrapped) for c in checks[depth]):
                yield from descend(depth + 1)
        del partial[name]

    if n == 0:
        yield SetAssignment({})
        return
    yield from descend(0)


def oracle_sat(
    f: Formula,
    rank_bound: int,
    max_assignments: int = DEFAULT_ASSIGNMENT_GUARD,
    node_budget: Optional[int] = None,
):
    """Exhaustive bounded satisfiability: BoundedSat with the first model in
    search order, or NoModelWithinBound.  A returned model is re-verified
    with eval_formula before it leaves this function."""
    for m in bounded_models(f, rank_bound, max_assignments, node_budget):
        if not eval_formula(f, m):
            raise InvariantViolation("bounded search produced a non-model")
        return BoundedSat(m)
    return NoModelWithinBound(rank_bound)


def oracle_implies(
    f: Formula,
    g: Formula,
    rank_bound: int,
    max_assignments: int = DEFAULT_ASSIGNMENT_GUARD,
    node_budget: Optional[int] = None,
):
    """Bounded implication: does every model of f within the bound satisfy g?

    The verdict is explicitly bounded; ImpliedWithinBound(k) says nothing
    about models of rank above k.
    """
    res = oracle_sat(and_(f, Not(g)), rank_bound, max_assignments, node_budget)
    if res.is_sat:
        return Countermodel(res.model)
    return ImpliedWithinBound(rank_bound)


def nonconvexity_schema(phi: Formula, xbar: str, k: int):
    """Pad phi with k+1 fresh members of xbar.

    Returns (Phi, pairs) where Phi adds membership probes _m1.._m{k+1} of
    xbar to phi and pairs lists the C(k+1, 2) candidate equalities among the
    probe variables.  If xbar can hold at most k distinct elements, Phi
    forces the disjunction of the pairs without forcing any single one,
    which is exactly the shape a non-convex theory produces.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    used = set(free_vars(phi))
    names: List[str] = []
    i = 1
    while len(names) < k + 1:
        cand = f"_m{i}"
        if cand not in used:
            names.append(cand)
        i += 1
    probes = [In(Var(nm), Var(xbar)) for nm in names]
    big = and_(*(conjuncts(phi) + probes))
    pairs = [(names[i], names[j]) for i in range(len(names)) for j in range(i + 1, len(names))]
    return big, pairs
