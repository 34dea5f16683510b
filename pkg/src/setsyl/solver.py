"""Decision procedure for normalized set conjunctions.

Satisfiability of a conjunction of "x in y" and "x = y setminus z" literals
is decided in three layers:

1. Places: boolean valuations of the variables consistent with every
   difference literal read as a pointwise biconditional.  Each element of a
   would-be model occupies exactly one place (the set of variables it
   belongs to), so an unsatisfiable boolean layer refutes the conjunction
   outright.
2. A placement sigma maps each element variable (one that occurs on the
   left of a membership) to the place its value will occupy.  sigma must
   put x somewhere inside y for every "x in y", must be constant on
   variables no place can tell apart, and the containment edges it induces
   must be acyclic, since sets are well founded.
3. From an admissible sigma a concrete hereditarily finite model is built
   bottom-up, seeding every place with fresh high-rank tag sets ("junk") so
   that distinct places stay extensionally distinct.

The search is deterministic and exhaustive, so exhaustion proves
unsatisfiability.  Every produced model is re-verified literal by literal
before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import InvariantViolation, ResourceLimitError
from .formulas import Eq, Not, Var
from .hf import HFSet, SetAssignment, hf, nested_singleton, set_diff
from .normalize import NormalizedConjunction, normalize

DEFAULT_SOLVE_BUDGET = 10_000_000

# Junk tag depth layout: tags for place index k, copy i sit at rank
# base + k * _PLACE_STRIDE + i, where base exceeds any rank reachable by
# junk-free construction (at most one rank per variable).
_PLACE_STRIDE = 3
_COPIES = 2


@dataclass(frozen=True)
class Place:
    """A boolean valuation of the variables, as the set it maps to True."""

    trues: frozenset

    def holds(self, name: str) -> bool:
        return name in self.trues

    def sorted_trues(self) -> Tuple[str, ...]:
        return tuple(sorted(self.trues))

    def __repr__(self) -> str:
        return "Place({" + ", ".join(self.sorted_trues()) + "})"


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit: Optional[int]):
        self.left = limit

    def spend(self, what: str) -> None:
        if self.left is None:
            return
        self.left -= 1
        if self.left < 0:
            raise ResourceLimitError(f"solver budget exhausted while {what}")


def _enumerate_places(nc: NormalizedConjunction, budget: _Budget) -> List[Place]:
    order = nc.vars
    pos = {v: i for i, v in enumerate(order)}
    by_last: List[List[Tuple[str, str, str]]] = [[] for _ in order]
    for d in nc.differences:
        x, y, z = d
        by_last[max(pos[x], pos[y], pos[z])].append(d)

    out: List[Place] = []
    val: Dict[str, bool] = {}

    def rec(i: int) -> None:
        budget.spend("enumerating places")
        if i == len(order):
            out.append(Place(frozenset(v for v in order if val[v])))
            return
        for b in (False, True):
            val[order[i]] = b
            if all(val[x] == (val[y] and not val[z]) for x, y, z in by_last[i]):
                rec(i + 1)
        val.pop(order[i], None)

    rec(0)
    return out


def enumerate_places(
    nc: NormalizedConjunction, budget: Optional[int] = None
) -> List[Place]:
    """All boolean valuations consistent with the difference literals.

    Deterministic order: variables in nc.vars order, False tried before
    True.  The all-False valuation is always a place, so the list is never
    empty.
    """
    return _enumerate_places(nc, _Budget(budget))


@dataclass(frozen=True)
class SolverWitness:
    """Everything needed to rebuild a model without re-searching."""

    vars: Tuple[str, ...]
    merge: Tuple[Tuple[str, ...], ...]
    sigma: Tuple[Tuple[str, Place], ...]
    junk: Tuple[Tuple[Place, int], ...]
    topo: Tuple[str, ...]


@dataclass(frozen=True)
class Sat:
    model: SetAssignment
    witness: SolverWitness

    @property
    def is_sat(self) -> bool:
        return True


@dataclass(frozen=True)
class Unsat:
    @property
    def is_sat(self) -> bool:
        return False


SolveResult = Union[Sat, Unsat]


def build_model(witness: SolverWitness) -> SetAssignment:
    """Construct the assignment a solver witness describes.

    Each variable's value collects the element-variable values whose place
    puts them inside it, plus one tag per junk entry whose place holds the
    variable.  Tag ranks start above anything junk-free construction can
    reach, so tags never collide with element values.
    """
    sig = dict(witness.sigma)
    base = len(witness.vars) + 4
    place_index: Dict[Place, int] = {}
    for p, _ in witness.junk:
        place_index.setdefault(p, len(place_index))
    tags = {
        (p, i): nested_singleton(base + place_index[p] * _PLACE_STRIDE + i)
        for p, i in witness.junk
    }

    vals: Dict[str, HFSet] = {}

    def settle(v: str) -> None:
        members = [vals[u] for u in witness.topo if sig[u].holds(v)]
        members.extend(tags[p, i] for p, i in witness.junk if p.holds(v))
        vals[v] = hf(members)

    for u in witness.topo:
        settle(u)
    for v in witness.vars:
        if v not in vals:
            settle(v)
    return SetAssignment(vals)


def satisfies(nc: NormalizedConjunction, model: SetAssignment) -> bool:
    """Check every literal of nc against an assignment of its variables."""
    for x, y in nc.memberships:
        if model[x] not in model[y]:
            return False
    for x, y, z in nc.differences:
        if model[x] is not set_diff(model[y], model[z]):
            return False
    return True


def _kahn(elems: Sequence[str], sig: Dict[str, Place]) -> Optional[Tuple[str, ...]]:
    remaining = list(elems)
    done: List[str] = []
    placed = set()
    while remaining:
        for v in remaining:
            if all(u in placed for u in elems if u != v and sig[u].holds(v)):
                done.append(v)
                placed.add(v)
                remaining.remove(v)
                break
        else:
            return None
    return tuple(done)


def _has_cycle(assigned: Sequence[str], sig: Dict[str, Place]) -> bool:
    if any(sig[u].holds(u) for u in assigned):
        return True
    color: Dict[str, int] = {}

    def visit(u: str) -> bool:
        color[u] = 1
        for v in assigned:
            if v in sig and sig[u].holds(v):
                c = color.get(v, 0)
                if c == 1 or (c == 0 and visit(v)):
                    return True
        color[u] = 2
        return False

    return any(color.get(u, 0) == 0 and visit(u) for u in assigned)


def solve(
    nc: NormalizedConjunction, budget: Optional[int] = DEFAULT_SOLVE_BUDGET
) -> SolveResult:
    """Decide a normalized conjunction; Sat carries a verified model.

    budget caps the total count of search steps (place-enumeration nodes,
    placement attempts, model builds); exceeding it raises
    ResourceLimitError.  None means unbounded.
    """
    meter = _Budget(budget)
    places = _enumerate_places(nc, meter)

    elems: List[str] = list(dict.fromkeys(x for x, _ in nc.memberships))
    targets: Dict[str, List[str]] = {u: [] for u in elems}
    for x, y in nc.memberships:
        targets[x].append(y)

    # Variables no place distinguishes must share a placement: the junk
    # seeding makes their values extensionally equal, so differing
    # placements would put one value in conflicting sets.
    signature = {u: tuple(p.holds(u) for p in places) for u in elems}
    classes: List[List[str]] = []
    by_sig: Dict[tuple, List[str]] = {}
    for u in elems:
        group = by_sig.get(signature[u])
        if group is None:
            group = by_sig[signature[u]] = []
            classes.append(group)
        group.append(u)

    candidates: List[List[Place]] = []
    for group in classes:
        cand = [
            p
            for p in places
            if all(p.holds(y) for u in group for y in targets[u])
        ]
        if not cand:
            return Unsat()
        candidates.append(cand)

    merge = tuple((v,) for v in nc.vars)
    maximal_junk = tuple((p, i) for p in places for i in range(_COPIES))
    sig: Dict[str, Place] = {}

    def leaf() -> Optional[Sat]:
        topo = _kahn(elems, sig)
        if topo is None:
            raise InvariantViolation("acyclic placement has no build order")
        sigma = tuple((u, sig[u]) for u in elems)
        for junk in ((), maximal_junk):
            meter.spend("building candidate models")
            witness = SolverWitness(
                vars=nc.vars, merge=merge, sigma=sigma, junk=junk, topo=topo
            )
            model = build_model(witness)
            if satisfies(nc, model):
                return Sat(model, witness)
        raise InvariantViolation("admissible placement built a non-model")

    def descend(i: int) -> Optional[Sat]:
        if i == len(classes):
            return leaf()
        for p in candidates[i]:
            meter.spend("searching placements")
            for u in classes[i]:
                sig[u] = p
            if not _has_cycle([u for g in classes[: i + 1] for u in g], sig):
                hit = descend(i + 1)
                if hit is not None:
                    return hit
            for u in classes[i]:
                del sig[u]
        return None

    found = descend(0)
    return found if found is not None else Unsat()


def implied_equalities(
    nc: NormalizedConjunction,
    pairs: Iterable[Tuple[str, str]],
    budget: Optional[int] = DEFAULT_SOLVE_BUDGET,
) -> Tuple[Tuple[str, str], ...]:
    """The pairs (x, y) whose equality holds in every model of nc.

    Each pair is tested by refuting nc together with "x != y"; the theory
    is convex, so pairwise tests capture every disjunction of equalities.
    """
    out: List[Tuple[str, str]] = []
    for x, y in pairs:
        probe = normalize(nc.literals() + [Not(Eq(Var(x), Var(y)))])
        if not solve(probe, budget=budget).is_sat:
            out.append((x, y))
    return tuple(out)
