"""Linear rational arithmetic over exact fractions.

Constraints are affine rows "expr <= 0", "expr < 0", "expr = 0" plus
disequalities "expr != 0".  Satisfiability is decided by Fourier-Motzkin
elimination; because the rationals are dense and the row polyhedron is
convex, a conjunction with disequalities is satisfiable exactly when the
rows are satisfiable and no disequality's underlying equality is entailed.
Everything is computed in fractions.Fraction; no floating point enters.

The theory is stably infinite (any satisfiable constraint set has solutions
in the infinite rationals), which is what the equality-propagating
combination requires of its participants.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import InvariantViolation, NonlinearTermError, UnsupportedAtomError
from .formulas import (
    ArithOp,
    Eq,
    Formula,
    Leq,
    Not,
    RationalConst,
    Term,
    Var,
    is_literal,
    literal_atom,
)

_ZERO = Fraction(0)

# rel meanings: expr le 0, expr lt 0, expr eq 0.
LE, LT, EQ = "le", "lt", "eq"


@dataclass(frozen=True)
class Row:
    coeffs: Tuple[Tuple[str, Fraction], ...]
    const: Fraction
    rel: str

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.coeffs)


def _linear(t: Term) -> Tuple[Dict[str, Fraction], Fraction]:
    if isinstance(t, Var):
        return {t.name: Fraction(1)}, _ZERO
    if isinstance(t, RationalConst):
        return {}, t.value
    if isinstance(t, ArithOp):
        if t.op == "plus":
            ca, ka = _linear(t.args[0])
            cb, kb = _linear(t.args[1])
            for v, c in cb.items():
                ca[v] = ca.get(v, _ZERO) + c
            return {v: c for v, c in ca.items() if c != 0}, ka + kb
        ca, ka = _linear(t.args[0])
        return {v: -c for v, c in ca.items()}, -ka
    raise NonlinearTermError(f"not an affine rational term: {t!r}")


def _freeze(coeffs: Dict[str, Fraction], const: Fraction, rel: str) -> Row:
    items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
    return Row(items, const, rel)


def _diff(a: Term, b: Term) -> Tuple[Dict[str, Fraction], Fraction]:
    ca, ka = _linear(a)
    cb, kb = _linear(b)
    for v, c in cb.items():
        ca[v] = ca.get(v, _ZERO) - c
    return ca, ka - kb


@dataclass(frozen=True)
class LraState:
    """An affine constraint system: rows plus excluded hyperplanes."""

    rows: Tuple[Row, ...]
    disequalities: Tuple[Row, ...]

    @classmethod
    def from_literals(cls, literals: Iterable[Formula]) -> "LraState":
        rows: List[Row] = []
        diseqs: List[Row] = []
        for lit in literals:
            if not is_literal(lit):
                raise UnsupportedAtomError(f"arithmetic expects literals, got {lit!r}")
            atom, sign = literal_atom(lit)
            if isinstance(atom, Leq):
                if sign:
                    c, k = _diff(atom.left, atom.right)
                    rows.append(_freeze(c, k, LE))
                else:
                    c, k = _diff(atom.right, atom.left)
                    rows.append(_freeze(c, k, LT))
            elif isinstance(atom, Eq):
                c, k = _diff(atom.left, atom.right)
                if sign:
                    rows.append(_freeze(c, k, EQ))
                else:
                    diseqs.append(_freeze(c, k, EQ))
            else:
                raise UnsupportedAtomError(f"not an arithmetic atom: {atom!r}")
        return cls(tuple(rows), tuple(diseqs))

    def vars(self) -> Tuple[str, ...]:
        acc: Dict[str, None] = {}
        for row in self.rows + self.disequalities:
            for v, _ in row.coeffs:
                acc.setdefault(v)
        return tuple(acc)


def _expand(rows: Sequence[Row]) -> List[Tuple[Dict[str, Fraction], Fraction, str]]:
    out = []
    for r in rows:
        d = r.as_dict()
        if r.rel == EQ:
            out.append((dict(d), r.const, LE))
            out.append(({v: -c for v, c in d.items()}, -r.const, LE))
        else:
            out.append((dict(d), r.const, r.rel))
    return out


def _eliminate(
    ineqs: List[Tuple[Dict[str, Fraction], Fraction, str]], order: Sequence[str]
) -> Optional[List[List[Tuple[Dict[str, Fraction], Fraction, str]]]]:
    """Run elimination; None means a ground contradiction was found.

    Returns the list of constraint systems per stage (stage i is the system
    before eliminating order[i]), for back-substitution.
    """
    stages = []
    cur = ineqs
    for v in order:
        stages.append(cur)
        ups = []
        downs = []
        rest = []
        for c, k, rel in cur:
            a = c.get(v, _ZERO)
            if a > 0:
                ups.append((c, k, rel, a))
            elif a < 0:
                downs.append((c, k, rel, a))
            else:
                rest.append((c, k, rel))
        combined = rest
        for cu, ku, relu, au in ups:
            for cd, kd, reld, ad in downs:
                # au*x <= -(cu'+ku) and ad*x >= ... combine scaled by 1/au, -1/ad
                c = {}
                for name in set(cu) | set(cd):
                    val = cu.get(name, _ZERO) / au - cd.get(name, _ZERO) / ad
                    if val != 0 and name != v:
                        c[name] = val
                k = ku / au - kd / ad
                rel = LT if LT in (relu, reld) else LE
                combined.append((c, k, rel))
        cur = combined
        ground_bad = _ground_contradiction(cur)
        if ground_bad:
            return None
    stages.append(cur)
    if _ground_contradiction(cur):
        return None
    return stages


def _ground_contradiction(rows) -> bool:
    for c, k, rel in rows:
        if not c:
            if rel == LE and k > 0:
                return True
            if rel == LT and k >= 0:
                return True
    return False


def lra_check(state: LraState) -> bool:
    """True when the rows and disequalities have a common rational solution."""
    ineqs = _expand(state.rows)
    order = state.vars()
    if _eliminate(ineqs, order) is None:
        return False
    for d in state.disequalities:
        if _entails_zero(state.rows, d):
            return False
    return True


def _entails_zero(rows: Sequence[Row], target: Row) -> bool:
    base = _expand(rows)
    d = target.as_dict()
    over = dict(d)
    pos = base + [({v: -c for v, c in over.items()}, -target.const, LT)]
    neg = base + [(dict(over), target.const, LT)]
    names: Dict[str, None] = {}
    for c, _, _ in pos + neg:
        for v in c:
            names.setdefault(v)
    order = tuple(names)
    return _eliminate(pos, order) is None and _eliminate(neg, order) is None


def lra_implied(state: LraState, shared: Sequence[str]) -> Tuple[Tuple[str, str], ...]:
    """Pairs of shared variables forced equal by the rows.

    A pair is implied exactly when both strict separations are infeasible.
    Only variables that actually occur are considered; the result carries
    one orientation per pair and no reflexive entries.
    """
    present = [v for v in shared if v in state.vars()]
    out: List[Tuple[str, str]] = []
    for i in range(len(present)):
        for j in range(i + 1, len(present)):
            x, y = present[i], present[j]
            target = _freeze({x: Fraction(1), y: Fraction(-1)}, _ZERO, EQ)
            if _entails_zero(state.rows, target):
                out.append((x, y))
    return tuple(out)


def _sample_ineqs(
    ineqs: List[Tuple[Dict[str, Fraction], Fraction, str]], order: Sequence[str]
) -> Optional[Dict[str, Fraction]]:
    """A solution of an inequality system, or None when there is none.

    Back-substitution in reverse elimination order: each variable takes the
    midpoint of its residual interval, or a point one unit inside a single
    bound.  A closed point interval is never strict here, since elimination
    would have turned strict touching bounds into a ground contradiction.
    """
    stages = _eliminate(ineqs, order)
    if stages is None:
        return None
    val: Dict[str, Fraction] = {}
    for idx in range(len(order) - 1, -1, -1):
        v = order[idx]
        lo: Optional[Fraction] = None
        hi: Optional[Fraction] = None
        for c, k, rel in stages[idx]:
            a = c.get(v, _ZERO)
            if a == 0:
                continue
            rest = k
            for name, coef in c.items():
                if name != v:
                    rest += coef * val[name]
            bound = -rest / a
            if a > 0:
                if hi is None or bound < hi:
                    hi = bound
            else:
                if lo is None or bound > lo:
                    lo = bound
        if lo is None and hi is None:
            val[v] = _ZERO
        elif lo is None:
            val[v] = hi - 1
        elif hi is None:
            val[v] = lo + 1
        else:
            val[v] = (lo + hi) / 2
    return val


def _row_value(d: Row, val: Dict[str, Fraction]) -> Fraction:
    return d.const + sum(c * val[v] for v, c in d.coeffs)


def lra_sample(state: LraState) -> Dict[str, Fraction]:
    """One exact solution of the system, rows first, then hyperplane repair.

    A rows-only solution may land on an excluded hyperplane.  Each hit is
    repaired by walking toward a feasible point strictly off that
    hyperplane: every already-cleared hyperplane excludes at most one point
    of the segment, so a short deterministic scan of step sizes finds a
    point clearing all of them at once.  Convexity keeps every row
    satisfied along the way.  The result is verified before returning.
    """
    ineqs = _expand(state.rows)
    order = state.vars()
    val = _sample_ineqs(ineqs, order)
    if val is None:
        raise InvariantViolation("sampling an unsatisfiable arithmetic system")

    cleared: List[Row] = []
    for d in state.disequalities:
        if _row_value(d, val) != 0:
            cleared.append(d)
            continue
        target: Optional[Dict[str, Fraction]] = None
        for sign in (1, -1):
            strict = ({v: sign * c for v, c in d.coeffs}, sign * d.const, LT)
            target = _sample_ineqs(ineqs + [strict], order)
            if target is not None:
                break
        if target is None:
            raise InvariantViolation("sampling an unsatisfiable arithmetic system")
        cleared.append(d)
        for k in range(1, len(cleared) + 2):
            t = Fraction(1, k)
            cand = {v: val[v] + t * (target[v] - val[v]) for v in order}
            if all(_row_value(c, cand) != 0 for c in cleared):
                val = cand
                break
        else:
            raise InvariantViolation("hyperplane repair ran out of step sizes")

    for c, k, rel in ineqs:
        total = k + sum(coef * val[n] for n, coef in c.items())
        if (rel == LE and total > 0) or (rel == LT and total >= 0):
            raise InvariantViolation("arithmetic sample violates a row")
    for d in state.disequalities:
        if _row_value(d, val) == 0:
            raise InvariantViolation("arithmetic sample hits an excluded hyperplane")
    return val
