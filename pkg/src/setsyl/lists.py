"""Theory of cons cells with projections and an atom predicate.

Satisfiability of conjunctions of literals over cons/car/cdr, equalities,
disequalities, and atom(t) is decided by congruence closure over the term
graph, extended with three structural rules:

  * projection: car(t) collapses with a whenever t's class contains some
    cons(a, b), and cdr(t) with b;
  * constructor injectivity: two cons nodes in one class merge their
    arguments pairwise;
  * non-atoms are constructed: asserting not atom(x) introduces
    cons(car(x), cdr(x)) = x.

A class may not be marked atom and contain a cons node.  There is no
acyclicity rule: x = cons(a, x) is satisfiable (the models are rational
trees).  The theory is stably infinite, and conjunctions of literals are
convex, so propagating single equalities is complete for combination.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import UnsupportedAtomError
from .formulas import (
    AtomPred,
    Eq,
    Formula,
    ListOp,
    Term,
    Var,
    is_literal,
    literal_atom,
)

_Key = Tuple


def _term_key(t: Term) -> _Key:
    if isinstance(t, Var):
        return ("var", t.name)
    if isinstance(t, ListOp):
        return (t.op,) + tuple(_term_key(a) for a in t.args)
    raise UnsupportedAtomError(f"not a list term: {t!r}")


class ListState:
    """Term graph plus union-find, congruence-closed after construction.

    Nodes are interned subterms; `find` maps a node to its class
    representative (the earliest-created member).  `atom_classes` holds
    representatives asserted to be atoms.  `unsat_reason` is None exactly
    when the asserted literals are jointly satisfiable.
    """

    def __init__(self, literals: Iterable[Formula] = ()) -> None:
        self.key_to_id: Dict[_Key, int] = {}
        self.node_op: List[Optional[str]] = []
        self.node_args: List[Tuple[int, ...]] = []
        self.node_name: List[str] = []
        self.parent: List[int] = []
        self.atom_ids: List[int] = []
        self.diseqs: List[Tuple[int, int]] = []
        self.literals: Tuple[Formula, ...] = ()
        self.unsat_reason: Optional[str] = None
        for lit in literals:
            self.assert_literal(lit)
        self._close()

    # union-find ---------------------------------------------------------

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def _union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    # term graph ---------------------------------------------------------

    def _intern(self, t: Term) -> int:
        key = _term_key(t)
        if key in self.key_to_id:
            return self.key_to_id[key]
        if isinstance(t, ListOp):
            args = tuple(self._intern(a) for a in t.args)
            op: Optional[str] = t.op
            name = ""
        else:
            args = ()
            op = None
            name = t.name
        idx = len(self.parent)
        self.key_to_id[key] = idx
        self.node_op.append(op)
        self.node_args.append(args)
        self.node_name.append(name)
        self.parent.append(idx)
        return idx

    def _fresh_app(self, op: str, args: Tuple[int, ...]) -> int:
        idx = len(self.parent)
        self.node_op.append(op)
        self.node_args.append(args)
        self.node_name.append("")
        self.parent.append(idx)
        return idx

    # assertions ---------------------------------------------------------

    def assert_literal(self, lit: Formula) -> None:
        if not is_literal(lit):
            raise UnsupportedAtomError(f"list theory expects literals, got {lit!r}")
        atom, sign = literal_atom(lit)
        self.literals += (lit,)
        if isinstance(atom, Eq):
            a, b = self._intern(atom.left), self._intern(atom.right)
            if sign:
                self._union(a, b)
            else:
                self.diseqs.append((a, b))
        elif isinstance(atom, AtomPred):
            t = self._intern(atom.arg)
            if sign:
                self.atom_ids.append(t)
            else:
                # not atom(t): t must be a cell, so give it projections
                car = self._fresh_app("car", (t,))
                cdr = self._fresh_app("cdr", (t,))
                cell = self._fresh_app("cons", (car, cdr))
                self._union(cell, t)
        else:
            raise UnsupportedAtomError(f"not a list atom: {atom!r}")
        self._close()

    # closure ------------------------------------------------------------

    def _close(self) -> None:
        changed = True
        while changed:
            changed = False
            n = len(self.parent)
            # congruence: same op, argwise-equal classes
            sig: Dict[Tuple, int] = {}
            for i in range(n):
                if self.node_op[i] is None:
                    continue
                s = (self.node_op[i],) + tuple(self.find(a) for a in self.node_args[i])
                j = sig.get(s)
                if j is None:
                    sig[s] = i
                elif self._union(i, j):
                    changed = True
            # projection and injectivity around cons nodes
            cons_of: Dict[int, int] = {}
            for i in range(n):
                if self.node_op[i] != "cons":
                    continue
                r = self.find(i)
                other = cons_of.get(r)
                if other is None:
                    cons_of[r] = i
                else:
                    for x, y in zip(self.node_args[i], self.node_args[other]):
                        if self._union(x, y):
                            changed = True
            for i in range(n):
                if self.node_op[i] in ("car", "cdr"):
                    cell = cons_of.get(self.find(self.node_args[i][0]))
                    if cell is not None:
                        pick = 0 if self.node_op[i] == "car" else 1
                        if self._union(i, self.node_args[cell][pick]):
                            changed = True
        self._judge()

    def _judge(self) -> None:
        cons_classes = {
            self.find(i) for i in range(len(self.parent)) if self.node_op[i] == "cons"
        }
        for t in self.atom_ids:
            if self.find(t) in cons_classes:
                self.unsat_reason = "an atom's class contains a cons cell"
                return
        for a, b in self.diseqs:
            if self.find(a) == self.find(b):
                self.unsat_reason = "both sides of a disequality collapsed"
                return
        self.unsat_reason = None

    # queries ------------------------------------------------------------

    def _var_id(self, name: str) -> Optional[int]:
        return self.key_to_id.get(("var", name))

    def same_class(self, x: str, y: str) -> bool:
        a, b = self._var_id(x), self._var_id(y)
        if a is None or b is None:
            return False
        return self.find(a) == self.find(b)

    def representatives(self, names: Sequence[str]) -> Dict[str, str]:
        """Map each present variable to a canonical member of its class.

        The representative is the alphabetically first variable in the
        class if any exists, else a printed form of the earliest node.
        """
        out: Dict[str, str] = {}
        byclass: Dict[int, List[str]] = {}
        for i in range(len(self.parent)):
            if self.node_op[i] is None:
                byclass.setdefault(self.find(i), []).append(self.node_name[i])
        for name in names:
            i = self._var_id(name)
            if i is None:
                continue
            vs = byclass.get(self.find(i))
            out[name] = min(vs) if vs else self._print_node(self.find(i))
        return out

    def _print_node(self, i: int) -> str:
        if self.node_op[i] is None:
            return self.node_name[i]
        args = " ".join(self._print_node(a) for a in self.node_args[i])
        return f"({self.node_op[i]} {args})"


def list_check(state: ListState) -> bool:
    """True when the asserted literals have a common model."""
    return state.unsat_reason is None


def list_implied(state: ListState, shared: Sequence[str]) -> Tuple[Tuple[str, str], ...]:
    """Pairs of shared variables in one congruence class, one orientation each."""
    out: List[Tuple[str, str]] = []
    for i in range(len(shared)):
        for j in range(i + 1, len(shared)):
            if state.same_class(shared[i], shared[j]):
                out.append((shared[i], shared[j]))
    return tuple(out)
