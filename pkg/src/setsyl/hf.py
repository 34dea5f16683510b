"""Hereditarily finite set values.

HFSet is a canonical immutable value: children are deduplicated and kept
in a fixed total order (rank, then cardinality, then lexicographic on the
child sequence), so structural equality is value equality.  Instances are
interned, which makes equality cheap and lets the set-algebra helpers
memoize on node identity.  Values print in braces notation, "{}" being
the empty set.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Tuple

from .errors import BoundTooLargeError

MAX_RANK_BOUND = 4

_UNIVERSE_SIZES = {0: 1, 1: 2, 2: 4, 3: 16, 4: 65536}


class HFSet:
    __slots__ = ("children", "rank", "_members", "_hash", "_key")

    _intern: Dict[Tuple["HFSet", ...], "HFSet"] = {}

    def __new__(cls, children: Tuple["HFSet", ...]):
        # Private constructor; callers go through hf() which canonicalizes.
        self = object.__new__(cls)
        self.children = children
        self.rank = 0 if not children else 1 + max(c.rank for c in children)
        self._members = frozenset(children)
        self._hash = hash(children)
        self._key = None
        return self

    def key(self) -> tuple:
        """Sort key realizing the canonical total order."""
        k = self._key
        if k is None:
            k = (self.rank, len(self.children), tuple(c.key() for c in self.children))
            self._key = k
        return k

    def __contains__(self, item: "HFSet") -> bool:
        return item in self._members

    def __iter__(self) -> Iterator["HFSet"]:
        return iter(self.children)

    def __len__(self) -> int:
        return len(self.children)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, HFSet):
            return NotImplemented
        return self._hash == other._hash and self.children == other.children

    def __lt__(self, other: "HFSet") -> bool:
        return self.key() < other.key()

    def __repr__(self) -> str:
        return braces(self)


def hf(children: Iterable[HFSet] = ()) -> HFSet:
    """The canonical HFSet with the given members (idempotent on duplicates)."""
    uniq = sorted(set(children), key=HFSet.key)
    tup = tuple(uniq)
    cached = HFSet._intern.get(tup)
    if cached is None:
        cached = HFSet._intern.setdefault(tup, HFSet(tup))
    return cached


EMPTY_SET = hf()


def nested_singleton(depth: int) -> HFSet:
    """{{...{}...}} nested depth times; its rank equals depth."""
    s = EMPTY_SET
    for _ in range(depth):
        s = hf((s,))
    return s


def braces(s: HFSet) -> str:
    return "{" + ",".join(braces(c) for c in s.children) + "}"


def parse_braces(text: str) -> HFSet:
    """Inverse of braces(); whitespace is ignored, duplicates collapse."""
    s = "".join(text.split())
    pos = 0

    def node() -> HFSet:
        nonlocal pos
        if pos >= len(s) or s[pos] != "{":
            raise ValueError(f"expected '{{' at offset {pos} in {text!r}")
        pos += 1
        children = []
        if pos < len(s) and s[pos] == "}":
            pos += 1
            return hf()
        while True:
            children.append(node())
            if pos < len(s) and s[pos] == ",":
                pos += 1
                continue
            if pos < len(s) and s[pos] == "}":
                pos += 1
                return hf(children)
            raise ValueError(f"expected ',' or '}}' at offset {pos} in {text!r}")

    out = node()
    if pos != len(s):
        raise ValueError(f"trailing characters after set in {text!r}")
    return out


_union_cache: Dict[Tuple[HFSet, HFSet], HFSet] = {}
_inter_cache: Dict[Tuple[HFSet, HFSet], HFSet] = {}
_diff_cache: Dict[Tuple[HFSet, HFSet], HFSet] = {}
_pow_cache: Dict[HFSet, HFSet] = {}


def set_union(a: HFSet, b: HFSet) -> HFSet:
    r = _union_cache.get((a, b))
    if r is None:
        r = _union_cache[(a, b)] = hf(a.children + b.children)
    return r


def set_inter(a: HFSet, b: HFSet) -> HFSet:
    r = _inter_cache.get((a, b))
    if r is None:
        r = _inter_cache[(a, b)] = hf(c for c in a.children if c in b)
    return r


def set_diff(a: HFSet, b: HFSet) -> HFSet:
    r = _diff_cache.get((a, b))
    if r is None:
        r = _diff_cache[(a, b)] = hf(c for c in a.children if c not in b)
    return r


def is_subset(a: HFSet, b: HFSet) -> bool:
    return all(c in b for c in a.children)


def power_set(a: HFSet) -> HFSet:
    r = _pow_cache.get(a)
    if r is not None:
        return r
    subsets = [EMPTY_SET]
    for c in a.children:
        subsets += [hf(s.children + (c,)) for s in subsets]
    r = _pow_cache[a] = hf(subsets)
    return r


def big_union(a: HFSet) -> HFSet:
    out: List[HFSet] = []
    for c in a.children:
        out.extend(c.children)
    return hf(out)


def big_inter(a: HFSet) -> HFSet:
    """Intersection of the members; undefined (ValueError) on the empty set."""
    if not a.children:
        raise ValueError("big_inter of empty set is undefined")
    result = set(a.children[0].children)
    for c in a.children[1:]:
        result &= c._members
    return hf(result)


def kuratowski_pair(a: HFSet, b: HFSet) -> HFSet:
    return hf((hf((a,)), hf((a, b))))


def cross_product(a: HFSet, b: HFSet) -> HFSet:
    return hf(kuratowski_pair(x, y) for x in a.children for y in b.children)


def unordered_cross(a: HFSet, b: HFSet) -> HFSet:
    return hf(hf((x, y)) for x in a.children for y in b.children)


_universe_cache: Dict[int, Tuple[HFSet, ...]] = {}


def enumerate_universe(rank_bound: int) -> Tuple[HFSet, ...]:
    """All HFSets of rank <= rank_bound, in canonical order.

    Sizes grow as 1, 2, 4, 16, 65536 for bounds 0 through 4; larger bounds
    are refused with BoundTooLargeError.
    """
    if rank_bound < 0:
        raise BoundTooLargeError(f"rank bound must be nonnegative, got {rank_bound}")
    if rank_bound > MAX_RANK_BOUND:
        raise BoundTooLargeError(
            f"rank bound {rank_bound} exceeds the supported maximum {MAX_RANK_BOUND}"
        )
    cached = _universe_cache.get(rank_bound)
    if cached is not None:
        return cached
    level: List[HFSet] = [EMPTY_SET]
    for _ in range(rank_bound):
        # rank <= r+1 exactly means: every member has rank <= r, so the next
        # level is the full powerset of the current one.
        nxt = [EMPTY_SET]
        for c in level:
            nxt += [hf(s.children + (c,)) for s in nxt]
        level = sorted(set(nxt), key=HFSet.key)
    out = tuple(level)
    assert len(out) == _UNIVERSE_SIZES[rank_bound]
    _universe_cache[rank_bound] = out
    return out


class SetAssignment:
    """A finite map from variable names to HFSet values."""

    __slots__ = ("_m",)

    def __init__(self, mapping=()):
        self._m: Dict[str, HFSet] = dict(mapping)

    def __getitem__(self, name: str) -> HFSet:
        return self._m[name]

    def get(self, name: str, default=None):
        return self._m.get(name, default)

    def __contains__(self, name: str) -> bool:
        return name in self._m

    def __len__(self) -> int:
        return len(self._m)

    def names(self) -> Tuple[str, ...]:
        return tuple(self._m)

    def items(self):
        return self._m.items()

    def rank(self) -> int:
        """Largest rank among the assigned values (0 for the empty map)."""
        return max((v.rank for v in self._m.values()), default=0)

    def restrict(self, names: Iterable[str]) -> "SetAssignment":
        return SetAssignment((n, self._m[n]) for n in names)

    def extended(self, name: str, value: HFSet) -> "SetAssignment":
        m = dict(self._m)
        m[name] = value
        return SetAssignment(m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SetAssignment):
            return NotImplemented
        return self._m == other._m

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={braces(v)}" for k, v in sorted(self._m.items()))
        return f"SetAssignment({inner})"

    def to_strings(self) -> Dict[str, str]:
        return {k: braces(v) for k, v in sorted(self._m.items())}
