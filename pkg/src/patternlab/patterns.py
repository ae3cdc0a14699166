"""Core types: multisets, patterns, hypergraphs, and their canonical JSON encoding.

A pattern is a pair (m, edges) where every edge is an r-multiset on the
index set {1, ..., m}.  Patterns are templates for hypergraph families:
replacing each index by a vertex class and collecting all r-sets whose
class profile is an edge of the pattern yields the blowup constructions
handled in :mod:`patternlab.blowups`.

Indices are 1-based throughout, both in memory and in serialized form.
All types here are immutable after construction and safe to share.
"""

from __future__ import annotations

import itertools
import json
import warnings
from collections import Counter
from typing import Iterable, Iterator, Sequence

from .errors import FormatError

__all__ = [
    "Multiset",
    "Pattern",
    "Hypergraph",
    "induced_subpattern",
    "remove_index",
    "relabel_pattern",
    "pattern_of_hypergraph",
    "validate",
    "validate_pattern_document",
    "validate_hypergraph_document",
    "pattern_to_json",
    "pattern_from_json",
    "hypergraph_to_json",
    "hypergraph_from_json",
    "load_pattern",
    "load_hypergraph",
    "load_any",
    "save_pattern",
    "save_hypergraph",
    "iter_multisets",
    "complete_graph",
    "complete_hypergraph",
    "complete_pattern",
    "offdiagonal_pattern",
    "random_pattern",
]


class Multiset:
    """An unordered collection of indices with repetition, e.g. <1,1,2>.

    Stored as a sorted expansion tuple; two multisets are equal iff their
    expansions agree.  The multiset does not know the ambient index count m;
    range checks against m happen where m is available.
    """

    __slots__ = ("_expansion",)

    def __init__(self, indices: Iterable[int]):
        expansion = tuple(sorted(int(i) for i in indices))
        if not expansion:
            raise ValueError("a multiset needs at least one element")
        if expansion[0] < 1:
            raise ValueError(f"indices must be >= 1, got {expansion[0]}")
        self._expansion = expansion

    @property
    def expansion(self) -> tuple[int, ...]:
        return self._expansion

    @property
    def size(self) -> int:
        return len(self._expansion)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._expansion)

    def multiplicity(self, i: int, m: int | None = None) -> int:
        """Number of copies of index i; 0 when absent.

        When m is given, i is range-checked against {1, ..., m}.
        """
        i = int(i)
        if i < 1 or (m is not None and i > m):
            bound = f"[1, {m}]" if m is not None else "[1, inf)"
            raise ValueError(f"index {i} out of range {bound}")
        return self._expansion.count(i)

    def counts(self) -> dict[int, int]:
        """Mapping index -> positive multiplicity."""
        return dict(Counter(self._expansion))

    def __eq__(self, other) -> bool:
        return isinstance(other, Multiset) and self._expansion == other._expansion

    def __lt__(self, other: "Multiset") -> bool:
        return self._expansion < other._expansion

    def __hash__(self) -> int:
        return hash(self._expansion)

    def __iter__(self) -> Iterator[int]:
        return iter(self._expansion)

    def __len__(self) -> int:
        return len(self._expansion)

    def __repr__(self) -> str:
        return f"Multiset({list(self._expansion)})"


class Pattern:
    """An r-uniform pattern: m indices plus a set of r-multisets on {1..m}.

    Edges are deduplicated and kept sorted by expansion, which makes the
    canonical JSON form unique.  The empty edge set is allowed (its
    Lagrangian is 0); m >= 1 and r >= 2 are enforced.
    """

    __slots__ = ("m", "r", "edges")

    def __init__(self, m: int, r: int, edges: Iterable[Multiset | Iterable[int]] = ()):
        m = int(m)
        r = int(r)
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        if r < 2:
            raise ValueError(f"r must be >= 2, got {r}")
        raw = [e if isinstance(e, Multiset) else Multiset(e) for e in edges]
        canon = sorted(set(raw))
        if len(canon) < len(raw):
            warnings.warn("duplicate multisets in edge list were deduplicated", stacklevel=2)
        for e in canon:
            if e.size != r:
                raise ValueError(f"multiset {list(e)} has multiplicity sum {e.size} != r={r}")
            top = e.expansion[-1]
            if top > m:
                raise ValueError(f"multiset {list(e)} uses index {top} > m={m}")
        self.m = m
        self.r = r
        self.edges = tuple(canon)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edges_with_multiplicity(self, i: int, s: int) -> tuple[Multiset, ...]:
        """Edges in which index i appears exactly s times."""
        if not 1 <= i <= self.m:
            raise ValueError(f"index {i} out of range [1, {self.m}]")
        return tuple(e for e in self.edges if e.multiplicity(i) == s)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Pattern)
            and self.m == other.m
            and self.r == other.r
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.m, self.r, self.edges))

    def __repr__(self) -> str:
        return f"Pattern(m={self.m}, r={self.r}, edges={[list(e) for e in self.edges]})"


class Hypergraph:
    """An r-uniform hypergraph on vertex set {1..n}; edges are r-sets."""

    __slots__ = ("n", "r", "edges")

    def __init__(self, n: int, r: int, edges: Iterable[Iterable[int]] = ()):
        n = int(n)
        r = int(r)
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if r < 2:
            raise ValueError(f"r must be >= 2, got {r}")
        canon = set()
        for e in edges:
            tup = tuple(sorted(int(v) for v in e))
            if len(tup) != r or len(set(tup)) != r:
                raise ValueError(f"edge {list(e)} is not a set of {r} distinct vertices")
            if tup[0] < 1 or tup[-1] > n:
                raise ValueError(f"edge {list(tup)} leaves the vertex range [1, {n}]")
            canon.add(tup)
        self.n = n
        self.r = r
        self.edges = tuple(sorted(canon))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypergraph)
            and self.n == other.n
            and self.r == other.r
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.n, self.r, self.edges))

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, r={self.r}, edges={self.edge_count})"


# ---------------------------------------------------------------------------
# Pattern operations
# ---------------------------------------------------------------------------


def induced_subpattern(P: Pattern, S: Iterable[int]) -> Pattern:
    """Restrict P to the index set S, relabeling the survivors to {1..|S|}.

    Keeps exactly the edges supported inside S.  Relabeling preserves the
    relative order of the surviving indices.
    """
    s_sorted = sorted(set(int(i) for i in S))
    if not s_sorted:
        raise ValueError("S must be nonempty")
    if s_sorted[0] < 1 or s_sorted[-1] > P.m:
        raise ValueError(f"S={s_sorted} is not a subset of [1, {P.m}]")
    relabel = {old: new for new, old in enumerate(s_sorted, start=1)}
    keep = set(s_sorted)
    edges = [
        Multiset(relabel[i] for i in e.expansion)
        for e in P.edges
        if e.support <= keep
    ]
    return Pattern(len(s_sorted), P.r, edges)


def remove_index(P: Pattern, i: int) -> Pattern:
    """Delete index i and every edge containing it; survivors are relabeled.

    Requires m >= 2: removing the only index would leave no index set.
    """
    i = int(i)
    if not 1 <= i <= P.m:
        raise ValueError(f"index {i} out of range [1, {P.m}]")
    if P.m < 2:
        raise ValueError("cannot remove an index from a pattern with m=1")
    return induced_subpattern(P, (j for j in range(1, P.m + 1) if j != i))


def relabel_pattern(P: Pattern, permutation: Sequence[int]) -> Pattern:
    """Apply a permutation of {1..m}: old index j becomes permutation[j-1]."""
    perm = [int(p) for p in permutation]
    if sorted(perm) != list(range(1, P.m + 1)):
        raise ValueError(f"{perm} is not a permutation of [1, {P.m}]")
    return Pattern(P.m, P.r, (Multiset(perm[i - 1] for i in e) for e in P.edges))


def pattern_of_hypergraph(G: Hypergraph) -> Pattern:
    """View a hypergraph as a pattern: every edge becomes a multiplicity-1 multiset."""
    return Pattern(G.n, G.r, (Multiset(e) for e in G.edges))


# ---------------------------------------------------------------------------
# Validation diagnostics
# ---------------------------------------------------------------------------


def validate_pattern_document(doc) -> list[str]:
    """Diagnostics for a raw (parsed-JSON) pattern document; empty iff valid.

    Duplicate edges are reported with a ``warning:`` prefix: they are legal
    on load (deduplicated with a warning) but noted here.
    """
    diags: list[str] = []
    if not isinstance(doc, dict):
        return [f"document must be an object, got {type(doc).__name__}"]
    for key in ("r", "m", "edges"):
        if key not in doc:
            diags.append(f"missing field '{key}'")
    if diags:
        return diags
    r, m, edges = doc["r"], doc["m"], doc["edges"]
    if not isinstance(r, int) or r < 2:
        diags.append(f"r: must be an integer >= 2, got {r!r}")
    if not isinstance(m, int) or m < 1:
        diags.append(f"m: must be an integer >= 1, got {m!r}")
    if not isinstance(edges, list):
        diags.append(f"edges: must be a list, got {type(edges).__name__}")
    if diags:
        return diags
    seen: dict[tuple[int, ...], int] = {}
    for k, e in enumerate(edges):
        loc = f"edges[{k}]"
        if not isinstance(e, list) or not all(isinstance(v, int) for v in e):
            diags.append(f"{loc}: must be a list of integers")
            continue
        if len(e) != r:
            diags.append(f"{loc}: multiplicity sum {len(e)} != r={r}")
        for v in e:
            if v < 1:
                diags.append(f"{loc}: index {v} < 1")
            elif v > m:
                diags.append(f"{loc}: index {v} > m={m}")
        key = tuple(sorted(e))
        if key in seen:
            diags.append(f"warning: {loc} duplicates edges[{seen[key]}]")
        else:
            seen[key] = k
    return diags


def validate(P: Pattern) -> list[str]:
    """Re-check a constructed pattern's invariants; empty report iff valid."""
    doc = {"r": P.r, "m": P.m, "edges": [list(e.expansion) for e in P.edges]}
    return validate_pattern_document(doc)


def validate_hypergraph_document(doc) -> list[str]:
    """Diagnostics for a raw hypergraph document; empty iff valid."""
    diags: list[str] = []
    if not isinstance(doc, dict):
        return [f"document must be an object, got {type(doc).__name__}"]
    for key in ("r", "n", "edges"):
        if key not in doc:
            diags.append(f"missing field '{key}'")
    if diags:
        return diags
    r, n, edges = doc["r"], doc["n"], doc["edges"]
    if not isinstance(r, int) or r < 2:
        diags.append(f"r: must be an integer >= 2, got {r!r}")
    if not isinstance(n, int) or n < 1:
        diags.append(f"n: must be an integer >= 1, got {n!r}")
    if not isinstance(edges, list):
        diags.append(f"edges: must be a list, got {type(edges).__name__}")
    if diags:
        return diags
    for k, e in enumerate(edges):
        loc = f"edges[{k}]"
        if not isinstance(e, list) or not all(isinstance(v, int) for v in e):
            diags.append(f"{loc}: must be a list of integers")
            continue
        if len(e) != r or len(set(e)) != len(e):
            diags.append(f"{loc}: must contain exactly {r} distinct vertices")
        for v in e:
            if v < 1:
                diags.append(f"{loc}: vertex {v} < 1")
            elif v > n:
                diags.append(f"{loc}: vertex {v} > n={n}")
    return diags


# ---------------------------------------------------------------------------
# Canonical JSON serialization
# ---------------------------------------------------------------------------


def _dumps(doc: dict, pretty: bool) -> str:
    if pretty:
        return json.dumps(doc, indent=2)
    return json.dumps(doc, separators=(",", ":"))


def pattern_to_json(P: Pattern, *, pretty: bool = False) -> str:
    """Canonical text form: sorted expansions, edge list sorted lexicographically."""
    doc = {"r": P.r, "m": P.m, "edges": [list(e.expansion) for e in P.edges]}
    return _dumps(doc, pretty)


def _parse(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def pattern_from_json(text: str) -> Pattern:
    doc = _parse(text)
    diags = validate_pattern_document(doc)
    hard = [d for d in diags if not d.startswith("warning:")]
    if hard:
        raise FormatError("invalid pattern document: " + "; ".join(hard))
    return Pattern(doc["m"], doc["r"], doc["edges"])


def hypergraph_to_json(G: Hypergraph, *, pretty: bool = False) -> str:
    doc = {"r": G.r, "n": G.n, "edges": [list(e) for e in G.edges]}
    return _dumps(doc, pretty)


def hypergraph_from_json(text: str) -> Hypergraph:
    doc = _parse(text)
    diags = validate_hypergraph_document(doc)
    if diags:
        raise FormatError("invalid hypergraph document: " + "; ".join(diags))
    return Hypergraph(doc["n"], doc["r"], doc["edges"])


def load_pattern(path) -> Pattern:
    with open(path, "r", encoding="utf-8") as fh:
        return pattern_from_json(fh.read())


def load_hypergraph(path) -> Hypergraph:
    with open(path, "r", encoding="utf-8") as fh:
        return hypergraph_from_json(fh.read())


def load_any(path) -> Pattern | Hypergraph:
    """Load a pattern or hypergraph file, sniffing by the 'm' vs 'n' field."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    doc = _parse(text)
    if isinstance(doc, dict) and "n" in doc and "m" not in doc:
        return hypergraph_from_json(text)
    return pattern_from_json(text)


def save_pattern(P: Pattern, path, *, pretty: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(pattern_to_json(P, pretty=pretty) + "\n")


def save_hypergraph(G: Hypergraph, path, *, pretty: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(hypergraph_to_json(G, pretty=pretty) + "\n")


# ---------------------------------------------------------------------------
# Stock constructions and enumeration helpers
# ---------------------------------------------------------------------------


def iter_multisets(indices: Sequence[int], size: int) -> Iterator[tuple[int, ...]]:
    """All size-multisets on the given indices, as sorted expansion tuples.

    Yields C(len(indices) + size - 1, size) tuples in lexicographic order.
    """
    yield from itertools.combinations_with_replacement(sorted(indices), size)


def complete_graph(m: int) -> Hypergraph:
    """K_m: the complete 2-graph on m vertices."""
    return complete_hypergraph(m, 2)


def complete_hypergraph(n: int, r: int) -> Hypergraph:
    """All r-subsets of {1..n}."""
    if n < r:
        raise ValueError(f"need n >= r, got n={n}, r={r}")
    return Hypergraph(n, r, itertools.combinations(range(1, n + 1), r))


def complete_pattern(m: int, r: int) -> Pattern:
    """All plain r-subsets of {1..m} as multiplicity-1 edges (m >= r).

    Blowups of this pattern are exactly the complete m-partite r-graphs.
    """
    if m < r:
        raise ValueError(f"need m >= r, got m={m}, r={r}")
    return Pattern(m, r, itertools.combinations(range(1, m + 1), r))


def offdiagonal_pattern(m: int, r: int) -> Pattern:
    """Every r-multiset on {1..m} except the m single-index (diagonal) ones.

    Its density polynomial collapses to 1 - sum_i x_i^r on the simplex, which
    makes it the canonical host pattern for gluing constructions.
    """
    if m < 2:
        raise ValueError(f"need m >= 2, got m={m}")
    edges = (e for e in iter_multisets(range(1, m + 1), r) if len(set(e)) > 1)
    return Pattern(m, r, edges)


def random_pattern(rng, m: int, r: int, *, edge_probability: float = 0.5,
                   allow_empty: bool = True,
                   exclude: Iterable[Multiset | Iterable[int]] = ()) -> Pattern:
    """Sample a pattern by keeping each r-multiset on {1..m} independently.

    rng is a numpy Generator (anything with .random() works).  Multisets in
    exclude are never drawn.  When allow_empty is false and the draw comes
    out empty, one multiset is forced in, chosen by an extra draw.
    """
    banned = {e if isinstance(e, Multiset) else Multiset(e) for e in exclude}
    universe = [e for e in iter_multisets(range(1, m + 1), r)
                if Multiset(e) not in banned]
    edges = [e for e in universe if rng.random() < edge_probability]
    if not edges and not allow_empty:
        if not universe:
            raise ValueError("every multiset is excluded; cannot force an edge")
        edges = [universe[int(rng.random() * len(universe)) % len(universe)]]
    return Pattern(m, r, edges)
