"""Topological Markov shifts as directed graphs over a finite alphabet."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import (
    DuplicateSymbol,
    InputError,
    NotIrreducible,
    StrandedSymbol,
    UnknownSymbol,
)

# Hard cap on materialised cycles; enumeration beyond this is an input error.
MAX_ENUMERATED_CYCLES = 5_000_000


@dataclass(frozen=True, eq=False)
class ShiftGraph:
    """Directed graph of symbols; bi-infinite paths form the shift space.

    Symbols are addressed by dense integer ids ``0..n-1`` in the order of
    ``symbols``.  Instances are immutable and safe to share between threads.
    """

    symbols: tuple[str, ...]
    adjacency: np.ndarray
    index: dict[str, int] = field(repr=False)

    def __post_init__(self):
        self.adjacency.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.symbols)

    def successors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def predecessors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[:, i])

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) with successors sorted by symbol id."""
        counts = self.adjacency.sum(axis=1)
        indptr = np.zeros(self.size + 1, dtype=np.int32)
        np.cumsum(counts, out=indptr[1:])
        indices = np.nonzero(self.adjacency)[1].astype(np.int32)
        return indptr, indices

    def ids(self, names: Iterable[str]) -> tuple[int, ...]:
        out = []
        for name in names:
            if name not in self.index:
                raise UnknownSymbol(f"unknown symbol {name!r}")
            out.append(self.index[name])
        return tuple(out)

    def names(self, ids: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.symbols[i] for i in ids)

    def format_word(self, ids: Iterable[int]) -> str:
        """Render a word; single-character alphabets are concatenated."""
        names = self.names(ids)
        if all(len(s) == 1 for s in self.symbols):
            return "".join(names)
        return " ".join(names)

    def parse_word(self, text: str | Sequence[str]) -> tuple[int, ...]:
        """Inverse of :meth:`format_word`; also accepts a list of names."""
        if not isinstance(text, str):
            return self.ids(text)
        if any(c in text for c in " ,"):
            parts = [p for p in text.replace(",", " ").split() if p]
        elif text in self.index:
            parts = [text]
        else:
            parts = list(text)
        return self.ids(parts)

    def subgraph(self, keep: Iterable[int]) -> tuple["ShiftGraph", np.ndarray]:
        """Induced subgraph on ``keep`` (sorted) and the id map new -> old.

        The result is not re-validated: callers pass irreducible components,
        on which every symbol has an edge in and out.
        """
        old = np.array(sorted(set(int(k) for k in keep)), dtype=np.intp)
        adj = self.adjacency[np.ix_(old, old)].copy()
        symbols = tuple(self.symbols[i] for i in old)
        return ShiftGraph(symbols, adj, {s: k for k, s in enumerate(symbols)}), old

    def to_json(self) -> dict:
        return {
            "symbols": list(self.symbols),
            "edges": [[self.symbols[i], self.symbols[j]] for i, j in self.edges()],
        }


@dataclass(frozen=True)
class Word:
    """Finite word placed at coordinates ``base_index .. base_index+len-1``."""

    letters: tuple[int, ...]
    base_index: int = 0

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class ComponentDecomposition:
    components: tuple[frozenset[int], ...]
    periods: tuple[int, ...]
    trivial: frozenset[int]

    def kind(self, symbol: int) -> str:
        return "trivial" if symbol in self.trivial else "irreducible"

    def component_of(self, symbol: int) -> int | None:
        for k, comp in enumerate(self.components):
            if symbol in comp:
                return k
        return None


def build_graph(symbol_names: Sequence[str], edge_pairs: Iterable[Sequence[str]]) -> ShiftGraph:
    """Validate names and edges and return the shift graph.

    Raises DuplicateSymbol, UnknownSymbol, or StrandedSymbol.
    """
    names = [str(s) for s in symbol_names]
    index: dict[str, int] = {}
    for k, s in enumerate(names):
        if s in index:
            raise DuplicateSymbol(f"duplicate symbol {s!r}")
        index[s] = k
    adj = np.zeros((len(names), len(names)), dtype=bool)
    for pair in edge_pairs:
        if len(pair) != 2:
            raise InputError(f"edge must be a pair of names, got {pair!r}")
        u, v = (str(x) for x in pair)
        for s in (u, v):
            if s not in index:
                raise UnknownSymbol(f"edge {u!r}->{v!r} references unknown symbol {s!r}")
        adj[index[u], index[v]] = True
    for k, s in enumerate(names):
        if not adj[k].any() or not adj[:, k].any():
            missing = "outgoing" if not adj[k].any() else "incoming"
            raise StrandedSymbol(f"symbol {s!r} has no {missing} edge")
    return ShiftGraph(tuple(names), adj, index)


def graph_from_matrix(matrix, symbols: Sequence[str] | None = None) -> ShiftGraph:
    """Shift graph of a 0-1 transition matrix."""
    m = np.asarray(matrix) != 0
    if symbols is None:
        symbols = [str(k) for k in range(m.shape[0])]
    edges = [(symbols[i], symbols[j]) for i, j in zip(*np.nonzero(m))]
    return build_graph(symbols, edges)


def load_graph(doc: dict | str) -> ShiftGraph:
    """Parse the ``{"symbols": [...], "edges": [[u, v], ...]}`` document."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or "symbols" not in doc or "edges" not in doc:
        raise InputError('shift spec must be an object with "symbols" and "edges"')
    return build_graph(doc["symbols"], doc["edges"])


def maximal_irreducible_components(g: ShiftGraph) -> ComponentDecomposition:
    """Strongly connected classes that contain a cycle, with their periods.

    A singleton class counts as irreducible only when the symbol has a
    self-loop; every other symbol is reported as trivial.
    """
    n_comp, labels = connected_components(
        csr_matrix(g.adjacency.astype(np.int8)), directed=True, connection="strong"
    )
    comps = []
    trivial = set()
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        if len(members) == 1 and not g.adjacency[members[0], members[0]]:
            trivial.add(int(members[0]))
            continue
        comps.append(frozenset(int(m) for m in members))
    # deterministic order: by smallest symbol id
    comps.sort(key=min)
    periods = tuple(_period(g, comp) for comp in comps)
    return ComponentDecomposition(tuple(comps), periods, frozenset(trivial))


def _period(g: ShiftGraph, comp: frozenset[int]) -> int:
    # gcd over in-component edges u->v of level(u) + 1 - level(v), BFS levels
    start = min(comp)
    level = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.successors(u):
                v = int(v)
                if v in comp and v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    d = 0
    for u in comp:
        for v in g.successors(u):
            v = int(v)
            if v in comp:
                d = gcd(d, level[u] + 1 - level[v])
    return abs(d)


def is_irreducible(g: ShiftGraph, component: Iterable[int]) -> bool:
    comp = frozenset(int(c) for c in component)
    return comp in maximal_irreducible_components(g).components


def component_period(g: ShiftGraph, component: Iterable[int]) -> int:
    """gcd of cycle lengths through any symbol of an irreducible component."""
    comp = frozenset(int(c) for c in component)
    if not comp or comp not in maximal_irreducible_components(g).components:
        raise NotIrreducible(f"{sorted(comp)} is not a maximal irreducible component")
    return _period(g, comp)


def is_admissible(g: ShiftGraph, w: Word | Sequence[int]) -> bool:
    letters = w.letters if isinstance(w, Word) else tuple(w)
    if any(not 0 <= x < g.size for x in letters):
        return False
    return all(g.adjacency[x, y] for x, y in zip(letters, letters[1:]))


def cycle_array(g: ShiftGraph, base: int, n: int, limit: int = MAX_ENUMERATED_CYCLES) -> np.ndarray:
    """All admissible n-cycles through ``base`` as rows of an int array."""
    if n < 1:
        raise ValueError("cycle length must be >= 1")
    indptr, indices = g.csr()
    return kernels.enumerate_cycles(indptr, indices, int(base), int(n), int(limit))


def enumerate_cycles(g: ShiftGraph, base: int, n: int) -> Iterator[Word]:
    """Yield period-n points in ``[base]`` as words (w_0 = base, w_{n-1} -> w_0).

    Plain depth-first order over successor ids; no symmetry reduction.
    """
    for row in cycle_array(g, base, n):
        yield Word(tuple(int(x) for x in row))


def count_cycles(g: ShiftGraph, base: int, n: int) -> int:
    indptr, indices = g.csr()
    return kernels.count_cycles(indptr, indices, int(base), int(n))


def admissible_words(g: ShiftGraph, length: int, start: int | None = None) -> np.ndarray:
    """All admissible words of a given length (optionally fixing the first letter).

    Rows are in lexicographic order of symbol ids.
    """
    if length < 1:
        return np.zeros((1, 0), dtype=np.intp)
    if start is None:
        words = np.arange(g.size, dtype=np.intp)[:, None]
    else:
        words = np.array([[start]], dtype=np.intp)
    indptr, indices = g.csr()
    for _ in range(length - 1):
        words = extend_right(words, indptr, indices)
    return words


def extend_right(words: np.ndarray, indptr: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Every one-letter admissible right extension of each row (row order kept)."""
    last = words[:, -1]
    counts = indptr[last + 1] - indptr[last]
    parent = np.repeat(np.arange(len(words)), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    letters = indices[np.repeat(indptr[last], counts) + offsets]
    return np.column_stack([words[parent], letters.astype(np.intp)])
