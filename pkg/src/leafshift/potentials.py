"""Locally constant potentials, Birkhoff sums, variations and past reduction.

A potential with past window ``a`` and future window ``b`` is a table of
values on admissible words occupying coordinates ``-a..b``; it is evaluated
on a sequence ``x`` through the letters ``x[-a], ..., x[b]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BadAnchor, InadmissibleWord, InputError
from .shift_core import ShiftGraph, Word, admissible_words, cycle_array, is_admissible

# Dense lookup tables are used while n_symbols ** window stays below this.
_DENSE_LIMIT = 1 << 22


@dataclass(frozen=True)
class HolderData:
    """Variation envelope ``Var_n <= constant * ratio**n``."""

    constant: float
    ratio: float

    def __post_init__(self):
        if self.constant < 0 or not 0 < self.ratio < 1:
            raise ValueError("need constant >= 0 and 0 < ratio < 1")

    def bound(self, n: int) -> float:
        return self.constant * self.ratio**n

    def tail(self, n: int) -> float:
        """``sum_{k >= n} constant * ratio**k``: the error budget past depth n."""
        return self.constant * self.ratio**n / (1.0 - self.ratio)


def fit_holder(variations: Mapping[int, float], ratio: float) -> HolderData:
    """Smallest constant with ``variations[n] <= C * ratio**n`` for every n given."""
    c = max((v / ratio**n for n, v in variations.items() if n >= 1), default=0.0)
    return HolderData(float(c), ratio)


class LocallyConstantPotential:
    """Finite-window potential on the shift of ``graph``."""

    def __init__(self, graph: ShiftGraph, past_window: int, future_window: int,
                 values: Mapping[tuple[int, ...], float]):
        if past_window < 0 or future_window < 0:
            raise InputError("windows must be nonnegative")
        self.graph = graph
        self.past_window = int(past_window)
        self.future_window = int(future_window)
        self.windows = admissible_words(graph, self.window_length)
        vals = np.empty(len(self.windows))
        for k, row in enumerate(self.windows):
            key = tuple(int(x) for x in row)
            if key not in values:
                raise InputError(f"no value for window {graph.format_word(key)!r}")
            vals[k] = float(values[key])
        if len(values) != len(self.windows):
            extra = set(values) - {tuple(int(x) for x in r) for r in self.windows}
            bad = sorted(extra)[0]
            raise InadmissibleWord(f"value given for inadmissible window {bad!r}")
        if not np.all(np.isfinite(vals)):
            raise InputError("potential values must be finite")
        self.values = vals
        self.values.setflags(write=False)
        self._lookup = {tuple(int(x) for x in r): v for r, v in zip(self.windows, vals)}
        n = graph.size
        self._dense = None
        if n**self.window_length <= _DENSE_LIMIT:
            table = np.full(n**self.window_length, np.nan)
            table[self._codes(self.windows)] = vals
            self._dense = table

    # -- construction -------------------------------------------------------

    @classmethod
    def from_function(cls, graph: ShiftGraph, past_window: int, future_window: int,
                      fn: Callable[[tuple[int, ...]], float]) -> "LocallyConstantPotential":
        words = admissible_words(graph, past_window + future_window + 1)
        vals = {tuple(int(x) for x in w): float(fn(tuple(int(x) for x in w))) for w in words}
        return cls(graph, past_window, future_window, vals)

    @classmethod
    def constant(cls, graph: ShiftGraph, c: float, past_window: int = 0,
                 future_window: int = 0) -> "LocallyConstantPotential":
        return cls.from_function(graph, past_window, future_window, lambda w: c)

    @classmethod
    def from_json(cls, graph: ShiftGraph, doc: dict | str) -> "LocallyConstantPotential":
        """Parse ``{"past_window", "future_window", "values", "default"}``."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            a = int(doc.get("past_window", 0))
            b = int(doc.get("future_window", 0))
        except (TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"bad window sizes: {exc}") from None
        given = {}
        for key, v in (doc.get("values") or {}).items():
            letters = graph.parse_word(key)
            if len(letters) != a + b + 1:
                raise InputError(f"window {key!r} has length {len(letters)}, expected {a + b + 1}")
            if not is_admissible(graph, letters):
                raise InadmissibleWord(f"window {key!r} is not admissible")
            given[letters] = float(v)
        default = doc.get("default")
        vals = {}
        for w in admissible_words(graph, a + b + 1):
            key = tuple(int(x) for x in w)
            if key in given:
                vals[key] = given[key]
            elif default is not None:
                vals[key] = float(default)
            else:
                raise InputError(f"no value for window {graph.format_word(key)!r} and no default")
        return cls(graph, a, b, vals)

    def to_json(self) -> dict:
        return {
            "past_window": self.past_window,
            "future_window": self.future_window,
            "values": {self.graph.format_word(w): float(v) for w, v in zip(self.windows, self.values)},
        }

    # -- evaluation ---------------------------------------------------------

    @property
    def window_length(self) -> int:
        return self.past_window + self.future_window + 1

    def _codes(self, windows: np.ndarray) -> np.ndarray:
        n = self.graph.size
        codes = np.zeros(len(windows), dtype=np.int64)
        for j in range(windows.shape[1]):
            codes = codes * n + windows[:, j]
        return codes

    def __call__(self, window: Sequence[int]) -> float:
        try:
            return self._lookup[tuple(int(x) for x in window)]
        except KeyError:
            raise InadmissibleWord(f"window {tuple(window)!r} is not admissible") from None

    def evaluate(self, windows: np.ndarray) -> np.ndarray:
        """Vectorised lookup for an (m, window_length) array of windows."""
        windows = np.asarray(windows, dtype=np.int64)
        if self._dense is not None:
            out = self._dense[self._codes(windows)]
        else:
            out = np.array([self._lookup.get(tuple(int(x) for x in w), np.nan) for w in windows])
        if np.isnan(out).any():
            raise InadmissibleWord("inadmissible window in evaluation")
        return out

    def at(self, sequence: Sequence[int], position: int) -> float:
        """Value at the point whose coordinate 0 is ``sequence[position]``."""
        lo = position - self.past_window
        hi = position + self.future_window
        if lo < 0 or hi >= len(sequence):
            raise IndexError("window runs past the end of the sequence")
        return self(sequence[lo:hi + 1])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    def shifted(self, c: float) -> "LocallyConstantPotential":
        return LocallyConstantPotential(
            self.graph, self.past_window, self.future_window,
            {tuple(int(x) for x in w): v + c for w, v in zip(self.windows, self.values)},
        )

    def scaled(self, t: float) -> "LocallyConstantPotential":
        return LocallyConstantPotential(
            self.graph, self.past_window, self.future_window,
            {tuple(int(x) for x in w): t * v for w, v in zip(self.windows, self.values)},
        )

    def restrict(self, sub: ShiftGraph, old_ids: np.ndarray) -> "LocallyConstantPotential":
        """The same potential on an induced subgraph (``old_ids`` maps new -> old)."""
        old_ids = np.asarray(old_ids)
        vals = {}
        for w in admissible_words(sub, self.window_length):
            vals[tuple(int(x) for x in w)] = self(old_ids[w])
        return LocallyConstantPotential(sub, self.past_window, self.future_window, vals)

    def with_past_window(self, m: int) -> "LocallyConstantPotential":
        """Same function viewed through a wider past window (``m >= past_window``)."""
        if m < self.past_window:
            raise ValueError("cannot narrow a window")
        drop = m - self.past_window
        return LocallyConstantPotential.from_function(
            self.graph, m, self.future_window, lambda w: self(w[drop:])
        )

    def __repr__(self):
        return (f"LocallyConstantPotential(symbols={self.graph.size}, "
                f"past={self.past_window}, future={self.future_window})")


# -- Birkhoff sums ----------------------------------------------------------

def _periodic_letters(pot, cycle, start, stop):
    letters = np.asarray(cycle, dtype=np.int64)
    return letters[np.arange(start, stop) % len(letters)]


def _check_cycle(pot: LocallyConstantPotential, cycle) -> tuple[int, ...]:
    letters = cycle.letters if isinstance(cycle, Word) else tuple(int(x) for x in cycle)
    if not letters or not is_admissible(pot.graph, letters + letters[:1]):
        raise InadmissibleWord(f"{letters!r} is not an admissible cycle")
    return letters


def birkhoff_sum_backward(pot: LocallyConstantPotential, periodic_word, n: int) -> float:
    """``sum_{k<n} phi(f^-k q)`` for the periodic point q repeating the cycle."""
    letters = _check_cycle(pot, periodic_word)
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = pot.past_window, pot.future_window
    total = 0.0
    for k in range(n):
        total += pot(_periodic_letters(pot, letters, -k - a, -k + b + 1))
    return total


def birkhoff_sum_forward(pot: LocallyConstantPotential, periodic_word, n: int) -> float:
    """``sum_{k<n} phi(f^k q)``; equals the backward sum on whole periods."""
    letters = _check_cycle(pot, periodic_word)
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = pot.past_window, pot.future_window
    total = 0.0
    for k in range(n):
        total += pot(_periodic_letters(pot, letters, k - a, k + b + 1))
    return total


def periodic_sums(pot: LocallyConstantPotential, cycles: np.ndarray) -> np.ndarray:
    """Full-period Birkhoff sums of every row of a cycle array, vectorised."""
    cycles = np.asarray(cycles, dtype=np.int64)
    count, n = cycles.shape
    if count == 0:
        return np.zeros(0)
    offsets = np.arange(-pot.past_window, pot.future_window + 1)
    total = np.zeros(count)
    for k in range(n):
        total += pot.evaluate(cycles[:, (k + offsets) % n])
    return total


# -- variation ----------------------------------------------------------------

def _spread_by_key(keys: np.ndarray, values: np.ndarray) -> float:
    if keys.shape[1] == 0:
        return float(values.max() - values.min()) if len(values) else 0.0
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    hi = np.full(inverse.max() + 1, -np.inf)
    lo = np.full(inverse.max() + 1, np.inf)
    np.maximum.at(hi, inverse, values)
    np.minimum.at(lo, inverse, values)
    return float(np.max(hi - lo))


def variation(pot: LocallyConstantPotential, n: int) -> float:
    """Sup of |phi(x) - phi(y)| over x, y agreeing on coordinates -n..n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    a, b = pot.past_window, pot.future_window
    lo, hi = max(-n, -a), min(n, b)
    keys = pot.windows[:, lo + a:hi + a + 1]
    return _spread_by_key(keys, pot.values)


def suffix_variation(windows: np.ndarray, values: np.ndarray, k: int) -> float:
    """One-sided variation: spread of values over windows sharing their last k letters."""
    k = min(k, windows.shape[1])
    return _spread_by_key(windows[:, windows.shape[1] - k:], values)


# -- past reduction -----------------------------------------------------------

@dataclass(frozen=True)
class SinaiReduction:
    """``past = phi + A - A o f^-1`` with ``past`` depending only on coordinates <= 0."""

    past_potential: LocallyConstantPotential
    transfer: LocallyConstantPotential
    anchors: dict[int, tuple[int, ...]]

    @property
    def transfer_sup(self) -> float:
        return self.transfer.sup_norm


def lex_anchors(graph: ShiftGraph, length: int) -> dict[int, tuple[int, ...]]:
    """Lexicographically smallest admissible word of ``length`` letters from each symbol."""
    out = {}
    for s in range(graph.size):
        word = [s]
        while len(word) < length:
            word.append(int(graph.successors(word[-1])[0]))
        out[s] = tuple(word)
    return out


def sinai_reduce(pot: LocallyConstantPotential,
                 anchors: Mapping[int, Sequence[int]] | None = None) -> SinaiReduction:
    """Cohomologous past-only potential via anchored future continuations.

    ``anchors[s]`` is an admissible word starting at ``s`` with at least
    ``future_window + 1`` letters (only the first ``future_window + 1`` are
    used).  Default: :func:`lex_anchors`.
    """
    g = pot.graph
    a, b = pot.past_window, pot.future_window
    if anchors is None:
        anchors = lex_anchors(g, b + 1)
    fixed: dict[int, tuple[int, ...]] = {}
    for s in range(g.size):
        if s not in anchors:
            raise BadAnchor(f"no anchor for symbol {g.symbols[s]!r}")
        word = tuple(int(x) for x in anchors[s])
        if len(word) < b + 1 or word[0] != s or not is_admissible(g, word):
            raise BadAnchor(
                f"anchor for {g.symbols[s]!r} must be an admissible word starting "
                f"there with at least {b + 1} letters"
            )
        fixed[s] = word[:b + 1]

    if b == 0:
        zero = LocallyConstantPotential.constant(g, 0.0)
        return SinaiReduction(pot, zero, fixed)

    # transfer A on coordinates -(a+b-1)..b; array index j <-> coordinate j-(a+b-1)
    pa = a + b - 1
    a_words = admissible_words(g, pa + b + 1)
    a_vals = {}
    for w in a_words:
        x = [int(v) for v in w]
        origin = pa
        star = x[:origin + 1] + list(fixed[x[origin]][1:])
        total = 0.0
        for k in range(b):
            lo, hi = origin - k - a, origin - k + b + 1
            total += pot(star[lo:hi]) - pot(x[lo:hi])
        a_vals[tuple(x)] = total
    transfer = LocallyConstantPotential(g, pa, b, a_vals)

    # past potential on coordinates -(a+b)..0, extended to the future by the anchor
    m = a + b
    p_vals = {}
    for u in admissible_words(g, m + 1):
        ext = [int(v) for v in u] + list(fixed[int(u[-1])][1:])
        origin = m
        val = (pot(ext[origin - a:origin + b + 1])
               + transfer(ext[origin - pa:origin + b + 1])
               - transfer(ext[origin - 1 - pa:origin + b]))
        p_vals[tuple(int(v) for v in u)] = val
    past = LocallyConstantPotential(g, m, 0, p_vals)
    return SinaiReduction(past, transfer, fixed)


def cohomology_residual(red: SinaiReduction, pot: LocallyConstantPotential) -> float:
    """Max pointwise |past - (phi + A - A o f^-1)| over all determining words.

    Every admissible word on coordinates -(a+b+1)..b is checked, so this also
    certifies that the past potential ignores the future.
    """
    a, b = pot.past_window, pot.future_window
    past, tr = red.past_potential, red.transfer
    lo = max(past.past_window, a, tr.past_window + 1)
    hi = max(b, tr.future_window)
    words = admissible_words(pot.graph, lo + hi + 1)
    if len(words) == 0:
        return 0.0
    o = lo

    def cols(p, shift=0):
        return words[:, o + shift - p.past_window:o + shift + p.future_window + 1]

    lhs = past.evaluate(cols(past))
    rhs = pot.evaluate(cols(pot)) + tr.evaluate(cols(tr)) - tr.evaluate(cols(tr, -1))
    return float(np.max(np.abs(lhs - rhs)))


def periodic_cohomology_residual(red: SinaiReduction, pot: LocallyConstantPotential,
                                 max_length: int = 8) -> float:
    """Max |full-period Birkhoff sum of phi minus that of the past potential|."""
    worst = 0.0
    g = pot.graph
    for n in range(1, max_length + 1):
        for base in range(g.size):
            cycles = cycle_array(g, base, n)
            if len(cycles):
                diff = periodic_sums(pot, cycles) - periodic_sums(red.past_potential, cycles)
                worst = max(worst, float(np.max(np.abs(diff))))
    return worst
