"""Leaf measures on future cylinders and the equilibrium state they assemble.

A stem is a finite past word standing for every left-infinite chain that
ends in it; after past reduction and block recoding the leaf measure of a
chain depends only on its last block.  For a stem R and a future word
``w`` with ``w_0 = R_0``

    p_R([w]) = prod exp(phi~) along w,      mu_R([w]) = psi(R) * p_R([w]),

where ``phi~ = phi + log psi - log psi o shift - P`` is the normalized
potential.  Integrating ``mu_R`` against the conformal measure p gives the
equilibrium state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import StemMismatch, TooManyCylinders, WordMismatch
from .potentials import HolderData, fit_holder, suffix_variation
from .ruelle import ComponentModel, normalized_potential
from .shift_core import admissible_words, is_admissible

MAX_CYLINDERS = 10**7
DEFAULT_DEPTH = 12


@dataclass(frozen=True)
class Stem:
    """Admissible past word; component-local symbol ids."""

    letters: tuple[int, ...]

    @property
    def last(self) -> int:
        return self.letters[-1]

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True, eq=False)
class LeafFamily:
    """Leaf measures of one component, driven by a harmonic vector ``psi``.

    Normally ``psi`` is the Perron vector; tests inject defective ones.
    """

    model: ComponentModel
    psi: np.ndarray
    log_q: np.ndarray

    @classmethod
    def from_model(cls, model: ComponentModel, psi: np.ndarray | None = None) -> "LeafFamily":
        if psi is None:
            log_q = normalized_potential(model.model, model.spectral)
            psi = model.spectral.psi
        else:
            psi = np.asarray(psi, dtype=float)
            log_psi = np.log(psi)
            lw = model.model.log_weights
            with np.errstate(invalid="ignore"):
                log_q = lw + log_psi[None, :] - log_psi[:, None] - model.pressure
            log_q[~np.isfinite(lw)] = -np.inf
        return cls(model, psi, log_q)

    @property
    def pressure(self) -> float:
        return self.model.pressure

    @property
    def kernel(self) -> np.ndarray:
        return np.exp(self.log_q)

    @property
    def stationary(self) -> np.ndarray:
        """``p * psi``: stationary vector of the kernel over blocks."""
        return self.model.spectral.p * self.model.spectral.psi

    def block(self, stem: Stem) -> int:
        rec = self.model.model
        if len(stem) < rec.block_length:
            raise StemMismatch(
                f"stem needs at least {rec.block_length} letters, got {len(stem)}"
            )
        if not is_admissible(self.model.graph, stem.letters):
            raise StemMismatch(f"stem {stem.letters!r} is not admissible")
        return rec.block_of(stem.letters)


@dataclass(frozen=True)
class LeafMeasure:
    """Masses of future words extending a stem, to a fixed depth."""

    stem: Stem
    masses: dict[tuple[int, ...], float]
    total: float

    def consistency_residual(self) -> float:
        """Max |mass(w) - sum of masses of its one-letter extensions|."""
        depth = max(len(w) for w in self.masses)
        children: dict[tuple[int, ...], float] = {}
        for w, m in self.masses.items():
            if 1 < len(w):
                children[w[:-1]] = children.get(w[:-1], 0.0) + m
        worst = 0.0
        for w, m in self.masses.items():
            if len(w) < depth:
                worst = max(worst, abs(m - children.get(w, 0.0)))
        return worst


@dataclass(frozen=True, eq=False)
class CylinderMeasureTable:
    """Two-sided cylinder masses keyed by (base index, word).

    Stored for base indices 0 and 1 (the latter through one extra kernel
    step), so shift invariance is checkable on every stored word.
    """

    masses: dict[tuple[int, tuple[int, ...]], float]
    depth: int
    graph_size: int

    def mass(self, word: Sequence[int], base_index: int = 0) -> float:
        return self.masses.get((base_index, tuple(int(x) for x in word)), 0.0)

    def words(self, length: int, base_index: int = 0) -> list[tuple[int, ...]]:
        return [w for (k, w) in self.masses if k == base_index and len(w) == length]

    @property
    def total(self) -> float:
        return float(sum(m for (k, w), m in self.masses.items() if k == 0 and len(w) == 1))

    def shift_invariance_residual(self) -> float:
        worst = 0.0
        for (k, w), m in self.masses.items():
            if k == 0:
                worst = max(worst, abs(m - self.masses.get((1, w), 0.0)))
        return worst


# -- vectorised future expansion ----------------------------------------------


def _expand(family: LeafFamily, blocks: np.ndarray, words: np.ndarray,
            log_mass: np.ndarray, steps: int, limit: int = MAX_CYLINDERS):
    """Yield (blocks, words, log_mass) after 0..steps one-letter extensions."""
    rec = family.model.model
    indptr, indices = rec.graph.csr()
    last = rec.last_letter
    yield blocks, words, log_mass
    stored = len(words)
    for _ in range(steps):
        counts = indptr[blocks + 1] - indptr[blocks]
        parent = np.repeat(np.arange(len(blocks)), counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        nxt = indices[np.repeat(indptr[blocks], counts) + offs].astype(np.intp)
        stored += len(nxt)
        if stored > limit:
            raise TooManyCylinders(f"more than {limit} cylinders requested")
        log_mass = log_mass[parent] + family.log_q[blocks[parent], nxt]
        words = np.column_stack([words[parent], last[nxt]])
        blocks = nxt
        yield blocks, words, log_mass


def leaf_cylinder_mass(family: LeafFamily, stem: Stem, w: Sequence[int]) -> float:
    """``p_R([w])``: product of normalized weights along w (0 if inadmissible)."""
    w = tuple(int(x) for x in w)
    if not w or w[0] != stem.last:
        raise WordMismatch(f"word must start with the stem's last symbol {stem.last}")
    rec = family.model.model
    b = family.block(stem)
    log_m = 0.0
    for letter in w[1:]:
        j = rec.step(b, letter)
        if j < 0:
            return 0.0
        log_m += family.log_q[b, j]
        b = j
    return math.exp(log_m)


def leaf_measure(family: LeafFamily, stem: Stem, depth: int = DEFAULT_DEPTH,
                 limit: int = MAX_CYLINDERS) -> LeafMeasure:
    """All masses ``mu_R([w])`` for future words of length 1..depth."""
    b = family.block(stem)
    psi_r = float(family.psi[b])
    masses = {}
    start = (np.array([b]), np.array([[stem.last]], dtype=np.intp), np.zeros(1))
    for _, words, lm in _expand(family, *start, depth - 1, limit):
        for row, v in zip(words, lm):
            masses[tuple(int(x) for x in row)] = psi_r * math.exp(v)
    return LeafMeasure(stem, masses, psi_r)


def all_stems(family: LeafFamily) -> list[Stem]:
    """One stem per block."""
    return [Stem(tuple(int(x) for x in b)) for b in family.model.model.blocks]


def pushforward_invariance_residual(family: LeafFamily, stem: Stem, depth: int) -> float:
    """Max defect of ``mu_R o shift^-1 = e^{-P} sum_S e^{phi(S)} mu_S`` to depth D.

    Cylinders are the whole fiber (depth 0) and ``[c_0..c_k]`` for
    ``k < depth``; for the latter only the extension ``S = R c_0`` meets the
    cylinder.  Left side uses the stem's own expansion, right side the
    children's, both from the product formula.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rec = family.model.model
    b = family.block(stem)
    lw = rec.log_weights
    P = family.pressure
    succ = np.flatnonzero(np.isfinite(lw[b]))
    rhs0 = float(np.sum(np.exp(lw[b, succ] - P) * family.psi[succ]))
    worst = abs(family.psi[b] - rhs0)
    lhs = leaf_measure(family, stem, depth + 1)
    for c in succ:
        child = Stem(stem.letters + (int(rec.last_letter[c]),))
        factor = math.exp(lw[b, c] - P)
        rhs = leaf_measure(family, child, depth)
        for w, m in rhs.masses.items():
            left = lhs.masses.get((stem.last,) + w, 0.0)
            worst = max(worst, abs(left - factor * m))
    return float(worst)


def normalized_holder(family: LeafFamily, ratio: float = 0.5) -> HolderData:
    """(C, gamma) with one-sided variations of phi~ bounded by ``C gamma^k``."""
    rec = family.model.model
    src, dst = np.nonzero(np.isfinite(family.log_q))
    windows = np.column_stack([rec.blocks[src], rec.last_letter[dst]])
    vals = family.log_q[src, dst]
    var = {k: suffix_variation(windows, vals, k) for k in range(1, windows.shape[1] + 1)}
    return fit_holder(var, ratio)


def _agreement(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            break
        n += 1
    return n


def holonomy_ratio_check(family: LeafFamily, stem: Stem, other: Stem, depth: int,
                         holder: HolderData | None = None) -> tuple[float, float]:
    """(max over w of max(r, 1/r), certified bound) with ``r = p_other([w]) / p_stem([w])``.

    The bound is ``exp(C gamma^n / (1 - gamma))`` with n the number of
    trailing letters the stems share, padded by the rounding error of the
    computed ratios.
    """
    if stem.last != other.last:
        raise StemMismatch("stems must end in the same symbol")
    if holder is None:
        holder = normalized_holder(family)
    a = leaf_measure(family, stem, depth)
    b = leaf_measure(family, other, depth)
    worst = 1.0
    for w, m in a.masses.items():
        ra = m / a.total
        rb = b.masses[w] / b.total
        if ra == 0.0 and rb == 0.0:
            continue
        r = rb / ra
        worst = max(worst, r, 1.0 / r)
    n = _agreement(stem.letters, other.letters)
    # each ratio is a product of 2 * depth rounded factors
    rounding = 4 * (depth + 1) * np.finfo(float).eps
    bound = math.exp(holder.tail(n) + rounding)
    return float(worst), float(bound)


# -- equilibrium ---------------------------------------------------------------


def _aggregate(words: np.ndarray, mass: np.ndarray):
    uniq, inv = np.unique(words, axis=0, return_inverse=True)
    return uniq, np.bincount(inv.ravel(), weights=mass, minlength=len(uniq))


def assemble_equilibrium(family: LeafFamily, depth: int = DEFAULT_DEPTH,
                         limit: int = MAX_CYLINDERS) -> CylinderMeasureTable:
    """``nu([w]_0) = sum over stems B ending in w_0 of p(B) psi(B) p_B([w])``.

    Cylinders at base index 1 are computed independently by first taking
    one kernel step from every stem.
    """
    rec = family.model.model
    nb = rec.size
    blocks = np.arange(nb)
    weight = np.log(family.stationary)
    masses: dict[tuple[int, tuple[int, ...]], float] = {}
    routes = [
        (0, blocks, weight),
    ]
    src, dst = np.nonzero(np.isfinite(family.log_q))
    routes.append((1, dst, weight[src] + family.log_q[src, dst]))
    for k, b0, lm0 in routes:
        words0 = rec.last_letter[b0][:, None].astype(np.intp)
        for _, words, lm in _expand(family, b0, words0, lm0, depth - 1, limit):
            uniq, tot = _aggregate(words, np.exp(lm))
            for row, v in zip(uniq, tot):
                masses[(k, tuple(int(x) for x in row))] = float(v)
    return CylinderMeasureTable(masses, depth, family.model.graph.size)


def markov_oracle_masses(kernel: np.ndarray, stationary: np.ndarray,
                         blocks: np.ndarray, depth: int) -> dict[tuple[int, ...], float]:
    """Independent cylinder masses of a stationary block chain by brute recursion."""
    last = blocks[:, -1]
    out: dict[tuple[int, ...], float] = {}

    def walk(b, word, m):
        out[word] = out.get(word, 0.0) + m
        if len(word) == depth:
            return
        for c in np.flatnonzero(kernel[b] > 0):
            walk(c, word + (int(last[c]),), m * kernel[b, c])

    for b in range(len(blocks)):
        walk(b, (int(last[b]),), float(stationary[b]))
    return out


@dataclass(frozen=True)
class GibbsReport:
    worst_ratio: float
    constant: float
    spread: float
    spread_bound: float
    passed: bool


def gibbs_bound_check(table: CylinderMeasureTable, family: LeafFamily,
                      depth: int | None = None) -> GibbsReport:
    """Two-sided Gibbs bound on every stored cylinder of length m..depth.

    For a cylinder W whose first m letters form the block B_0,
    ``r(W) = nu([W]) / exp(S(W) - (n - m) P)`` with S the sum of the reduced
    potential over the windows inside W.  Then ``r / p(B_0)`` must lie in
    ``[1/C, C]``, C the largest of psi and 1/psi over blocks ending in W's
    last symbol, and its spread over all cylinders is at most
    ``C_max^2 e^{2 |A|}``.
    """
    model = family.model
    rec = model.model
    m = rec.block_length
    depth = table.depth if depth is None else min(depth, table.depth)
    psi = family.psi
    p = model.spectral.p
    last = rec.last_letter
    c_sym = np.ones(model.graph.size)
    for s in range(model.graph.size):
        sel = psi[last == s]
        if len(sel):
            c_sym[s] = max(sel.max(), 1.0 / sel.min())
    c_max = float(c_sym.max())
    worst = 1.0
    lo, hi = math.inf, 0.0
    ok = True
    for n in range(max(m, 1), depth + 1):
        for w in table.words(n):
            b = rec.block_index[w[:m]]
            s = 0.0
            for j in range(m, n):
                c = rec.block_index[w[j - m + 1:j + 1]]
                s += rec.log_weights[b, c]
                b = c
            r = table.mass(w) / math.exp(s - (n - m) * model.pressure)
            q = r / p[rec.block_index[w[:m]]]
            C = c_sym[w[-1]]
            worst = max(worst, q, 1.0 / q)
            ok &= (1.0 / C) * (1 - 1e-9) <= q <= C * (1 + 1e-9)
            lo, hi = min(lo, q), max(hi, q)
    spread = hi / lo if hi > 0 else 1.0
    bound = c_max**2 * math.exp(2 * model.reduction.transfer_sup)
    ok &= spread <= bound * (1 + 1e-9)
    return GibbsReport(float(worst), c_max, float(spread), float(bound), bool(ok))


def entropy_pressure_identity(table: CylinderMeasureTable, family: LeafFamily) -> dict:
    """``h + integral of phi - P`` for the assembled state.

    Entropy from the block kernel; the integral of the original potential
    from the table's masses on its determining windows.
    """
    pi = family.stationary
    q = family.kernel
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0)
    h = float(-np.sum(pi[:, None] * terms))
    pot = family.model.potential
    L = pot.window_length
    if L > table.depth:
        raise ValueError(f"table depth {table.depth} below potential window {L}")
    windows = admissible_words(family.model.graph, L)
    masses = np.array([table.mass(w) for w in windows])
    integral = float(masses @ pot.evaluate(windows))
    return {
        "entropy": h,
        "integral": integral,
        "pressure": family.pressure,
        "residual": abs(h + integral - family.pressure),
    }


def uniqueness_residual(family: LeafFamily, table: CylinderMeasureTable, stem: Stem,
                        depth: int) -> float:
    """Compare ``mu_R([w])`` with ``nu([R w]) / p(R)`` read off the table.

    The two-sided state determines the leaf family up to the conformal
    weights, so any invariant family from the same spectral data matches.
    """
    rec = family.model.model
    m = rec.block_length
    tail = stem.letters[len(stem) - m:]
    b = family.block(stem)
    p_b = family.model.spectral.p[b]
    need = m + depth - 1
    if need > table.depth:
        raise ValueError(f"table depth {table.depth} below {need}")
    leaf = leaf_measure(family, stem, depth)
    worst = 0.0
    for w, mass in leaf.masses.items():
        joint = table.mass(tail + w[1:])
        worst = max(worst, abs(mass - joint / p_b))
    return worst
