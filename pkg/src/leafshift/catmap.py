"""A linear hyperbolic toral automorphism with a hand-coded Markov partition.

Geometry is done in eigencoordinates ``(alpha, beta) = (p . u, p . s)`` where
u and s are the unit unstable and stable eigenvectors.  The map multiplies
alpha by lambda and beta by 1/lambda, so unstable arclength is just alpha
length.  Rectangles are axis-parallel boxes in these coordinates, placed on
the torus by integer translates.

The geometric potential ``-t log Jac(f|E^u) = -t log lambda`` is constant,
so its pressure is ``(1 - t) log lambda`` and its leaf measures at t = 1
should be normalized arclength.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import PartitionInvalid, SegmentMismatch
from .leaf import LeafFamily, _expand
from .potentials import LocallyConstantPotential
from .ruelle import ComponentModel, build_component_model
from .shift_core import ShiftGraph, build_graph, is_irreducible

DEFAULT_MATRIX = ((2, 1), (1, 1))
TOL = 1e-9
_SEARCH = range(-3, 4)


@dataclass(frozen=True)
class Rectangle:
    """Box ``[alpha0, alpha0 + width] x [beta0, beta0 + height]`` in eigencoordinates."""

    name: str
    alpha0: float
    beta0: float
    width: float
    height: float

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Crossing:
    """The image of rectangle ``src`` crosses ``dst + translation`` fully."""

    src: int
    dst: int
    translation: tuple[int, int]


@dataclass(frozen=True, eq=False)
class LinearToralModel:
    matrix: np.ndarray
    lam: float
    unstable: np.ndarray
    stable: np.ndarray
    rectangles: tuple[Rectangle, ...]
    crossings: tuple[Crossing, ...]
    graph: ShiftGraph
    basis_inv: np.ndarray = field(repr=False)

    def eig(self, p) -> np.ndarray:
        """Eigencoordinates of planar points (last axis of length 2)."""
        return np.asarray(p, dtype=float) @ self.basis_inv.T

    def point(self, alpha: float, beta: float) -> np.ndarray:
        return alpha * self.unstable + beta * self.stable

    def translation(self, i: int, j: int) -> tuple[int, int]:
        for c in self.crossings:
            if c.src == i and c.dst == j:
                return c.translation
        raise KeyError((i, j))

    def locate(self, p) -> list[tuple[int, tuple[int, int]]]:
        """Rectangles (and lattice translates) whose interior contains torus point p."""
        out = []
        e = self.eig(p)
        for z in itertools.product(_SEARCH, repeat=2):
            a, b = e - self.eig(np.array(z, float))
            for k, r in enumerate(self.rectangles):
                if r.alpha0 < a < r.alpha0 + r.width and r.beta0 < b < r.beta0 + r.height:
                    out.append((k, z))
        return out


@dataclass(frozen=True)
class UnstableSegment:
    """Segment ``anchor + x u`` for ``0 <= x <= length`` on the torus."""

    anchor: tuple[float, float]
    direction: tuple[float, float]
    length: float


def _frame(matrix: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eig(matrix.astype(float))
    if np.iscomplexobj(vals) and np.any(np.abs(vals.imag) > 0):
        raise PartitionInvalid("matrix is not hyperbolic")
    vals = vals.real
    k = int(np.argmax(np.abs(vals)))
    lam = float(vals[k])
    if not abs(lam) > 1 > abs(vals[1 - k]):
        raise PartitionInvalid("matrix is not hyperbolic")
    u = vecs[:, k].real / np.linalg.norm(vecs[:, k].real)
    s = vecs[:, 1 - k].real / np.linalg.norm(vecs[:, 1 - k].real)
    # orient so that the default frame is u ~ (phi, 1), s ~ (-1, phi)
    if u[0] < 0:
        u = -u
    if s[1] < 0:
        s = -s
    return lam, u, s


def default_partition() -> tuple[Rectangle, ...]:
    """Five rectangles for ``[[2, 1], [1, 1]]``.

    Two boxes of widths a and b (a, b the components of the unit unstable
    vector) tile the torus; cutting the big one at multiples of a/lambda and
    the small one at a/lambda makes every image crossing full.
    """
    phi = (1 + math.sqrt(5)) / 2
    nrm = math.sqrt(1 + phi * phi)
    a, b, lam = phi / nrm, 1 / nrm, phi * phi
    return (
        Rectangle("B1", 0.0, 0.0, a / lam, a),
        Rectangle("B2", a / lam, 0.0, a / lam, a),
        Rectangle("B3", 2 * a / lam, 0.0, b / lam, a),
        Rectangle("S1", a, a - b, a / lam, b),
        Rectangle("S2", a + a / lam, a - b, b / lam, b),
    )


def _overlap(lo1, hi1, lo2, hi2):
    return max(lo1, lo2), min(hi1, hi2)


def validate_partition(matrix, rectangles) -> tuple[float, np.ndarray, np.ndarray, tuple[Crossing, ...]]:
    """Check the Markov crossing property and return the frame and crossings.

    Raises PartitionInvalid if the area is not 1, interiors overlap, or some
    image meets a rectangle without crossing it fully in both directions.
    """
    m = np.asarray(matrix, dtype=np.int64)
    if m.shape != (2, 2) or abs(round(np.linalg.det(m))) != 1:
        raise PartitionInvalid("matrix must be a 2x2 integer matrix with |det| = 1")
    if abs(np.trace(m)) <= 2:
        raise PartitionInvalid("matrix must have |trace| > 2")
    lam, u, s = _frame(m)
    basis_inv = np.linalg.inv(np.column_stack([u, s]))
    area = sum(r.area for r in rectangles)
    if abs(area - 1.0) > TOL:
        raise PartitionInvalid(f"rectangles have total area {area!r}, expected 1")
    zs = {z: basis_inv @ np.array(z, float) for z in itertools.product(_SEARCH, repeat=2)}
    for (i, r), (j, q) in itertools.combinations_with_replacement(enumerate(rectangles), 2):
        for z, (za, zb) in zs.items():
            if i == j and z == (0, 0):
                continue
            a_lo, a_hi = _overlap(r.alpha0, r.alpha0 + r.width, q.alpha0 + za, q.alpha0 + za + q.width)
            b_lo, b_hi = _overlap(r.beta0, r.beta0 + r.height, q.beta0 + zb, q.beta0 + zb + q.height)
            if a_hi - a_lo > TOL and b_hi - b_lo > TOL:
                raise PartitionInvalid(f"{r.name} overlaps a translate of {q.name}")
    crossings = []
    for i, r in enumerate(rectangles):
        ia, ib = lam * r.alpha0, r.beta0 / lam
        iw, ih = lam * r.width, r.height / lam
        for j, q in enumerate(rectangles):
            for z, (za, zb) in zs.items():
                a_lo, a_hi = _overlap(ia, ia + iw, q.alpha0 + za, q.alpha0 + za + q.width)
                b_lo, b_hi = _overlap(ib, ib + ih, q.beta0 + zb, q.beta0 + zb + q.height)
                if a_hi - a_lo > TOL and b_hi - b_lo > TOL:
                    if abs((a_hi - a_lo) - q.width) > TOL or abs((b_hi - b_lo) - ih) > TOL:
                        raise PartitionInvalid(
                            f"image of {r.name} does not cross {q.name} fully"
                        )
                    if any(c.src == i and c.dst == j for c in crossings):
                        raise PartitionInvalid(f"image of {r.name} crosses {q.name} twice")
                    crossings.append(Crossing(i, j, z))
    return lam, u, s, tuple(crossings)


def load_model(matrix=DEFAULT_MATRIX, rectangles=None) -> LinearToralModel:
    """Validated model; the default partition is used for the default matrix."""
    m = np.asarray(matrix, dtype=np.int64)
    if rectangles is None:
        if not np.array_equal(m, np.asarray(DEFAULT_MATRIX)):
            raise PartitionInvalid("no built-in partition for this matrix")
        rectangles = default_partition()
    lam, u, s, crossings = validate_partition(m, rectangles)
    names = [r.name for r in rectangles]
    g = build_graph(names, [(names[c.src], names[c.dst]) for c in crossings])
    if not is_irreducible(g, range(g.size)):
        raise PartitionInvalid("induced symbolic model is not irreducible")
    m.setflags(write=False)
    basis_inv = np.linalg.inv(np.column_stack([u, s]))
    return LinearToralModel(m, abs(lam), u, s, tuple(rectangles), crossings, g, basis_inv)


def geometric_potential(model: LinearToralModel, t: float) -> LocallyConstantPotential:
    """``-t log lambda`` on every symbol."""
    return LocallyConstantPotential.constant(model.graph, -t * math.log(model.lam))


def build_catmap_model(t: float = 1.0, matrix=DEFAULT_MATRIX):
    """(model, potential, component model) for the scaled geometric potential."""
    if not 0.0 <= t <= 2.0:
        raise ValueError("t must lie in [0, 2]")
    model = load_model(matrix)
    pot = geometric_potential(model, t)
    return model, pot, build_component_model(pot)


# -- unstable arclength ------------------------------------------------------


def crossing_segment(model: LinearToralModel, symbol: int, offset: float | None = None) -> UnstableSegment:
    """Full unstable crossing of a rectangle at a generic stable height."""
    r = model.rectangles[symbol]
    if offset is None:
        offset = r.height * (math.sqrt(2.0) - 1.0)
    p = model.point(r.alpha0, r.beta0 + offset) % 1.0
    return UnstableSegment(tuple(p), tuple(model.unstable), r.width)


def _z_eig(model):
    zs = np.array(list(itertools.product(_SEARCH, repeat=2)), float)
    return zs, model.eig(zs)


def _enter(model, zinfo, start: np.ndarray, length: float, j: int):
    """Part of the segment ``start + [0, length] u`` inside a translate of rectangle j.

    Returns (new start, new length) or None.
    """
    _, ze = zinfo
    r = model.rectangles[j]
    a, b = model.eig(start)
    za, zb = ze[:, 0], ze[:, 1]
    inside = (r.beta0 + zb - TOL <= b) & (b <= r.beta0 + zb + r.height + TOL)
    lo = np.maximum(a, r.alpha0 + za)
    span = np.where(inside, np.minimum(a + length, r.alpha0 + za + r.width) - lo, -np.inf)
    k = int(np.argmax(span))
    if not span[k] > TOL:
        return None
    return start + (lo[k] - a) * model.unstable, float(span[k])


def _locate_segment(model, seg: UnstableSegment, symbol: int, zinfo):
    r = model.rectangles[symbol]
    if abs(seg.length - r.width) > TOL:
        raise SegmentMismatch(f"segment length {seg.length} is not the width of {r.name}")
    if abs(abs(float(np.dot(seg.direction, model.unstable))) - 1) > TOL:
        raise SegmentMismatch("segment is not along the unstable direction")
    hit = _enter(model, zinfo, np.asarray(seg.anchor, float), seg.length, symbol)
    if hit is None or abs(hit[1] - r.width) > TOL:
        raise SegmentMismatch(f"segment does not cross {r.name} fully")
    return hit


def unstable_cylinder_arclength(model: LinearToralModel, segment: UnstableSegment, w) -> float:
    """Arclength of the points of ``segment`` whose forward itinerary follows w.

    The sub-segment is pushed forward by the linear map (length times
    lambda), intersected with the next rectangle, and the surviving length
    is pulled back by ``lambda^-n``.
    """
    w = [int(x) for x in w]
    zinfo = _z_eig(model)
    start, length = _locate_segment(model, segment, w[0], zinfo)
    for j in w[1:]:
        start = (model.matrix @ start) % 1.0
        hit = _enter(model, zinfo, start, model.lam * length, j)
        if hit is None:
            return 0.0
        start, length = hit
    return length / model.lam ** (len(w) - 1)


def arclength_table(model: LinearToralModel, symbol: int, depth: int,
                    segment: UnstableSegment | None = None) -> dict[tuple[int, ...], float]:
    """Arclengths of every itinerary cylinder of length 1..depth on a crossing segment."""
    if segment is None:
        segment = crossing_segment(model, symbol)
    zinfo = _z_eig(model)
    start, length = _locate_segment(model, segment, symbol, zinfo)
    out = {}
    succ = [model.graph.successors(i) for i in range(model.graph.size)]

    def walk(word, start, length, scale):
        out[word] = length / scale
        if len(word) == depth:
            return
        img = (model.matrix @ start) % 1.0
        for j in succ[word[-1]]:
            hit = _enter(model, zinfo, img, model.lam * length, int(j))
            if hit is not None:
                walk(word + (int(j),), hit[0], hit[1], scale * model.lam)

    walk((symbol,), start, length, 1.0)
    return out


def srb_comparison(model: LinearToralModel, comp: ComponentModel, depth: int = 10) -> float:
    """Max ``|p_R([w]) / (arclength([w]) / arclength([w_0])) - 1|`` over words to depth.

    One crossing segment per rectangle; leaf masses come from the spectral
    data of the symbolic model, arclengths from the affine geometry.
    """
    fam = LeafFamily.from_model(comp)
    rec = comp.model
    worst = 0.0
    for sym in range(model.graph.size):
        geo = arclength_table(model, sym, depth)
        total = geo[(sym,)]
        b = rec.block_of((sym,))
        start = (np.array([b]), np.array([[sym]], dtype=np.intp), np.zeros(1))
        seen = 0
        for _, words, lm in _expand(fam, *start, depth - 1):
            for row, v in zip(words, lm):
                key = tuple(int(x) for x in row)
                ref = geo.get(key, 0.0) / total
                worst = max(worst, abs(math.exp(v) / ref - 1.0) if ref > 0 else math.inf)
                seen += 1
        if seen != len(geo):
            raise PartitionInvalid("symbolic and geometric cylinders disagree")
    return worst


# -- periodic points -----------------------------------------------------------


def fixed_point_count(matrix, n: int) -> int:
    """``#Fix(f^n) = |det(M^n - I)|``, exact in integers."""
    m = np.array(matrix, dtype=object)
    p = np.array([[1, 0], [0, 1]], dtype=object)
    for _ in range(n):
        p = p.dot(m)
    a = p - np.array([[1, 0], [0, 1]], dtype=object)
    return abs(int(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]))


def coded_periodic_points(model: LinearToralModel, n: int) -> tuple[int, int]:
    """(number of period-n cycles, number of distinct torus points they code).

    A cycle with crossing translations z_k codes the point
    ``x_0 = (M^n - I)^{-1} sum_k M^{n-1-k} z_k`` (mod 1); points are compared
    exactly as integer vectors ``adj(M^n - I) Z`` modulo ``det(M^n - I)``.
    Boundary points are coded by several cycles, hence the dedup.
    """
    g = model.graph
    indptr, indices = g.csr()
    tr = np.zeros((len(indices), 2), dtype=np.int64)
    for i in range(g.size):
        for e in range(indptr[i], indptr[i + 1]):
            tr[e] = model.translation(i, int(indices[e]))
    sums = kernels.cycle_translation_sums(indptr, indices, tr, model.matrix.tolist(), n)
    mn = np.linalg.matrix_power(model.matrix, n) - np.eye(2, dtype=np.int64)
    d = int(mn[0, 0] * mn[1, 1] - mn[0, 1] * mn[1, 0])
    adj = np.array([[mn[1, 1], -mn[0, 1]], [-mn[1, 0], mn[0, 0]]], dtype=np.int64)
    keys = (sums @ adj.T) * (1 if d > 0 else -1) % abs(d)
    return len(sums), len(np.unique(keys, axis=0))


@dataclass(frozen=True)
class DivergenceReport:
    counts: list[int]
    coded_counts: list[int]
    cycle_counts: list[int]
    terms: list[float]
    partial_sums: list[float]
    slope: float
    fit_range: tuple[int, int]


def periodic_sum_divergence(model: LinearToralModel, nmax: int = 15,
                            check_upto: int = 12, fit_from: int = 5) -> DivergenceReport:
    """Partial sums of ``#Fix(f^n) e^{-n log lambda}`` at t = 1 (P = 0).

    Counts for n <= ``check_upto`` are cross-checked against the coded
    periodic points of the symbolic model.
    """
    counts = [fixed_point_count(model.matrix, n) for n in range(1, nmax + 1)]
    coded, cycles = [], []
    for n in range(1, min(nmax, check_upto) + 1):
        c, k = coded_periodic_points(model, n)
        cycles.append(c)
        coded.append(k)
    terms = [c / model.lam**n for n, c in enumerate(counts, start=1)]
    partial = np.cumsum(terms)
    ns = np.arange(1, nmax + 1)
    sel = ns >= fit_from
    slope = float(np.polyfit(ns[sel], partial[sel], 1)[0])
    return DivergenceReport(counts, coded, cycles, [float(t) for t in terms],
                            [float(x) for x in partial], slope, (fit_from, nmax))


def coding_multiplicity(model: LinearToralModel, samples: int = 64) -> int:
    """Largest number of rectangle interiors containing a sample point.

    Sampled on a shifted grid avoiding the (measure-zero) boundaries; 1 for
    a genuine partition.
    """
    k = 0
    offs = (math.sqrt(2) - 1, math.sqrt(3) - 1)
    for i in range(samples):
        for j in range(samples):
            p = np.array([(i + offs[0]) / samples, (j + offs[1]) / samples])
            hits = len(model.locate(p))
            if hits == 0:
                raise PartitionInvalid(f"point {p} lies in no rectangle")
            k = max(k, hits)
    return k
