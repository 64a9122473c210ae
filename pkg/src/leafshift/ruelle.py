"""Transfer operator data after higher-block recoding.

Once a potential depends only on the past letters ``x_{-m}..x_0`` it becomes
a function on edges of the graph of m-blocks.  On the one-sided shift of
left-infinite chains the transfer operator sums over one-letter right
extensions of a chain, which is the weighted adjacency matrix
``W[B, C] = exp(phi(B -> C))`` acting on column vectors; harmonic functions
are right Perron vectors and conformal measures are left Perron vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import BadAnchor, NoConvergence, NotIrreducible
from .potentials import (
    LocallyConstantPotential,
    SinaiReduction,
    sinai_reduce,
    suffix_variation,
)
from .shift_core import ShiftGraph, admissible_words, maximal_irreducible_components

RESIDUAL_TOL = 1e-13
MAX_ITER = 10**6
DENSE_CROSSCHECK_LIMIT = 64


@dataclass(frozen=True, eq=False)
class RecodedModel:
    """Block shift with a depth-one potential on its edges."""

    base_graph: ShiftGraph
    potential: LocallyConstantPotential
    block_length: int
    blocks: np.ndarray
    graph: ShiftGraph
    log_weights: np.ndarray
    block_index: dict[tuple[int, ...], int] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def last_letter(self) -> np.ndarray:
        return self.blocks[:, -1]

    def block_of(self, letters: Sequence[int]) -> int:
        """Block of the last ``block_length`` letters of an admissible word."""
        key = tuple(int(x) for x in letters[len(letters) - self.block_length:])
        if len(key) < self.block_length or key not in self.block_index:
            raise KeyError(f"no block for {key!r}")
        return self.block_index[key]

    def step(self, block: int, letter: int) -> int:
        """Block reached by appending ``letter``; -1 if inadmissible."""
        key = tuple(int(x) for x in self.blocks[block][1:]) + (int(letter),)
        j = self.block_index.get(key, -1)
        if j < 0 or not np.isfinite(self.log_weights[block, j]):
            return -1
        return j


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Perron data of one irreducible block model.

    ``p`` is a probability vector and ``psi`` is scaled so that ``p @ psi == 1``.
    """

    pressure: float
    psi: np.ndarray
    p: np.ndarray
    residual: float
    crosscheck: float | None
    iterations: int
    recurrence: str = "PositiveRecurrent"

    @property
    def eigenvalue(self) -> float:
        return float(np.exp(self.pressure))


def recode_depth_one(g: ShiftGraph, past: LocallyConstantPotential) -> RecodedModel:
    """Higher-block presentation making a past-only potential depth one."""
    if past.future_window != 0:
        raise ValueError("recoding needs a past-only potential (future_window == 0)")
    if past.graph is not g:
        raise ValueError("potential belongs to a different graph")
    m = max(past.past_window, 1)
    blocks = admissible_words(g, m)
    index = {tuple(int(x) for x in b): k for k, b in enumerate(blocks)}
    nb = len(blocks)
    log_w = np.full((nb, nb), -np.inf)
    windows = admissible_words(g, m + 1)
    vals = past.evaluate(windows[:, m - past.past_window:])
    src = [index[tuple(int(x) for x in w[:m])] for w in windows]
    dst = [index[tuple(int(x) for x in w[1:])] for w in windows]
    log_w[src, dst] = vals
    names = tuple(g.format_word(b) for b in blocks)
    adj = np.isfinite(log_w)
    block_graph = ShiftGraph(names, adj, {s: k for k, s in enumerate(names)})
    return RecodedModel(g, past, m, blocks, block_graph, log_w, index)


def apply_ruelle(model: RecodedModel, h: np.ndarray) -> np.ndarray:
    """``(L h)(R) = sum over one-letter extensions S of R of exp(phi(S)) h(S)``."""
    h = np.asarray(h, dtype=float)
    if h.shape != (model.size,):
        raise ValueError(f"expected a vector of length {model.size}")
    return model.weights @ h


def apply_dual(model: RecodedModel, q: np.ndarray) -> np.ndarray:
    """Dual action on measures over blocks (row vectors)."""
    return np.asarray(q, dtype=float) @ model.weights


def _irreducible(adj: np.ndarray) -> bool:
    n, _ = connected_components(csr_matrix(adj.astype(np.int8)), directed=True,
                                connection="strong")
    return n == 1 and (adj.shape[0] > 1 or bool(adj[0, 0]))


def _residual(w: np.ndarray, x: np.ndarray, lam: float) -> float:
    # componentwise relative: x is positive, and the normalized kernel divides by x
    return float(np.max(np.abs(w @ x - lam * x) / (lam * np.abs(x))))


def _perron_vector(w: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, int]:
    # Power iteration on the lazy matrix (I + W/s)/2, aperiodic with the same
    # Perron vector, then shifted inverse iteration to polish to ``tol``.
    n = w.shape[0]
    s = float(np.max(w.sum(axis=1)))
    a = w / s
    x = np.full(n, 1.0 / n)
    lam = 1.0
    it = 0
    while True:
        y = a @ x
        lam = float(y.sum() / x.sum())
        if _residual(a, x, lam) < 1e-7:
            break
        x = 0.5 * (x + y)
        x /= x.sum()
        it += 1
        if it >= max_iter:
            raise NoConvergence(f"power iteration did not converge in {max_iter} steps")
    eye = np.eye(n)
    for _ in range(60):
        if _residual(a, x, lam) < tol:
            break
        shift = lam * (1.0 + 1e-9)
        try:
            y = np.linalg.solve(shift * eye - a, x)
        except np.linalg.LinAlgError:
            shift = lam * (1.0 + 1e-7)
            y = np.linalg.solve(shift * eye - a, x)
        x = y / y.sum()
        lam = float((a @ x).sum() / x.sum())
        it += 1
    # The solve is accurate relative to the largest entry only; a few lazy
    # power steps restore accuracy in the small entries.
    for _ in range(60):
        if _residual(a, x, lam) < tol:
            break
        x = 0.5 * (x + (a @ x) / lam)
        x /= x.sum()
        lam = float((a @ x).sum() / x.sum())
        it += 1
    res = _residual(a, x, lam)
    if res >= tol:
        raise NoConvergence(f"eigen-residual {res:.3e} above {tol:.1e}")
    return lam * s, x, it


def perron_data(model: RecodedModel, tol: float = RESIDUAL_TOL,
                max_iter: int = MAX_ITER) -> SpectralData:
    """Pressure, harmonic function and conformal measure of an irreducible model."""
    if not _irreducible(np.isfinite(model.log_weights)):
        raise NotIrreducible("block graph is not irreducible")
    shift = float(np.max(model.log_weights[np.isfinite(model.log_weights)]))
    w = np.exp(model.log_weights - shift)
    lam_r, psi, it_r = _perron_vector(w, tol, max_iter)
    lam_l, p, it_l = _perron_vector(w.T.copy(), tol, max_iter)
    p = p / p.sum()
    psi = psi / (p @ psi)
    lam = float(p @ (w @ psi))  # p @ psi == 1
    residual = max(_residual(w, psi, lam), _residual(w.T, p, lam))
    crosscheck = None
    if model.size <= DENSE_CROSSCHECK_LIMIT:
        rho = float(np.max(np.abs(np.linalg.eigvals(w))))
        crosscheck = abs(rho - lam) / lam
    return SpectralData(
        pressure=float(np.log(lam) + shift),
        psi=psi,
        p=p,
        residual=residual,
        crosscheck=crosscheck,
        iterations=it_r + it_l,
    )


def normalized_potential(model: RecodedModel, spectral: SpectralData) -> np.ndarray:
    """Edge table of ``phi + log psi - log psi o shift - P`` (-inf off edges).

    ``exp`` of the result is a row-stochastic transition kernel on blocks.
    """
    log_psi = np.log(spectral.psi)
    with np.errstate(invalid="ignore"):
        out = model.log_weights + log_psi[None, :] - log_psi[:, None] - spectral.pressure
    out[~np.isfinite(model.log_weights)] = -np.inf
    return out


def log_harmonic_regularity(spectral: SpectralData, model: RecodedModel,
                            depth: int | None = None) -> list[float]:
    """``Var_n(log psi)`` for n = 1..depth over chains sharing their last n letters.

    Zero from n = block_length on, since psi is a function of the last block.
    """
    if depth is None:
        depth = model.block_length + 1
    log_psi = np.log(spectral.psi)
    return [suffix_variation(model.blocks, log_psi, n) for n in range(1, depth + 1)]


# -- whole pipeline for one component ---------------------------------------


@dataclass(frozen=True, eq=False)
class ComponentModel:
    """Everything derived from (potential, irreducible component)."""

    component: tuple[int, ...]
    graph: ShiftGraph
    potential: LocallyConstantPotential
    reduction: SinaiReduction
    model: RecodedModel
    spectral: SpectralData
    period: int

    @property
    def pressure(self) -> float:
        return self.spectral.pressure

    def to_local(self, symbol: int) -> int:
        return self.component.index(int(symbol))


def resolve_component(g: ShiftGraph, component=None) -> tuple[tuple[int, ...], int]:
    """Sorted ids and period of the requested irreducible component.

    ``component`` may be None (graph must have exactly one), a symbol id, or
    a collection of ids.
    """
    dec = maximal_irreducible_components(g)
    if component is None:
        if len(dec.components) != 1:
            raise NotIrreducible(
                f"graph has {len(dec.components)} irreducible components; choose one"
            )
        k = 0
    elif isinstance(component, (int, np.integer)):
        k = dec.component_of(int(component))
        if k is None:
            raise NotIrreducible(f"symbol {g.symbols[int(component)]!r} is trivial")
    else:
        want = frozenset(int(c) for c in component)
        if want not in dec.components:
            raise NotIrreducible(f"{sorted(want)} is not a maximal irreducible component")
        k = dec.components.index(want)
    return tuple(sorted(dec.components[k])), dec.periods[k]


def build_component_model(pot: LocallyConstantPotential, component=None,
                          anchors: Mapping[int, Sequence[int]] | None = None,
                          tol: float = RESIDUAL_TOL) -> ComponentModel:
    """Restrict, reduce to the past, recode, and compute Perron data."""
    comp, period = resolve_component(pot.graph, component)
    sub, old = pot.graph.subgraph(comp)
    local_pot = pot.restrict(sub, old)
    local_anchors = None
    if anchors is not None:
        pos = {int(o): k for k, o in enumerate(old)}
        local_anchors = {}
        for s in comp:
            word = anchors.get(s)
            if word is None or any(int(x) not in pos for x in word):
                raise BadAnchor(f"anchor for {pot.graph.symbols[s]!r} leaves the component")
            local_anchors[pos[s]] = tuple(pos[int(x)] for x in word)
    red = sinai_reduce(local_pot, local_anchors)
    model = recode_depth_one(sub, red.past_potential)
    spectral = perron_data(model, tol=tol)
    return ComponentModel(comp, sub, local_pot, red, model, spectral, period)
