"""Reference conformal family on future cylinders and leaf-measure densities.

The conformal law ``m([s w]) = exp(phi(s w) - P) m([w])`` forces future
cylinder masses of the form ``exp(phi_n(w) - nP) h(end)``, and additivity
over one-letter extensions forces ``h`` to satisfy ``h = e^{-P} W h``.  The
family is therefore built from the Perron eigenvector of the future-direction
transfer structure ``W^T`` (left eigendata), computed independently of the
harmonic function of the leaf construction.

The coding of the symbolic model is the identity, so the overlap multiplicity
of the density comparison is K = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BaseMismatch
from .leaf import MAX_CYLINDERS, LeafFamily, LeafMeasure, _expand, normalized_holder
from .ruelle import ComponentModel, _perron_vector

CODING_MULTIPLICITY = 1


@dataclass(frozen=True, eq=False)
class ConformalFamily:
    """Masses ``m_B([w]) = exp(phi_n(w) - nP) h(end) / h(B)`` over blocks B.

    ``raw_mass`` drops the per-block normalization and satisfies the
    conformal law exactly; ``mass`` has total 1 on every fiber.
    """

    model: ComponentModel
    h: np.ndarray
    pressure: float

    def _log_path(self, block: int, w) -> tuple[float, int]:
        rec = self.model.model
        if int(rec.last_letter[block]) != int(w[0]):
            raise BaseMismatch("word must start with the block's last symbol")
        b, s = block, 0.0
        for letter in w[1:]:
            j = rec.step(b, letter)
            if j < 0:
                return -math.inf, b
            s += rec.log_weights[b, j] - self.pressure
            b = j
        return s, b

    def raw_mass(self, block: int, w) -> float:
        s, end = self._log_path(block, w)
        return math.exp(s) * self.h[end] if s > -math.inf else 0.0

    def mass(self, block: int, w) -> float:
        return self.raw_mass(block, w) / self.h[block]

    def table(self, block: int, depth: int, limit: int = MAX_CYLINDERS) -> dict:
        """Normalized masses of all future words of length 1..depth over ``block``."""
        rec = self.model.model
        fam = LeafFamily(self.model, self.h, self._log_kernel())
        out = {}
        start = (np.array([block]), rec.last_letter[[block]][:, None].astype(np.intp),
                 np.zeros(1))
        for _, words, lm in _expand(fam, *start, depth - 1, limit):
            for row, v in zip(words, lm):
                out[tuple(int(x) for x in row)] = math.exp(v)
        return out

    def _log_kernel(self) -> np.ndarray:
        lw = self.model.model.log_weights
        log_h = np.log(self.h)
        with np.errstate(invalid="ignore"):
            k = lw + log_h[None, :] - log_h[:, None] - self.pressure
        k[~np.isfinite(lw)] = -np.inf
        return k

    def conformality_residual(self, depth: int) -> float:
        """Max relative defect of ``m([s w]) = e^{phi - P} m([w])`` over words to depth.

        ``[s w]`` sits over a block B' ending in s; ``[w]`` over the block
        reached from B' by appending ``w_0``.
        """
        rec = self.model.model
        worst = 0.0
        for b in range(rec.size):
            fam = LeafFamily(self.model, self.h, self._log_kernel())
            start = (np.array([b]), rec.last_letter[[b]][:, None].astype(np.intp),
                     np.zeros(1))
            for blocks, words, _ in _expand(fam, *start, depth - 1):
                if words.shape[1] < 2:
                    continue
                for row in words:
                    c = rec.step(b, row[1])
                    lhs = self.raw_mass(b, row)
                    rhs = math.exp(rec.log_weights[b, c] - self.pressure) * self.raw_mass(c, row[1:])
                    worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
        return worst

    def additivity_residual(self, depth: int) -> float:
        """Max |m([w]) - sum over one-letter extensions| over normalized tables."""
        worst = 0.0
        for b in range(self.model.model.size):
            tab = self.table(b, depth)
            child: dict = {}
            for w, m in tab.items():
                if len(w) > 1:
                    child[w[:-1]] = child.get(w[:-1], 0.0) + m
            for w, m in tab.items():
                if len(w) < depth:
                    worst = max(worst, abs(m - child[w]))
        return worst


def build_conformal_family(model: ComponentModel) -> ConformalFamily:
    """Conformal family from the Perron data of the transposed block matrix."""
    lw = model.model.log_weights
    shift = float(np.max(lw[np.isfinite(lw)]))
    w = np.exp(lw - shift)
    # right eigenvector of W, i.e. the left eigenvector of the future-direction W^T
    lam, v, _ = _perron_vector(w, 1e-13, 10**6)
    return ConformalFamily(model, v / v.max(), float(np.log(lam) + shift))


@dataclass(frozen=True)
class DensityReport:
    inf_ratio: float
    sup_ratio: float
    inf_normalized: float
    sup_normalized: float
    certificate: float
    base_mass: float
    passed: bool


def density_bounds(leaf: LeafMeasure, family: ConformalFamily, table=None,
                   leaf_family: LeafFamily | None = None) -> DensityReport:
    """Envelope of ``leaf([w]) / m([w])`` over the leaf's stored words.

    The certificate is ``K * C_{R0} * e^{2|A|} * C~ / nu([R0])`` with K = 1,
    ``C_{R0}`` the extreme of psi and 1/psi over blocks ending in R0, and
    ``C~`` the holonomy constant of the normalized potential.  Normalized
    ratios divide by ``psi(stem)`` and equal 1 when the leaf and the
    reference family are proportional.
    """
    model = family.model
    rec = model.model
    stem = leaf.stem
    block = rec.block_of(stem.letters)
    r0 = stem.last
    psi = model.spectral.psi
    ratios = []
    for w, m in leaf.masses.items():
        if w[0] != r0:
            raise BaseMismatch("leaf words must start at the stem's last symbol")
        ref = family.mass(block, w)
        if ref > 0:
            ratios.append(m / ref)
        elif m > 0:
            ratios.append(math.inf)
    ratios = np.array(ratios)
    sel = psi[rec.last_letter == r0]
    c_r0 = float(max(sel.max(), 1.0 / sel.min()))
    if leaf_family is None:
        leaf_family = LeafFamily.from_model(model)
    c_tilde = math.exp(normalized_holder(leaf_family).tail(0))
    if table is not None:
        base_mass = table.mass((r0,))
    else:
        base_mass = float(leaf_family.stationary[rec.last_letter == r0].sum())
    cert = CODING_MULTIPLICITY * c_r0 * math.exp(2 * model.reduction.transfer_sup) * c_tilde / base_mass
    lo, hi = float(ratios.min()), float(ratios.max())
    norm = psi[block]
    return DensityReport(lo, hi, lo / norm, hi / norm, float(cert), float(base_mass),
                         bool(lo > 0 and hi <= cert))
