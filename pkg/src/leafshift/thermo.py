"""Local partition functions, Gurevich pressure and recurrence.

``Z_n(phi, a)`` sums ``exp(phi_n(x))`` over the period-n points x with
``x_0 = a``.  Two independent routes are provided: enumeration of the
cycles with full-period Birkhoff sums of the original potential, and the
trace of the n-th power of the block transfer matrix of the past-reduced
potential.  The coboundary introduced by the reduction cancels on periodic
orbits, so the two agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .errors import TrivialSymbol
from .potentials import LocallyConstantPotential, periodic_sums
from .ruelle import ComponentModel, build_component_model
from .shift_core import ShiftGraph, build_graph, cycle_array, maximal_irreducible_components

POSITIVE = "PositiveRecurrent"
NULL = "NullRecurrent"
TRANSIENT = "Transient"
UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class PressureEstimate:
    value: float
    method: str
    partial_sequence: list[tuple[int, float]]
    error_bound: float | None


@dataclass(frozen=True)
class RecurrenceReport:
    cls: str
    recurrence_partial_sums: list[float]
    positive_recurrence_partial_sums: list[float]
    evidence: str
    exact: bool = False


@dataclass(frozen=True)
class PeriodicSums:
    """Partial sums of ``sum_n sum_{q in Fix(f^n)} exp(phi_n(q) - nP)``."""

    terms: np.ndarray
    partial_sums: np.ndarray
    slope: float


# -- partition functions -----------------------------------------------------


def _component_of(g: ShiftGraph, base: int):
    dec = maximal_irreducible_components(g)
    k = dec.component_of(int(base))
    if k is None:
        raise TrivialSymbol(f"symbol {g.symbols[int(base)]!r} lies on no cycle")
    return tuple(sorted(dec.components[k]))


def _model_for(pot: LocallyConstantPotential, base: int) -> ComponentModel:
    comp = _component_of(pot.graph, base)
    return build_component_model(pot, comp)


def _block_powers(log_w: np.ndarray, nmax: int):
    """Yield ``(n, M, e, c)`` with ``W^n = M * 2**e * exp(n*c)`` for n = 1..nmax.

    Rescaling by exact powers of two keeps integer-valued powers exact.
    """
    finite = np.isfinite(log_w)
    c = float(np.max(log_w[finite]))
    w = np.where(finite, np.exp(np.where(finite, log_w, 0.0) - c), 0.0)
    m = np.eye(len(w))
    e = 0
    for n in range(1, nmax + 1):
        m = m @ w
        top = float(np.max(m))
        if top > 0:
            k = math.frexp(top)[1]
            m = np.ldexp(m, -k)
            e += k
        yield n, m, e, c


def log_partition_sequence(pot: LocallyConstantPotential, base: int, nmax: int,
                           model: ComponentModel | None = None) -> np.ndarray:
    """``log Z_n(phi, base)`` for n = 1..nmax by block-matrix powers (-inf if empty)."""
    if model is None:
        model = _model_for(pot, base)
    rec = model.model
    local = model.to_local(base)
    diag = np.flatnonzero(rec.last_letter == local)
    out = np.empty(nmax)
    for n, m, e, c in _block_powers(rec.log_weights, nmax):
        tr = float(m[diag, diag].sum())
        out[n - 1] = (math.log(tr) + e * math.log(2.0) + n * c) if tr > 0 else -math.inf
    return out


def partition_function(pot: LocallyConstantPotential, base: int, n: int,
                       method: str = "transfer") -> float:
    """``Z_n(phi, base)``.

    ``method="transfer"`` takes the block-matrix trace; ``"enumerate"`` sums
    over explicitly enumerated cycles.  Both are exact finite sums; with
    unit weights the transfer route returns exact integers.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "enumerate":
        _component_of(pot.graph, base)
        return float(np.exp(log_partition_enumerated(pot, base, n)))
    if method != "transfer":
        raise ValueError(f"unknown method {method!r}")
    model = _model_for(pot, base)
    rec = model.model
    diag = np.flatnonzero(rec.last_letter == model.to_local(base))
    for k, m, e, c in _block_powers(rec.log_weights, n):
        pass
    tr = float(m[diag, diag].sum())
    z = math.ldexp(tr, e)
    return z * math.exp(n * c) if c != 0.0 else z


def log_partition_enumerated(pot: LocallyConstantPotential, base: int, n: int) -> float:
    """``log Z_n`` from enumerated cycles and log-sum-exp of their Birkhoff sums."""
    cycles = cycle_array(pot.graph, base, n)
    if len(cycles) == 0:
        return -math.inf
    return float(logsumexp(periodic_sums(pot, cycles)))


def first_return_sequence(model: ComponentModel, base: int, nmax: int) -> np.ndarray:
    """``Z*_n``: weight of n-cycles through ``base`` visiting it only at time 0.

    Returned as ``exp(log Z*_n - n P)`` to stay in range.
    """
    rec = model.model
    local = model.to_local(base)
    hit = rec.last_letter == local
    log_w = rec.log_weights - model.pressure
    w = np.where(np.isfinite(log_w), np.exp(np.where(np.isfinite(log_w), log_w, 0.0)), 0.0)
    out = np.zeros(nmax)
    starts = np.flatnonzero(hit)
    # walk from each block ending in base; kill mass on re-entry before time n
    v = np.zeros((len(starts), len(w)))
    v[np.arange(len(starts)), starts] = 1.0
    for n in range(1, nmax + 1):
        v = v @ w
        out[n - 1] = float(v[np.arange(len(starts)), starts].sum())
        v[:, hit] = 0.0
    return out


# -- pressure ------------------------------------------------------------------


def gurevich_pressure(pot: LocallyConstantPotential, component=None,
                      method: str = "exact-spectral", nmax: int = 20,
                      base: int | None = None,
                      model: ComponentModel | None = None) -> PressureEstimate:
    """Gurevich pressure of an irreducible component.

    The extrapolation route differences ``log Z_n`` along multiples of the
    period; its last increment serves as the error indicator.
    """
    if model is None:
        model = build_component_model(pot, component)
    if base is None:
        base = model.component[0]
    logz = log_partition_sequence(pot, base, nmax, model=model)
    d = model.period
    seq = [(n, float(logz[n - 1] / n)) for n in range(d, nmax + 1, d)]
    if method == "exact-spectral":
        return PressureEstimate(model.pressure, method, seq, model.spectral.residual)
    if method != "sequence-extrapolation":
        raise ValueError(f"unknown method {method!r}")
    ns = [n for n, v in seq if math.isfinite(v)]
    if len(ns) < 3:
        return PressureEstimate(seq[-1][1], method, seq, None)
    inc = [(logz[n - 1] - logz[n - d - 1]) / d for n in ns[1:] if n - d in ns]
    return PressureEstimate(float(inc[-1]), method, seq, float(abs(inc[-1] - inc[-2])))


def periodic_point_sum(pot: LocallyConstantPotential, component=None,
                       pressure: float | None = None, nmax: int = 20,
                       fit_from: int = 5,
                       model: ComponentModel | None = None) -> PeriodicSums:
    """Partial sums over all periodic points of the component, weighted by ``e^{-nP}``.

    ``slope`` is the least-squares growth rate of the partial sums over
    ``n >= fit_from``.
    """
    if model is None:
        model = build_component_model(pot, component)
    P = model.pressure if pressure is None else float(pressure)
    log_w = model.model.log_weights - P
    terms = np.empty(nmax)
    for n, m, e, c in _block_powers(log_w, nmax):
        tr = float(np.trace(m))
        terms[n - 1] = math.exp(math.log(tr) + e * math.log(2.0) + n * c) if tr > 0 else 0.0
    partial = np.cumsum(terms)
    ns = np.arange(1, nmax + 1)
    sel = ns >= fit_from
    slope = float(np.polyfit(ns[sel], partial[sel], 1)[0]) if sel.sum() >= 2 else math.nan
    return PeriodicSums(terms, partial, slope)


# -- recurrence ----------------------------------------------------------------


def classify_recurrence(pot: LocallyConstantPotential, component=None,
                        pressure: float | None = None, nmax: int = 20,
                        base: int | None = None,
                        model: ComponentModel | None = None) -> RecurrenceReport:
    """Recurrence class of a finite irreducible component, with diagnostics.

    Finite components are positive recurrent by Perron-Frobenius; the
    partial sums of ``sum e^{-nP} Z_n`` and ``sum n e^{-nP} Z*_n`` are
    reported alongside.
    """
    if model is None:
        model = build_component_model(pot, component)
    if base is None:
        base = model.component[0]
    P = model.pressure if pressure is None else float(pressure)
    logz = log_partition_sequence(pot, base, nmax, model=model)
    ns = np.arange(1, nmax + 1)
    rec = np.cumsum(np.exp(logz - ns * P))
    first = first_return_sequence(model, base, nmax) * np.exp((model.pressure - P) * ns)
    pos = np.cumsum(ns * first)
    return RecurrenceReport(
        POSITIVE,
        [float(x) for x in rec],
        [float(x) for x in pos],
        "finite irreducible component: Perron-Frobenius",
        exact=True,
    )


# -- renewal truncations -------------------------------------------------------


def renewal_graph(depth: int) -> ShiftGraph:
    """States 0..depth-1 with edges 0 -> j and j+1 -> j."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    names = [str(k) for k in range(depth)]
    edges = [("0", str(j)) for j in range(depth)]
    edges += [(str(j + 1), str(j)) for j in range(depth - 1)]
    return build_graph(names, edges)


def renewal_potential(weights: Callable[[int], float], depth: int) -> LocallyConstantPotential:
    """Edge potential giving the first-return loop of length k weight ``weights(k)``.

    The loop 0 -> k-1 -> ... -> 0 carries ``log weights(k)`` on its first edge.
    """
    g = renewal_graph(depth)
    vals = {}
    for u, v in g.edges():
        vals[(u, v)] = math.log(weights(v + 1)) if u == 0 else 0.0
    return LocallyConstantPotential(g, 1, 0, vals)


@dataclass(frozen=True)
class TailCertificate:
    """Caller-supplied bounds on the part of a renewal model beyond a truncation.

    ``radius`` is the radius of convergence R of ``F(x) = sum p_k x^k``;
    ``tail(N)`` returns ``sum_{k>N} p_k R^k`` and ``moment_tail(N)`` returns
    ``sum_{k>N} k p_k R^k`` (either may be ``inf``).
    """

    radius: float
    tail: Callable[[int], float]
    moment_tail: Callable[[int], float]
    tol: float = 1e-9


@dataclass(frozen=True)
class TruncationReport:
    depth: int
    pressure: float
    report: RecurrenceReport


def classify_truncation(weights: Callable[[int], float], depth: int,
                        certificate: TailCertificate) -> TruncationReport:
    """Classify the infinite renewal model from its depth-N truncation.

    The truncated first-return series at ``x = R`` is read off the finite
    model (``Z*_k`` weighted by ``R^k``) and completed by the certificate.
    ``F(R) > 1`` means recurrence strictly inside the radius (positive);
    ``F(R) < 1`` means transience with ``P = -log R``; equality is decided
    by the first moment.
    """
    pot = renewal_potential(weights, depth)
    model = build_component_model(pot, 0)
    R = certificate.radius
    ks = np.arange(1, depth + 1)
    zstar = first_return_sequence(model, 0, depth) * np.exp(model.pressure * ks)
    f_terms = zstar * R ** ks
    f_partial = np.cumsum(f_terms)
    m_partial = np.cumsum(ks * f_terms)
    f_total = f_partial[-1] + certificate.tail(depth)
    tol = certificate.tol
    if f_partial[-1] > 1 + tol or f_total > 1 + tol:
        cls, why = POSITIVE, f"F(R) >= {min(f_total, f_partial[-1]):.6g} > 1"
    elif f_total < 1 - tol:
        cls, why = TRANSIENT, f"F(R) = {f_total:.12g} < 1"
    else:
        m_total = m_partial[-1] + certificate.moment_tail(depth)
        if math.isfinite(m_total):
            cls, why = POSITIVE, f"F(R) = 1, F'(R)R = {m_total:.6g} finite"
        else:
            cls, why = NULL, "F(R) = 1 and the first moment diverges"
    rep = RecurrenceReport(cls, [float(x) for x in f_partial], [float(x) for x in m_partial],
                           why, exact=False)
    return TruncationReport(depth, model.pressure, rep)


@dataclass(frozen=True)
class GeneratingFunctionOracle:
    """Closed-form classification of a renewal model from ``F(x) = sum p_k x^k``.

    ``F`` and ``dF`` (``x F'(x)``) are evaluated in closed form on ``(0, R]``.
    """

    F: Callable[[float], float]
    xdF: Callable[[float], float]
    radius: float

    def solve(self, tol: float = 1e-15) -> float:
        """Root of ``F(x) = 1`` on ``(0, R]`` by bisection (R if ``F(R) < 1``)."""
        R = self.radius
        if self.F(R) <= 1.0:
            return R
        lo, hi = 0.0, R
        while hi - lo > tol * hi:
            mid = 0.5 * (lo + hi)
            if self.F(mid) < 1.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def classify(self, tol: float = 1e-12) -> tuple[str, float]:
        """(class, pressure)."""
        R = self.radius
        fr = self.F(R)
        if fr < 1.0 - tol:
            return TRANSIENT, -math.log(R)
        x = self.solve()
        if abs(fr - 1.0) <= tol:
            x = R
        return (POSITIVE if math.isfinite(self.xdF(x)) else NULL), -math.log(x)
