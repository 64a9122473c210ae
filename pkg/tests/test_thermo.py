import math

import numpy as np
import pytest
from scipy.special import spence, zeta

from leafshift.errors import TrivialSymbol
from leafshift.potentials import LocallyConstantPotential, sinai_reduce
from leafshift.ruelle import build_component_model
from leafshift.shift_core import build_graph
from leafshift.thermo import (
    NULL,
    POSITIVE,
    TRANSIENT,
    GeneratingFunctionOracle,
    TailCertificate,
    classify_recurrence,
    classify_truncation,
    first_return_sequence,
    gurevich_pressure,
    log_partition_enumerated,
    log_partition_sequence,
    partition_function,
    periodic_point_sum,
    renewal_graph,
    renewal_potential,
)

import suite


def weighted_matrix(pot):
    g = pot.graph
    w = np.zeros((g.size, g.size))
    for i, j in g.edges():
        w[i, j] = math.exp(pot((i, j)))
    return w


def test_full_shift_partition_exact():
    pot = LocallyConstantPotential.constant(suite.full_shift(2), 0.0)
    ones = np.ones((2, 2), dtype=np.int64)
    p = np.eye(2, dtype=np.int64)
    for n in range(1, 21):
        p = p @ ones
        z = partition_function(pot, 0, n)
        assert z == p[0, 0] == 2 ** (n - 1)


def test_full_shift_constant_potential():
    c = 0.37
    pot = LocallyConstantPotential.constant(suite.full_shift(2), c)
    for n in (1, 5, 12):
        assert partition_function(pot, 1, n) == pytest.approx(math.exp(n * c) * 2 ** (n - 1),
                                                              rel=1e-13)


def test_golden_mean_counts():
    pot = LocallyConstantPotential.constant(suite.golden_mean(), 0.0)
    assert [partition_function(pot, 0, n) for n in range(1, 5)] == [1, 2, 3, 5]
    assert [partition_function(pot, 0, n, method="enumerate") for n in range(1, 5)] == \
        pytest.approx([1, 2, 3, 5], abs=1e-12)


def test_trivial_symbol_rejected():
    g = build_graph(["x", "a", "y"], [("x", "x"), ("x", "a"), ("a", "y"), ("y", "y")])
    pot = LocallyConstantPotential.constant(g, 0.0)
    with pytest.raises(TrivialSymbol):
        partition_function(pot, 1, 3)
    with pytest.raises(TrivialSymbol):
        partition_function(pot, 1, 3, method="enumerate")
    with pytest.raises(ValueError):
        partition_function(pot, 0, 0)


@pytest.mark.parametrize("seed", range(6))
def test_enumeration_matches_transfer(seed):
    rng = np.random.default_rng(seed)
    g = suite.random_irreducible_graph(rng, max_symbols=6)
    pot = suite.random_potential(rng, g, 1, 1, scale=0.5)
    for base in range(g.size):
        logz = log_partition_sequence(pot, base, 12)
        for n in range(1, 13):
            enum = log_partition_enumerated(pot, base, n)
            if math.isinf(enum):
                assert math.isinf(logz[n - 1])
            else:
                assert logz[n - 1] == pytest.approx(enum, abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_edge_potential_partition_matches_matrix_power(seed):
    rng = np.random.default_rng(seed + 40)
    g = suite.random_irreducible_graph(rng, max_symbols=5)
    pot = suite.random_potential(rng, g)
    w = weighted_matrix(pot)
    p = np.eye(g.size)
    for n in range(1, 11):
        p = p @ w
        for base in range(g.size):
            if p[base, base] > 0:
                assert partition_function(pot, base, n) == pytest.approx(p[base, base], rel=1e-12)


def test_pressure_examples():
    pot = LocallyConstantPotential.constant(suite.full_shift(2), 0.0)
    assert gurevich_pressure(pot).value == pytest.approx(math.log(2), abs=1e-12)
    gm = LocallyConstantPotential.constant(suite.golden_mean(), 0.0)
    est = gurevich_pressure(gm)
    assert est.value == pytest.approx(math.log(suite.GOLDEN), abs=1e-10)
    assert est.method == "exact-spectral"
    ext = gurevich_pressure(gm, method="sequence-extrapolation", nmax=30)
    assert abs(ext.value - est.value) <= max(ext.error_bound, 1e-12) * 10
    assert ext.partial_sequence[-1][0] == 30
    with pytest.raises(ValueError):
        gurevich_pressure(gm, method="guess")


@pytest.mark.parametrize("seed", range(6))
def test_pressure_properties(seed):
    rng = np.random.default_rng(seed)
    g = suite.random_irreducible_graph(rng, max_symbols=6)
    pot = suite.random_potential(rng, g)
    p = gurevich_pressure(pot).value
    assert p == pytest.approx(suite.dense_pressure(pot), abs=1e-12)
    assert gurevich_pressure(pot.shifted(0.8)).value == pytest.approx(p + 0.8, abs=1e-12)
    # base independence
    for base in range(g.size):
        assert gurevich_pressure(pot, base=base).value == p
    ext = gurevich_pressure(pot, method="sequence-extrapolation", nmax=40)
    # the last increment indicates the error up to the geometric factor r/(1-r)
    assert abs(ext.value - p) <= 10 * ext.error_bound
    two = suite.random_potential(rng, g, 1, 1)
    red = sinai_reduce(two)
    assert gurevich_pressure(red.past_potential).value == pytest.approx(
        gurevich_pressure(two).value, abs=1e-10)


def test_periodic_component_extrapolation_uses_multiples():
    g = build_graph(["a", "b"], [("a", "b"), ("b", "a")])
    pot = LocallyConstantPotential.constant(g, 0.0)
    ext = gurevich_pressure(pot, method="sequence-extrapolation", nmax=10)
    assert [n for n, _ in ext.partial_sequence] == [2, 4, 6, 8, 10]
    assert ext.value == pytest.approx(0.0, abs=1e-14)


def test_recurrence_full_shift():
    pot = LocallyConstantPotential.constant(suite.full_shift(2), 0.0)
    rep = classify_recurrence(pot, nmax=20)
    assert rep.cls == POSITIVE and rep.exact
    assert rep.recurrence_partial_sums == pytest.approx([n / 2 for n in range(1, 21)], rel=1e-12)
    # the only first return to a of length n is a b^(n-1)
    expected = np.cumsum([n / 2**n for n in range(1, 21)])
    assert rep.positive_recurrence_partial_sums == pytest.approx(list(expected), rel=1e-12)


def test_first_return_matches_brute_force():
    rng = np.random.default_rng(3)
    g = suite.random_irreducible_graph(rng, max_symbols=4)
    pot = suite.random_potential(rng, g)
    cm = build_component_model(pot)
    base = 0
    got = first_return_sequence(cm, base, 7)
    for n in range(1, 8):
        total = 0.0
        for w in suite.brute_cycles(g, base, n):
            if base not in w[1:]:
                total += math.exp(suite.brute_window_sum(pot, w) - n * cm.pressure)
        assert got[n - 1] == pytest.approx(total, rel=1e-12, abs=1e-300)


def test_periodic_point_sums():
    pot = LocallyConstantPotential.constant(suite.full_shift(2), 0.0)
    ps = periodic_point_sum(pot, nmax=20)
    assert ps.partial_sums == pytest.approx(np.arange(1, 21), rel=1e-12)
    assert ps.slope == pytest.approx(1.0, abs=1e-12)

    gm = LocallyConstantPotential.constant(suite.golden_mean(), 0.0)
    ps = periodic_point_sum(gm, nmax=30)
    lam = suite.GOLDEN
    expected = [(lam**n + (-1 / lam) ** n) / lam**n for n in range(1, 31)]
    assert ps.terms == pytest.approx(expected, rel=1e-12)
    assert np.all(np.diff(ps.partial_sums) >= 0)
    assert ps.slope == pytest.approx(1.0, abs=1e-3)

    above = periodic_point_sum(gm, pressure=math.log(lam) + 0.1, nmax=200)
    tail = above.partial_sums[-1] - above.partial_sums[100]
    assert tail < 1e-3 and abs(above.slope) < 0.05


def test_renewal_graph_shape():
    g = renewal_graph(4)
    assert sorted(g.edges()) == [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (2, 1), (3, 2)]
    pot = renewal_potential(lambda k: 0.5**k, 4)
    # first-return loop of length k carries weight p_k
    cm = build_component_model(pot, 0)
    z = first_return_sequence(cm, 0, 6) * np.exp(cm.pressure * np.arange(1, 7))
    assert z == pytest.approx([0.5, 0.25, 0.125, 0.0625, 0.0, 0.0], abs=1e-15)


def _families():
    c1, c2 = 3 / math.pi**2, 6 / math.pi**2
    yield ("geometric", POSITIVE, lambda k: 2.0**-k,
           TailCertificate(2.0, lambda n: math.inf, lambda n: math.inf),
           GeneratingFunctionOracle(lambda x: (x / 2) / (1 - x / 2) if x < 2 else math.inf,
                                    lambda x: (x / 2) / (1 - x / 2) ** 2 if x < 2 else math.inf,
                                    2.0))
    for name, cls, c in (("zeta-half", TRANSIENT, c1), ("zeta-critical", NULL, c2)):
        yield (name, cls, lambda k, c=c: c / k**2,
               TailCertificate(1.0, lambda n, c=c: c * float(zeta(2, n + 1)),
                               lambda n: math.inf),
               GeneratingFunctionOracle(lambda x, c=c: c * float(spence(1 - x)),
                                        lambda x, c=c: -c * math.log(1 - x) if x < 1 else math.inf,
                                        1.0))


@pytest.mark.parametrize("family", list(_families()), ids=lambda f: f[0])
def test_renewal_truncations_match_oracle(family):
    name, expected, weights, cert, oracle = family
    cls, pressure = oracle.classify()
    assert cls == expected
    previous = -math.inf
    for depth in (1, 2, 5, 10, 20, 30):
        rep = classify_truncation(weights, depth, cert)
        assert rep.report.cls == cls
        assert rep.pressure >= previous - 1e-12
        assert rep.pressure <= pressure + 1e-9
        previous = rep.pressure


def test_geometric_oracle_pressure():
    # sum 2^-k x^k = 1 at x = 1: pressure 0
    _, _, _, _, oracle = next(_families())
    cls, p = oracle.classify()
    assert p == pytest.approx(0.0, abs=1e-12)
    rep = classify_truncation(lambda k: 2.0**-k, 30, TailCertificate(
        2.0, lambda n: math.inf, lambda n: math.inf))
    assert rep.pressure == pytest.approx(p, abs=1e-8)


def test_positive_family_decided_by_moment():
    # p_k = 6/(pi^2 k^2) sits at F(1) = 1; a finite moment flips it to positive
    c = 90 / math.pi**4
    cert = TailCertificate(1.0, lambda n: c * float(zeta(4, n + 1)),
                           lambda n: c * float(zeta(3, n + 1)))
    rep = classify_truncation(lambda k: c / k**4, 20, cert)
    assert rep.report.cls == POSITIVE
