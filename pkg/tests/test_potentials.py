import itertools
import math

import numpy as np
import pytest

from leafshift.errors import BadAnchor, InadmissibleWord, InputError
from leafshift.potentials import (
    HolderData,
    LocallyConstantPotential,
    birkhoff_sum_backward,
    birkhoff_sum_forward,
    cohomology_residual,
    fit_holder,
    lex_anchors,
    periodic_cohomology_residual,
    sinai_reduce,
    variation,
)
from leafshift.shift_core import enumerate_cycles

import suite

PAIR = {(0, 0): 0.3, (0, 1): -0.5, (1, 0): 0.8, (1, 1): 0.1}


def pair_potential(g, table=PAIR):
    return LocallyConstantPotential.from_function(g, 0, 1, lambda w: table[w])


def test_json_roundtrip_and_default():
    g = suite.golden_mean()
    pot = LocallyConstantPotential.from_json(
        g, {"past_window": 0, "future_window": 1, "values": {"ab": 2.0}, "default": -1.0})
    assert pot((0, 1)) == 2.0 and pot((0, 0)) == -1.0 and pot((1, 0)) == -1.0
    again = LocallyConstantPotential.from_json(g, pot.to_json())
    assert np.array_equal(again.values, pot.values)


def test_json_rejects_bad_tables():
    g = suite.golden_mean()
    with pytest.raises(InadmissibleWord):
        LocallyConstantPotential.from_json(g, {"future_window": 1, "values": {"bb": 1.0},
                                              "default": 0.0})
    with pytest.raises(InputError):
        LocallyConstantPotential.from_json(g, {"future_window": 1, "values": {"ab": 1.0}})
    with pytest.raises(InputError):
        LocallyConstantPotential.from_json(g, {"values": {"ab": 1.0}, "default": 0.0})
    with pytest.raises(InputError):
        LocallyConstantPotential(g, 0, 0, {(0,): math.inf, (1,): 0.0})


def test_birkhoff_examples():
    full = suite.full_shift(2)
    c = LocallyConstantPotential.constant(full, 0.7)
    assert birkhoff_sum_backward(c, (0, 1, 1), 5) == pytest.approx(3.5, abs=1e-15)
    ind = LocallyConstantPotential.from_function(full, 0, 0, lambda w: float(w[0] == 0))
    assert birkhoff_sum_backward(ind, (0, 1), 2) == 1.0

    gm = suite.golden_mean()
    pot = pair_potential(gm)
    cycle = (0, 0, 1)
    # windows of the periodic point ...aab aab...: aa, ab, ba
    hand = PAIR[(0, 0)] + PAIR[(0, 1)] + PAIR[(1, 0)]
    assert birkhoff_sum_backward(pot, cycle, 3) == pytest.approx(hand, abs=1e-15)
    assert birkhoff_sum_forward(pot, cycle, 3) == pytest.approx(hand, abs=1e-15)


def test_backward_and_forward_partial_sums_differ_but_periods_agree():
    gm = suite.golden_mean()
    pot = pair_potential(gm)
    cycle = (0, 0, 1)
    # backward from aab: windows ending at coordinates 0, -1: (a,a), (b,a)
    assert birkhoff_sum_backward(pot, cycle, 2) == pytest.approx(PAIR[(0, 0)] + PAIR[(1, 0)])
    assert birkhoff_sum_forward(pot, cycle, 2) == pytest.approx(PAIR[(0, 0)] + PAIR[(0, 1)])
    for n in (3, 6, 9):
        assert birkhoff_sum_backward(pot, cycle, n) == pytest.approx(
            birkhoff_sum_forward(pot, cycle, n), abs=1e-13)


def test_birkhoff_rejects_inadmissible_cycles():
    pot = pair_potential(suite.golden_mean())
    with pytest.raises(InadmissibleWord):
        birkhoff_sum_backward(pot, (0, 1, 1), 3)
    with pytest.raises(InadmissibleWord):
        birkhoff_sum_backward(pot, (1,), 1)


def test_sinai_constant_potential():
    pot = LocallyConstantPotential.constant(suite.full_shift(2), 1.25, 0, 2)
    red = sinai_reduce(pot)
    assert np.allclose(red.past_potential.values, 1.25)
    assert red.transfer_sup == 0.0


def test_sinai_pair_potential_matches_hand_expansion():
    full = suite.full_shift(2)
    pot = pair_potential(full)
    red = sinai_reduce(pot)
    y = {s: w[1] for s, w in lex_anchors(full, 2).items()}
    past = red.past_potential
    assert (past.past_window, past.future_window) == (1, 0)
    for x1, x0 in itertools.product((0, 1), repeat=2):
        hand = PAIR[(x0, y[x0])] + PAIR[(x1, x0)] - PAIR[(x1, y[x1])]
        assert past((x1, x0)) == pytest.approx(hand, abs=1e-15)
    for n in (1, 2):
        for base in (0, 1):
            for w in enumerate_cycles(full, base, n):
                assert birkhoff_sum_backward(past, w.letters, n) == pytest.approx(
                    birkhoff_sum_backward(pot, w.letters, n), abs=1e-14)


def test_sinai_explicit_anchor_and_errors():
    gm = suite.golden_mean()
    pot = pair_potential(gm)
    red = sinai_reduce(pot, {0: (0, 1), 1: (1, 0)})
    assert red.anchors == {0: (0, 1), 1: (1, 0)}
    assert cohomology_residual(red, pot) < 1e-14
    with pytest.raises(BadAnchor):
        sinai_reduce(pot, {0: (0, 1), 1: (1, 1)})
    with pytest.raises(BadAnchor):
        sinai_reduce(pot, {0: (1, 0), 1: (1, 0)})
    with pytest.raises(BadAnchor):
        sinai_reduce(pot, {0: (0,), 1: (1, 0)})
    with pytest.raises(BadAnchor):
        sinai_reduce(pot, {0: (0, 0)})


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("window", [(0, 1), (1, 1), (0, 2), (2, 1)])
def test_sinai_invariants_random(seed, window):
    rng = np.random.default_rng(seed)
    g = suite.random_irreducible_graph(rng, max_symbols=5)
    a, b = window
    pot = suite.random_potential(rng, g, a, b)
    red = sinai_reduce(pot)
    past = red.past_potential
    assert past.future_window == 0 and past.past_window <= a + b
    assert cohomology_residual(red, pot) < 1e-12
    assert periodic_cohomology_residual(red, pot, 6) < 1e-12
    assert red.transfer_sup <= b * 2 * pot.sup_norm + 1e-12


def test_variation_examples():
    full = suite.full_shift(2)
    pot = pair_potential(full)
    assert variation(pot, 1) == 0.0
    spread = max(max(PAIR[(s, 0)], PAIR[(s, 1)]) - min(PAIR[(s, 0)], PAIR[(s, 1)])
                 for s in (0, 1))
    assert variation(pot, 0) == pytest.approx(spread)
    const = LocallyConstantPotential.constant(full, 3.0, 2, 2)
    assert all(variation(const, n) == 0.0 for n in range(4))


@pytest.mark.parametrize("seed", range(5))
def test_variation_nonincreasing_and_vanishes_at_window(seed):
    rng = np.random.default_rng(seed)
    g = suite.random_irreducible_graph(rng, max_symbols=4)
    pot = suite.random_potential(rng, g, 2, 3)
    vs = [variation(pot, n) for n in range(6)]
    assert all(x >= y for x, y in zip(vs, vs[1:]))
    assert vs[3] == 0.0


def test_holder_data():
    h = HolderData(2.0, 0.5)
    assert h.bound(3) == 0.25
    assert h.tail(1) == pytest.approx(2.0)
    fitted = fit_holder({1: 0.5, 2: 0.5, 3: 0.0}, 0.5)
    assert fitted.constant == 2.0
    with pytest.raises(ValueError):
        HolderData(1.0, 1.0)
