"""Acceptance criteria, one test each, at the stated tolerances.

Each criterion prints a single PASS/FAIL line.  Run directly with
``python3 tests/test_acceptance.py`` for the summary alone.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.special import spence, zeta

from leafshift import cli
from leafshift.catmap import build_catmap_model, periodic_sum_divergence, srb_comparison
from leafshift.leaf import (
    LeafFamily,
    all_stems,
    assemble_equilibrium,
    entropy_pressure_identity,
    gibbs_bound_check,
    holonomy_ratio_check,
    pushforward_invariance_residual,
)
from leafshift.potentials import (
    LocallyConstantPotential,
    periodic_cohomology_residual,
    sinai_reduce,
)
from leafshift.ruelle import build_component_model
from leafshift.thermo import (
    NULL,
    POSITIVE,
    TRANSIENT,
    GeneratingFunctionOracle,
    TailCertificate,
    classify_truncation,
    gurevich_pressure,
    partition_function,
)
from leafshift.shift_core import admissible_words

import suite


def criterion_1():
    t0 = time.perf_counter()
    g = suite.full_shift(2)
    pot = LocallyConstantPotential.constant(g, 0.0)
    cm = build_component_model(pot)
    p_err = abs(gurevich_pressure(pot, model=cm).value - math.log(2))
    z_ok = all(partition_function(pot, 0, n) == 2 ** (n - 1) for n in range(1, 21))
    table = assemble_equilibrium(LeafFamily.from_model(cm), 12)
    m_err = max(abs(table.mass(w) - 2.0**-len(w))
                for n in range(1, 13) for w in admissible_words(g, n))
    dt = time.perf_counter() - t0
    ok = p_err <= 1e-12 and z_ok and m_err <= 1e-12 and dt < 1.0
    return ok, f"pressure err {p_err:.1e}, Z_n exact {z_ok}, mass err {m_err:.1e}, {dt:.2f}s"


def criterion_2():
    t0 = time.perf_counter()
    g = suite.golden_mean()
    pot = LocallyConstantPotential.constant(g, 0.0)
    cm = build_component_model(pot)
    p_err = abs(gurevich_pressure(pot, model=cm).value - math.log(suite.GOLDEN))
    table = assemble_equilibrium(LeafFamily.from_model(cm), 10)
    pi, q = suite.parry_chain()
    m_err = 0.0
    for n in range(1, 11):
        for w in admissible_words(g, n):
            w = tuple(int(x) for x in w)
            m_err = max(m_err, abs(table.mass(w) - suite.chain_cylinder(pi, q, w)))
    dt = time.perf_counter() - t0
    ok = p_err <= 1e-10 and m_err <= 1e-11 and dt < 1.0
    return ok, f"pressure err {p_err:.1e}, Parry err {m_err:.1e}, {dt:.2f}s"


def criterion_3():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = {"a": 0.0, "c": 0.0, "d": 0.0}
    gibbs_fail = 0
    for g, pot in suite.random_suite():
        cm = build_component_model(pot)
        fam = LeafFamily.from_model(cm)
        for stem in all_stems(fam):
            worst["a"] = max(worst["a"], pushforward_invariance_residual(fam, stem, 6))
        table = assemble_equilibrium(fam, 8)
        gibbs_fail += not gibbs_bound_check(table, fam, 8).passed
        worst["c"] = max(worst["c"], entropy_pressure_identity(table, fam)["residual"])
        u = rng.normal(size=g.size)
        cm2 = build_component_model(suite.add_coboundary(pot, u))
        worst["d"] = max(worst["d"], abs(cm2.pressure - cm.pressure))
    dt = time.perf_counter() - t0
    ok = (worst["a"] < 1e-10 and gibbs_fail == 0 and worst["c"] < 1e-9
          and worst["d"] <= 1e-10 and dt < 30)
    return ok, (f"(a) {worst['a']:.1e} (b) {gibbs_fail} violations (c) {worst['c']:.1e} "
                f"(d) {worst['d']:.1e}, {dt:.1f}s")


def criterion_4():
    rng = np.random.default_rng(11)
    worst, window_ok = 0.0, True
    for g, edge_pot in suite.random_suite():
        for a, b in ((1, 0), (0, 1), (1, 1)):
            pot = edge_pot if (a, b) == (1, 0) else suite.random_potential(rng, g, a, b)
            red = sinai_reduce(pot)
            window_ok &= red.past_potential.past_window <= a + b
            window_ok &= red.past_potential.future_window == 0
            worst = max(worst, periodic_cohomology_residual(red, pot, 8))
    ok = worst <= 1e-12 and window_ok
    return ok, f"max periodic-orbit defect {worst:.1e}, window bound {window_ok}"


def criterion_5():
    rng = np.random.default_rng(5)
    violations, pairs, nontrivial, worst_gap = 0, 0, 0, math.inf
    for g in (suite.golden_mean(), suite.full_shift(2)):
        pair = rng.normal(size=(g.size, g.size))
        for m in range(2, 6):
            cm = build_component_model(suite.holder_family(g, pair, m, future=0.3))
            fam = LeafFamily.from_model(cm)
            stems = all_stems(fam)
            for s1 in stems:
                for s2 in stems:
                    if s1.last != s2.last or s1 == s2:
                        continue
                    worst, bound = holonomy_ratio_check(fam, s1, s2, 6)
                    pairs += 1
                    nontrivial += worst > 1 + 1e-9
                    violations += worst > bound
                    worst_gap = min(worst_gap, bound - worst)
    ok = violations == 0 and nontrivial > 0
    return ok, (f"{pairs} stem pairs ({nontrivial} with ratio != 1), {violations} violations, "
                f"min slack {worst_gap:.2e}")


def _renewal_families():
    c1, c2 = 3 / math.pi**2, 6 / math.pi**2
    geo = (
        lambda k: 2.0**-k,
        TailCertificate(2.0, lambda n: math.inf, lambda n: math.inf),
        GeneratingFunctionOracle(lambda x: (x / 2) / (1 - x / 2) if x < 2 else math.inf,
                                 lambda x: (x / 2) / (1 - x / 2) ** 2 if x < 2 else math.inf,
                                 2.0),
    )
    fams = [("geometric", *geo)]
    for name, c in (("zeta-half", c1), ("zeta-critical", c2)):
        fams.append((
            name,
            lambda k, c=c: c / k**2,
            TailCertificate(1.0, lambda n, c=c: c * float(zeta(2, n + 1)), lambda n: math.inf),
            GeneratingFunctionOracle(lambda x, c=c: c * float(spence(1 - x)),
                                     lambda x, c=c: (c * -math.log(1 - x) if x < 1 else math.inf),
                                     1.0),
        ))
    return fams


def criterion_6():
    expected = {"geometric": POSITIVE, "zeta-half": TRANSIENT, "zeta-critical": NULL}
    details, ok = [], True
    for name, weights, cert, oracle in _renewal_families():
        cls, _ = oracle.classify()
        ok &= cls == expected[name]
        pressures = []
        for depth in range(1, 31):
            rep = classify_truncation(weights, depth, cert)
            pressures.append(rep.pressure)
            ok &= rep.report.cls == cls
        mono = all(b >= a - 1e-12 for a, b in zip(pressures, pressures[1:]))
        ok &= mono
        details.append(f"{name}={cls}{'' if mono else ' (non-monotone)'}")
    return ok, ", ".join(details)


def criterion_7():
    t0 = time.perf_counter()
    model, pot, cm = build_catmap_model(1.0)
    p_err = abs(cm.pressure)
    dev = srb_comparison(model, cm, 10)
    rep = periodic_sum_divergence(model, nmax=15, check_upto=12, fit_from=5)
    counts_ok = rep.coded_counts == [round(model.lam**n + model.lam**-n - 2) for n in range(1, 13)]
    dt = time.perf_counter() - t0
    ok = p_err <= 1e-10 and dev < 1e-8 and counts_ok and abs(rep.slope - 1) <= 0.05 and dt < 10
    return ok, (f"pressure {p_err:.1e}, SRB dev {dev:.1e}, counts exact {counts_ok}, "
                f"slope {rep.slope:.4f}, {dt:.2f}s")


def criterion_8(root=None):
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] if root is None else root
    argv = ["verify", "--spec", str(root / "data/golden.json"),
            "--potential", str(root / "data/two_sided.json")]
    outs = []
    for _ in range(2):
        code, text = cli.run(argv)
        doc = json.loads(text)
        doc.pop("timing")
        outs.append((code, json.dumps(doc, sort_keys=True)))
    ok = outs[0] == outs[1] and outs[0][0] == 0
    return ok, f"exit {outs[0][0]}, identical {outs[0][1] == outs[1][1]}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


def _line(k, ok, detail):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, start=1):
        print(_line(k, *fn()))
