"""Shared model builders and independent oracles for the tests."""

import itertools
import math

import numpy as np

from leafshift.potentials import LocallyConstantPotential
from leafshift.shift_core import build_graph, graph_from_matrix

GOLDEN = (1 + math.sqrt(5)) / 2
SUITE_SEED = 20240611


def full_shift(k=2):
    return graph_from_matrix(np.ones((k, k), dtype=int))


def golden_mean():
    return build_graph(["a", "b"], [("a", "a"), ("a", "b"), ("b", "a")])


def random_irreducible_graph(rng, max_symbols=8, p_extra=0.25):
    """A Hamiltonian cycle through a random ordering plus extra random edges."""
    n = int(rng.integers(2, max_symbols + 1))
    order = rng.permutation(n)
    adj = rng.random((n, n)) < p_extra
    for i in range(n):
        adj[order[i], order[(i + 1) % n]] = True
    return graph_from_matrix(adj.astype(int))


def random_potential(rng, g, past=1, future=0, scale=1.0):
    pot = LocallyConstantPotential.constant(g, 0.0, past, future)
    vals = {tuple(int(x) for x in w): float(scale * rng.normal()) for w in pot.windows}
    return LocallyConstantPotential(g, past, future, vals)


def random_suite(count=50, seed=SUITE_SEED):
    """(graph, depth-one edge potential) pairs, reproducible."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        g = random_irreducible_graph(rng)
        out.append((g, random_potential(rng, g)))
    return out


def add_coboundary(pot, u):
    """``phi + u(x_0) - u(x_-1)`` on an edge potential."""
    vals = {}
    for w, v in zip(pot.windows, pot.values):
        w = tuple(int(x) for x in w)
        vals[w] = float(v + u[w[-1]] - u[w[-2]])
    return LocallyConstantPotential(pot.graph, pot.past_window, pot.future_window, vals)


def holder_family(g, pair, m, theta=0.5, future=0.0):
    """Window-m truncation of ``sum_k theta^k pair(x_0, x_-k) + future * pair(x_0, x_1)``.

    A long-range two-body interaction.  A weighted sum of shifts of one
    function would be cohomologous to a short-range potential and give
    trivial holonomies, which this is not.
    """
    b = 1 if future else 0

    def fn(w):
        x0 = len(w) - 1 - b
        s = sum(theta**k * pair[w[x0], w[x0 - k]] for k in range(1, m + 1))
        return s + (future * pair[w[x0], w[x0 + 1]] if b else 0.0)

    return LocallyConstantPotential.from_function(g, m, b, fn)


def brute_cycles(g, base, n):
    """All period-n words through ``base`` by itertools.product (tiny graphs only)."""
    out = []
    for rest in itertools.product(range(g.size), repeat=n - 1):
        w = (base,) + rest
        if all(g.has_edge(w[i], w[(i + 1) % n]) for i in range(n)):
            out.append(w)
    return out


def brute_window_sum(pot, cycle):
    """Full-period sum of the potential, reading windows off the periodic word."""
    n = len(cycle)
    a, b = pot.past_window, pot.future_window
    return sum(pot([cycle[(k + j) % n] for j in range(-a, b + 1)]) for k in range(n))


def dense_pressure(pot):
    """log spectral radius of the depth-one weighted matrix from a dense eigensolve."""
    g = pot.graph
    if pot.past_window != 1 or pot.future_window != 0:
        raise ValueError("edge potentials only")
    w = np.zeros((g.size, g.size))
    for (i, j) in g.edges():
        w[i, j] = math.exp(pot((i, j)))
    return float(np.log(np.max(np.abs(np.linalg.eigvals(w)))))


def parry_chain():
    """Golden-mean Parry measure as (stationary, transition) over symbols (a, b)."""
    pi = np.array([GOLDEN**2, 1.0]) / (GOLDEN**2 + 1)
    q = np.array([[1 / GOLDEN, 1 / GOLDEN**2], [1.0, 0.0]])
    return pi, q


def chain_cylinder(pi, q, word):
    m = pi[word[0]]
    for x, y in zip(word, word[1:]):
        m *= q[x, y]
    return float(m)
