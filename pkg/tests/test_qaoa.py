import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from qaoa_conjecture import kernels
from qaoa_conjecture.errors import InvalidParams, TooLarge
from qaoa_conjecture.graphs import Graph, complete_graph, cycle_graph, petersen_graph
from qaoa_conjecture.qaoa import QaoaParams, Simulator, cost_diagonal, evolve, expectation


def dense_state(g, params):
    """Reference evolution with explicit 2^n x 2^n unitaries."""
    n = g.n
    cost = np.array([sum(((b >> u) ^ (b >> v)) & 1 for u, v in g.edges)
                     for b in range(1 << n)], dtype=float)
    state = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
    for gamma, beta in zip(params.gamma, params.beta):
        phase = np.diag(np.exp(-1j * gamma * cost))
        rx = np.array([[math.cos(beta), -1j * math.sin(beta)],
                       [-1j * math.sin(beta), math.cos(beta)]])
        mixer = np.array([[1.0]])
        for _ in range(n):
            mixer = np.kron(mixer, rx)
        state = mixer @ (phase @ state)
    return state


def edge_expectation_p1(g, u, v, gamma, beta):
    """Closed-form p=1 expectation of one edge term."""
    du, dv = len(g.neighbors(u)) - 1, len(g.neighbors(v)) - 1
    lam = len(set(g.neighbors(u)) & set(g.neighbors(v)))
    c = math.cos(gamma)
    return (0.5 + 0.25 * math.sin(4 * beta) * math.sin(gamma) * (c ** du + c ** dv)
            - 0.25 * math.sin(2 * beta) ** 2 * c ** (du + dv - 2 * lam)
            * (1 - math.cos(2 * gamma) ** lam))


def test_cost_diagonal_k2():
    assert cost_diagonal(complete_graph(2)).tolist() == [0, 1, 1, 0]


def test_k2_optimum_state():
    g = complete_graph(2)
    params = QaoaParams((math.pi / 2,), (math.pi / 8,))
    assert expectation(g, params) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(1, 7)))
    p = int(rng.integers(1, 4))
    params = QaoaParams(tuple(rng.uniform(0, math.pi, p)), tuple(rng.uniform(0, math.pi / 2, p)))
    assert np.max(np.abs(evolve(g, params) - dense_state(g, params))) < 1e-10


@pytest.mark.parametrize("seed", range(6))
def test_analytic_p1(seed):
    rng = np.random.default_rng(50 + seed)
    g = random_graph(rng, int(rng.integers(3, 9)), density=0.5)
    gamma, beta = rng.uniform(0, math.pi), rng.uniform(0, math.pi / 2)
    expected = sum(edge_expectation_p1(g, u, v, gamma, beta) for u, v in g.edges)
    assert Simulator(g).value([gamma], [beta]) == pytest.approx(expected, abs=1e-10)


def test_gamma_zero_gives_half_the_edges():
    g = petersen_graph()
    for beta in (0.0, 0.3, math.pi / 2):
        params = QaoaParams((0.0, 0.0), (beta, 0.1))
        assert abs(expectation(g, params) - g.m / 2) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
def test_relabel_invariance(n, seed, rnd):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    perm = list(range(n))
    rnd.shuffle(perm)
    params = QaoaParams(tuple(rng.uniform(0, math.pi, 2)), tuple(rng.uniform(0, math.pi / 2, 2)))
    assert abs(expectation(g, params) - expectation(g.relabel(perm), params)) < 1e-12


def test_norm_is_preserved():
    g = cycle_graph(9)
    state = evolve(g, QaoaParams((0.4, 1.1, 2.9), (0.2, 0.7, 1.5)))
    assert abs(np.vdot(state, state).real - 1) < 1e-10


@pytest.mark.parametrize("gamma,beta", [((-0.1,), (0.1,)), ((0.1,), (1.6,)),
                                        ((0.1, 0.2), (0.1,)), ((), ())])
def test_invalid_params(gamma, beta):
    with pytest.raises(InvalidParams):
        QaoaParams(gamma, beta)


def test_too_large():
    with pytest.raises(TooLarge):
        Simulator(Graph(25, ()))


def test_simulator_matches_module_functions():
    g = petersen_graph()
    params = QaoaParams((0.5, 1.2), (0.3, 0.1))
    sim = Simulator(g)
    assert sim.expectation(params) == pytest.approx(expectation(g, params), abs=1e-12)
    assert np.allclose(sim.evolve(params), evolve(g, params), atol=1e-14)


def test_backends_agree():
    rng = np.random.default_rng(8)
    for n in (1, 4, 9, 12):
        g = random_graph(rng, n)
        eu, ev = g.edge_arrays
        c_np = kernels.cost_diagonal_numpy(n, eu, ev)
        assert np.array_equal(c_np, kernels.cost_diagonal_numba(n, eu, ev))
        gammas, betas = rng.uniform(0, 3, 3), rng.uniform(0, 1.5, 3)
        a = kernels.qaoa_value_numpy(c_np, n, gammas, betas)
        b = kernels.qaoa_value_numba(c_np, n, gammas, betas)
        assert a == pytest.approx(b, abs=1e-11)
        s1 = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
        s2 = s1.copy()
        kernels.apply_phase_numpy(s1, c_np, 0.7)
        kernels.apply_phase_numba(s2, c_np, 0.7)
        kernels.apply_mixer_numpy(s1, n, 0.4)
        kernels.apply_mixer_numba(s2, n, 0.4)
        assert np.max(np.abs(s1 - s2)) < 1e-14
        assert kernels.expectation_numpy(s1, c_np) == pytest.approx(
            kernels.expectation_numba(s2, c_np), abs=1e-12)


def test_numpy_backend_flag():
    code = "from qaoa_conjecture import kernels; print(kernels.BACKEND)"
    env = {"QAOA_CONJECTURE_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "numpy"
