"""Statevector simulation of depth-p QAOA for MaxCut."""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidParams, TooLarge
from .graphs import MAX_N

GAMMA_MAX = math.pi
BETA_MAX = math.pi / 2
NORM_TOL = 1e-10


@dataclass(frozen=True)
class QaoaParams:
    gamma: tuple
    beta: tuple

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(x) for x in self.gamma))
        object.__setattr__(self, "beta", tuple(float(x) for x in self.beta))
        if len(self.gamma) != len(self.beta) or not self.gamma:
            raise InvalidParams("gamma and beta must be non-empty and of equal length")
        for g in self.gamma:
            if not 0.0 <= g <= GAMMA_MAX:
                raise InvalidParams(f"gamma={g!r} outside [0, pi]")
        for b in self.beta:
            if not 0.0 <= b <= BETA_MAX:
                raise InvalidParams(f"beta={b!r} outside [0, pi/2]")

    @property
    def p(self):
        return len(self.gamma)

    @classmethod
    def from_vector(cls, x):
        x = list(x)
        p = len(x) // 2
        return cls(tuple(x[:p]), tuple(x[p:]))

    def as_vector(self):
        return np.array(self.gamma + self.beta)


def _check_size(g):
    if g.n > MAX_N:
        raise TooLarge(f"n={g.n} exceeds the supported maximum {MAX_N}")


def cost_diagonal(g):
    """Eigenvalues of the MaxCut cost Hamiltonian in the computational basis."""
    _check_size(g)
    eu, ev = g.edge_arrays
    return kernels.cost_diagonal(g.n, eu, ev)


def evolve(g, params, cost=None, check_norm=True):
    """QAOA statevector |gamma, beta> as a complex array of length 2**n."""
    _check_size(g)
    if not isinstance(params, QaoaParams):
        raise InvalidParams("params must be a QaoaParams")
    if cost is None:
        cost = cost_diagonal(g)
    state = np.full(1 << g.n, 2.0 ** (-g.n / 2), dtype=np.complex128)
    for gamma, beta in zip(params.gamma, params.beta):
        kernels.apply_phase(state, cost, gamma)
        kernels.apply_mixer(state, g.n, beta)
        if check_norm:
            norm = float(np.vdot(state, state).real)
            if abs(norm - 1.0) >= NORM_TOL:
                raise FloatingPointError(f"statevector norm drifted to {norm!r}")
    return state


def expectation(g, params, cost=None):
    """Expected cut value <H_C> in the QAOA state."""
    if cost is None:
        cost = cost_diagonal(g)
    state = evolve(g, params, cost=cost)
    return kernels.expectation(state, cost)


class Simulator:
    """Caches the cost diagonal of one graph for repeated evaluations."""

    def __init__(self, g):
        _check_size(g)
        self.graph = g
        self.cost = cost_diagonal(g)

    def value(self, gamma, beta):
        """Expectation for raw angle sequences (no range validation)."""
        return kernels.qaoa_value(self.cost, self.graph.n, gamma, beta)

    def expectation(self, params):
        return self.value(params.gamma, params.beta)

    def evolve(self, params, check_norm=True):
        return evolve(self.graph, params, cost=self.cost, check_norm=check_norm)
