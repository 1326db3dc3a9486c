"""Bounded Nelder-Mead maximisation of the QAOA expectation."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInit
from .maxcut import maxcut_bruteforce
from .qaoa import BETA_MAX, GAMMA_MAX, QaoaParams, Simulator

REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5
SIMPLEX_STEP = 0.05  # initial edge length as a fraction of each interval width

DEFAULT_RESTARTS = 5
DEFAULT_TOL = 1e-8


@dataclass
class NelderMeadResult:
    point: np.ndarray
    value: float
    obj_calls: int
    iterations: int
    converged: bool


def nelder_mead(objective, bounds, init, tol=DEFAULT_TOL, max_iters=1000):
    """Maximise ``objective`` over a box.

    The simplex moves freely; every candidate is clipped to ``bounds``
    before it is evaluated, and the returned point is the clipped best
    vertex. Stops once the spread of simplex values drops below ``tol``
    (checked after each iteration) or after ``max_iters`` iterations.
    """
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    x0 = np.array(init, dtype=float)
    if x0.shape != lo.shape:
        raise InvalidInit(f"init has {x0.size} coordinates, bounds have {lo.size}")
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise InvalidInit(f"init {x0.tolist()} outside bounds")
    if not tol > 0:
        raise ValueError("tol must be positive")

    calls = 0

    def f(x):
        # minimise the negated objective
        nonlocal calls
        calls += 1
        return -float(objective(np.clip(x, lo, hi)))

    dim = x0.size
    simplex = [x0]
    for i in range(dim):
        x = x0.copy()
        step = SIMPLEX_STEP * (hi[i] - lo[i])
        x[i] = x[i] + step if x[i] + step <= hi[i] else x[i] - step
        simplex.append(x)
    simplex = np.array(simplex)
    values = np.array([f(x) for x in simplex])

    iterations = 0
    converged = False
    while iterations < max_iters:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        iterations += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + REFLECT * (centroid - worst)
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + EXPAND * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr < values[-1]:
                xc = centroid + CONTRACT * (xr - centroid)
                fc = f(xc)
                accept = fc <= fr
            else:
                xc = centroid + CONTRACT * (worst - centroid)
                fc = f(xc)
                accept = fc < values[-1]
            if accept:
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, dim + 1):
                    simplex[i] = simplex[0] + SHRINK * (simplex[i] - simplex[0])
                    values[i] = f(simplex[i])

        if values.max() - values.min() < tol:
            converged = True
            break

    best = int(np.argmin(values))
    return NelderMeadResult(point=np.clip(simplex[best], lo, hi), value=-float(values[best]),
                            obj_calls=calls, iterations=iterations, converged=converged)


@dataclass(frozen=True)
class OptResult:
    params: QaoaParams
    value: float
    maxcut: int
    ratio: float
    obj_calls: int
    seed: int
    converged: bool
    restart: int  # index of the winning restart


def qaoa_bounds(p):
    return [(0.0, GAMMA_MAX)] * p + [(0.0, BETA_MAX)] * p


def initial_point(seed, restart, p):
    """Uniform draw from the admissible box, keyed by (seed, restart)."""
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(restart)])
    rng = np.random.Generator(np.random.Philox(key))
    u = rng.random(2 * p)
    hi = np.array([GAMMA_MAX] * p + [BETA_MAX] * p)
    return u * hi


def default_max_iters(p):
    return 500 * 2 * p


def optimize_qaoa(g, p, seed, restarts=DEFAULT_RESTARTS, tol=DEFAULT_TOL, max_iters=None,
                  simulator=None, maxcut=None):
    """Best of ``restarts`` Nelder-Mead runs from seeded uniform initial points.

    Parameters are reported exactly as the optimizer returns them (no
    periodic wrapping). Equal values keep the earliest restart.
    """
    if p < 1:
        raise ValueError("depth p must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if max_iters is None:
        max_iters = default_max_iters(p)
    sim = simulator if simulator is not None else Simulator(g)
    if maxcut is None:
        maxcut = maxcut_bruteforce(g).value
    bounds = qaoa_bounds(p)

    def objective(x):
        return sim.value(x[:p], x[p:])

    best = None
    best_index = -1
    total_calls = 0
    for r in range(restarts):
        res = nelder_mead(objective, bounds, initial_point(seed, r, p), tol=tol,
                          max_iters=max_iters)
        total_calls += res.obj_calls
        if best is None or res.value > best.value:
            best, best_index = res, r

    params = QaoaParams.from_vector(best.point)
    ratio = best.value / maxcut if maxcut else math.nan
    return OptResult(params=params, value=best.value, maxcut=maxcut, ratio=ratio,
                     obj_calls=total_calls, seed=int(seed), converged=best.converged,
                     restart=best_index)
