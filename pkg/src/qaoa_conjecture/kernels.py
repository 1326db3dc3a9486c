"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Both implementations are always importable as ``*_numpy`` / ``*_numba``;
the unsuffixed names dispatch to whichever backend is active. Set
``QAOA_CONJECTURE_NO_NUMBA=1`` before import to force the numpy path
(also used automatically when numba is not installed).
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = os.environ.get("QAOA_CONJECTURE_NO_NUMBA", "").strip().lower()
USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------- numpy path


def cost_diagonal_numpy(n, eu, ev):
    """Cut value of every basis index; bit v of the index is vertex v."""
    idx = np.arange(1 << n, dtype=np.int64)
    cost = np.zeros(1 << n, dtype=np.int64)
    for u, v in zip(eu.tolist(), ev.tolist()):
        cost += ((idx >> u) ^ (idx >> v)) & 1
    return cost


def apply_phase_numpy(state, cost, gamma):
    table = np.exp(-1j * gamma * np.arange(cost.max(initial=0) + 1))
    state *= table[cost]


def apply_mixer_numpy(state, n, beta):
    c = np.cos(beta)
    ms = -1j * np.sin(beta)
    for q in range(n):
        view = state.reshape(-1, 2, 1 << q)
        a0 = view[:, 0, :].copy()
        a1 = view[:, 1, :]
        view[:, 0, :] = c * a0 + ms * a1
        view[:, 1, :] = ms * a0 + c * a1


def expectation_numpy(state, cost):
    prob = state.real ** 2 + state.imag ** 2
    return float(np.dot(prob, cost))


def qaoa_value_numpy(cost, n, gammas, betas):
    state = np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)
    for gamma, beta in zip(gammas, betas):
        apply_phase_numpy(state, cost, gamma)
        apply_mixer_numpy(state, n, beta)
    return expectation_numpy(state, cost)


def _reverse_bits(x, n):
    r = 0
    for _ in range(n):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


def maxcut_numpy(n, eu, ev):
    """Best cut with vertex 0 fixed on side 0; ties -> lexicographically smallest b."""
    if n <= 1:
        return 0, 0
    half = 1 << (n - 1)
    idx = np.arange(half, dtype=np.int64) << 1
    cost = np.zeros(half, dtype=np.int64)
    for u, v in zip(eu.tolist(), ev.tolist()):
        cost += ((idx >> u) ^ (idx >> v)) & 1
    best = int(cost.max())
    ties = idx[cost == best].tolist()
    witness = min(ties, key=lambda x: _reverse_bits(x, n))
    return best, witness


# ---------------------------------------------------------------- numba path


def _cost_diagonal_loops(n, eu, ev):
    size = 1 << n
    cost = np.zeros(size, dtype=np.int64)
    for e in range(eu.shape[0]):
        u = eu[e]
        v = ev[e]
        for b in range(size):
            cost[b] += ((b >> u) ^ (b >> v)) & 1
    return cost


def _apply_phase_loops(state, cost, gamma):
    top = 0
    for b in range(cost.shape[0]):
        if cost[b] > top:
            top = cost[b]
    table = np.empty(top + 1, dtype=np.complex128)
    for k in range(top + 1):
        table[k] = np.cos(gamma * k) - 1j * np.sin(gamma * k)
    for b in range(state.shape[0]):
        state[b] *= table[cost[b]]


def _apply_mixer_loops(state, n, beta):
    c = np.cos(beta)
    ms = -1j * np.sin(beta)
    size = state.shape[0]
    for q in range(n):
        stride = 1 << q
        for base in range(0, size, 2 * stride):
            for j in range(base, base + stride):
                a0 = state[j]
                a1 = state[j + stride]
                state[j] = c * a0 + ms * a1
                state[j + stride] = ms * a0 + c * a1


def _expectation_loops(state, cost):
    total = 0.0
    for b in range(state.shape[0]):
        a = state[b]
        total += (a.real * a.real + a.imag * a.imag) * cost[b]
    return total


def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def _reverse_bits_loop(x, n):
    r = 0
    for _ in range(n):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


def _maxcut_gray_loops(n, adj, deg):
    # Gray-code walk over bits 1..n-1 (vertex 0 pinned to side 0).
    if n <= 1:
        return 0, 0
    mask = 0
    cut = 0
    best = 0
    best_mask = 0
    best_key = 0
    full = (1 << n) - 1
    for k in range(1, 1 << (n - 1)):
        t = k
        bit = 0
        while (t & 1) == 0:
            t >>= 1
            bit += 1
        v = bit + 1
        if (mask >> v) & 1:
            same = _popcount(adj[v] & mask)
        else:
            same = _popcount(adj[v] & (full ^ mask))
        cut += 2 * same - deg[v]
        mask ^= 1 << v
        if cut > best:
            best = cut
            best_mask = mask
            best_key = _reverse_bits_loop(mask, n)
        elif cut == best:
            key = _reverse_bits_loop(mask, n)
            if key < best_key:
                best_mask = mask
                best_key = key
    return best, best_mask


cost_diagonal_numba = _njit(_cost_diagonal_loops)
apply_phase_numba = _njit(_apply_phase_loops)
apply_mixer_numba = _njit(_apply_mixer_loops)
expectation_numba = _njit(_expectation_loops)
if numba is not None:
    _popcount = _njit(_popcount)
    _reverse_bits_loop = _njit(_reverse_bits_loop)
_maxcut_gray_numba = _njit(_maxcut_gray_loops)


@_njit
def _qaoa_value_fused(cost, n, gammas, betas):
    state = np.empty(1 << n, dtype=np.complex128)
    amp = 2.0 ** (-n / 2.0)
    for b in range(state.shape[0]):
        state[b] = amp
    for k in range(gammas.shape[0]):
        apply_phase_numba(state, cost, gammas[k])
        apply_mixer_numba(state, n, betas[k])
    return expectation_numba(state, cost)


def qaoa_value_numba(cost, n, gammas, betas):
    return float(_qaoa_value_fused(cost, n, np.asarray(gammas, dtype=np.float64),
                                   np.asarray(betas, dtype=np.float64)))


def maxcut_numba(n, eu, ev):
    adj = np.zeros(max(n, 1), dtype=np.int64)
    for u, v in zip(eu.tolist(), ev.tolist()):
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    deg = np.array([bin(int(a)).count("1") for a in adj], dtype=np.int64)
    best, mask = _maxcut_gray_numba(n, adj, deg)
    return int(best), int(mask)


# ---------------------------------------------------------------- dispatch

if USE_NUMBA:
    cost_diagonal = cost_diagonal_numba
    apply_phase = apply_phase_numba
    apply_mixer = apply_mixer_numba
    expectation = expectation_numba
    qaoa_value = qaoa_value_numba
    maxcut = maxcut_numba
else:
    cost_diagonal = cost_diagonal_numpy
    apply_phase = apply_phase_numpy
    apply_mixer = apply_mixer_numpy
    expectation = expectation_numpy
    qaoa_value = qaoa_value_numpy
    maxcut = maxcut_numpy
