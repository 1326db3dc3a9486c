"""Exact graph invariants used as knowledge-table features.

All real-valued invariants are computed from integer counts with exact
rational arithmetic and converted to float once, so the results are
bit-identical under any relabelling of the vertices.
"""
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

from .errors import NoEdges, TooLarge
from .graphs import MAX_N


def _popcount(x):
    return bin(x).count("1")


@dataclass(frozen=True)
class InvariantVector:
    n: int
    m: int
    mean_degree: float
    clustering: float
    chromatic: int
    mis_ratio: float
    assortativity: Optional[float]  # None: undefined (zero degree variance over edge ends)
    degree_std: float

    def as_dict(self):
        return asdict(self)


INVARIANT_COLUMNS = ("n", "m", "mean_degree", "clustering", "chromatic", "mis_ratio",
                     "assortativity", "degree_std")


def _check_size(g):
    if g.n > MAX_N:
        raise TooLarge(f"n={g.n} exceeds the supported maximum {MAX_N}")


def triangles(g):
    """Number of triangles through each vertex."""
    adj = g.adjacency
    out = []
    for v in range(g.n):
        twice = 0
        a = adj[v]
        while a:
            low = a & -a
            twice += _popcount(adj[low.bit_length() - 1] & adj[v])
            a ^= low
        out.append(twice // 2)
    return out


def mean_clustering(g):
    if g.n < 1:
        raise ValueError("mean_clustering needs at least one vertex")
    total = Fraction(0)
    for d, t in zip(g.degrees, triangles(g)):
        if d >= 2:
            total += Fraction(2 * t, d * (d - 1))
    return float(total / g.n)


def degree_std(g):
    if g.n < 1:
        raise ValueError("degree_std needs at least one vertex")
    s1 = sum(g.degrees)
    s2 = sum(d * d for d in g.degrees)
    return math.sqrt(Fraction(g.n * s2 - s1 * s1, g.n * g.n))


def degree_assortativity(g):
    """Pearson correlation of endpoint degrees over both orientations of each edge.

    Returns None when the endpoint-degree variance is zero.
    """
    if g.m == 0:
        raise NoEdges("assortativity is undefined on a graph without edges")
    deg = g.degrees
    # Over the 2m oriented pairs both marginals are the same distribution.
    pairs = 2 * g.m
    sx = sum(d * d for d in deg)
    sxx = sum(d ** 3 for d in deg)
    sxy = 2 * sum(deg[u] * deg[v] for u, v in g.edges)
    var = pairs * sxx - sx * sx
    if var == 0:
        return None
    return float(Fraction(pairs * sxy - sx * sx, var))


# ---------------------------------------------------------------- independence


def _clique_cover_bound(cand, adj):
    """Greedy partition of ``cand`` into cliques; an independent set uses one vertex of each."""
    count = 0
    rest = cand
    while rest:
        low = rest & -rest
        v = low.bit_length() - 1
        clique_ok = adj[v] & rest
        rest ^= low
        while clique_ok:
            low = clique_ok & -clique_ok
            u = low.bit_length() - 1
            rest &= ~low
            clique_ok &= adj[u]
        count += 1
    return count


def max_independent_set(g):
    """A maximum independent set as a bitmask (bitset branch and bound)."""
    _check_size(g)
    adj = g.adjacency
    n = g.n
    best = [0, 0]  # size, mask

    def expand(cand, size, chosen):
        # Forced moves: vertices with no neighbour among the candidates.
        while True:
            free = 0
            c = cand
            while c:
                low = c & -c
                v = low.bit_length() - 1
                if not adj[v] & cand:
                    free |= low
                c ^= low
            if not free:
                break
            size += _popcount(free)
            chosen |= free
            cand &= ~free
        if not cand:
            if size > best[0]:
                best[0], best[1] = size, chosen
            return
        if size + _clique_cover_bound(cand, adj) <= best[0]:
            return
        # branch on the candidate of maximum residual degree
        pick, pick_deg = -1, -1
        c = cand
        while c:
            low = c & -c
            v = low.bit_length() - 1
            dv = _popcount(adj[v] & cand)
            if dv > pick_deg:
                pick, pick_deg = v, dv
            c ^= low
        bit = 1 << pick
        expand(cand & ~bit & ~adj[pick], size + 1, chosen | bit)
        expand(cand & ~bit, size, chosen)

    expand((1 << n) - 1, 0, 0)
    return best[1]


def independence_number(g):
    if g.n == 0:
        return 0
    return _popcount(max_independent_set(g))


def clique_number(g):
    if g.n == 0:
        return 0
    return independence_number(g.complement())


# ---------------------------------------------------------------- chromatic


def dsatur_coloring(g):
    """Greedy DSATUR colouring; returns a colour per vertex."""
    n = g.n
    adj = g.adjacency
    colors = [-1] * n
    class_masks = []
    for _ in range(n):
        best_v, best_key = -1, None
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = sum(1 for cm in class_masks if adj[v] & cm)
            key = (sat, g.degrees[v], -v)
            if best_key is None or key > best_key:
                best_v, best_key = v, key
        v = best_v
        for c, cm in enumerate(class_masks):
            if not adj[v] & cm:
                colors[v] = c
                class_masks[c] |= 1 << v
                break
        else:
            colors[v] = len(class_masks)
            class_masks.append(1 << v)
    return colors


def chromatic_number(g):
    """Exact chromatic number by DSATUR branch and bound.

    Lower bound: clique number; upper bound: greedy DSATUR colouring.
    """
    _check_size(g)
    n = g.n
    if n == 0:
        return 0
    if g.m == 0:
        return 1
    adj = g.adjacency
    lower = clique_number(g)
    best = [max(dsatur_coloring(g)) + 1]
    if best[0] == lower:
        return lower

    colors = [-1] * n
    class_masks = []
    uncolored = [(1 << n) - 1]

    def pick_vertex():
        best_v, best_key = -1, None
        u = uncolored[0]
        while u:
            low = u & -u
            v = low.bit_length() - 1
            sat = 0
            for cm in class_masks:
                if adj[v] & cm:
                    sat += 1
            key = (sat, _popcount(adj[v] & uncolored[0]))
            if best_key is None or key > best_key:
                best_v, best_key = v, key
            u ^= low
        return best_v

    def search(done):
        if len(class_masks) >= best[0]:
            return False
        if done == n:
            best[0] = len(class_masks)
            return best[0] == lower
        v = pick_vertex()
        bit = 1 << v
        uncolored[0] ^= bit
        for c in range(len(class_masks)):
            if not adj[v] & class_masks[c]:
                class_masks[c] |= bit
                colors[v] = c
                stop = search(done + 1)
                class_masks[c] ^= bit
                if stop:
                    return True
        if len(class_masks) + 1 < best[0]:
            class_masks.append(bit)
            colors[v] = len(class_masks) - 1
            stop = search(done + 1)
            class_masks.pop()
            if stop:
                return True
        colors[v] = -1
        uncolored[0] |= bit
        return False

    search(0)
    return best[0]


def invariant_vector(g):
    _check_size(g)
    if g.n < 1:
        raise ValueError("invariant_vector needs at least one vertex")
    return InvariantVector(
        n=g.n,
        m=g.m,
        mean_degree=2 * g.m / g.n,
        clustering=mean_clustering(g),
        chromatic=chromatic_number(g),
        mis_ratio=independence_number(g) / g.n,
        assortativity=degree_assortativity(g) if g.m else None,
        degree_std=degree_std(g),
    )
