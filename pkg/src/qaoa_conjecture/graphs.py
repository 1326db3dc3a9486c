"""Simple undirected graphs, random generators and edge-list ingestion."""
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConnectivityExhausted, InfeasibleModel, ParseError, SelfLoop, TooLarge

MAX_N = 24
MAX_ATTEMPTS = 1000

MODEL_KINDS = ("barabasi_albert", "watts_strogatz", "gnm", "regular", "file")


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``0..n-1``.

    ``edges`` is stored sorted with ``u < v``; ``adjacency[v]`` is the
    neighbour bitmask of ``v``.
    """

    n: int
    edges: tuple
    adjacency: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise SelfLoop(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            canon.add((u, v) if u < v else (v, u))
        adj = [0] * self.n
        for u, v in canon:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        object.__setattr__(self, "adjacency", tuple(adj))

    @property
    def m(self):
        return len(self.edges)

    @cached_property
    def degrees(self):
        return tuple(bin(a).count("1") for a in self.adjacency)

    @cached_property
    def edge_arrays(self):
        if not self.edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr[:, 0].copy(), arr[:, 1].copy()

    def neighbors(self, v):
        a = self.adjacency[v]
        return [u for u in range(self.n) if (a >> u) & 1]

    def has_edge(self, u, v):
        return bool((self.adjacency[u] >> v) & 1)

    def relabel(self, perm):
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of 0..n-1")
        return Graph(self.n, tuple((perm[u], perm[v]) for u, v in self.edges))

    def complement(self):
        return Graph(self.n, tuple((u, v) for u in range(self.n) for v in range(u + 1, self.n)
                                   if not self.has_edge(u, v)))


# ---------------------------------------------------------------- named graphs


def complete_graph(n):
    return Graph(n, tuple((u, v) for u in range(n) for v in range(u + 1, n)))


def cycle_graph(n):
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def star_graph(leaves):
    return Graph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def complete_bipartite(a, b):
    return Graph(a + b, tuple((i, a + j) for i in range(a) for j in range(b)))


def petersen_graph():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, tuple(outer + spokes + inner))


# ---------------------------------------------------------------- connectivity


def is_connected(g):
    if g.n == 0:
        raise ValueError("is_connected needs at least one vertex")
    seen = 1
    frontier = 1
    full = (1 << g.n) - 1
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= g.adjacency[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        seen |= nxt
    return seen == full


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class GraphModel:
    """A random-graph family.

    params by kind: barabasi_albert ``attach``; watts_strogatz ``k`` and
    ``p_rewire``; gnm ``m``; regular ``d``; file ``path``.
    """

    kind: str
    params: Mapping = field(default_factory=dict)

    def validate(self, n):
        p = self.params
        if self.kind not in MODEL_KINDS:
            raise InfeasibleModel(f"unknown model kind {self.kind!r}")
        if self.kind == "file":
            if "path" not in p:
                raise InfeasibleModel("file model needs a 'path'")
            return
        if n < 1:
            raise InfeasibleModel("n must be positive")
        if n > MAX_N:
            raise TooLarge(f"n={n} exceeds the supported maximum {MAX_N}")
        if self.kind == "barabasi_albert":
            a = int(p.get("attach", 0))
            if not 1 <= a < n:
                raise InfeasibleModel(f"barabasi_albert needs 1 <= attach < n (attach={a}, n={n})")
        elif self.kind == "watts_strogatz":
            k = int(p.get("k", 0))
            pr = float(p.get("p_rewire", -1))
            if k < 2 or k % 2 or k >= n:
                raise InfeasibleModel(f"watts_strogatz needs even 2 <= k < n (k={k}, n={n})")
            if not 0.0 <= pr <= 1.0:
                raise InfeasibleModel(f"watts_strogatz p_rewire={pr} outside [0, 1]")
        elif self.kind == "gnm":
            m = int(p.get("m", -1))
            if not n - 1 <= m <= n * (n - 1) // 2:
                raise InfeasibleModel(f"gnm needs n-1 <= m <= n(n-1)/2 for a connected graph "
                                      f"(m={m}, n={n})")
        elif self.kind == "regular":
            d = int(p.get("d", -1))
            if not 0 <= d < n or (n * d) % 2:
                raise InfeasibleModel(f"regular needs 0 <= d < n and n*d even (d={d}, n={n})")
            if d < 2 and n > d + 1:
                raise InfeasibleModel(f"{d}-regular graphs on {n} vertices are never connected")


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))


def _barabasi_albert(n, attach, rng):
    edges = [(0, i) for i in range(1, attach + 1)]
    repeated = [0] * attach + list(range(1, attach + 1))
    for v in range(attach + 1, n):
        targets = set()
        while len(targets) < attach:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        for t in sorted(targets):
            edges.append((t, v))
            repeated.extend((t, v))
    return edges


def _watts_strogatz(n, k, p_rewire, rng):
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= p_rewire:
                continue
            if len(adj[u]) >= n - 1:
                continue
            w = int(rng.integers(n))
            while w == u or w in adj[u]:
                w = int(rng.integers(n))
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    return [(u, v) for u in range(n) for v in adj[u] if u < v]


def _gnm(n, m, rng):
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    pick = rng.choice(len(pairs), size=m, replace=False)
    return [pairs[i] for i in sorted(pick.tolist())]


def _regular_try(n, d, rng):
    # Pair stubs at random; unsuitable pairs are put back and re-shuffled.
    edges = set()
    stubs = [v for v in range(n) for _ in range(d)]
    while stubs:
        potential = defaultdict(int)
        order = rng.permutation(len(stubs))
        shuffled = [stubs[i] for i in order]
        for i in range(0, len(shuffled), 2):
            s1, s2 = shuffled[i], shuffled[i + 1]
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                potential[s1] += 1
                potential[s2] += 1
        if not _suitable(edges, potential):
            return None
        stubs = [v for v, cnt in sorted(potential.items()) for _ in range(cnt)]
    return sorted(edges)


def _suitable(edges, potential):
    if not potential:
        return True
    nodes = sorted(potential)
    for i, s1 in enumerate(nodes):
        for s2 in nodes[i + 1:]:
            if (s1, s2) not in edges:
                return True
    return False


def _regular(n, d, rng):
    if d == 0:
        return []
    for _ in range(MAX_ATTEMPTS):
        edges = _regular_try(n, d, rng)
        if edges is not None:
            return edges
    raise ConnectivityExhausted(f"could not pair stubs for a {d}-regular graph on {n} vertices")


def _draw(model, n, rng):
    p = model.params
    if model.kind == "barabasi_albert":
        return _barabasi_albert(n, int(p["attach"]), rng)
    if model.kind == "watts_strogatz":
        return _watts_strogatz(n, int(p["k"]), float(p["p_rewire"]), rng)
    if model.kind == "gnm":
        return _gnm(n, int(p["m"]), rng)
    if model.kind == "regular":
        return _regular(n, int(p["d"]), rng)
    raise InfeasibleModel(f"unknown model kind {model.kind!r}")


def generate(model, n, seed):
    """Draw a connected graph; disconnected draws are redrawn with ``seed ^ attempt``."""
    model.validate(n)
    if model.kind == "file":
        g = read_edge_list(model.params["path"])
        if not is_connected(g):
            raise ConnectivityExhausted(f"{model.params['path']} is not connected")
        return g
    for attempt in range(MAX_ATTEMPTS):
        g = Graph(n, tuple(_draw(model, n, _rng(seed ^ attempt))))
        if is_connected(g):
            return g
    raise ConnectivityExhausted(
        f"{model.kind} {dict(model.params)} on n={n}: no connected draw in {MAX_ATTEMPTS} attempts")


# ---------------------------------------------------------------- edge lists


def read_edge_list(path):
    """Read a whitespace-separated edge list.

    Lines starting with ``#`` are skipped. An optional first line ``n m`` is
    treated as a header when exactly ``m`` edge lines follow and every label
    fits in ``0..n-1`` or ``1..n``. Without a header the distinct labels are
    compacted in sorted order onto ``0..k-1``.
    """
    lines = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ParseError(f"expected two integers, got {text!r}", line=lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer vertex label in {text!r}", line=lineno) from None
            if u < 0 or v < 0:
                raise ParseError(f"negative vertex label in {text!r}", line=lineno)
            lines.append((lineno, u, v))

    header = None
    if lines:
        _, hn, hm = lines[0]
        body = lines[1:]
        if hm == len(body) and hn >= 1:
            labels = [x for _, u, v in body for x in (u, v)]
            if not labels or max(labels) <= hn:
                header = (hn, hm)
                lines = body

    for lineno, u, v in lines:
        if u == v:
            raise SelfLoop(f"self-loop on vertex {u}", line=lineno)

    if header is not None:
        n = header[0]
        labels = [x for _, u, v in lines for x in (u, v)]
        offset = 1 if labels and max(labels) == n else 0
        if labels and min(labels) - offset < 0:
            raise ParseError("labels mix 0- and 1-indexing under the header", line=lines[0][0])
        edges = [(u - offset, v - offset) for _, u, v in lines]
    else:
        distinct = sorted({x for _, u, v in lines for x in (u, v)})
        index = {lab: i for i, lab in enumerate(distinct)}
        n = len(distinct)
        edges = [(index[u], index[v]) for _, u, v in lines]

    if n > MAX_N:
        raise TooLarge(f"{path}: n={n} exceeds the supported maximum {MAX_N}")
    return Graph(n, tuple(edges))


def write_edge_list(g, path):
    """Write ``g`` with an ``n m`` header and 0-indexed edges."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")
