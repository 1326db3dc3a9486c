"""Exact MaxCut by exhaustive enumeration."""
from dataclasses import dataclass

from . import kernels
from .errors import LengthMismatch, TooLarge
from .graphs import MAX_N


@dataclass(frozen=True)
class CutResult:
    value: int
    witness: tuple  # b_0..b_{n-1}, b_0 == 0


def cut_value(g, b):
    """Number of edges whose endpoints get different bits in ``b``."""
    if isinstance(b, str):
        b = [int(ch) for ch in b]
    if len(b) != g.n:
        raise LengthMismatch(f"bitstring has length {len(b)}, graph has {g.n} vertices")
    return sum(1 for u, v in g.edges if b[u] != b[v])


def bits_of(index, n):
    """Bit tuple (b_0, ..., b_{n-1}) of a basis index; vertex v is bit v."""
    return tuple((index >> v) & 1 for v in range(n))


def maxcut_bruteforce(g):
    """Maximum cut over all assignments with b_0 fixed to 0.

    Gray-code enumeration flips one vertex per step. Among optimal
    assignments the lexicographically smallest ``(b_0, ..., b_{n-1})`` is
    returned.
    """
    if g.n > MAX_N:
        raise TooLarge(f"n={g.n} exceeds the supported maximum {MAX_N}")
    eu, ev = g.edge_arrays
    value, mask = kernels.maxcut(g.n, eu, ev)
    return CutResult(value=int(value), witness=bits_of(mask, g.n))
