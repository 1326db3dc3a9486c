"""Fingerprint universality, violation clusters and multi-basin detection.

A fingerprint is the tuple of a row's invariant values (rounded to 6
decimals) over a chosen invariant set. Rows sharing a fingerprint, and
the same depth, form a group; a group is universal when the population
standard deviation of every optimized angle is below ``epsilon``.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingColumn, NoViolations
from .invariants import INVARIANT_COLUMNS
from .table import beta_column, gamma_column

FINGERPRINT_DECIMALS = 6
DEFAULT_EPSILON = 1e-3
BASIN_FACTOR = 10.0

BASE_INVARIANTS = ("n", "mean_degree", "clustering", "mis_ratio")
INVARIANT_SETS = {
    "base4": BASE_INVARIANTS,
    "base4+degree_std": BASE_INVARIANTS + ("degree_std",),
    "base4+assortativity": BASE_INVARIANTS + ("assortativity",),
    "base4+degree_std+assortativity": BASE_INVARIANTS + ("degree_std", "assortativity"),
}


def _rounded(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    r = round(float(v), FINGERPRINT_DECIMALS)
    return r + 0.0  # fold -0.0 into 0.0


def fingerprint(row, invariant_set):
    """Ordered ``(column, rounded value)`` pairs; undefined values are None."""
    return tuple((c, _rounded(row.get(c))) for c in invariant_set)


def _param_columns(p):
    return [gamma_column(k) for k in range(1, p + 1)] + [beta_column(k) for k in range(1, p + 1)]


def _param_vector(row):
    return np.array(list(row.gamma_star) + list(row.beta_star_abs), dtype=float)


@dataclass
class Cluster:
    members: list  # indices into the input list
    centroid: tuple


@dataclass
class Group:
    fingerprint: tuple
    p: int
    model_kind: str  # "*" unless grouped within model
    members: list
    sigma: dict
    universal: bool
    basins: int = 1

    @property
    def multi_basin(self):
        return self.basins >= 2

    def as_dict(self):
        return {
            "fingerprint": [[c, v] for c, v in self.fingerprint],
            "p": self.p,
            "model_kind": self.model_kind,
            "members": list(self.members),
            "sigma": {k: _num(v) for k, v in self.sigma.items()},
            "universal": self.universal,
            "basins": self.basins,
        }


@dataclass
class UniversalityReport:
    invariant_set: tuple
    epsilon: float
    within_model: bool
    groups: list = field(default_factory=list)  # size >= 2 only

    @property
    def rate(self):
        """Fraction of repeated-fingerprint groups that are universal; None when there are none."""
        if not self.groups:
            return None
        return sum(g.universal for g in self.groups) / len(self.groups)

    @property
    def exceptions(self):
        return [g for g in self.groups if not g.universal]

    def as_dict(self):
        rate = self.rate
        return {
            "invariant_set": list(self.invariant_set),
            "epsilon": _num(self.epsilon),
            "within_model": self.within_model,
            "rate": None if rate is None else _num(rate),
            "n_groups": len(self.groups),
            "n_universal": sum(g.universal for g in self.groups),
            "groups": [g.as_dict() for g in self.groups],
        }


def _num(x):
    return float(format(float(x), ".12g"))


def universality(table, invariant_set=BASE_INVARIANTS, epsilon=DEFAULT_EPSILON,
                 within_model=False, depth=None):
    """Group rows by fingerprint and measure the spread of their optimized angles.

    Groups never mix depths. ``depth`` restricts the analysis to one p.
    """
    if len(table) == 0:
        raise ValueError("no rows")
    for c in invariant_set:
        if c not in INVARIANT_COLUMNS and c not in table.columns:
            raise MissingColumn(c)
    buckets = {}
    for row in table.rows:
        if depth is not None and row.p != depth:
            continue
        key = (row.p, row.model_kind if within_model else "*", fingerprint(row, invariant_set))
        buckets.setdefault(key, []).append(row)

    groups = []
    for (p, kind, fp), rows in buckets.items():
        if len(rows) < 2:
            continue
        rows = sorted(rows, key=lambda r: r.instance_id)
        params = np.array([_param_vector(r) for r in rows])
        sig = params.std(axis=0)  # population sigma
        sigma = dict(zip(_param_columns(p), (float(s) for s in sig)))
        universal = bool(np.all(sig < epsilon))
        basins = len(basin_detect(list(params), epsilon))
        groups.append(Group(fp, p, kind, [r.instance_id for r in rows], sigma, universal, basins))
    groups.sort(key=lambda g: (g.p, g.model_kind, g.members))
    return UniversalityReport(tuple(invariant_set), epsilon, within_model, groups)


def basin_detect(params, epsilon=DEFAULT_EPSILON):
    """Single-linkage clusters of parameter vectors at distance threshold 10*epsilon.

    Vectors are compared as reported, with no periodic wrapping or
    symmetry folding. Returns clusters in order of their first member.
    """
    pts = np.array([np.asarray(x, dtype=float) for x in params])
    k = len(pts)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    threshold = BASIN_FACTOR * epsilon
    for i in range(k):
        for j in range(i + 1, k):
            if np.linalg.norm(pts[i] - pts[j]) <= threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    members = {}
    for i in range(k):
        members.setdefault(find(i), []).append(i)
    return [Cluster(idx, tuple(float(x) for x in pts[idx].mean(axis=0)))
            for _, idx in sorted(members.items())]


@dataclass
class ViolationCluster:
    statement: str
    violators: list
    shared: dict  # column -> (all equal?, value or None)
    fingerprints: list
    sigma: dict

    @property
    def common_fingerprint(self):
        """The fingerprint every violator shares, or None."""
        return self.fingerprints[0] if len(set(self.fingerprints)) == 1 else None

    def as_dict(self):
        fp = self.common_fingerprint
        return {
            "statement": self.statement,
            "violators": list(self.violators),
            "shared": {c: {"shared": s, "value": v} for c, (s, v) in self.shared.items()},
            "fingerprints": [[[c, v] for c, v in f] for f in self.fingerprints],
            "common_fingerprint": None if fp is None else [[c, v] for c, v in fp],
            "sigma": {k: _num(v) for k, v in self.sigma.items()},
        }


def violation_cluster(conj, table, invariant_set=BASE_INVARIANTS):
    """Describe what the rows violating ``conj`` have in common."""
    if not conj.violations:
        raise NoViolations(conj.statement)
    by_id = {r.instance_id: r for r in table.rows}
    missing = [i for i in conj.violations if i not in by_id]
    if missing:
        raise KeyError(f"violators not in table: {missing}")
    rows = [by_id[i] for i in sorted(conj.violations)]
    shared = {}
    for c in INVARIANT_COLUMNS:
        values = {_rounded(r.get(c)) for r in rows}
        shared[c] = (len(values) == 1, values.pop() if len(values) == 1 else None)
    pmin = min(r.p for r in rows)
    params = np.array([_param_vector(r)[:pmin].tolist() + _param_vector(r)[r.p:r.p + pmin].tolist()
                       for r in rows])
    sigma = dict(zip(_param_columns(pmin), (float(s) for s in params.std(axis=0))))
    return ViolationCluster(conj.statement, [r.instance_id for r in rows], shared,
                            [fingerprint(r, invariant_set) for r in rows], sigma)


# ---------------------------------------------------------------- reports


def analysis_summary(reports, clusters):
    """Machine-readable summary of named universality reports and violation clusters."""
    return {
        "universality": {name: rep.as_dict() for name, rep in reports.items()},
        "violations": [c.as_dict() for c in clusters],
        "exceptions": sum(len(rep.exceptions) for rep in reports.values()),
    }


def write_summary(summary, path):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_report(reports, clusters):
    """Plain-text tables: one per invariant set, then violation clusters."""
    lines = []
    for name, rep in reports.items():
        rate = rep.rate
        rate_text = "n/a" if rate is None else f"{rate:.4f}"
        lines.append(f"== {name} (epsilon={rep.epsilon:g}, within_model={rep.within_model})")
        lines.append(f"groups={len(rep.groups)} universal={len(rep.groups) - len(rep.exceptions)} "
                     f"rate={rate_text}")
        cols = list(rep.invariant_set)
        lines.append("\t".join(["p", "model"] + cols + ["size", "max_sigma", "universal",
                                                         "basins"]))
        for g in rep.groups:
            vals = ["" if v is None else f"{v:.3f}" for _, v in g.fingerprint]
            lines.append("\t".join([str(g.p), g.model_kind] + vals + [
                str(len(g.members)), f"{max(g.sigma.values()):.3e}",
                "yes" if g.universal else "no", str(g.basins)]))
        lines.append("")
    lines.append("== violations")
    for c in clusters:
        lines.append(c.statement)
        lines.append("  violators: " + ", ".join(c.violators))
        shared = [f"{k}={v:g}" for k, (s, v) in c.shared.items() if s and v is not None]
        lines.append("  shared: " + (", ".join(shared) if shared else "none"))
    return "\n".join(lines) + "\n"
