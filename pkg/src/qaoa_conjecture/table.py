"""The knowledge table: one row per (graph, depth) instance, CSV persistence.

Column contract (in file order)::

    instance_id, graph_id, model_kind, seed, p,
    n, m, mean_degree, clustering, chromatic, mis_ratio, assortativity, degree_std,
    maxcut, expectation, ratio, obj_calls,
    gamma_1..gamma_P, beta_1..beta_P,      # P = largest depth in the table
    <extra columns, in the order they were appended>

``beta_k`` holds |beta*_k|. Undefined values (assortativity of graphs with
constant endpoint degree, layers beyond a row's depth) are empty cells.
Reals are written with 17 significant digits, so ``load(save(t))`` is
exact.
"""
import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import MissingColumn, ParseError
from .invariants import INVARIANT_COLUMNS, InvariantVector, invariant_vector
from .maxcut import maxcut_bruteforce
from .optimizer import DEFAULT_RESTARTS, DEFAULT_TOL, optimize_qaoa
from .qaoa import Simulator

ID_COLUMNS = ("instance_id", "graph_id", "model_kind", "seed", "p")
RESULT_COLUMNS = ("maxcut", "expectation", "ratio", "obj_calls")
INT_COLUMNS = {"seed", "p", "n", "m", "chromatic", "maxcut", "obj_calls"}


def gamma_column(k):
    return f"gamma_{k}"


def beta_column(k):
    return f"beta_{k}"


def instance_id_for(graph_id, p):
    return f"{graph_id}/p{p}"


@dataclass(frozen=True)
class OptimizerSettings:
    restarts: int = DEFAULT_RESTARTS
    tol: float = DEFAULT_TOL
    max_iters: int = None  # None: 500 * 2p


@dataclass(frozen=True)
class KnowledgeRow:
    instance_id: str
    graph_id: str
    model_kind: str
    seed: int
    p: int
    invariants: InvariantVector
    gamma_star: tuple
    beta_star_abs: tuple
    expectation: float
    maxcut: int
    ratio: float
    obj_calls: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.gamma_star) != self.p or len(self.beta_star_abs) != self.p:
            raise ValueError("gamma_star and beta_star_abs must have one entry per layer")

    def get(self, column):
        """Value of a column; None when undefined on this row."""
        if column in self.extra:
            return self.extra[column]
        if column in INVARIANT_COLUMNS:
            return getattr(self.invariants, column)
        if column in ("instance_id", "graph_id", "model_kind", "seed", "p", "expectation",
                      "maxcut", "ratio", "obj_calls"):
            return getattr(self, column)
        for prefix, values in (("gamma_", self.gamma_star), ("beta_", self.beta_star_abs)):
            if column.startswith(prefix) and column[len(prefix):].isdigit():
                k = int(column[len(prefix):])
                return values[k - 1] if 1 <= k <= self.p else None
        raise MissingColumn(column)


def build_row(g, p, seed, settings=None, graph_id="g", model_kind="unknown", simulator=None,
              maxcut=None, invariants=None):
    """Simulate and optimise one instance and assemble its row."""
    settings = settings or OptimizerSettings()
    inv = invariants if invariants is not None else invariant_vector(g)
    mc = maxcut if maxcut is not None else maxcut_bruteforce(g).value
    sim = simulator if simulator is not None else Simulator(g)
    res = optimize_qaoa(g, p, seed, restarts=settings.restarts, tol=settings.tol,
                        max_iters=settings.max_iters, simulator=sim, maxcut=mc)
    return KnowledgeRow(
        instance_id=instance_id_for(graph_id, p),
        graph_id=graph_id,
        model_kind=model_kind,
        seed=int(seed),
        p=p,
        invariants=inv,
        gamma_star=res.params.gamma,
        beta_star_abs=tuple(abs(b) for b in res.params.beta),
        expectation=res.value,
        maxcut=mc,
        ratio=res.value / mc,
        obj_calls=res.obj_calls,
    )


class KnowledgeTable:
    """Ordered rows plus the list of numeric columns visible to the conjecture engine."""

    def __init__(self, rows=(), extra_columns=()):
        self.rows = list(rows)
        self.extra_columns = list(extra_columns)
        ids = [r.instance_id for r in self.rows]
        if len(set(ids)) != len(ids):
            raise ValueError("instance_id values must be unique")

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return (isinstance(other, KnowledgeTable) and self.rows == other.rows
                and self.extra_columns == other.extra_columns)

    @property
    def max_depth(self):
        return max((r.p for r in self.rows), default=0)

    @property
    def columns(self):
        pmax = self.max_depth
        return (list(ID_COLUMNS) + list(INVARIANT_COLUMNS) + list(RESULT_COLUMNS)
                + [gamma_column(k) for k in range(1, pmax + 1)]
                + [beta_column(k) for k in range(1, pmax + 1)]
                + self.extra_columns)

    @property
    def feature_columns(self):
        return [c for c in self.columns if c not in ("instance_id", "graph_id", "model_kind",
                                                     "seed")]

    def column(self, name):
        """Float array of a column, NaN where undefined."""
        if name not in self.columns:
            raise MissingColumn(name)
        return np.array([_as_float(r.get(name)) for r in self.rows], dtype=float)

    def append(self, row):
        if any(r.instance_id == row.instance_id for r in self.rows):
            raise ValueError(f"duplicate instance_id {row.instance_id!r}")
        self.rows.append(row)

    def add_column(self, name, values):
        """Append a new feature column; existing columns are never rewritten."""
        if name in self.columns:
            raise ValueError(f"column {name!r} already exists")
        values = list(values)
        if len(values) != len(self.rows):
            raise ValueError("one value per row required")
        self.rows = [replace(r, extra={**r.extra, name: v}) for r, v in zip(self.rows, values)]
        self.extra_columns.append(name)

    def sorted(self):
        return KnowledgeTable(sorted(self.rows, key=lambda r: (r.graph_id, r.p)),
                              self.extra_columns)

    def filter(self, predicate):
        return KnowledgeTable([r for r in self.rows if predicate(r)], self.extra_columns)


def _as_float(v):
    return math.nan if v is None else float(v)


def _fmt(v, col):
    if v is None:
        return ""
    if col in INT_COLUMNS:
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def save(table, path):
    cols = table.columns
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in table.rows:
            w.writerow([_fmt(r.get(c), c) for c in cols])


def _parse_cell(text, col, line):
    if text == "":
        return None
    try:
        return int(text) if col in INT_COLUMNS else float(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a number", line=line, column=col) from None


def load(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header row", line=1) from None
        missing = [c for c in ID_COLUMNS + INVARIANT_COLUMNS + RESULT_COLUMNS if c not in header]
        if missing:
            raise ParseError(f"missing columns {missing}", line=1)
        gammas = sorted((int(c[6:]) for c in header if c.startswith("gamma_") and c[6:].isdigit()))
        param_cols = {gamma_column(k) for k in gammas} | {beta_column(k) for k in gammas}
        known = set(ID_COLUMNS) | set(INVARIANT_COLUMNS) | set(RESULT_COLUMNS) | param_cols
        extras = [c for c in header if c not in known]
        rows = []
        for line, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise ParseError(f"expected {len(header)} cells, got {len(record)}", line=line)
            cell = dict(zip(header, record))
            num = {c: _parse_cell(cell[c], c, line) for c in header
                   if c not in ("instance_id", "graph_id", "model_kind")}
            for c in ID_COLUMNS[3:] + INVARIANT_COLUMNS + RESULT_COLUMNS:
                if c != "assortativity" and num[c] is None:
                    raise ParseError("required value is empty", line=line, column=c)
            p = num["p"]
            try:
                gamma = tuple(num[gamma_column(k)] for k in range(1, p + 1))
                beta = tuple(num[beta_column(k)] for k in range(1, p + 1))
            except KeyError as exc:
                raise ParseError(f"missing parameter column {exc.args[0]}", line=line) from None
            if any(x is None for x in gamma + beta):
                raise ParseError(f"empty parameter cell for depth {p}", line=line)
            inv = InvariantVector(**{c: num[c] for c in INVARIANT_COLUMNS})
            rows.append(KnowledgeRow(
                instance_id=cell["instance_id"], graph_id=cell["graph_id"],
                model_kind=cell["model_kind"], seed=num["seed"], p=p, invariants=inv,
                gamma_star=gamma, beta_star_abs=beta, expectation=num["expectation"],
                maxcut=num["maxcut"], ratio=num["ratio"], obj_calls=num["obj_calls"],
                extra={c: num[c] for c in extras}))
    return KnowledgeTable(rows, extras)
