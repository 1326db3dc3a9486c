"""Fitting, filtering and ranking of inequality conjectures over a knowledge table."""
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations, permutations
from typing import Protocol

import numpy as np

from ..errors import MissingColumn, Rejected, UndefinedFeature
from ..invariants import INVARIANT_COLUMNS
from ..table import KnowledgeTable
from .expr import Const, Floor, Pow, Sqrt, Var, depth, evaluate, features, make_sum, scaled, to_string

LOWER = "lower"  # target >= expr
UPPER = "upper"  # target <= expr
DIRECTIONS = (LOWER, UPPER)

FAMILIES = ("constant", "linear", "quadratic", "sqrt", "pair_linear", "linear_sqrt",
            "floor_sqrt")

DEFAULT_FEATURES = INVARIANT_COLUMNS + ("beta_1", "gamma_1", "ratio", "obj_calls")


@dataclass(frozen=True)
class EngineConfig:
    max_violations: int = 2
    min_touches: int = 1
    touch_tol: float = 1e-3
    # slack below -violation_tol counts as a violation
    violation_tol: float = 0.0
    features: tuple = None  # None: DEFAULT_FEATURES present in the table, minus the target
    targets: tuple = ("gamma_1",)
    families: tuple = FAMILIES
    directions: tuple = DIRECTIONS
    max_denominator: int = 60
    keep_constant_bounds: bool = True

    def __post_init__(self):
        if self.max_violations < 0:
            raise ValueError("max_violations must be >= 0")
        if self.min_touches < 1:
            raise ValueError("min_touches must be >= 1")
        unknown = set(self.families) - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown form families {sorted(unknown)}")


@dataclass(frozen=True)
class Template:
    """A parametric form; free coefficients are fitted by :func:`fit_bound`."""

    family: str
    features: tuple = ()

    @property
    def n_free(self):
        return len(self.basis_names()) + 1

    def basis_names(self):
        f = self.features
        return {
            "constant": [],
            "linear": [f"{f[0]}" if f else ""],
            "quadratic": [f"{f[0]}^2", f"{f[0]}"] if f else [],
            "sqrt": [f"sqrt({f[0]})"] if f else [],
            "pair_linear": list(f),
            "linear_sqrt": [f[0], f"sqrt({f[1]})"] if len(f) > 1 else [],
            "floor_sqrt": [f[0]] if f else [],
        }[self.family]

    def sqrt_features(self):
        if self.family == "sqrt":
            return self.features[:1]
        if self.family in ("linear_sqrt", "floor_sqrt"):
            return self.features[1:2]
        return ()

    def design(self, cols):
        """Regressor columns (without the intercept) and the fixed offset."""
        f = self.features
        x = [cols[name] for name in f]
        offset = 0.0
        if self.family == "constant":
            basis = []
        elif self.family == "linear":
            basis = [x[0]]
        elif self.family == "quadratic":
            basis = [x[0] ** 2, x[0]]
        elif self.family == "sqrt":
            basis = [np.sqrt(x[0])]
        elif self.family == "pair_linear":
            basis = [x[0], x[1]]
        elif self.family == "linear_sqrt":
            basis = [x[0], np.sqrt(x[1])]
        else:  # floor_sqrt: the sqrt term enters with coefficient 1
            basis = [x[0]]
            offset = np.sqrt(x[1])
        return basis, offset

    def build(self, slopes, const):
        f = self.features
        v = [Var(name) for name in f]
        if self.family == "constant":
            return Const(const)
        if self.family == "linear":
            return make_sum([scaled(slopes[0], v[0]), Const(const)])
        if self.family == "quadratic":
            return make_sum([scaled(slopes[0], Pow(v[0], 2)), scaled(slopes[1], v[0]),
                             Const(const)])
        if self.family == "sqrt":
            return make_sum([scaled(slopes[0], Sqrt(v[0])), Const(const)])
        if self.family == "pair_linear":
            return make_sum([scaled(slopes[0], v[0]), scaled(slopes[1], v[1]), Const(const)])
        if self.family == "linear_sqrt":
            return make_sum([scaled(slopes[0], v[0]), scaled(slopes[1], Sqrt(v[1])),
                             Const(const)])
        return Floor(make_sum([scaled(slopes[0], v[0]), Sqrt(v[1]), Const(const)]))

    def describe(self):
        names = self.basis_names()
        if self.family == "floor_sqrt":
            return f"floor(a*{names[0]} + sqrt({self.features[1]}) + c)"
        letters = "abcd"
        parts = [f"{letters[i]}*{name}" for i, name in enumerate(names)]
        return " + ".join(parts + [letters[len(names)]])


@dataclass(frozen=True)
class Conjecture:
    target: str
    direction: str
    expr: object
    touches: int
    violations: tuple
    mean_slack: float
    min_slack: float
    family: str = ""
    rows: int = 0
    budget: int = 0
    raw_coefficients: tuple = ()
    sanity: bool = False

    @property
    def expression(self):
        return to_string(self.expr)

    @property
    def statement(self):
        op = ">=" if self.direction == LOWER else "<="
        return f"{self.target} {op} {self.expression}"

    def __str__(self):
        return self.statement


# ---------------------------------------------------------------- data access


@dataclass
class Frame:
    """Column arrays (NaN = undefined) plus instance ids."""

    ids: list
    cols: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.ids)

    def __getitem__(self, name):
        try:
            return self.cols[name]
        except KeyError:
            raise MissingColumn(name) from None


def as_frame(rows):
    """Accept a Frame, a KnowledgeTable or a dict of columns (with optional ``instance_id``)."""
    if isinstance(rows, Frame):
        return rows
    if isinstance(rows, KnowledgeTable):
        cols = {c: rows.column(c) for c in rows.feature_columns}
        return Frame([r.instance_id for r in rows.rows], cols)
    cols = {k: v for k, v in rows.items() if k != "instance_id"}
    cols = {k: np.array([math.nan if x is None else x for x in np.atleast_1d(v)], dtype=float)
            for k, v in cols.items()}
    size = len(next(iter(cols.values()))) if cols else 0
    ids = list(rows.get("instance_id", [str(i) for i in range(size)]))
    return Frame(ids, cols)


# ---------------------------------------------------------------- forms


def enumerate_forms(features_, target, config=None):
    """Parametric templates over ``features_`` for bounding ``target``."""
    config = config or EngineConfig()
    fams = set(config.families)
    feats = [f for f in features_ if f != target]
    out = []
    if "constant" in fams:
        out.append(Template("constant"))
    for x in feats:
        for fam in ("linear", "quadratic", "sqrt"):
            if fam in fams:
                out.append(Template(fam, (x,)))
    if "pair_linear" in fams:
        out.extend(Template("pair_linear", pair) for pair in combinations(feats, 2))
    for fam in ("linear_sqrt", "floor_sqrt"):
        if fam in fams:
            out.extend(Template(fam, pair) for pair in permutations(feats, 2))
    return out


# ---------------------------------------------------------------- slack


def _slack_values(direction, target, value):
    return target - value if direction == LOWER else value - target


def slack(conj, row):
    """Signed slack of one row; negative means the row violates the conjecture."""
    names = features(conj.expr) + [conj.target]
    values = {}
    for name in names:
        v = row.get(name) if hasattr(row, "get") else row[name]
        if v is None or (isinstance(v, float) and math.isnan(v)):
            raise UndefinedFeature(name)
        values[name] = float(v)
    value = float(evaluate(conj.expr, values))
    return float(_slack_values(conj.direction, values[conj.target], value))


def slack_vector(conj, frame):
    """Slack on every row of ``frame`` (NaN where a referenced column is undefined)."""
    frame = as_frame(frame)
    names = features(conj.expr) + [conj.target]
    mask = np.ones(len(frame), dtype=bool)
    for name in names:
        mask &= np.isfinite(frame[name])
    out = np.full(len(frame), np.nan)
    if mask.any():
        sub = {name: frame[name][mask] for name in names}
        with np.errstate(invalid="ignore"):
            val = np.broadcast_to(evaluate(conj.expr, sub), (int(mask.sum()),))
        out[mask] = _slack_values(conj.direction, sub[conj.target], val)
    return out


def _stats(expr, direction, target, cols, ids, config):
    """(violation ids, touches, mean, min) of ``expr`` on already-masked columns."""
    with np.errstate(invalid="ignore"):
        val = np.broadcast_to(evaluate(expr, cols), target.shape)
    s = _slack_values(direction, target, val)
    if not np.all(np.isfinite(s)):
        return None
    viol = tuple(ids[i] for i in np.flatnonzero(s < -config.violation_tol))
    touches = int(np.count_nonzero(np.abs(s) <= config.touch_tol))
    return viol, touches, float(s.mean()), float(s.min())


# ---------------------------------------------------------------- fitting


def _shift(d, direction, budget):
    """Constant making at most ``budget`` rows violate; d = target - non-constant part."""
    order = np.sort(d)
    k = min(budget, d.size - 1)
    return float(order[-1 - k]) if direction == UPPER else float(order[k])


def _floor_shift(t, g, direction, budget):
    """Constant c for floor(g + c) bounds; the floor moves only at integer crossings."""
    if direction == UPPER:
        # floor(g + c) >= t  <=>  g + c >= ceil(t)
        need = np.ceil(t) - g
        order = np.sort(need)
        return float(order[-1 - min(budget, need.size - 1)])
    # floor(g + c) <= t  <=>  g + c < floor(t) + 1; take the largest admissible c
    limit = np.floor(t) + 1 - g
    order = np.sort(limit)
    c = float(order[min(budget, limit.size - 1)])
    return float(np.nextafter(c, -np.inf))


def _hull_lines(x, t, direction):
    """Lines through consecutive vertices of the upper (or lower) hull of (x, t)."""
    sign = 1.0 if direction == UPPER else -1.0
    pts = {}
    for xi, ti in zip(x.tolist(), (sign * t).tolist()):
        pts[xi] = max(ti, pts.get(xi, -math.inf))
    xs = sorted(pts)
    hull = []
    for xi in xs:
        p = (xi, pts[xi])
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep only right turns (upper hull)
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    lines = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        a = (y2 - y1) / (x2 - x1)
        lines.append((sign * a, sign * (y1 - a * x1)))
    return lines


def _ratio_line(x, t, direction):
    if np.any(x <= 0):
        return None
    r = t / x
    return (float(r.max()) if direction == UPPER else float(r.min())), 0.0


def _snap_rational(c, max_den):
    return Fraction(c).limit_denominator(max_den)


def _snap_candidates(template, slopes, const, direction, budget, t, basis, offset, config):
    """Snapped versions of one fitted bound, most readable first."""
    den = config.max_denominator
    yield [_snap_rational(s, den) for s in slopes], _snap_rational(const, den)
    r_slopes = [round(float(s), 3) for s in slopes]
    yield r_slopes, round(float(const), 3)
    part = sum((s * b for s, b in zip(r_slopes, basis)), np.zeros_like(t)) + offset
    if template.family == "floor_sqrt":
        c = _floor_shift(t, part, direction, budget)
    else:
        c = _shift(t - part, direction, budget)
    rounded = math.ceil(c * 1000) / 1000 if direction == UPPER else math.floor(c * 1000) / 1000
    if template.family == "floor_sqrt" and direction == LOWER:
        rounded = math.floor(c * 1000) / 1000
    yield r_slopes, rounded
    yield [float(s) for s in slopes], float(const)


def fit_bound(template, rows, direction, config=None, target="gamma_1"):
    """Fit ``template`` as a lower or upper bound on ``target``.

    Two backends run and the valid candidate with the smallest mean slack
    wins: a least-squares fit whose intercept is then shifted until at most
    ``config.max_violations`` rows violate, and (for single-feature linear
    forms) lines along the convex hull of the scatter plus the tightest
    line through the origin. Coefficients are snapped to small rationals,
    else to 3 decimals, whenever the snapped form stays valid.
    """
    config = config or EngineConfig()
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    frame = as_frame(rows)
    names = list(template.features) + [target]
    mask = np.ones(len(frame), dtype=bool)
    for name in names:
        mask &= np.isfinite(frame[name])
    n_rows = int(mask.sum())
    if n_rows < max(3, template.n_free + 1):
        raise Rejected(f"insufficient rows ({n_rows})")
    cols = {name: frame[name][mask] for name in names}
    ids = [i for i, keep in zip(frame.ids, mask) if keep]
    t = cols[target]
    for name in template.sqrt_features():
        if np.any(cols[name] < 0):
            raise Rejected(f"sqrt of negative values in {name}")
    for name in template.features:
        if np.ptp(cols[name]) == 0:
            raise Rejected(f"degenerate feature {name} (zero variance)")

    basis, offset = template.design(cols)
    budget = config.max_violations
    fitted = []  # (slopes, const) before snapping
    if basis:
        a = np.column_stack(basis + [np.ones(n_rows)])
        if np.linalg.matrix_rank(a) < a.shape[1]:
            raise Rejected("degenerate design (collinear regressors)")
        coef = np.linalg.lstsq(a, t - offset, rcond=None)[0]
        slopes = [float(s) for s in coef[:-1]]
    else:
        slopes = []
    part = sum((s * b for s, b in zip(slopes, basis)), np.zeros(n_rows)) + offset
    if template.family == "floor_sqrt":
        const = _floor_shift(t, part, direction, budget)
    else:
        const = _shift(t - part, direction, budget)
    fitted.append((slopes, const))
    if template.family == "linear":
        x = cols[template.features[0]]
        fitted.extend(([a_], b_) for a_, b_ in _hull_lines(x, t, direction))
        ratio = _ratio_line(x, t, direction)
        if ratio is not None:
            fitted.append(([ratio[0]], ratio[1]))

    best = None
    for slopes, const in fitted:
        for s_slopes, s_const in _snap_candidates(template, slopes, const, direction, budget, t,
                                                  basis, offset, config):
            expr = template.build(s_slopes, s_const)
            stats = _stats(expr, direction, t, cols, ids, config)
            if stats is None:
                continue
            viol, touches, mean, low = stats
            if len(viol) > budget or touches < config.min_touches:
                continue
            if depth(expr) > 3:
                continue
            conj = Conjecture(target=target, direction=direction, expr=expr, touches=touches,
                              violations=viol, mean_slack=mean, min_slack=low,
                              family=template.family, rows=n_rows, budget=budget,
                              raw_coefficients=tuple(slopes) + (const,))
            if best is None or _fit_key(conj) < _fit_key(best):
                best = conj
            break
    if best is None:
        raise Rejected("no coefficient assignment meets the violation budget")
    return best


def _fit_key(c):
    return (c.mean_slack, -c.touches, len(c.expression), c.expression)


# ---------------------------------------------------------------- filtering


def _effective(slacks, tol):
    """Slack where the conjecture holds; +inf where it is violated or undefined."""
    out = np.where(np.isfinite(slacks) & (slacks >= -tol), slacks, np.inf)
    return out


def _significant(eff, others, tol):
    if not others:
        return bool(np.any(np.isfinite(eff)))
    best_other = np.min(np.vstack(others), axis=0)
    return bool(np.any(np.isfinite(eff) & (eff < best_other - tol)))


def rank_key(c):
    return (c.mean_slack, -c.touches, len(c.expression), c.expression, c.direction, c.target)


def dalmatian_filter(conjs, rows, tol=1e-9):
    """Keep conjectures that are strictly the tightest valid bound on some row.

    Candidates are visited in ascending mean slack; duplicates (same
    target, direction and expression) collapse to the first. A final pass
    drops any kept conjecture that a later one made redundant.
    """
    frame = as_frame(rows)
    seen = set()
    unique = []
    for c in sorted(conjs, key=rank_key):
        key = (c.target, c.direction, c.expression)
        if key not in seen:
            seen.add(key)
            unique.append(c)
    kept, effs = [], []
    for c in unique:
        eff = _effective(slack_vector(c, frame), tol)
        if _significant(eff, effs, tol):
            kept.append(c)
            effs.append(eff)
    for i in range(len(kept) - 1, -1, -1):
        others = effs[:i] + effs[i + 1:]
        if not _significant(effs[i], others, tol):
            del kept[i]
            del effs[i]
    return kept


# ---------------------------------------------------------------- ranking


class Interpreter(Protocol):
    """Pluggable reasoning layer that orders conjectures for a reader."""

    def rank(self, conjectures, rows):
        ...


class SlackRanker:
    """Deterministic ranking: mean slack, then more touches, then shorter text."""

    def rank(self, conjectures, rows=None):
        return sorted(conjectures, key=rank_key)


def rank_conjectures(conjs, rows=None, interpreter=None):
    return list((interpreter or SlackRanker()).rank(list(conjs), rows))


# ---------------------------------------------------------------- pipeline


def default_features(frame, target):
    return [f for f in DEFAULT_FEATURES if f in frame.cols and f != target]


def generate(rows, config=None):
    """Enumerate, fit, filter and rank conjectures for every configured target."""
    config = config or EngineConfig()
    frame = as_frame(rows)
    if len(frame) == 0:
        raise ValueError("no rows")
    out = []
    for target in config.targets:
        if target not in frame.cols:
            raise MissingColumn(target)
        feats = list(config.features) if config.features is not None else default_features(
            frame, target)
        missing = [f for f in feats if f not in frame.cols]
        if missing:
            raise MissingColumn(", ".join(missing))
        templates = enumerate_forms(feats, target, config)
        for direction in config.directions:
            candidates = []
            for template in templates:
                for budget in range(config.max_violations + 1):
                    try:
                        candidates.append(fit_bound(template, frame, direction,
                                                    replace(config, max_violations=budget),
                                                    target=target))
                    except Rejected:
                        pass
            sanity = []
            if config.keep_constant_bounds:
                sanity = [replace(c, sanity=True) for c in candidates
                          if c.family == "constant" and c.budget == 0]
            pool = [c for c in candidates if not (c.family == "constant" and c.budget == 0
                                                  and config.keep_constant_bounds)]
            out.extend(sanity)
            out.extend(dalmatian_filter(pool, frame, tol=config.violation_tol))
    return rank_conjectures(out, frame)
