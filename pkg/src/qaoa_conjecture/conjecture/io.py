"""JSON-lines persistence for ranked conjectures."""
import json

from .engine import Conjecture
from .expr import parse


def _num(x):
    return format(float(x), ".17g")


def conjecture_to_dict(c, rank=None):
    d = {
        "target": c.target,
        "direction": c.direction,
        "expression": c.expression,
        "statement": c.statement,
        "family": c.family,
        "touches": c.touches,
        "violations": list(c.violations),
        "mean_slack": _num(c.mean_slack),
        "min_slack": _num(c.min_slack),
        "rows": c.rows,
        "budget": c.budget,
        "sanity": c.sanity,
        "raw_coefficients": [_num(x) for x in c.raw_coefficients],
    }
    if rank is not None:
        d["rank"] = rank
    return d


def conjecture_from_dict(d):
    return Conjecture(
        target=d["target"], direction=d["direction"], expr=parse(d["expression"]),
        touches=int(d["touches"]), violations=tuple(d["violations"]),
        mean_slack=float(d["mean_slack"]), min_slack=float(d["min_slack"]),
        family=d.get("family", ""), rows=int(d.get("rows", 0)), budget=int(d.get("budget", 0)),
        raw_coefficients=tuple(float(x) for x in d.get("raw_coefficients", ())),
        sanity=bool(d.get("sanity", False)))


def write_conjectures(conjs, path):
    """One JSON object per line, in rank order starting at 1."""
    with open(path, "w") as fh:
        for i, c in enumerate(conjs, start=1):
            fh.write(json.dumps(conjecture_to_dict(c, rank=i), sort_keys=True) + "\n")


def read_conjectures(path):
    with open(path) as fh:
        return [conjecture_from_dict(json.loads(line)) for line in fh if line.strip()]
