import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from qaoa_conjecture.conjecture import (LOWER, UPPER, Conjecture, EngineConfig, Template,
                                        dalmatian_filter, enumerate_forms, fit_bound, generate,
                                        parse, rank_conjectures, read_conjectures, slack,
                                        slack_vector, write_conjectures)
from qaoa_conjecture.errors import Rejected, UndefinedFeature


def conj(text, direction=UPPER, target="gamma_1", mean=0.0, touches=1):
    return Conjecture(target=target, direction=direction, expr=parse(text), touches=touches,
                      violations=(), mean_slack=mean, min_slack=0.0)


def families(templates):
    return {(t.family, t.features) for t in templates}


def test_enumerate_single_feature():
    got = families(enumerate_forms(["mean_degree"], "gamma_1"))
    for fam in ("linear", "quadratic", "sqrt"):
        assert (fam, ("mean_degree",)) in got
    assert ("constant", ()) in got


def test_enumerate_pairs():
    got = families(enumerate_forms(["beta_1", "chromatic"], "gamma_1"))
    assert ("pair_linear", ("beta_1", "chromatic")) in got
    assert ("linear_sqrt", ("beta_1", "chromatic")) in got
    assert ("floor_sqrt", ("chromatic", "beta_1")) in got


def test_enumerate_empty_and_target_excluded():
    assert families(enumerate_forms([], "y")) == {("constant", ())}
    assert families(enumerate_forms(["y"], "y")) == {("constant", ())}


def test_constant_target():
    rows = {"x": [1.0, 2.0, 3.0, 4.0], "y": [5.0] * 4}
    c = fit_bound(Template("constant"), rows, UPPER, target="y")
    assert c.statement == "y <= 5"
    assert c.touches == 4 and c.min_slack == 0.0


def test_planted_linear():
    x = np.linspace(0, 3, 7)
    c = fit_bound(Template("linear", ("x",)), {"x": x, "y": 3 * x + 1}, LOWER, target="y")
    assert c.expression == "3*x + 1"
    assert np.all(slack_vector(c, {"x": x, "y": 3 * x + 1}) == 0)
    assert c.raw_coefficients == pytest.approx((3, 1), abs=1e-9)


def test_hull_line_beats_least_squares():
    # an upper envelope through the two extreme points; least squares + shift is looser
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    y = np.array([0.0, 0.2, 0.1, 0.3, 2.0])
    cfg = EngineConfig(max_violations=0)
    c = fit_bound(Template("linear", ("x",)), {"x": x, "y": y}, UPPER, cfg, target="y")
    s = slack_vector(c, {"x": x, "y": y})
    assert np.all(s >= 0)
    assert c.touches >= 2


def test_budget_is_used():
    x = np.arange(10.0)
    y = 2 * x
    y[3] += 5  # one outlier
    strict = fit_bound(Template("linear", ("x",)), {"x": x, "y": y}, UPPER,
                       EngineConfig(max_violations=0), target="y")
    loose = fit_bound(Template("linear", ("x",)), {"x": x, "y": y}, UPPER,
                      EngineConfig(max_violations=1), target="y")
    assert loose.mean_slack < strict.mean_slack
    assert loose.violations == ("3",)


def test_rejections():
    with pytest.raises(Rejected):
        fit_bound(Template("linear", ("x",)), {"x": [1.0, 2.0], "y": [1.0, 2.0]}, UPPER,
                  target="y")
    with pytest.raises(Rejected):
        fit_bound(Template("linear", ("x",)), {"x": [1.0] * 5, "y": np.arange(5.0)}, UPPER,
                  target="y")
    with pytest.raises(Rejected):
        fit_bound(Template("sqrt", ("x",)), {"x": [-1.0, 1, 2, 3], "y": [1.0, 2, 3, 4]}, UPPER,
                  target="y")


def test_undefined_rows_are_skipped_per_hypothesis():
    rows = {"x": [1.0, 2.0, None, 4.0, 5.0], "y": [2.0, 3.0, 100.0, 5.0, 6.0]}
    c = fit_bound(Template("linear", ("x",)), rows, UPPER, EngineConfig(max_violations=0),
                  target="y")
    assert c.rows == 4 and c.expression == "x + 1"


@pytest.mark.parametrize("text,direction,row,expected", [
    ("beta_1 + 3", UPPER, {"gamma_1": 2.0, "beta_1": 0.5}, 1.5),
    ("2*chromatic", LOWER, {"gamma_1": 2.0, "chromatic": 1}, 0.0),
    ("2*chromatic", LOWER, {"gamma_1": 1.9, "chromatic": 1}, -0.1),
])
def test_slack_examples(text, direction, row, expected):
    assert slack(conj(text, direction), row) == pytest.approx(expected, abs=1e-12)


def test_slack_undefined():
    with pytest.raises(UndefinedFeature):
        slack(conj("2*assortativity"), {"gamma_1": 1.0, "assortativity": None})


def test_dalmatian_dominated():
    rows = {"gamma_1": [0.1, 1.0, 3.0]}
    kept = dalmatian_filter([conj("5", mean=4.0), conj("22/7", mean=1.0)], rows)
    assert [c.expression for c in kept] == ["22/7"]


def test_dalmatian_duplicates():
    rows = {"gamma_1": [0.1, 1.0], "x": [1.0, 2.0]}
    kept = dalmatian_filter([conj("x + 1", mean=1.0), conj("x + 1", mean=1.0)], rows)
    assert len(kept) == 1


def test_dalmatian_crossover():
    rows = {"gamma_1": [0.0, 1.0, 2.0, 2.0], "x": [0.0, 1.0, 2.0, 3.0]}
    line, flat = conj("x", mean=0.25), conj("2", mean=0.75)
    assert len(dalmatian_filter([line, flat], rows)) == 2


def test_rank_order():
    a, b = conj("x", mean=0.5), conj("y", mean=0.1)
    assert rank_conjectures([a, b]) == [b, a]
    c, d = conj("x + 1", mean=0.2, touches=1), conj("y + 1", mean=0.2, touches=3)
    assert rank_conjectures([c, d]) == [d, c]
    e, f = conj("x + 10", mean=0.2), conj("x + 1", mean=0.2)
    assert rank_conjectures([e, f]) == rank_conjectures([f, e]) == [f, e]


def test_generate_empty():
    with pytest.raises(ValueError, match="no rows"):
        generate({"gamma_1": [], "x": []}, EngineConfig(features=("x",)))


def test_serialization_round_trip(tmp_path):
    x = np.arange(8.0)
    rows = {"x": x, "gamma_1": np.sqrt(x) + 0.1 * (x % 3), "instance_id": [f"r{i}" for i in x]}
    conjs = generate(rows, EngineConfig(features=("x",)))
    write_conjectures(conjs, tmp_path / "c.jsonl")
    back = read_conjectures(tmp_path / "c.jsonl")
    assert [c.statement for c in back] == [c.statement for c in conjs]
    assert [c.violations for c in back] == [c.violations for c in conjs]
    assert [c.mean_slack for c in back] == [c.mean_slack for c in conjs]


# ---------------------------------------------------------------- properties


@st.composite
def tables(draw):
    k = draw(st.integers(6, 25))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    x = rng.integers(1, 8, k).astype(float)
    z = rng.uniform(0, 4, k)
    y = rng.uniform(0, 3, k) + draw(st.sampled_from([0.0, 0.5, 1.0])) * x
    return {"x": x, "z": z, "y": y, "instance_id": [f"i{j:02d}" for j in range(k)]}


def _check_sound(conjs, rows, cfg):
    for c in conjs:
        s = slack_vector(c, rows)
        defined = s[~np.isnan(s)]
        viol = int(np.count_nonzero(defined < -cfg.violation_tol))
        assert viol == len(c.violations)
        assert viol <= cfg.max_violations
        assert int(np.count_nonzero(np.abs(defined) <= cfg.touch_tol)) == c.touches
        assert c.touches >= cfg.min_touches


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(tables(), st.integers(0, 3), st.integers(1, 3))
def test_soundness(rows, budget, touches):
    cfg = EngineConfig(targets=("y",), features=("x", "z"), max_violations=budget,
                       min_touches=touches)
    _check_sound(generate(rows, cfg), rows, cfg)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(tables())
def test_minimality(rows):
    cfg = EngineConfig(targets=("y",), features=("x", "z"))
    conjs = [c for c in generate(rows, cfg) if not c.sanity]
    for direction in (LOWER, UPPER):
        group = [c for c in conjs if c.direction == direction]
        effs = []
        for c in group:
            s = slack_vector(c, rows)
            effs.append(np.where(np.isfinite(s) & (s >= 0), s, math.inf))
        for i, eff in enumerate(effs):
            others = effs[:i] + effs[i + 1:]
            if not others:
                continue
            best = np.min(np.vstack(others), axis=0)
            assert np.any(np.isfinite(eff) & (eff < best))


def test_permutation_invariant_output():
    rng = np.random.default_rng(5)
    x = rng.integers(1, 9, 20).astype(float)
    y = rng.uniform(0, 2, 20) + 0.3 * x
    ids = [f"r{j:02d}" for j in range(20)]
    cfg = EngineConfig(targets=("y",), features=("x",))
    a = generate({"x": x, "y": y, "instance_id": ids}, cfg)
    order = rng.permutation(20)
    b = generate({"x": x[order], "y": y[order], "instance_id": [ids[j] for j in order]}, cfg)
    assert [c.statement for c in a] == [c.statement for c in b]
