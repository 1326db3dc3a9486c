import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaoa_conjecture.analysis import (BASE_INVARIANTS, INVARIANT_SETS, basin_detect, fingerprint,
                                      format_report, universality, violation_cluster)
from qaoa_conjecture.conjecture import UPPER, Conjecture, parse
from qaoa_conjecture.errors import MissingColumn, NoViolations
from qaoa_conjecture.graphs import Graph
from qaoa_conjecture.invariants import InvariantVector
from qaoa_conjecture.table import KnowledgeRow, KnowledgeTable, build_row

# two non-isomorphic graphs with fingerprint (7, 16/7, 0.309524, 3/7) whose
# p=1 optima sit in different corners of the parameter box
TWIN_A = Graph(7, ((0, 3), (0, 5), (1, 3), (1, 6), (2, 4), (3, 4), (3, 5), (4, 6)))
TWIN_B = Graph(7, ((0, 2), (0, 4), (1, 5), (1, 6), (2, 4), (3, 4), (3, 5), (4, 6)))


def make_row(iid, gamma, beta, n=8, degree_std=0.0, model="gnm", clustering=0.25):
    inv = InvariantVector(n=n, m=12, mean_degree=3.0, clustering=clustering, chromatic=3,
                          mis_ratio=0.375, assortativity=None, degree_std=degree_std)
    gamma, beta = tuple(np.atleast_1d(gamma)), tuple(np.atleast_1d(beta))
    return KnowledgeRow(iid, iid.split("/")[0], model, 0, len(gamma), inv, gamma, beta,
                        9.0, 10, 0.9, 100)


def test_identical_rows_are_universal():
    t = KnowledgeTable([make_row("a/p1", 0.5, 0.3), make_row("b/p1", 0.5, 0.3)])
    rep = universality(t)
    assert len(rep.groups) == 1
    assert all(s == 0 for s in rep.groups[0].sigma.values())
    assert rep.rate == 1.0


def test_half_universal():
    t = KnowledgeTable([
        make_row("a/p1", 0.5, 0.3), make_row("b/p1", 0.5, 0.3),
        make_row("c/p1", 0.0, 0.3, n=9), make_row("d/p1", 1.0, 0.3, n=9),
    ])
    rep = universality(t)
    sig = sorted(g.sigma["gamma_1"] for g in rep.groups)
    assert sig == [0.0, 0.5]
    assert rep.rate == 0.5


def test_singletons_are_not_counted():
    t = KnowledgeTable([make_row("a/p1", 0.5, 0.3), make_row("b/p1", 0.1, 0.3, n=9)])
    rep = universality(t)
    assert rep.groups == [] and rep.rate is None


def test_within_model_splits_groups():
    t = KnowledgeTable([make_row("a/p1", 0.5, 0.3, model="gnm"),
                        make_row("b/p1", 0.5, 0.3, model="regular")])
    assert len(universality(t, within_model=False).groups) == 1
    assert len(universality(t, within_model=True).groups) == 0


def test_depths_are_never_mixed():
    t = KnowledgeTable([make_row("a/p1", 0.5, 0.3), make_row("a/p2", (0.5, 0.6), (0.3, 0.2)),
                        make_row("b/p2", (0.5, 0.6), (0.3, 0.2))])
    rep = universality(t)
    assert [(g.p, len(g.members)) for g in rep.groups] == [(2, 2)]
    assert set(rep.groups[0].sigma) == {"gamma_1", "gamma_2", "beta_1", "beta_2"}


def test_all_layers_must_agree():
    t = KnowledgeTable([make_row("a/p2", (0.5, 0.6), (0.3, 0.2)),
                        make_row("b/p2", (0.5, 0.6), (0.3, 0.25))])
    assert universality(t).rate == 0.0


def test_missing_invariant():
    t = KnowledgeTable([make_row("a/p1", 0.5, 0.3)])
    with pytest.raises(MissingColumn):
        universality(t, ("n", "girth"))


def test_fingerprint_rounding():
    a = make_row("a/p1", 0.5, 0.3, clustering=0.1234564)
    b = make_row("b/p1", 0.5, 0.3, clustering=0.1234561)
    assert fingerprint(a, BASE_INVARIANTS) == fingerprint(b, BASE_INVARIANTS)


def test_refinement():
    rng = np.random.default_rng(0)
    rows = [make_row(f"r{i:02d}/p1", float(rng.choice([0.5, 0.7])), 0.3,
                     n=int(rng.integers(6, 8)), degree_std=float(rng.choice([0.0, 0.5])))
            for i in range(30)]
    t = KnowledgeTable(rows)
    coarse = universality(t, INVARIANT_SETS["base4"])
    fine = universality(t, INVARIANT_SETS["base4+degree_std"])
    for g in fine.groups:
        parents = [c for c in coarse.groups if set(g.members) <= set(c.members)]
        assert len(parents) == 1
        if parents[0].universal:
            assert g.universal


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(6, 8), st.sampled_from([0.5, 0.6])), min_size=2,
                max_size=12), st.randoms(use_true_random=False))
def test_rate_ignores_row_order(spec, rnd):
    rows = [make_row(f"r{i:02d}/p1", g, 0.3, n=n) for i, (n, g) in enumerate(spec)]
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    assert universality(KnowledgeTable(rows)).rate == universality(KnowledgeTable(shuffled)).rate


def test_duplicated_instances_always_universal():
    row = make_row("a/p1", 1.234, 0.77)
    dup = KnowledgeRow(**{**row.__dict__, "instance_id": "a2/p1", "graph_id": "a2"})
    assert universality(KnowledgeTable([row, dup])).rate == 1.0


def test_basins():
    assert len(basin_detect([(0.1, 0.1)] * 3)) == 1
    clusters = basin_detect([(0.1, 0.1), (0.1, 0.1), (2.0, 1.4)], 1e-3)
    assert [c.members for c in clusters] == [[0, 1], [2]]
    assert clusters[1].centroid == (2.0, 1.4)
    # single linkage chains close neighbours
    assert len(basin_detect([(0.0,), (0.009,), (0.018,)], 1e-3)) == 1


def test_constructed_multi_basin_group():
    rows = [build_row(TWIN_A, 1, 11, graph_id="twin_a"), build_row(TWIN_B, 1, 11, graph_id="twin_b")]
    assert fingerprint(rows[0], BASE_INVARIANTS) == fingerprint(rows[1], BASE_INVARIANTS)
    rep = universality(KnowledgeTable(rows))
    assert len(rep.groups) == 1
    g = rep.groups[0]
    assert not g.universal and g.multi_basin and g.basins == 2
    assert "no" in format_report({"base4": rep}, [])


def _violated(ids):
    return Conjecture("gamma_1", UPPER, parse("1"), 1, tuple(ids), 0.1, -0.5)


def test_violation_cluster_shared():
    t = KnowledgeTable([make_row("a/p1", 1.5, 0.3), make_row("b/p1", 1.6, 0.3),
                        make_row("c/p1", 0.5, 0.3, n=9)])
    rep = violation_cluster(_violated(["b/p1", "a/p1"]), t)
    assert rep.violators == ["a/p1", "b/p1"]
    assert all(shared for shared, _ in rep.shared.values())
    assert rep.shared["n"] == (True, 8)
    assert rep.common_fingerprint == fingerprint(t.rows[0], BASE_INVARIANTS)
    assert rep.sigma["gamma_1"] == pytest.approx(0.05)


def test_violation_cluster_not_shared():
    t = KnowledgeTable([make_row("a/p1", 1.5, 0.3), make_row("c/p1", 1.5, 0.3, n=9)])
    rep = violation_cluster(_violated(["a/p1", "c/p1"]), t)
    assert rep.shared["n"] == (False, None)
    assert rep.common_fingerprint is None


def test_violation_cluster_needs_violations():
    with pytest.raises(NoViolations):
        violation_cluster(_violated([]), KnowledgeTable([make_row("a/p1", 1.5, 0.3)]))


def test_near_tight_bound_names_planted_family():
    from qaoa_conjecture.conjecture import EngineConfig, Template, fit_bound
    from qaoa_conjecture.graphs import GraphModel, generate

    graphs = [generate(GraphModel("gnm", {"m": 10}), 7, s) for s in range(10)]
    rows = [build_row(g, 1, 3, graph_id=f"g{i}") for i, g in enumerate(graphs)]
    top = max(range(10), key=lambda i: rows[i].gamma_star[0])
    # a relabelled copy of the graph with the largest gamma*, optimized with the same seed
    twin = graphs[top].relabel(list(range(7))[::-1])
    rows.append(build_row(twin, 1, 3, graph_id="twin"))
    table = KnowledgeTable(rows)
    # random draws can repeat a graph, so the planted family is everything at the top value
    family = {r.instance_id for r in rows if r.gamma_star == rows[top].gamma_star}
    assert len(family) >= 2 and len(family) < len(rows) - 1
    bound = fit_bound(Template("constant"), table, UPPER,
                      EngineConfig(max_violations=len(family)))
    assert set(bound.violations) == family
    rep = violation_cluster(bound, table)
    assert rep.common_fingerprint == fingerprint(rows[top], BASE_INVARIANTS)
    assert rep.sigma["gamma_1"] == 0.0
