import pytest

from src.core.graph_core import subdivide_for
from src.core import spanning_order
from src.core.spanning_order import CACTUS, GENERAL, LINEAR, PropertyReport, build_spanning, verify_properties
from src.validators import PreconditionError


def spanning(corpus, name, n=4, mode=CACTUS):
    return build_spanning(subdivide_for(corpus(name), n).graph, mode)


@pytest.mark.parametrize("name", ["Y", "N2", "N3", "two_candy_chain", "pendant_candy_bouquet"])
def test_tree_shape(corpus, name):
    sd = spanning(corpus, name)
    g = sd.graph
    assert sd.root == 0
    assert sd.parent[0] is None
    assert len(sd.tree_edges) == g.vertex_count - 1
    assert len(sd.deleted) == g.betti_number()
    for v in g.vertices:
        if v != sd.root:
            assert sd.parent[v] < v
            assert sd.ancestors(v)[0] == v
            assert sd.ancestors(v)[-1] == sd.root


def test_base_is_a_leaf(corpus):
    sd = spanning(corpus, "linear_tree")
    assert sd.degree[sd.root] == 1
    assert sd.mu(sd.root) == 0


def test_branch_queries(corpus):
    sd = spanning(corpus, "linear_tree")
    essential = [v for v in sd.graph.vertices if sd.is_essential(v)]
    assert len(essential) == 2
    a, b = essential
    assert sd.is_ancestor(a, b)
    assert sd.lca(a, b) == a
    assert sd.meet(a, b) == a
    assert 1 <= sd.g(a, b) <= sd.mu(a)
    assert sd.g(b, a) == 0
    assert sd.mu(a) == 2 and sd.mu(b) == 2
    for v in sd.graph.vertices:
        for w in sd.graph.vertices:
            assert sd.lca(v, w) == sd.lca(w, v)


def test_deleted_edges_are_indexed(corpus):
    sd = spanning(corpus, "single_candy")
    (d,) = sd.deleted
    assert sd.deleted_edge(sd.tau(d), sd.g(sd.tau(d), sd.iota(d))) == d
    assert sd.iota(d) > sd.tau(d)


@pytest.mark.parametrize("name", ["Y", "linear_tree", "caterpillar", "N4"])
def test_trees_satisfy_properties(corpus, name):
    report = verify_properties(spanning(corpus, name))
    assert report.ok, report.to_dict()
    assert report.checked == ["T1", "T2", "T3", "T4"]


def test_linear_mode_checks_t5(corpus):
    report = verify_properties(spanning(corpus, "linear_tree", mode=LINEAR))
    assert "T5" in report.checked
    assert report.ok, report.to_dict()


def test_swapping_labels_breaks_order(corpus):
    sd = spanning(corpus, "linear_tree", mode=LINEAR)
    essential = [v for v in sd.graph.vertices if sd.is_essential(v)]
    leaf = max(v for v in sd.graph.vertices if sd.degree[v] == 1)
    broken = sd.swap_labels(essential[0], leaf)
    assert not verify_properties(broken).ok


def test_preconditions(corpus):
    with pytest.raises(PreconditionError):
        build_spanning(corpus("theta"), GENERAL)
    with pytest.raises(PreconditionError):
        build_spanning(subdivide_for(corpus("K4"), 3).graph, CACTUS)
    with pytest.raises(PreconditionError):
        build_spanning(corpus("Y"), "sideways")
    sd = build_spanning(subdivide_for(corpus("K4"), 3).graph, GENERAL)
    assert len(sd.deleted) == 3


def test_linear_mode_refuses_nuclei(corpus):
    with pytest.raises(PreconditionError, match="N2"):
        spanning(corpus, "N2", mode=LINEAR)
    with pytest.raises(PreconditionError, match="N4"):
        spanning(corpus, "N4", mode=LINEAR)
    assert verify_properties(spanning(corpus, "N4")).ok


def test_no_passing_base_is_refused(corpus, monkeypatch):
    failing = PropertyReport(failures={"T1": ["deleted edge (3,0): deg ι=3, deg τ=2"]},
                             checked=["T1", "T2", "T3", "T4"])
    monkeypatch.setattr(spanning_order, "verify_properties", lambda sd: failing)
    with pytest.raises(PreconditionError, match="No base"):
        spanning(corpus, "single_candy")
    # general numbering does not depend on the properties
    assert spanning(corpus, "single_candy", mode=GENERAL).root == 0
