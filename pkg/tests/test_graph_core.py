import pytest

from src.core.graph_core import (
    Graph,
    PatternGraph,
    building_blocks,
    chains,
    contains_topologically,
    cycles,
    detect_nuclei,
    is_cactus,
    parse_graph,
    parse_patterns,
    simple_form,
    subdivide_for,
)
from src.validators import PreconditionError, ValidationError

NUCLEUS_FREE = ["P4", "C4", "Y", "two_candy_chain", "bouquet_candy", "linear_tree", "caterpillar",
                "single_candy", "star_bouquet", "pendant_candy_bouquet"]


def test_parse_graph_with_labels():
    g = parse_graph("# demo\nv 10\nv 20\nv 30\ne 10 20\ne 20 30\ne 20 20\nbase 30\n", "demo")
    assert g.vertex_count == 3
    assert g.labels == (10, 20, 30)
    assert g.edges == ((0, 1), (1, 2), (1, 1))
    assert g.base == 2
    assert g.degrees() == [1, 4, 1]
    assert g.betti_number() == 1
    assert not g.is_simple()
    assert parse_graph(g.to_text(), "demo") == g


def test_parse_errors():
    with pytest.raises(ValidationError):
        parse_graph("v 0\ne 0 1\n")
    with pytest.raises(ValidationError):
        parse_graph("v 0\nv 1\n")
    with pytest.raises(ValidationError):
        parse_graph("v 0\nq 1\n")
    with pytest.raises(ValidationError):
        parse_graph("v 0\nv 1\ne 0 1\nbase 7\n")


def test_rotation_system():
    g = parse_graph("v 0\nv 1\nv 2\ne 0 1\ne 0 2\nrot 0: 1 0\nrot 1: 0\nrot 2: 1\n")
    assert g.rotation[0] == ((1, 0), (0, 0))
    with pytest.raises(ValidationError):
        parse_graph("v 0\nv 1\ne 0 1\nrot 0: 0\n")


def test_load_uses_file_stem(corpus):
    g = corpus("theta")
    assert g.name == "theta"
    assert len(g.edges) == 3


def test_chains(corpus):
    theta = corpus("theta")
    assert sorted(len(c) for c in chains(theta)) == [1, 1, 1]
    c4 = corpus("C4")
    (loop,) = chains(c4)
    assert loop.is_loop and len(loop) == 4


def test_subdivision_lengths(corpus):
    theta = subdivide_for(corpus("theta"), 4)
    assert theta.graph.vertex_count == 8
    assert len(theta.graph.edges) == 9
    assert all(len(c) >= 3 for c in chains(theta.graph))
    assert theta.vertex_origin[:2] == (0, 1)

    bouquet = subdivide_for(corpus("star_bouquet"), 4)
    assert bouquet.graph.vertex_count == 12
    assert bouquet.graph.is_simple()

    y = subdivide_for(corpus("Y"), 2)
    assert y.graph == corpus("Y")


def test_subdivision_keeps_topology(corpus):
    for name in ("K4", "N2", "two_candy_chain"):
        g = corpus(name)
        sub = subdivide_for(g, 3).graph
        assert sub.betti_number() == g.betti_number()
        assert len(sub.essential_vertices()) == len(g.essential_vertices())


def test_simple_form(corpus):
    host, origin = simple_form(corpus("N2"))
    assert host.is_simple()
    assert host.betti_number() == 2
    assert origin[:3] == (0, 1, 2)
    assert set(origin[3:]) == {None}


def test_cactus(corpus):
    assert not is_cactus(corpus("theta"))
    assert not is_cactus(corpus("K4"))
    for name in NUCLEUS_FREE + ["N2", "N3", "N4"]:
        assert is_cactus(corpus(name)), name


def test_cycles(corpus):
    assert cycles(corpus("single_candy")) == [(0, 1)]
    assert cycles(corpus("N2")) == [(0, 1), (1,)]
    assert cycles(corpus("Y")) == []


def test_theta_in_k4(corpus, patterns):
    found, witness = contains_topologically(corpus("K4"), patterns["N1"])
    assert found
    assert len(witness.vertex_map) == 2
    assert len(witness.paths) == 3


def test_containment_negative(corpus, patterns):
    assert not contains_topologically(corpus("C4"), patterns["N1"])[0]
    assert not contains_topologically(corpus("single_candy"), patterns["N2"])[0]


def test_default_nuclei(corpus, patterns):
    assert list(patterns) == ["N1", "N2", "N3", "N4"]
    assert detect_nuclei(corpus("theta")) == ["N1"]
    assert "N1" in detect_nuclei(corpus("K4"))
    assert detect_nuclei(corpus("N2")) == ["N2"]
    assert detect_nuclei(corpus("N3")) == ["N3"]
    assert detect_nuclei(corpus("N4")) == ["N4"]


@pytest.mark.parametrize("name", NUCLEUS_FREE)
def test_nucleus_free(corpus, name):
    assert detect_nuclei(corpus(name)) == []


def test_custom_patterns(corpus):
    tripod = parse_patterns("pattern claw\nv 0\nv 1\nv 2\nv 3\ne 0 1\ne 0 2\ne 0 3\n")
    assert detect_nuclei(corpus("Y"), tripod) == ["claw"]
    assert detect_nuclei(corpus("C4"), tripod) == []
    with pytest.raises(ValidationError):
        parse_patterns("pattern bad\nv 0\nv 1\nv 2\ne 0 1\ne 1 2\n")


def test_building_blocks(corpus):
    blocks = building_blocks(corpus("pendant_candy_bouquet"))
    assert [b.kind for b in blocks] == ["star-bouquet", "candy", "star-bouquet"]
    assert [b.vertices for b in blocks] == [(2,), (0, 1), (3,)]

    chain = building_blocks(corpus("two_candy_chain"))
    assert [b.kind for b in chain] == ["candy", "candy"]
    assert building_blocks(corpus("P4")) == []


def test_building_blocks_preconditions(corpus):
    with pytest.raises(PreconditionError):
        building_blocks(corpus("theta"))
    with pytest.raises(PreconditionError):
        building_blocks(corpus("N4"))


def test_graph_must_be_connected():
    with pytest.raises(ValidationError):
        Graph(4, ((0, 1), (2, 3)))
    with pytest.raises(ValidationError):
        Graph(2, ((0, 5),))
