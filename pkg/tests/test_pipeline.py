import json
from pathlib import Path

import pytest

from config import settings
from src.core.pipeline import (
    NON_RAAG_BY_CITATION,
    NON_RAAG_CERTIFIED,
    OUT_OF_SCOPE,
    RAAG_CONSTRUCTED,
    ROUTES,
    SCR_ONLY,
    analyze,
    check_graph,
    corpus_files,
    corpus_regression,
    cup_zero_verify,
    load_expected,
    oracle_homology,
    prepare,
    presentation_dict,
    recipe_triples,
)
from src.core.cohomology_ring import verify_certificate
from src.core.graph_core import chains, parse_graph, subdivide_for
from src.core.morse import CriticalCellName
from src.core.spanning_order import CACTUS, GENERAL
from src.core.tietze_raag import scr_presentation
from src.validators import ValidationError


def test_prepare_picks_numbering(corpus):
    assert prepare(corpus("single_candy"), 3).sd.mode == CACTUS
    assert prepare(corpus("K4"), 2).sd.mode == GENERAL
    summary = prepare(corpus("Y"), 2).summary()
    assert summary["critical_counts"] == [1, 1, 0]
    assert summary["name"] == "Y"


def test_oracle_for_the_claw(corpus):
    groups = oracle_homology(prepare(corpus("Y"), 2), top=1)
    assert groups[0] == (1, [])
    assert groups[1] == (1, [])


def test_theta_is_cited(corpus):
    verdict = analyze(corpus("theta"), 4)
    assert verdict.route == NON_RAAG_BY_CITATION
    assert "N1" in verdict.nuclei
    assert verdict.presentation is None
    assert analyze(corpus("theta"), 3).route == OUT_OF_SCOPE
    assert analyze(corpus("K4"), 4).route == NON_RAAG_BY_CITATION


def test_other_indices_stop_at_scr(corpus):
    verdict = analyze(corpus("single_candy"), 3, use_oracle=False)
    assert verdict.route == SCR_ONLY
    assert verdict.oracle == {}
    assert verdict.presentation["generators"]
    data = verdict.to_dict()
    assert data["route"] in ROUTES
    assert data["graph"]["cactus"] is True


def test_presentation_dict(corpus):
    pres = scr_presentation(prepare(corpus("single_candy"), 3).mc).presentation
    data = presentation_dict(pres)
    assert len(data["generators"]) == len(pres.generators)
    assert len(data["relators"]) == len(pres.relators)
    assert data["free_rank"] == len(pres.free_generators())


@pytest.mark.slow
@pytest.mark.parametrize("name", ["linear_tree", "single_candy", "two_candy_chain"])
def test_nucleus_free_cactus_is_raag(corpus, name):
    verdict = analyze(corpus(name), 4)
    assert verdict.route == RAAG_CONSTRUCTED, verdict.error
    assert verdict.raag_report["ok"]
    assert verdict.oracle["H1"]["rank"] == len(verdict.raag["generators"])


@pytest.mark.slow
@pytest.mark.parametrize("name", ["N2", "N3", "N4"])
def test_nuclei_are_certified(corpus, name):
    verdict = analyze(corpus(name), 4)
    assert verdict.route == NON_RAAG_CERTIFIED
    assert verdict.nuclei == [name]
    cert = verdict.certificate
    assert cert["member"] is False
    assert verify_certificate(cert).ok


@pytest.mark.slow
def test_recipe_cup_conditions(corpus):
    ctx = prepare(corpus("N3"), 4)
    scr = scr_presentation(ctx.mc)
    assert recipe_triples(ctx.mc, scr, "N3")
    assert cup_zero_verify(ctx, scr, "N3").holds
    with pytest.raises(ValidationError):
        recipe_triples(ctx.mc, scr, "N1")


def test_corpus_files(tmp_path):
    names = [p.stem for p in corpus_files()]
    assert "theta" in names and "N4" in names
    assert names == sorted(names)
    assert corpus_files(tmp_path) == []
    with pytest.raises(ValidationError):
        corpus_files(tmp_path / "missing")


@pytest.mark.parametrize("name,n", [("Y", 2), ("Y", 3), ("single_candy", 2), ("theta", 2), ("star_bouquet", 2)])
def test_check_graph(corpus, name, n):
    row = check_graph(corpus(name), n)
    assert row.ok, row.to_dict()
    assert "euler" in row.checks and "raw_h1" in row.checks
    assert ("scr_h1" in row.checks) == (name != "theta")
    assert ("closed_forms" in row.checks) == (name != "theta")
    assert row.checks["time"]


def test_prepare_subdivides_around_the_base():
    g = parse_graph("v 0\nv 1\nv 2\ne 0 1\ne 1 2\nbase 1\n", "P3")
    assert subdivide_for(g, 4).graph.vertex_count == 4
    ctx = prepare(g, 4)
    sub = ctx.subdivided
    assert sub.vertex_count == 7
    assert ctx.sd.degree[ctx.sd.root] == 2
    assert sub.labels[sub.base] == 1
    assert sorted(len(ch) for ch in chains(sub, [sub.base])) == [3, 3]


def test_prepare_keeps_the_braid_index_for_parallel_edges(corpus):
    g = corpus("single_candy")
    assert not subdivide_for(g, 2).graph.is_simple()
    ctx = prepare(g, 2)
    assert ctx.subdivided.is_simple()
    assert ctx.subdivided.labels[:4] == g.labels
    assert ctx.subdivided.vertex_count == 6


@pytest.mark.slow
def test_n4_recipe(corpus):
    ctx = prepare(corpus("N4"), 4)
    mc, sd = ctx.mc, ctx.sd
    A, B, C, D = [v for v in sd.graph.vertices if sd.is_essential(v)]
    assert sd.g(A, B) == sd.mu(A) == 2
    scr = scr_presentation(mc)
    triples = recipe_triples(mc, scr, "N4")
    assert len(triples) == 1
    X, Y, Z = triples[0]
    assert X == Z
    names = [str(mc.encode(cell)) for cell in X + Y]
    expected = [CriticalCellName.single(A, 2, (1, 2)), CriticalCellName.single(C, 2, (1, 0)),
                CriticalCellName.single(D, 2, (1, 0)), CriticalCellName.single(B, 2, (2, 1))]
    assert names == [str(e) for e in expected]
    assert cup_zero_verify(ctx, scr, "N4", triples[0]).holds


@pytest.mark.slow
@pytest.mark.parametrize("name", ["linear_tree", "single_candy", "two_candy_chain", "N3"])
def test_check_graph_at_four(corpus, name):
    row = check_graph(corpus(name), 4)
    assert row.ok, row.to_dict()
    assert row.checks["closed_forms"]
    assert ("raag" in row.checks) == (name != "N3")
    assert ("raag_h1" in row.checks) == (name != "N3")


def test_time_budget(corpus):
    row = check_graph(corpus("Y"), 2, seconds=-1)
    assert not row.checks["time"]
    assert not row.ok
    assert "budget" in row.details["time"]


def test_expected_values(tmp_path, corpus):
    graphs = tmp_path / "corpus"
    graphs.mkdir()
    for name in ("P4", "Y"):
        (graphs / f"{name}.graph").write_text(Path(settings.corpus_path, f"{name}.graph").read_text())
    expected = load_expected()
    assert expected["Y"]["2"]["critical"] == [1, 1, 0]
    rows = corpus_regression(graphs, (2,))
    assert [r.graph for r in rows] == ["P4", "Y"]
    assert all(r.ok for r in rows)
    assert rows[0].checks["expected_euler"] and rows[1].checks["expected_critical"]

    expected["P4"]["2"]["euler"] = 7
    corrupted = tmp_path / "expected.json"
    corrupted.write_text(json.dumps(expected))
    rows = corpus_regression(graphs, (2,), corrupted)
    assert rows[0].checks["expected_euler"] is False
    assert rows[0].details["expected_euler"] == "expected 7, got 1"
    assert rows[0].checks["expected_h1"]
    assert rows[1].ok

    corrupted.write_text("[1, 2")
    with pytest.raises(ValidationError):
        load_expected(corrupted)
