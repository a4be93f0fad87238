import json

import pytest

from config import settings
from src.api.commands import build_parser, run
from src.core.cohomology_ring import massey_nontrivial, non_raag_schema
from src.utils.logger import logger


@pytest.fixture(autouse=True)
def _settings(clean_settings):
    yield


def graph_file(name):
    return f"{settings.corpus_path}/{name}.graph"


@pytest.fixture
def certificate(tmp_path):
    pres, triple = non_raag_schema(1)
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(massey_nontrivial(pres, *triple).to_dict()))
    return path


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_detect(capsys):
    assert run(["detect", graph_file("two_candy_chain")]) == 0
    out = capsys.readouterr().out
    assert "two_candy_chain: cactus=True nuclei=none" in out
    assert out.count("candy:") == 2
    assert run(["detect", graph_file("theta")]) == 0
    assert "nuclei=N1" in capsys.readouterr().out


def test_missing_graph(tmp_path):
    assert run(["detect", str(tmp_path / "nope.graph")]) == 1


def test_bad_braid_index():
    assert run(["homology", graph_file("Y"), "-n", "0"]) == 1


def test_homology(capsys):
    assert run(["homology", graph_file("Y"), "-n", "2", "-k", "1"]) == 0
    assert "H_1(UD_2) = Z^1" in capsys.readouterr().out


def test_present_raw(capsys):
    assert run(["present", graph_file("Y"), "-n", "2", "--raw"]) == 0
    out = capsys.readouterr().out
    assert "gen 0 := " in out
    assert "rel 0 := " not in out


def test_present_needs_cactus_for_scr():
    assert run(["present", graph_file("theta"), "-n", "2"]) == 2


def test_analyze_routes(tmp_path, capsys):
    out_file = tmp_path / "verdict.json"
    assert run(["analyze", graph_file("theta"), "-n", "4", "--json", str(out_file)]) == 0
    data = json.loads(out_file.read_text())
    assert data["route"] == "non-RAAG-by-citation"
    assert "theta: non-RAAG-by-citation" in capsys.readouterr().out
    assert run(["analyze", graph_file("theta"), "-n", "3"]) == 2


def test_massey_needs_classes():
    assert run(["massey", graph_file("single_candy"), "-n", "3"]) == 1


def test_verify(certificate, capsys):
    assert run(["verify", str(certificate)]) == 0
    assert "ok: nontrivial" in capsys.readouterr().out


def test_verify_tampered(certificate, capsys):
    data = json.loads(certificate.read_text())
    data["rho"] = [0, 0, 0, 0]
    certificate.write_text(json.dumps(data))
    assert run(["verify", str(certificate)]) == 4
    assert "MISMATCH" in capsys.readouterr().out


def test_verify_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["verify", str(bad)]) == 1
    bad.write_text(json.dumps({"generators": ["a"], "relators": [], "alpha": [1, 0], "beta": [], "gamma": [],
                               "verdict": "nontrivial"}))
    assert run(["verify", str(bad)]) == 1
    assert run(["verify", str(tmp_path / "absent.json")]) == 1


def test_export(tmp_path):
    target = tmp_path / "y.txt"
    assert run(["export", graph_file("Y"), str(target), "-n", "2"]) == 0
    lines = target.read_text().splitlines()
    assert lines[0] == "# UD_2 Y"
    assert lines[1].startswith("dimension 1 rows ")


def test_log_level_option(capsys):
    assert run(["--log-level", "debug", "detect", graph_file("Y")]) == 0
    assert "Y: cactus=True" in capsys.readouterr().out
    logger.set_level("INFO")
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--log-level", "loud", "detect", "x"])


def test_corpus_flags_expected_values(tmp_path, capsys):
    graphs = tmp_path / "corpus"
    graphs.mkdir()
    (graphs / "Y.graph").write_text(open(graph_file("Y")).read())
    assert run(["corpus", "--path", str(graphs), "--indices", "2"]) == 0
    assert "expected_critical" in capsys.readouterr().out
    expected = tmp_path / "expected.json"
    expected.write_text(json.dumps({"Y": {"2": {"euler": 3}}}))
    assert run(["corpus", "--path", str(graphs), "--indices", "2", "--expected", str(expected)]) == 4
    assert "FAIL" in capsys.readouterr().out
