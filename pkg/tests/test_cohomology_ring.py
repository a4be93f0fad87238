import pytest

from src.core.cohomology_ring import (
    INCONCLUSIVE,
    NONTRIVIAL,
    UNAVAILABLE,
    Lattice,
    as_class,
    cup,
    cup_zero_condition,
    indeterminacy,
    massey_nontrivial,
    massey_rep,
    match_presentations,
    non_raag_schema,
    reference_presentation,
    search_triples,
    verify_certificate,
)
from src.core.fox_calculus import GroupWord, Presentation, Relator, commutator, parse_word
from src.validators import PreconditionError, ValidationError


@pytest.fixture
def raag():
    a, b, c = (GroupWord.gen(s) for s in "abc")
    return Presentation(["a", "b", "c"], [Relator(commutator(a, b)), Relator(commutator(b, c))])


def test_as_class(raag):
    assert as_class(raag, [1, 0, -1]) == (1, 0, -1)
    assert as_class(raag, {"b": 2}) == (0, 2, 0)
    assert as_class(raag, ["a", "c"]) == (1, 0, 1)
    with pytest.raises(ValidationError):
        as_class(raag, ["z"])


def test_cup(raag):
    assert cup(raag, ["a"], ["b"]) == (1, 0)
    assert cup(raag, ["b"], ["a"]) == (-1, 0)
    assert cup(raag, ["a"], ["c"]) == (0, 0)
    assert cup(raag, ["b"], ["c"]) == (0, 1)


def test_cup_zero_condition(raag):
    report = cup_zero_condition(raag, ["a"], ["c"])
    assert report.holds and report.sums == [0, 0]
    report = cup_zero_condition(raag, ["a", "c"], ["b"])
    assert not report.holds
    assert [o["relator"] for o in report.offending] == [0, 1]


def test_cup_needs_commutator_relators():
    x = GroupWord.gen("x")
    pres = Presentation(["x"], [Relator(x * x)])
    with pytest.raises(PreconditionError):
        cup(pres, ["x"], ["x"])


def test_massey_vanishes_on_raags(raag):
    assert massey_rep(raag, ["a"], ["c"], ["a"]) == (0, 0)
    cert = massey_nontrivial(raag, ["a"], ["c"], ["a"])
    assert cert.member is True
    assert cert.verdict == INCONCLUSIVE
    with pytest.raises(PreconditionError):
        massey_rep(raag, ["a"], ["b"], ["c"])


def test_schema_one_values():
    pres, triple = non_raag_schema(1)
    assert massey_rep(pres, *triple) == (-1, 0, 2, 0)
    lattice = indeterminacy(pres, triple[0], triple[2])
    assert lattice.rank == 3
    assert not lattice.contains([-1, 0, 2, 0])
    assert lattice.contains([1, 0, -1, 0])


@pytest.mark.parametrize("kind", [1, 2, 3])
def test_schemas_are_nontrivial(kind):
    pres, triple = non_raag_schema(kind)
    assert pres.is_commutator_related()
    assert all(r.commutator is not None for r in pres.relators)
    cert = massey_nontrivial(pres, *triple)
    assert cert.nontrivial
    assert cert.member is False
    assert cert.verdict == NONTRIVIAL


def test_unknown_schema():
    with pytest.raises(ValidationError):
        non_raag_schema(7)
    with pytest.raises(ValidationError):
        reference_presentation("N9")


@pytest.mark.parametrize("nucleus,generators,relators", [("N2", 11, 5), ("N3", 10, 3), ("N4", 24, 6)])
def test_reference_presentations(nucleus, generators, relators):
    pres, triple = reference_presentation(nucleus)
    assert len(pres.generators) == generators
    assert len(pres.relators) == relators
    assert pres.abelianization() == (generators, [])
    assert massey_nontrivial(pres, *triple).nontrivial


def test_lattice_membership_is_closed_under_scaling():
    lattice = Lattice([(2, 0, 1), (0, 3, 0)], 3)
    assert lattice.contains((4, 3, 2))
    assert lattice.coefficients((4, 3, 2)) == [2, 1]
    assert not lattice.contains((1, 0, 0))
    with pytest.raises(ValidationError):
        lattice.contains((1, 0))
    for k in range(5):
        assert lattice.contains((4 * k, 3 * k, 2 * k))


def test_certificate_round_trip():
    pres, triple = non_raag_schema(1)
    cert = massey_nontrivial(pres, *triple)
    data = cert.to_dict()
    check = verify_certificate(data)
    assert check.ok, check.problems
    assert check.verdict == NONTRIVIAL


def test_certificate_tampering_is_detected():
    pres, triple = non_raag_schema(1)
    data = massey_nontrivial(pres, *triple).to_dict()
    data["rho"] = [0, 0, 0, 0]
    data["member"] = True
    check = verify_certificate(data)
    assert not check.ok
    assert any("rho" in p for p in check.problems)
    with pytest.raises(ValidationError):
        verify_certificate({"generators": []})


def test_inefficient_presentation_is_refused():
    pres, triple = non_raag_schema(1)
    cert = massey_nontrivial(pres, *triple, second_betti=3)
    assert cert.verdict == UNAVAILABLE
    assert cert.rho == []
    assert verify_certificate(cert.to_dict()).ok


@pytest.mark.slow
@pytest.mark.parametrize("kind", [1, 2, 3])
def test_search_finds_schema_triples(kind):
    pres, _ = non_raag_schema(kind)
    cert = search_triples(pres, budget=5_000_000)
    assert cert is not None and cert.nontrivial
    assert verify_certificate(cert.to_dict()).ok


def test_search_on_raag_finds_nothing(raag):
    assert search_triples(raag, budget=10_000) is None


def test_match_presentations():
    reference, _ = reference_presentation("N3")
    shuffled = Presentation(list(reversed(reference.generators)), list(reversed(reference.relators)),
                            reference.names)
    mapping = match_presentations(reference, shuffled)
    assert mapping is not None
    assert sorted(t for t, _ in mapping.values()) == sorted(shuffled.generators)
    other, _ = reference_presentation("N2")
    assert match_presentations(reference, other) is None


def _n2_variant(third: str) -> Presentation:
    reference, _ = reference_presentation("N2")
    symbols = {g: g for g in reference.generators}
    texts = ["[x, a^-1 b]", "[x, a^-1 c]", third, "[y, b^-1 c]", "[z, b^-1 c]"]
    return Presentation(list(reference.generators), [Relator(parse_word(t, symbols)) for t in texts],
                        reference.names)


def test_match_presentations_by_span():
    reference, _ = reference_presentation("N2")
    # [x, b^-1 c] differs from [z a x a^-1, b^-1 c] by the forms of the other relators
    same_span = _n2_variant("[x, b^-1 c]")
    mapping = match_presentations(reference, same_span)
    assert mapping is not None
    assert sorted(t for t, _ in mapping.values()) == sorted(same_span.generators)
    assert match_presentations(reference, _n2_variant("[y, a^-1 b]")) is None
