import pytest

from src.core.fox_calculus import GroupWord, commutator
from src.core.raag_words import RightAngledArtinGroup
from src.validators import ValidationError

a, b, c, d = (GroupWord.gen(s) for s in "abcd")


@pytest.fixture
def path_group():
    # a - b - c - d: consecutive letters commute
    return RightAngledArtinGroup("abcd", [("a", "b"), ("b", "c"), ("c", "d")])


def test_commuting_letters_cancel(path_group):
    assert path_group.is_trivial(commutator(a, b))
    assert path_group.is_trivial(a * b * c * ~b * ~a * ~c) is False
    assert path_group.is_trivial(a * b * ~a * ~b * c * d * ~c * ~d)
    assert not path_group.is_trivial(commutator(a, c))


def test_normal_form_is_canonical(path_group):
    assert path_group.normal_form(b * a) == path_group.normal_form(a * b)
    assert path_group.normal_form(c * a) != path_group.normal_form(a * c)
    assert path_group.equal(a * b * c, b * a * c)
    assert path_group.normal_form(a * ~a) == GroupWord()


def test_normal_form_random(path_group, rng):
    for _ in range(200):
        w = GroupWord(tuple((rng.choice("abcd"), rng.choice((1, -1))) for _ in range(rng.randint(0, 10))))
        nf = path_group.normal_form(w)
        assert path_group.is_trivial(w * ~nf)
        assert path_group.normal_form(nf) == nf
        assert len(nf) <= len(w)


def test_from_relators():
    group = RightAngledArtinGroup.from_relators("abc", [commutator(a, b), commutator(c, b)])
    assert group.commute("a", "b") and group.commute("b", "c")
    assert not group.commute("a", "c")
    assert len(group.relators()) == 2
    with pytest.raises(ValidationError):
        RightAngledArtinGroup.from_relators("abc", [commutator(a * c, b)])
    with pytest.raises(ValidationError):
        RightAngledArtinGroup.from_relators("abc", [a * a])


def test_unknown_letter(path_group):
    with pytest.raises(ValidationError):
        path_group.is_trivial(GroupWord.gen("z"))
    with pytest.raises(ValidationError):
        RightAngledArtinGroup("ab", [("a", "z")])
