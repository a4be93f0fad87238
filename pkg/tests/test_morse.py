import pytest

from src.core.config_space import CubeCell, cell_boundary, chain_complex, homology
from src.core.fox_calculus import same_relator
from src.core.morse import (
    COLLAPSIBLE,
    REDUNDANT,
    CellBlock,
    CriticalCellName,
    MorseComplex,
    delta,
    first_nonzero,
    minus,
    minus_one,
    truncate,
    vec_add,
)
from src.core.pipeline import prepare
from src.core.spanning_order import CACTUS, LINEAR
from src.validators import PreconditionError, ValidationError


def test_count_vectors():
    assert delta(3, 2) == (0, 1, 0)
    assert delta(3, 3, 2) == (0, 0, 2)
    assert vec_add((1, 0, 2), (0, 1, 1)) == (1, 1, 3)
    assert minus_one((0, 2, 1)) == (0, 1, 1)
    assert minus((1, 1, 1), 2) == (0, 0, 1)
    assert first_nonzero((0, 0, 4)) == 3
    assert truncate((1, 2, 3), 2) == (1, 2, 0)
    with pytest.raises(ValidationError):
        delta(2, 3)
    with pytest.raises(ValidationError):
        minus_one((0, 0))


def test_names():
    name = CriticalCellName((CellBlock(3, 1, (1, 0)), CellBlock(7, -2, (0, 2))))
    assert name.dimension == 2
    assert str(name) == "3_1(1,0) ∪ 7_-2(0,2)"
    assert CriticalCellName.single(4, 2, (1, 1)).blocks[0].size == 2


def test_claw_two_particles(corpus):
    ctx = prepare(corpus("Y"), 2)
    assert ctx.mc.critical_counts() == [1, 1, 0]
    pres = ctx.mc.raw_presentation()
    assert len(pres.generators) == 1
    assert pres.relators == []


@pytest.mark.parametrize("name,n", [
    ("Y", 3), ("linear_tree", 2), ("linear_tree", 3), ("single_candy", 3),
    ("N3", 2), ("star_bouquet", 2), ("theta", 3),
])
def test_euler_characteristic_matches_cube_complex(corpus, name, n):
    ctx = prepare(corpus(name), n)
    cc = chain_complex(ctx.subdivided, n)
    assert ctx.mc.euler_characteristic() == cc.euler_characteristic()


def test_trees_at_two_particles_are_free(corpus):
    for name in ("Y", "linear_tree", "caterpillar"):
        mc = prepare(corpus(name), 2).mc
        pres = mc.raw_presentation()
        assert pres.relators == []
        assert len(pres.generators) == mc.critical_counts()[1]


@pytest.mark.parametrize("name,n", [("linear_tree", 3), ("single_candy", 3), ("N3", 2), ("theta", 2)])
def test_raw_presentation_matches_first_homology(corpus, name, n):
    ctx = prepare(corpus(name), n)
    cc = chain_complex(ctx.subdivided, n, 2)
    assert ctx.mc.raw_presentation().abelianization() == homology(cc, 1)


def test_names_round_trip(corpus):
    mc = prepare(corpus("N2"), 4).mc
    for dim in (1, 2):
        for cell in mc.critical_cells(dim):
            name = mc.encode(cell)
            assert name is not None
            assert name.dimension == dim
            assert mc.decode(name) == cell
            assert mc.classify(cell).is_critical


def test_decode_rejects_bad_names(corpus):
    mc = prepare(corpus("N2"), 4).mc
    root = mc.sd.root
    with pytest.raises(ValidationError):
        mc.decode(CriticalCellName.single(root, 5, (0,) * mc.sd.mu(root)))
    essential = next(v for v in mc.graph.vertices if mc.sd.is_essential(v))
    with pytest.raises(ValidationError):
        mc.decode(CriticalCellName.single(essential, 1, (9,) * mc.sd.mu(essential)))


def test_rewriting_lands_on_critical_cells(corpus):
    mc = prepare(corpus("two_candy_chain"), 3).mc
    for cell in mc.critical_cells(2):
        word = mc.rewrite(mc.boundary_word(cell))
        assert all(mc.classify(s).is_critical and s.dimension == 1 for s in word.symbols())
        assert 1 <= mc.case_of(mc.encode(cell)) <= 4
    assert mc.stats["rewrites"] > 0


def test_shortcut_preserves_the_group(corpus):
    g = corpus("single_candy")
    fast = prepare(g, 3, shortcut=True).mc.raw_presentation()
    slow = prepare(g, 3, shortcut=False).mc.raw_presentation()
    assert fast.generators == slow.generators
    assert fast.abelianization() == slow.abelianization()


def test_bold_words(corpus):
    mc = prepare(corpus("linear_tree"), 4).mc
    A = next(v for v in mc.graph.vertices if mc.sd.is_essential(v))
    mu = mc.sd.mu(A)
    assert mc.bold_A(A, (0,) * mu, 1, 1).is_identity()
    assert mc.bold_A(A, delta(mu, 1), 1, 1) == mc.cell_word(A, 1, delta(mu, 1))
    with pytest.raises(ValidationError):
        mc.bold_A(A, delta(mu, 1), mu + 1, 1)


def test_rewriting_needs_one_cells(corpus):
    mc = prepare(corpus("Y"), 2).mc
    with pytest.raises(PreconditionError):
        mc.boundary_word(mc.critical_cells(1)[0])


def test_budget(corpus):
    ctx = prepare(corpus("Y"), 2)
    with pytest.raises(ValidationError):
        MorseComplex(ctx.sd, 2, budget=0)


def _abelian(word):
    counts = {}
    for symbol, exponent in word.letters:
        counts[symbol] = counts.get(symbol, 0) + exponent
    return {s: c for s, c in counts.items() if c}


def _vectors(size, total):
    """Count vectors of the given length with entries summing to at most total."""
    if size == 0:
        return [()]
    return [(x,) + rest for x in range(total + 1) for rest in _vectors(size - 1, total - x)]


def _or_none(f, *args):
    try:
        return f(*args)
    except ValidationError:
        return None


def test_loose_vertex_below_iota_is_moved_first(corpus):
    mc = prepare(corpus("single_candy"), 4).mc
    cell = CubeCell.of((mc.sd.parent_edge[9],), [0, 1, 8])
    status = mc.classify(cell)
    assert status.kind == REDUNDANT
    assert status.witness == 8
    assert mc.rewrite_cell(cell) == mc.cell_word(6, 2, (1, 0))


def test_candy_boundary_terms(corpus):
    mc = prepare(corpus("single_candy"), 4).mc
    name = CriticalCellName((CellBlock(3, -1, (0,)), CellBlock(6, 2, (1, 0))))
    cell = mc.decode(name)
    assert mc.classify(cell).is_critical
    assert mc.case_of(name) == 4
    t1, t2, t3, t4 = (symbol for symbol, _ in mc.boundary_word(cell).letters)
    lifted = mc.cell_word(3, -1, (2,))
    assert mc.rewrite_cell(t1) == mc.cell_word(6, 2, (1, 0)) * lifted
    assert mc.rewrite_cell(t2) == mc.cell_word(6, 2, (1, 0))
    assert mc.rewrite_cell(t3) == lifted
    assert mc.rewrite_cell(t4) == mc.cell_word(6, 2, (2, 0))
    form = mc.closed_form_boundary(cell)
    assert form.case == 4 and form.commutator is None
    assert form.word == mc.rewrite(mc.boundary_word(cell))


@pytest.mark.slow
@pytest.mark.parametrize("name,n,mode", [
    ("single_candy", 4, CACTUS), ("N3", 3, CACTUS), ("N2", 3, CACTUS), ("two_candy_chain", 3, CACTUS),
    ("two_candy_chain", 4, LINEAR), ("pendant_candy_bouquet", 4, LINEAR), ("bouquet_candy", 4, LINEAR),
    ("linear_tree", 4, LINEAR),
])
def test_closed_forms_agree_with_rewriting(corpus, name, n, mode):
    mc = prepare(corpus(name), n, mode).mc
    assert mc.critical_cells(2)
    for cell in mc.critical_cells(2):
        form = mc.closed_form_boundary(cell)
        assert same_relator(form.word, mc.rewrite(mc.boundary_word(cell))), mc.display(cell)
        if mode == LINEAR:
            assert form.case != 1
        if form.case in (1, 2, 3):
            assert form.commutator is not None


def test_closed_forms_need_cactus_numbering(corpus):
    mc = prepare(corpus("K4"), 2).mc
    with pytest.raises(PreconditionError):
        mc.closed_form_boundary(mc.critical_cells(1)[0])


@pytest.mark.parametrize("name", ["linear_tree", "caterpillar"])
def test_bold_A_properties(corpus, name):
    mc = prepare(corpus(name), 4).mc
    n = mc.n
    checked = 0
    for A in (v for v in mc.graph.vertices if mc.sd.is_essential(v) and v != mc.sd.root):
        mu = mc.sd.mu(A)
        for a in _vectors(mu, n - 1):
            for l in range(1, mu + 1):
                for m in range(1, n - sum(a) + 1):
                    word = _or_none(mc.bold_A, A, a, l, m)
                    if word is None:
                        continue
                    if a == truncate(a, l):
                        assert word.is_identity()
                    # only the entries beyond branch l matter
                    tail = vec_add(a, tuple(-x for x in truncate(a, l)))
                    other = _or_none(mc.bold_A, A, tail, l, m)
                    if other is not None:
                        assert word == other
                        checked += 1
                    for alpha in range(sum(a)):
                        v = minus(a, alpha)
                        p = first_nonzero(v)
                        if p <= l:
                            factor = mc.decode(CriticalCellName.single(A, p, vec_add(minus_one(v), delta(mu, l, m))))
                            assert mc.classify(factor).kind == COLLAPSIBLE
    assert checked


def test_bold_BA_properties(corpus):
    mc = prepare(corpus("caterpillar"), 4).mc
    essential = [v for v in mc.graph.vertices if mc.sd.is_essential(v)]
    checked = 0
    for A in essential:
        for B in essential:
            if not A < B or mc.sd.meet(A, B) != A:
                continue
            g = mc.sd.g(A, B)
            mu_a, mu_b = mc.sd.mu(A), mc.sd.mu(B)
            for a in _vectors(mu_a, 1):
                for b in _vectors(mu_b, 2 - sum(a)):
                    word = _or_none(mc.bold_BA, B, A, b, a)
                    if word is None:
                        continue
                    if a == truncate(a, g):
                        assert word == mc.bold_A(B, b, 1, 1)
                    tail = vec_add(a, tuple(-x for x in truncate(a, g)))
                    assert word == mc.bold_BA(B, A, b, tail)
                    if sum(b):
                        inner = mc.bold_A(A, a, g, sum(b) + 2) if sum(a) + sum(b) + 2 <= mc.n else None
                        if inner is not None:
                            assert inner == ~word * inner * mc.bold_A(B, b, 1, 1)
                    checked += 1
    assert checked
    with pytest.raises(ValidationError):
        mc.bold_BA(essential[0], essential[-1], (0,) * mc.sd.mu(essential[0]), (0,) * mc.sd.mu(essential[-1]))


@pytest.mark.parametrize("name,n", [("single_candy", 3), ("two_candy_chain", 3), ("N3", 3)])
def test_shortcut_is_a_word_identity(corpus, name, n):
    g = corpus(name)
    fast = prepare(g, n, shortcut=True).mc
    slow = prepare(g, n, shortcut=False).mc
    assert fast.critical_cells(2) == slow.critical_cells(2)
    for cell in fast.critical_cells(2):
        for symbol, _ in fast.boundary_word(cell).letters:
            assert fast.rewrite_cell(symbol) == slow.rewrite_cell(symbol)
    assert slow.stats["shortcuts"] == 0


def test_rewriting_is_a_homomorphism(corpus):
    mc = prepare(corpus("two_candy_chain"), 3).mc
    words = [mc.boundary_word(c) for c in mc.critical_cells(2)]
    for u, w in zip(words, words[1:] + words[:1]):
        assert mc.rewrite(u * w) == mc.rewrite(u) * mc.rewrite(w)
        assert mc.rewrite(~u) == ~mc.rewrite(u)
        assert mc.rewrite(u * ~u).is_identity()


@pytest.mark.parametrize("name,n", [("single_candy", 3), ("N3", 3), ("theta", 2), ("two_candy_chain", 4)])
def test_boundary_word_abelianizes_to_the_cube_boundary(corpus, name, n):
    mc = prepare(corpus(name), n).mc
    for cell in mc.critical_cells(2):
        expected = {face: -sign for face, sign in cell_boundary(mc.graph, cell).items()}
        assert _abelian(mc.boundary_word(cell)) == expected
