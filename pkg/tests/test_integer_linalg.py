from sympy import Matrix

from src.core.integer_linalg import (
    abelianization,
    hermite_basis,
    lattice_contains,
    matrix_rank,
    smith_invariants,
    solve_in_lattice,
)


def test_smith_small():
    assert smith_invariants([[2, 0], [0, 3]]) == (2, [6])
    assert smith_invariants([[2, 4], [6, 8]]) == (2, [2, 4])
    assert smith_invariants([{0: 1, 2: -1}, {1: 1, 2: -1}]) == (2, [])
    assert smith_invariants([]) == (0, [])


def test_abelianization():
    # ⟨a, b | a², [a, b]⟩
    assert abelianization(2, [{0: 2}, {}]) == (1, [2])
    assert abelianization(3, []) == (3, [])


def test_smith_matches_determinant(rng):
    for _ in range(40):
        size = rng.randint(1, 5)
        rows = [[rng.randint(-4, 4) for _ in range(size)] for _ in range(size)]
        det = int(Matrix(rows).det())
        rank, torsion = smith_invariants(rows)
        assert rank == Matrix(rows).rank()
        if det:
            product = 1
            for t in torsion:
                product *= t
            assert product == abs(det)
            for a, b in zip(torsion, torsion[1:]):
                assert b % a == 0


def test_rank_of_random_rectangles(rng):
    for _ in range(40):
        rows = [[rng.randint(-3, 3) for _ in range(rng.randint(1, 6))] for _ in range(rng.randint(1, 6))]
        width = max(len(r) for r in rows)
        padded = [r + [0] * (width - len(r)) for r in rows]
        assert matrix_rank(rows) == Matrix(padded).rank()


def test_hermite_basis():
    assert hermite_basis([[2, 0], [0, 3], [4, 6]]) == [[2, 0], [0, 3]]
    assert hermite_basis([[0, 0]]) == []
    basis = hermite_basis([[3, 1], [5, 2]])
    assert basis == [[1, 0], [0, 1]]


def test_hermite_shape(rng):
    for _ in range(30):
        vectors = [[rng.randint(-5, 5) for _ in range(4)] for _ in range(rng.randint(1, 5))]
        basis = hermite_basis(vectors, 4)
        pivots = [next(c for c, x in enumerate(row) if x) for row in basis]
        assert pivots == sorted(set(pivots))
        for row, pc in zip(basis, pivots):
            assert row[pc] > 0
        for i, pc in enumerate(pivots):
            for above in basis[:i]:
                assert 0 <= above[pc] < basis[i][pc]
        for v in vectors:
            assert lattice_contains(basis, v)


def test_membership():
    hnf = hermite_basis([[2, 0], [0, 3]])
    assert lattice_contains(hnf, [4, 9])
    assert not lattice_contains(hnf, [1, 0])
    assert not lattice_contains(hnf, [2, 1])
    assert lattice_contains([], [0, 0])


def test_solve_in_lattice(rng):
    for _ in range(30):
        basis = [[rng.randint(-4, 4) for _ in range(3)] for _ in range(rng.randint(1, 4))]
        coeffs = [rng.randint(-3, 3) for _ in basis]
        target = [sum(c * b[i] for c, b in zip(coeffs, basis)) for i in range(3)]
        found = solve_in_lattice(basis, target)
        assert found is not None
        assert [sum(c * b[i] for c, b in zip(found, basis)) for i in range(3)] == target
    assert solve_in_lattice([[2, 0], [0, 2]], [1, 0]) is None
    assert solve_in_lattice([], [0, 0]) == []


def test_scaled_membership(rng):
    for _ in range(20):
        basis = hermite_basis([[rng.randint(-4, 4) for _ in range(3)] for _ in range(2)], 3)
        v = [rng.randint(-6, 6) for _ in range(3)]
        if lattice_contains(basis, v):
            for k in range(4):
                assert lattice_contains(basis, [k * x for x in v])
