"""Exact integer linear algebra: Smith invariants, Hermite bases, lattice membership.

Matrices are given as a sequence of rows; each row is either a dense sequence of
integers or a sparse ``{column: value}`` mapping. All arithmetic uses Python
integers (numpy object arrays for the dense block), so nothing overflows.
"""

from math import gcd
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.logger import logger

Row = Union[Mapping[int, int], Sequence[int]]


def _sparse_rows(rows: Iterable[Row]) -> Dict[int, Dict[int, int]]:
    result = {}
    for i, row in enumerate(rows):
        if isinstance(row, Mapping):
            entries = {c: v for c, v in row.items() if v}
        else:
            entries = {c: v for c, v in enumerate(row) if v}
        if entries:
            result[i] = entries
    return result


def _eliminate_unit_pivots(mat: Dict[int, Dict[int, int]]) -> int:
    """Remove ±1 pivots in place; return how many were removed."""
    col_index: Dict[int, set] = {}
    for r, row in mat.items():
        for c in row:
            col_index.setdefault(c, set()).add(r)

    removed = 0
    progress = True
    while progress:
        progress = False
        for c in sorted(col_index):
            rows_here = col_index.get(c)
            if not rows_here:
                continue
            units = [r for r in rows_here if abs(mat[r][c]) == 1]
            if not units:
                continue
            pivot_row = min(units, key=lambda r: (len(mat[r]), r))
            prow = mat[pivot_row]
            pval = prow[c]
            for r in list(rows_here):
                if r == pivot_row:
                    continue
                row = mat[r]
                factor = row[c] * pval
                for pc, pv in prow.items():
                    nv = row.get(pc, 0) - factor * pv
                    if nv:
                        if pc not in row:
                            col_index.setdefault(pc, set()).add(r)
                        row[pc] = nv
                    elif pc in row:
                        del row[pc]
                        col_index[pc].discard(r)
                if not row:
                    del mat[r]
            # the pivot column is now zero outside the pivot row; column
            # operations clear the rest of the pivot row for free
            for pc in prow:
                col_index[pc].discard(pivot_row)
            del mat[pivot_row]
            del col_index[c]
            removed += 1
            progress = True
    return removed


def _dense_invariants(mat: Dict[int, Dict[int, int]]) -> List[int]:
    """Diagonalize the remaining block; returns nonzero diagonal entries (absolute)."""
    if not mat:
        return []
    cols = sorted({c for row in mat.values() for c in row})
    col_pos = {c: j for j, c in enumerate(cols)}
    D = np.zeros((len(mat), len(cols)), dtype=object)
    for i, row in enumerate(mat.values()):
        for c, v in row.items():
            D[i, col_pos[c]] = v

    diagonal = []
    while D.shape[0] and D.shape[1]:
        nonzero = np.argwhere(D != 0)
        if len(nonzero) == 0:
            break
        i, j = min(nonzero, key=lambda ij: (abs(D[ij[0], ij[1]]), ij[0], ij[1]))
        D[[0, i]] = D[[i, 0]]
        D[:, [0, j]] = D[:, [j, 0]]
        while True:
            p = D[0, 0]
            for r in range(1, D.shape[0]):
                if D[r, 0]:
                    D[r] = D[r] - (D[r, 0] // p) * D[0]
            for c in range(1, D.shape[1]):
                if D[0, c]:
                    D[:, c] = D[:, c] - (D[0, c] // p) * D[:, 0]
            rest_col = [r for r in range(1, D.shape[0]) if D[r, 0]]
            rest_row = [c for c in range(1, D.shape[1]) if D[0, c]]
            if not rest_col and not rest_row:
                break
            # a smaller remainder exists in the pivot row or column: move it up
            candidates = [(abs(D[r, 0]), 0, r) for r in rest_col] + [(abs(D[0, c]), 1, c) for c in rest_row]
            _, axis, k = min(candidates)
            if axis == 0:
                D[[0, k]] = D[[k, 0]]
            else:
                D[:, [0, k]] = D[:, [k, 0]]
        diagonal.append(abs(D[0, 0]))
        D = D[1:, 1:]
    return diagonal


def _normalize_divisibility(diagonal: List[int]) -> List[int]:
    d = sorted(diagonal)
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            g = gcd(d[i], d[j])
            if g != d[i]:
                d[i], d[j] = g, d[i] * d[j] // g
    return sorted(d)


def smith_invariants(rows: Iterable[Row]) -> Tuple[int, List[int]]:
    """Rank and the invariant factors greater than one of an integer matrix.

    Unit pivots are eliminated sparsely first, choosing the ±1 entry in the
    shortest row of each column; what remains goes through a dense Smith
    reduction with smallest-entry pivoting.
    """
    mat = _sparse_rows(rows)
    unit_rank = _eliminate_unit_pivots(mat)
    remaining = sum(len(r) for r in mat.values())
    if remaining:
        logger.debug(f"Dense Smith block: {len(mat)} rows, {remaining} nonzeros")
    diagonal = _normalize_divisibility(_dense_invariants(mat))
    return unit_rank + len(diagonal), [d for d in diagonal if d > 1]


def matrix_rank(rows: Iterable[Row]) -> int:
    return smith_invariants(rows)[0]


def hermite_basis(vectors: Iterable[Sequence[int]], width: Optional[int] = None) -> List[List[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``vectors``.

    Pivots are positive and strictly increase in column; entries above a pivot
    lie in ``[0, pivot)``. Zero rows are dropped.
    """
    vectors = [list(v) for v in vectors]
    if width is None:
        width = max((len(v) for v in vectors), default=0)
    rows = [v + [0] * (width - len(v)) for v in vectors if any(v)]
    if not rows:
        return []
    M = np.array(rows, dtype=object)

    r = 0
    for col in range(width):
        if r >= M.shape[0]:
            break
        while True:
            nz = [i for i in range(r, M.shape[0]) if M[i, col] != 0]
            if not nz:
                break
            pivot = min(nz, key=lambda i: (abs(M[i, col]), i))
            M[[r, pivot]] = M[[pivot, r]]
            done = True
            for i in range(r + 1, M.shape[0]):
                if M[i, col]:
                    M[i] = M[i] - (M[i, col] // M[r, col]) * M[r]
                    if M[i, col]:
                        done = False
            if done:
                break
        if M[r, col] == 0:
            continue
        if M[r, col] < 0:
            M[r] = -M[r]
        for i in range(r):
            M[i] = M[i] - (M[i, col] // M[r, col]) * M[r]
        r += 1

    return [[int(x) for x in M[i]] for i in range(r)]


def lattice_contains(hnf: Sequence[Sequence[int]], vector: Sequence[int]) -> bool:
    """Membership of ``vector`` in the lattice whose Hermite basis is ``hnf``."""
    v = list(vector)
    for row in hnf:
        pc = next(c for c, x in enumerate(row) if x)
        if any(v[c] for c in range(pc)):
            return False
        p = row[pc]
        if v[pc] % p:
            return False
        q = v[pc] // p
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return not any(v)


def solve_in_lattice(basis: Sequence[Sequence[int]], vector: Sequence[int]) -> Optional[List[int]]:
    """Integer coefficients c with sum c_i basis_i == vector, or None."""
    if not basis:
        return [] if not any(vector) else None
    width = len(vector)
    k = len(basis)
    # track combinations by augmenting with the identity
    augmented = [list(b) + [1 if i == j else 0 for j in range(k)] for i, b in enumerate(basis)]
    hnf = hermite_basis(augmented, width + k)
    v = list(vector) + [0] * k
    for row in hnf:
        pc = next(c for c, x in enumerate(row) if x)
        if pc >= width:
            break
        if any(v[c] for c in range(pc)):
            return None
        if v[pc] % row[pc]:
            return None
        q = v[pc] // row[pc]
        v = [a - q * b for a, b in zip(v, row)]
    if any(v[:width]):
        return None
    return [-x for x in v[width:]]


def abelianization(generator_count: int, relator_rows: Iterable[Row]) -> Tuple[int, List[int]]:
    """Free rank and torsion of ⟨generators | relators⟩ made abelian."""
    rank, torsion = smith_invariants(relator_rows)
    return generator_count - rank, torsion
