"""Unordered discrete configuration space UD_nΓ as a cube complex.

A k-cube is a set of k edges and n-k vertices whose closures are pairwise
disjoint. Boundaries follow the cubical sign rule with the edges of a cell
ordered by their smaller endpoint.
"""

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from config import settings
from src.core.graph_core import Graph
from src.core.integer_linalg import smith_invariants
from src.utils.logger import logger
from src.validators import (
    BudgetExceededError,
    InvariantError,
    PreconditionError,
    validate_braid_index,
    validate_budget,
    validate_file_path,
)


@dataclass(frozen=True, order=True)
class CubeCell:
    """Off-diagonal cube of UD_nΓ"""
    edges: Tuple[int, ...]
    vertices: Tuple[int, ...]

    @classmethod
    def of(cls, edges: Sequence[int], vertices: Sequence[int]) -> "CubeCell":
        return cls(tuple(sorted(edges)), tuple(sorted(vertices)))

    @property
    def dimension(self) -> int:
        return len(self.edges)

    def without_edge(self, e: int, vertex: int) -> "CubeCell":
        """Face obtained by collapsing edge e onto one of its endpoints."""
        return CubeCell.of([x for x in self.edges if x != e], self.vertices + (vertex,))

    def without_vertex(self, v: int, e: int) -> "CubeCell":
        return CubeCell.of(self.edges + (e,), [x for x in self.vertices if x != v])

    def swap_vertex(self, old: int, new: int) -> "CubeCell":
        return CubeCell.of(self.edges, [new if x == old else x for x in self.vertices])

    def occupied(self, graph: Graph) -> set:
        """Vertices and edge endpoints touched by the cell."""
        used = set(self.vertices)
        for e in self.edges:
            used.update(graph.edges[e])
        return used

    def __str__(self) -> str:
        edges = ",".join(f"e{e}" for e in self.edges)
        verts = ",".join(str(v) for v in self.vertices)
        return f"{{{edges}|{verts}}}"


def check_cell(graph: Graph, cell: CubeCell, n: int) -> None:
    """Raise PreconditionError unless cell is an off-diagonal cube for n particles."""
    if len(cell.edges) + len(cell.vertices) != n:
        raise PreconditionError(f"Cell {cell} does not hold {n} particles")
    seen = set()
    for e in cell.edges:
        a, b = graph.edges[e]
        if a == b or a in seen or b in seen:
            raise PreconditionError(f"Cell {cell} is not off-diagonal")
        seen.update((a, b))
    for v in cell.vertices:
        if v in seen:
            raise PreconditionError(f"Cell {cell} is not off-diagonal")
        seen.add(v)


def _disjoint_edge_sets(graph: Graph, k: int) -> Iterator[Tuple[int, ...]]:
    edges = graph.edges

    def extend(start: int, chosen: List[int], used: set):
        if len(chosen) == k:
            yield tuple(chosen)
            return
        for e in range(start, len(edges)):
            a, b = edges[e]
            if a in used or b in used:
                continue
            chosen.append(e)
            used.update((a, b))
            yield from extend(e + 1, chosen, used)
            chosen.pop()
            used.difference_update((a, b))

    yield from extend(0, [], set())


def enumerate_dimension(graph: Graph, n: int, k: int, budget: Optional[int] = None) -> List[CubeCell]:
    """All k-cubes of UD_nΓ in lexicographic order."""
    validate_braid_index(n)
    if any(a == b for a, b in graph.edges):
        raise PreconditionError("Cube complex needs a graph without loops; subdivide first")
    budget = validate_budget("cell_budget", budget if budget is not None else settings.cell_budget)
    if k < 0 or k > n:
        return []

    cells: List[CubeCell] = []
    for edge_set in _disjoint_edge_sets(graph, k):
        used = set()
        for e in edge_set:
            used.update(graph.edges[e])
        free = [v for v in graph.vertices if v not in used]
        for verts in combinations(free, n - k):
            cells.append(CubeCell(edge_set, verts))
            if len(cells) > budget:
                raise BudgetExceededError(f"More than {budget} cells in dimension {k} for n={n}")
    cells.sort()
    return cells


def enumerate_cells(graph: Graph, n: int, max_dim: Optional[int] = None,
                    budget: Optional[int] = None) -> Dict[int, List[CubeCell]]:
    """Cells of UD_nΓ per dimension, 0 through max_dim."""
    top = n if max_dim is None else min(max_dim, n)
    budget = budget if budget is not None else settings.cell_budget
    result: Dict[int, List[CubeCell]] = {}
    total = 0
    for k in range(top + 1):
        if budget - total <= 0:
            raise BudgetExceededError(f"Cell budget {budget} used up before dimension {k}")
        result[k] = enumerate_dimension(graph, n, k, budget - total)
        total += len(result[k])
    logger.debug(f"UD_{n}({graph.name or 'graph'}): " + ", ".join(f"{len(c)} {k}-cells" for k, c in result.items()))
    return result


def cell_boundary(graph: Graph, cell: CubeCell) -> Dict[CubeCell, int]:
    """Cubical boundary; an edge's larger endpoint gets the positive sign."""
    ordered = sorted(cell.edges, key=lambda e: (min(graph.edges[e]), e))
    faces: Dict[CubeCell, int] = {}
    for position, e in enumerate(ordered):
        sign = -1 if position % 2 else 1
        a, b = graph.edges[e]
        for vertex, s in ((max(a, b), sign), (min(a, b), -sign)):
            face = cell.without_edge(e, vertex)
            faces[face] = faces.get(face, 0) + s
    return {f: c for f, c in faces.items() if c}


@dataclass
class ChainComplex:
    """Cellular chain complex of UD_nΓ with sparse boundary columns"""
    graph: Graph
    n: int
    cells: Dict[int, List[CubeCell]]
    boundaries: Dict[int, List[Dict[int, int]]] = field(default_factory=dict)
    index: Dict[int, Dict[CubeCell, int]] = field(default_factory=dict)

    @property
    def max_dim(self) -> int:
        return max(self.cells)

    def columns(self, k: int) -> List[Dict[int, int]]:
        """∂_k as one {face index: coefficient} column per k-cell."""
        if k <= 0 or k > self.max_dim:
            return []
        return self.boundaries[k]

    def check_boundary_squared(self) -> None:
        for k in range(2, self.max_dim + 1):
            lower = self.boundaries[k - 1]
            for j, column in enumerate(self.boundaries[k]):
                total: Dict[int, int] = {}
                for i, c in column.items():
                    for f, d in lower[i].items():
                        total[f] = total.get(f, 0) + c * d
                if any(total.values()):
                    raise InvariantError(f"∂∘∂ is nonzero on {self.cells[k][j]}")

    def euler_characteristic(self) -> int:
        if self.max_dim < self.n:
            raise PreconditionError("Euler characteristic needs every dimension through n")
        return sum((-1) ** k * len(c) for k, c in self.cells.items())

    def cell_counts(self) -> List[int]:
        return [len(self.cells[k]) for k in sorted(self.cells)]


def boundary_matrices(graph: Graph, cells: Dict[int, List[CubeCell]], n: int) -> ChainComplex:
    cc = ChainComplex(graph=graph, n=n, cells=cells)
    cc.index = {k: {c: i for i, c in enumerate(lst)} for k, lst in cells.items()}
    for k in sorted(cells):
        if k == 0:
            continue
        faces = cc.index[k - 1]
        cc.boundaries[k] = [{faces[f]: c for f, c in cell_boundary(graph, cell).items()} for cell in cells[k]]
    cc.check_boundary_squared()
    return cc


def chain_complex(graph: Graph, n: int, max_dim: Optional[int] = None,
                  budget: Optional[int] = None) -> ChainComplex:
    return boundary_matrices(graph, enumerate_cells(graph, n, max_dim, budget), n)


def homology(cc: ChainComplex, k: int) -> Tuple[int, List[int]]:
    """Betti number and torsion coefficients of H_k(UD_nΓ; ℤ)."""
    if k < 0 or k > cc.n:
        return 0, []
    if k + 1 > cc.max_dim and k + 1 <= cc.n:
        raise PreconditionError(f"H_{k} needs cells through dimension {k + 1}")
    rank_k = smith_invariants(cc.columns(k))[0] if k > 0 else 0
    rank_next, torsion = smith_invariants(cc.columns(k + 1))
    betti = len(cc.cells[k]) - rank_k - rank_next
    logger.debug(f"H_{k}: rank {betti}, torsion {torsion}")
    return betti, torsion


def export_chain_complex(cc: ChainComplex, path) -> Path:
    """Write boundary matrices as `dimension k rows r cols c` blocks of `row col value` triples."""
    target = validate_file_path(str(path))
    lines = [f"# UD_{cc.n} {cc.graph.name}".rstrip()]
    for k in range(1, cc.max_dim + 1):
        columns = cc.boundaries[k]
        lines.append(f"dimension {k} rows {len(cc.cells[k - 1])} cols {len(columns)}")
        for j, column in enumerate(columns):
            for i in sorted(column):
                lines.append(f"{i} {j} {column[i]}")
    target.write_text("\n".join(lines) + "\n")
    logger.info(f"Chain complex written to {target}")
    return target
