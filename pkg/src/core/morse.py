"""Discrete gradient on UD_nΓ: cell classification, critical-cell names and the rewriting map r̃.

Critical cells are named A_k(ā) for 1-cells and A_k(ā) ∪ B_ℓ(b̄) for 2-cells
with A < B. The branch k is positive for a tree edge on branch k of A,
negative for a deleted edge d with τ(d) = A and g(A, ι(d)) = |k|, and 0 for
the deleted edge ending at the base (block vertex 0, empty count vector).
The base stack 0_s is implicit.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from config import settings
from src.core.config_space import CubeCell, check_cell
from src.core.fox_calculus import GroupWord, Presentation, Relator, commutator
from src.core.spanning_order import LINEAR, GENERAL, SpanningData
from src.utils.logger import logger
from src.validators import (
    BudgetExceededError,
    InvariantError,
    PreconditionError,
    ValidationError,
    validate_braid_index,
    validate_budget,
    validate_counts,
)

CRITICAL = "critical"
COLLAPSIBLE = "collapsible"
REDUNDANT = "redundant"


@dataclass(frozen=True)
class MorseStatus:
    """Gradient status of a cell with its witness edge or vertex"""
    kind: str
    witness: Optional[int] = None

    @property
    def is_critical(self) -> bool:
        return self.kind == CRITICAL


@dataclass(frozen=True, order=True)
class CellBlock:
    """One A_k(ā) block"""
    vertex: int
    branch: int
    counts: Tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return sum(self.counts)

    def __str__(self) -> str:
        return f"{self.vertex}_{self.branch}({','.join(str(c) for c in self.counts)})"


@dataclass(frozen=True, order=True)
class CriticalCellName:
    """Name of a critical 1- or 2-cell; blocks sorted by vertex"""
    blocks: Tuple[CellBlock, ...]

    @classmethod
    def single(cls, vertex: int, branch: int, counts: Sequence[int] = ()) -> "CriticalCellName":
        return cls((CellBlock(vertex, branch, tuple(counts)),))

    @property
    def dimension(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return " ∪ ".join(str(b) for b in self.blocks)


# ------------------------------------------------------------ count vectors

def delta(size: int, k: int, m: int = 1) -> Tuple[int, ...]:
    """m·δ_k in a vector of the given length (1-based k)."""
    if not 1 <= k <= size:
        raise ValidationError(f"Branch {k} outside 1..{size}")
    return tuple(m if i == k - 1 else 0 for i in range(size))


def vec_add(a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def minus_one(a: Sequence[int]) -> Tuple[int, ...]:
    """ā − 1: subtract one from the first positive entry."""
    out = list(a)
    for i, x in enumerate(out):
        if x > 0:
            out[i] = x - 1
            return tuple(out)
    raise ValidationError(f"Cannot lower the zero vector {tuple(a)}")


def minus(a: Sequence[int], alpha: int) -> Tuple[int, ...]:
    out = tuple(a)
    for _ in range(alpha):
        out = minus_one(out)
    return out


def first_nonzero(a: Sequence[int]) -> int:
    """p(ā), 1-based."""
    for i, x in enumerate(a):
        if x:
            return i + 1
    raise ValidationError(f"Vector {tuple(a)} has no nonzero entry")


def truncate(a: Sequence[int], k: int) -> Tuple[int, ...]:
    """(ā)_k = (a_1, …, a_k, 0, …, 0)."""
    return tuple(x if i < k else 0 for i, x in enumerate(a))


@dataclass
class ClosedForm:
    """Closed-form image of a critical 2-cell boundary"""
    word: GroupWord
    case: int
    terms: Tuple[GroupWord, GroupWord, GroupWord, GroupWord]
    commutator: Optional[Tuple[GroupWord, GroupWord]] = None


class MorseComplex:
    """Discrete gradient for n particles on numbered spanning data"""

    def __init__(self, sd: SpanningData, n: int, shortcut: Optional[bool] = None, budget: Optional[int] = None):
        self.sd = sd
        self.graph = sd.graph
        self.n = validate_braid_index(n)
        self.shortcut = settings.shortcut if shortcut is None else shortcut
        self.budget = validate_budget("rewrite_budget", budget if budget is not None else settings.rewrite_budget)
        self.stats = {"rewrites": 0, "shortcuts": 0, "splits": 0, "erased": 0}
        self._memo: Dict[CubeCell, GroupWord] = {}
        self._critical: Dict[int, List[CubeCell]] = {}
        self._preorder = sd._preorder()
        self._subtree: Dict[int, List[int]] = {}

    # ------------------------------------------------------ classification

    def _occupied(self, cell: CubeCell) -> set:
        return cell.occupied(self.graph)

    def is_blocked(self, v: int, occupied: set) -> bool:
        p = self.sd.parent[v]
        return p is None or p in occupied

    def is_order_respecting(self, e: int, cell: CubeCell) -> bool:
        if e in self.sd.deleted_set:
            return False
        t, i = self.sd.tau(e), self.sd.iota(e)
        return not any(self.sd.parent[v] == t and t < v < i for v in cell.vertices)

    def unblocked(self, cell: CubeCell) -> List[int]:
        occupied = self._occupied(cell)
        return sorted(v for v in cell.vertices if not self.is_blocked(v, occupied))

    def classify(self, cell: CubeCell) -> MorseStatus:
        loose = self.unblocked(cell)
        # a loose vertex below ι(e) is moved before e collapses, even above τ(e)
        for e in sorted(cell.edges, key=lambda x: (self.sd.iota(x), x)):
            if self.is_order_respecting(e, cell) and not any(v < self.sd.iota(e) for v in loose):
                return MorseStatus(COLLAPSIBLE, e)
        if loose:
            return MorseStatus(REDUNDANT, loose[0])
        return MorseStatus(CRITICAL)

    # ------------------------------------------------------ critical cells

    def _edge_may_be_critical(self, e: int) -> bool:
        if e in self.sd.deleted_set:
            return True
        t, i = self.sd.tau(e), self.sd.iota(e)
        return any(c < i for c in self.sd.children[t])

    def _blocked_sets(self, used: set, count: int) -> Iterator[Tuple[int, ...]]:
        free = [v for v in self.graph.vertices if v not in used]
        parent = self.sd.parent

        def extend(start: int, chosen: List[int], occupied: set):
            if len(chosen) == count:
                yield tuple(chosen)
                return
            for idx in range(start, len(free)):
                v = free[idx]
                if parent[v] is None or parent[v] in occupied:
                    chosen.append(v)
                    occupied.add(v)
                    yield from extend(idx + 1, chosen, occupied)
                    chosen.pop()
                    occupied.discard(v)

        yield from extend(0, [], set(used))

    def critical_cells(self, dim: int) -> List[CubeCell]:
        """Critical cells of the given dimension, ordered by name."""
        if dim in self._critical:
            return self._critical[dim]
        if dim < 0 or dim > self.n:
            return []
        edges = [e for e in range(len(self.graph.edges)) if self._edge_may_be_critical(e)]
        found: List[CubeCell] = []
        visited = 0

        def edge_sets(start: int, chosen: List[int], used: set):
            if len(chosen) == dim:
                yield tuple(chosen), used
                return
            for idx in range(start, len(edges)):
                a, b = self.graph.edges[edges[idx]]
                if a in used or b in used:
                    continue
                chosen.append(edges[idx])
                yield from edge_sets(idx + 1, chosen, used | {a, b})
                chosen.pop()

        for edge_set, used in edge_sets(0, [], set()):
            for verts in self._blocked_sets(used, self.n - dim):
                visited += 1
                if visited > settings.cell_budget:
                    raise BudgetExceededError(f"More than {settings.cell_budget} candidate cells in dimension {dim}")
                cell = CubeCell.of(edge_set, verts)
                if self.classify(cell).is_critical:
                    found.append(cell)

        found.sort(key=self._sort_key)
        self._critical[dim] = found
        logger.debug(f"{len(found)} critical {dim}-cells for n={self.n}")
        return found

    def _sort_key(self, cell: CubeCell):
        name = self.encode(cell)
        return (0, name, cell) if name is not None else (1, CriticalCellName(()), cell)

    def critical_names(self, dim: int) -> List[CriticalCellName]:
        return [self.encode(c) for c in self.critical_cells(dim)]

    def critical_counts(self) -> List[int]:
        return [len(self.critical_cells(k)) for k in range(self.n + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.critical_counts()))

    # ---------------------------------------------------------- naming

    def _block_edge(self, block: CellBlock) -> int:
        sd = self.sd
        if block.branch == 0:
            if block.vertex != sd.root:
                raise ValidationError(f"Branch 0 is reserved for the deleted edge at the base, got {block}")
            e = sd.deleted_edge(sd.root, 0)
        elif block.branch > 0:
            if block.branch > sd.mu(block.vertex):
                raise ValidationError(f"Vertex {block.vertex} has no branch {block.branch}")
            e = sd.parent_edge[sd.child_on_branch(block.vertex, block.branch)]
        else:
            e = sd.deleted_edge(block.vertex, -block.branch)
        if e is None:
            raise ValidationError(f"No edge named {block}")
        return e

    def _subtree_of(self, v: int) -> List[int]:
        if v not in self._subtree:
            order, stack = [], [v]
            while stack:
                x = stack.pop()
                order.append(x)
                stack.extend(reversed(self.sd.children[x]))
            self._subtree[v] = order
        return self._subtree[v]

    def decode(self, name: CriticalCellName) -> CubeCell:
        """Cell with the named edges and the blocked vertices stacked on each branch."""
        sd = self.sd
        edges, used = [], set()
        for block in name.blocks:
            validate_counts(block.counts, sd.mu(block.vertex))
            e = self._block_edge(block)
            a, b = self.graph.edges[e]
            if a in used or b in used:
                raise ValidationError(f"Blocks of {name} overlap")
            edges.append(e)
            used.update((a, b))

        vertices: List[int] = []
        for block in name.blocks:
            for k, count in enumerate(block.counts, start=1):
                if not count:
                    continue
                stack = [v for v in self._subtree_of(sd.child_on_branch(block.vertex, k)) if v not in used][:count]
                if len(stack) < count:
                    raise ValidationError(f"Branch {k} of {block.vertex} cannot hold {count} vertices")
                used.update(stack)
                vertices.extend(stack)

        s = self.n - len(edges) - sum(b.size for b in name.blocks)
        if s < 0:
            raise ValidationError(f"{name} holds more than {self.n} particles")
        base = [v for v in self._preorder if v not in used][:s]
        if len(base) < s:
            raise ValidationError(f"No room for the base stack of {name}")
        return CubeCell.of(edges, vertices + base)

    def encode(self, cell: CubeCell) -> Optional[CriticalCellName]:
        """Name of a cell in the A_k(ā) scheme, or None when the scheme cannot express it."""
        sd = self.sd
        anchors: Dict[int, int] = {}
        blocks: Dict[int, List] = {}
        for e in cell.edges:
            t, i = sd.tau(e), sd.iota(e)
            if e in sd.deleted_set:
                if t == sd.root:
                    branch = 0
                else:
                    k = sd.g(t, i)
                    if k == 0:
                        return None
                    branch = -k
            else:
                if t == sd.root:
                    return None
                branch = sd.g(t, i)
                anchors[i] = t
            anchors[t] = t
            blocks[t] = [branch, [0] * sd.mu(t)]

        members = set(cell.vertices)
        for v in cell.vertices:
            x = v
            while True:
                p = sd.parent[x]
                if p is None:
                    break
                if p in anchors:
                    a = anchors[p]
                    if a != sd.root:
                        k = sd.g(a, v)
                        if k == 0:
                            return None
                        blocks[a][1][k - 1] += 1
                    break
                if p not in members:
                    return None
                x = p

        name = CriticalCellName(tuple(sorted(CellBlock(a, b, tuple(c)) for a, (b, c) in blocks.items())))
        try:
            if self.decode(name) != cell:
                return None
        except ValidationError:
            return None
        return name

    def display(self, cell: CubeCell) -> str:
        name = self.encode(cell)
        if name is None:
            return str(cell)
        parts = []
        for block in name.blocks:
            if block.branch == 0:
                parts.append(f"{self.sd.iota(self._block_edge(block))}_0")
            else:
                parts.append(str(block))
        return " ∪ ".join(parts)

    # --------------------------------------------------------- rewriting

    def _plan(self, cell: CubeCell):
        if cell.dimension != 1:
            raise PreconditionError(f"Rewriting acts on 1-cells, got {cell}")
        sd = self.sd
        (e,) = cell.edges
        status = self.classify(cell)
        if status.is_critical:
            return ("letter",)
        loose = self.unblocked(cell)
        if self.is_order_respecting(e, cell) and not any(v < sd.iota(e) for v in loose):
            return ("erase",)
        if not loose:
            raise InvariantError(f"Cell {cell} is neither critical, collapsible nor redundant")
        v = loose[0]
        p = sd.parent[v]
        tree_edge = sd.parent_edge[v]
        ends = set(self.graph.edges[e])
        if self.shortcut and not any(p < w < v for w in set(cell.vertices) | ends):
            return ("alias", cell.swap_vertex(v, p))
        rest = [x for x in cell.vertices if x != v]
        c1 = CubeCell.of((tree_edge,), rest + [sd.iota(e)])
        c2 = CubeCell.of((e,), rest + [p])
        c3 = CubeCell.of((tree_edge,), rest + [sd.tau(e)])
        return ("split", c1, c2, c3)

    def rewrite_cell(self, cell: CubeCell) -> GroupWord:
        """r̃ of a single 1-cell."""
        if cell in self._memo:
            return self._memo[cell]
        memo = self._memo
        plans: Dict[CubeCell, tuple] = {}
        stack = [cell]
        on_stack = {cell}
        steps = 0
        while stack:
            c = stack[-1]
            if c in memo:
                stack.pop()
                on_stack.discard(c)
                continue
            if c not in plans:
                steps += 1
                if steps > self.budget:
                    raise BudgetExceededError(f"Rewriting {cell} took more than {self.budget} steps")
                plans[c] = self._plan(c)
            plan = plans[c]
            kind = plan[0]
            if kind == "letter":
                memo[c] = GroupWord.gen(c)
            elif kind == "erase":
                memo[c] = GroupWord.identity()
                self.stats["erased"] += 1
            else:
                pending = [x for x in plan[1:] if x not in memo]
                if pending:
                    # one child at a time keeps the stack equal to the ancestor chain
                    if pending[0] in on_stack:
                        raise InvariantError(f"Rewriting of {pending[0]} does not terminate")
                    stack.append(pending[0])
                    on_stack.add(pending[0])
                    continue
                if kind == "alias":
                    memo[c] = memo[plan[1]]
                    self.stats["shortcuts"] += 1
                else:
                    memo[c] = memo[plan[1]] * memo[plan[2]] * ~memo[plan[3]]
                    self.stats["splits"] += 1
            stack.pop()
            on_stack.discard(c)
        self.stats["rewrites"] += steps
        return memo[cell]

    def rewrite(self, word: GroupWord) -> GroupWord:
        """r̃ of a word in 1-cells; the result uses critical 1-cells only."""
        pieces = []
        for symbol, exponent in word.letters:
            image = self.rewrite_cell(symbol)
            pieces.append(image if exponent > 0 else ~image)
        return GroupWord.product(pieces)

    def boundary_word(self, cell: CubeCell) -> GroupWord:
        """Boundary loop of a 2-cell: t1 t2 t3⁻¹ t4⁻¹ from (ι(e), ι(f))."""
        if cell.dimension != 2:
            raise PreconditionError(f"Boundary words are defined for 2-cells, got {cell}")
        check_cell(self.graph, cell, self.n)
        sd = self.sd
        e, f = sorted(cell.edges, key=lambda x: (sd.tau(x), x))
        verts = list(cell.vertices)
        t1 = CubeCell.of((e,), verts + [sd.iota(f)])
        t2 = CubeCell.of((f,), verts + [sd.tau(e)])
        t3 = CubeCell.of((e,), verts + [sd.tau(f)])
        t4 = CubeCell.of((f,), verts + [sd.iota(e)])
        return GroupWord(((t1, 1), (t2, 1), (t3, -1), (t4, -1)))

    # -------------------------------------------------------- bold words

    def cell_word(self, vertex: int, branch: int, counts: Sequence[int]) -> GroupWord:
        """r̃ of the 1-cell vertex_branch(counts) ∪ 0_s."""
        return self.rewrite_cell(self.decode(CriticalCellName.single(vertex, branch, counts)))

    def bold_A(self, A: int, a: Sequence[int], l: int, m: int) -> GroupWord:
        """𝐀(ā, ℓ, m) = r̃(∏_α A_{p(ā−α)}((ā−α−1) + mδ_ℓ))."""
        mu = self.sd.mu(A)
        a = validate_counts(a, mu)
        if not sum(a):
            return GroupWord.identity()
        if not 1 <= l <= mu:
            raise ValidationError(f"Branch {l} outside 1..{mu} at {A}")
        if not 1 <= m <= self.n - sum(a):
            raise ValidationError(f"Multiplicity {m} outside 1..{self.n - sum(a)}")
        factors = []
        for alpha in range(sum(a)):
            v = minus(a, alpha)
            factors.append(self.cell_word(A, first_nonzero(v), vec_add(minus_one(v), delta(mu, l, m))))
        return GroupWord.product(factors)

    def bold_BA(self, B: int, A: int, b: Sequence[int], a: Sequence[int]) -> GroupWord:
        """(𝐁,𝐀)(b̄, ā) = r̃(∏_α 𝐀(α)·B(α)·𝐀(α)⁻¹)."""
        if not A < B:
            raise ValidationError(f"Expected {A} < {B}")
        mu_b = self.sd.mu(B)
        b = validate_counts(b, mu_b)
        l = self.sd.g(A, B)
        factors = []
        for alpha in range(sum(b)):
            conj = self.bold_A(A, a, l, sum(b) + 1 - alpha)
            v = minus(b, alpha)
            factors.append(conj * self.cell_word(B, first_nonzero(v), vec_add(minus_one(v), delta(mu_b, 1))) * ~conj)
        return GroupWord.product(factors)

    # ------------------------------------------------------- closed forms

    def _bumped(self, vertex: int, counts: Sequence[int], k: int, amount: int) -> Tuple[int, ...]:
        """counts + amount·δ_k; the base carries no count vector."""
        if vertex == self.sd.root:
            return tuple(counts)
        return vec_add(counts, delta(self.sd.mu(vertex), k, amount))

    def case_of(self, name: CriticalCellName) -> int:
        """Which of the four meet configurations a 2-cell A_k(ā) ∪ B_ℓ(b̄) falls in."""
        sd = self.sd
        first, second = name.blocks
        A, B = first.vertex, second.vertex
        if sd.meet(A, B) < A:
            return 1
        C = sd.meet(B, sd.iota(self._block_edge(first)))
        if C == B:
            return 4
        if C == A:
            return 3
        return 2

    def _linear_check(self, general: GroupWord, simple: GroupWord, what: str, name: CriticalCellName) -> GroupWord:
        if general != simple:
            raise InvariantError(f"{what} of {name} is {general}, expected {simple} on linear spanning data")
        return simple

    def closed_form_boundary(self, cell: CubeCell) -> ClosedForm:
        """r̃(∂c) assembled from the bold-word formulas for the four cases.

        On linear spanning data every 𝐀-conjugator is trivial and the
        (𝐁,𝐀) words reduce to 𝐁(b̄,1,1); both are checked against the
        general words before the simplified forms are used.
        """
        sd = self.sd
        if sd.mode == GENERAL:
            raise PreconditionError("Closed forms need cactus spanning data")
        name = self.encode(cell)
        if name is None or name.dimension != 2:
            raise PreconditionError(f"{cell} is not a named 2-cell")
        (A, k, a), (B, l, b) = [(x.vertex, x.branch, x.counts) for x in name.blocks]
        case = self.case_of(name)
        linear = sd.mode == LINEAR
        if case == 1 and linear:
            raise InvariantError(f"Meet below {A} on linear spanning data for {name}")
        one = GroupWord.identity()
        size_b = sum(b)
        B_word = self.cell_word(B, l, b)

        if case == 1:
            X = sd.meet(A, B)
            omega = self.bold_A(X, delta(sd.mu(X), sd.g(X, B), size_b + 1), sd.g(X, A), sum(a) + 1)
            P = omega * self.cell_word(A, k, a) * ~omega
            terms = (P, B_word, P, B_word)
            pair = (P, B_word)
        elif case == 2:
            C = sd.meet(B, sd.iota(self._block_edge(name.blocks[0])))
            omega = self.bold_A(A, a, abs(k), size_b + 1)
            if linear:
                omega = self._linear_check(omega, one, "ω", name)
            gamma = self.bold_A(C, delta(sd.mu(C), sd.g(C, B), size_b + 1), 1, 1)
            P = gamma * self.cell_word(A, k, self._bumped(A, a, abs(k), size_b + 1))
            Q = omega * B_word * ~omega
            terms = (P, Q, P, Q)
            pair = (P, Q)
        elif case == 3:
            nu = sd.g(A, B)
            lifted = self.cell_word(A, k, self._bumped(A, a, nu, size_b + 1))
            omega1 = self.bold_A(A, self._bumped(A, a, abs(k), 1), nu, size_b + 1)
            omega2 = self.bold_A(A, a, nu, size_b + 1)
            if linear:
                omega1 = self._linear_check(omega1, one, "ω₁", name)
                omega2 = self._linear_check(omega2, one, "ω₂", name)
            terms = (lifted, omega2 * B_word * ~omega2, lifted, omega1 * B_word * ~omega1)
            pair = (lifted * omega2 * ~omega1, omega1 * B_word * ~omega1)
        else:
            lifted = self.cell_word(A, k, self._bumped(A, a, abs(k), size_b + 1))
            omega1 = self.bold_A(A, a, abs(k), size_b + 2)
            omega2 = self.bold_A(A, a, abs(k), size_b + 1)
            raised_b = vec_add(b, delta(sd.mu(B), abs(l)))
            beta1 = self.bold_BA(B, A, raised_b, a)
            beta2 = self.bold_BA(B, A, b, a)
            if linear:
                omega1 = self._linear_check(omega1, one, "ω₁", name)
                omega2 = self._linear_check(omega2, one, "ω₂", name)
                beta1 = self._linear_check(beta1, self.bold_A(B, raised_b, 1, 1), "β₁", name)
                beta2 = self._linear_check(beta2, self.bold_A(B, b, 1, 1), "β₂", name)
            raised = self.cell_word(B, l, vec_add(b, delta(sd.mu(B), 1)))
            terms = (beta1 * lifted, omega2 * B_word * ~omega2, beta2 * lifted, omega1 * raised * ~omega1)
            pair = None

        word = terms[0] * terms[1] * ~terms[2] * ~terms[3]
        if pair is not None and commutator(*pair) != word:
            raise InvariantError(f"Closed form of {name} is not the expected commutator")
        return ClosedForm(word=word, case=case, terms=terms, commutator=pair)

    # ------------------------------------------------------ presentation

    def raw_presentation(self) -> Presentation:
        """⟨critical 1-cells | r̃(∂c) for critical 2-cells c⟩."""
        generators = self.critical_cells(1)
        names = {c: self.display(c) for c in generators}
        relators = []
        trivial = 0
        for c in self.critical_cells(2):
            word = self.rewrite(self.boundary_word(c))
            if word.is_identity():
                trivial += 1
                continue
            relators.append(Relator(word=word, source=self.display(c)))
        logger.info(f"Raw presentation: {len(generators)} generators, {len(relators)} relators"
                    + (f" ({trivial} trivial boundaries dropped)" if trivial else ""))
        return Presentation(generators=list(generators), relators=relators, names=names)
