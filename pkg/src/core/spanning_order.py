"""Maximal tree, base vertex and vertex numbering for the discrete gradient.

Vertices are renumbered by first visit of a depth-first walk from the base, so
vertex 0 is the base and every tree path away from the base increases. Edges
keep their ids; an edge closing a cycle during the walk is a deleted edge.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx

from src.core.graph_core import Graph, chains, detect_nuclei, is_cactus
from src.utils.logger import logger
from src.validators import PreconditionError

GENERAL = "general"
CACTUS = "cactus"
LINEAR = "linear"
MODES = (GENERAL, CACTUS, LINEAR)


@dataclass
class PropertyReport:
    """Outcome of the (T1)-(T5) checks with counterexamples"""
    failures: Dict[str, List[str]] = field(default_factory=dict)
    checked: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def holds(self, name: str) -> bool:
        return name in self.checked and not self.failures.get(name)

    def to_dict(self) -> Dict:
        return {name: self.failures.get(name, []) for name in self.checked}


class SpanningData:
    """Numbered graph with its maximal tree and branch bookkeeping"""

    def __init__(self, graph: Graph, parent: Sequence[Optional[int]], children: Sequence[Sequence[int]],
                 deleted: Sequence[int], mode: str = GENERAL, relabel: Optional[Dict[int, int]] = None):
        self.graph = graph
        self.parent = list(parent)
        self.children = [list(c) for c in children]
        self.deleted = list(deleted)
        self.mode = mode
        self.relabel = dict(relabel or {v: v for v in graph.vertices})
        self.degree = graph.degrees()
        self.deleted_set = set(deleted)
        self.root = next(v for v in graph.vertices if self.parent[v] is None)
        self.tree_edges = [i for i in range(len(graph.edges)) if i not in self.deleted_set]
        self.orient = [(max(a, b), min(a, b)) for a, b in graph.edges]

        # tree edge whose initial vertex is v
        self.parent_edge: Dict[int, int] = {}
        for e in self.tree_edges:
            i, t = self.orient[e]
            if self.parent[i] == t:
                self.parent_edge[i] = e
        self.depth = [0] * graph.vertex_count
        for v in self._preorder():
            if self.parent[v] is not None:
                self.depth[v] = self.depth[self.parent[v]] + 1
        self._branch_of_child = {}
        for v in graph.vertices:
            for i, c in enumerate(self.children[v]):
                self._branch_of_child[c] = i + 1 if v != self.root else i
        self._g_cache: Dict[Tuple[int, int], int] = {}
        self._deleted_by_branch: Dict[Tuple[int, int], int] = {}
        for d in self.deleted:
            i, t = self.orient[d]
            self._deleted_by_branch.setdefault((t, self.g(t, i)), d)

    def _preorder(self) -> List[int]:
        order, stack = [], [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return order

    # ------------------------------------------------------------ queries

    def iota(self, e: int) -> int:
        return self.orient[e][0]

    def tau(self, e: int) -> int:
        return self.orient[e][1]

    def is_essential(self, v: int) -> bool:
        return self.degree[v] >= 3

    def mu(self, v: int) -> int:
        """Largest branch number at v: tree degree minus one."""
        return len(self.children[v]) - (1 if v == self.root else 0)

    def child_on_branch(self, v: int, k: int) -> int:
        return self.children[v][k - 1 if v != self.root else k]

    def ancestors(self, v: int) -> List[int]:
        """v, parent(v), …, base."""
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path

    def is_ancestor(self, a: int, v: int) -> bool:
        while v is not None and self.depth[v] >= self.depth[a]:
            if v == a:
                return True
            v = self.parent[v]
        return False

    def g(self, v: int, w: int) -> int:
        """Branch of v containing w; 0 when w is not below v."""
        key = (v, w)
        if key in self._g_cache:
            return self._g_cache[key]
        result = 0
        x = w
        while x is not None and self.depth[x] > self.depth[v]:
            if self.parent[x] == v:
                result = self._branch_of_child[x]
                break
            x = self.parent[x]
        self._g_cache[key] = result
        return result

    def lca(self, v: int, w: int) -> int:
        while self.depth[v] > self.depth[w]:
            v = self.parent[v]
        while self.depth[w] > self.depth[v]:
            w = self.parent[w]
        while v != w:
            v, w = self.parent[v], self.parent[w]
        return v

    def meet(self, v: int, w: int) -> int:
        """v∧w: the largest vertex of degree ≥ 3 on the common part of the paths to the base."""
        x = self.lca(v, w)
        while x is not None:
            if self.is_essential(x):
                return x
            x = self.parent[x]
        return self.root

    def branch_queries(self, v: int, w: int) -> Tuple[int, int, int]:
        return self.meet(v, w), self.g(v, w), self.mu(v)

    def deleted_edge(self, tau: int, branch: int) -> Optional[int]:
        """Deleted edge with terminal vertex tau on the given branch of tau."""
        return self._deleted_by_branch.get((tau, branch))

    def base_deleted_edge(self, iota: int) -> Optional[int]:
        for d in self.deleted:
            if self.orient[d] == (iota, self.root):
                return d
        return None

    def label(self, v: int) -> int:
        return self.graph.labels[v]

    # ------------------------------------------------------------- report

    def to_text(self) -> str:
        lines = [f"mode {self.mode}"]
        lines += [f"tree {self.orient[e][0]} {self.orient[e][1]}" for e in self.tree_edges]
        lines += [f"deleted {self.orient[d][0]} {self.orient[d][1]}" for d in self.deleted]
        lines += [f"number {old} {new}" for old, new in sorted(self.relabel.items())]
        return "\n".join(lines) + "\n"

    def swap_labels(self, a: int, b: int) -> "SpanningData":
        """Copy with the numbers of two vertices exchanged (tree unchanged)."""
        swap = {a: b, b: a}
        s = lambda v: swap.get(v, v) if v is not None else None
        graph = Graph(self.graph.vertex_count, tuple((s(x), s(y)) for x, y in self.graph.edges),
                      None, s(self.graph.base) if self.graph.base is not None else None,
                      self.graph.name, tuple(self.graph.labels[s(v)] for v in self.graph.vertices))
        parent = [None] * len(self.parent)
        children = [[] for _ in self.children]
        for v in self.graph.vertices:
            parent[s(v)] = s(self.parent[v])
            children[s(v)] = [s(c) for c in self.children[v]]
        return SpanningData(graph, parent, children, self.deleted, self.mode,
                            {old: s(new) for old, new in self.relabel.items()})


# ----------------------------------------------------------- construction

class _Walker:
    """Depth-first walk with deterministic child order"""

    def __init__(self, g: Graph):
        self.g = g
        self.deg = g.degrees()
        simple = nx.Graph([(a, b) for a, b in g.edges])
        simple.add_nodes_from(g.vertices)
        self.block_of: Dict[int, int] = {}
        for i, block in enumerate(nx.biconnected_component_edges(simple)):
            block = list(block)
            if len(block) < 2:
                continue
            for a, b in block:
                self.block_of[(min(a, b), max(a, b))] = i
        self._side_cache: Dict[Tuple[int, int], int] = {}

    def _block(self, e: int) -> Optional[int]:
        a, b = self.g.edges[e]
        return self.block_of.get((min(a, b), max(a, b)))

    def essential_beyond(self, v: int, w: int) -> int:
        """Essential vertices reachable from w without passing v."""
        key = (v, w)
        if key not in self._side_cache:
            seen, stack = {v, w}, [w]
            while stack:
                x = stack.pop()
                for y in self.g.neighbors(x):
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            seen.discard(v)
            self._side_cache[key] = sum(1 for x in seen if self.deg[x] >= 3)
        return self._side_cache[key]

    def ordered_ends(self, v: int, parent_edge: Optional[int]):
        if self.g.rotation is not None:
            rot = list(self.g.rotation[v])
            if parent_edge is not None:
                k = next(i for i, (e, _) in enumerate(rot) if e == parent_edge)
                rot = rot[k + 1:] + rot[:k]
            return rot
        ends = [end for end in self.g.incident(v) if end[0] != parent_edge]
        parent_block = self._block(parent_edge) if parent_edge is not None else None

        def key(end):
            w = self.g.other_end(end)
            same_cycle = parent_block is not None and self._block(end[0]) == parent_block
            return (0 if same_cycle else 1, self.essential_beyond(v, w), w, end[0])

        return sorted(ends, key=key)

    def walk(self, base: int):
        """Returns (visit order, parent, children, deleted edges) in old ids."""
        g = self.g
        order = [base]
        visited = {base}
        parent: Dict[int, Optional[int]] = {base: None}
        children: Dict[int, List[int]] = {v: [] for v in g.vertices}
        deleted: List[int] = []
        used_edges: Set[int] = set()
        stack = [(base, None, iter(self.ordered_ends(base, None)))]
        while stack:
            v, pe, it = stack[-1]
            advanced = False
            for end in it:
                e = end[0]
                if e in used_edges:
                    continue
                used_edges.add(e)
                w = g.other_end(end)
                if w in visited:
                    deleted.append(e)
                    continue
                visited.add(w)
                order.append(w)
                parent[w] = v
                children[v].append(w)
                stack.append((w, e, iter(self.ordered_ends(w, e))))
                advanced = True
                break
            if not advanced:
                stack.pop()
        return order, parent, children, deleted


def _base_candidates(g: Graph) -> List[int]:
    if g.base is not None:
        return [g.base]
    deg = g.degrees()
    leaves = [v for v in g.vertices if deg[v] == 1]
    on_cycle = set()
    simple = nx.Graph([(a, b) for a, b in g.edges])
    for block in nx.biconnected_components(simple):
        if len(block) >= 3:
            on_cycle.update(block)
    cycle_vertices = [v for v in g.vertices if deg[v] == 2 and v in on_cycle]
    rest = [v for v in g.vertices if v not in leaves and v not in cycle_vertices]
    return leaves + cycle_vertices + rest


def _numbered(g: Graph, base: int, walker: _Walker, mode: str) -> SpanningData:
    order, parent, children, deleted = walker.walk(base)
    relabel = {old: new for new, old in enumerate(order)}
    edges = tuple((relabel[a], relabel[b]) for a, b in g.edges)
    labels = tuple(g.labels[old] for old in order)
    rotation = None
    if g.rotation is not None:
        rotation = tuple(g.rotation[old] for old in order)
    numbered = Graph(g.vertex_count, edges, rotation, 0, g.name, labels)
    new_parent = [None] * g.vertex_count
    new_children: List[List[int]] = [[] for _ in g.vertices]
    for old in g.vertices:
        p = parent[old]
        new_parent[relabel[old]] = relabel[p] if p is not None else None
        new_children[relabel[old]] = [relabel[c] for c in children[old]]
    return SpanningData(numbered, new_parent, new_children, deleted, mode, relabel)


def build_spanning(g: Graph, mode: str = CACTUS) -> SpanningData:
    """Choose base, maximal tree and numbering; try bases until the properties hold."""
    if mode not in MODES:
        raise PreconditionError(f"Unknown spanning mode {mode!r}")
    if not g.is_simple():
        raise PreconditionError("Spanning order needs a simple graph; subdivide first")
    if mode != GENERAL and not is_cactus(g):
        raise PreconditionError(f"{g.name or 'graph'} is not a cactus graph; use general mode")
    if mode == LINEAR:
        found = detect_nuclei(g)
        if found:
            raise PreconditionError(f"{g.name or 'graph'} contains {', '.join(found)}; linear numbering needs no nuclei")

    walker = _Walker(g)
    failures = {}
    for base in _base_candidates(g):
        sd = _numbered(g, base, walker, mode)
        if mode == GENERAL:
            return sd
        report = verify_properties(sd)
        if report.ok:
            logger.debug(f"Base {g.labels[base]} accepted for {g.name or 'graph'} ({mode})")
            return sd
        failed = [name for name in report.checked if not report.holds(name)]
        failures[g.labels[base]] = failed
        logger.debug(f"Base {g.labels[base]} of {g.name or 'graph'} fails {', '.join(failed)}")
    raise PreconditionError(
        f"No base of {g.name or 'graph'} satisfies every property in {mode} mode "
        f"(tried {len(failures)}: {failures})"
    )


# ------------------------------------------------------------- properties

def _blocks(sd: SpanningData) -> List[Set[int]]:
    """Vertex sets of building blocks: essential vertices with their own chains."""
    g = sd.graph
    deg = sd.degree
    essential = [v for v in g.vertices if deg[v] >= 3]
    owner = {v: v for v in essential}
    graph_chains = chains(g)
    for ch in graph_chains:
        if ch.start != ch.end and deg[ch.start] >= 3 and deg[ch.end] >= 3:
            # a chain between two essential vertices on a common cycle makes them one candy
            others = [c for c in graph_chains if {c.start, c.end} == {ch.start, ch.end} and c is not ch]
            if others:
                a, b = owner[ch.start], owner[ch.end]
                for v in essential:
                    if owner[v] == b:
                        owner[v] = a
    groups: Dict[int, Set[int]] = {}
    for v in essential:
        groups.setdefault(owner[v], set()).add(v)
    for ch in graph_chains:
        ends = [x for x in (ch.start, ch.end) if deg[x] >= 3]
        if not ends:
            continue
        if len(ends) == 2 and owner[ends[0]] != owner[ends[1]]:
            continue
        groups[owner[ends[0]]].update(ch.vertices)
    return list(groups.values())


def verify_properties(sd: SpanningData) -> PropertyReport:
    """Check (T1)-(T4), and (T5) with the linear condition in linear mode."""
    report = PropertyReport()
    deg = sd.degree
    root = sd.root

    t1 = []
    for d in sd.deleted:
        i, t = sd.orient[d]
        if deg[i] != 2 or not (deg[t] >= 3 or t == root):
            t1.append(f"deleted edge ({i},{t}): deg ι={deg[i]}, deg τ={deg[t]}")
    report.failures["T1"] = t1

    t2, seen = [], {}
    for d in sd.deleted:
        i, t = sd.orient[d]
        key = (t, sd.g(t, i))
        if key in seen:
            t2.append(f"deleted edges {seen[key]} and ({i},{t}) share τ and branch")
        seen[key] = f"({i},{t})"
    report.failures["T2"] = t2

    t3 = []
    for d in sd.deleted:
        i, t = sd.orient[d]
        if not sd.is_ancestor(t, i):
            t3.append(f"deleted edge ({i},{t}) does not join a vertex to its ancestor")
            continue
        for v in sd.ancestors(i)[1:]:
            if v == t:
                break
            if sd.g(v, i) != 1:
                t3.append(f"vertex {v} on the tree path of ({i},{t}) has g={sd.g(v, i)}")
    report.failures["T3"] = t3

    t4 = []
    G = sd.graph.to_networkx()
    components: Dict[int, Dict[int, int]] = {}
    for v1 in sd.graph.vertices:
        for v2 in range(v1 + 1, sd.graph.vertex_count):
            if sd.is_ancestor(v1, v2) or sd.is_ancestor(v2, v1):
                continue
            m = sd.meet(v1, v2)
            if not (m < v1 and m < v2):
                continue
            if m not in components:
                H = G.copy()
                H.remove_node(m)
                comp = {}
                for k, nodes in enumerate(nx.connected_components(H)):
                    for x in nodes:
                        comp[x] = k
                components[m] = comp
            if components[m][v1] == components[m][v2]:
                t4.append(f"vertices {v1},{v2} stay connected without {m}")
                if len(t4) > 20:
                    break
    report.failures["T4"] = t4
    report.checked += ["T1", "T2", "T3", "T4"]

    if sd.mode == LINEAR:
        t5 = []
        intervals = sorted((min(b), max(b)) for b in _blocks(sd))
        for (m1, M1), (m2, M2) in zip(intervals, intervals[1:]):
            if not (M1 <= m2 or M2 <= m1):
                t5.append(f"blocks [{m1},{M1}] and [{m2},{M2}] interleave")
        essential = [v for v in sd.graph.vertices if deg[v] >= 3]
        for a in essential:
            for b in essential:
                if a < b and (sd.meet(a, b) != a or sd.g(a, b) != sd.mu(a)):
                    t5.append(f"essential {a}<{b}: meet={sd.meet(a, b)}, g={sd.g(a, b)}, mu={sd.mu(a)}")
        report.failures["T5"] = t5
        report.checked.append("T5")

    return report
