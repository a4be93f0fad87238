"""Finite multigraphs, subdivision, topological containment and cactus structure."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from config import settings
from src.utils.logger import logger
from src.validators import BudgetExceededError, PreconditionError, ValidationError, validate_braid_index

# (edge id, side): side 0 is the first listed endpoint, side 1 the second
EdgeEnd = Tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Connected multigraph on vertices 0..|V|-1; loops and parallel edges allowed"""
    vertex_count: int
    edges: Tuple[Tuple[int, int], ...]
    rotation: Optional[Tuple[Tuple[EdgeEnd, ...], ...]] = None
    base: Optional[int] = None
    name: str = ""
    labels: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.vertex_count)))
        incidence: List[List[EdgeEnd]] = [[] for _ in range(self.vertex_count)]
        for i, (a, b) in enumerate(self.edges):
            if 0 <= a < self.vertex_count:
                incidence[a].append((i, 0))
            if 0 <= b < self.vertex_count:
                incidence[b].append((i, 1))
        object.__setattr__(self, "_incidence", tuple(tuple(x) for x in incidence))
        for a, b in self.edges:
            if not (0 <= a < self.vertex_count and 0 <= b < self.vertex_count):
                raise ValidationError(f"Edge ({a}, {b}) uses an undeclared vertex")
        if self.base is not None and not 0 <= self.base < self.vertex_count:
            raise ValidationError(f"Base vertex {self.base} is not a vertex")
        if self.vertex_count == 0:
            raise ValidationError("Graph has no vertices")
        if not nx.is_connected(self.to_networkx()):
            raise ValidationError(f"Graph {self.name or '(unnamed)'} is not connected")
        if self.rotation is not None:
            if len(self.rotation) != self.vertex_count:
                raise ValidationError("Rotation system must list every vertex")
            for v in range(self.vertex_count):
                if sorted(self.rotation[v]) != sorted(self.incident(v)):
                    raise ValidationError(f"Rotation at vertex {self.labels[v]} must list each incident edge-end once")

    @property
    def vertices(self) -> range:
        return range(self.vertex_count)

    def incident(self, v: int) -> List[EdgeEnd]:
        return list(self._incidence[v])

    def other_end(self, end: EdgeEnd) -> int:
        a, b = self.edges[end[0]]
        return b if end[1] == 0 else a

    def degree(self, v: int) -> int:
        return len(self.incident(v))

    def degrees(self) -> List[int]:
        deg = [0] * self.vertex_count
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def essential_vertices(self) -> List[int]:
        return [v for v, d in enumerate(self.degrees()) if d >= 3]

    def neighbors(self, v: int) -> List[int]:
        return [self.other_end(end) for end in self.incident(v)]

    def is_simple(self) -> bool:
        seen = set()
        for a, b in self.edges:
            key = (min(a, b), max(a, b))
            if a == b or key in seen:
                return False
            seen.add(key)
        return True

    def betti_number(self) -> int:
        return len(self.edges) - self.vertex_count + 1

    def to_networkx(self) -> nx.MultiGraph:
        G = nx.MultiGraph()
        G.add_nodes_from(range(self.vertex_count))
        for i, (a, b) in enumerate(self.edges):
            G.add_edge(a, b, key=i)
        return G

    def with_base(self, base: Optional[int]) -> "Graph":
        return Graph(self.vertex_count, self.edges, self.rotation, base, self.name, self.labels)

    def to_text(self) -> str:
        lines = [f"# {self.name}"] if self.name else []
        lines += [f"v {self.labels[v]}" for v in self.vertices]
        lines += [f"e {self.labels[a]} {self.labels[b]}" for a, b in self.edges]
        if self.rotation is not None:
            for v in self.vertices:
                lines.append(f"rot {self.labels[v]}: " + " ".join(str(e) for e, _ in self.rotation[v]))
        if self.base is not None:
            lines.append(f"base {self.labels[self.base]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PatternGraph:
    """Small pattern searched for as a topological minor"""
    name: str
    graph: Graph

    @property
    def branch_vertices(self) -> List[int]:
        return self.graph.essential_vertices()


@dataclass(frozen=True)
class SubdivisionMap:
    """Subdivided graph with provenance of every edge and vertex"""
    original: Graph
    graph: Graph
    edge_origin: Tuple[int, ...]
    vertex_origin: Tuple[Optional[int], ...]


@dataclass
class Chain:
    """Maximal path whose interior vertices have degree 2"""
    start: int
    end: int
    edges: List[EdgeEnd]
    vertices: List[int]

    @property
    def is_loop(self) -> bool:
        return self.start == self.end

    def __len__(self) -> int:
        return len(self.edges)


@dataclass
class Embedding:
    """Witness of topological containment"""
    vertex_map: Dict[int, int]
    paths: List[Tuple[int, ...]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"vertex_map": {str(k): v for k, v in self.vertex_map.items()}, "paths": [list(p) for p in self.paths]}


@dataclass(frozen=True)
class Block:
    """Star-bouquet or candy of a linear cactus"""
    kind: str
    vertices: Tuple[int, ...]
    cycle: Optional[Tuple[int, ...]] = None


# ----------------------------------------------------------------- parsing

def _parse_lines(lines: Sequence[str], name: str) -> Graph:
    ids: List[int] = []
    raw_edges: List[Tuple[int, int]] = []
    rot: Dict[int, List[int]] = {}
    base = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(":", " : ").split()
        try:
            if parts[0] == "v" and len(parts) == 2:
                v = int(parts[1])
                if v < 0:
                    raise ValueError("negative id")
                if v not in ids:
                    ids.append(v)
            elif parts[0] == "e" and len(parts) == 3:
                raw_edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "rot" and len(parts) >= 3 and parts[2] == ":":
                rot[int(parts[1])] = [int(x) for x in parts[3:]]
            elif parts[0] == "base" and len(parts) == 2:
                base = int(parts[1])
            else:
                raise ValueError(f"unknown directive {parts[0]!r}")
        except ValueError as e:
            raise ValidationError(f"{name}: line {lineno}: {e}")

    for a, b in raw_edges:
        for v in (a, b):
            if v not in ids:
                raise ValidationError(f"{name}: edge ({a}, {b}) uses undeclared vertex {v}")
    labels = sorted(ids)
    index = {v: i for i, v in enumerate(labels)}
    edges = tuple((index[a], index[b]) for a, b in raw_edges)

    rotation = None
    if rot:
        if set(rot) != set(labels):
            raise ValidationError(f"{name}: rotation must be given for every vertex")
        rotation = []
        for v in labels:
            ends = []
            seen: Dict[int, int] = {}
            for e in rot[v]:
                if not 0 <= e < len(edges):
                    raise ValidationError(f"{name}: rotation at {v} names unknown edge {e}")
                a, b = edges[e]
                count = seen.get(e, 0)
                seen[e] = count + 1
                if a == b == index[v]:
                    ends.append((e, count))
                elif a == index[v] and count == 0:
                    ends.append((e, 0))
                elif b == index[v] and count == 0:
                    ends.append((e, 1))
                else:
                    raise ValidationError(f"{name}: rotation at {v} lists edge {e} wrongly")
            rotation.append(tuple(ends))
        rotation = tuple(rotation)

    if base is not None and base not in index:
        raise ValidationError(f"{name}: base {base} is not a vertex")
    return Graph(len(labels), edges, rotation, index[base] if base is not None else None, name, tuple(labels))


def parse_graph(text: str, name: str = "") -> Graph:
    """Parse the line-oriented graph format (v / e / rot / base directives)."""
    return _parse_lines(text.splitlines(), name)


def load_graph(path) -> Graph:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"Graph file does not exist: {path}")
    return parse_graph(path.read_text(), path.stem)


def parse_patterns(text: str) -> Dict[str, PatternGraph]:
    """Split a pattern file on `pattern <name>` headers."""
    patterns: Dict[str, PatternGraph] = {}
    current = None
    buffer: List[str] = []

    def flush():
        if current is not None:
            g = _parse_lines(buffer, current)
            if any(d == 2 for d in g.degrees()):
                raise ValidationError(f"Pattern {current} has a degree-2 vertex")
            patterns[current] = PatternGraph(current, g)

    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith("pattern "):
            flush()
            current = stripped.split(None, 1)[1].strip()
            buffer = []
        else:
            buffer.append(line)
    flush()
    return patterns


def load_patterns(path=None) -> Dict[str, PatternGraph]:
    path = Path(path or settings.patterns_file)
    if not path.exists():
        raise ValidationError(f"Pattern file does not exist: {path}")
    return parse_patterns(path.read_text())


# ------------------------------------------------------------ subdivision

def chains(g: Graph, stops: Sequence[int] = ()) -> List[Chain]:
    """Maximal paths with degree-2 interiors, starting from branch vertices in id order.

    Vertices in ``stops`` end a chain even when they have degree 2.
    """
    deg = g.degrees()
    stops = set(stops)
    used: Set[int] = set()
    result = []

    def walk(start: int, end: EdgeEnd) -> Chain:
        edges = [end]
        vertices = [start]
        used.add(end[0])
        v = g.other_end(end)
        while deg[v] == 2 and v != start and v not in stops:
            vertices.append(v)
            nxt = next(x for x in g.incident(v) if x[0] not in used)
            edges.append(nxt)
            used.add(nxt[0])
            v = g.other_end(nxt)
        vertices.append(v)
        return Chain(start, v, edges, vertices)

    for v in g.vertices:
        if deg[v] == 2 and v not in stops:
            continue
        for end in g.incident(v):
            if end[0] not in used:
                result.append(walk(v, end))

    # components that are bare cycles
    for v in g.vertices:
        ends = [x for x in g.incident(v) if x[0] not in used]
        if ends:
            result.append(walk(v, ends[0]))
    return result


def subdivide_for(g: Graph, n: int, anchors: Sequence[int] = ()) -> SubdivisionMap:
    """Minimal subdivision so that chains have ≥ n−1 edges and loops ≥ n+1 edges.

    Extra vertices are inserted on the first edge of each short chain; new
    vertex ids continue after the old ones in original edge order. Anchors
    (usually the base vertex) count as chain ends.
    """
    validate_braid_index(n, minimum=1)
    extra = [0] * len(g.edges)
    for ch in chains(g, anchors):
        need = n + 1 if ch.is_loop else max(n - 1, 1)
        if len(ch) < need:
            extra[ch.edges[0][0]] += need - len(ch)

    if not any(extra):
        return SubdivisionMap(g, g, tuple(range(len(g.edges))), tuple(range(g.vertex_count)))

    next_id = g.vertex_count
    edges: List[Tuple[int, int]] = []
    edge_origin: List[int] = []
    vertex_origin: List[Optional[int]] = list(range(g.vertex_count))
    first_piece: Dict[int, int] = {}
    last_piece: Dict[int, int] = {}
    interior_ends: Dict[int, List[EdgeEnd]] = {}

    for i, (a, b) in enumerate(g.edges):
        path = [a] + list(range(next_id, next_id + extra[i])) + [b]
        next_id += extra[i]
        vertex_origin.extend([None] * extra[i])
        first_piece[i] = len(edges)
        for x, y in zip(path, path[1:]):
            if x >= g.vertex_count:
                interior_ends.setdefault(x, []).append((len(edges), 0))
            if y >= g.vertex_count:
                interior_ends.setdefault(y, []).append((len(edges), 1))
            edges.append((x, y))
            edge_origin.append(i)
        last_piece[i] = len(edges) - 1

    rotation = None
    if g.rotation is not None:
        rows = []
        for v in g.vertices:
            row = []
            for e, side in g.rotation[v]:
                row.append((first_piece[e], 0) if side == 0 else (last_piece[e], 1))
            rows.append(tuple(row))
        for v in range(g.vertex_count, next_id):
            rows.append(tuple(interior_ends[v]))
        rotation = tuple(rows)

    labels = tuple(g.labels) + tuple(range(max(g.labels) + 1, max(g.labels) + 1 + next_id - g.vertex_count))
    sub = Graph(next_id, tuple(edges), rotation, g.base, g.name, labels)
    logger.debug(f"Subdivided {g.name or 'graph'} for n={n}: {len(g.edges)} -> {len(edges)} edges")
    return SubdivisionMap(g, sub, tuple(edge_origin), tuple(vertex_origin))


def simple_form(g: Graph) -> Tuple[Graph, Tuple[Optional[int], ...]]:
    """Loops become triangles and parallel edges become 2-edge paths."""
    count: Dict[Tuple[int, int], int] = {}
    for a, b in g.edges:
        key = (min(a, b), max(a, b))
        count[key] = count.get(key, 0) + 1
    extra = []
    for a, b in g.edges:
        if a == b:
            extra.append(2)
        elif count[(min(a, b), max(a, b))] > 1:
            extra.append(1)
        else:
            extra.append(0)

    next_id = g.vertex_count
    edges = []
    for i, (a, b) in enumerate(g.edges):
        path = [a] + list(range(next_id, next_id + extra[i])) + [b]
        next_id += extra[i]
        edges.extend(zip(path, path[1:]))
    origin = tuple(range(g.vertex_count)) + (None,) * (next_id - g.vertex_count)
    labels = tuple(g.labels) + tuple(range(max(g.labels) + 1, max(g.labels) + 1 + next_id - g.vertex_count))
    return Graph(next_id, tuple(edges), None, g.base, g.name, labels), origin


# ------------------------------------------------- topological containment

class _Search:
    """Backtracking search for a subdivision of a pattern inside a simple graph"""

    def __init__(self, host: Graph, pattern: Graph, budget: int):
        self.adj = {v: sorted(set(host.neighbors(v))) for v in host.vertices}
        self.host_deg = host.degrees()
        self.pattern = pattern
        self.budget = budget
        self.nodes = 0
        self.used_vertices: Set[int] = set()
        self.used_edges: Set[Tuple[int, int]] = set()

    def tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceededError(f"Topological-minor search exceeded {self.budget} nodes")

    def paths(self, u: int, v: int, closed: bool) -> Iterator[List[int]]:
        """Simple u-v paths over unused vertices, shortest first."""
        free = len(self.adj) - len(self.used_vertices)
        for length in range(3 if closed else 1, free + 2):
            yield from self._paths_of_length(u, v, length, [u], set())

    def _paths_of_length(self, u: int, target: int, remaining: int, path: List[int], seen: Set[int]):
        self.tick()
        if remaining == 1:
            if target in self.adj[u] and self._edge_free(u, target):
                yield path + [target]
            return
        for w in self.adj[u]:
            if w == target or w in seen or w in self.used_vertices or not self._edge_free(u, w):
                continue
            seen.add(w)
            yield from self._paths_of_length(w, target, remaining - 1, path + [w], seen)
            seen.discard(w)

    def _edge_free(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) not in self.used_edges

    def claim(self, path: List[int]):
        for w in path[1:-1]:
            self.used_vertices.add(w)
        for a, b in zip(path, path[1:]):
            self.used_edges.add((min(a, b), max(a, b)))

    def release(self, path: List[int]):
        for w in path[1:-1]:
            self.used_vertices.discard(w)
        for a, b in zip(path, path[1:]):
            self.used_edges.discard((min(a, b), max(a, b)))

    def run(self) -> Optional[Embedding]:
        p = self.pattern
        branch = sorted(p.essential_vertices(), key=lambda v: (-p.degree(v), v))
        pattern_chains = chains(p)
        if not branch:
            return self._branchless(pattern_chains)
        inner = [c for c in pattern_chains if not c.is_loop and c.start in branch and c.end in branch]
        loops = [c for c in pattern_chains if c.is_loop]
        leaves = [c for c in pattern_chains if c not in inner and c not in loops]
        order = inner + loops + leaves
        vertex_map: Dict[int, int] = {}
        result = self._assign(branch, 0, vertex_map, order)
        return result

    def _assign(self, branch: List[int], k: int, vertex_map: Dict[int, int], order: List[Chain]) -> Optional[Embedding]:
        if k == len(branch):
            routed: List[List[int]] = []
            if self._route(order, 0, vertex_map, routed):
                return Embedding(dict(vertex_map), [tuple(r) for r in routed])
            return None
        pv = branch[k]
        for hv in sorted(self.adj):
            self.tick()
            if hv in self.used_vertices or self.host_deg[hv] < self.pattern.degree(pv):
                continue
            vertex_map[pv] = hv
            self.used_vertices.add(hv)
            found = self._assign(branch, k + 1, vertex_map, order)
            self.used_vertices.discard(hv)
            del vertex_map[pv]
            if found is not None:
                return found
        return None

    def _route(self, order: List[Chain], i: int, vertex_map: Dict[int, int], routed: List[List[int]]) -> bool:
        if i == len(order):
            return True
        ch = order[i]
        if ch.start in vertex_map and ch.end in vertex_map:
            candidates = self.paths(vertex_map[ch.start], vertex_map[ch.end], ch.is_loop)
        else:
            anchor = vertex_map[ch.start] if ch.start in vertex_map else vertex_map[ch.end]
            candidates = ([anchor, w] for w in self.adj[anchor]
                          if w not in self.used_vertices and self._edge_free(anchor, w))
        for path in candidates:
            self.tick()
            self.claim(path)
            leaf_end = None
            if not (ch.start in vertex_map and ch.end in vertex_map):
                leaf_end = path[-1]
                self.used_vertices.add(leaf_end)
            routed.append(path)
            if self._route(order, i + 1, vertex_map, routed):
                return True
            routed.pop()
            if leaf_end is not None:
                self.used_vertices.discard(leaf_end)
            self.release(path)
        return False

    def _branchless(self, pattern_chains: List[Chain]) -> Optional[Embedding]:
        if any(c.is_loop for c in pattern_chains):
            G = nx.Graph(list((a, b) for a in self.adj for b in self.adj[a]))
            try:
                cycle = nx.find_cycle(G)
            except nx.NetworkXNoCycle:
                return None
            return Embedding({}, [tuple(a for a, _ in cycle) + (cycle[0][0],)])
        for a in sorted(self.adj):
            if self.adj[a]:
                return Embedding({0: a, 1: self.adj[a][0]}, [(a, self.adj[a][0])])
        return None


def contains_topologically(g: Graph, p: PatternGraph, budget: Optional[int] = None) -> Tuple[bool, Optional[Embedding]]:
    """Whether a subdivision of the pattern is a subgraph of a subdivision of g."""
    budget = budget or settings.search_budget
    host, origin = simple_form(g)
    witness = _Search(host, p.graph, budget).run()
    if witness is None:
        return False, None
    mapped = Embedding(
        {pv: origin[hv] for pv, hv in witness.vertex_map.items()},
        [tuple(origin[v] for v in path if origin[v] is not None) for path in witness.paths],
    )
    return True, mapped


def is_cactus(g: Graph) -> bool:
    """Every edge lies on at most one cycle: each biconnected block is an edge or a cycle."""
    host, _ = simple_form(g)
    G = nx.Graph(list(host.edges))
    G.add_nodes_from(host.vertices)
    for block in nx.biconnected_component_edges(G):
        block = list(block)
        if len(block) < 2:
            continue
        nodes = {v for e in block for v in e}
        if len(block) != len(nodes):
            return False
    return True


def detect_nuclei(g: Graph, patterns: Optional[Dict[str, PatternGraph]] = None) -> List[str]:
    """Names of the contained patterns, in pattern-file order."""
    patterns = patterns if patterns is not None else load_patterns()
    found = []
    for name, p in patterns.items():
        contained, _ = contains_topologically(g, p)
        if contained:
            found.append(name)
    logger.debug(f"Nuclei in {g.name or 'graph'}: {found or 'none'}")
    return found


def cycles(g: Graph) -> List[Tuple[int, ...]]:
    """Vertex sets of the cycles of a cactus, each sorted, original ids only."""
    host, origin = simple_form(g)
    G = nx.Graph(list(host.edges))
    result = []
    for block in nx.biconnected_component_edges(G):
        block = list(block)
        if len(block) < 2:
            continue
        nodes = {v for e in block for v in e}
        result.append(tuple(sorted(origin[v] for v in nodes if origin[v] is not None)))
    return sorted(result)


def building_blocks(g: Graph, check: bool = True, patterns: Optional[Dict[str, PatternGraph]] = None) -> List[Block]:
    """Star-bouquets and candies of a linear cactus, in spine order."""
    if check:
        if not is_cactus(g):
            raise PreconditionError(f"{g.name or 'graph'} is not a cactus graph")
        found = detect_nuclei(g, patterns)
        if found:
            raise PreconditionError(f"{g.name or 'graph'} contains {', '.join(found)}")

    deg = g.degrees()
    essential = [v for v in g.vertices if deg[v] >= 3]
    if not essential:
        return []

    owner: Dict[int, Block] = {}
    blocks: List[Block] = []
    for cyc in cycles(g):
        ess = [v for v in cyc if deg[v] >= 3]
        if len(ess) == 2:
            block = Block("candy", tuple(ess), cyc)
            for v in ess:
                if v in owner:
                    raise PreconditionError(f"Candy at {g.labels[v]} meets another cycle")
                owner[v] = block
            blocks.append(block)
    for v in essential:
        if v not in owner:
            block = Block("star-bouquet", (v,))
            owner[v] = block
            blocks.append(block)

    # chains between essential vertices of different blocks form the spine
    spine = nx.Graph()
    spine.add_nodes_from(range(len(blocks)))
    index = {id(b): i for i, b in enumerate(blocks)}
    for ch in chains(g):
        if ch.start in owner and ch.end in owner:
            a, b = index[id(owner[ch.start])], index[id(owner[ch.end])]
            if a != b:
                if spine.has_edge(a, b):
                    raise PreconditionError("Two chains join the same pair of blocks")
                spine.add_edge(a, b)
    if len(blocks) > 1:
        degrees = dict(spine.degree())
        ends = [i for i, d in degrees.items() if d == 1]
        if spine.number_of_edges() != len(blocks) - 1 or max(degrees.values()) > 2 or len(ends) != 2:
            raise PreconditionError(f"Blocks of {g.name or 'graph'} do not form a line")
        start = min(ends, key=lambda i: min(blocks[i].vertices))
        order = list(nx.dfs_preorder_nodes(spine, start))
    else:
        order = [0]
    return [blocks[i] for i in order]
