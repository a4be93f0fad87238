"""End-to-end analysis: nuclei, presentations, RAAG construction or a Massey certificate."""

import json
from dataclasses import dataclass, field
from datetime import datetime
from itertools import combinations, product
from pathlib import Path
from time import perf_counter
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config import settings
from src.core.cohomology_ring import (
    UNAVAILABLE,
    MasseyCertificate,
    cup,
    cup_zero_condition,
    massey_nontrivial,
    search_triples,
)
from src.core.config_space import CubeCell, chain_complex, homology
from src.core.fox_calculus import same_relator
from src.core.graph_core import Graph, detect_nuclei, is_cactus, load_graph, simple_form, subdivide_for
from src.core.morse import CriticalCellName, MorseComplex, delta, vec_add
from src.core.spanning_order import CACTUS, GENERAL, LINEAR, SpanningData, build_spanning
from src.core.tietze_raag import TietzeResult, raag_presentation, scr_presentation, verify_raag_iso
from src.utils.logger import logger
from src.validators import BraidLabError, InvariantError, PreconditionError, ValidationError, validate_braid_index

RAAG_CONSTRUCTED = "RAAG-constructed"
NON_RAAG_CERTIFIED = "non-RAAG-certified"
NON_RAAG_BY_CITATION = "non-RAAG-by-citation"
SCR_ONLY = "SCR-only"
OUT_OF_SCOPE = "out-of-scope"
ROUTES = (RAAG_CONSTRUCTED, NON_RAAG_CERTIFIED, NON_RAAG_BY_CITATION, SCR_ONLY, OUT_OF_SCOPE)

# certificate recipes are tried in this order
RECIPE_ORDER = ("N2", "N3", "N4")


@dataclass
class AnalysisContext:
    """Subdivided graph with its spanning data and Morse complex"""
    graph: Graph
    n: int
    subdivided: Graph
    sd: SpanningData
    mc: MorseComplex

    def summary(self) -> Dict[str, Any]:
        g = self.graph
        return {
            "name": g.name,
            "vertices": g.vertex_count,
            "edges": len(g.edges),
            "essential_vertices": len(g.essential_vertices()),
            "betti_number": g.betti_number(),
            "subdivided_vertices": self.subdivided.vertex_count,
            "mode": self.sd.mode,
            "critical_counts": self.mc.critical_counts(),
        }


def prepare(g: Graph, n: int, mode: Optional[str] = None, shortcut: Optional[bool] = None,
            rewrite_budget: Optional[int] = None) -> AnalysisContext:
    """Subdivide, number and set up the Morse complex; cactus graphs get cactus numbering.

    The subdivision is redone once the base is known, so that the chains
    between the base and the vertices of degree ≠ 2 are long enough for n.
    """
    validate_braid_index(n)
    if mode is None:
        mode = CACTUS if is_cactus(g) else GENERAL
    sub = subdivide_for(g, n).graph
    if not sub.is_simple():
        # parallel edges survive short-chain subdivision only for n ≤ 2
        sub = subdivide_for(simple_form(g)[0], n).graph
    sd = build_spanning(sub, mode)
    base = sub.labels.index(sd.graph.labels[sd.root])
    anchored = subdivide_for(sub.with_base(base), n, anchors=[base]).graph
    if anchored.vertex_count != sub.vertex_count:
        logger.debug(f"Base {sub.labels[base]} of {g.name or 'graph'} needs {anchored.vertex_count - sub.vertex_count} "
                     f"more subdivision vertices for n={n}")
        sub = anchored
        sd = build_spanning(sub, mode)
    mc = MorseComplex(sd, n, shortcut=shortcut, budget=rewrite_budget)
    logger.debug(f"Prepared {g.name or 'graph'} for n={n}: {sub.vertex_count} vertices, {mode} numbering")
    return AnalysisContext(g, n, sub, sd, mc)


def oracle_homology(ctx: AnalysisContext, top: int = 2, budget: Optional[int] = None) -> Dict[int, Tuple[int, List[int]]]:
    """H_k(UD_nΓ) for k ≤ top from the full cube complex."""
    cc = chain_complex(ctx.subdivided, ctx.n, min(top + 1, ctx.n), budget)
    return {k: homology(cc, k) for k in range(top + 1)}


# ------------------------------------------------------------------ verdicts

@dataclass
class Verdict:
    """Outcome of analyze with everything needed to re-check it"""
    graph: Dict[str, Any]
    n: int
    route: str
    nuclei: List[str] = field(default_factory=list)
    presentation: Optional[Dict[str, Any]] = None
    raag: Optional[Dict[str, Any]] = None
    raag_report: Optional[Dict[str, Any]] = None
    certificate: Optional[Dict[str, Any]] = None
    oracle: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    error: Optional[str] = None
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "graph": self.graph,
            "n": self.n,
            "route": self.route,
            "nuclei": self.nuclei,
            "presentation": self.presentation,
            "raag": self.raag,
            "raag_report": self.raag_report,
            "certificate": self.certificate,
            "oracle": self.oracle,
            "notes": self.notes,
            "error": self.error,
            "timestamp": self.timestamp,
        }


def presentation_dict(pres) -> Dict[str, Any]:
    return {
        "generators": [pres.name(g) for g in pres.generators],
        "relators": [
            {
                "word": r.word.format(pres.label),
                "source": r.source,
                "tag": r.tag,
                "commutator": None if r.commutator is None
                else [r.commutator[0].format(pres.label), r.commutator[1].format(pres.label)],
            }
            for r in pres.relators
        ],
        "free_rank": len(pres.free_generators()),
    }


def analyze(g: Graph, n: Optional[int] = None, use_oracle: bool = True) -> Verdict:
    """Route a graph through the trichotomy: RAAG, certified non-RAAG, or SCR only."""
    n = validate_braid_index(n if n is not None else settings.braid_index)
    nuclei = detect_nuclei(g)
    cactus = is_cactus(g)
    base = {"name": g.name, "vertices": g.vertex_count, "edges": len(g.edges),
            "essential_vertices": len(g.essential_vertices()), "cactus": cactus}

    if not cactus:
        if "N1" not in nuclei:
            raise InvariantError(f"{g.name or 'graph'} is not a cactus but contains no Θ")
        route = NON_RAAG_BY_CITATION if n == 4 else OUT_OF_SCOPE
        note = ("4-braid groups of graphs containing Θ are known not to be right-angled Artin groups"
                if n == 4 else f"graphs containing Θ are not handled for n={n}")
        logger.info(f"{g.name or 'graph'}: route {route}")
        return Verdict(graph=base, n=n, route=route, nuclei=nuclei, notes=[note])

    linear = n == 4 and not nuclei
    ctx = prepare(g, n, LINEAR if linear else CACTUS)
    base.update(ctx.summary())
    scr = scr_presentation(ctx.mc)
    verdict = Verdict(graph=base, n=n, route=SCR_ONLY, nuclei=nuclei,
                      presentation=presentation_dict(scr.presentation))
    oracle = None
    if use_oracle:
        oracle = oracle_homology(ctx)
        verdict.oracle = {f"H{k}": {"rank": b, "torsion": t} for k, (b, t) in oracle.items()}

    if n != 4:
        verdict.notes.append(f"only simple-commutator presentations are produced for n={n}")
    elif linear:
        rd, raag = raag_presentation(ctx.mc, scr, check_nuclei=False)
        report = verify_raag_iso(ctx.mc, rd, raag, oracle[1] if oracle else None)
        verdict.raag = presentation_dict(raag)
        verdict.raag_report = report.to_dict()
        if report.ok:
            verdict.route = RAAG_CONSTRUCTED
        else:
            verdict.error = "RAAG isomorphism checks failed"
    else:
        second = oracle[2][0] if oracle else None
        cert, how = certify(ctx, scr, nuclei, second)
        if cert is None:
            verdict.notes.append("no nontrivial Massey product found")
        elif cert.verdict == UNAVAILABLE:
            verdict.certificate = cert.to_dict()
            verdict.notes.append(cert.error or UNAVAILABLE)
        else:
            verdict.certificate = cert.to_dict()
            verdict.notes.append(f"certificate from {how}")
            if cert.nontrivial:
                verdict.route = NON_RAAG_CERTIFIED

    logger.info(f"{g.name or 'graph'}: route {verdict.route}")
    return verdict


# ------------------------------------------------------------------ recipes

def _generator(mc: MorseComplex, gens: set, vertex: int, branch: int, counts: Sequence[int]) -> Optional[CubeCell]:
    try:
        cell = mc.decode(CriticalCellName.single(vertex, branch, counts))
    except ValidationError:
        return None
    return cell if cell in gens else None


def _family(mc: MorseComplex, gens, vertex: int, branch: int, coordinate: int, at_least: int) -> List[CubeCell]:
    """Generators A_k(ā) on one edge whose given coordinate is at least ``at_least``."""
    out = []
    for cell in gens:
        name = mc.encode(cell)
        block = name.blocks[0]
        if block.vertex == vertex and block.branch == branch and block.counts[coordinate - 1] >= at_least:
            out.append(cell)
    return out


def _cycle(mc: MorseComplex, d: int) -> List[int]:
    sd = mc.sd
    path = []
    for v in sd.ancestors(sd.iota(d)):
        path.append(v)
        if v == sd.tau(d):
            break
    return path


def _inner_deleted(sd: SpanningData) -> List[int]:
    return [d for d in sd.deleted if sd.tau(d) != sd.root and sd.is_essential(sd.tau(d))]


def _n2_triples(mc: MorseComplex, gens) -> List[Tuple[list, list, list]]:
    sd = mc.sd
    out = []
    for d1, d2 in product(_inner_deleted(sd), repeat=2):
        A, B = sd.tau(d1), sd.tau(d2)
        if not A < B or B not in _cycle(mc, d1):
            continue
        k, l = sd.g(A, sd.iota(d1)), sd.g(B, sd.iota(d2))
        y = _generator(mc, gens, B, -l, (0,) * sd.mu(B))
        x2 = _generator(mc, gens, A, -k, delta(sd.mu(A), k, 2))
        Y = _family(mc, gens, A, -k, k, 1)
        if y and x2 and Y:
            out.append(([y], Y, [x2]))
    return out


def _n3_triples(mc: MorseComplex, gens) -> List[Tuple[list, list, list]]:
    sd = mc.sd
    out = []
    for d in _inner_deleted(sd):
        A = sd.tau(d)
        k = sd.g(A, sd.iota(d))
        others = sorted(v for v in _cycle(mc, d) if v > A and sd.is_essential(v))
        x1 = _generator(mc, gens, A, -k, delta(sd.mu(A), k, 2))
        Y = _family(mc, gens, A, -k, k, 2)
        for B, C in combinations(others, 2):
            y = _generator(mc, gens, B, sd.mu(B), delta(sd.mu(B), 1))
            z = _generator(mc, gens, C, sd.mu(C), delta(sd.mu(C), 1))
            if x1 and y and z and Y:
                out.append(([x1, y, z], Y, [x1, y, z]))
    return out


def _units(size: int) -> List[Tuple[int, ...]]:
    return [delta(size, i) for i in range(1, size + 1)]


def _n4_triples(mc: MorseComplex, gens) -> List[Tuple[list, list, list]]:
    sd = mc.sd
    essential = [v for v in sd.graph.vertices if sd.is_essential(v)]
    out = []
    for A, B, C, D in combinations(essential, 4):
        if sd.meet(A, B) != A or not (sd.meet(B, C) == sd.meet(B, D) == sd.meet(C, D) == B):
            continue
        m = sd.g(A, B)
        if m != sd.mu(A) or m < 1:
            continue
        nb, l = sd.g(B, C), sd.g(B, D)
        if not (nb and l and nb != l):
            continue
        y = _generator(mc, gens, B, l, vec_add(delta(sd.mu(B), nb, 2), delta(sd.mu(B), l)))
        if y is None:
            continue
        xs = [_generator(mc, gens, A, m, vec_add(a, delta(sd.mu(A), m, 2))) for a in _units(sd.mu(A))]
        zs = [_generator(mc, gens, C, c, cv) for c in range(1, sd.mu(C) + 1) for cv in _units(sd.mu(C))]
        ws = [_generator(mc, gens, D, e, dv) for e in range(1, sd.mu(D) + 1) for dv in _units(sd.mu(D))]
        for x, z, w in product(filter(None, xs), filter(None, zs), filter(None, ws)):
            out.append(([x, z, w], [y], [x, z, w]))
    return out


_RECIPES = {"N2": _n2_triples, "N3": _n3_triples, "N4": _n4_triples}


def recipe_triples(mc: MorseComplex, scr: TietzeResult, nucleus: str) -> List[Tuple[list, list, list]]:
    """Candidate (X, Y, Z) generator sets for the named nucleus."""
    if nucleus not in _RECIPES:
        raise ValidationError(f"No certificate recipe for {nucleus!r}")
    return _RECIPES[nucleus](mc, set(scr.presentation.generators))


def certify(ctx: AnalysisContext, scr: TietzeResult, nuclei: Sequence[str],
            second_betti: Optional[int] = None) -> Tuple[Optional[MasseyCertificate], str]:
    """Try the recipe of the first nucleus found, then the automated triple search."""
    pres = scr.presentation
    if second_betti is not None and second_betti != len(pres.relators):
        cert = massey_nontrivial(pres, [], [], [], second_betti)
        return cert, "efficiency check"
    if not pres.is_commutator_related():
        raise InvariantError("Simple-commutator presentation has a relator with nonzero exponent sums")

    for nucleus in [x for x in RECIPE_ORDER if x in nuclei][:1]:
        for X, Y, Z in recipe_triples(ctx.mc, scr, nucleus):
            if any(cup(pres, X, Y)) or any(cup(pres, Y, Z)):
                continue
            cert = massey_nontrivial(pres, X, Y, Z, second_betti)
            if cert.nontrivial:
                logger.info(f"{nucleus} recipe gives a nontrivial Massey product")
                return cert, f"{nucleus} recipe"
        logger.info(f"{nucleus} recipe gave no certificate; searching triples")
    cert = search_triples(pres, second_betti=second_betti)
    return cert, "triple search"


# --------------------------------------------------------------- cup checks

@dataclass
class CupZeroSummary:
    """Cup-zero reports for the pairs a recipe relies on"""
    nucleus: str
    pairs: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(p["holds"] for p in self.pairs.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"nucleus": self.nucleus, "holds": self.holds, "pairs": self.pairs}


def cup_zero_verify(ctx: AnalysisContext, scr: TietzeResult, nucleus: str,
                    triple: Optional[Tuple[list, list, list]] = None) -> CupZeroSummary:
    """Compute the cup-zero sums of (X, Y) and (Y, Z); for N4 also ({x},{y}), ({z},{y}), ({w},{y})."""
    pres = scr.presentation
    if triple is None:
        found = recipe_triples(ctx.mc, scr, nucleus)
        if not found:
            raise PreconditionError(f"No {nucleus} configuration in {ctx.graph.name or 'graph'}")
        triple = found[0]
    X, Y, Z = triple
    summary = CupZeroSummary(nucleus)
    summary.pairs["X,Y"] = cup_zero_condition(pres, X, Y).to_dict()
    summary.pairs["Y,Z"] = cup_zero_condition(pres, Y, Z).to_dict()
    if nucleus == "N4":
        for label, g in zip("xzw", X):
            summary.pairs[f"{label},y"] = cup_zero_condition(pres, [g], Y).to_dict()
    return summary


def cycle_family_pairs(ctx: AnalysisContext, scr: TietzeResult) -> List[Tuple[List[CubeCell], List[CubeCell]]]:
    """(X, Y) with Y = {Q_q(q̄)} and X = {P_p(p̄) : p̄_|p| ≥ |q̄|+1} on the cycle closed at P."""
    mc, sd = ctx.mc, ctx.sd
    gens = scr.presentation.generators
    out = []
    for d in _inner_deleted(sd):
        P = sd.tau(d)
        cycle = _cycle(mc, d)
        if any(sd.is_essential(v) and v < P for v in cycle):
            continue
        if any(P in _cycle(mc, e) and any(sd.is_essential(v) and v < P for v in _cycle(mc, e))
               for e in sd.deleted):
            continue
        p = sd.g(P, sd.iota(d))
        on_cycle = set(cycle)
        for y in gens:
            block = mc.encode(y).blocks[0]
            if block.vertex <= P or block.vertex not in on_cycle:
                continue
            X = _family(mc, gens, P, -p, p, block.size + 1)
            if X:
                out.append((X, [y]))
    return out


# ------------------------------------------------------------------- corpus

@dataclass
class CorpusRow:
    """Checks run on one corpus graph"""
    graph: str
    n: int
    checks: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, str] = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"graph": self.graph, "n": self.n, "ok": self.ok, "checks": self.checks,
                "details": self.details, "seconds": round(self.seconds, 3)}


def corpus_files(path=None) -> List[Path]:
    root = Path(path or settings.corpus_path)
    if not root.is_dir():
        raise ValidationError(f"Corpus directory does not exist: {root}")
    return sorted(root.glob("*.graph"))


def load_expected(path=None) -> Dict[str, Dict[str, Dict[str, Any]]]:
    """Expected values keyed by graph name, then braid index."""
    file = Path(path or settings.expected_file)
    if not file.exists():
        logger.debug(f"No expected-value file at {file}")
        return {}
    try:
        data = json.loads(file.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(f"Malformed expected-value file {file}: {e}")
    if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
        raise ValidationError(f"Expected-value file {file} must map graph names to braid indices")
    return data


def _check_expected(row: "CorpusRow", expected: Dict[str, Any], observed: Dict[str, Any]) -> None:
    for key, value in expected.items():
        if key not in observed:
            raise ValidationError(f"Unknown expected value {key!r} for {row.graph} n={row.n}")
        ok = observed[key] == value
        row.checks[f"expected_{key}"] = ok
        if not ok:
            row.details[f"expected_{key}"] = f"expected {value}, got {observed[key]}"


def check_graph(g: Graph, n: int, expected: Optional[Dict[str, Any]] = None,
                seconds: Optional[float] = None) -> CorpusRow:
    """Euler characteristic, H₁ of every presentation, closed forms and commutator relators for one (graph, n)."""
    row = CorpusRow(g.name, n)
    budget = seconds if seconds is not None else settings.check_seconds
    start = perf_counter()
    try:
        ctx = prepare(g, n)
        mc = ctx.mc
        cc = chain_complex(ctx.subdivided, n)
        groups = [homology(cc, k) for k in range(n + 1)]
        chi_cells = cc.euler_characteristic()
        chi_betti = sum((-1) ** k * b for k, (b, _) in enumerate(groups))
        row.checks["euler"] = mc.euler_characteristic() == chi_cells == chi_betti
        h1 = tuple(groups[1])
        raw = mc.raw_presentation()
        row.checks["raw_h1"] = tuple(raw.abelianization()) == h1
        if ctx.sd.mode != GENERAL:
            scr = scr_presentation(mc)
            row.checks["scr_h1"] = tuple(scr.presentation.abelianization()) == h1
            row.checks["commutators"] = all(r.commutator is not None for r in scr.presentation.relators)
            row.checks["closed_forms"] = all(
                same_relator(mc.closed_form_boundary(c).word, mc.rewrite(mc.boundary_word(c)))
                for c in mc.critical_cells(2))
            if n == 4 and not detect_nuclei(g):
                rd, raag = raag_presentation(mc, scr)
                report = verify_raag_iso(mc, rd, raag, h1)
                row.checks["raag_h1"] = tuple(raag.abelianization()) == h1
                row.checks["raag"] = report.ok
        if expected:
            observed = {"euler": chi_cells, "h1": [h1[0], list(h1[1])], "critical": mc.critical_counts(),
                        "betti": [b for b, _ in groups]}
            _check_expected(row, expected, observed)
    except BraidLabError as e:
        row.checks["completed"] = False
        row.details["error"] = str(e)
    row.seconds = perf_counter() - start
    row.checks["time"] = row.seconds <= budget
    if not row.checks["time"]:
        row.details["time"] = f"{row.seconds:.1f}s over the {budget:.0f}s budget"
    for name, ok in row.checks.items():
        if not ok:
            row.details.setdefault(name, "failed")
    return row


def corpus_regression(path=None, indices: Sequence[int] = (2, 3, 4), expected_file=None) -> List[CorpusRow]:
    """Run check_graph over every bundled graph and braid index."""
    expected = load_expected(expected_file)
    rows = []
    for file in corpus_files(path):
        g = load_graph(file)
        for n in indices:
            row = check_graph(g, n, expected.get(g.name, {}).get(str(n)))
            rows.append(row)
            status = "ok" if row.ok else "FAILED " + ", ".join(k for k, v in row.checks.items() if not v)
            logger.info(f"{g.name} n={n}: {status} ({row.seconds:.1f}s)")
    return rows
