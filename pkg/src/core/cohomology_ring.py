"""Cup products, triple Massey products and non-RAAG certificates.

Classes in H¹ are integer vectors over the dual generator basis and classes in
H² are integer vectors over the dual relator basis, both in presentation order.
All formulas assume a commutator-related presentation.
"""

from dataclasses import dataclass, field
from datetime import datetime
from itertools import permutations, product
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from src.core.fox_calculus import GroupWord, Presentation, Relator, as_commutator, eps, parse_word, two_form
from src.core.integer_linalg import hermite_basis, lattice_contains, solve_in_lattice
from src.utils.logger import logger
from src.validators import (
    BudgetExceededError,
    InvariantError,
    PreconditionError,
    ValidationError,
    validate_budget,
)

Class1 = Tuple[int, ...]
Class2 = Tuple[int, ...]
ClassLike = Union[Sequence[int], Mapping[Hashable, int], Iterable[Hashable]]

NONTRIVIAL = "nontrivial"
INCONCLUSIVE = "inconclusive"
UNAVAILABLE = "certificate unavailable: inefficient presentation"


# ------------------------------------------------------------------ classes

def as_class(pres: Presentation, value: ClassLike) -> Class1:
    """Coerce a coefficient list, a {generator: coefficient} map or a generator set to a Class1."""
    p = len(pres.generators)
    if isinstance(value, Mapping):
        out = [0] * p
        for g, c in value.items():
            out[_position(pres, g)] += int(c)
        return tuple(out)
    items = list(value)
    if len(items) == p and all(isinstance(x, (int, np.integer)) and not isinstance(x, bool) for x in items):
        return tuple(int(x) for x in items)
    out = [0] * p
    for g in items:
        out[_position(pres, g)] += 1
    return tuple(out)


def _position(pres: Presentation, g: Hashable) -> int:
    try:
        return pres.index(g)
    except KeyError:
        raise ValidationError(f"{g} is not a generator of the presentation")


def _support(pres: Presentation, alpha: Class1) -> Dict[Hashable, int]:
    return {pres.generators[i]: c for i, c in enumerate(alpha) if c}


def _require_commutator_related(pres: Presentation) -> None:
    if not pres.is_commutator_related():
        raise PreconditionError("Cup products need a commutator-related presentation")


def _commutator_of(relator: Relator) -> Tuple[GroupWord, GroupWord]:
    if relator.commutator is not None:
        return relator.commutator
    pair = as_commutator(relator.word)
    if pair is None:
        raise PreconditionError(f"Relator {relator.word} is not a commutator")
    return pair


# ---------------------------------------------------------------- products

def cup(pres: Presentation, alpha: ClassLike, beta: ClassLike) -> Class2:
    """α ∪ β = Σ_k Σ_{i,j} a_i b_j ε_{ij}(r_k) r*_k."""
    _require_commutator_related(pres)
    a = _support(pres, as_class(pres, alpha))
    b = _support(pres, as_class(pres, beta))
    out = []
    for r in pres.relators:
        present = set(r.word.symbols())
        total = 0
        for i, ai in a.items():
            if i not in present:
                continue
            for j, bj in b.items():
                if j in present:
                    total += ai * bj * eps((i, j), r.word)
        out.append(total)
    return tuple(out)


@dataclass
class CupZeroReport:
    """Cup-zero check of a pair of generator sets, relator by relator"""
    holds: bool
    sums: List[int]
    offending: List[Dict] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"holds": self.holds, "sums": self.sums, "offending": self.offending}


def cup_zero_condition(pres: Presentation, X: Iterable[Hashable], Y: Iterable[Hashable]) -> CupZeroReport:
    """Σ_{x∈X, y∈Y} ε_x(u)ε_y(v) − ε_x(v)ε_y(u) over each relator [u, v]."""
    X, Y = list(X), list(Y)
    sums = []
    offending = []
    for k, r in enumerate(pres.relators):
        u, v = _commutator_of(r)
        total = 0
        for x in X:
            xu, xv = u.exponent_sum(x), v.exponent_sum(x)
            if not (xu or xv):
                continue
            for y in Y:
                total += xu * v.exponent_sum(y) - xv * u.exponent_sum(y)
        sums.append(total)
        if total:
            offending.append({"relator": k, "source": r.source, "value": total})

    # the pairwise sums are the cup of the indicator classes
    if sums != list(cup(pres, X, Y)):
        raise InvariantError("Cup-zero sums disagree with the cup product")
    return CupZeroReport(holds=not offending, sums=sums, offending=offending)


def massey_rep(pres: Presentation, alpha: ClassLike, beta: ClassLike, gamma: ClassLike) -> Class2:
    """ρ = Σ_ℓ Σ_{i,j,k} a_i b_j c_k ε_{ijk}(r_ℓ) r*_ℓ, defined when α∪β = β∪γ = 0."""
    alpha, beta, gamma = (as_class(pres, x) for x in (alpha, beta, gamma))
    ab = cup(pres, alpha, beta)
    if any(ab):
        raise PreconditionError(f"α∪β is nonzero: {list(ab)}")
    bc = cup(pres, beta, gamma)
    if any(bc):
        raise PreconditionError(f"β∪γ is nonzero: {list(bc)}")

    a, b, c = (_support(pres, x) for x in (alpha, beta, gamma))
    rho = []
    for r in pres.relators:
        present = set(r.word.symbols())
        total = 0
        for i, ai in a.items():
            if i not in present:
                continue
            for j, bj in b.items():
                if j not in present:
                    continue
                for k, ck in c.items():
                    if k in present:
                        total += ai * bj * ck * eps((i, j, k), r.word)
        rho.append(total)
    return tuple(rho)


# ----------------------------------------------------------------- lattices

@dataclass
class Lattice:
    """Sublattice of ℤ^q given by generators, with its Hermite basis"""
    generators: List[Tuple[int, ...]]
    width: int
    hnf: List[List[int]] = field(default_factory=list)

    def __post_init__(self):
        self.generators = [tuple(g) for g in self.generators]
        if any(len(g) != self.width for g in self.generators):
            raise ValidationError(f"Lattice generators must have length {self.width}")
        self.hnf = hermite_basis(self.generators, self.width)

    @property
    def rank(self) -> int:
        return len(self.hnf)

    def contains(self, vector: Sequence[int]) -> bool:
        if len(vector) != self.width:
            raise ValidationError(f"Vector of length {len(vector)} in a lattice of width {self.width}")
        return lattice_contains(self.hnf, vector)

    def coefficients(self, vector: Sequence[int]) -> Optional[List[int]]:
        """Integer combination of the generators equal to vector."""
        return solve_in_lattice(self.generators, vector)

    def to_dict(self) -> Dict:
        return {"generators": [list(g) for g in self.generators], "hnf": self.hnf}


def indeterminacy(pres: Presentation, alpha: ClassLike, gamma: ClassLike) -> Lattice:
    """α∪H¹ + H¹∪γ spanned by cups with every dual generator."""
    alpha, gamma = as_class(pres, alpha), as_class(pres, gamma)
    p = len(pres.generators)
    gens = []
    for i in range(p):
        unit = tuple(1 if j == i else 0 for j in range(p))
        if any(alpha):
            gens.append(cup(pres, alpha, unit))
        if any(gamma):
            gens.append(cup(pres, unit, gamma))
    return Lattice([g for g in gens if any(g)], len(pres.relators))


# -------------------------------------------------------------- certificates

@dataclass
class MasseyCertificate:
    """Re-checkable record of ⟨α, β, γ⟩ against its indeterminacy"""
    generators: List[str]
    relators: List[str]
    alpha: List[int]
    beta: List[int]
    gamma: List[int]
    rho: List[int] = field(default_factory=list)
    lattice_basis: List[List[int]] = field(default_factory=list)
    hnf: List[List[int]] = field(default_factory=list)
    member: Optional[bool] = None
    verdict: str = INCONCLUSIVE
    error: Optional[str] = None
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())

    @property
    def nontrivial(self) -> bool:
        return self.verdict == NONTRIVIAL

    def to_dict(self) -> Dict:
        return {
            "generators": self.generators,
            "relators": self.relators,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "rho": self.rho,
            "lattice_basis": self.lattice_basis,
            "hnf": self.hnf,
            "member": self.member,
            "verdict": self.verdict,
            "error": self.error,
            "timestamp": self.timestamp,
        }


def _labelled(pres: Presentation) -> Tuple[List[str], List[str]]:
    names = [pres.name(g) for g in pres.generators]
    relators = [r.word.format(pres.label) for r in pres.relators]
    return names, relators


def massey_nontrivial(pres: Presentation, alpha: ClassLike, beta: ClassLike, gamma: ClassLike,
                      second_betti: Optional[int] = None) -> MasseyCertificate:
    """Decide whether ρ lies in the indeterminacy lattice and package the answer.

    When ``second_betti`` is given and differs from the relator count the
    relators are not a basis of H², so no certificate is issued.
    """
    alpha, beta, gamma = (as_class(pres, x) for x in (alpha, beta, gamma))
    names, relators = _labelled(pres)
    cert = MasseyCertificate(names, relators, list(alpha), list(beta), list(gamma))
    if second_betti is not None and second_betti != len(pres.relators):
        cert.verdict = UNAVAILABLE
        cert.error = f"{len(pres.relators)} relators but β₂ = {second_betti}"
        logger.warning(f"Massey certificate refused: {cert.error}")
        return cert

    rho = massey_rep(pres, alpha, beta, gamma)
    lattice = indeterminacy(pres, alpha, gamma)
    member = lattice.contains(rho)
    cert.rho = list(rho)
    cert.lattice_basis = [list(g) for g in lattice.generators]
    cert.hnf = lattice.hnf
    cert.member = member
    cert.verdict = INCONCLUSIVE if member else NONTRIVIAL
    logger.debug(f"Massey product: rho={list(rho)}, lattice rank {lattice.rank}, member={member}")
    return cert


@dataclass
class CertificateCheck:
    """Outcome of re-validating a stored certificate"""
    ok: bool
    verdict: str
    problems: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"ok": self.ok, "verdict": self.verdict, "problems": self.problems}


def presentation_from_certificate(data: Mapping) -> Presentation:
    """Rebuild the presentation stored in a certificate (relators use g<i> labels)."""
    generators = list(range(len(data["generators"])))
    symbols = {f"g{i}": i for i in generators}
    relators = [Relator(parse_word(text, symbols)) for text in data["relators"]]
    names = {i: name for i, name in enumerate(data["generators"])}
    return Presentation(generators, relators, names)


def verify_certificate(data: Mapping) -> CertificateCheck:
    """Recompute cups, ρ, the lattice and membership from a certificate dict."""
    for key in ("generators", "relators", "alpha", "beta", "gamma", "rho", "lattice_basis", "member", "verdict"):
        if key not in data:
            raise ValidationError(f"Certificate is missing {key!r}")
    if data["verdict"] == UNAVAILABLE:
        return CertificateCheck(ok=True, verdict=UNAVAILABLE)

    pres = presentation_from_certificate(data)
    problems = []
    try:
        rho = massey_rep(pres, data["alpha"], data["beta"], data["gamma"])
    except PreconditionError as e:
        return CertificateCheck(ok=False, verdict=data["verdict"], problems=[str(e)])
    if list(rho) != list(data["rho"]):
        problems.append(f"rho recomputes to {list(rho)}")

    lattice = indeterminacy(pres, data["alpha"], data["gamma"])
    stored = Lattice([tuple(g) for g in data["lattice_basis"]], len(pres.relators))
    if lattice.hnf != stored.hnf:
        problems.append("lattice basis does not span the indeterminacy")
    member = lattice.contains(rho)
    if member != data["member"]:
        problems.append(f"membership recomputes to {member}")
    verdict = INCONCLUSIVE if member else NONTRIVIAL
    if verdict != data["verdict"]:
        problems.append(f"verdict recomputes to {verdict}")
    return CertificateCheck(ok=not problems, verdict=verdict, problems=problems)


# ------------------------------------------------------------- triple search

def search_triples(pres: Presentation, budget: Optional[int] = None, width: int = 6,
                   second_betti: Optional[int] = None) -> Optional[MasseyCertificate]:
    """First nontrivial ⟨α, β, γ⟩ with {−1, 0, 1} coefficients on the busiest generators."""
    budget = validate_budget("triple_budget", budget if budget is not None else settings.triple_budget)
    _require_commutator_related(pres)
    usage: Dict[Hashable, int] = {}
    for r in pres.relators:
        for s in r.word.symbols():
            usage[s] = usage.get(s, 0) + 1
    pool = sorted(usage, key=lambda s: (-usage[s], pres.index(s)))[:width]
    if not pool:
        return None
    m, q = len(pool), len(pres.relators)

    e2 = np.zeros((m, m, q), dtype=np.int64)
    e3 = np.zeros((m, m, m, q), dtype=np.int64)
    for l, r in enumerate(pres.relators):
        present = set(r.word.symbols())
        for i, j in product(range(m), repeat=2):
            if pool[i] in present and pool[j] in present:
                e2[i, j, l] = eps((pool[i], pool[j]), r.word)
                for k in range(m):
                    if pool[k] in present:
                        e3[i, j, k, l] = eps((pool[i], pool[j], pool[k]), r.word)

    vectors = [np.array(v, dtype=np.int64) for v in product((0, 1, -1), repeat=m) if any(v)]
    vectors.sort(key=lambda v: (sum(1 for x in v if x), [abs(x) for x in v][::-1]))

    def full(v) -> Class1:
        out = [0] * len(pres.generators)
        for i, c in enumerate(v):
            out[pres.index(pool[i])] = int(c)
        return tuple(out)

    tried = 0
    lattices: Dict[Tuple[Class1, Class1], Lattice] = {}
    for a in vectors:
        betas = [b for b in vectors if not np.einsum("i,j,ijl->l", a, b, e2).any()]
        for c in vectors:
            for b in betas:
                if np.einsum("i,j,ijl->l", b, c, e2).any():
                    continue
                tried += 1
                if tried > budget:
                    logger.warning(f"Triple search stopped after {budget} admissible triples")
                    return None
                rho = np.einsum("i,j,k,ijkl->l", a, b, c, e3)
                if not rho.any():
                    continue
                key = (full(a), full(c))
                if key not in lattices:
                    lattices[key] = indeterminacy(pres, *key)
                if not lattices[key].contains([int(x) for x in rho]):
                    logger.info(f"Triple search found a nontrivial Massey product after {tried} triples")
                    return massey_nontrivial(pres, full(a), full(b), full(c), second_betti)
    logger.info(f"Triple search exhausted {tried} triples on {m} generators")
    return None


# ---------------------------------------------------- abstract presentations

def _presentation(generators: Sequence[str], relators: Sequence[str], free: int = 0, prefix: str = "f") -> Presentation:
    gens = list(generators) + [f"{prefix}{i}" for i in range(1, free + 1)]
    symbols = {g: g for g in gens}
    rels = []
    for text in relators:
        word = parse_word(text, symbols)
        rels.append(Relator(word, source=text, commutator=as_commutator(word)))
    return Presentation(gens, rels, {g: g for g in gens})


Triple = Tuple[List[str], List[str], List[str]]

_SCHEMAS: Dict[int, Tuple[List[str], List[str], Triple]] = {
    1: (["a", "b", "c", "x", "z"],
        ["[x, a^-1 b]", "[x, a^-1 c]", "[z a x a^-1, b^-1 c]", "[z, b^-1 c]"],
        (["x"], ["a", "b", "c"], ["b"])),
    2: (["a", "b", "x", "y"],
        ["[x, a^-1 b]", "[y, a^-1 b]", "[x, b a y a^-1 b^-1]"],
        (["a", "x", "y"], ["a", "b"], ["a", "x", "y"])),
    3: (["e", "w", "x", "y", "z"],
        ["[y, w x w^-1]", "[z, x]", "[z, e w y w^-1 e^-1]"],
        (["x", "y", "z"], ["e"], ["x", "y", "z"])),
}

_REFERENCES: Dict[str, Tuple[List[str], List[str], int, Triple]] = {
    "N2": (["x", "y", "z", "a", "b", "c"],
           ["[x, a^-1 b]", "[x, a^-1 c]", "[z a x a^-1, b^-1 c]", "[y, b^-1 c]", "[z, b^-1 c]"],
           5, (["x"], ["a", "b", "c"], ["b"])),
    "N3": (["x", "y", "a", "b"],
           ["[x, a^-1 b]", "[y, a^-1 b]", "[x, b a y a^-1 b^-1]"],
           6, (["a", "x", "y"], ["a", "b"], ["a", "x", "y"])),
    "N4": (["x", "y", "z", "a", "b", "c", "d", "e"],
           ["[x, y]", "[x, z]", "[z, e b y b^-1 e^-1]", "[x, a]", "[y, b^-1 c]", "[z, d]"],
           16, (["x", "y", "z"], ["e"], ["x", "y", "z"])),
}


def non_raag_schema(kind: int) -> Tuple[Presentation, Triple]:
    """Minimal simple-commutator presentation of one of the three non-RAAG shapes, with its triple."""
    if kind not in _SCHEMAS:
        raise ValidationError(f"Unknown schema {kind}; expected one of {sorted(_SCHEMAS)}")
    generators, relators, triple = _SCHEMAS[kind]
    return _presentation(generators, relators), triple


def reference_presentation(nucleus: str) -> Tuple[Presentation, Triple]:
    """Published 4-braid group presentation of a nucleus, free factor included."""
    if nucleus not in _REFERENCES:
        raise ValidationError(f"No reference presentation for {nucleus!r}")
    generators, relators, free, triple = _REFERENCES[nucleus]
    return _presentation(generators, relators, free), triple


# ----------------------------------------------------------------- matching

def _relator_forms(pres: Presentation) -> List[Dict[Tuple[Hashable, Hashable], int]]:
    forms = []
    for r in pres.relators:
        full = {}
        for (i, j), v in two_form(r.word, pres.generators).items():
            full[(i, j)] = v
            full[(j, i)] = -v
        forms.append(full)
    return forms


def _form_support(form) -> List[Hashable]:
    seen = []
    for i, j in form:
        for s in (i, j):
            if s not in seen:
                seen.append(s)
    return seen


def _pair_vector(form, image: Mapping, pairs: Sequence[Tuple[Hashable, Hashable]]) -> List[int]:
    """A 2-form pushed through a signed generator map, over the given ordered pairs."""
    index = {p: i for i, p in enumerate(pairs)}
    v = [0] * len(pairs)
    for (a, b), value in form.items():
        if a not in image or b not in image:
            continue
        (x, s), (y, t) = image[a], image[b]
        if (x, y) in index:
            v[index[(x, y)]] += s * t * value
    return v


def _neighbours(forms) -> Dict[Hashable, set]:
    out: Dict[Hashable, set] = {}
    for form in forms:
        for a, b in form:
            out.setdefault(a, set()).add(b)
    return out


def _match_relators(ref_forms, cand_forms, budget: int) -> Optional[Dict]:
    """Signed bijection carrying every reference relator 2-form to a distinct candidate one up to sign."""
    order = sorted(range(len(ref_forms)), key=lambda i: -len(ref_forms[i]))
    nodes = 0

    def agrees(fr, fc, mapping) -> bool:
        if len(fr) != len(fc):
            return False
        for sign in (1, -1):
            if all(fc.get((mapping[a][0], mapping[b][0]), 0) == sign * mapping[a][1] * mapping[b][1] * v
                   for (a, b), v in fr.items()):
                return True
        return False

    def extend(pos: int, mapping: Dict, used_targets: set, used_rel: set) -> Optional[Dict]:
        nonlocal nodes
        if pos == len(order):
            return dict(mapping)
        fr = ref_forms[order[pos]]
        support = _form_support(fr)
        fresh = [s for s in support if s not in mapping]
        for j, fc in enumerate(cand_forms):
            if j in used_rel or len(fc) != len(fr):
                continue
            targets = _form_support(fc)
            if any(mapping[s][0] not in targets for s in support if s in mapping):
                continue
            open_targets = [t for t in targets if t not in used_targets]
            if len(open_targets) != len(fresh):
                continue
            for image in permutations(open_targets):
                nodes += 1
                if nodes > budget:
                    raise BudgetExceededError(f"Presentation matching exceeded {budget} candidate bijections")
                for signs in product((1, -1), repeat=len(fresh)):
                    trial = dict(mapping)
                    trial.update({s: (t, e) for s, t, e in zip(fresh, image, signs)})
                    if agrees(fr, fc, trial):
                        found = extend(pos + 1, trial, used_targets | set(image), used_rel | {j})
                        if found is not None:
                            return found
        return None

    return extend(0, {}, set(), set())


def _match_spans(ref_forms, cand_forms, cand_order: Sequence[Hashable], budget: int) -> Optional[Dict]:
    """Signed bijection carrying the lattice of reference relator 2-forms onto the candidate lattice.

    Generators are assigned one at a time; after each step the projections of
    both lattices onto the pairs among assigned generators must agree.
    """
    ref_nb, cand_nb = _neighbours(ref_forms), _neighbours(cand_forms)
    if sorted(len(v) for v in ref_nb.values()) != sorted(len(v) for v in cand_nb.values()):
        return None
    position = {g: i for i, g in enumerate(cand_order)}
    identity = {g: (g, 1) for g in cand_nb}

    order: List[Hashable] = []
    while len(order) < len(ref_nb):
        rest = [g for g in ref_nb if g not in order]
        order.append(max(rest, key=lambda g: (len(ref_nb[g] & set(order)), len(ref_nb[g]))))
    nodes = 0

    def consistent(mapping: Dict) -> bool:
        images = sorted((t for t, _ in mapping.values()), key=position.__getitem__)
        pairs = [(x, y) for i, x in enumerate(images) for y in images[i + 1:]]
        if not pairs:
            return True
        ref = hermite_basis([_pair_vector(f, mapping, pairs) for f in ref_forms], len(pairs))
        cand = hermite_basis([_pair_vector(f, identity, pairs) for f in cand_forms], len(pairs))
        return ref == cand

    def extend(pos: int, mapping: Dict, used: set) -> Optional[Dict]:
        nonlocal nodes
        if pos == len(order):
            return dict(mapping)
        g = order[pos]
        placed = [h for h in ref_nb[g] if h in mapping]
        for t in cand_nb:
            if t in used or len(cand_nb[t]) != len(ref_nb[g]):
                continue
            if any(mapping[h][0] not in cand_nb[t] for h in placed):
                continue
            # a global sign flip preserves every 2-form
            for sign in ((1,) if pos == 0 else (1, -1)):
                nodes += 1
                if nodes > budget:
                    raise BudgetExceededError(f"Presentation matching exceeded {budget} candidate bijections")
                trial = dict(mapping)
                trial[g] = (t, sign)
                if consistent(trial):
                    found = extend(pos + 1, trial, used | {t})
                    if found is not None:
                        return found
        return None

    return extend(0, {}, set())


def match_presentations(reference: Presentation, candidate: Presentation,
                        budget: int = 10_000) -> Optional[Dict[Hashable, Tuple[Hashable, int]]]:
    """Signed generator bijection relating the relator 2-forms of two presentations.

    Relator forms are first matched one to one up to sign; when no such
    bijection exists, the integer lattices spanned by the forms are compared
    instead. Returns {reference generator: (candidate generator, ±1)} or
    None. Free generators are matched by count only.
    """
    ref_rel = [r for r in reference.relators if not r.word.is_identity()]
    cand_rel = [r for r in candidate.relators if not r.word.is_identity()]
    if len(ref_rel) != len(cand_rel) or len(reference.generators) != len(candidate.generators):
        return None
    ref_forms = _relator_forms(Presentation(reference.generators, ref_rel))
    cand_forms = _relator_forms(Presentation(candidate.generators, cand_rel))
    mapping = _match_relators(ref_forms, cand_forms, budget)
    if mapping is None:
        mapping = _match_spans(ref_forms, cand_forms, candidate.generators, budget)
        if mapping is not None:
            logger.debug("Relator 2-forms agree as lattices, not one to one")
    if mapping is None:
        return None
    rest = [g for g in candidate.generators if g not in {t for t, _ in mapping.values()}]
    for g in reference.generators:
        if g not in mapping:
            mapping[g] = (rest.pop(0), 1)
    return mapping
