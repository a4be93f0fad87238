"""Free group words, Fox-calculus functionals and finite presentations."""

from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from src.core.integer_linalg import abelianization
from src.validators import ValidationError

Letter = Tuple[Hashable, int]


def _reduce(letters: Iterable[Letter]) -> Tuple[Letter, ...]:
    out: List[Letter] = []
    for sym, exp in letters:
        if exp not in (1, -1):
            if exp == 0:
                continue
            step = 1 if exp > 0 else -1
            for _ in range(abs(exp)):
                if out and out[-1][0] == sym and out[-1][1] == -step:
                    out.pop()
                else:
                    out.append((sym, step))
            continue
        if out and out[-1][0] == sym and out[-1][1] == -exp:
            out.pop()
        else:
            out.append((sym, exp))
    return tuple(out)


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word over arbitrary hashable generator symbols"""
    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _reduce(self.letters))

    @classmethod
    def gen(cls, symbol: Hashable, exponent: int = 1) -> "GroupWord":
        return cls(((symbol, exponent),))

    @classmethod
    def identity(cls) -> "GroupWord":
        return cls(())

    @classmethod
    def product(cls, words: Iterable["GroupWord"]) -> "GroupWord":
        letters: List[Letter] = []
        for w in words:
            letters.extend(w.letters)
        return cls(tuple(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def __invert__(self) -> "GroupWord":
        return GroupWord(tuple((s, -e) for s, e in reversed(self.letters)))

    def __pow__(self, n: int) -> "GroupWord":
        if n == 0:
            return GroupWord()
        if n < 0:
            return (~self) ** -n
        return GroupWord(self.letters * n)

    def conjugate(self, other: "GroupWord") -> "GroupWord":
        return other * self * ~other

    def is_identity(self) -> bool:
        return not self.letters

    def symbols(self) -> List[Hashable]:
        seen = []
        for s, _ in self.letters:
            if s not in seen:
                seen.append(s)
        return seen

    def exponent_sum(self, symbol: Hashable) -> int:
        return sum(e for s, e in self.letters if s == symbol)

    def substitute(self, mapping: Union[Mapping[Hashable, "GroupWord"], Callable[[Hashable], "GroupWord"]]) -> "GroupWord":
        """Apply the homomorphism sending each symbol to a word; unmapped symbols stay."""
        lookup = mapping if callable(mapping) else (lambda s: mapping.get(s, GroupWord.gen(s)))
        parts = []
        for s, e in self.letters:
            w = lookup(s)
            parts.append(w if e == 1 else ~w)
        return GroupWord.product(parts)

    def cyclic_reduction(self) -> Tuple["GroupWord", "GroupWord"]:
        """Split into (c, core) with self == c * core * c⁻¹ and core cyclically reduced."""
        letters = self.letters
        i, j = 0, len(letters) - 1
        while i < j and letters[i][0] == letters[j][0] and letters[i][1] == -letters[j][1]:
            i += 1
            j -= 1
        return GroupWord(letters[:i]), GroupWord(letters[i:j + 1])

    def format(self, namer: Callable[[Hashable], str] = str) -> str:
        if not self.letters:
            return "1"
        return " ".join(namer(s) if e == 1 else f"{namer(s)}^-1" for s, e in self.letters)

    def __str__(self) -> str:
        return self.format()


def commutator(u: GroupWord, v: GroupWord) -> GroupWord:
    """[u, v] = u v u⁻¹ v⁻¹"""
    return u * v * ~u * ~v


def parse_word(text: str, symbols: Optional[Mapping[str, Hashable]] = None) -> GroupWord:
    """Parse 'x y^-1 [a, b^-1 c]' style words; names map through ``symbols`` if given."""
    tokens = text.replace("[", " [ ").replace("]", " ] ").replace(",", " , ").split()
    pos = 0

    def atom(tok: str) -> GroupWord:
        name, _, power = tok.partition("^")
        try:
            exp = int(power) if power else 1
        except ValueError:
            raise ValidationError(f"Invalid exponent in {tok!r}")
        if symbols is not None:
            if name not in symbols:
                raise ValidationError(f"Unknown generator {name!r}")
            return GroupWord.gen(symbols[name]) ** exp
        return GroupWord.gen(name) ** exp

    def sequence(stop: Tuple[str, ...]) -> GroupWord:
        nonlocal pos
        parts = []
        while pos < len(tokens) and tokens[pos] not in stop:
            tok = tokens[pos]
            if tok == "[":
                pos += 1
                u = sequence((",",))
                if pos >= len(tokens) or tokens[pos] != ",":
                    raise ValidationError(f"Missing ',' in commutator: {text!r}")
                pos += 1
                v = sequence(("]",))
                if pos >= len(tokens) or tokens[pos] != "]":
                    raise ValidationError(f"Missing ']' in commutator: {text!r}")
                pos += 1
                parts.append(commutator(u, v))
            elif tok == "1":
                pos += 1
            else:
                parts.append(atom(tok))
                pos += 1
        return GroupWord.product(parts)

    word = sequence(())
    if pos != len(tokens):
        raise ValidationError(f"Unbalanced word: {text!r}")
    return word


def eps(key: Sequence[Hashable], word: GroupWord) -> int:
    """ε_{i₁…i_k}(w): the coefficient of X_{i₁}⋯X_{i_k} in the Magnus expansion of w.

    One pass over the word; ``c[j]`` is the coefficient of the length-j prefix of
    the key in the expansion of the prefix read so far.
    """
    key = tuple(key)
    k = len(key)
    c = [1] + [0] * k
    for s, e in word.letters:
        new = list(c)
        for j in range(1, k + 1):
            total = 0
            t = 1
            while t <= j and key[j - t] == s:
                if e == 1:
                    m = 1 if t == 1 else 0
                else:
                    m = -1 if t % 2 else 1
                total += c[j - t] * m
                t += 1
            new[j] = c[j] + total
        c = new
    return c[k]


def eps2_commutator(k: Hashable, l: Hashable, u: GroupWord, v: GroupWord) -> int:
    """ε_{kℓ}([u,v]) = ε_k(u)ε_ℓ(v) − ε_k(v)ε_ℓ(u)."""
    return eps((k,), u) * eps((l,), v) - eps((k,), v) * eps((l,), u)


def eps3_commutator(k: Hashable, l: Hashable, m: Hashable, u: GroupWord, v: GroupWord) -> int:
    """ε_{kℓm}([u,v]) in terms of depth-one and depth-two values of u and v."""
    u1 = {x: eps((x,), u) for x in (k, l, m)}
    v1 = {x: eps((x,), v) for x in (k, l, m)}
    return (
        u1[k] * eps((l, m), v)
        - u1[m] * eps((k, l), v)
        + eps((k, l), u) * v1[m]
        - v1[k] * eps((l, m), u)
        + (v1[k] * u1[l] - u1[k] * v1[l]) * (u1[m] + v1[m])
    )


def eps1_power_product(k: Hashable, powers: Sequence[Tuple[Hashable, int]]) -> int:
    return sum(j for i, j in powers if i == k)


def eps2_power_product(k: Hashable, l: Hashable, powers: Sequence[Tuple[Hashable, int]]) -> int:
    """ε_{kℓ} of x_{i₁}^{j₁}⋯x_{i_t}^{j_t} by the pair-sum formula."""
    total = 0
    for r, (ir, jr) in enumerate(powers):
        if ir == k:
            for is_, js in powers[r + 1:]:
                if is_ == l:
                    total += jr * js
        if ir == k and ir == l:
            total += jr * (jr - 1) // 2
    return total


def is_commutator_related(relators: Iterable[GroupWord]) -> bool:
    """True iff every relator has zero exponent sum in every generator."""
    for r in relators:
        for s in r.symbols():
            if r.exponent_sum(s):
                return False
    return True


def as_commutator(word: GroupWord) -> Optional[Tuple[GroupWord, GroupWord]]:
    """Find (u, v) with word == [u, v] after free reduction, or None.

    A cyclically reduced word is a commutator iff some cyclic permutation reads
    X Y Z X⁻¹ Y⁻¹ Z⁻¹ letter for letter; that permutation equals [XY, ZX⁻¹].
    """
    if not is_commutator_related([word]):
        return None
    c, core = word.cyclic_reduction()
    if core.is_identity():
        return GroupWord(), GroupWord()
    w = core.letters
    L = len(w)
    if L % 2:
        return None
    half = L // 2

    def inv(seq):
        return tuple((s, -e) for s, e in reversed(seq))

    for shift in range(L):
        rot = w[shift:] + w[:shift]
        for a in range(half + 1):
            X = rot[:a]
            if rot[half:half + a] != inv(X):
                continue
            for b in range(half - a + 1):
                Y = rot[a:a + b]
                Z = rot[a + b:half]
                if rot[half + a:half + a + b] == inv(Y) and rot[half + a + b:] == inv(Z):
                    u = GroupWord(X + Y)
                    v = GroupWord(Z + inv(X))
                    conj = c * GroupWord(w[:shift])
                    u, v = u.conjugate(conj), v.conjugate(conj)
                    if commutator(u, v) == word:
                        return u, v
    return None


def same_relator(u: GroupWord, w: GroupWord) -> bool:
    """Equal up to conjugation of cyclically reduced forms and inversion."""
    cu = u.cyclic_reduction()[1].letters
    cw = w.cyclic_reduction()[1].letters
    if len(cu) != len(cw):
        return False
    if not cu:
        return True
    doubled = cu + cu
    for target in (cw, (~GroupWord(cw)).letters):
        for i in range(len(cu)):
            if doubled[i:i + len(cu)] == target:
                return True
    return False


def two_form(word: GroupWord, symbols: Sequence[Hashable]) -> Dict[Tuple[Hashable, Hashable], int]:
    """Nonzero ε_{ij}(word) for i < j in the order of ``symbols``; the relator signature."""
    present = [s for s in symbols if s in set(word.symbols())]
    form = {}
    for a in range(len(present)):
        for b in range(a + 1, len(present)):
            value = eps((present[a], present[b]), word)
            if value:
                form[(present[a], present[b])] = value
    return form


@dataclass(frozen=True)
class Relator:
    """Relator word with provenance"""
    word: GroupWord
    source: Optional[str] = None
    tag: Optional[str] = None
    commutator: Optional[Tuple[GroupWord, GroupWord]] = None


@dataclass
class Presentation:
    """Finite presentation over hashable generator symbols"""
    generators: List[Hashable]
    relators: List[Relator] = field(default_factory=list)
    names: Dict[Hashable, str] = field(default_factory=dict)

    def name(self, symbol: Hashable) -> str:
        return self.names.get(symbol, str(symbol))

    def index(self, symbol: Hashable) -> int:
        if not hasattr(self, "_index") or len(self._index) != len(self.generators):
            self._index = {g: i for i, g in enumerate(self.generators)}
        return self._index[symbol]

    def words(self) -> List[GroupWord]:
        return [r.word for r in self.relators]

    def exponent_rows(self) -> List[Dict[int, int]]:
        rows = []
        for r in self.relators:
            row: Dict[int, int] = {}
            for s, e in r.word.letters:
                i = self.index(s)
                row[i] = row.get(i, 0) + e
            rows.append({i: v for i, v in row.items() if v})
        return rows

    def abelianization(self) -> Tuple[int, List[int]]:
        return abelianization(len(self.generators), self.exponent_rows())

    def is_commutator_related(self) -> bool:
        return is_commutator_related(self.words())

    def free_generators(self) -> List[Hashable]:
        used = set()
        for r in self.relators:
            used.update(r.word.symbols())
        return [g for g in self.generators if g not in used]

    def label(self, symbol: Hashable) -> str:
        return f"g{self.index(symbol)}"

    def to_text(self) -> str:
        lines = [f"gen {i} := {self.name(g)}" for i, g in enumerate(self.generators)]
        for j, r in enumerate(self.relators):
            lines.append(f"rel {j} := {r.word.format(self.label)}")
        return "\n".join(lines) + "\n"
