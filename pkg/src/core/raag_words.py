"""Word problem in right-angled Artin groups via piles."""

from collections import deque
from typing import Dict, Hashable, Iterable, List, Sequence, Set, Tuple

from src.core.fox_calculus import GroupWord, as_commutator
from src.validators import ValidationError


class RightAngledArtinGroup:
    """RAAG given by generator symbols and a set of commuting pairs"""

    def __init__(self, generators: Sequence[Hashable], commuting: Iterable[Tuple[Hashable, Hashable]]):
        self.generators = list(generators)
        self.position = {g: i for i, g in enumerate(self.generators)}
        if len(self.position) != len(self.generators):
            raise ValidationError("Duplicate generator in RAAG alphabet")

        pairs: Set[Tuple[int, int]] = set()
        for a, b in commuting:
            if a not in self.position or b not in self.position:
                raise ValidationError(f"Commuting pair ({a}, {b}) uses an unknown generator")
            i, j = self.position[a], self.position[b]
            pairs.add((i, j))
            pairs.add((j, i))
        self.commuting = pairs

        # non-commuters of i, with and without i itself
        size = len(self.generators)
        self.non_commuters: Dict[int, List[int]] = {
            i: [j for j in range(size) if j != i and (i, j) not in pairs] for i in range(size)
        }
        self.non_commuters_and_i = {i: self.non_commuters[i] + [i] for i in range(size)}

    @classmethod
    def from_relators(cls, generators: Sequence[Hashable], relators: Iterable[GroupWord]) -> "RightAngledArtinGroup":
        """Build from relators that are commutators of two distinct generators."""
        pairs = []
        for r in relators:
            uv = as_commutator(r)
            if uv is None or len(uv[0]) != 1 or len(uv[1]) != 1 or uv[0].letters[0][0] == uv[1].letters[0][0]:
                raise ValidationError(f"Relator {r} is not a commutator of two distinct generators")
            pairs.append((uv[0].letters[0][0], uv[1].letters[0][0]))
        return cls(generators, pairs)

    def commute(self, a: Hashable, b: Hashable) -> bool:
        return a == b or (self.position[a], self.position[b]) in self.commuting

    def _piles(self, word: GroupWord) -> Tuple[List[deque], int]:
        piles = [deque() for _ in self.generators]
        count = 0
        for sym, eps in word.letters:
            if sym not in self.position:
                raise ValidationError(f"Letter {sym} is not a generator of this group")
            i = self.position[sym]
            if piles[i] and piles[i][-1] == -eps:
                count -= 1
                for j in self.non_commuters_and_i[i]:
                    piles[j].pop()
            else:
                count += 1
                piles[i].append(eps)
                for j in self.non_commuters[i]:
                    piles[j].append(0)
        return piles, count

    def normal_form(self, word: GroupWord) -> GroupWord:
        """Canonical reduced representative: repeatedly take the first pile with a letter on top."""
        piles, count = self._piles(word)
        letters = []
        while count:
            i = next(j for j in range(len(piles)) if piles[j] and piles[j][0])
            letters.append((self.generators[i], piles[i][0]))
            count -= 1
            for j in self.non_commuters_and_i[i]:
                piles[j].popleft()
        return GroupWord(tuple(letters))

    def is_trivial(self, word: GroupWord) -> bool:
        return self._piles(word)[1] == 0

    def equal(self, u: GroupWord, v: GroupWord) -> bool:
        return self.is_trivial(u * ~v)

    def relators(self) -> List[GroupWord]:
        out = []
        for i, j in sorted(self.commuting):
            if i < j:
                a, b = GroupWord.gen(self.generators[i]), GroupWord.gen(self.generators[j])
                out.append(a * b * ~a * ~b)
        return out

    def __repr__(self):
        edges = [(self.generators[i], self.generators[j]) for i, j in sorted(self.commuting) if i < j]
        return f"RightAngledArtinGroup({self.generators}, {edges})"
