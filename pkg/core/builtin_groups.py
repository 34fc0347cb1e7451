"""
The supported PD groups: free abelian groups and orientable surface groups.
"""

import hashlib
import math
import typing
from collections import deque
from dataclasses import dataclass, field

from core.groups import (
    CyclicSubgroup,
    FreeAbelianGroup,
    GroupOracle,
    SearchBounds,
    Subgroup,
    subgroup_of,
)
from core.linalg import IntegerMatrix, kernel_basis
from core.models import InvalidSpecError, InvariantViolation, SearchBoundExceeded, getLogger
from core.utils import Word, free_reduce, invert_word, shortlex_key

logger = getLogger(__name__)

# bump when cached data would change meaning
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    size: int
    bounds: SearchBounds = field(default_factory=SearchBounds)

    def __post_init__(self):
        if self.kind not in {"free_abelian", "surface"}:
            raise InvalidSpecError(f'Unsupported group kind "{self.kind}".')
        if self.size < 1:
            what = "rank" if self.kind == "free_abelian" else "genus"
            raise InvalidSpecError(f"The {what} must be at least 1, got {self.size}.")

    @property
    def dimension(self) -> int:
        return self.size if self.kind == "free_abelian" else 2

    def digest(self) -> str:
        text = (
            f"v{SCHEMA_VERSION}:{self.kind}:{self.size}:"
            f"{self.bounds.conjugacy_slack}:{self.bounds.coset_slack}:{self.bounds.search_limit}"
        )
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


class SurfaceGroup(GroupOracle):
    """
    ``<a1, b1, ..., ag, bg | [a1, b1] ... [ag, bg]>`` for genus at least two.

    Normal forms come from Dehn's algorithm followed by a search over equal-length
    half-relator swaps for the ShortLex-least geodesic.
    """

    kind = "surface"

    def __init__(self, genus: int, bounds=None):
        if genus < 2:
            raise InvalidSpecError("Genus one is the free abelian group of rank two.")
        names = [f"{c}{i}" for i in range(1, genus + 1) for c in "ab"]
        super().__init__(names, 2, bounds)
        self.genus = genus
        self.relator = tuple(
            l for i in range(genus) for l in (2 * i + 1, 2 * i + 2, -(2 * i + 1), -(2 * i + 2))
        )
        self.half = 2 * genus
        self._pieces = {}
        length = len(self.relator)
        for sign, base in ((1, self.relator), (-1, invert_word(self.relator))):
            for shift in range(length):
                rotation = base[shift:] + base[:shift]
                for k in range(self.half, length + 1):
                    prefix = rotation[:k]
                    if prefix in self._pieces and self._pieces[prefix][:2] != (sign, shift):
                        raise InvariantViolation("Relator pieces are not unique.")
                    self._pieces[prefix] = (sign, shift, rotation)
        self._nf = {}
        self._labels = {}
        self._roots = {}
        self._centralizers = {}

    @property
    def name(self) -> str:
        return f"surface({self.genus})"

    def export_state(self) -> dict:
        return {"nf": dict(self._nf), "labels": dict(self._labels), "roots": dict(self._roots)}

    def import_state(self, state: dict) -> None:
        self._nf.update(state["nf"])
        self._labels.update(state["labels"])
        self._roots.update(state["roots"])

    def _find_piece(self, word, shortest):
        """Earliest, then longest, relator piece of length >= ``shortest``."""
        top = len(self.relator)
        for pos in range(len(word) - shortest + 1):
            for k in range(min(top, len(word) - pos), shortest - 1, -1):
                hit = self._pieces.get(tuple(word[pos : pos + k]))
                if hit is not None:
                    return pos, k, hit
        return None

    def dehn_reduce(self, word: Word, trace: typing.Optional[list] = None) -> Word:
        """
        Free reduction plus length-decreasing relator replacements.

        With ``trace`` given, each replacement appends ``(prefix, sign, shift)``: the replaced
        piece sat after ``prefix`` inside the rotation of ``relator^sign`` by ``shift``.
        """
        w = list(free_reduce(word))
        while True:
            found = self._find_piece(w, self.half + 1)
            if found is None:
                return tuple(w)
            pos, k, (sign, shift, rotation) = found
            if trace is not None:
                trace.append((tuple(w[:pos]), sign, shift))
            w = list(free_reduce(w[:pos] + list(invert_word(rotation[k:])) + w[pos + k :]))

    def _least_geodesic(self, word: Word) -> Word:
        seen = {word}
        frontier = deque([word])
        best = word
        while frontier:
            u = frontier.popleft()
            for pos in range(len(u) - self.half + 1):
                hit = self._pieces.get(u[pos : pos + self.half])
                if hit is None:
                    continue
                v = u[:pos] + invert_word(hit[2][self.half :]) + u[pos + self.half :]
                v = self.dehn_reduce(v)
                if len(v) < len(u):
                    return self._least_geodesic(v)
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
                    if shortlex_key(v) < shortlex_key(best):
                        best = v
            if len(seen) > self.bounds.search_limit:
                raise SearchBoundExceeded(
                    f"Geodesic search exceeded {self.bounds.search_limit} words.",
                    bound=self.bounds.search_limit,
                )
        return best

    def normal_form(self, word: Word) -> Word:
        word = self.check_word(word)
        if word not in self._nf:
            self._nf[word] = self._least_geodesic(self.dehn_reduce(word))
        return self._nf[word]

    def relator_filling(self, word: Word) -> typing.List[typing.Tuple[int, Word]]:
        """
        For a word equal to the identity, terms ``(sign, g)`` such that the path chain of
        ``word`` is the boundary of ``sum(sign * g * sigma)``.
        """
        trace = []
        if self.dehn_reduce(word, trace):
            raise InvariantViolation(f"{self.format(word)} is not the identity.")
        terms = []
        for prefix, sign, shift in trace:
            base = self.relator if sign > 0 else invert_word(self.relator)
            terms.append((sign, self.multiply(prefix, invert_word(base[:shift]))))
        return terms

    def _conjugates(self, g: Word) -> typing.Dict[Word, Word]:
        """Conjugates reachable by single-letter steps within the length slack, with witnesses."""
        seen = {g: ()}
        frontier = deque([g])
        shortest = len(g)
        slack = self.bounds.conjugacy_slack
        while frontier:
            u = frontier.popleft()
            if len(u) > shortest + slack:
                continue
            for x in self.letters:
                v = self.multiply((x,), u, (-x,))
                if v in seen or len(v) > shortest + slack:
                    continue
                seen[v] = self.multiply((x,), seen[u])
                shortest = min(shortest, len(v))
                frontier.append(v)
            if len(seen) > self.bounds.search_limit:
                raise SearchBoundExceeded(
                    f"Conjugacy search for {self.format(g)} exceeded "
                    f"{self.bounds.search_limit} words.",
                    bound=self.bounds.search_limit,
                )
        return {v: w for v, w in seen.items() if len(v) == shortest}

    def conjugacy_label(self, g: Word):
        g = self.normal_form(g)
        if not g:
            return (), ()
        if g not in self._labels:
            shortest = self._conjugates(g)
            label = min(shortest, key=shortlex_key)
            self._labels[g] = (label, shortest[label])
        return self._labels[g]

    def root(self, g: Word) -> typing.Tuple[Word, int]:
        """``(r, k)`` with ``g == r^k``, ``k > 0`` and ``r`` not a proper power."""
        g = self.normal_form(g)
        if not g:
            raise InvalidSpecError("The identity has no root.")
        if g not in self._roots:
            best = None
            ranked = sorted(self._conjugates(g).items(), key=lambda item: shortlex_key(item[0]))
            for v, w in ranked:
                for k in range(len(v), 0, -1):
                    if len(v) % k == 0 and v == v[: len(v) // k] * k:
                        if best is None or k > best[1]:
                            best = (v[: len(v) // k], k, w)
                        break
            u, k, w = best
            r = self.multiply(invert_word(w), u, w)
            if self.power(r, k) != g:
                raise InvariantViolation(f"Root extraction failed for {self.format(g)}.")
            self._roots[g] = (r, k)
        return self._roots[g]

    def centralizer_of(self, g: Word) -> Subgroup:
        g = self.normal_form(g)
        if not g:
            return self.whole()
        root = self.root(g)[0]
        if root not in self._centralizers:
            self._centralizers[root] = CyclicSubgroup(self, root)
        return self._centralizers[root]


def make_group(spec: GroupSpec) -> GroupOracle:
    if spec.kind == "free_abelian":
        names = ("t",) if spec.size == 1 else None
        group = FreeAbelianGroup(spec.size, names=names, bounds=spec.bounds)
    elif spec.size == 1:
        group = FreeAbelianGroup(2, names=("a1", "b1"), bounds=spec.bounds)
    else:
        group = SurfaceGroup(spec.size, bounds=spec.bounds)
    group.spec = spec
    logger.debug("Built %s with duality dimension %d.", group.name, group.dimension)
    return group


def intersect_centralizers(A: Subgroup, B: Subgroup) -> Subgroup:
    if A.ambient is not B.ambient and A.ambient.key != B.ambient.key:
        raise InvalidSpecError("Subgroups of different groups cannot be intersected.")
    G = A.ambient
    if A.kind == "whole":
        return B
    if B.kind == "whole":
        return A
    if A.kind == "trivial" or B.kind == "trivial":
        return G.trivial()

    if G.is_abelian:
        left = [G.to_vector(g) for g in A.generators]
        right = [G.to_vector(g) for g in B.generators]
        M = IntegerMatrix.from_columns(left + [tuple(-e for e in v) for v in right], G.rank)
        vectors = []
        for x in kernel_basis(M):
            vec = [0] * G.rank
            for c, col in zip(x[: len(left)], left):
                vec = [v + c * e for v, e in zip(vec, col)]
            vectors.append(G.from_vector(vec))
        return subgroup_of(G, vectors)

    r, s = A.generators[0], B.generators[0]
    if not G.commutes(r, s):
        return G.trivial()
    if B.contains(r) and A.contains(s):
        return A
    # commuting elements are powers of one primitive element
    rho = CyclicSubgroup(G, G.root(r)[0])
    a, b = abs(rho.exponent(r)), abs(rho.exponent(s))
    return CyclicSubgroup(G, G.power(rho.root, a * b // math.gcd(a, b)))
