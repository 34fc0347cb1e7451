"""
Group oracles, subgroup descriptors and canonical labels.

Words are tuples of nonzero ints: generator ``i`` (0-based) is the letter ``i + 1`` and its
inverse is ``-(i + 1)``.  Every public procedure takes and returns normalized words.
"""

import abc
import typing
from collections import deque
from dataclasses import dataclass
from functools import total_ordering

from core.linalg import IntegerMatrix, hermite_basis, lattice_reduce, solve_integer_linear
from core.models import InvalidSpecError, InvariantViolation, SearchBoundExceeded, getLogger
from core.utils import (
    MAX_WORD_LENGTH,
    Word,
    format_word,
    invert_word,
    parse_word,
    shortlex_key,
    word_power,
)

logger = getLogger(__name__)


@dataclass(frozen=True)
class SearchBounds:
    conjugacy_slack: int = 2
    coset_slack: int = 2
    search_limit: int = 20000
    initial_window_radius: int = 1


class GroupOracle(abc.ABC):
    """A finitely presented PD group together with its decision procedures."""

    kind = "abstract"
    is_abelian = False

    def __init__(self, generator_names: typing.Sequence[str], dimension: int, bounds=None):
        self.generator_names = tuple(generator_names)
        self.dimension = dimension
        self.bounds = bounds or SearchBounds()
        self._resolution = None

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    @property
    def name(self) -> str:
        return self.kind

    @property
    def key(self) -> tuple:
        """Hashable identity used by caches."""
        return self.kind, self.generator_names

    @property
    def rank(self) -> int:
        return len(self.generator_names)

    @property
    def letters(self) -> typing.Tuple[int, ...]:
        return tuple(l for i in range(1, self.rank + 1) for l in (i, -i))

    def check_word(self, word: typing.Iterable[int]) -> Word:
        word = tuple(word)
        for letter in word:
            if not isinstance(letter, int) or letter == 0 or abs(letter) > self.rank:
                raise InvalidSpecError(f"Malformed letter {letter!r} for {self.name}.")
        return word

    @abc.abstractmethod
    def normal_form(self, word: Word) -> Word:
        """The ShortLex-minimal spelling of ``word``."""

    def multiply(self, *words: Word) -> Word:
        return self.normal_form(tuple(l for w in words for l in w))

    def invert(self, word: Word) -> Word:
        return self.normal_form(invert_word(word))

    def power(self, word: Word, exponent: int) -> Word:
        return self.normal_form(word_power(word, exponent))

    def conjugate(self, w: Word, g: Word) -> Word:
        """``w g w^-1``."""
        return self.multiply(w, g, invert_word(w))

    def is_identity(self, word: Word) -> bool:
        return not self.normal_form(word)

    def commutes(self, g: Word, h: Word) -> bool:
        return self.multiply(g, h) == self.multiply(h, g)

    def parse(self, text: str) -> Word:
        return self.normal_form(parse_word(text, self.generator_names))

    def format(self, word: Word) -> str:
        return format_word(word, self.generator_names)

    @abc.abstractmethod
    def conjugacy_label(self, g: Word) -> typing.Tuple[Word, Word]:
        """Returns ``(label, w)`` with ``w g w^-1 == label``, the same label across the class."""

    def are_conjugate(self, g: Word, h: Word) -> typing.Optional[Word]:
        """A witness ``w`` with ``w g w^-1 == h``, or ``None``."""
        label_g, w_g = self.conjugacy_label(self.normal_form(g))
        label_h, w_h = self.conjugacy_label(self.normal_form(h))
        if label_g != label_h:
            return None
        return self.multiply(invert_word(w_h), w_g)

    @abc.abstractmethod
    def centralizer_of(self, g: Word) -> "Subgroup":
        pass

    def enumerate_ball(self, radius: int) -> typing.List[Word]:
        seen = {()}
        frontier = [()]
        for _ in range(radius):
            nxt = []
            for u in frontier:
                for x in self.letters:
                    v = self.multiply(u, (x,))
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        return sorted(seen, key=shortlex_key)

    def export_state(self) -> dict:
        """Plain-data caches worth persisting between runs."""
        return {}

    def import_state(self, state: dict) -> None:
        pass

    def whole(self) -> "WholeSubgroup":
        return WholeSubgroup(self)

    def trivial(self) -> "TrivialSubgroup":
        return TrivialSubgroup(self)

    @property
    def resolution(self):
        if self._resolution is None:
            from core.resolution import builtin_resolution

            self._resolution = builtin_resolution(self)
        return self._resolution


class TrivialGroup(GroupOracle):
    kind = "trivial"
    is_abelian = True

    def __init__(self):
        super().__init__((), 0)

    def normal_form(self, word: Word) -> Word:
        if self.check_word(word):
            raise InvariantViolation("The trivial group has no letters.")
        return ()

    def to_vector(self, word: Word):
        return ()

    def from_vector(self, vector) -> Word:
        return ()

    def conjugacy_label(self, g: Word):
        return (), ()

    def centralizer_of(self, g: Word):
        return self.whole()


class FreeAbelianGroup(GroupOracle):
    kind = "free_abelian"
    is_abelian = True

    def __init__(self, rank: int, names=None, bounds=None):
        if rank < 1:
            raise InvalidSpecError(f"A free abelian group needs rank >= 1, got {rank}.")
        names = names or [f"e{i}" for i in range(1, rank + 1)]
        super().__init__(names, rank, bounds)

    @property
    def name(self) -> str:
        return f"Z^{self.rank}" if self.rank > 1 else "Z"

    def to_vector(self, word: Word) -> typing.Tuple[int, ...]:
        vec = [0] * self.rank
        for letter in self.check_word(word):
            vec[abs(letter) - 1] += 1 if letter > 0 else -1
        return tuple(vec)

    def from_vector(self, vector: typing.Sequence[int]) -> Word:
        word = []
        for i, k in enumerate(vector):
            word.extend(word_power((i + 1,), k))
        return tuple(word)

    def normal_form(self, word: Word) -> Word:
        return self.from_vector(self.to_vector(word))

    def parse(self, text: str) -> Word:
        text = "".join(text.split())
        if text.startswith("(") and text.endswith(")"):
            try:
                vector = [int(part) for part in text[1:-1].split(",") if part]
            except ValueError:
                raise InvalidSpecError(f'Cannot decipher the vector "{text}".')
            if len(vector) != self.rank:
                raise InvalidSpecError(f"{self.name} needs vectors of length {self.rank}.")
            if sum(map(abs, vector)) > MAX_WORD_LENGTH:
                raise InvalidSpecError(f"The vector {text} exceeds {MAX_WORD_LENGTH} letters.")
            return self.from_vector(vector)
        return super().parse(text)

    def conjugacy_label(self, g: Word):
        return self.normal_form(g), ()

    def centralizer_of(self, g: Word):
        return self.whole()


class Subgroup(abc.ABC):
    """
    A subgroup of ``ambient`` together with an oracle for the abstract group it is.

    ``include`` maps words of the own oracle into the ambient group, ``express`` is its inverse
    on members.
    """

    kind = "abstract"

    def __init__(self, ambient: GroupOracle, oracle: GroupOracle, generators):
        self.ambient = ambient
        self.oracle = oracle
        self.generators = tuple(generators)
        self._resolution = None
        self._left = {}
        self._right = {}

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} in {self.ambient.name}>"

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def key(self) -> tuple:
        return self.kind, self.generators

    @property
    def name(self) -> str:
        return "<" + ", ".join(self.ambient.format(g) for g in self.generators) + ">"

    @property
    def resolution(self):
        if self._resolution is None:
            from core.resolution import builtin_resolution

            self._resolution = builtin_resolution(self)
        return self._resolution

    @abc.abstractmethod
    def include(self, k: Word) -> Word:
        pass

    @abc.abstractmethod
    def express(self, g: Word) -> Word:
        pass

    @abc.abstractmethod
    def contains(self, g: Word) -> bool:
        pass

    def left_coset(self, g: Word) -> typing.Tuple[Word, Word]:
        """``(rep, k)`` with ``g == rep * include(k)`` and ``rep`` canonical for ``gJ``."""
        if g not in self._left:
            self._left[g] = self._left_coset(g)
        return self._left[g]

    def right_coset(self, g: Word) -> typing.Tuple[Word, Word]:
        """``(k, rep)`` with ``g == include(k) * rep`` and ``rep`` canonical for ``Jg``."""
        if g not in self._right:
            self._right[g] = self._right_coset(g)
        return self._right[g]

    @abc.abstractmethod
    def _left_coset(self, g: Word):
        pass

    @abc.abstractmethod
    def _right_coset(self, g: Word):
        pass

    @abc.abstractmethod
    def conjugate(self, w: Word) -> "Subgroup":
        """The subgroup ``w J w^-1``."""


class WholeSubgroup(Subgroup):
    kind = "whole"

    def __init__(self, ambient: GroupOracle):
        super().__init__(ambient, ambient, ())

    @property
    def name(self) -> str:
        return self.ambient.name

    @property
    def resolution(self):
        return self.ambient.resolution

    def include(self, k: Word) -> Word:
        return self.ambient.normal_form(k)

    def express(self, g: Word) -> Word:
        return self.ambient.normal_form(g)

    def contains(self, g: Word) -> bool:
        return True

    def _left_coset(self, g):
        return (), g

    def _right_coset(self, g):
        return g, ()

    def conjugate(self, w: Word):
        return self


class TrivialSubgroup(Subgroup):
    kind = "trivial"

    def __init__(self, ambient: GroupOracle):
        super().__init__(ambient, TrivialGroup(), ())

    @property
    def name(self) -> str:
        return "1"

    def include(self, k: Word) -> Word:
        return ()

    def express(self, g: Word) -> Word:
        if g:
            raise InvariantViolation(f"{self.ambient.format(g)} is not trivial.")
        return ()

    def contains(self, g: Word) -> bool:
        return not g

    def _left_coset(self, g):
        return g, ()

    def _right_coset(self, g):
        return (), g

    def conjugate(self, w: Word):
        return self


class LatticeSubgroup(Subgroup):
    """A subgroup of a free abelian group, stored by its Hermite basis."""

    def __init__(self, ambient: GroupOracle, vectors):
        self.basis = hermite_basis(vectors, ambient.rank)
        if not self.basis:
            raise InvalidSpecError("Use the trivial subgroup for the zero lattice.")
        super().__init__(
            ambient,
            FreeAbelianGroup(len(self.basis)),
            [ambient.from_vector(b) for b in self.basis],
        )

    @property
    def kind(self):
        return "cyclic" if len(self.basis) == 1 else "free_abelian"

    def include(self, k: Word) -> Word:
        coeffs = self.oracle.to_vector(k)
        vec = [0] * self.ambient.rank
        for c, b in zip(coeffs, self.basis):
            vec = [v + c * e for v, e in zip(vec, b)]
        return self.ambient.from_vector(vec)

    def _split(self, g: Word):
        rep, coeffs = lattice_reduce(self.ambient.to_vector(g), self.basis)
        return self.ambient.from_vector(rep), self.oracle.from_vector(coeffs)

    def express(self, g: Word) -> Word:
        rep, k = self._split(g)
        if rep:
            raise InvariantViolation(f"{self.ambient.format(g)} is not in {self.name}.")
        return k

    def contains(self, g: Word) -> bool:
        return not self._split(g)[0]

    def _left_coset(self, g):
        return self._split(g)

    def _right_coset(self, g):
        rep, k = self._split(g)
        return k, rep

    def conjugate(self, w: Word):
        return self


class CyclicSubgroup(Subgroup):
    """``<root>`` in a surface group; ``root`` is primitive."""

    kind = "cyclic"

    def __init__(self, ambient: GroupOracle, root: Word):
        root = ambient.normal_form(root)
        if not root:
            raise InvalidSpecError("A cyclic subgroup needs a nontrivial root.")
        self.root = root
        self.root_inverse = ambient.invert(root)
        super().__init__(ambient, FreeAbelianGroup(1, names=[ambient.format(root)]), (root,))
        self._exponents = {}

    def include(self, k: Word) -> Word:
        (m,) = self.oracle.to_vector(k)
        return self.ambient.power(self.root, m)

    def exponent(self, g: Word) -> typing.Optional[int]:
        """``m`` with ``g == root^m``, or ``None`` when ``g`` is not a power of the root."""
        if g in self._exponents:
            return self._exponents[g]
        if not self.ambient.commutes(g, self.root):
            self._exponents[g] = None
            return None
        # the centralizer of a primitive element is the cyclic group it generates
        bound = len(g) + self.ambient.bounds.coset_slack + 1
        pos = neg = ()
        found = None
        for m in range(bound + 1):
            if pos == g:
                found = m
                break
            if neg == g:
                found = -m
                break
            pos = self.ambient.multiply(pos, self.root)
            neg = self.ambient.multiply(neg, self.root_inverse)
        if found is None:
            raise SearchBoundExceeded(
                f"No power of {self.ambient.format(self.root)} equals "
                f"{self.ambient.format(g)} within |m| <= {bound}.",
                bound=bound,
            )
        self._exponents[g] = found
        return found

    def express(self, g: Word) -> Word:
        m = self.exponent(g)
        if m is None:
            raise InvariantViolation(f"{self.ambient.format(g)} is not in {self.name}.")
        return self.oracle.from_vector((m,))

    def contains(self, g: Word) -> bool:
        return self.exponent(g) is not None

    def _line_search(self, g: Word, on_left: bool):
        """Flood along ``g * root^m`` (or ``root^m * g``) keeping the ShortLex-least word."""
        steps = ((self.root, 1), (self.root_inverse, -1))
        seen = {g: 0}
        frontier = deque([g])
        best = g
        slack = self.ambient.bounds.coset_slack
        while frontier:
            u = frontier.popleft()
            if len(u) > len(best) + slack:
                continue
            for step, sign in steps:
                v = self.ambient.multiply(step, u) if on_left else self.ambient.multiply(u, step)
                if v in seen or len(v) > len(best) + slack:
                    continue
                seen[v] = seen[u] + sign
                frontier.append(v)
                if shortlex_key(v) < shortlex_key(best):
                    best = v
            if len(seen) > self.ambient.bounds.search_limit:
                raise SearchBoundExceeded(
                    f"Coset search around {self.ambient.format(g)} exceeded "
                    f"{self.ambient.bounds.search_limit} words.",
                    bound=self.ambient.bounds.search_limit,
                )
        return best, seen[best]

    def _left_coset(self, g):
        rep, m = self._line_search(g, on_left=False)
        return rep, self.oracle.from_vector((-m,))

    def _right_coset(self, g):
        rep, m = self._line_search(g, on_left=True)
        return self.oracle.from_vector((-m,)), rep

    def conjugate(self, w: Word):
        return CyclicSubgroup(self.ambient, self.ambient.conjugate(w, self.root))


def subgroup_of(ambient: GroupOracle, generators: typing.Sequence[Word]) -> Subgroup:
    """The subgroup generated by ``generators``; abelian ambients only take arbitrary lists."""
    generators = [ambient.normal_form(g) for g in generators if not ambient.is_identity(g)]
    if not generators:
        return ambient.trivial()
    if ambient.is_abelian:
        lattice = LatticeSubgroup(ambient, [ambient.to_vector(g) for g in generators])
        if len(lattice.basis) == ambient.rank and all(
            b[i] == 1 for i, b in enumerate(lattice.basis)
        ):
            return ambient.whole()
        return lattice
    if len(generators) != 1:
        raise InvalidSpecError(f"{ambient.name} subgroups are described by one generator.")
    return CyclicSubgroup(ambient, generators[0])


@total_ordering
@dataclass(frozen=True)
class DoubleCosetKey:
    """The canonical representative of ``K rep H``."""

    left: tuple
    right: tuple
    rep: Word

    def __lt__(self, other):
        return (shortlex_key(self.rep), self.left, self.right) < (
            shortlex_key(other.rep),
            other.left,
            other.right,
        )


def coset_canonical(g: Word, K: Subgroup, side: str = "left") -> Word:
    """ShortLex-least element found in ``gK`` (``side="left"``) or ``Kg``."""
    g = K.ambient.normal_form(g)
    if side == "left":
        return K.left_coset(g)[0]
    return K.right_coset(g)[1]


def split_double_coset(g: Word, K: Subgroup, H: Subgroup) -> typing.Tuple[Word, Word, Word]:
    """Returns ``(rep, k, h)`` with ``g == k * rep * h``, ``k`` in K and ``h`` in H."""
    G = K.ambient
    g = G.normal_form(g)
    if K.kind == "whole":
        return (), g, ()
    if H.kind == "whole":
        return (), (), g
    if K.kind == "trivial":
        rep, k = H.left_coset(g)
        return rep, (), H.include(k)
    if H.kind == "trivial":
        k, rep = K.right_coset(g)
        return rep, K.include(k), ()
    if G.is_abelian:
        basis = hermite_basis(
            [G.to_vector(x) for x in K.generators + H.generators], G.rank
        )
        rep_vec, _ = lattice_reduce(G.to_vector(g), basis)
        rep = G.from_vector(rep_vec)
        diff = G.multiply(g, G.invert(rep))
        k_part = _lattice_split(G, K, H, diff)
        return rep, k_part, G.multiply(G.invert(k_part), diff)
    return _plane_search(g, K, H)


def _lattice_split(G, K, H, diff):
    columns = [G.to_vector(x) for x in K.generators + H.generators]
    A = IntegerMatrix.from_columns(columns, G.rank)
    x = solve_integer_linear(A, G.to_vector(diff))
    if x is None:
        raise InvariantViolation("Double coset split has no integer solution.")
    vec = [0] * G.rank
    for c, col in zip(x[: len(K.generators)], columns):
        vec = [v + c * e for v, e in zip(vec, col)]
    return G.from_vector(vec)


def _plane_search(g: Word, K: Subgroup, H: Subgroup):
    G = K.ambient
    r, r_inv = K.generators[0], G.invert(K.generators[0])
    s, s_inv = H.generators[0], G.invert(H.generators[0])
    seen = {g: (0, 0)}
    frontier = deque([g])
    best = g
    slack = G.bounds.coset_slack
    while frontier:
        u = frontier.popleft()
        if len(u) > len(best) + slack:
            continue
        a, b = seen[u]
        moves = (
            (G.multiply(r, u), (a + 1, b)),
            (G.multiply(r_inv, u), (a - 1, b)),
            (G.multiply(u, s), (a, b + 1)),
            (G.multiply(u, s_inv), (a, b - 1)),
        )
        for v, ab in moves:
            if v in seen or len(v) > len(best) + slack:
                continue
            seen[v] = ab
            frontier.append(v)
            if shortlex_key(v) < shortlex_key(best):
                best = v
        if len(seen) > G.bounds.search_limit:
            raise SearchBoundExceeded(
                f"Double coset search around {G.format(g)} exceeded "
                f"{G.bounds.search_limit} words.",
                bound=G.bounds.search_limit,
            )
    a, b = seen[best]
    return best, G.power(r, -a), G.power(s, -b)


def double_coset_key(g: Word, K: Subgroup, H: Subgroup) -> DoubleCosetKey:
    return DoubleCosetKey(K.key, H.key, split_double_coset(g, K, H)[0])


class GroupRingElement(dict):
    """A finitely supported map from normalized words to nonzero integers."""

    def add(self, word: Word, coef: int):
        value = self.get(word, 0) + coef
        if value:
            self[word] = value
        else:
            self.pop(word, None)
        return self

    def augmentation(self) -> int:
        return sum(self.values())
