"""
Free resolutions of the trivial module over group rings.

A chain is a :class:`Chain` keyed by ``(g, cell)`` where ``g`` is a normalized word of the
resolved group and ``cell = (degree, index)`` names a free generator.  Tensor chains in
``R (x) R`` are keyed by ``(g1, cell1, g2, cell2)`` and carry the diagonal action.
"""

import abc
import typing
from itertools import combinations

from core.groups import GroupOracle, GroupRingElement, Subgroup
from core.linalg import FGAbelianGroup, IntegerMatrix, homology_of_pair
from core.models import InvalidSpecError, InvariantViolation, getLogger
from core.utils import Word, invert_word

logger = getLogger(__name__)

Cell = typing.Tuple[int, int]

_check_invariants = False


def enable_invariant_checks(flag: bool = True) -> None:
    """Verify every homotopy application and chain map image as it is computed."""
    global _check_invariants
    _check_invariants = flag


class Chain(dict):
    """A finitely supported integer combination; zero coefficients are never stored."""

    def add(self, key, coef: int) -> "Chain":
        if not coef:
            return self
        value = self.get(key, 0) + coef
        if value:
            self[key] = value
        else:
            self.pop(key, None)
        return self

    def merge(self, other: typing.Mapping, scale: int = 1) -> "Chain":
        if scale:
            for key, coef in other.items():
                self.add(key, scale * coef)
        return self

    def scaled(self, scale: int) -> "Chain":
        return Chain({k: scale * v for k, v in self.items()}) if scale else Chain()


def translate(G: GroupOracle, g: Word, chain: typing.Mapping) -> Chain:
    """Left action of ``g`` on a chain, or diagonally on a tensor chain."""
    out = Chain()
    if not g:
        return out.merge(chain)
    for key, coef in chain.items():
        if len(key) == 2:
            out.add((G.multiply(g, key[0]), key[1]), coef)
        else:
            out.add((G.multiply(g, key[0]), key[1], G.multiply(g, key[2]), key[3]), coef)
    return out


class FreeResolution(abc.ABC):
    """
    ``0 <- Z <- R_0 <- R_1 <- ... <- R_length`` over ``Z[group]``.

    Subclasses describe boundaries of the generators and the contracting homotopy;
    diagonals default to the inductive construction through the tensor homotopy.
    """

    def __init__(self, group: GroupOracle, names: typing.Sequence[typing.Sequence[str]]):
        self.group = group
        self.cell_names = tuple(tuple(n) for n in names)
        self.ranks = tuple(len(n) for n in self.cell_names)
        self.length = len(self.ranks) - 1
        self._boundaries = {}
        self._diagonals = {}
        self._homology = {}
        self._maps = {}
        self._restored = {}

    def __repr__(self):
        return f"<{type(self).__name__} of {self.group.name} ranks={list(self.ranks)}>"

    @property
    def base(self) -> Cell:
        return 0, 0

    def cells(self, degree: int) -> typing.List[Cell]:
        if not 0 <= degree <= self.length:
            return []
        return [(degree, i) for i in range(self.ranks[degree])]

    def cell_name(self, cell: Cell) -> str:
        return self.cell_names[cell[0]][cell[1]]

    def check_cell(self, cell: Cell) -> Cell:
        degree, index = cell
        if not 0 <= degree <= self.length or not 0 <= index < self.ranks[degree]:
            raise InvalidSpecError(f"No cell {cell} in {self!r}.")
        return cell

    @property
    def top_cell(self) -> Cell:
        if self.length == 0 or self.ranks[self.length] != 1:
            raise InvalidSpecError(f"{self.group.name} has no fundamental cycle.")
        return self.length, 0

    @property
    def fundamental_cycle(self) -> Chain:
        return Chain({((), self.top_cell): 1})

    @abc.abstractmethod
    def _boundary_cell(self, cell: Cell) -> Chain:
        pass

    def boundary_cell(self, cell: Cell) -> Chain:
        if cell not in self._boundaries:
            self.check_cell(cell)
            self._boundaries[cell] = Chain() if cell[0] == 0 else self._boundary_cell(cell)
        return self._boundaries[cell]

    def boundary(self, chain: typing.Mapping) -> Chain:
        out = Chain()
        for (g, cell), coef in chain.items():
            out.merge(translate(self.group, g, self.boundary_cell(cell)), coef)
        return out

    @staticmethod
    def augmentation(chain: typing.Mapping) -> int:
        return sum(coef for (_, cell), coef in chain.items() if cell[0] == 0)

    @abc.abstractmethod
    def _homotopy_term(self, g: Word, cell: Cell) -> Chain:
        """``h(g * cell)``; the homotopy is only additive, not equivariant."""

    def apply_homotopy(self, chain: typing.Mapping) -> Chain:
        out = Chain()
        for (g, cell), coef in chain.items():
            if not 0 <= cell[0] <= self.length:
                raise InvalidSpecError(f"Degree {cell[0]} is outside {self!r}.")
            out.merge(self._homotopy_term(g, cell), coef)
        if _check_invariants:
            self.check_homotopy(chain, out)
        return out

    def check_homotopy(self, chain: typing.Mapping, image: typing.Optional[Chain] = None):
        if image is None:
            image = Chain()
            for (g, cell), coef in chain.items():
                image.merge(self._homotopy_term(g, cell), coef)
        lhs = self.boundary(image)
        for (g, cell), coef in self.boundary(chain).items():
            lhs.merge(self._homotopy_term(g, cell), coef)
        rhs = Chain().merge(chain)
        rhs.add(((), self.base), -self.augmentation(chain))
        if lhs != rhs:
            raise InvariantViolation(f"Contracting homotopy of {self!r} failed on {dict(chain)}.")

    def tensor_boundary(self, chain: typing.Mapping) -> Chain:
        out = Chain()
        for (g1, c1, g2, c2), coef in chain.items():
            for (h, b), n in self.boundary(Chain({(g1, c1): 1})).items():
                out.add((h, b, g2, c2), coef * n)
            sign = -1 if c1[0] % 2 else 1
            for (h, b), n in self.boundary(Chain({(g2, c2): 1})).items():
                out.add((g1, c1, h, b), sign * coef * n)
        return out

    def tensor_homotopy(self, chain: typing.Mapping) -> Chain:
        """``h (x) 1 + eta.eps (x) h``, a contraction of ``R (x) R`` onto ``Z``."""
        out = Chain()
        for (g1, c1, g2, c2), coef in chain.items():
            for (h, b), n in self._homotopy_term(g1, c1).items():
                out.add((h, b, g2, c2), coef * n)
            if c1[0] == 0:
                for (h, b), n in self._homotopy_term(g2, c2).items():
                    out.add(((), self.base, h, b), coef * n)
        return out

    def _diagonal_cell(self, cell: Cell) -> Chain:
        if cell[0] == 0:
            return Chain({((), cell, (), cell): 1})
        below = Chain()
        for (g, b), coef in self.boundary_cell(cell).items():
            below.merge(translate(self.group, g, self.diagonal_cell(b)), coef)
        return self.tensor_homotopy(below)

    def diagonal_cell(self, cell: Cell) -> Chain:
        if cell not in self._diagonals:
            self.check_cell(cell)
            self._diagonals[cell] = self._diagonal_cell(cell)
            logger.debug(
                "Diagonal of %s in %s has %d terms.",
                self.cell_name(cell),
                self.group.name,
                len(self._diagonals[cell]),
            )
        return self._diagonals[cell]

    def diagonal(self, chain: typing.Mapping) -> Chain:
        out = Chain()
        for (g, cell), coef in chain.items():
            out.merge(translate(self.group, g, self.diagonal_cell(cell)), coef)
        return out

    def check_diagonal(self, cell: Cell) -> None:
        """Boundary compatibility and both counit laws on one generator."""
        lhs = self.tensor_boundary(self.diagonal_cell(cell))
        rhs = self.diagonal(self.boundary_cell(cell))
        if lhs != rhs:
            raise InvariantViolation(f"Diagonal of {self.cell_name(cell)} is not a chain map.")
        left, right = Chain(), Chain()
        for (g1, c1, g2, c2), coef in self.diagonal_cell(cell).items():
            if c1[0] == 0:
                left.add((g2, c2), coef)
            if c2[0] == 0:
                right.add((g1, c1), coef)
        if left != {((), cell): 1} or right != {((), cell): 1}:
            raise InvariantViolation(f"Diagonal of {self.cell_name(cell)} is not counital.")

    def boundary_matrix(self, degree: int) -> typing.List[typing.List[GroupRingElement]]:
        """Boundary of ``R_degree`` as a matrix over ``Z[G]``, columns indexed by cells."""
        rows = self.ranks[degree - 1] if 1 <= degree <= self.length + 1 else 0
        cols = self.ranks[degree] if 0 <= degree <= self.length else 0
        M = [[GroupRingElement() for _ in range(cols)] for _ in range(rows)]
        if rows:
            for j in range(cols):
                for (g, (_, i)), coef in self.boundary_cell((degree, j)).items():
                    M[i][j].add(g, coef)
        return M

    def coinvariant_boundary(self, degree: int) -> IntegerMatrix:
        """The boundary ``R_degree -> R_(degree-1)`` after tensoring with ``Z``."""
        rows = self.ranks[degree - 1] if 1 <= degree <= self.length + 1 else 0
        cols = self.ranks[degree] if 0 <= degree <= self.length else 0
        M = IntegerMatrix.zeros(rows, cols)
        for i, row in enumerate(self.boundary_matrix(degree)):
            for j, entry in enumerate(row):
                M.entries[i][j] = entry.augmentation()
        return M

    def homology(self, degree: int) -> FGAbelianGroup:
        """``H_degree`` of the group with trivial coefficients, in the cell basis."""
        if degree not in self._homology:
            self._homology[degree] = homology_of_pair(
                self.coinvariant_boundary(degree + 1), self.coinvariant_boundary(degree)
            )
        return self._homology[degree]

    def coinvariants(self, chain: typing.Mapping, degree: int) -> typing.Tuple[int, ...]:
        """Image of a chain in ``Z (x) R_degree`` as a vector over the cells."""
        vec = [0] * (self.ranks[degree] if 0 <= degree <= self.length else 0)
        for (_, cell), coef in chain.items():
            if cell[0] != degree:
                raise InvariantViolation(f"Chain mixes degrees {cell[0]} and {degree}.")
            vec[cell[1]] += coef
        return tuple(vec)

    def cycle_of(self, coords: typing.Sequence[int], degree: int) -> Chain:
        """A chain whose coinvariants represent the class with ``coords``."""
        vec = self.homology(degree).combine(coords)
        return Chain({((), (degree, i)): c for i, c in enumerate(vec) if c})

    def basis_names(self, degree: int) -> typing.List[str]:
        names = []
        for vec in self.homology(degree).basis:
            terms = [(c, self.cell_names[degree][i]) for i, c in enumerate(vec) if c]
            if len(terms) == 1 and terms[0][0] == 1:
                names.append(f"[{terms[0][1]}]")
            else:
                body = " + ".join(f"{c}*{n}" if c != 1 else n for c, n in terms)
                names.append(f"[{body.replace('+ -', '- ')}]")
        return names

    def memo(self, key, factory: typing.Callable[[], typing.Any]):
        """Per-resolution store for maps built from it."""
        if key not in self._maps:
            value = factory()
            if isinstance(value, ChainMap):
                value.restore(self._restored.get(key, {}))
            self._maps[key] = value
        return self._maps[key]

    def memo_items(self):
        return list(self._maps.items())

    def restored(self, key):
        """Plain data saved under ``key`` by an earlier run, or ``None``."""
        return self._restored.get(key)

    def export_state(self) -> dict:
        saved = {
            key: value.export_state()
            for key, value in self._maps.items()
            if isinstance(value, ChainMap)
        }
        return {
            "boundaries": dict(self._boundaries),
            "diagonals": dict(self._diagonals),
            "homology": dict(self._homology),
            "maps": saved,
        }

    def import_state(self, state: dict, extra: typing.Optional[dict] = None) -> None:
        self._boundaries.update(state["boundaries"])
        self._diagonals.update(state["diagonals"])
        self._homology.update(state["homology"])
        self._restored.update(state["maps"])
        self._restored.update(extra or {})

    def lift_from(self, J: Subgroup) -> "ChainMap":
        return self.memo(("lift", J.key), lambda: SubgroupLift(J, self))

    def restriction_to(self, J: Subgroup) -> "ChainMap":
        return self.memo(("restrict", J.key), lambda: SubgroupRestriction(self, J))


class PointResolution(FreeResolution):
    """The trivial group: ``Z`` in degree zero."""

    def __init__(self, group: GroupOracle):
        super().__init__(group, [["pt"]])

    def _boundary_cell(self, cell):
        return Chain()

    def _homotopy_term(self, g, cell):
        return Chain()


class KoszulResolution(FreeResolution):
    """
    ``Z^n`` resolved by the tensor product of ``n`` circle complexes.

    Cells of degree ``k`` are the ``k``-subsets ``S`` of the coordinates, with
    ``d e_S = sum (-1)^#{j in S, j < i} (t_i - 1) e_(S - i)``.
    """

    def __init__(self, group: GroupOracle):
        n = group.rank
        self.subsets = [list(combinations(range(n), k)) for k in range(n + 1)]
        self._index = {S: (k, i) for k, row in enumerate(self.subsets) for i, S in enumerate(row)}
        names = [
            ["pt" if not S else "^".join(group.generator_names[i] for i in S) for S in row]
            for row in self.subsets
        ]
        super().__init__(group, names)

    def subset(self, cell: Cell) -> typing.Tuple[int, ...]:
        return self.subsets[cell[0]][cell[1]]

    def _unit(self, i: int) -> Word:
        return (i + 1,)

    def _boundary_cell(self, cell):
        S = self.subset(cell)
        out = Chain()
        for pos, i in enumerate(S):
            face = self._index[S[:pos] + S[pos + 1 :]]
            sign = -1 if pos % 2 else 1
            out.add((self._unit(i), face), sign)
            out.add(((), face), -sign)
        return out

    def _homotopy_term(self, g, cell):
        G = self.group
        S = self.subset(cell)
        v = list(G.to_vector(g))
        out = Chain()
        for k in range(S[0] if S else G.rank):
            m = v[k]
            if not m:
                continue
            target = self._index[(k,) + S]
            w = [0] * k + v[k:]
            steps, sign = (range(m), 1) if m > 0 else (range(m, 0), -1)
            for i in steps:
                w[k] = i
                out.add((G.from_vector(w), target), sign)
        return out

    def _diagonal_cell(self, cell):
        G = self.group
        S = self.subset(cell)
        out = Chain()
        for r in range(len(S) + 1):
            for S1 in combinations(S, r):
                S2 = tuple(i for i in S if i not in S1)
                inversions = sum(1 for i in S2 for j in S1 if i < j)
                shift = G.from_vector([1 if i in S1 else 0 for i in range(G.rank)])
                out.add(((), self._index[S1], shift, self._index[S2]), -1 if inversions % 2 else 1)
        return out


class SurfaceResolution(FreeResolution):
    """
    The one-relator resolution ``Z[G] <- Z[G]^2g <- Z[G]`` of a surface group.

    The degree-two boundary is the Fox derivative of the relator; the homotopy follows
    normal forms in degree zero and Dehn fillings in degree one.
    """

    def __init__(self, group: GroupOracle):
        super().__init__(group, [["pt"], list(group.generator_names), ["sigma"]])

    def path_chain(self, word: Word) -> Chain:
        """``sum w_1...w_(i-1) E(w_i)`` with ``E(x) = e_x`` and ``E(x^-1) = -x^-1 e_x``."""
        G = self.group
        out = Chain()
        for i, letter in enumerate(word):
            if letter > 0:
                out.add((G.normal_form(word[:i]), (1, letter - 1)), 1)
            else:
                out.add((G.normal_form(word[: i + 1]), (1, -letter - 1)), -1)
        return out

    def _boundary_cell(self, cell):
        if cell[0] == 1:
            x = cell[1] + 1
            return Chain({((x,), (0, 0)): 1, ((), (0, 0)): -1})
        return self.path_chain(self.group.relator)

    def _homotopy_term(self, g, cell):
        G = self.group
        if cell[0] == 0:
            return self.path_chain(g)
        if cell[0] == 1:
            x = cell[1] + 1
            loop = g + (x,) + invert_word(G.multiply(g, (x,)))
            out = Chain()
            for sign, h in G.relator_filling(loop):
                out.add((h, (2, 0)), sign)
            return out
        return Chain()


def builtin_resolution(owner) -> FreeResolution:
    if isinstance(owner, Subgroup):
        if owner.kind == "whole":
            return owner.ambient.resolution
        return owner.oracle.resolution
    if owner.kind == "trivial":
        return PointResolution(owner)
    if owner.kind == "free_abelian":
        return KoszulResolution(owner)
    if owner.kind == "surface":
        return SurfaceResolution(owner)
    raise InvalidSpecError(f"No resolution is known for {owner.name}.")


class ChainMap(abc.ABC):
    """An equivariant chain map between resolutions, materialized per generator on demand."""

    def __init__(self, source: FreeResolution, target: FreeResolution):
        self.source = source
        self.target = target
        self._images = {}

    def __repr__(self):
        return f"<{type(self).__name__} {self.source!r} -> {self.target!r}>"

    @abc.abstractmethod
    def _split(self, g: Word) -> typing.Tuple[Word, Word]:
        """``(s, t)``: ``g`` acts as the target element ``s`` on the generator ``t * cell``."""

    @abc.abstractmethod
    def _image(self, t: Word, cell: Cell) -> Chain:
        pass

    def image(self, t: Word, cell: Cell) -> Chain:
        key = (t, cell)
        if key not in self._images:
            self._images[key] = self._image(t, cell)
            if _check_invariants:
                self.check(t, cell)
        return self._images[key]

    def export_state(self) -> dict:
        return dict(self._images)

    def restore(self, images: typing.Mapping) -> None:
        self._images.update(images)

    def apply(self, chain: typing.Mapping) -> Chain:
        out = Chain()
        for (g, cell), coef in chain.items():
            s, t = self._split(g)
            out.merge(translate(self.target.group, s, self.image(t, cell)), coef)
        return out

    def check(self, t: Word, cell: Cell) -> None:
        lhs = self.target.boundary(self.image(t, cell))
        rhs = self.apply(self.source.boundary(Chain({(t, cell): 1})))
        if lhs != rhs:
            raise InvariantViolation(f"{self!r} does not commute with boundaries at {cell}.")


class SubgroupLift(ChainMap):
    """``S -> R`` over the inclusion of ``J`` into the resolved group of ``R``."""

    def __init__(self, J: Subgroup, R: FreeResolution):
        super().__init__(J.resolution, R)
        self.subgroup = J

    def _split(self, g):
        return self.subgroup.include(g), ()

    def _image(self, t, cell):
        if self.subgroup.kind == "whole":
            return Chain({((), cell): 1})
        if cell[0] == 0:
            return Chain({((), self.target.base): 1})
        return self.target.apply_homotopy(self.apply(self.source.boundary_cell(cell)))


class SubgroupRestriction(ChainMap):
    """
    ``R -> S`` for ``R`` viewed as a free ``J``-complex on the translates ``t * cell`` by
    canonical right coset representatives ``t``.
    """

    def __init__(self, R: FreeResolution, J: Subgroup):
        super().__init__(R, J.resolution)
        self.subgroup = J

    def _split(self, g):
        k, t = self.subgroup.right_coset(g)
        return k, t

    def _image(self, t, cell):
        if self.subgroup.kind == "whole":
            return Chain({(t, cell): 1})
        if cell[0] == 0:
            return Chain({((), self.target.base): 1})
        if self.subgroup.kind == "trivial":
            return Chain()
        return self.target.apply_homotopy(self.apply(self.source.boundary(Chain({(t, cell): 1}))))


class TwistedPush(ChainMap):
    """
    ``S_J -> S_C`` covering ``j -> w j w^-1`` for ``w J w^-1`` inside ``C``.

    Lifts into the ambient resolution, translates by ``w`` and restricts to ``C``.
    """

    def __init__(self, J: Subgroup, C: Subgroup, w: Word):
        G = J.ambient
        super().__init__(J.resolution, C.resolution)
        for gen in J.generators:
            if not C.contains(G.conjugate(w, gen)):
                raise InvariantViolation(
                    f"{G.format(G.conjugate(w, gen))} is not in {C.name}; the push is undefined."
                )
        self.J, self.C, self.w = J, C, G.normal_form(w)
        self._lift = G.resolution.lift_from(J)
        self._restrict = G.resolution.restriction_to(C)

    def _split(self, g):
        G = self.J.ambient
        return self.C.express(G.conjugate(self.w, self.J.include(g))), ()

    def _image(self, t, cell):
        lifted = self._lift.image((), cell)
        return self._restrict.apply(translate(self.J.ambient, self.w, lifted))
