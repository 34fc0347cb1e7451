"""
Cochains with coset-module coefficients, cup and cap products, the duality inverse and
the two Shapiro identifications.

A coefficient module is a tuple of subgroups ``(K1, ..., Km)`` standing for
``Z[G/K1] (x) ... (x) Z[G/Km]`` with the diagonal action; the empty tuple is ``Z``.
Module elements are keyed by tuples of canonical left coset representatives.
"""

import typing
from collections import deque

from core.groups import GroupOracle, Subgroup
from core.linalg import EchelonLattice
from core.models import InvalidSpecError, InvariantViolation, WindowExceeded, getLogger
from core.resolution import Cell, Chain, FreeResolution
from core.utils import Word

logger = getLogger(__name__)

ModuleKey = typing.Tuple[Word, ...]


class CosetModule:
    def __init__(self, subgroups: typing.Sequence[Subgroup] = ()):
        self.subgroups = tuple(subgroups)

    def __repr__(self):
        return "CosetModule(" + " (x) ".join(f"Z[G/{K.name}]" for K in self.subgroups) + ")"

    def __eq__(self, other):
        return isinstance(other, CosetModule) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def key(self):
        return tuple(K.key for K in self.subgroups)

    @property
    def identity(self) -> ModuleKey:
        return tuple(K.left_coset(())[0] for K in self.subgroups)

    def act(self, G: GroupOracle, g: Word, key: ModuleKey) -> ModuleKey:
        if not g:
            return key
        return tuple(K.left_coset(G.multiply(g, rep))[0] for K, rep in zip(self.subgroups, key))

    def tensor(self, other: "CosetModule") -> "CosetModule":
        return CosetModule(self.subgroups + other.subgroups)


class ModuleChain:
    """A chain of ``R (x)_G M`` keyed by ``(cell, key)``, using ``g b (x) m = b (x) g^-1 m``."""

    def __init__(self, resolution: FreeResolution, module: CosetModule, degree: int, terms=None):
        self.resolution = resolution
        self.module = module
        self.degree = degree
        self.terms = Chain()
        if terms:
            self.terms.merge(terms)

    def __repr__(self):
        return f"<ModuleChain degree={self.degree} over {self.module!r} terms={len(self.terms)}>"

    def __eq__(self, other):
        if not isinstance(other, ModuleChain):
            return NotImplemented
        return (self.module, self.degree, dict(self.terms)) == (
            other.module,
            other.degree,
            dict(other.terms),
        )

    def __bool__(self):
        return bool(self.terms)

    def add_translate(self, g: Word, cell: Cell, key: ModuleKey, coef: int) -> None:
        """Adds ``coef * (g cell) (x) key``."""
        G = self.resolution.group
        self.terms.add((cell, self.module.act(G, G.invert(g), key)), coef)

    def boundary(self) -> "ModuleChain":
        out = ModuleChain(self.resolution, self.module, self.degree - 1)
        for (cell, key), coef in self.terms.items():
            for (g, b), n in self.resolution.boundary_cell(cell).items():
                out.add_translate(g, b, key, coef * n)
        return out

    def is_cycle(self) -> bool:
        return not self.boundary()


class ModuleCochain:
    """An equivariant cochain ``R_degree -> M`` given by its values on the generators."""

    def __init__(self, resolution: FreeResolution, module: CosetModule, degree: int, values=None):
        self.resolution = resolution
        self.module = module
        self.degree = degree
        self.values = {cell: Chain() for cell in resolution.cells(degree)}
        for cell, value in (values or {}).items():
            self.values[cell].merge(value)

    def __repr__(self):
        size = sum(len(v) for v in self.values.values())
        return f"<ModuleCochain degree={self.degree} over {self.module!r} terms={size}>"

    def __eq__(self, other):
        if not isinstance(other, ModuleCochain):
            return NotImplemented
        return (self.module, self.degree, self.values) == (
            other.module,
            other.degree,
            other.values,
        )

    def __bool__(self):
        return any(self.values.values())

    def evaluate(self, g: Word, cell: Cell) -> Chain:
        """``phi(g cell) = g phi(cell)``."""
        G = self.resolution.group
        out = Chain()
        for key, coef in self.values.get(cell, {}).items():
            out.add(self.module.act(G, g, key), coef)
        return out


def augmentation_cochain(resolution: FreeResolution) -> ModuleCochain:
    """The degree-zero cocycle dual to the augmentation, valued in ``Z``."""
    return ModuleCochain(resolution, CosetModule(), 0, {resolution.base: {(): 1}})


def coboundary(phi: ModuleCochain) -> ModuleCochain:
    """``delta phi = phi . d``."""
    R = phi.resolution
    out = ModuleCochain(R, phi.module, phi.degree + 1)
    for cell in R.cells(phi.degree + 1):
        for (g, b), n in R.boundary_cell(cell).items():
            out.values[cell].merge(phi.evaluate(g, b), n)
    return out


def cup(phi: ModuleCochain, psi: ModuleCochain) -> ModuleCochain:
    """``(phi u psi)(b) = (phi (x) psi)(Delta b)`` valued in the tensor module."""
    R = phi.resolution
    if psi.resolution is not R:
        raise InvalidSpecError("Cup products need cochains on the same resolution.")
    out = ModuleCochain(R, phi.module.tensor(psi.module), phi.degree + psi.degree)
    for cell in R.cells(out.degree):
        value = out.values[cell]
        for (g1, c1, g2, c2), n in R.diagonal_cell(cell).items():
            if c1[0] != phi.degree:
                continue
            left = phi.evaluate(g1, c1)
            if not left:
                continue
            right = psi.evaluate(g2, c2)
            for k1, a in left.items():
                for k2, b in right.items():
                    value.add(k1 + k2, n * a * b)
    return out


def cap_with_z(phi: ModuleCochain) -> ModuleChain:
    """``z n phi = sum n * b1 (x) g1^-1 g2 phi(b2)`` over ``Delta(z)``."""
    R = phi.resolution
    G = R.group
    if not 0 <= phi.degree <= R.length:
        raise InvalidSpecError(f"Cannot cap a degree {phi.degree} cochain with z.")
    out = ModuleChain(R, phi.module, R.length - phi.degree)
    for (g1, b1, g2, b2), n in R.diagonal_cell(R.top_cell).items():
        if b2[0] != phi.degree:
            continue
        shift = G.multiply(G.invert(g1), g2)
        for key, coef in phi.evaluate(shift, b2).items():
            out.terms.add((b1, key), n * coef)
    return out


def shapiro_forward(K: Subgroup, degree: int, coords: typing.Sequence[int]) -> ModuleChain:
    """Pushes a class of ``H_degree(K)`` to a cycle of ``R (x)_G Z[G/K]``."""
    G = K.ambient
    R = G.resolution
    lift = R.lift_from(K)
    out = ModuleChain(R, CosetModule((K,)), degree)
    for (_, cell), coef in K.resolution.cycle_of(coords, degree).items():
        for (g, b), n in lift.image((), cell).items():
            out.terms.add((b, (K.left_coset(G.invert(g))[0],)), coef * n)
    return out


class Shapiro:
    """Coordinates of module chains over ``Z[G/J]`` in the basis of ``H_*(J)``."""

    def __init__(self, J: Subgroup):
        self.subgroup = J
        self.resolution = J.ambient.resolution
        self._restrict = self.resolution.restriction_to(J)
        self._terms = {}

    def term(self, cell: Cell, rep: Word) -> typing.Tuple[int, ...]:
        """Coinvariant vector of ``(rep^-1 cell)`` restricted to ``J``."""
        key = (cell, rep)
        if key not in self._terms:
            G = self.subgroup.ambient
            image = self._restrict.apply(Chain({(G.invert(rep), cell): 1}))
            self._terms[key] = self.subgroup.resolution.coinvariants(image, cell[0])
        return self._terms[key]

    def chain_vector(self, chain: ModuleChain) -> typing.Tuple[int, ...]:
        S = self.subgroup.resolution
        vec = [0] * (S.ranks[chain.degree] if 0 <= chain.degree <= S.length else 0)
        for (cell, (rep,)), coef in chain.terms.items():
            for i, e in enumerate(self.term(cell, rep)):
                vec[i] += coef * e
        return tuple(vec)

    def coordinates(self, chain: ModuleChain) -> typing.Tuple[int, ...]:
        H = self.subgroup.resolution.homology(chain.degree)
        return H.coordinates(self.chain_vector(chain))


def shapiro_for(J: Subgroup) -> Shapiro:
    return J.ambient.resolution.memo(("shapiro", J.key), lambda: Shapiro(J))


def shapiro_backward(
    chain: ModuleChain, J: typing.Optional[Subgroup] = None
) -> typing.Tuple[int, ...]:
    """Reduced coordinates in ``H_degree(J)`` of a cycle over ``Z[G/J]``."""
    subgroups = chain.module.subgroups
    if len(subgroups) != 1 or (J is not None and subgroups[0] != J):
        raise InvalidSpecError(f"Shapiro's map needs a single coset module, got {chain.module!r}.")
    J = subgroups[0]
    return J.resolution.homology(chain.degree).reduce(shapiro_for(J).chain_vector(chain))


def module_homology(chain: ModuleChain):
    """``(group, linear coordinates)`` of a module chain in ``H_*`` of its subgroup or of ``G``."""
    if not chain.module.subgroups:
        R = chain.resolution
        H = R.homology(chain.degree)
        vec = [0] * (R.ranks[chain.degree] if 0 <= chain.degree <= R.length else 0)
        for (cell, _), coef in chain.terms.items():
            vec[cell[1]] += coef
        return H, H.coordinates(vec)
    J = chain.module.subgroups[0]
    return J.resolution.homology(chain.degree), shapiro_for(J).coordinates(chain)


def reduce_chain(chain: ModuleChain) -> typing.Tuple[int, ...]:
    H, coords = module_homology(chain)
    return H.normalize(coords)


def coset_window(G: GroupOracle, module: CosetModule, seeds, radius: int) -> typing.List:
    """Module keys within ``radius`` generator steps of ``seeds``, in discovery order."""
    seen = {}
    frontier = deque()
    for key in [module.identity] + list(seeds):
        if key not in seen:
            seen[key] = 0
            frontier.append(key)
    while frontier:
        key = frontier.popleft()
        if seen[key] >= radius:
            continue
        for x in G.letters:
            nxt = module.act(G, (x,), key)
            if nxt not in seen:
                seen[nxt] = seen[key] + 1
                frontier.append(nxt)
    return list(seen)


def duality_inverse(
    chain: ModuleChain, max_radius: int = 12, start_radius: typing.Optional[int] = None
) -> ModuleCochain:
    """
    A cocycle ``phi`` with ``[z n phi] == [chain]``.

    Unknowns are the values of ``phi`` on cosets in a growing window around the support
    of ``chain``; the first window admitting an integer solution wins.  Each radius only
    adds the unknowns it brings to one echelon system.
    """
    R = chain.resolution
    G = R.group
    M = chain.module
    q = R.length - chain.degree
    if not 0 <= q <= R.length:
        raise InvalidSpecError(f"No dual for a chain of degree {chain.degree}.")
    if not chain:
        return ModuleCochain(R, M, q)
    if len(M.subgroups) > 1:
        raise InvalidSpecError("Duality inverses are taken over a single coset module.")

    H, target = module_homology(chain)
    seeds = sorted({key for (_, key) in chain.terms})
    cap_terms = [
        (b1, G.multiply(G.invert(g1), g2), b2, n)
        for (g1, b1, g2, b2), n in R.diagonal_cell(R.top_cell).items()
        if b2[0] == q
    ]
    shapiro = shapiro_for(M.subgroups[0]) if M.subgroups else None

    system = EchelonLattice()
    for i, d in enumerate(H.torsion):
        system.add(("torsion", i), {("class", H.free_rank + i): d})
    goal = {("class", i): e for i, e in enumerate(target)}
    placed = set()

    if start_radius is None:
        start_radius = G.bounds.initial_window_radius
    radius = 0
    for radius in range(max(1, min(start_radius, max_radius)), max_radius + 1):
        for key in coset_window(G, M, seeds, radius):
            for cell in R.cells(q):
                if (cell, key) in placed:
                    continue
                placed.add((cell, key))
                unit = ModuleCochain(R, M, q, {cell: {key: 1}})
                column = {
                    ("cocycle", c, k): e
                    for c, v in coboundary(unit).values.items()
                    for k, e in v.items()
                }
                coords = _cap_coordinates(R, M, H, cap_terms, cell, key, shapiro)
                column.update((("class", i), e) for i, e in enumerate(coords) if e)
                system.add((cell, key), column)
        logger.debug(
            "Duality window radius %d: %d unknowns, rank %d.", radius, len(placed), len(system)
        )
        weights = system.solve(goal)
        if weights is not None:
            phi = ModuleCochain(R, M, q)
            for label, value in weights.items():
                if label[0] != "torsion":
                    phi.values[label[0]].add(label[1], value)
            if coboundary(phi):
                raise InvariantViolation("Duality inverse returned a non-closed cochain.")
            return phi

    raise WindowExceeded(
        f"No cocycle dual to the degree {chain.degree} class within window radius {max_radius}.",
        bound=max_radius,
        reached=radius,
    )


def _cap_coordinates(R, M, H, cap_terms, cell, key, shapiro):
    G = R.group
    out = ModuleChain(R, M, R.length - cell[0])
    for b1, shift, b2, n in cap_terms:
        if b2 == cell:
            out.terms.add((b1, M.act(G, shift, key)), n)
    if shapiro is None:
        vec = [0] * R.ranks[out.degree]
        for (c, _), coef in out.terms.items():
            vec[c[1]] += coef
        return H.coordinates(vec)
    return shapiro.coordinates(out)
