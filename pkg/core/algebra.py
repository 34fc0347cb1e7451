"""
The string algebra ``L_G = sum over conjugacy classes [g] of H_(*+n)(C_g)``.

Classes are :class:`LGClass` values; products run the intersection pairing on the
centralizers, split it over double cosets and push each summand into the centralizer of
the conjugacy class it lands in.
"""

import itertools
import json
import random
import typing
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from core.builtin_groups import intersect_centralizers
from core.duality import (
    CosetModule,
    ModuleChain,
    ModuleCochain,
    cap_with_z,
    cup,
    duality_inverse,
    reduce_chain,
    shapiro_backward,
    shapiro_forward,
)
from core.groups import DoubleCosetKey, GroupOracle, Subgroup, split_double_coset
from core.models import (
    ExitCode,
    InvalidSpecError,
    InvariantViolation,
    PDStringError,
    getLogger,
)
from core.resolution import TwistedPush
from core.utils import Word, shortlex_key

logger = getLogger(__name__)


@dataclass(frozen=True)
class HomologyClass:
    """A class of ``H_degree(subgroup)`` in the basis of the subgroup's own resolution."""

    subgroup: Subgroup
    degree: int
    coords: typing.Tuple[int, ...]

    def __bool__(self):
        return any(self.coords)


@dataclass(frozen=True)
class LGClass:
    """``coords`` in ``H_(degree+n)(C_label)``; ``label`` is a canonical conjugacy label."""

    label: Word
    degree: int
    coords: typing.Tuple[int, ...]

    @property
    def sort_key(self):
        return shortlex_key(self.label), self.degree, self.coords

    def format(self, G: GroupOracle) -> str:
        return f"{G.format(self.label)}@{self.degree}:" + ",".join(map(str, self.coords))


class LGElement:
    """A finite sum of classes with distinct ``(label, degree)``."""

    def __init__(self, terms: typing.Iterable[LGClass] = ()):
        self._terms = {}
        for term in terms:
            self.add(term)

    def add(self, term: LGClass, scale: int = 1) -> "LGElement":
        key = (term.label, term.degree)
        old = self._terms.get(key)
        coords = tuple(scale * c for c in term.coords)
        if old is not None:
            if len(old) != len(coords):
                raise InvariantViolation(f"Coordinate lengths differ at label {term.label}.")
            coords = tuple(a + b for a, b in zip(old, coords))
        if any(coords):
            self._terms[key] = coords
        else:
            self._terms.pop(key, None)
        return self

    def merge(self, other: "LGElement", scale: int = 1) -> "LGElement":
        for term in other.terms:
            self.add(term, scale)
        return self

    def scaled(self, scale: int) -> "LGElement":
        return LGElement().merge(self, scale)

    def __add__(self, other):
        return LGElement().merge(self).merge(other)

    def __neg__(self):
        return self.scaled(-1)

    def __eq__(self, other):
        if isinstance(other, LGClass):
            other = LGElement([other])
        if not isinstance(other, LGElement):
            return NotImplemented
        return self._terms == other._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        return f"LGElement({self.terms!r})"

    @property
    def terms(self) -> typing.List[LGClass]:
        items = [LGClass(label, degree, coords) for (label, degree), coords in self._terms.items()]
        return sorted(items, key=lambda t: t.sort_key)

    def format(self, G: GroupOracle) -> str:
        if not self._terms:
            return "0"
        return " + ".join(t.format(G) for t in self.terms)


def _subgroup_homology(J: Subgroup, degree: int):
    return J.resolution.homology(degree)


def _check_coords(J: Subgroup, degree: int, coords) -> typing.Tuple[int, ...]:
    H = _subgroup_homology(J, degree)
    coords = tuple(int(c) for c in coords)
    if len(coords) != H.rank:
        raise InvalidSpecError(
            f"H_{degree}({J.name}) has rank {H.rank}, got {len(coords)} coordinates."
        )
    return H.normalize(coords)


def lg_class(G: GroupOracle, label: Word, degree: int, coords) -> LGClass:
    """
    The class with ``coords`` in ``H_(degree+n)(C_label)``, moved to the canonical label.

    For a non-canonical ``label`` the coordinates refer to the centralizer of ``label`` itself
    and are transported along the conjugation onto the canonical label.
    """
    n = G.dimension
    if not -n <= degree <= 0:
        raise InvalidSpecError(f"Degrees of {G.name} classes lie in [{-n}, 0], got {degree}.")
    label = G.normal_form(label)
    C = G.centralizer_of(label)
    coords = _check_coords(C, degree + n, coords)
    canonical, w = G.conjugacy_label(label)
    if canonical == label:
        return LGClass(label, degree, coords)
    target = G.centralizer_of(canonical)
    moved = j_push(HomologyClass(C, degree + n, coords), target, w)
    return LGClass(canonical, degree, moved)


def unit_element(G: GroupOracle) -> LGClass:
    R = G.resolution
    n = G.dimension
    coords = R.homology(n).reduce(R.coinvariants(R.fundamental_cycle, n))
    return LGClass((), 0, coords)


Perturbation = typing.Callable[[Word], typing.Tuple[Word, Word]]


def psi_decompose(
    chain: ModuleChain, perturb: typing.Optional[Perturbation] = None
) -> typing.Dict[DoubleCosetKey, ModuleChain]:
    """
    Splits a chain over ``Z[G/K] (x) Z[G/H]`` into chains over ``Z[G/(K n gHg^-1)]``.

    ``g1 K (x) g2 H`` goes to the key of ``K g1^-1 g2 H``, with coefficient ``a (K n gHg^-1)``
    where ``g1^-1 g2 = k g h`` and ``a = g1 k``.  ``perturb`` maps a canonical ``g`` to
    ``(k1, h1)`` to use the representative ``k1 g h1`` instead.
    """
    K, H = chain.module.subgroups
    R = chain.resolution
    G = R.group
    chosen = {}
    out = {}
    for (cell, (c1, c2)), coef in sorted(chain.terms.items()):
        d = G.multiply(G.invert(c1), c2)
        rep, k, _ = split_double_coset(d, K, H)
        if rep not in chosen:
            k1, h1 = perturb(rep) if perturb is not None else ((), ())
            g = G.multiply(k1, rep, h1)
            J = intersect_centralizers(K, H.conjugate(g))
            chosen[rep] = (g, G.invert(k1), J)
        g, k1_inv, J = chosen[rep]
        a = G.multiply(c1, k, k1_inv)
        key = DoubleCosetKey(K.key, H.key, g)
        if key not in out:
            out[key] = ModuleChain(R, CosetModule((J,)), chain.degree)
        out[key].terms.add((cell, (J.left_coset(a)[0],)), coef)
    return {key: part for key, part in sorted(out.items()) if part}


def dual_cocycle(cls: HomologyClass, max_window: int):
    """``D^-1`` of the Shapiro image of ``cls``, memoized per resolution."""
    R = cls.subgroup.ambient.resolution
    key = ("dual", cls.subgroup.key, cls.degree, cls.coords, max_window)

    def build():
        values = R.restored(key)
        if values is not None:
            module = CosetModule((cls.subgroup,))
            return ModuleCochain(R, module, R.length - cls.degree, values)
        chain = shapiro_forward(cls.subgroup, cls.degree, cls.coords)
        return duality_inverse(chain, max_window)

    return R.memo(key, build)


def intersection_pair(
    x: HomologyClass, y: HomologyClass, max_window: int = 12, perturb=None
) -> typing.Dict[DoubleCosetKey, HomologyClass]:
    """The intersection product of ``x`` in ``H_i(K)`` and ``y`` in ``H_j(H)``."""
    K, H = x.subgroup, y.subgroup
    G = K.ambient
    n = G.dimension
    degree = x.degree + y.degree - n
    if degree < 0 or not x or not y:
        return {}
    phi = dual_cocycle(x, max_window)
    psi = dual_cocycle(y, max_window)
    capped = cap_with_z(cup(phi, psi))
    out = {}
    for key, part in psi_decompose(capped, perturb).items():
        J = part.module.subgroups[0]
        coords = shapiro_backward(part)
        if any(coords):
            out[key] = HomologyClass(J, degree, coords)
    logger.debug(
        "Intersection of degrees %d and %d in %s: %d summands.",
        x.degree,
        y.degree,
        G.name,
        len(out),
    )
    return out


def global_intersection_oracle(
    G: GroupOracle, i: int, x_coords, j: int, y_coords, max_window: int = 12
) -> typing.Tuple[int, ...]:
    """``D(D^-1 x u D^-1 y)`` in ``H_(i+j-n)(G)`` with trivial coefficients throughout."""
    R = G.resolution
    n = G.dimension
    degree = i + j - n
    if degree < 0:
        return ()
    duals = []
    for k, coords in ((i, x_coords), (j, y_coords)):
        vec = R.homology(k).combine(_check_coords(G.whole(), k, coords))
        terms = {((k, c), ()): e for c, e in enumerate(vec) if e}
        chain = ModuleChain(R, CosetModule(), k, terms)
        duals.append(duality_inverse(chain, max_window))
    return reduce_chain(cap_with_z(cup(*duals)))


def j_push(cls: HomologyClass, target: Subgroup, w: Word = ()) -> typing.Tuple[int, ...]:
    """Pushes ``cls`` along ``J -> target``, ``j -> w j w^-1``."""
    J = cls.subgroup
    G = J.ambient
    w = G.normal_form(w)
    if J == target and not w:
        return cls.coords
    push = G.resolution.memo(("push", J.key, target.key, w), lambda: TwistedPush(J, target, w))
    chain = J.resolution.cycle_of(cls.coords, cls.degree)
    image = push.apply(chain)
    S = target.resolution
    return S.homology(cls.degree).reduce(S.coinvariants(image, cls.degree))


@dataclass
class ProductTrace:
    """Per double coset key: the representative, ``alpha g beta g^-1`` and its label."""

    rows: typing.List[typing.Tuple[Word, Word, Word]] = field(default_factory=list)


def string_product(
    G: GroupOracle,
    x: LGClass,
    y: LGClass,
    max_window: int = 12,
    perturb=None,
    trace: typing.Optional[ProductTrace] = None,
) -> LGElement:
    n = G.dimension
    out = LGElement()
    if x.degree + y.degree < -n:
        return out
    K = G.centralizer_of(x.label)
    H = G.centralizer_of(y.label)
    pairs = intersection_pair(
        HomologyClass(K, x.degree + n, x.coords),
        HomologyClass(H, y.degree + n, y.coords),
        max_window,
        perturb,
    )
    for key, cls in pairs.items():
        g = key.rep
        gamma = G.multiply(x.label, g, y.label, G.invert(g))
        label, w = G.conjugacy_label(gamma)
        if trace is not None:
            trace.rows.append((g, gamma, label))
        coords = j_push(cls, G.centralizer_of(label), w)
        out.add(LGClass(label, x.degree + y.degree, coords))
    return out


def multiply(G: GroupOracle, x: LGElement, y: LGElement, max_window: int = 12, jobs: int = 1):
    """Bilinear extension of :func:`string_product`; summands may run in parallel."""
    pairs = [(a, b) for a in x.terms for b in y.terms]
    if jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda ab: string_product(G, ab[0], ab[1], max_window), pairs))
    else:
        parts = [string_product(G, a, b, max_window) for a, b in pairs]
    out = LGElement()
    for part in parts:
        out.merge(part)
    return out


def abelian_oracle(G: GroupOracle, x: LGClass, y: LGClass, max_window: int = 12) -> LGElement:
    """The product on an abelian group from the global intersection form and label addition."""
    if not G.is_abelian:
        raise InvalidSpecError(f"The abelian oracle does not apply to {G.name}.")
    n = G.dimension
    if x.degree + y.degree < -n:
        return LGElement()
    coords = global_intersection_oracle(
        G, x.degree + n, x.coords, y.degree + n, y.coords, max_window
    )
    return LGElement([LGClass(G.multiply(x.label, y.label), x.degree + y.degree, coords)])


def conjugacy_labels(G: GroupOracle, max_length: int) -> typing.List[Word]:
    labels = {G.conjugacy_label(g)[0] for g in G.enumerate_ball(max_length)}
    return sorted(labels, key=shortlex_key)


def lg_basis(
    G: GroupOracle, max_label_length: int = 2, labels=None, degrees=None
) -> typing.List[LGClass]:
    """
    Basis classes of the summands with the given labels, or with every conjugacy label of
    length at most ``max_label_length``; ``degrees`` restricts the grading.
    """
    n = G.dimension
    out = []
    if labels is None:
        labels = conjugacy_labels(G, max_label_length)
    else:
        labels = sorted({G.conjugacy_label(g)[0] for g in labels}, key=shortlex_key)
    for label in labels:
        C = G.centralizer_of(label)
        for degree in range(-n, 1) if degrees is None else sorted(set(degrees)):
            if not -n <= degree <= 0:
                raise InvalidSpecError(f"Degrees of {G.name} classes lie in [{-n}, 0].")
            H = _subgroup_homology(C, degree + n)
            for i in range(H.rank):
                coords = tuple(int(i == j) for j in range(H.rank))
                out.append(LGClass(label, degree, coords))
    return out


LAWS = ("U", "C", "A", "O", "R", "T")

LAW_NAMES = {
    "U": "unit",
    "C": "graded commutativity",
    "A": "associativity",
    "O": "abelian oracle",
    "R": "representative independence",
    "T": "involution",
}


@dataclass
class AxiomReport:
    group: str
    counts: typing.Dict[str, typing.Dict[str, int]] = field(
        default_factory=lambda: {law: {"pass": 0, "fail": 0, "inconclusive": 0} for law in LAWS}
    )
    failures: typing.List[str] = field(default_factory=list)
    inconclusive: typing.List[str] = field(default_factory=list)

    def record(self, law: str, outcome: str, detail: str = "") -> None:
        self.counts[law][outcome] += 1
        if outcome == "fail":
            self.failures.append(f"{law}: {detail}")
        elif outcome == "inconclusive":
            self.inconclusive.append(f"{law}: {detail}")

    @property
    def exit_code(self) -> ExitCode:
        if self.failures:
            return ExitCode.LAW_FAILURE
        if self.inconclusive:
            return ExitCode.INCONCLUSIVE
        return ExitCode.OK

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "laws": {law: dict(self.counts[law]) for law in LAWS},
            "failures": list(self.failures),
            "inconclusive": list(self.inconclusive),
            "exit_code": int(self.exit_code),
        }


class _Products:
    """Memoized products for one axiom run."""

    def __init__(self, G, max_window):
        self.G = G
        self.max_window = max_window
        self._cache = {}

    def __call__(self, x: LGClass, y: LGClass) -> LGElement:
        key = (x, y)
        if key not in self._cache:
            trace = ProductTrace()
            self._cache[key] = (string_product(self.G, x, y, self.max_window, trace=trace), trace)
        return self._cache[key][0]

    def trace(self, x, y) -> ProductTrace:
        self(x, y)
        return self._cache[(x, y)][1]

    def times(self, x: LGElement, y: LGClass) -> LGElement:
        out = LGElement()
        for term in x.terms:
            out.merge(self(term, y))
        return out

    def times_left(self, x: LGClass, y: LGElement) -> LGElement:
        out = LGElement()
        for term in y.terms:
            out.merge(self(x, term))
        return out


def random_perturbation(G: GroupOracle, K: Subgroup, H: Subgroup, seed: int):
    """Replaces a canonical double coset representative ``g`` by ``k1 g h1``, seeded per ``g``."""

    def element(J: Subgroup, rng):
        if J.kind == "trivial":
            return ()
        if J.kind == "whole":
            return G.normal_form(tuple(rng.choice(G.letters) for _ in range(rng.randint(1, 2))))
        gens = J.oracle.letters
        return J.include(tuple(rng.choice(gens) for _ in range(rng.randint(1, 2))))

    def perturb(g: Word):
        rng = random.Random(f"{seed}:{g}")
        return element(K, rng), element(H, rng)

    return perturb


def check_axioms(
    G: GroupOracle,
    classes: typing.Sequence[LGClass],
    seed: int = 0,
    max_window: int = 12,
    max_triples: int = 60,
    triple_classes: typing.Optional[typing.Sequence[LGClass]] = None,
    jobs: int = 1,
) -> AxiomReport:
    report = AxiomReport(G.name)
    product = _Products(G, max_window)
    rng = random.Random(seed)
    unit = unit_element(G)
    classes = sorted(set(classes), key=lambda c: c.sort_key)
    pairs = [(x, y) for x in classes for y in classes]

    if jobs > 1:
        # warm the memo concurrently; the laws below read it in a fixed order
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda xy: _safely(product, *xy), pairs))

    def run(law, detail, check):
        try:
            ok = check()
        except PDStringError as e:
            logger.warning("%s check on %s was inconclusive: %s", LAW_NAMES[law], detail, e.msg)
            report.record(law, "inconclusive", f"{detail}: {e.msg}")
            return
        report.record(law, "pass" if ok else "fail", detail)

    fmt = lambda c: c.format(G)  # noqa: E731

    def stage(law):
        logger.line("debug")
        logger.debug("Checking %s on %d classes.", LAW_NAMES[law], len(classes))

    stage("U")
    for x in classes:
        run("U", fmt(x), lambda: product(unit, x) == x and product(x, unit) == x)

    stage("C")
    for x, y in pairs:
        sign = -1 if (x.degree * y.degree) % 2 else 1
        run("C", f"{fmt(x)} * {fmt(y)}", lambda: product(x, y) == product(y, x).scaled(sign))

    stage("A")
    pool = list(triple_classes if triple_classes is not None else classes)
    triples = list(itertools.product(pool, repeat=3))
    if len(triples) > max_triples:
        triples = rng.sample(triples, max_triples)
    for x, y, w in triples:
        run(
            "A",
            f"({fmt(x)}, {fmt(y)}, {fmt(w)})",
            lambda: product.times(product(x, y), w) == product.times_left(x, product(y, w)),
        )

    if G.is_abelian:
        stage("O")
        for x, y in pairs:
            run(
                "O",
                f"{fmt(x)} * {fmt(y)}",
                lambda: product(x, y) == abelian_oracle(G, x, y, max_window),
            )

    stage("R")
    for x, y in pairs:
        K, H = G.centralizer_of(x.label), G.centralizer_of(y.label)
        perturb = random_perturbation(G, K, H, seed)
        run(
            "R",
            f"{fmt(x)} * {fmt(y)}",
            lambda: string_product(G, x, y, max_window, perturb=perturb) == product(x, y),
        )

    stage("T")
    for x, y in pairs:
        run("T", f"{fmt(x)} * {fmt(y)}", lambda: _involution_holds(G, product, x, y))

    logger.info("Axiom run on %s: %s", G.name, report.counts)
    return report


def _safely(product, x, y):
    try:
        product(x, y)
    except PDStringError:
        pass


def _involution_holds(G: GroupOracle, product: _Products, x: LGClass, y: LGClass) -> bool:
    """
    Swapping the factors sends the key ``g`` to ``g^-1`` and ``alpha g beta g^-1`` to its
    conjugate ``beta g^-1 alpha g`` by ``(alpha g)^-1``, with conjugate centralizers.
    """
    forward = product.trace(x, y).rows
    backward = {label for _, _, label in product.trace(y, x).rows}
    for g, gamma, label in forward:
        swapped = G.multiply(y.label, G.invert(g), x.label, g)
        w = G.invert(G.multiply(x.label, g))
        if G.conjugate(w, gamma) != swapped:
            return False
        if G.conjugacy_label(swapped)[0] != label or label not in backward:
            return False
        C, C_swapped = G.centralizer_of(gamma), G.centralizer_of(swapped)
        if not all(C_swapped.contains(G.conjugate(w, gen)) for gen in C.generators):
            return False
    return True


def product_table(
    G: GroupOracle, classes: typing.Sequence[LGClass], max_window: int = 12, jobs: int = 1
):
    """Rows ``(x, y, x * y)`` over all ordered pairs of ``classes``."""
    pairs = [(x, y) for x in classes for y in classes]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda xy: string_product(G, xy[0], xy[1], max_window), pairs))
    else:
        results = [string_product(G, x, y, max_window) for x, y in pairs]
    return [(x, y, r) for (x, y), r in zip(pairs, results)]


def class_to_dict(G: GroupOracle, cls: LGClass) -> dict:
    return {"label": G.format(cls.label), "degree": cls.degree, "coeffs": list(cls.coords)}


def element_to_dict(G: GroupOracle, element: LGElement) -> typing.List[dict]:
    return [class_to_dict(G, term) for term in element.terms]


def _class_from_dict(G: GroupOracle, data) -> LGClass:
    if not isinstance(data, dict) or set(data) - {"label", "degree", "coeffs"}:
        raise InvalidSpecError('A class is {"label": ..., "degree": ..., "coeffs": [...]}.')
    try:
        label = G.parse(str(data.get("label", "1")))
        degree = int(data["degree"])
        coeffs = [int(c) for c in data["coeffs"]]
    except (KeyError, TypeError, ValueError):
        raise InvalidSpecError(f"Cannot decipher the class {json.dumps(data, sort_keys=True)}.")
    return lg_class(G, label, degree, coeffs)


def parse_element(G: GroupOracle, text: str) -> LGElement:
    """
    Reads ``label@degree:c1,c2,...``, a JSON class, a JSON list of classes or a product
    report with ``terms``; ``@path`` reads the text from a file.
    """
    text = text.strip()
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as f:
                text = f.read().strip()
        except OSError as e:
            raise InvalidSpecError(f"Cannot read class file {text[1:]}: {e.strerror}.")

    if text[:1] in "{[":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidSpecError(f"Invalid JSON class spec: {e.msg}.")
        if isinstance(data, dict) and "terms" in data:
            data = data["terms"]
        items = data if isinstance(data, list) else [data]
        return LGElement(_class_from_dict(G, item) for item in items)

    label, sep, rest = text.rpartition("@")
    degree, sep2, coeffs = rest.partition(":")
    if not sep or not sep2:
        raise InvalidSpecError(f'Class specs look like "label@degree:c1,c2", got "{text}".')
    try:
        degree = int(degree)
        coords = [int(c) for c in coeffs.split(",") if c.strip()]
    except ValueError:
        raise InvalidSpecError(f'Cannot decipher the class spec "{text}".')
    return LGElement([lg_class(G, G.parse(label), degree, coords)])
