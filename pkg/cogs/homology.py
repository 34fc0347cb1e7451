from core.algebra import (
    HomologyClass,
    dual_cocycle,
    intersection_pair,
    parse_element,
    psi_decompose,
)
from core.duality import cap_with_z, cup, shapiro_backward
from core.groups import subgroup_of
from core.models import InvalidSpecError, getLogger

logger = getLogger(__name__)


class Homology:
    """Commands exposing subgroup homology bases and the double coset splitting."""

    def __init__(self, app):
        self.app = app

    def register(self, app):
        parser = app.add_command(
            "homology", self.homology, "free rank, torsion and named basis of H_k"
        )
        where = parser.add_mutually_exclusive_group()
        where.add_argument("--subgroup", help="word whose centralizer is used")
        where.add_argument("--whole", action="store_true", help="use the whole group (default)")
        parser.add_argument("--degree", type=int, required=True)

        parser = app.add_command(
            "double-cosets",
            self.double_cosets,
            "dualize both classes, take z cap (phi cup psi) and split it over double cosets",
        )
        parser.add_argument("--x", required=True, help="class spec, label@degree:c1,c2")
        parser.add_argument("--y", required=True, help="class spec, label@degree:c1,c2")

        parser = app.add_command(
            "intersect",
            self.intersect,
            "intersection pairing of classes of two subgroups, split over double cosets",
        )
        parser.add_argument("--left", default="G", help='generators separated by ";", or G or 1')
        parser.add_argument("--right", default="G", help='generators separated by ";", or G or 1')
        parser.add_argument("--x", required=True, help="degree:c1,c2 in the left subgroup")
        parser.add_argument("--y", required=True, help="degree:c1,c2 in the right subgroup")

    def homology(self, args):
        G = self.app.group
        if args.degree < 0:
            raise InvalidSpecError(f"Homology degrees are non-negative, got {args.degree}.")
        if args.subgroup is not None:
            word = G.parse(args.subgroup)
            J = G.centralizer_of(word)
            where = f"C({G.format(word)}) = {J.name}"
        else:
            J = G.whole()
            where = G.name
        R = J.resolution
        H = R.homology(args.degree)
        names = R.basis_names(args.degree)
        data = {
            "group": G.name,
            "subgroup": J.name,
            "degree": args.degree,
            "rank": H.rank,
            "free_rank": H.free_rank,
            "torsion": list(H.torsion),
            "basis": names,
        }
        lines = [
            f"H_{args.degree}({where}) = {H!r}",
            f"rank: {H.rank}",
            "basis: " + (" ".join(names) if names else "(empty)"),
        ]
        self.app.emit(args, lines, data)

    def double_cosets(self, args):
        G = self.app.group
        n = G.dimension
        x, y = parse_element(G, args.x), parse_element(G, args.y)
        if len(x) != 1 or len(y) != 1:
            raise InvalidSpecError("double-cosets takes single classes.")
        (x,), (y,) = x.terms, y.terms
        max_window = self.app.max_window(args)
        K, H = G.centralizer_of(x.label), G.centralizer_of(y.label)
        phi = dual_cocycle(HomologyClass(K, x.degree + n, x.coords), max_window)
        psi = dual_cocycle(HomologyClass(H, y.degree + n, y.coords), max_window)
        parts = psi_decompose(cap_with_z(cup(phi, psi)))

        rows, lines = [], []
        for key, part in parts.items():
            J = part.module.subgroups[0]
            coords = shapiro_backward(part)
            rows.append(
                {
                    "rep": G.format(key.rep),
                    "intersection": J.name,
                    "terms": len(part.terms),
                    "coords": list(coords),
                }
            )
            lines.append(
                f"{G.format(key.rep)}: {len(part.terms)} terms over Z[G/{J.name}], "
                f"class {list(coords)}"
            )
        if not lines:
            lines.append("0")
        data = {"group": G.name, "x": args.x, "y": args.y, "keys": rows}
        self.app.emit(args, lines, data)

    def intersect(self, args):
        G = self.app.group
        K, H = parse_subgroup(G, args.left), parse_subgroup(G, args.right)
        x = _homology_class(K, args.x)
        y = _homology_class(H, args.y)
        pairs = intersection_pair(x, y, self.app.max_window(args))
        rows, lines = [], []
        for key, cls in pairs.items():
            names = cls.subgroup.resolution.basis_names(cls.degree)
            rows.append(
                {
                    "rep": G.format(key.rep),
                    "intersection": cls.subgroup.name,
                    "degree": cls.degree,
                    "coords": list(cls.coords),
                    "basis": names,
                }
            )
            lines.append(
                f"{G.format(key.rep)}: H_{cls.degree}({cls.subgroup.name}) "
                f"{list(cls.coords)} in {' '.join(names)}"
            )
        if not lines:
            lines.append("0")
        data = {"group": G.name, "left": K.name, "right": H.name, "keys": rows}
        self.app.emit(args, lines, data)


def parse_subgroup(G, text: str):
    """``G``, ``1`` or generator words separated by ``;``."""
    text = text.strip()
    if text in {"G", "whole"}:
        return G.whole()
    words = [G.parse(w) for w in text.split(";") if w.strip()]
    if not G.is_abelian:
        if len(words) != 1:
            raise InvalidSpecError(f"{G.name} subgroups here are cyclic, give one generator.")
        if words[0] and G.root(words[0])[1] != 1:
            raise InvalidSpecError(f"{G.format(words[0])} is a proper power; give its root.")
    return subgroup_of(G, words)


def _homology_class(J, text: str) -> HomologyClass:
    degree, sep, coeffs = text.partition(":")
    try:
        degree = int(degree)
        coords = tuple(int(c) for c in coeffs.split(",") if c.strip())
    except ValueError:
        raise InvalidSpecError(f'Subgroup classes look like "degree:c1,c2", got "{text}".')
    if not sep:
        raise InvalidSpecError(f'Subgroup classes look like "degree:c1,c2", got "{text}".')
    H = J.resolution.homology(degree)
    if degree < 0 or len(coords) != H.rank:
        raise InvalidSpecError(f"H_{degree}({J.name}) has rank {H.rank}, got {len(coords)}.")
    return HomologyClass(J, degree, H.normalize(coords))


def setup(app):
    app.add_cog(Homology(app))
