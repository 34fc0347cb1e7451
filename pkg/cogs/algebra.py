from core.algebra import (
    LAW_NAMES,
    LAWS,
    check_axioms,
    class_to_dict,
    element_to_dict,
    lg_basis,
    multiply,
    parse_element,
    product_table,
)
from core.models import InvalidSpecError, getLogger

logger = getLogger(__name__)


class Algebra:
    """Commands for the string product and its laws."""

    def __init__(self, app):
        self.app = app

    def register(self, app):
        parser = app.add_command("product", self.product, "string product of two classes")
        parser.add_argument("--x", required=True, help="label@degree:c1,c2, JSON, or @file")
        parser.add_argument("--y", required=True, help="label@degree:c1,c2, JSON, or @file")

        parser = app.add_command("axioms", self.axioms, "check unit, commutativity and friends")
        self._sample_arguments(parser)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--max-triples", type=int, default=60)

        parser = app.add_command("table", self.table, "multiplication table of basis classes")
        self._sample_arguments(parser)

    @staticmethod
    def _sample_arguments(parser):
        parser.add_argument("--max-label-length", type=int, default=1)
        parser.add_argument("--labels", help="comma separated label words instead of a ball")
        parser.add_argument("--degrees", help="comma separated degrees, default all")

    def _sample(self, args):
        G = self.app.group
        if args.max_label_length < 0:
            raise InvalidSpecError("--max-label-length must be non-negative.")
        labels = degrees = None
        if args.labels:
            labels = [G.parse(w) for w in args.labels.split(",")]
        if args.degrees:
            try:
                degrees = [int(d) for d in args.degrees.split(",")]
            except ValueError:
                raise InvalidSpecError(f'Cannot decipher the degrees "{args.degrees}".')
        return lg_basis(G, args.max_label_length, labels=labels, degrees=degrees)

    def product(self, args):
        G = self.app.group
        x, y = parse_element(G, args.x), parse_element(G, args.y)
        result = multiply(G, x, y, self.app.max_window(args), jobs=args.jobs)
        data = {
            "group": G.name,
            "x": element_to_dict(G, x),
            "y": element_to_dict(G, y),
            "terms": element_to_dict(G, result),
        }
        lines = [f"({x.format(G)}) * ({y.format(G)})", f"= {result.format(G)}"]
        self.app.emit(args, lines, data)

    def axioms(self, args):
        G = self.app.group
        classes = self._sample(args)
        logger.info("Checking the laws on %d classes of %s.", len(classes), G.name)
        triple_classes = None
        if args.max_label_length > 1 and not args.labels:
            triple_classes = [c for c in classes if len(c.label) <= 1]
        report = check_axioms(
            G,
            classes,
            seed=args.seed,
            max_window=self.app.max_window(args),
            max_triples=args.max_triples,
            triple_classes=triple_classes,
            jobs=args.jobs,
        )
        data = report.to_dict()
        data["classes"] = len(classes)
        lines = [f"{G.name}: {len(classes)} basis classes"]
        for law in LAWS:
            counts = report.counts[law]
            if not any(counts.values()):
                continue
            lines.append(
                f"{law} {LAW_NAMES[law]:<28} pass {counts['pass']:>4}  "
                f"fail {counts['fail']:>4}  inconclusive {counts['inconclusive']:>4}"
            )
        lines += [f"FAIL {f}" for f in report.failures]
        lines += [f"INCONCLUSIVE {f}" for f in report.inconclusive]
        self.app.emit(args, lines, data)
        return report.exit_code

    def table(self, args):
        G = self.app.group
        classes = self._sample(args)
        rows = product_table(G, classes, self.app.max_window(args), jobs=args.jobs)
        data = {
            "group": G.name,
            "rows": [
                {
                    "x": class_to_dict(G, x),
                    "y": class_to_dict(G, y),
                    "terms": element_to_dict(G, r),
                }
                for x, y, r in rows
            ],
        }
        lines = [f"{x.format(G)} * {y.format(G)} = {r.format(G)}" for x, y, r in rows]
        self.app.emit(args, lines, data)


def setup(app):
    app.add_cog(Algebra(app))
