import json
import random

import pytest

from core.algebra import (
    AxiomReport,
    HomologyClass,
    LGClass,
    LGElement,
    abelian_oracle,
    check_axioms,
    conjugacy_labels,
    element_to_dict,
    global_intersection_oracle,
    intersection_pair,
    lg_basis,
    lg_class,
    multiply,
    parse_element,
    product_table,
    psi_decompose,
    random_perturbation,
    string_product,
    unit_element,
)
from core.builtin_groups import GroupSpec, make_group
from core.duality import CosetModule, ModuleChain
from core.groups import DoubleCosetKey, subgroup_of
from core.models import ExitCode, InvalidSpecError


def one(G, text):
    (term,) = parse_element(G, text).terms
    return term


def test_lg_element_arithmetic():
    x = LGClass((1,), 0, (1,))
    y = LGClass((1,), 0, (-1,))
    assert not LGElement([x, y])
    assert LGElement([x]) == x
    assert len(LGElement([x, LGClass((), 0, (2,))])) == 2
    assert -LGElement([x]) == y
    assert (LGElement([x]) + LGElement([x])).terms == [LGClass((1,), 0, (2,))]
    assert LGElement().format(None) == "0"


def test_circle_unit(circle):
    assert unit_element(circle) == LGClass((), 0, (1,))
    assert one(circle, "1@0:1") == unit_element(circle)


def test_circle_product_table(circle):
    G = circle
    t0 = one(G, "t@0:1")
    t1 = one(G, "t@-1:1")
    assert string_product(G, t0, t0) == LGClass((1, 1), 0, (1,))
    assert string_product(G, t0, t1) == LGClass((1, 1), -1, (1,))
    assert string_product(G, t1, t0) == LGClass((1, 1), -1, (1,))
    assert not string_product(G, t1, t1)
    assert string_product(G, one(G, "t^-1@0:1"), t0) == unit_element(G)
    assert string_product(G, one(G, "t^2@0:3"), one(G, "t^-1@-1:2")) == LGClass((1,), -1, (6,))


def test_torus_intersection_form(torus):
    G = torus
    xy = global_intersection_oracle(G, 1, (1, 0), 1, (0, 1))
    assert xy in {(1,), (-1,)}
    assert global_intersection_oracle(G, 1, (0, 1), 1, (1, 0)) == (-xy[0],)
    assert global_intersection_oracle(G, 1, (1, 0), 1, (1, 0)) == (0,)
    assert global_intersection_oracle(G, 2, (1,), 1, (1, 0)) == (1, 0)
    assert global_intersection_oracle(G, 0, (1,), 1, (1, 0)) == ()


def test_torus_products(torus):
    G = torus
    x = one(G, "e1@-1:1,0")
    y = one(G, "e2@-1:0,1")
    product = string_product(G, x, y)
    (term,) = product.terms
    assert (term.label, term.degree) == ((1, 2), -2)
    assert term.coords in {(1,), (-1,)}
    assert string_product(G, y, x) == -product
    assert product == abelian_oracle(G, x, y)


def test_abelian_oracle_agrees(torus):
    G = torus
    classes = lg_basis(G, labels=[(), (1,)])
    for x in classes:
        for y in classes:
            assert string_product(G, x, y) == abelian_oracle(G, x, y)


def test_abelian_oracle_needs_an_abelian_group(genus2):
    x = LGClass((), 0, (1,))
    with pytest.raises(InvalidSpecError):
        abelian_oracle(genus2, x, x)


def test_psi_decompose_on_a_lattice(torus):
    G = torus
    R = G.resolution
    K = subgroup_of(G, [G.parse("(1,0)")])
    chain = ModuleChain(R, CosetModule((K, K)), 0, {((0, 0), ((2,), (2, 2, 2))): 1})
    parts = psi_decompose(chain)
    key = DoubleCosetKey(K.key, K.key, G.parse("(0,2)"))
    assert list(parts) == [key]
    assert parts[key].module == CosetModule((K,))
    assert dict(parts[key].terms) == {((0, 0), ((2,),)): 1}

    perturbed = psi_decompose(chain, perturb=lambda g: (G.parse("(1,0)"), ()))
    (moved,) = perturbed
    assert moved.rep == G.parse("(1,2)")
    assert dict(perturbed[moved].terms) == {((0, 0), ((2,),)): 1}


def test_psi_decompose_on_a_surface(genus2):
    G = genus2
    K = G.centralizer_of(G.parse("a1"))
    H = G.centralizer_of(G.parse("b1"))
    chain = ModuleChain(G.resolution, CosetModule((K, H)), 0, {((0, 0), ((), ())): 1})
    parts = psi_decompose(chain)
    (key,) = parts
    assert key == DoubleCosetKey(K.key, H.key, ())
    assert parts[key].module.subgroups[0].kind == "trivial"
    assert dict(parts[key].terms) == {((0, 0), ((),)): 1}


def test_lg_class_validation(torus):
    assert lg_class(torus, (1,), -1, (1, 0)) == LGClass((1,), -1, (1, 0))
    with pytest.raises(InvalidSpecError):
        lg_class(torus, (1,), 1, (1,))
    with pytest.raises(InvalidSpecError):
        lg_class(torus, (1,), -1, (1,))


def test_lg_class_moves_to_the_canonical_label(genus2):
    G = genus2
    cls = lg_class(G, G.parse("b1*a1"), -1, (1,))
    assert cls == LGClass(G.parse("a1*b1"), -1, (1,))


def test_lg_basis(circle, genus2):
    classes = lg_basis(circle, labels=[(-1,), (), (1,)])
    assert len(classes) == 6
    assert classes[0] == LGClass((), -1, (1,))
    assert len(lg_basis(genus2, 0)) == 6
    assert len(lg_basis(genus2, 0, degrees=[-1])) == 4
    assert len(conjugacy_labels(genus2, 1)) == 9
    with pytest.raises(InvalidSpecError):
        lg_basis(circle, 0, degrees=[1])


def test_multiply_is_bilinear(circle):
    G = circle
    x = parse_element(G, "t@0:1") + parse_element(G, "t^2@-1:1")
    y = parse_element(G, "t^-1@0:2")
    expected = LGElement([LGClass((), 0, (2,)), LGClass((1,), -1, (2,))])
    assert multiply(G, x, y) == expected
    assert multiply(G, x, y, jobs=2) == expected


def test_product_table(circle):
    classes = lg_basis(circle, labels=[(), (1,)])
    rows = product_table(circle, classes)
    assert len(rows) == 16
    assert all(r == string_product(circle, x, y) for x, y, r in rows)


def test_axioms_on_the_circle(circle):
    report = check_axioms(circle, lg_basis(circle, labels=[(-1,), (), (1,)]))
    assert report.exit_code == ExitCode.OK
    assert report.failures == []
    assert report.counts["U"]["pass"] == 6
    assert report.counts["O"]["pass"] == 36
    assert report.to_dict()["exit_code"] == 0


def test_axioms_on_the_torus(torus):
    classes = lg_basis(torus, labels=[(), (1,)], degrees=[-2, -1])
    report = check_axioms(torus, classes, seed=3, jobs=2)
    assert report.exit_code == ExitCode.OK
    assert report.counts["R"]["pass"] == len(classes) ** 2


def test_axiom_report_exit_codes():
    report = AxiomReport("Z")
    report.record("C", "pass")
    assert report.exit_code == ExitCode.OK
    report.record("A", "inconclusive", "window")
    assert report.exit_code == ExitCode.INCONCLUSIVE
    report.record("U", "fail", "t@0:1")
    assert report.exit_code == ExitCode.LAW_FAILURE
    assert report.failures == ["U: t@0:1"]


def test_parse_element_formats(circle, tmp_path):
    G = circle
    expected = LGElement([LGClass((1,), 0, (1,))])
    assert parse_element(G, "t@0:1") == expected
    assert parse_element(G, '{"label": "t", "degree": 0, "coeffs": [1]}') == expected
    assert parse_element(G, '[{"label": "t", "degree": 0, "coeffs": [1]}]') == expected
    report = {"group": "Z", "terms": element_to_dict(G, expected)}
    assert parse_element(G, json.dumps(report)) == expected
    path = tmp_path / "x.json"
    path.write_text(json.dumps(report), encoding="utf-8")
    assert parse_element(G, f"@{path}") == expected


@pytest.mark.parametrize(
    "text",
    [
        "t@0",
        "t:1",
        "t@x:1",
        "t@0:1,1",
        "t@3:1",
        "s@0:1",
        '{"label": "t"}',
        "{bad",
        "@/nonexistent",
    ],
)
def test_parse_element_errors(circle, text):
    with pytest.raises(InvalidSpecError):
        parse_element(circle, text)


def test_intersection_pair_of_the_whole_torus(torus):
    G = torus
    x = HomologyClass(G.whole(), 1, (1, 0))
    y = HomologyClass(G.whole(), 1, (0, 1))
    (cls,) = intersection_pair(x, y).values()
    assert cls.degree == 0
    assert cls.coords == global_intersection_oracle(G, 1, (1, 0), 1, (0, 1))
    assert intersection_pair(x, HomologyClass(G.whole(), 0, (1,))) == {}


@pytest.mark.slow
def test_surface_intersection_form(genus2):
    G = genus2
    a1b1 = global_intersection_oracle(G, 1, (1, 0, 0, 0), 1, (0, 1, 0, 0))
    assert a1b1 in {(1,), (-1,)}
    assert global_intersection_oracle(G, 1, (0, 0, 1, 0), 1, (0, 0, 0, 1)) == a1b1
    assert global_intersection_oracle(G, 1, (1, 0, 0, 0), 1, (0, 0, 0, 1)) == (0,)
    assert global_intersection_oracle(G, 1, (0, 1, 0, 0), 1, (1, 0, 0, 0)) == (-a1b1[0],)


@pytest.mark.slow
def test_surface_intersections_split_over_double_cosets(genus2):
    G = genus2
    K = G.centralizer_of(G.parse("a1"))
    H = G.centralizer_of(G.parse("b1"))
    pairs = intersection_pair(HomologyClass(K, 1, (1,)), HomologyClass(H, 1, (1,)))
    assert pairs
    assert all(cls.subgroup.kind == "trivial" for cls in pairs.values())
    total = sum(cls.coords[0] for cls in pairs.values())
    assert (total,) == global_intersection_oracle(G, 1, (1, 0, 0, 0), 1, (0, 1, 0, 0))


@pytest.mark.slow
def test_surface_products(genus2):
    G = genus2
    unit = unit_element(G)
    for x in lg_basis(G, labels=[(1,)]):
        assert string_product(G, unit, x) == x
        assert string_product(G, x, unit) == x
    a1 = one(G, "1@-1:1,0,0,0")
    b1 = one(G, "1@-1:0,1,0,0")
    point = global_intersection_oracle(G, 1, (1, 0, 0, 0), 1, (0, 1, 0, 0))
    assert string_product(G, a1, b1) == LGClass((), -2, point)


@pytest.mark.slow
def test_axioms_on_z3(z3):
    classes = lg_basis(z3, labels=[(), (1,)], degrees=[-3, -2])
    report = check_axioms(z3, classes, seed=5, max_triples=12, jobs=2)
    assert report.exit_code == ExitCode.OK
    assert report.counts["O"]["pass"] == len(classes) ** 2


@pytest.mark.slow
def test_axioms_on_genus_two(genus2):
    classes = lg_basis(genus2, labels=[(), (1,)], degrees=[-2, -1])
    report = check_axioms(genus2, classes, seed=1, max_triples=8, jobs=2)
    assert report.exit_code == ExitCode.OK
    assert report.failures == []
    assert report.counts["O"]["pass"] == 0


@pytest.mark.slow
def test_axioms_on_genus_three():
    G = make_group(GroupSpec("surface", 3))
    classes = lg_basis(G, labels=[()], degrees=[-1])
    assert len(classes) == 6
    report = check_axioms(G, classes, seed=2, max_triples=6)
    assert report.exit_code == ExitCode.OK
    assert report.counts["C"]["pass"] == 36


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_products_ignore_double_coset_representatives(genus2, seed):
    G = genus2
    rng = random.Random(seed)
    classes = lg_basis(G, labels=[(), (1,), (2,)], degrees=[-1])
    x, y = rng.choice(classes), rng.choice(classes)
    K, H = G.centralizer_of(x.label), G.centralizer_of(y.label)
    perturb = random_perturbation(G, K, H, seed)
    assert string_product(G, x, y, perturb=perturb) == string_product(G, x, y)
