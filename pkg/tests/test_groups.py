import random

import pytest

from core.builtin_groups import intersect_centralizers
from core.groups import (
    CyclicSubgroup,
    FreeAbelianGroup,
    GroupRingElement,
    coset_canonical,
    double_coset_key,
    split_double_coset,
    subgroup_of,
)
from core.models import InvalidSpecError
from core.utils import (
    MAX_WORD_LENGTH,
    format_word,
    free_reduce,
    invert_word,
    parse_word,
    shortlex_key,
    strtobool,
    word_power,
)

NAMES = ("a1", "b1", "a2", "b2")


def test_word_helpers():
    assert free_reduce((1, -1, 2, 3, -3)) == (2,)
    assert invert_word((1, 2, -3)) == (3, -2, -1)
    assert word_power((1, 2), -2) == (-2, -1, -2, -1)
    assert word_power((1,), 0) == ()


def test_shortlex_orders_generators_before_inverses():
    words = [(2,), (-1,), (1,), (1, 1), ()]
    assert sorted(words, key=shortlex_key) == [(), (1,), (-1,), (2,), (1, 1)]


def test_parse_and_format_words():
    assert parse_word("a1*b1^-1*a2^2", NAMES) == (1, -2, 3, 3)
    assert parse_word(" 1 ", NAMES) == ()
    assert format_word((1, -2, 3, 3), NAMES) == "a1*b1^-1*a2^2"
    assert format_word((), NAMES) == "1"


@pytest.mark.parametrize("text", ["c1", "a1^x", "a1**b1"])
def test_parse_rejects_unknown_tokens(text):
    with pytest.raises(InvalidSpecError):
        parse_word(text, NAMES)


def test_strtobool():
    assert strtobool("yes") == 1
    assert strtobool("off") == 0
    with pytest.raises(ValueError):
        strtobool("maybe")


def test_free_abelian_normal_forms(torus):
    assert torus.name == "Z^2"
    assert torus.parse("(1,0)") == (1,)
    assert torus.parse("e1*e2^-1*e1") == (1, 1, -2)
    assert torus.parse("e2*e1") == torus.parse("e1*e2")
    assert torus.to_vector(torus.parse("(3,-2)")) == (3, -2)
    assert torus.commutes((1,), (2,))
    with pytest.raises(InvalidSpecError):
        torus.parse("(1,2,3)")


def test_free_abelian_rejects_rank_zero():
    with pytest.raises(InvalidSpecError):
        FreeAbelianGroup(0)


def test_malformed_letters(torus):
    with pytest.raises(InvalidSpecError):
        torus.normal_form((3,))


def test_free_abelian_labels_and_centralizers(z3):
    g = z3.parse("(1,-1,2)")
    assert z3.conjugacy_label(g) == (g, ())
    assert z3.centralizer_of(g).kind == "whole"
    assert z3.are_conjugate(g, g) == ()
    assert z3.are_conjugate(g, (1,)) is None


def test_lattice_cosets(torus):
    K = subgroup_of(torus, [torus.parse("(1,0)")])
    assert K.kind == "cyclic"
    g = torus.parse("(3,2)")
    rep, k = K.left_coset(g)
    assert rep == torus.parse("(0,2)")
    assert torus.multiply(rep, K.include(k)) == g
    assert K.contains(torus.parse("(-4,0)"))
    assert not K.contains(torus.parse("(0,1)"))
    assert coset_canonical(g, K, side="right") == rep


def test_lattice_subgroups_collapse(torus):
    assert subgroup_of(torus, [(1,), (2,)]).kind == "whole"
    assert subgroup_of(torus, [()]).kind == "trivial"
    assert subgroup_of(torus, [(1, 1), (2,)]).kind == "free_abelian"


def test_abelian_intersections(torus):
    A = subgroup_of(torus, [torus.parse("(2,0)")])
    B = subgroup_of(torus, [torus.parse("(3,0)")])
    J = intersect_centralizers(A, B)
    assert J.contains(torus.parse("(6,0)"))
    assert not J.contains(torus.parse("(2,0)"))

    C = subgroup_of(torus, [torus.parse("(0,1)")])
    assert intersect_centralizers(A, C).kind == "trivial"
    assert intersect_centralizers(torus.whole(), C) == C


def test_abelian_double_cosets(torus):
    K = subgroup_of(torus, [torus.parse("(1,0)")])
    g = torus.parse("(5,2)")
    rep, k, h = split_double_coset(g, K, K)
    assert rep == torus.parse("(0,2)")
    assert torus.multiply(k, rep, h) == g
    key = double_coset_key(torus.parse("(-1,2)"), K, K)
    assert key == double_coset_key(g, K, K)


def test_surface_double_cosets(genus2):
    G = genus2
    K = CyclicSubgroup(G, G.parse("a1"))
    H = CyclicSubgroup(G, G.parse("b1"))
    g = G.parse("a1^2*b2*b1^-1")
    rep, k, h = split_double_coset(g, K, H)
    assert G.multiply(k, rep, h) == g
    assert K.contains(k)
    assert H.contains(h)
    assert shortlex_key(rep) <= shortlex_key(G.parse("b2"))
    assert double_coset_key(G.parse("a1*b2*b1"), K, H).rep == rep


def test_group_ring_elements_drop_zeros():
    x = GroupRingElement().add((), 1).add((1,), -1)
    assert x.augmentation() == 0
    assert x.add((1,), 1) == {(): 1}
    assert x.add((), -1) == {}


def _random_word(rng, G, length):
    return tuple(rng.choice(G.letters) for _ in range(length))


@pytest.mark.parametrize("name", ["torus", "z3", "genus2"])
def test_normal_form_is_idempotent(request, name):
    G = request.getfixturevalue(name)
    rng = random.Random(7)
    for _ in range(40):
        g = G.normal_form(_random_word(rng, G, rng.randint(0, 12)))
        assert G.normal_form(g) == g
        assert G.multiply(g, G.invert(g)) == ()


def test_conjugacy_witnesses_match_labels(genus2):
    G = genus2
    rng = random.Random(11)
    for g in G.enumerate_ball(2):
        label, w = G.conjugacy_label(g)
        assert G.conjugate(w, g) == label
        assert G.conjugacy_label(label)[0] == label
        h = G.conjugate((rng.choice(G.letters),), g)
        witness = G.are_conjugate(g, h)
        assert witness is not None
        assert G.conjugate(witness, g) == h


def test_conjugacy_separates_homology_classes(genus2):
    G = genus2
    assert G.are_conjugate(G.parse("a1"), G.parse("b1")) is None
    assert G.are_conjugate(G.parse("a1"), G.parse("a1^2")) is None


def test_coset_canonical_is_a_retraction(torus, genus2):
    K = subgroup_of(torus, [torus.parse("(2,1)")])
    for g in torus.enumerate_ball(3):
        for side in ("left", "right"):
            c = coset_canonical(g, K, side)
            assert coset_canonical(c, K, side) == c
            assert K.contains(torus.multiply(torus.invert(g), c))

    a1 = genus2.parse("a1")
    C = genus2.centralizer_of(a1)
    for g in genus2.enumerate_ball(2):
        left = coset_canonical(g, C, "left")
        assert coset_canonical(left, C, "left") == left
        assert coset_canonical(genus2.multiply(g, a1), C, "left") == left
        assert C.contains(genus2.multiply(genus2.invert(g), left))
        right = coset_canonical(g, C, "right")
        assert coset_canonical(right, C, "right") == right
        assert coset_canonical(genus2.multiply(a1, g), C, "right") == right


def test_double_coset_keys_are_constant_on_lattices(torus):
    G = torus
    K = subgroup_of(G, [G.parse("(2,0)")])
    H = subgroup_of(G, [G.parse("(0,3)")])
    rng = random.Random(3)
    for g in G.enumerate_ball(3):
        key = double_coset_key(g, K, H)
        for _ in range(5):
            k = G.power(K.generators[0], rng.randint(-3, 3))
            h = G.power(H.generators[0], rng.randint(-3, 3))
            assert double_coset_key(G.multiply(k, g, h), K, H) == key


def test_surface_double_coset_splits_recombine(genus2):
    G = genus2
    K = G.centralizer_of(G.parse("a1"))
    H = G.centralizer_of(G.parse("b2"))
    for g in G.enumerate_ball(2):
        rep, k, h = split_double_coset(g, K, H)
        assert G.multiply(k, rep, h) == g
        assert K.contains(k) and H.contains(h)


def test_parsing_caps_word_length(torus):
    circle = FreeAbelianGroup(1)
    with pytest.raises(InvalidSpecError):
        parse_word("t^1000000000", ["t"])
    with pytest.raises(InvalidSpecError):
        circle.parse(f"({MAX_WORD_LENGTH + 1})")
    assert circle.parse(f"({MAX_WORD_LENGTH})") == (1,) * MAX_WORD_LENGTH
    with pytest.raises(InvalidSpecError):
        torus.parse(f"e1^{MAX_WORD_LENGTH}*e2")
