import random

import pytest

from core.groups import subgroup_of
from core.models import InvalidSpecError
from core.resolution import Chain, translate


def _all_cells(R):
    return [cell for degree in range(R.length + 1) for cell in R.cells(degree)]


@pytest.fixture(params=["circle", "torus", "z3", "genus2"])
def group(request):
    return request.getfixturevalue(request.param)


def test_boundary_squares_to_zero(group):
    R = group.resolution
    for cell in _all_cells(R):
        assert R.boundary(R.boundary_cell(cell)) == {}


def test_contracting_homotopy(group):
    R = group.resolution
    for g in group.enumerate_ball(2):
        for cell in _all_cells(R):
            R.check_homotopy(Chain({(g, cell): 1}))


def test_diagonal_is_a_counital_chain_map(group):
    R = group.resolution
    for cell in _all_cells(R):
        R.check_diagonal(cell)


def test_fundamental_cycle_generates_top_homology(group):
    R = group.resolution
    n = group.dimension
    assert R.top_cell == (n, 0)
    H = R.homology(n)
    assert (H.free_rank, H.torsion) == (1, [])
    assert H.reduce(R.coinvariants(R.fundamental_cycle, n)) in {(1,), (-1,)}


def test_circle_diagonal(circle):
    R = circle.resolution
    assert R.diagonal_cell((1, 0)) == {
        ((), (0, 0), (), (1, 0)): 1,
        ((), (1, 0), (1,), (0, 0)): 1,
    }


def test_koszul_boundary(torus):
    R = torus.resolution
    assert R.cell_name((2, 0)) == "e1^e2"
    assert R.boundary_cell((2, 0)) == {
        ((1,), (1, 1)): 1,
        ((), (1, 1)): -1,
        ((2,), (1, 0)): -1,
        ((), (1, 0)): 1,
    }
    M = R.boundary_matrix(2)
    assert M == [[{(): 1, (2,): -1}], [{(1,): 1, (): -1}]]
    assert [entry.augmentation() for row in M for entry in row] == [0, 0]
    assert R.coinvariant_boundary(2).entries == [[0], [0]]


def test_koszul_homology(z3):
    R = z3.resolution
    assert R.ranks == (1, 3, 3, 1)
    assert [R.homology(k).rank for k in range(4)] == [1, 3, 3, 1]
    assert R.basis_names(1) == ["[e1]", "[e2]", "[e3]"]
    assert R.basis_names(3) == ["[e1^e2^e3]"]


def test_surface_homology(genus2):
    R = genus2.resolution
    assert R.basis_names(0) == ["[pt]"]
    assert R.basis_names(1) == ["[a1]", "[b1]", "[a2]", "[b2]"]
    assert R.basis_names(2) == ["[sigma]"]
    assert R.cycle_of((1,), 2) == {((), (2, 0)): 1}


def test_surface_boundaries(genus2):
    R = genus2.resolution
    assert R.boundary_cell((1, 2)) == {((3,), (0, 0)): 1, ((), (0, 0)): -1}
    assert R.path_chain((-1,)) == {((-1,), (1, 0)): -1}
    relator = R.boundary_cell((2, 0))
    assert R.coinvariants(relator, 1) == (0, 0, 0, 0)
    assert R.augmentation(R.boundary(relator)) == 0


def test_translate(genus2):
    chain = Chain({((1,), (1, 0)): 2, ((), (0, 0)): -1})
    moved = translate(genus2, (-1,), chain)
    assert moved == {((), (1, 0)): 2, ((-1,), (0, 0)): -1}
    assert translate(genus2, (), chain) == chain


def test_chain_drops_zeros():
    chain = Chain().add("x", 2).add("x", -2).add("y", 0)
    assert chain == {}
    assert Chain({"x": 1}).scaled(0) == {}


def test_bad_cells(genus2):
    with pytest.raises(InvalidSpecError):
        genus2.resolution.boundary_cell((3, 0))
    with pytest.raises(InvalidSpecError):
        genus2.resolution.boundary_cell((1, 4))


def test_surface_lifts_and_restrictions(genus2, checked):
    G = genus2
    R = G.resolution
    K = G.centralizer_of(G.parse("a1*b1"))
    lift = R.lift_from(K)
    for cell in _all_cells(K.resolution):
        lift.check((), cell)
    restrict = R.restriction_to(K)
    for g in G.enumerate_ball(1):
        t = K.right_coset(g)[1]
        for cell in _all_cells(R):
            restrict.check(t, cell)
    assert R.lift_from(K) is lift


def test_lattice_lifts_and_restrictions(torus, checked):
    R = torus.resolution
    K = subgroup_of(torus, [torus.parse("(2,1)")])
    lift = R.lift_from(K)
    for cell in _all_cells(K.resolution):
        lift.check((), cell)
    restrict = R.restriction_to(K)
    for g in torus.enumerate_ball(1):
        t = K.right_coset(g)[1]
        for cell in _all_cells(R):
            restrict.check(t, cell)


def test_lift_preserves_fundamental_classes(torus):
    R = torus.resolution
    K = subgroup_of(torus, [torus.parse("(1,0)")])
    image = R.lift_from(K).apply(K.resolution.cycle_of((1,), 1))
    assert R.homology(1).reduce(R.coinvariants(image, 1)) == (1, 0)


@pytest.mark.parametrize("seed", range(5))
def test_homotopy_identity_on_random_chains(group, seed):
    R = group.resolution
    rng = random.Random(seed)
    ball = group.enumerate_ball(3)
    cells = _all_cells(R)
    chain = Chain()
    for _ in range(8):
        chain.add((rng.choice(ball), rng.choice(cells)), rng.randint(-3, 3))
    image = R.apply_homotopy(chain)
    lhs = R.boundary(image).merge(R.apply_homotopy(R.boundary(chain)))
    rhs = Chain().merge(chain).add(((), R.base), -R.augmentation(chain))
    assert lhs == rhs
    R.check_homotopy(chain, image)
