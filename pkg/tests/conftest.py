import pytest

from core.builtin_groups import GroupSpec, make_group
from core.resolution import enable_invariant_checks


@pytest.fixture(scope="session")
def circle():
    return make_group(GroupSpec("free_abelian", 1))


@pytest.fixture(scope="session")
def torus():
    return make_group(GroupSpec("free_abelian", 2))


@pytest.fixture(scope="session")
def z3():
    return make_group(GroupSpec("free_abelian", 3))


@pytest.fixture(scope="session")
def genus2():
    return make_group(GroupSpec("surface", 2))


@pytest.fixture
def checked():
    """Verifies every homotopy and chain map image computed inside the test."""
    enable_invariant_checks(True)
    yield
    enable_invariant_checks(False)


@pytest.fixture
def group_file(tmp_path):
    def write(text):
        path = tmp_path / "group.txt"
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
