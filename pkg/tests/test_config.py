import pytest

from core.builtin_groups import GroupSpec
from core.config import ConfigManager
from core.groups import SearchBounds
from core.models import InvalidConfigError


def test_parse_group_files():
    text = "# genus two\nkind = surface\ngenus=2  # handles\n\nSEARCH_LIMIT = 500\n"
    assert ConfigManager.parse(text) == {"kind": "surface", "genus": "2", "search_limit": "500"}


@pytest.mark.parametrize(
    "text",
    ["kind surface", "colour = red", "kind = surface\nkind = free_abelian", "cache_dir = /tmp"],
)
def test_parse_rejects_bad_lines(text):
    with pytest.raises(InvalidConfigError):
        ConfigManager.parse(text)


def test_group_spec_from_file(group_file):
    config = ConfigManager(group_file("kind = surface\ngenus = 2\ncoset_search_radius = 3\n"))
    config.populate_cache()
    spec = config.group_spec()
    assert spec == GroupSpec("surface", 2, SearchBounds(coset_slack=3))
    assert config.get("max_window_radius") == 12
    assert config.get("debug") is False


def test_environment_is_overridden_by_the_file(group_file, monkeypatch):
    monkeypatch.setenv("PDSTRING_SEARCH_LIMIT", "500")
    monkeypatch.setenv("PDSTRING_CONJUGACY_SEARCH_RADIUS", "4")
    monkeypatch.setenv("PDSTRING_CACHE", "/tmp/pdstring")
    config = ConfigManager(group_file("kind = free_abelian\nrank = 3\nsearch_limit = 70\n"))
    config.populate_cache()
    assert config.bounds == SearchBounds(conjugacy_slack=4, coset_slack=2, search_limit=70)
    assert config.get("cache_dir") == "/tmp/pdstring"


def test_bad_environment_values_fall_back(monkeypatch):
    monkeypatch.setenv("PDSTRING_MAX_WINDOW_RADIUS", "lots")
    config = ConfigManager()
    config.populate_cache()
    assert config.get("max_window_radius") == 12


@pytest.mark.parametrize(
    "key, value",
    [
        ("rank", "0"),
        ("rank", "two"),
        ("search_limit", "-1"),
        ("kind", "klein"),
        ("debug", "maybe"),
    ],
)
def test_set_validates(key, value):
    config = ConfigManager()
    config.populate_cache()
    with pytest.raises(InvalidConfigError):
        config.set(key, value)


def test_unknown_keys():
    config = ConfigManager()
    with pytest.raises(InvalidConfigError):
        config["colour"] = "red"
    with pytest.raises(InvalidConfigError):
        config.get("colour")


@pytest.mark.parametrize(
    "text",
    ["genus = 2", "kind = surface", "kind = free_abelian\nrank = 2\ngenus = 2"],
)
def test_incomplete_group_specs(group_file, text):
    config = ConfigManager(group_file(text))
    config.populate_cache()
    with pytest.raises(InvalidConfigError):
        config.group_spec()


def test_missing_group_file(tmp_path):
    config = ConfigManager(str(tmp_path / "missing.txt"))
    with pytest.raises(InvalidConfigError):
        config.populate_cache()


def test_unsupported_environment_kinds_are_ignored(monkeypatch):
    monkeypatch.setenv("PDSTRING_KIND", "klein")
    monkeypatch.setenv("PDSTRING_GENUS", "2")
    config = ConfigManager()
    config.populate_cache()
    assert config.get("kind") is None
    assert config.get("genus") == 2


def test_initial_window_radius_reaches_the_bounds(group_file):
    config = ConfigManager(group_file("kind = surface\ngenus = 2\ninitial_window_radius = 3\n"))
    config.populate_cache()
    assert config.group_spec().bounds.initial_window_radius == 3
    assert ConfigManager().bounds.initial_window_radius == 1
