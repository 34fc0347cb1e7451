import os
import typing
from copy import deepcopy

from dotenv import load_dotenv

from core.builtin_groups import GroupSpec
from core.groups import SearchBounds
from core.models import InvalidConfigError, getLogger
from core.utils import human_join, strtobool

logger = getLogger(__name__)
load_dotenv()

ENV_PREFIX = "PDSTRING_"


class ConfigManager:
    """
    Flat ``key=value`` settings for one group.

    Values come from the defaults, then ``PDSTRING_*`` environment variables
    (a ``.env`` file is honoured), then the group file, then explicit ``set`` calls.
    """

    group_keys = {
        "kind": None,
        "rank": None,
        "genus": None,
    }

    bound_keys = {
        "conjugacy_search_radius": 2,
        "coset_search_radius": 2,
        "search_limit": 20000,
        "max_window_radius": 12,
        "initial_window_radius": 1,
    }

    protected_keys = {
        "debug": False,
        "cache_dir": None,
        "log_level": "WARNING",
    }

    integers = {
        "rank",
        "genus",
        "conjugacy_search_radius",
        "coset_search_radius",
        "search_limit",
        "max_window_radius",
        "initial_window_radius",
    }

    booleans = {"debug"}

    kinds = {"free_abelian", "surface"}

    defaults = {**group_keys, **bound_keys, **protected_keys}
    all_keys = set(defaults.keys())
    file_keys = set(group_keys) | set(bound_keys) | {"debug"}

    def __init__(self, path: typing.Optional[str] = None):
        self.path = path
        self._cache = {}

    def __repr__(self):
        return repr(self._cache)

    def populate_cache(self) -> dict:
        self._cache = deepcopy(self.defaults)

        # environment first, the group file overrides it
        for k, v in sorted(os.environ.items()):
            if not k.startswith(ENV_PREFIX):
                continue
            key = k[len(ENV_PREFIX) :].lower()
            if key == "cache":
                key = "cache_dir"
            if key not in self.all_keys:
                continue
            try:
                self.set(key, v)
            except InvalidConfigError as e:
                logger.warning("Ignoring %s: %s", k, e.msg)

        if self.path is not None:
            logger.debug("Loading group spec from %s.", self.path)
            for key, value in self.read_file(self.path).items():
                self.set(key, value)
        return self._cache

    @classmethod
    def read_file(cls, path: str) -> typing.Dict[str, str]:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise InvalidConfigError(f"Cannot read group file {path}: {e.strerror}.")
        return cls.parse(text, source=path)

    @classmethod
    def parse(cls, text: str, source: str = "<string>") -> typing.Dict[str, str]:
        data = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f'{source}:{lineno}: expected "key=value", got "{line}".')
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lower()
            if key not in cls.file_keys:
                raise InvalidConfigError(
                    f'{source}:{lineno}: unknown key "{key}", '
                    f"valid keys are {human_join(sorted(cls.file_keys))}."
                )
            if key in data:
                raise InvalidConfigError(f'{source}:{lineno}: duplicate key "{key}".')
            data[key] = value
        return data

    def _known(self, key: str) -> str:
        key = key.lower()
        if key not in self.all_keys:
            raise InvalidConfigError(f'Unknown setting "{key}".')
        return key

    def __setitem__(self, key: str, item: typing.Any) -> None:
        self._cache[self._known(key)] = item

    def __getitem__(self, key: str) -> typing.Any:
        key = self._known(key)
        if key not in self._cache:
            self._cache[key] = deepcopy(self.defaults[key])
        return self._cache[key]

    def get(self, key: str, convert=True) -> typing.Any:
        key = self._known(key)
        value = self[key]

        if not convert or value is None:
            return value

        if key in self.integers:
            try:
                value = int(value)
            except (TypeError, ValueError):
                logger.warning("Invalid integer for %s: %s.", key, value)
                value = self.remove(key)

        elif key in self.booleans:
            try:
                value = bool(strtobool(value))
            except ValueError:
                value = self.remove(key)

        return value

    def set(self, key: str, item: typing.Any, convert=True) -> None:
        key = self._known(key)
        if not convert or item is None:
            return self.__setitem__(key, item)

        if key in self.integers:
            try:
                value = int(item)
            except (TypeError, ValueError):
                raise InvalidConfigError(f'"{key}" must be an integer, not "{item}".')
            if value < (0 if key in self.bound_keys else 1):
                raise InvalidConfigError(f'"{key}" is out of range: {value}.')
            return self.__setitem__(key, value)

        if key in self.booleans:
            try:
                return self.__setitem__(key, bool(strtobool(item)))
            except ValueError:
                raise InvalidConfigError(f'"{key}" must be a yes/no value.')

        if key == "kind" and item not in self.kinds:
            raise InvalidConfigError(
                f'Unsupported group kind "{item}", use {human_join(sorted(self.kinds))}.'
            )

        return self.__setitem__(key, item)

    def remove(self, key: str) -> typing.Any:
        key = self._known(key)
        self._cache[key] = deepcopy(self.defaults[key])
        return self._cache[key]

    @property
    def bounds(self) -> SearchBounds:
        return SearchBounds(
            conjugacy_slack=self.get("conjugacy_search_radius"),
            coset_slack=self.get("coset_search_radius"),
            search_limit=self.get("search_limit"),
            initial_window_radius=self.get("initial_window_radius"),
        )

    def group_spec(self) -> GroupSpec:
        kind = self.get("kind")
        if kind is None:
            raise InvalidConfigError('The group file must set "kind".')
        if kind == "free_abelian":
            size, size_key, other = self.get("rank"), "rank", "genus"
        else:
            size, size_key, other = self.get("genus"), "genus", "rank"
        if size is None:
            raise InvalidConfigError(f'A {kind} group needs "{size_key}".')
        if self.get(other) is not None:
            raise InvalidConfigError(f'"{other}" does not apply to a {kind} group.')
        return GroupSpec(kind=kind, size=size, bounds=self.bounds)
