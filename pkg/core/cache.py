"""
Persistent computation cache, one pickle file per group spec digest.

Only plain data is stored: normal forms, boundaries, diagonals, homology bases, chain map
images and dual cocycle values.  A file that cannot be read back is ignored.
"""

import os
import pickle  # nosec B403
import tempfile
import typing

from core.builtin_groups import SCHEMA_VERSION
from core.groups import GroupOracle
from core.models import getLogger

logger = getLogger(__name__)


class ComputationCache:
    def __init__(self, directory: typing.Optional[str]):
        self.directory = directory

    def __repr__(self):
        return f"<ComputationCache {self.directory}>"

    @property
    def enabled(self) -> bool:
        return bool(self.directory)

    def path(self, G: GroupOracle) -> str:
        return os.path.join(self.directory, f"{G.spec.digest()}.pickle")

    def load(self, G: GroupOracle) -> bool:
        """Warms ``G`` from disk; returns whether anything was loaded."""
        if not self.enabled:
            return False
        path = self.path(G)
        if not os.path.exists(path):
            logger.debug("No cache entry at %s.", path)
            return False
        try:
            with open(path, "rb") as f:
                data = pickle.load(f)  # nosec B301
        except OSError as e:
            logger.warning("Cannot read cache entry %s: %s.", path, e.strerror)
            return False
        except Exception as e:  # pylint: disable=broad-except
            logger.warning("Ignoring corrupt cache entry %s: %s.", path, e)
            return False

        if not self._valid(G, data):
            logger.warning("Ignoring stale cache entry %s.", path)
            return False
        # nothing is imported unless every part has the live shape
        if not (
            self._shaped(G.export_state(), data["group"])
            and self._shaped(G.resolution.export_state(), data["resolution"])
        ):
            logger.warning("Ignoring malformed cache entry %s.", path)
            return False
        G.import_state(data["group"])
        G.resolution.import_state(data["resolution"], data["duals"])
        logger.info("Loaded cache entry %s.", path)
        return True

    @staticmethod
    def _shaped(live: dict, saved: dict) -> bool:
        return set(live) == set(saved) and all(isinstance(v, dict) for v in saved.values())

    @staticmethod
    def _valid(G: GroupOracle, data) -> bool:
        return (
            isinstance(data, dict)
            and data.get("schema") == SCHEMA_VERSION
            and data.get("digest") == G.spec.digest()
            and all(isinstance(data.get(k), dict) for k in ("group", "resolution", "duals"))
        )

    def save(self, G: GroupOracle) -> bool:
        if not self.enabled:
            return False
        R = G.resolution
        duals = {key: value.values for key, value in R.memo_items() if key[0] == "dual"}
        data = {
            "schema": SCHEMA_VERSION,
            "digest": G.spec.digest(),
            "group": G.export_state(),
            "resolution": R.export_state(),
            "duals": duals,
        }
        path = self.path(G)
        try:
            os.makedirs(self.directory, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "wb") as f:
                pickle.dump(data, f, protocol=pickle.HIGHEST_PROTOCOL)
            os.replace(tmp, path)
        except OSError as e:
            logger.warning("Cannot write cache entry %s: %s.", path, e.strerror or e)
            return False
        logger.debug("Saved cache entry %s.", path)
        return True
