__version__ = "0.1.0"


import argparse
import importlib
import json
import logging
import os
import sys
import typing

try:
    # noinspection PyUnresolvedReferences
    from colorama import init

    init()
except ImportError:
    pass

from core.builtin_groups import make_group
from core.cache import ComputationCache
from core.config import ConfigManager
from core.models import ExitCode, PDStringError, SearchBoundExceeded, configure_logging, getLogger
from core.resolution import enable_invariant_checks

logger = getLogger(__name__)

temp_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "temp")


class PDStringApp:
    """The ``pdstring`` command line: loads a group, its cache and the command cogs."""

    def __init__(self):
        self.loaded_cogs = ["cogs.homology", "cogs.algebra"]
        self.cogs = {}
        self.config = None
        self.group = None
        self.cache = None

        self.parser = argparse.ArgumentParser(
            prog="pdstring",
            description="Exact string topology products for Poincare duality groups.",
        )
        self.parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        self.common = argparse.ArgumentParser(add_help=False)
        self.common.add_argument("--group", help="group file with key=value lines")
        self.common.add_argument("--format", choices=("text", "json"), default="text")
        self.common.add_argument("--cache-dir", help="persistent cache directory")
        self.common.add_argument("--jobs", type=int, default=1)
        self.common.add_argument("--max-window", type=int, help="largest duality window radius")
        self.common.add_argument("--debug", action="store_true")
        self.common.add_argument(
            "--check-invariants",
            action="store_true",
            help="verify every homotopy and chain map image while computing",
        )
        self.subparsers = self.parser.add_subparsers(dest="command", metavar="command")
        self.subparsers.required = True

        for cog in self.loaded_cogs:
            logger.debug("Loading %s.", cog)
            importlib.import_module(cog).setup(self)

    def add_cog(self, cog) -> None:
        self.cogs[type(cog).__name__] = cog
        cog.register(self)

    def add_command(self, name: str, handler, help_text: str) -> argparse.ArgumentParser:
        parser = self.subparsers.add_parser(name, parents=[self.common], help=help_text)
        parser.set_defaults(handler=handler)
        return parser

    def _configure_logging(self, args):
        level_text = "DEBUG" if args.debug else str(self.config.get("log_level")).upper()
        logging_levels = {
            "CRITICAL": logging.CRITICAL,
            "ERROR": logging.ERROR,
            "WARNING": logging.WARNING,
            "INFO": logging.INFO,
            "DEBUG": logging.DEBUG,
        }
        log_level = logging_levels.get(level_text)
        if log_level is None:
            log_level = logging.WARNING
            logger.warning("Invalid logging level %s, falling back to WARNING.", level_text)

        log_file = None
        if args.debug or self.config.get("debug"):
            os.makedirs(temp_dir, exist_ok=True)
            log_file = os.path.join(temp_dir, "pdstring.log")
        configure_logging(log_file, log_level)
        logger.debug("Logging level: %s", level_text)

    def setup(self, args) -> None:
        self.config = ConfigManager(args.group)
        self.config.populate_cache()
        self._configure_logging(args)
        if args.check_invariants:
            enable_invariant_checks(True)
        if args.jobs < 1:
            raise PDStringError(f"--jobs must be at least 1, got {args.jobs}.")

        spec = self.config.group_spec()
        self.group = make_group(spec)
        self.cache = ComputationCache(args.cache_dir or self.config.get("cache_dir"))
        self.cache.load(self.group)
        logger.info("Group %s ready (spec %s).", self.group.name, spec.digest())
        logger.line()

    def max_window(self, args) -> int:
        if args.max_window is not None:
            if args.max_window < 1:
                raise PDStringError(f"--max-window must be positive, got {args.max_window}.")
            return args.max_window
        return self.config.get("max_window_radius")

    def emit(self, args, text: typing.Union[str, typing.List[str]], data: dict) -> None:
        if args.format == "json":
            sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
            return
        if not isinstance(text, str):
            text = "\n".join(text)
        sys.stdout.write(text + "\n")

    def run(self, argv: typing.Optional[typing.Sequence[str]] = None) -> int:
        args = self.parser.parse_args(argv)
        try:
            self.setup(args)
            code = args.handler(args)
        except SearchBoundExceeded as e:
            reached = f" (reached {e.reached})" if e.reached is not None else ""
            sys.stderr.write(f"error: {e.msg}{reached}\n")
            return int(e.exit_code)
        except PDStringError as e:
            sys.stderr.write(f"error: {e.msg}\n")
            return int(e.exit_code)
        finally:
            if self.cache is not None and self.group is not None:
                self.cache.save(self.group)
        return int(code if code is not None else ExitCode.OK)


def main(argv=None) -> int:
    return PDStringApp().run(argv)


if __name__ == "__main__":
    sys.exit(main())
