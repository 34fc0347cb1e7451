import logging
import re
import sys
import typing
from enum import IntEnum
from logging.handlers import RotatingFileHandler

try:
    from colorama import Fore, Style
except ImportError:
    Fore = Style = type("Dummy", (object,), {"__getattr__": lambda self, item: ""})()


class ExitCode(IntEnum):
    OK = 0
    LAW_FAILURE = 1
    SPEC_ERROR = 2
    BOUND_FAILURE = 3
    INCONCLUSIVE = 4


class PDStringError(Exception):
    """Base class for every error raised by the engine."""

    exit_code = ExitCode.SPEC_ERROR

    def __init__(self, msg, *args):
        super().__init__(msg, *args)
        self.msg = msg

    def __str__(self):
        return self.msg


class InvalidSpecError(PDStringError):
    """A group file, class spec, word or config value could not be understood."""


class InvalidConfigError(InvalidSpecError):
    pass


class SearchBoundExceeded(PDStringError):
    """A bounded search gave up; the answer is unknown, not negative."""

    exit_code = ExitCode.BOUND_FAILURE

    def __init__(self, msg, *args, bound=None, reached=None):
        super().__init__(msg, *args)
        self.bound = bound
        self.reached = reached


class WindowExceeded(SearchBoundExceeded):
    """The duality inverse found no cocycle inside the largest allowed window."""


class InvariantViolation(PDStringError):
    """A chain-level identity failed to hold; always an internal bug."""

    exit_code = ExitCode.LAW_FAILURE


LOG_FORMAT = "%(asctime)s %(name)s[%(lineno)d] %(levelname)s: %(message)s"


class PDStringLogger(logging.Logger):
    """Colours each message by level; the debug file strips the codes again."""

    colours = {
        logging.DEBUG: Fore.CYAN,
        logging.INFO: Fore.LIGHTMAGENTA_EX,
        logging.WARNING: Fore.YELLOW,
        logging.ERROR: Fore.RED,
        logging.CRITICAL: Fore.RED + Style.BRIGHT,
    }

    def makeRecord(self, name, level, fn, lno, msg, args, *rest, **kwargs):
        colour = self.colours.get(level, "")
        msg = f"{colour}{msg}{Style.RESET_ALL}"
        return super().makeRecord(name, level, fn, lno, msg, args, *rest, **kwargs)

    def line(self, level="info"):
        """A separator rule between the stages of a run."""
        level = logging.DEBUG if level == "debug" else logging.INFO
        if self.isEnabledFor(level):
            self._log(level, Style.DIM + "-" * 32, ())


logging.setLoggerClass(PDStringLogger)

_state = {"level": logging.WARNING, "file": None}
_loggers: typing.Set[logging.Logger] = set()

# reports go to stdout
_stderr = logging.StreamHandler(stream=sys.stderr)
_stderr.setLevel(_state["level"])
_stderr.setFormatter(logging.Formatter(LOG_FORMAT, datefmt="%H:%M:%S"))


def _attach(logger: logging.Logger) -> None:
    logger.setLevel(_state["level"])
    for handler in (_stderr, _state["file"]):
        if handler is not None and handler not in logger.handlers:
            logger.addHandler(handler)


def getLogger(name=None) -> PDStringLogger:
    logger = logging.getLogger(name)
    _attach(logger)
    _loggers.add(logger)
    return logger


class FileFormatter(logging.Formatter):
    ansi_escape = re.compile(r"\x1B\[[0-?]*[ -/]*[@-~]")

    def format(self, record):
        record.msg = self.ansi_escape.sub("", str(record.msg))
        return super().format(record)


def configure_logging(path: typing.Optional[str] = None, level: typing.Optional[int] = None):
    """Sets the level of every engine logger and opens the rotating debug file at ``path``."""
    if path is not None and _state["file"] is None:
        handler = RotatingFileHandler(path, mode="a+", maxBytes=48000, backupCount=1)
        handler.setFormatter(FileFormatter(LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
        handler.setLevel(logging.DEBUG)
        _state["file"] = handler
    if level is not None:
        _state["level"] = level
    _stderr.setLevel(_state["level"])
    for logger in _loggers:
        _attach(logger)
