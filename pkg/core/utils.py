import re
import typing
from itertools import groupby

from core.models import InvalidSpecError

__all__ = [
    "Word",
    "strtobool",
    "truncate",
    "human_join",
    "letter_key",
    "shortlex_key",
    "invert_word",
    "free_reduce",
    "word_power",
    "parse_word",
    "format_word",
]

Word = typing.Tuple[int, ...]

_TRUE = {"y", "yes", "t", "true", "on", "1", "enable"}
_FALSE = {"n", "no", "f", "false", "off", "0", "disable"}

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*?)(?:\^(-?\d+))?$")

# longest word accepted from user input, in letters
MAX_WORD_LENGTH = 10000


def strtobool(val):
    if isinstance(val, bool):
        return val
    val = str(val).strip().lower()
    if val in _TRUE:
        return 1
    if val in _FALSE:
        return 0
    raise ValueError(f"invalid truth value {val!r}")


def truncate(text: str, max: int = 50) -> str:  # pylint: disable=redefined-builtin
    text = text.strip()
    return text[: max - 3].strip() + "..." if len(text) > max else text


def human_join(strings):
    if len(strings) <= 2:
        return " or ".join(strings)
    return ", ".join(strings[: len(strings) - 1]) + " or " + strings[-1]


def letter_key(letter: int) -> int:
    """Generator i (1-based) sorts before its inverse, which sorts before generator i+1."""
    return 2 * (abs(letter) - 1) + (letter < 0)


def shortlex_key(word: Word):
    return len(word), tuple(letter_key(l) for l in word)


def invert_word(word: Word) -> Word:
    return tuple(-l for l in reversed(word))


def free_reduce(word: typing.Iterable[int]) -> Word:
    stack = []
    for letter in word:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def word_power(word: Word, exponent: int) -> Word:
    if exponent < 0:
        return invert_word(word) * -exponent
    return word * exponent


def parse_word(text: str, names: typing.Sequence[str]) -> Word:
    """
    Parses ``a1*b1^-1*a2^2`` style words over the generator ``names``.

    The identity may be written as ``1``, ``e`` or the empty string.
    """
    text = re.sub(r"\s+", "", text or "")
    if text in {"", "1", "e"}:
        return ()
    lookup = {name: i + 1 for i, name in enumerate(names)}
    letters = []
    length = 0
    for token in text.split("*"):
        m = _TOKEN.match(token)
        if m is None or m.group(1) not in lookup:
            raise InvalidSpecError(
                f'Cannot decipher "{token}" in word "{truncate(text)}", '
                f"generators are {human_join(list(names))}."
            )
        letter = lookup[m.group(1)]
        exponent = int(m.group(2)) if m.group(2) is not None else 1
        length += abs(exponent)
        if length > MAX_WORD_LENGTH:
            raise InvalidSpecError(
                f'Word "{truncate(text)}" is longer than {MAX_WORD_LENGTH} letters.'
            )
        letters.extend(word_power((letter,), exponent))
    return tuple(letters)


def format_word(word: Word, names: typing.Sequence[str]) -> str:
    if not word:
        return "1"
    parts = []
    for letter, run in groupby(word):
        count = len(list(run))
        exponent = count if letter > 0 else -count
        name = names[abs(letter) - 1]
        parts.append(name if exponent == 1 else f"{name}^{exponent}")
    return "*".join(parts)
