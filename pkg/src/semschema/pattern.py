"""Shared regular-expression dialect for matching and string generation.

One dialect serves three consumers: the jslt `test()` builtin, schema
property patterns in the validator, and random string generation in the
event generator. The dialect is the non-backtracking core: literals,
character classes (with ranges and negation), `.`, anchors at the ends,
`* + ? {m,n}` quantifiers, alternation, and grouping. Back-references,
lookaround, named groups, and inline flags are rejected explicitly.

Matching is delegated to the stdlib `re` engine, which agrees with the
dialect on this subset; generation walks the parsed AST with a seeded RNG,
so every generated string is guaranteed to match.
"""

from __future__ import annotations

import functools
import random
import re
from dataclasses import dataclass
from typing import Union

from .errors import PatternError

_PRINTABLE = [chr(c) for c in range(32, 127)]

_CLASS_D = frozenset("0123456789")
_CLASS_W = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
_CLASS_S = frozenset(" \t\n\r\f\v")

_ESCAPABLE = set("\\.*+?()[]{}|^$/:-\"' @#,&!=<>~%;_")


@dataclass(frozen=True)
class Lit:
    char: str


@dataclass(frozen=True)
class CharClass:
    chars: frozenset
    negated: bool = False


@dataclass(frozen=True)
class Dot:
    pass


@dataclass(frozen=True)
class Seq:
    items: tuple


@dataclass(frozen=True)
class Alt:
    branches: tuple


@dataclass(frozen=True)
class Repeat:
    item: "Node"
    min: int
    max: int | None  # None = unbounded


Node = Union[Lit, CharClass, Dot, Seq, Alt, Repeat]


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def error(self, message: str) -> PatternError:
        return PatternError(f"{message} in pattern {self.src!r} at offset {self.pos}")

    def peek(self) -> str | None:
        return self.src[self.pos] if self.pos < len(self.src) else None

    def take(self) -> str:
        ch = self.src[self.pos]
        self.pos += 1
        return ch

    def parse(self) -> tuple[Node, bool, bool]:
        anchored_start = False
        anchored_end = False
        if self.peek() == "^":
            anchored_start = True
            self.take()
        node = self.alternation()
        if self.peek() == "$":
            anchored_end = True
            self.take()
        if self.pos != len(self.src):
            raise self.error(f"unexpected {self.peek()!r}")
        return node, anchored_start, anchored_end

    def alternation(self) -> Node:
        branches = [self.sequence()]
        while self.peek() == "|":
            self.take()
            branches.append(self.sequence())
        if len(branches) == 1:
            return branches[0]
        return Alt(tuple(branches))

    def sequence(self) -> Node:
        items: list[Node] = []
        while True:
            ch = self.peek()
            if ch is None or ch in "|)":
                break
            if ch == "$" and self._at_top_level_end():
                break
            items.append(self.quantified())
        if len(items) == 1:
            return items[0]
        return Seq(tuple(items))

    def _at_top_level_end(self) -> bool:
        # `$` is only an anchor when it closes the whole pattern
        return self.src[self.pos :] == "$"

    def quantified(self) -> Node:
        atom = self.atom()
        ch = self.peek()
        if ch == "*":
            self.take()
            node = Repeat(atom, 0, None)
        elif ch == "+":
            self.take()
            node = Repeat(atom, 1, None)
        elif ch == "?":
            self.take()
            node = Repeat(atom, 0, 1)
        elif ch == "{":
            node = Repeat(atom, *self.bounds())
        else:
            return atom
        # a lazy suffix describes the same language; accept and ignore
        if self.peek() == "?":
            self.take()
        return node

    def bounds(self) -> tuple[int, int | None]:
        self.take()  # {
        body = ""
        while self.peek() not in (None, "}"):
            body += self.take()
        if self.peek() is None:
            raise self.error("unclosed {")
        self.take()
        if not re.fullmatch(r"\d+(,\d*)?", body):
            raise self.error(f"bad repetition bounds {{{body}}}")
        if "," in body:
            lo, hi = body.split(",", 1)
            low = int(lo)
            high = int(hi) if hi else None
        else:
            low = high = int(body)
        if high is not None and high < low:
            raise self.error(f"repetition bounds out of order {{{body}}}")
        return low, high

    def atom(self) -> Node:
        ch = self.peek()
        if ch == "(":
            self.take()
            if self.peek() == "?":
                self.take()
                if self.peek() == ":":
                    self.take()
                else:
                    raise self.error("unsupported construct: lookaround or named group")
            inner = self.alternation()
            if self.peek() != ")":
                raise self.error("unclosed group")
            self.take()
            return inner
        if ch == "[":
            return self.char_class()
        if ch == ".":
            self.take()
            return Dot()
        if ch == "\\":
            return self.escape()
        if ch == "^":
            raise self.error("'^' is only supported at the start of the pattern")
        if ch == "$":
            raise self.error("'$' is only supported at the end of the pattern")
        if ch in "*+?{":
            raise self.error(f"quantifier {ch!r} with nothing to repeat")
        self.take()
        return Lit(ch)

    def escape(self) -> Node:
        self.take()  # backslash
        ch = self.peek()
        if ch is None:
            raise self.error("dangling backslash")
        self.take()
        if ch == "d":
            return CharClass(_CLASS_D)
        if ch == "D":
            return CharClass(_CLASS_D, negated=True)
        if ch == "w":
            return CharClass(_CLASS_W)
        if ch == "W":
            return CharClass(_CLASS_W, negated=True)
        if ch == "s":
            return CharClass(_CLASS_S)
        if ch == "S":
            return CharClass(_CLASS_S, negated=True)
        if ch == "n":
            return Lit("\n")
        if ch == "t":
            return Lit("\t")
        if ch == "r":
            return Lit("\r")
        if ch.isdigit():
            raise self.error("unsupported construct: back-reference")
        if ch in _ESCAPABLE:
            return Lit(ch)
        raise self.error(f"unsupported escape \\{ch}")

    def char_class(self) -> Node:
        self.take()  # [
        negated = False
        if self.peek() == "^":
            negated = True
            self.take()
        chars: set[str] = set()
        first = True
        while True:
            ch = self.peek()
            if ch is None:
                raise self.error("unclosed character class")
            if ch == "]" and not first:
                self.take()
                break
            first = False
            member = self._class_member()
            if self.peek() == "-" and self.src[self.pos + 1 : self.pos + 2] not in ("]", ""):
                self.take()
                if isinstance(member, frozenset):
                    raise self.error("range endpoint cannot be a class escape")
                end = self._class_member()
                if isinstance(end, frozenset):
                    raise self.error("range endpoint cannot be a class escape")
                if ord(member) > ord(end):
                    raise self.error(f"range {member}-{end} out of order")
                chars.update(chr(c) for c in range(ord(member), ord(end) + 1))
            elif isinstance(member, frozenset):
                chars.update(member)
            else:
                chars.add(member)
        if not chars:
            raise self.error("empty character class")
        return CharClass(frozenset(chars), negated=negated)

    def _class_member(self):
        ch = self.take()
        if ch != "\\":
            return ch
        esc = self.peek()
        if esc is None:
            raise self.error("dangling backslash in class")
        self.take()
        if esc == "d":
            return _CLASS_D
        if esc == "w":
            return _CLASS_W
        if esc == "s":
            return _CLASS_S
        if esc == "n":
            return "\n"
        if esc == "t":
            return "\t"
        if esc == "r":
            return "\r"
        if esc.isdigit():
            raise self.error("unsupported construct: back-reference")
        if esc in _ESCAPABLE:
            return esc
        raise self.error(f"unsupported escape \\{esc} in class")


class CompiledPattern:
    """A dialect-checked pattern that can both match and generate."""

    # extra repetitions allowed above `min` for unbounded quantifiers
    UNBOUNDED_EXTRA = 3

    def __init__(self, source: str):
        self.source = source
        parser = _Parser(source)
        self.root, self.anchored_start, self.anchored_end = parser.parse()
        try:
            self._regex = re.compile(source)
        except re.error as exc:  # pragma: no cover - dialect parse should catch first
            raise PatternError(f"pattern rejected by matcher: {exc}") from exc

    def search(self, text: str) -> bool:
        """True iff the pattern finds a match anywhere in `text`."""
        return self._regex.search(text) is not None

    def generate(self, rng: random.Random) -> str:
        """A random string in the pattern's language, deterministic per RNG state."""
        return self._gen(self.root, rng)

    def _gen(self, node: Node, rng: random.Random) -> str:
        if isinstance(node, Lit):
            return node.char
        if isinstance(node, Dot):
            return rng.choice(_PRINTABLE)
        if isinstance(node, CharClass):
            if node.negated:
                pool = [c for c in _PRINTABLE if c not in node.chars]
            else:
                pool = sorted(node.chars)
            if not pool:
                raise PatternError(f"class excludes every printable character in {self.source!r}")
            return rng.choice(pool)
        if isinstance(node, Seq):
            return "".join(self._gen(item, rng) for item in node.items)
        if isinstance(node, Alt):
            return self._gen(node.branches[rng.randrange(len(node.branches))], rng)
        if isinstance(node, Repeat):
            high = node.max if node.max is not None else node.min + self.UNBOUNDED_EXTRA
            count = rng.randint(node.min, high)
            return "".join(self._gen(node.item, rng) for _ in range(count))
        raise AssertionError(f"unhandled node {node!r}")


@functools.lru_cache(maxsize=512)
def compile_pattern(source: str) -> CompiledPattern:
    """Parse and validate `source` against the dialect.

    Compiled patterns are immutable and cached by source text.

    Raises:
        PatternError: for syntax errors and for constructs outside the
            dialect (back-references, lookaround, mid-pattern anchors).
    """
    return CompiledPattern(source)


def generate_from_pattern(source: str, seed: int) -> str:
    """A string matching `source`, a pure function of (source, seed)."""
    return compile_pattern(source).generate(random.Random(seed))
