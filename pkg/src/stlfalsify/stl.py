"""Temporal-logic formulas over sampled multi-channel signals.

Formulas live at two levels.  A *series* formula assigns a truth value to
every step of a trace: comparisons like ``speed >= 4.0`` and the pointwise
connectives and/or/not.  A *scalar* formula assigns a single truth value to
the whole trace: the windowed operators "always" and "eventually" collapse a
series to a scalar over a step interval, and the connectives combine scalars.

Intervals are closed and indexed in steps, so ``Always(TimeInterval(0, 2), s)``
reads "s holds at steps 0, 1 and 2".  Channels are either continuous (float
samples, thresholds drawn from a declared range) or categorical (string
symbols, equality tests only).

The canonical text form (see ``canonical_text`` / ``parse``) is a plain ASCII
syntax::

    G_[0,2](speed >= 4.0)            always, steps 0..2
    F_[1,5](disturbance = a_maj)     eventually, steps 1..5
    (a & b), (a | b), !a             connectives

Unicode spellings of the operators are accepted on input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

import numpy as np

__all__ = [
    "Level",
    "TimeInterval",
    "ContinuousChannel",
    "CategoricalChannel",
    "ChannelSpec",
    "Cmp",
    "Not",
    "And",
    "Or",
    "Always",
    "Eventually",
    "Formula",
    "FormulaTypeError",
    "ParseError",
    "SignalTrace",
    "level",
    "depth",
    "check",
    "evaluate",
    "eval_series",
    "canonical_text",
    "parse",
    "render_natural_language",
]

OPS = ("<=", ">=", "=")


class Level(Enum):
    SCALAR = "scalar"
    SERIES = "series"


class FormulaTypeError(ValueError):
    """A formula is structurally invalid or inconsistent with its channels."""


@dataclass(frozen=True)
class TimeInterval:
    """Closed step interval [lo, hi], both endpoints included."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.hi < self.lo:
            raise FormulaTypeError(f"bad interval [{self.lo}, {self.hi}]")

    def steps(self) -> range:
        return range(self.lo, self.hi + 1)


@dataclass(frozen=True)
class ContinuousChannel:
    """A float-valued channel.

    ``lo``/``hi`` bound the thresholds a formula may compare against.  They
    only bound the signal values themselves when ``hard_bounds`` is set (for
    models whose support genuinely is the interval, e.g. uniform noise).
    """

    name: str
    lo: float
    hi: float
    units: str = ""
    hard_bounds: bool = False

    @property
    def kind(self) -> str:
        return "continuous"


@dataclass(frozen=True)
class CategoricalChannel:
    """A symbol-valued channel.  ``aliases`` maps alternate spellings that
    formula text may use onto canonical symbols."""

    name: str
    symbols: tuple[str, ...]
    aliases: tuple[tuple[str, str], ...] = ()  # also accepts a plain dict

    def __post_init__(self):
        if isinstance(self.aliases, dict):
            object.__setattr__(self, "aliases", tuple(sorted(self.aliases.items())))
        if len(set(self.symbols)) != len(self.symbols):
            raise FormulaTypeError(f"duplicate symbols on channel {self.name}")

    @property
    def kind(self) -> str:
        return "categorical"

    def resolve(self, symbol: str) -> str:
        for alt, canon in self.aliases:
            if symbol == alt:
                return canon
        return symbol


ChannelSpec = Union[ContinuousChannel, CategoricalChannel]


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Cmp:
    """Atomic comparison ``channel op value``, a series formula."""

    channel: str
    op: str
    value: Union[float, str]

    def __post_init__(self):
        if self.op not in OPS:
            raise FormulaTypeError(f"unknown comparison op {self.op!r}")
        if isinstance(self.value, str) and self.op != "=":
            raise FormulaTypeError("symbols only support equality tests")


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Always:
    interval: TimeInterval
    arg: "Formula"


@dataclass(frozen=True)
class Eventually:
    interval: TimeInterval
    arg: "Formula"


Formula = Union[Cmp, Not, And, Or, Always, Eventually]


def level(formula: Formula) -> Level:
    """Scalar or series.  Raises FormulaTypeError on mixed-level connectives."""
    if isinstance(formula, Cmp):
        return Level.SERIES
    if isinstance(formula, (Always, Eventually)):
        if level(formula.arg) is not Level.SERIES:
            raise FormulaTypeError("windowed operators need a series argument")
        return Level.SCALAR
    if isinstance(formula, Not):
        return level(formula.arg)
    if isinstance(formula, (And, Or)):
        left, right = level(formula.lhs), level(formula.rhs)
        if left is not right:
            raise FormulaTypeError("and/or children must share a level")
        return left
    raise FormulaTypeError(f"not a formula: {formula!r}")


def depth(formula: Formula) -> int:
    """Tree depth counting formula nodes only; a lone comparison has depth 1."""
    if isinstance(formula, Cmp):
        return 1
    if isinstance(formula, Not):
        return 1 + depth(formula.arg)
    if isinstance(formula, (And, Or)):
        return 1 + max(depth(formula.lhs), depth(formula.rhs))
    if isinstance(formula, (Always, Eventually)):
        return 1 + depth(formula.arg)
    raise FormulaTypeError(f"not a formula: {formula!r}")


def _channel_map(channels) -> dict[str, ChannelSpec]:
    out = {}
    for ch in channels:
        if ch.name in out:
            raise FormulaTypeError(f"duplicate channel {ch.name}")
        out[ch.name] = ch
    return out


def check(
    formula: Formula,
    channels=None,
    t_max: int | None = None,
    max_depth: int | None = None,
) -> Level:
    """Validate a formula and return its level.

    With ``channels`` given, also checks that every comparison names a known
    channel, that categorical tests use declared symbols, and that continuous
    thresholds lie inside the channel's declared range.  ``t_max`` bounds
    interval endpoints, ``max_depth`` bounds the tree depth.
    """
    by_name = _channel_map(channels) if channels is not None else None

    def walk(f: Formula):
        if isinstance(f, Cmp):
            if by_name is not None:
                if f.channel not in by_name:
                    raise FormulaTypeError(f"unknown channel {f.channel!r}")
                ch = by_name[f.channel]
                if ch.kind == "categorical":
                    if f.op != "=":
                        raise FormulaTypeError(
                            f"channel {ch.name} is categorical; only '=' applies"
                        )
                    if f.value not in ch.symbols:
                        raise FormulaTypeError(
                            f"unknown symbol {f.value!r} on channel {ch.name}"
                        )
                else:
                    if isinstance(f.value, str):
                        raise FormulaTypeError(
                            f"channel {ch.name} is continuous, got symbol {f.value!r}"
                        )
                    if not (ch.lo <= float(f.value) <= ch.hi):
                        raise FormulaTypeError(
                            f"threshold {f.value} outside [{ch.lo}, {ch.hi}] "
                            f"for channel {ch.name}"
                        )
        elif isinstance(f, (Always, Eventually)):
            if t_max is not None and f.interval.hi > t_max:
                raise FormulaTypeError(
                    f"interval [{f.interval.lo}, {f.interval.hi}] exceeds t_max={t_max}"
                )
            walk(f.arg)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, (And, Or)):
            walk(f.lhs)
            walk(f.rhs)

    walk(formula)
    lvl = level(formula)  # raises on mixed levels
    if max_depth is not None and depth(formula) > max_depth:
        raise FormulaTypeError(f"depth {depth(formula)} exceeds {max_depth}")
    return lvl


# ---------------------------------------------------------------------------
# Traces


@dataclass
class SignalTrace:
    """A fixed-rate recording of every channel over m steps.

    ``values`` maps channel name to a 1-D array: float dtype for continuous
    channels, string/object dtype for categorical ones.  Step i corresponds
    to time ``i * dt`` seconds.
    """

    dt: float
    channels: tuple[ChannelSpec, ...]
    values: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        self.channels = tuple(self.channels)
        lengths = set()
        for ch in self.channels:
            if ch.name not in self.values:
                raise ValueError(f"trace missing channel {ch.name}")
            arr = np.asarray(self.values[ch.name])
            if ch.kind == "continuous":
                arr = arr.astype(float)
                if ch.hard_bounds and arr.size and (
                    arr.min() < ch.lo - 1e-9 or arr.max() > ch.hi + 1e-9
                ):
                    raise ValueError(
                        f"values on {ch.name} escape [{ch.lo}, {ch.hi}]"
                    )
            else:
                arr = arr.astype(object)
                bad = set(arr.tolist()) - set(ch.symbols)
                if bad:
                    raise ValueError(f"unknown symbols {bad} on channel {ch.name}")
            self.values[ch.name] = arr
            lengths.add(arr.shape[0])
        if len(lengths) != 1:
            raise ValueError(f"channel lengths differ: {sorted(lengths)}")

    @property
    def m(self) -> int:
        return next(iter(self.values.values())).shape[0]

    def to_csv(self, path) -> None:
        names = [ch.name for ch in self.channels]
        with open(path, "w") as fh:
            fh.write("t," + ",".join(names) + "\n")
            for i in range(self.m):
                cells = [f"{i * self.dt:.6g}"]
                for ch in self.channels:
                    v = self.values[ch.name][i]
                    cells.append(repr(float(v)) if ch.kind == "continuous" else str(v))
                fh.write(",".join(cells) + "\n")

    @classmethod
    def from_csv(cls, path, channels, dt: float | None = None) -> "SignalTrace":
        channels = tuple(channels)
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            rows = [line.strip().split(",") for line in fh if line.strip()]
        if not header or header[0] != "t":
            raise ValueError(f"{path}: first column must be 't'")
        col = {name: j for j, name in enumerate(header)}
        missing = [ch.name for ch in channels if ch.name not in col]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        if dt is None:
            ts = [float(r[0]) for r in rows]
            dt = ts[1] - ts[0] if len(ts) > 1 else 1.0
        values = {}
        for ch in channels:
            cells = [r[col[ch.name]] for r in rows]
            if ch.kind == "continuous":
                values[ch.name] = np.array([float(c) for c in cells])
            else:
                values[ch.name] = np.array(cells, dtype=object)
        return cls(dt=dt, channels=channels, values=values)


# ---------------------------------------------------------------------------
# Evaluation


def eval_series(formula: Formula, trace: SignalTrace) -> np.ndarray:
    """Pointwise truth of a series formula: one bool per step."""
    if isinstance(formula, Cmp):
        vals = trace.values[formula.channel]
        if isinstance(formula.value, str):
            return np.asarray(vals == formula.value, dtype=bool)
        v = float(formula.value)
        if formula.op == "<=":
            return np.asarray(vals <= v)
        if formula.op == ">=":
            return np.asarray(vals >= v)
        return np.asarray(vals == v)
    if isinstance(formula, Not):
        return ~eval_series(formula.arg, trace)
    if isinstance(formula, And):
        return eval_series(formula.lhs, trace) & eval_series(formula.rhs, trace)
    if isinstance(formula, Or):
        return eval_series(formula.lhs, trace) | eval_series(formula.rhs, trace)
    raise FormulaTypeError(f"not a series formula: {formula!r}")


def _window(formula, trace) -> np.ndarray:
    iv = formula.interval
    if iv.hi >= trace.m:
        raise FormulaTypeError(
            f"interval [{iv.lo}, {iv.hi}] exceeds trace horizon {trace.m}"
        )
    return eval_series(formula.arg, trace)[iv.lo : iv.hi + 1]


def evaluate(formula: Formula, trace: SignalTrace) -> bool:
    """Truth of a formula on a whole trace.

    A bare series formula at the root is read as "at every step", i.e. it is
    lifted with an implicit always over [0, m-1].
    """
    if level(formula) is Level.SERIES:
        formula = Always(TimeInterval(0, trace.m - 1), formula)

    def scalar(f) -> bool:
        if isinstance(f, Always):
            return bool(_window(f, trace).all())
        if isinstance(f, Eventually):
            return bool(_window(f, trace).any())
        if isinstance(f, Not):
            return not scalar(f.arg)
        if isinstance(f, And):
            return scalar(f.lhs) and scalar(f.rhs)
        if isinstance(f, Or):
            return scalar(f.lhs) or scalar(f.rhs)
        raise FormulaTypeError(f"not a scalar formula: {f!r}")

    return scalar(formula)


# ---------------------------------------------------------------------------
# Canonical text


def _fmt_value(value) -> str:
    if isinstance(value, str):
        return value
    return repr(float(value))


def canonical_text(formula: Formula) -> str:
    """Deterministic ASCII rendering; ``parse`` inverts it exactly."""
    if isinstance(formula, Cmp):
        return f"{formula.channel} {formula.op} {_fmt_value(formula.value)}"
    if isinstance(formula, Not):
        return f"!{canonical_text(formula.arg)}"
    if isinstance(formula, And):
        return f"({canonical_text(formula.lhs)} & {canonical_text(formula.rhs)})"
    if isinstance(formula, Or):
        return f"({canonical_text(formula.lhs)} | {canonical_text(formula.rhs)})"
    if isinstance(formula, Always):
        iv = formula.interval
        return f"G_[{iv.lo},{iv.hi}]({canonical_text(formula.arg)})"
    if isinstance(formula, Eventually):
        iv = formula.interval
        return f"F_[{iv.lo},{iv.hi}]({canonical_text(formula.arg)})"
    raise FormulaTypeError(f"not a formula: {formula!r}")


class ParseError(ValueError):
    """Malformed formula text; ``pos`` is the character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|==|=|≤|≥)
  | (?P<punct>[()\[\],&|!]|G_|F_|□_|◊_|∧|∨|¬)
    """,
    re.VERBOSE,
)

_ALIAS = {"≤": "<=", "≥": ">=", "==": "=", "□_": "G_", "◊_": "F_", "∧": "&", "∨": "|", "¬": "!"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            tok = _ALIAS.get(tok, tok)
            tokens.append((kind, tok, pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, channels):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.by_name = _channel_map(channels) if channels is not None else None

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None, kind=None):
        k, v, pos = self.tokens[self.i]
        if value is not None and v != value:
            raise ParseError(f"expected {value!r}, got {v or 'end of input'!r}", pos)
        if kind is not None and k != kind:
            raise ParseError(f"expected {kind}, got {v or 'end of input'!r}", pos)
        self.i += 1
        return v, pos

    def parse(self) -> Formula:
        f = self.or_expr()
        k, v, pos = self.peek()
        if k != "eof":
            raise ParseError(f"trailing input {v!r}", pos)
        return f

    def or_expr(self) -> Formula:
        f = self.and_expr()
        while self.peek()[1] == "|":
            self.take("|")
            f = Or(f, self.and_expr())
        return f

    def and_expr(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.take("&")
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        k, v, pos = self.peek()
        if v == "!":
            self.take("!")
            return Not(self.unary())
        if v == "(":
            self.take("(")
            f = self.or_expr()
            self.take(")")
            return f
        if v in ("G_", "F_"):
            self.take(v)
            self.take("[")
            lo, lo_pos = self.take(kind="number")
            self.take(",")
            hi, hi_pos = self.take(kind="number")
            self.take("]")
            self.take("(")
            arg = self.or_expr()
            self.take(")")
            try:
                iv = TimeInterval(self._step(lo, lo_pos), self._step(hi, hi_pos))
            except FormulaTypeError as e:
                raise ParseError(str(e), lo_pos) from None
            return Always(iv, arg) if v == "G_" else Eventually(iv, arg)
        if k == "name":
            return self.atom()
        raise ParseError(f"expected a formula, got {v or 'end of input'!r}", pos)

    @staticmethod
    def _step(tok: str, pos: int) -> int:
        val = float(tok)
        if val != int(val):
            raise ParseError(f"interval endpoints are step indices, got {tok}", pos)
        return int(val)

    def atom(self) -> Formula:
        name, name_pos = self.take(kind="name")
        k, v, pos = self.peek()
        if k != "op":
            # bare symbol shorthand: find the categorical channel that owns it
            if self.by_name is None:
                raise ParseError(
                    f"bare symbol {name!r} needs channel context", name_pos
                )
            owners = []
            for ch in self.by_name.values():
                if ch.kind == "categorical":
                    resolved = ch.resolve(name)
                    if resolved in ch.symbols:
                        owners.append((ch.name, resolved))
            if len(owners) != 1:
                raise ParseError(
                    f"{name!r} is not a channel comparison or unique symbol", name_pos
                )
            return Cmp(owners[0][0], "=", owners[0][1])
        op, _ = self.take(kind="op")
        k, v, pos = self.peek()
        if k == "number":
            self.take()
            value: float | str = float(v)
        elif k == "name":
            self.take()
            value = v
        else:
            raise ParseError(f"expected a value, got {v or 'end of input'!r}", pos)
        if self.by_name is not None and name in self.by_name:
            ch = self.by_name[name]
            if ch.kind == "categorical" and isinstance(value, str):
                value = ch.resolve(value)
        try:
            return Cmp(name, op, value)
        except FormulaTypeError as e:
            raise ParseError(str(e), name_pos) from None


def parse(text: str, channels=None) -> Formula:
    """Parse canonical (or hand-written) formula text.

    With ``channels`` supplied, bare categorical symbols are resolved to
    their owning channel, aliases are normalized, and the result is fully
    validated against the channel specs.
    """
    formula = _Parser(text, channels).parse()
    if channels is not None:
        check(formula, channels=channels)
    else:
        level(formula)
    return formula


# ---------------------------------------------------------------------------
# Natural language


def render_natural_language(
    formula: Formula,
    dt: float = 1.0,
    phrases: dict | None = None,
) -> str:
    """Readable English for a formula.

    ``dt`` converts step indices to seconds.  ``phrases`` optionally maps
    ``(channel, symbol)`` pairs, or plain channel names, to scenario wording
    such as "the vehicle performs a major acceleration".
    """
    phrases = phrases or {}

    def name_of(ch: str) -> str:
        return phrases.get(ch, ch)

    def walk(f) -> str:
        if isinstance(f, Cmp):
            if isinstance(f.value, str):
                key = (f.channel, f.value)
                if key in phrases:
                    return phrases[key]
                return f"{name_of(f.channel)} equals {f.value}"
            verb = {"<=": "is at most", ">=": "is at least", "=": "equals"}[f.op]
            return f"{name_of(f.channel)} {verb} {f.value:g}"
        if isinstance(f, Not):
            return f"it is not the case that {walk(f.arg)}"
        if isinstance(f, And):
            return f"{walk(f.lhs)} and {walk(f.rhs)}"
        if isinstance(f, Or):
            return f"{walk(f.lhs)} or {walk(f.rhs)}"
        if isinstance(f, (Always, Eventually)):
            t0 = f.interval.lo * dt
            t1 = f.interval.hi * dt
            head = "always" if isinstance(f, Always) else "at some time"
            return f"{head} between t={t0:.2f}s and t={t1:.2f}s, {walk(f.arg)}"
        raise FormulaTypeError(f"not a formula: {f!r}")

    return walk(formula)


def iter_nodes(formula: Formula) -> Iterator[Formula]:
    """Yield every formula node, root first, left to right."""
    yield formula
    if isinstance(formula, Not):
        yield from iter_nodes(formula.arg)
    elif isinstance(formula, (And, Or)):
        yield from iter_nodes(formula.lhs)
        yield from iter_nodes(formula.rhs)
    elif isinstance(formula, (Always, Eventually)):
        yield from iter_nodes(formula.arg)
