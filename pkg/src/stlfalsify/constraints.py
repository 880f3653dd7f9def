"""From a formula and a desired truth value to per-step sampling constraints.

Working top down, each operator splits its required output among its
children, always choosing a minimally restrictive split and flipping a coin
whenever one child suffices (a false conjunction needs only one false side,
a true disjunction only one true side).  Windowed operators move between the
scalar and series levels: a true "always" pins its whole window, a false one
pins a single uniformly chosen refutation step, "eventually" mirrors that
with a single witness step when true and a fully pinned window when false.
Steps outside a window stay arbitrary.

The leaves of the descent are comparisons annotated with a per-step output
series.  Compiling them intersects everything into per-channel boxes: an
interval [lower, upper] per step for continuous channels and an allowed
symbol set per step for categorical ones.  Falsified inequalities shift the
boundary by a small epsilon so that sampling the complement stays a closed
interval; a falsified equality on a continuous channel removes only a
measure-zero set and tightens nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .stl import (
    Always,
    And,
    CategoricalChannel,
    Cmp,
    Eventually,
    Formula,
    FormulaTypeError,
    Level,
    Not,
    Or,
    SignalTrace,
    TimeInterval,
    level,
)

__all__ = [
    "Output",
    "InfeasibleError",
    "LeafConstraint",
    "ConstraintSet",
    "subexpression_outputs",
    "sample_constraints",
    "compile_constraints",
    "constraints_for",
    "EPSILON",
]

EPSILON = 1e-6


class Output(IntEnum):
    ARBITRARY = 0
    TRUE = 1
    FALSE = 2


class InfeasibleError(Exception):
    """The sampled constraint set admits no trace."""


@dataclass(frozen=True)
class LeafConstraint:
    """One comparison plus the output it must produce at each step."""

    atom: Cmp
    outputs: np.ndarray  # int8 codes per step

    def __post_init__(self):
        object.__setattr__(
            self, "outputs", np.asarray(self.outputs, dtype=np.int8)
        )


def _arbitrary(m: int) -> np.ndarray:
    return np.zeros(m, dtype=np.int8)


def _negate(out):
    if isinstance(out, Output):
        if out is Output.ARBITRARY:
            return out
        return Output.FALSE if out is Output.TRUE else Output.TRUE
    flipped = out.copy()
    flipped[out == Output.TRUE] = Output.FALSE
    flipped[out == Output.FALSE] = Output.TRUE
    return flipped


def _split_conjunctive(out, rng, false_splits: bool):
    """Children of and (false_splits=True) or or (false_splits=False).

    For "and" a true output copies to both children and a false one lands on
    a random side; "or" is the mirror image.
    """
    must_both = Output.TRUE if false_splits else Output.FALSE
    one_side = Output.FALSE if false_splits else Output.TRUE
    if isinstance(out, Output):
        if out is must_both:
            return out, out
        if out is Output.ARBITRARY:
            return Output.ARBITRARY, Output.ARBITRARY
        if int(rng.integers(2)):
            return one_side, Output.ARBITRARY
        return Output.ARBITRARY, one_side
    left = out.copy()
    right = out.copy()
    split = out == one_side
    to_right = split & (rng.integers(0, 2, size=out.shape) == 1)
    to_left = split & ~to_right
    left[to_right] = Output.ARBITRARY
    right[to_left] = Output.ARBITRARY
    return left, right


def subexpression_outputs(
    op: str,
    out,
    rng: np.random.Generator,
    interval: TimeInterval | None = None,
    m: int | None = None,
):
    """Required outputs for the children of one operator application.

    ``out`` is an Output for scalar context or an int8 code array for series
    context.  Windowed operators ("always", "eventually") take a scalar
    ``out`` plus their interval and the trace length ``m``, and return a
    one-element tuple holding the child's series codes.
    """
    if op == "not":
        return (_negate(out),)
    if op == "and":
        return _split_conjunctive(out, rng, false_splits=True)
    if op == "or":
        return _split_conjunctive(out, rng, false_splits=False)
    if op in ("always", "eventually"):
        if interval is None or m is None:
            raise ValueError(f"{op} needs interval and m")
        if interval.hi >= m:
            raise FormulaTypeError(
                f"interval [{interval.lo}, {interval.hi}] exceeds horizon {m}"
            )
        child = _arbitrary(m)
        if out is Output.ARBITRARY:
            return (child,)
        whole_window = (op == "always") == (out is Output.TRUE)
        code = Output.TRUE if out is Output.TRUE else Output.FALSE
        if whole_window:
            child[interval.lo : interval.hi + 1] = code
        else:
            step = int(rng.integers(interval.lo, interval.hi + 1))
            child[step] = code
        return (child,)
    raise ValueError(f"unknown operator {op!r}")


def sample_constraints(
    formula: Formula,
    m: int,
    rng: np.random.Generator,
    out: Output = Output.TRUE,
) -> list[LeafConstraint]:
    """Descend ``formula`` and pin down what each comparison must output.

    Returns one LeafConstraint per comparison whose outputs are not
    everywhere arbitrary, in left-to-right leaf order.  A series formula at
    the root is lifted over all m steps, matching ``stl.evaluate``.
    """
    if level(formula) is Level.SERIES:
        formula = Always(TimeInterval(0, m - 1), formula)
    leaves: list[LeafConstraint] = []

    def scalar(f, out: Output):
        if isinstance(f, Not):
            scalar(f.arg, _negate(out))
        elif isinstance(f, (And, Or)):
            op = "and" if isinstance(f, And) else "or"
            left, right = subexpression_outputs(op, out, rng)
            scalar(f.lhs, left)
            scalar(f.rhs, right)
        else:  # Always / Eventually
            op = "always" if isinstance(f, Always) else "eventually"
            (child,) = subexpression_outputs(op, out, rng, interval=f.interval, m=m)
            series(f.arg, child)

    def series(f, out: np.ndarray):
        if isinstance(f, Cmp):
            if (out != Output.ARBITRARY).any():
                leaves.append(LeafConstraint(f, out))
        elif isinstance(f, Not):
            series(f.arg, _negate(out))
        else:
            op = "and" if isinstance(f, And) else "or"
            left, right = subexpression_outputs(op, out, rng)
            series(f.lhs, left)
            series(f.rhs, right)

    scalar(formula, out)
    return leaves


# ---------------------------------------------------------------------------
# Compilation


class ConstraintSet:
    """Per-channel, per-step sampling boxes.

    Continuous channels carry ``lower``/``upper`` arrays (infinite where the
    model's own support is the only limit); categorical channels carry a
    list of allowed-symbol sets.  A constraint set is feasible by
    construction; compilation raises InfeasibleError otherwise.
    """

    def __init__(self, channels, m: int):
        self.channels = tuple(channels)
        self.m = m
        self.lower: dict[str, np.ndarray] = {}
        self.upper: dict[str, np.ndarray] = {}
        self.allowed: dict[str, list[set]] = {}
        for ch in self.channels:
            if isinstance(ch, CategoricalChannel):
                self.allowed[ch.name] = [set(ch.symbols) for _ in range(m)]
            elif ch.hard_bounds:
                self.lower[ch.name] = np.full(m, float(ch.lo))
                self.upper[ch.name] = np.full(m, float(ch.hi))
            else:
                self.lower[ch.name] = np.full(m, -np.inf)
                self.upper[ch.name] = np.full(m, np.inf)

    def satisfied_by(self, trace: SignalTrace) -> bool:
        for ch in self.channels:
            vals = trace.values[ch.name]
            if isinstance(ch, CategoricalChannel):
                if any(
                    v not in allowed
                    for v, allowed in zip(vals.tolist(), self.allowed[ch.name])
                ):
                    return False
            else:
                lo, hi = self.lower[ch.name], self.upper[ch.name]
                if ((vals < lo) | (vals > hi)).any():
                    return False
        return True

    def to_json(self) -> str:
        def bound(x):
            return None if not np.isfinite(x) else float(x)

        doc = {"m": self.m, "channels": {}}
        for ch in self.channels:
            if isinstance(ch, CategoricalChannel):
                doc["channels"][ch.name] = {
                    "kind": "categorical",
                    "allowed": [sorted(s) for s in self.allowed[ch.name]],
                }
            else:
                doc["channels"][ch.name] = {
                    "kind": "continuous",
                    "lower": [bound(x) for x in self.lower[ch.name]],
                    "upper": [bound(x) for x in self.upper[ch.name]],
                }
        return json.dumps(doc, indent=2, sort_keys=True)

    def _check_feasible(self):
        for name in self.lower:
            if (self.lower[name] > self.upper[name]).any():
                raise InfeasibleError(f"empty interval on channel {name}")
        for name, sets in self.allowed.items():
            if any(not s for s in sets):
                raise InfeasibleError(f"no symbol left on channel {name}")


def compile_constraints(
    leaves: list[LeafConstraint], channels, m: int
) -> ConstraintSet:
    """Intersect leaf constraints into one feasible ConstraintSet."""
    cs = ConstraintSet(channels, m)
    by_name = {ch.name: ch for ch in cs.channels}
    for leaf in leaves:
        atom = leaf.atom
        if atom.channel not in by_name:
            raise FormulaTypeError(f"unknown channel {atom.channel!r}")
        ch = by_name[atom.channel]
        if leaf.outputs.shape[0] != m:
            raise ValueError("leaf output length differs from horizon")
        true_at = leaf.outputs == Output.TRUE
        false_at = leaf.outputs == Output.FALSE
        if isinstance(ch, CategoricalChannel):
            sets = cs.allowed[ch.name]
            for i in np.flatnonzero(true_at):
                sets[i] &= {atom.value}
            for i in np.flatnonzero(false_at):
                sets[i] -= {atom.value}
            continue
        v = float(atom.value)
        lo, hi = cs.lower[ch.name], cs.upper[ch.name]
        if atom.op == "<=":
            np.minimum(hi, v, out=hi, where=true_at)
            np.maximum(lo, v + EPSILON, out=lo, where=false_at)
        elif atom.op == ">=":
            np.maximum(lo, v, out=lo, where=true_at)
            np.minimum(hi, v - EPSILON, out=hi, where=false_at)
        else:  # "=": pin when true; a falsified equality tightens nothing
            np.maximum(lo, v, out=lo, where=true_at)
            np.minimum(hi, v, out=hi, where=true_at)
    cs._check_feasible()
    return cs


def constraints_for(
    formula: Formula,
    channels,
    m: int,
    rng: np.random.Generator,
    out: Output = Output.TRUE,
    retries: int = 10,
) -> ConstraintSet:
    """Sample constraints for ``formula``, retrying infeasible draws.

    Different coin flips in the descent can rescue a draw whose first
    attempt contradicted itself, so up to ``retries`` fresh attempts are
    made before giving up.
    """
    last = None
    for _ in range(retries):
        try:
            return compile_constraints(
                sample_constraints(formula, m, rng, out=out), channels, m
            )
        except InfeasibleError as e:
            last = e
    raise InfeasibleError(
        f"no feasible constraints after {retries} attempts: {last}"
    )
