"""Seeded simulation of K-color reinforced urns.

Three urn functions map the current color proportions to the draw
distribution of the next ball: the identity (classical reinforcement),
a constant vector (i.i.d. draws), and the two-parameter family whose
non-first colors share the complement of the first proportion in fixed
ratios.  Draws are made with exact rational arithmetic over a hash
counter, so a (seed, sample, step) triple always yields the same color
on every platform and under any execution order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .exactnum import Composition, Rational, RationalLike, compositions, parse_rational

__all__ = [
    "UrnState",
    "IdentityUrn",
    "ConstantUrn",
    "HLSUrn",
    "UrnFunction",
    "simulate",
    "EmpiricalCell",
    "empirical_cylinder",
    "within_four_sigma",
]


@dataclass(frozen=True)
class UrnState:
    """Ball counts per color.  Individual colors may start empty, but the
    urn itself must not be; counts only ever grow by one per draw."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 2:
            raise ValueError("an urn needs at least two colors")
        if any(c < 0 for c in counts):
            raise ValueError(f"counts must be non-negative, got {counts}")
        if sum(counts) < 1:
            raise ValueError("the urn must contain at least one ball")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def proportions(self) -> tuple[Fraction, ...]:
        total = self.total
        return tuple(Fraction(c, total) for c in self.counts)

    def add(self, j: int) -> "UrnState":
        if not 0 <= j < len(self.counts):
            raise ValueError(f"color index {j} out of range")
        bumped = list(self.counts)
        bumped[j] += 1
        return UrnState(tuple(bumped))


@dataclass(frozen=True)
class IdentityUrn:
    """Draw proportional to current counts (classical reinforcement)."""

    def probabilities(self, y: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(y)


@dataclass(frozen=True)
class ConstantUrn:
    """Draw from a fixed distribution regardless of state: i.i.d. colors."""

    p: tuple[Rational, ...]

    def __post_init__(self) -> None:
        p = tuple(parse_rational(x) for x in self.p)
        if len(p) < 2:
            raise ValueError("need at least two colors")
        if any(x < 0 for x in p):
            raise ValueError("probabilities must be non-negative")
        if sum(p) != 1:
            raise ValueError("probabilities must sum to 1 exactly")
        object.__setattr__(self, "p", p)

    def probabilities(self, y: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return self.p


@dataclass(frozen=True)
class HLSUrn:
    """First color reinforces itself with its own proportion y_1; the
    remaining colors share 1 - y_1 in the fixed ratios alpha_1, ...,
    alpha_{K-2}, 1 - sum(alpha)."""

    alpha: tuple[Rational, ...]

    def __post_init__(self) -> None:
        alpha = tuple(parse_rational(x) for x in self.alpha)
        if not alpha:
            raise ValueError("need at least one ratio (three colors)")
        if any(a <= 0 for a in alpha):
            raise ValueError("ratios must be positive")
        if sum(alpha) >= 1:
            raise ValueError("ratios must sum to less than 1")
        object.__setattr__(self, "alpha", alpha)

    def probabilities(self, y: Sequence[Fraction]) -> tuple[Fraction, ...]:
        rest = 1 - y[0]
        tail = 1 - sum(self.alpha)
        return (y[0], *(a * rest for a in self.alpha), tail * rest)


UrnFunction = Union[IdentityUrn, ConstantUrn, HLSUrn]


def _counter_uniform(seed: int, sample: int, step: int, bound: int) -> int:
    # uniform in [0, bound) from a hash counter; rejection keeps it unbiased
    if bound < 1:
        raise ValueError("bound must be positive")
    space = 1 << 256
    limit = space - (space % bound)
    nonce = 0
    while True:
        digest = hashlib.sha256(f"{seed}|{sample}|{step}|{nonce}".encode()).digest()
        value = int.from_bytes(digest, "big")
        if value < limit:
            return value % bound
        nonce += 1


def _draw(probs: Sequence[Fraction], seed: int, sample: int, step: int) -> int:
    if any(p < 0 for p in probs):
        raise ValueError("urn function emitted a negative probability")
    if sum(probs) != 1:
        raise ValueError("urn function emitted probabilities not summing to 1")
    denom = math.lcm(*(p.denominator for p in probs))
    r = _counter_uniform(seed, sample, step, denom)
    acc = 0
    for j, p in enumerate(probs):
        acc += p.numerator * (denom // p.denominator)
        if r < acc:
            return j
    raise AssertionError("unreachable: probabilities sum to 1")


def simulate(
    initial: UrnState,
    fn: UrnFunction,
    steps: int,
    seed: int,
    sample_index: int = 0,
) -> list[int]:
    """Run one urn trajectory; returns the drawn color indices (0-based).

    Deterministic in (initial, fn, steps, seed, sample_index); the sample
    index keys independent replications off one seed.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    state = initial
    colors = len(initial.counts)
    out = []
    for step in range(steps):
        probs = fn.probabilities(state.proportions())
        if len(probs) != colors:
            raise ValueError(
                f"urn function emits {len(probs)} colors, state has {colors}"
            )
        j = _draw(probs, seed, sample_index, step)
        out.append(j)
        state = state.add(j)
    return out


@dataclass(frozen=True)
class EmpiricalCell:
    count: int
    estimate: Fraction
    stderr: float


def empirical_cylinder(
    initial: UrnState, fn: UrnFunction, n: int, samples: int, seed: int
) -> dict[Composition, EmpiricalCell]:
    """Monte Carlo estimate of every class probability at length n.

    Simulates `samples` independent prefixes and tallies count vectors;
    the estimate for a class is its relative frequency and the reported
    standard error is the binomial one at the estimated rate.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    colors = len(initial.counts)
    tallies: dict[Composition, int] = {}
    for s in range(samples):
        seq = simulate(initial, fn, n, seed, sample_index=s)
        counts = [0] * colors
        for j in seq:
            counts[j] += 1
        comp = Composition(counts)
        tallies[comp] = tallies.get(comp, 0) + 1
    out = {}
    for comp in compositions(n, colors):
        count = tallies.get(comp, 0)
        estimate = Fraction(count, samples)
        stderr = math.sqrt(float(estimate) * (1.0 - float(estimate)) / samples)
        out[comp] = EmpiricalCell(count, estimate, stderr)
    return out


def within_four_sigma(count: int, samples: int, exact: RationalLike) -> bool:
    """Exact-rational binomial sanity check: is the observed frequency
    within four standard errors (at the exact rate) of the exact value?"""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p = parse_rational(exact)
    if not 0 <= p <= 1:
        raise ValueError("exact probability must lie in [0, 1]")
    phat = Fraction(count, samples)
    return (phat - p) ** 2 * samples <= 16 * p * (1 - p)
