"""Time-dependent coefficients as small closed-form combinations.

Coefficient time functions are restricted to finite linear combinations of
{1, sin(w t), cos(w t), exp(-r t)} so that infima and suprema over a working
interval can be bounded rigorously by a coarse grid plus a derivative bound.
That is what keeps "certified" verdicts on polynomial models meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class TimeFn:
    """const + sum a*sin(w t) + sum a*cos(w t) + sum a*exp(-r t), r >= 0."""

    const: float = 0.0
    sin_terms: tuple[tuple[float, float], ...] = ()  # (amplitude, frequency)
    cos_terms: tuple[tuple[float, float], ...] = ()
    exp_terms: tuple[tuple[float, float], ...] = ()  # (amplitude, decay rate)

    def __post_init__(self):
        for amp, rate in self.exp_terms:
            if rate < 0:
                raise ValueError(f"exp-decay rate must be >= 0, got {rate}")

    def __call__(self, t: float) -> float:
        v = self.const
        for a, w in self.sin_terms:
            v += a * math.sin(w * t)
        for a, w in self.cos_terms:
            v += a * math.cos(w * t)
        for a, r in self.exp_terms:
            v += a * math.exp(-r * t)
        return v

    def values(self, ts):
        return [self(t) for t in ts]

    @property
    def is_constant(self) -> bool:
        return (
            all(a == 0 for a, _ in self.sin_terms)
            and all(a == 0 for a, _ in self.cos_terms)
            and all(a == 0 or r == 0 for a, r in self.exp_terms)
        )

    @property
    def is_zero(self) -> bool:
        if not self.is_constant:
            return False
        offset = sum(a for a, r in self.exp_terms if r == 0)
        return abs(self.const + offset) == 0.0

    def deriv_bound(self, t0: float, t1: float) -> float:
        """Upper bound on |f'| over [t0, t1]."""
        lip = 0.0
        for a, w in self.sin_terms:
            lip += abs(a * w)
        for a, w in self.cos_terms:
            lip += abs(a * w)
        for a, r in self.exp_terms:
            # |d/dt a e^{-rt}| = |a| r e^{-rt}, maximal at the left endpoint
            lip += abs(a) * r * math.exp(-r * t0)
        return lip

    def bounds(self, t0: float, t1: float, n: int = 257) -> tuple[float, float]:
        """Rigorous (lower, upper) bounds for f over [t0, t1]."""
        if t1 < t0:
            raise ValueError("empty time interval")
        if self.is_constant:
            v = self(t0)
            return v, v
        ts = [t0 + (t1 - t0) * i / (n - 1) for i in range(n)]
        vals = self.values(ts)
        slack = self.deriv_bound(t0, t1) * (t1 - t0) / (n - 1) / 2.0
        return min(vals) - slack, max(vals) + slack

    def inf(self, t0: float, t1: float) -> float:
        return self.bounds(t0, t1)[0]

    def sup(self, t0: float, t1: float) -> float:
        return self.bounds(t0, t1)[1]

    def __add__(self, other: "TimeFn") -> "TimeFn":
        return TimeFn(
            self.const + other.const,
            self.sin_terms + other.sin_terms,
            self.cos_terms + other.cos_terms,
            self.exp_terms + other.exp_terms,
        )

    def scaled(self, c: float) -> "TimeFn":
        return TimeFn(
            c * self.const,
            tuple((c * a, w) for a, w in self.sin_terms),
            tuple((c * a, w) for a, w in self.cos_terms),
            tuple((c * a, r) for a, r in self.exp_terms),
        )


ZERO = TimeFn()


def const(v: float) -> TimeFn:
    return TimeFn(const=float(v))


def timefn_sum(fns) -> TimeFn:
    out = ZERO
    for f in fns:
        out = out + f
    return out


def parse_timefn(obj) -> TimeFn:
    """Parse a config value into a TimeFn.

    Accepts a bare number (constant) or a mapping with optional keys
    `const`, `sin`, `cos`, `expdecay`, the latter three being lists of
    [amplitude, rate] pairs.
    """
    if isinstance(obj, TimeFn):
        return obj
    if isinstance(obj, (int, float)):
        return const(obj)
    if isinstance(obj, dict):
        known = {"const", "sin", "cos", "expdecay"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown time-function keys: {sorted(unknown)}")
        return TimeFn(
            const=float(obj.get("const", 0.0)),
            sin_terms=tuple((float(a), float(w)) for a, w in obj.get("sin", [])),
            cos_terms=tuple((float(a), float(w)) for a, w in obj.get("cos", [])),
            exp_terms=tuple((float(a), float(r)) for a, r in obj.get("expdecay", [])),
        )
    raise ValueError(f"cannot interpret {obj!r} as a time function")
