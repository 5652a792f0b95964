"""Geometry of the upper half-plane and interval unions on the real line."""

import dataclasses
import math
import re
from collections.abc import Iterable, Iterator

import numpy as np

_HALF_PI = 0.5 * math.pi

_INTERVAL_RE = re.compile(r"^\s*([\[(])\s*([^,\s]+)\s*,\s*([^,\s\])]+)\s*([\])])\s*$")


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class HalfPlanePoint:
    re: float
    im: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise OutsideHalfPlane(f"non-finite point {self.re!r} + {self.im!r}i")
        if self.im <= 0.0:
            raise OutsideHalfPlane(f"point {self.re!r} + {self.im!r}i is not in the upper half-plane")

    @classmethod
    def from_complex(cls, value: complex) -> "HalfPlanePoint":
        value = complex(value)
        return cls(re=value.real, im=value.imag)

    @classmethod
    def coerce(cls, value: "HalfPlanePoint | complex") -> "HalfPlanePoint":
        if isinstance(value, HalfPlanePoint):
            return value
        return cls.from_complex(value)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return self.value


@dataclasses.dataclass(frozen=True, slots=True)
class IntervalUnion:
    """Finite disjoint union of real intervals, sorted.

    Infinite endpoints are only allowed as the lower end of the first interval
    or the upper end of the last one; they encode the half-line tails.
    Endpoints are open/closed agnostic.
    """

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        prev_hi = -math.inf
        for idx, (lo, hi) in enumerate(self.intervals):
            if math.isnan(lo) or math.isnan(hi):
                raise InvalidInterval("interval endpoints must not be NaN")
            if not lo < hi:
                raise InvalidInterval(f"empty or inverted interval ({lo}, {hi})")
            if idx > 0 and lo < prev_hi:
                raise InvalidInterval("intervals must be sorted and pairwise disjoint")
            if lo == math.inf or hi == -math.inf:
                raise InvalidInterval(f"invalid interval ({lo}, {hi})")
            if idx > 0 and lo == -math.inf:
                raise InvalidInterval("only the first interval may start at -inf")
            prev_hi = hi
        if any(hi == math.inf for _, hi in self.intervals[:-1]):
            raise InvalidInterval("only the last interval may extend to +inf")

    @classmethod
    def build(cls, pairs: Iterable[tuple[float, float]]) -> "IntervalUnion":
        """Normalise arbitrary pairs: sort, drop empty ones, merge overlaps."""
        cleaned = sorted((float(lo), float(hi)) for lo, hi in pairs if lo < hi)
        merged: list[tuple[float, float]] = []
        for lo, hi in cleaned:
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        return cls(tuple(merged))

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def real_line(cls) -> "IntervalUnion":
        return cls(((-math.inf, math.inf),))

    @classmethod
    def positive_half(cls) -> "IntervalUnion":
        return cls(((0.0, math.inf),))

    @classmethod
    def negative_half(cls) -> "IntervalUnion":
        return cls(((-math.inf, 0.0),))

    @classmethod
    def parse(cls, text: str) -> "IntervalUnion":
        """Parse ``[1, 2] + (3, inf)``; ``empty`` or a blank string is the empty set."""
        text = text.strip()
        if not text or text.lower() == "empty":
            return cls.empty()
        pairs = []
        for part in text.split("+"):
            match = _INTERVAL_RE.match(part)
            if match is None:
                raise InvalidInterval(f"cannot parse interval {part.strip()!r}")
            try:
                lo, hi = float(match.group(2)), float(match.group(3))
            except ValueError as exc:
                raise InvalidInterval(f"invalid endpoint in {part.strip()!r}") from exc
            if not lo < hi:
                raise InvalidInterval(f"empty or inverted interval {part.strip()!r}")
            pairs.append((lo, hi))
        return cls.build(pairs)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __str__(self) -> str:
        if not self.intervals:
            return "empty"
        return " + ".join(f"[{lo:g}, {hi:g}]" for lo, hi in self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def contains_minus_infinity_tail(self) -> bool:
        return bool(self.intervals) and self.intervals[0][0] == -math.inf

    @property
    def contains_plus_infinity_tail(self) -> bool:
        return bool(self.intervals) and self.intervals[-1][1] == math.inf

    @property
    def measure(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)

    @property
    def lower(self) -> float:
        return self.intervals[0][0] if self.intervals else math.nan

    @property
    def upper(self) -> float:
        return self.intervals[-1][1] if self.intervals else math.nan

    def negate(self) -> "IntervalUnion":
        return IntervalUnion(tuple((-hi, -lo) for lo, hi in reversed(self.intervals)))

    def complement(self) -> "IntervalUnion":
        pairs = []
        prev = -math.inf
        for lo, hi in self.intervals:
            if prev < lo:
                pairs.append((prev, lo))
            prev = hi
        if not self.contains_plus_infinity_tail:
            pairs.append((prev, math.inf))
        return IntervalUnion(tuple(pairs))

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        pairs = []
        i = j = 0
        while i < len(self.intervals) and j < len(other.intervals):
            lo = max(self.intervals[i][0], other.intervals[j][0])
            hi = min(self.intervals[i][1], other.intervals[j][1])
            if lo < hi:
                pairs.append((lo, hi))
            if self.intervals[i][1] < other.intervals[j][1]:
                i += 1
            else:
                j += 1
        return IntervalUnion.build(pairs)

    def truncate(self, bound: float) -> "IntervalUnion":
        """Intersect with [-bound, bound]."""
        return self.intersect(IntervalUnion(((-bound, bound),)))

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def contains_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        mask = np.zeros(xs.shape, dtype=bool)
        for lo, hi in self.intervals:
            mask |= (xs >= lo) & (xs <= hi)
        return mask


def gamma_separation(z1: HalfPlanePoint | complex, z2: HalfPlanePoint | complex) -> float:
    p1 = HalfPlanePoint.coerce(z1)
    p2 = HalfPlanePoint.coerce(z2)
    return abs(p1.value - p2.value) / math.sqrt(p1.im * p2.im)


def hyperbolic_distance(z1: HalfPlanePoint | complex, z2: HalfPlanePoint | complex) -> float:
    return 2.0 * math.asinh(0.5 * gamma_separation(z1, z2))


def _edge_angle(t: float, x: float, y: float) -> float:
    if t == math.inf:
        return _HALF_PI
    if t == -math.inf:
        return -_HALF_PI
    return math.atan((t - x) / y)


def theta_xy(x: float, y: float, s: IntervalUnion) -> float:
    """Angle subtended by ``s`` at x + iy, with the boundary convention for y <= 0."""
    if y <= 0.0:
        return theta_boundary(x, s)
    total = math.fsum(_edge_angle(hi, x, y) - _edge_angle(lo, x, y) for lo, hi in s)
    return min(max(total, 0.0), math.pi)


def theta_angle(z: HalfPlanePoint | complex, s: IntervalUnion) -> float:
    p = HalfPlanePoint.coerce(z)
    return theta_xy(p.re, p.im, s)


def theta_boundary(lam: float, s: IntervalUnion) -> float:
    return math.pi if s.contains(lam) else 0.0


def quasi_triangle_bound(alpha: float, beta: float) -> float:
    """Upper bound on γ(z1, z3) given γ(z1, z2) < alpha and γ(z2, z3) < beta."""
    if not (0.0 < alpha <= 2.0 and 0.0 < beta <= 2.0):
        raise ValueError(f"alpha and beta must lie in (0, 2], got {alpha!r}, {beta!r}")
    return math.sqrt(2.0) * (alpha + beta)


class OutsideHalfPlane(ValueError): ...


class InvalidInterval(ValueError): ...
