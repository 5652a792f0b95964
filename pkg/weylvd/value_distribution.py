"""Value distribution of Herglotz functions and of real functions on interval sets."""

import cmath
import dataclasses
import logging
import math
from collections.abc import Callable, Sequence

import numpy as np
from scipy import integrate

from .const import DEFAULT_D_LADDER
from .halfplane import HalfPlanePoint, IntervalUnion, theta_xy

_LOGGER = logging.getLogger(__name__)

HerglotzFunction = Callable[[complex], "HalfPlanePoint | complex"]
RealFunction = Callable[[np.ndarray], np.ndarray]

_QUAD_LIMIT = 200
_QUAD_EPSABS = 1e-10
_QUAD_EPSREL = 1e-8


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class ValueDistributionReport:
    value: float
    d_used: float
    quad_error: float
    grid_points: int
    converged: bool = True


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class SamplingPolicy:
    """Dense sampling of a real function with bisection on membership changes."""

    points: int = 2001
    refinements: int = 4
    bisection_steps: int = 48

    def __post_init__(self) -> None:
        if self.points < 2 or self.refinements < 0 or self.bisection_steps < 1:
            raise ValueError("invalid sampling policy")


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class LadderResult:
    chosen: ValueDistributionReport
    reports: tuple[ValueDistributionReport, ...]
    error_proxy: float
    stable: bool


def _require_finite_measure(a: IntervalUnion) -> None:
    if not math.isfinite(a.measure):
        raise ValueError(f"set {a} has infinite measure, truncate it first")


def _theta_of(value: "HalfPlanePoint | complex", s: IntervalUnion) -> float:
    w = complex(value)
    if not cmath.isfinite(w):
        raise QuadratureError(f"non-finite function value {w!r}")
    return theta_xy(w.real, w.imag, s)


def herglotz_value_distribution(
    f: HerglotzFunction,
    a: IntervalUnion,
    s: IntervalUnion,
    d: float,
    *,
    epsabs: float = _QUAD_EPSABS,
    epsrel: float = _QUAD_EPSREL,
    limit: int = _QUAD_LIMIT,
) -> ValueDistributionReport:
    """(1/π) ∫_A θ(F(λ + id), S) dλ by adaptive quadrature on each interval of A."""
    if not d > 0.0:
        raise ValueError(f"offset d must be positive, got {d!r}")
    _require_finite_measure(a)

    def integrand(lam: float) -> float:
        return _theta_of(f(complex(lam, d)), s)

    total = 0.0
    error = 0.0
    evaluations = 0
    converged = True
    for lo, hi in a:
        result = integrate.quad(integrand, lo, hi, full_output=1, epsabs=epsabs, epsrel=epsrel, limit=limit)
        value, abserr, info = result[:3]
        total += value
        error += abserr
        evaluations += int(info["neval"])
        if len(result) > 3:
            converged = False
            _LOGGER.warning("quadrature on [%s, %s] at d=%s did not converge: %s", lo, hi, d, result[3])

    _LOGGER.debug("value distribution at d=%s: %s (%d evaluations)", d, total / math.pi, evaluations)
    return ValueDistributionReport(
        value=total / math.pi,
        d_used=d,
        quad_error=error / math.pi,
        grid_points=evaluations,
        converged=converged,
    )


def _transitions(
    g: RealFunction, s: IntervalUnion, lo: float, hi: float, points: int, steps: int
) -> tuple[bool, np.ndarray, np.ndarray]:
    """Membership at lo, and the located points where membership flips with the state after each."""
    xs = np.linspace(lo, hi, points)
    member = s.contains_array(g(xs))
    idx = np.flatnonzero(member[:-1] != member[1:])
    left = xs[idx]
    right = xs[idx + 1]
    left_state = member[idx]
    for _ in range(steps):
        if left.size == 0:
            break
        mid = 0.5 * (left + right)
        same = s.contains_array(g(mid)) == left_state
        left = np.where(same, mid, left)
        right = np.where(same, right, mid)
    return bool(member[0]), 0.5 * (left + right), ~left_state


def _measure_on_interval(
    g: RealFunction, s: IntervalUnion, lo: float, hi: float, policy: SamplingPolicy
) -> tuple[float, int]:
    points = policy.points
    previous = -1
    measure = 0.0
    for refinement in range(policy.refinements + 1):
        first, crossings, after = _transitions(g, s, lo, hi, points, policy.bisection_steps)
        edges = np.concatenate(([lo], crossings, [hi]))
        states = np.concatenate(([first], after))
        measure = math.fsum(np.diff(edges)[states])
        if crossings.size == previous:
            return measure, points
        _LOGGER.debug("refinement %d on [%s, %s]: %d crossings", refinement, lo, hi, crossings.size)
        previous = crossings.size
        points = 2 * points - 1
    _LOGGER.warning("crossing count on [%s, %s] did not stabilise after %d refinements", lo, hi, policy.refinements)
    return measure, points


def real_function_value_distribution(
    g: RealFunction,
    a: IntervalUnion,
    s: IntervalUnion,
    grid: SamplingPolicy | None = None,
) -> float:
    """|{λ ∈ A : g(λ) ∈ S}| for a vectorised real function; NaN values count as outside S."""
    _require_finite_measure(a)
    grid = grid or SamplingPolicy()
    total = 0.0
    for lo, hi in a:
        measure, _ = _measure_on_interval(g, s, lo, hi, grid)
        total += measure
    return min(max(total, 0.0), a.measure)


def compare_value_distributions(m1: float, m2: float, a: IntervalUnion, epsilon: float, e_a_d: float) -> bool:
    if not epsilon > 0.0 or e_a_d < 0.0:
        raise ValueError("need epsilon > 0 and a non-negative error term")
    return abs(m1 - m2) <= epsilon * a.measure + 2.0 * e_a_d


def _negative_preimage(s: IntervalUnion) -> IntervalUnion:
    """{λ < 0 : -√|λ| ∈ S}."""
    pairs = [(-(lo * lo), -(hi * hi)) for lo, hi in s.intersect(IntervalUnion.negative_half())]
    return IntervalUnion.build(pairs)


def free_asymptotic_distribution(a: IntervalUnion, s: IntervalUnion) -> float:
    """(1/π) ∫_A θ(i√λ, S) dλ with the boundary convention on the negative half-line."""
    _require_finite_measure(a)
    negative = a.intersect(IntervalUnion.negative_half()).intersect(_negative_preimage(s)).measure

    def integrand(lam: float) -> float:
        return theta_xy(0.0, math.sqrt(lam), s)

    positive = 0.0
    for lo, hi in a.intersect(IntervalUnion.positive_half()):
        value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=_QUAD_LIMIT)
        positive += value / math.pi
    return negative + positive


def ladder_value_distribution(
    f: HerglotzFunction,
    a: IntervalUnion,
    s: IntervalUnion,
    d_ladder: Sequence[float] = DEFAULT_D_LADDER,
    *,
    stable_tol: float | None = None,
    limit: int = _QUAD_LIMIT,
) -> LadderResult:
    """Walk the offsets downwards and keep the smallest one whose value has settled.

    A rung is settled when it differs from the previous rung by at most ``stable_tol``
    (default 1% of |A|).
    """
    if not d_ladder or any(not d > 0.0 for d in d_ladder):
        raise ValueError("offsets must be positive")
    if any(d2 >= d1 for d1, d2 in zip(d_ladder, d_ladder[1:])):
        raise ValueError("offsets must be strictly decreasing")
    if stable_tol is None:
        stable_tol = 1e-2 * a.measure
    reports = tuple(herglotz_value_distribution(f, a, s, d, limit=limit) for d in d_ladder)
    if len(reports) == 1:
        return LadderResult(chosen=reports[0], reports=reports, error_proxy=math.nan, stable=False)

    diffs = [abs(r2.value - r1.value) for r1, r2 in zip(reports, reports[1:])]
    for idx in range(len(diffs) - 1, -1, -1):
        if diffs[idx] <= stable_tol:
            return LadderResult(chosen=reports[idx + 1], reports=reports, error_proxy=diffs[idx], stable=True)
    _LOGGER.warning("value distribution did not settle along offsets %s: changes %s", list(d_ladder), diffs)
    return LadderResult(chosen=reports[-1], reports=reports, error_proxy=diffs[-1], stable=False)


def empirical_error_proxy(f: HerglotzFunction, a: IntervalUnion, s: IntervalUnion, d: float) -> float:
    """|M_d - M_{d/10}|, standing in for the unknown error term E_A(d)."""
    coarse = herglotz_value_distribution(f, a, s, d)
    fine = herglotz_value_distribution(f, a, s, d / 10.0)
    return abs(coarse.value - fine.value)


class QuadratureError(ArithmeticError): ...
