"""Weyl m-functions of the half-line problem with Dirichlet condition at the start point."""

import dataclasses
import logging
import math

import numpy as np

from .const import DEFAULT_M_ATTEMPTS, DEFAULT_M_TOLERANCE, MIN_TAIL_LENGTH
from .halfplane import HalfPlanePoint, gamma_separation
from .ode import free_m, fundamental_system, transfer_matrices
from .potential import PotentialSpec

_LOGGER = logging.getLogger(__name__)

_TAIL_RTOL = 1e-12


def default_tail(v: PotentialSpec, z: complex, start: float) -> float:
    return min(start + max(MIN_TAIL_LENGTH, 10.0 / complex(z).imag), v.x_max)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True, eq=False)
class MFunctionRequest:
    """m^start(z; V) truncated at ``tail_x``, where the solution is seeded with f'/f = tail_seed.

    V is taken to vanish beyond x_max, so the default seed i√z is exact when tail_x = x_max.
    """

    potential: PotentialSpec
    z: complex
    start: float = 0.0
    tail_x: float | None = None
    tail_seed: HalfPlanePoint | None = None

    def __post_init__(self) -> None:
        z = HalfPlanePoint.coerce(self.z).value
        object.__setattr__(self, "z", z)
        if not 0.0 <= self.start < self.potential.x_max:
            raise ValueError(f"start {self.start!r} must lie in [0, {self.potential.x_max})")
        if self.tail_x is None:
            object.__setattr__(self, "tail_x", default_tail(self.potential, z, self.start))
        if not self.start < self.tail_x <= self.potential.x_max * (1.0 + _TAIL_RTOL):
            raise ValueError(f"tail_x {self.tail_x!r} must lie in ({self.start}, {self.potential.x_max}]")

    @classmethod
    def at_boundary(
        cls, potential: PotentialSpec, lam: float, d: float, **kwargs
    ) -> "MFunctionRequest":
        return cls(potential=potential, z=complex(lam, d), **kwargs)

    @property
    def seed(self) -> complex:
        if self.tail_seed is None:
            return free_m(self.z)
        return self.tail_seed.value

    @property
    def uses_free_seed(self) -> bool:
        return self.tail_seed is None


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class MFunctionResult:
    value: HalfPlanePoint
    diagnostic: float
    tail_x: float
    attempts: int


def seeded_m_values(
    v: PotentialSpec, zs: np.ndarray, start: float, tail_x: float, seeds: np.ndarray | None = None
) -> np.ndarray:
    """f'/f at ``start`` for the solutions with f'/f = seed at ``tail_x``, batched over zs.

    Real parameters are accepted; values are returned unchecked.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if seeds is None:
        seeds = 1j * np.sqrt(zs)
    mats, _ = transfer_matrices(v, zs, start, tail_x, backward=True)
    seeds = np.broadcast_to(np.asarray(seeds, dtype=complex), zs.shape)
    f = mats[:, 0, 0] + mats[:, 0, 1] * seeds
    fprime = mats[:, 1, 0] + mats[:, 1, 1] * seeds
    return fprime / f


def _evaluate(req: MFunctionRequest, tail_x: float, seed: complex) -> complex:
    value = seeded_m_values(req.potential, np.array([req.z]), req.start, tail_x, np.array([seed]))
    return complex(value[0])


def _extended_tail(req: MFunctionRequest, tail_x: float) -> float | None:
    extended = min(req.start + 2.0 * (tail_x - req.start), req.potential.x_max)
    if extended <= tail_x * (1.0 + _TAIL_RTOL):
        return None
    return extended


def _diagnostic(req: MFunctionRequest, tail_x: float, value: complex) -> float:
    extended = _extended_tail(req, tail_x)
    if extended is not None:
        other = _evaluate(req, extended, req.seed)
    else:
        other = _evaluate(req, tail_x, free_m(req.z))
    return gamma_separation(value, other)


def evaluate_m(
    req: MFunctionRequest,
    *,
    tol: float = DEFAULT_M_TOLERANCE,
    attempts: int = DEFAULT_M_ATTEMPTS,
) -> MFunctionResult:
    """m-function value with its convergence diagnostic, doubling the tail until it is below tol.

    A free seed placed at x_max is exact. The value is then accepted and the
    diagnostic is the separation measured by the previous attempt, or NaN if
    there was none.
    """
    tail_x = req.tail_x
    value = diagnostic = math.nan
    attempt_idx = 0
    while attempt_idx < attempts:
        value = _evaluate(req, tail_x, req.seed)
        if not value.imag > 0.0:
            raise NonConvergence(value, math.inf, tail_x)
        if req.uses_free_seed and _extended_tail(req, tail_x) is None:
            attempt_idx += 1
            _LOGGER.debug("m at z=%s start=%s: free seed at x_max, diagnostic %.3g", req.z, req.start, diagnostic)
            return MFunctionResult(
                value=HalfPlanePoint.from_complex(value),
                diagnostic=diagnostic,
                tail_x=tail_x,
                attempts=attempt_idx,
            )
        diagnostic = _diagnostic(req, tail_x, value)
        _LOGGER.debug(
            "m at z=%s start=%s tail=%s: %s (diagnostic %.3g)", req.z, req.start, tail_x, value, diagnostic
        )
        attempt_idx += 1
        if diagnostic <= tol:
            return MFunctionResult(
                value=HalfPlanePoint.from_complex(value),
                diagnostic=diagnostic,
                tail_x=tail_x,
                attempts=attempt_idx,
            )
        extended = _extended_tail(req, tail_x)
        if extended is None:
            break
        tail_x = extended

    raise NonConvergence(value, diagnostic, tail_x)


def m_function(
    req: MFunctionRequest,
    *,
    tol: float = DEFAULT_M_TOLERANCE,
    attempts: int = DEFAULT_M_ATTEMPTS,
) -> HalfPlanePoint:
    return evaluate_m(req, tol=tol, attempts=attempts).value


def m_boundary(
    req: MFunctionRequest,
    *,
    tol: float = DEFAULT_M_TOLERANCE,
    attempts: int = DEFAULT_M_ATTEMPTS,
) -> HalfPlanePoint:
    """m at λ + id; how d tends to zero is up to the caller."""
    if req.z.imag > 1.0:
        _LOGGER.warning("boundary value requested at large offset d=%s", req.z.imag)
    return m_function(req, tol=tol, attempts=attempts)


def log_derivative_at(v: PotentialSpec, z: complex, x: float) -> HalfPlanePoint:
    """-v'(x, z)/v(x, z) for v(0) = 0, v'(0) = 1."""
    if not x > 0.0:
        raise ValueError(f"need x > 0, got {x!r}")
    mat = fundamental_system(v, HalfPlanePoint.coerce(z).value, x)
    return HalfPlanePoint.from_complex(-mat.m22 / mat.m12)


def dirichlet_ratios(v: PotentialSpec, lams: np.ndarray, x: float) -> np.ndarray:
    """v'(x, λ)/v(x, λ) on a grid of real λ; NaN where v vanishes."""
    mats, _ = transfer_matrices(v, np.asarray(lams, dtype=float).astype(complex), 0.0, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (mats[:, 1, 1] / mats[:, 0, 1]).real
    return np.where(np.isfinite(ratios), ratios, np.nan)


class NonConvergence(ArithmeticError):
    def __init__(self, value: complex, diagnostic: float, tail_x: float) -> None:
        super().__init__(f"m-function did not converge (diagnostic {diagnostic:.3g} at tail {tail_x})")
        self.value = value
        self.diagnostic = diagnostic
        self.tail_x = tail_x
