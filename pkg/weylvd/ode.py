"""Propagation of solutions of -f'' + V f = z f across piecewise-constant cells.

States and matrices carry ``log_scale``; the true value is ``stored * exp(log_scale)``.
"""

import cmath
import dataclasses
import logging
import math

import numpy as np
from scipy import integrate

from .halfplane import HalfPlanePoint
from .potential import PotentialSpec

_LOGGER = logging.getLogger(__name__)

_SERIES_CUTOFF = 1e-4
_RENORM_LOW = 0.5
_RENORM_HIGH = 2.0
_EDGE_RTOL = 1e-12
_BATCH_ELEMENTS = 1_000_000


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class SolutionPair:
    f: complex
    fprime: complex
    log_scale: float = 0.0

    def __post_init__(self) -> None:
        if self.f == 0 and self.fprime == 0:
            raise ValueError("the zero state is not a solution")
        if not (cmath.isfinite(self.f) and cmath.isfinite(self.fprime) and math.isfinite(self.log_scale)):
            raise PropagationError("non-finite solution state")

    @classmethod
    def dirichlet(cls) -> "SolutionPair":
        """Initial data of v: v(0) = 0, v'(0) = 1."""
        return cls(f=0j, fprime=1 + 0j)

    @classmethod
    def neumann(cls) -> "SolutionPair":
        """Initial data of u: u(0) = 1, u'(0) = 0."""
        return cls(f=1 + 0j, fprime=0j)

    @classmethod
    def with_log_derivative(cls, w: complex) -> "SolutionPair":
        """State with -f'/f = w."""
        return cls(f=1 + 0j, fprime=-complex(w))

    @property
    def ratio(self) -> complex:
        return self.fprime / self.f

    def renormalized(self) -> "SolutionPair":
        mag = max(abs(self.f), abs(self.fprime))
        if _RENORM_LOW <= mag <= _RENORM_HIGH:
            return self
        return SolutionPair(
            f=self.f / mag, fprime=self.fprime / mag, log_scale=self.log_scale + math.log(mag)
        )


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class TransferMatrix:
    """Maps (f, f') at one point to (f, f') at another; columns of the
    fundamental system are (u, u') and (v, v')."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex
    log_scale: float = 0.0

    @classmethod
    def identity(cls) -> "TransferMatrix":
        return cls(m11=1 + 0j, m12=0j, m21=0j, m22=1 + 0j)

    @classmethod
    def from_array(cls, arr: np.ndarray, log_scale: float = 0.0) -> "TransferMatrix":
        arr = np.asarray(arr, dtype=complex)
        scale = float(np.abs(arr).max())
        if not math.isfinite(scale) or scale == 0.0:
            raise PropagationError("degenerate transfer matrix")
        arr = arr / scale
        return cls(
            m11=complex(arr[0, 0]),
            m12=complex(arr[0, 1]),
            m21=complex(arr[1, 0]),
            m22=complex(arr[1, 1]),
            log_scale=log_scale + math.log(scale),
        )

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def scaled_array(self) -> np.ndarray:
        return self.as_array() * math.exp(self.log_scale)

    @property
    def determinant(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def unimodularity_error(self) -> float:
        return abs(self.determinant * cmath.exp(2.0 * self.log_scale) - 1.0)

    def norm(self) -> float:
        return float(np.linalg.svd(self.as_array(), compute_uv=False)[0]) * math.exp(self.log_scale)

    def apply(self, state: SolutionPair) -> SolutionPair:
        f = self.m11 * state.f + self.m12 * state.fprime
        fp = self.m21 * state.f + self.m22 * state.fprime
        return SolutionPair(f=f, fprime=fp, log_scale=state.log_scale + self.log_scale).renormalized()


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True, eq=False)
class Orbit:
    """A solution sampled at the left end, midpoint and right end of every cell, scaled by ``log_scale``."""

    edges: np.ndarray
    potential: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    log_scale: float

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def end(self) -> SolutionPair:
        return SolutionPair(f=complex(self.f[-1, 2]), fprime=complex(self.fprime[-1, 2]), log_scale=self.log_scale)

    def nodes(self) -> np.ndarray:
        return self.edges[:-1, None] + self.lengths[:, None] * np.array([0.0, 0.5, 1.0])

    def l2(self) -> tuple[float, float]:
        """Scaled ∫|f|² with an error estimate."""
        return cellwise_simpson(np.abs(self.f) ** 2, self.lengths)


def principal_sqrt(z: complex) -> complex:
    """√z = a + ib with a, b > 0 for Im z > 0."""
    return cmath.sqrt(complex(z))


def free_m(z: complex) -> complex:
    """i√z, the m-function of the zero potential."""
    return 1j * principal_sqrt(z)


def _require_upper(z: complex) -> complex:
    z = complex(z)
    if not (z.imag > 0.0 and cmath.isfinite(z)):
        raise ValueError(f"spectral parameter must satisfy Im z > 0, got {z!r}")
    return z


def segments(v: PotentialSpec, x_from: float, x_to: float) -> tuple[np.ndarray, np.ndarray]:
    """Cell values and cell lengths between x_from and x_to, partial end cells included."""
    values, hc = v.propagation_cells()
    if not (0.0 <= x_from <= x_to <= v.x_max * (1.0 + _EDGE_RTOL)):
        raise ValueError(f"range [{x_from}, {x_to}] is not inside [0, {v.x_max}]")
    x_to = min(x_to, v.x_max)
    n = values.size
    if x_to - x_from <= _EDGE_RTOL * hc:
        return values[:0], np.zeros(0)
    i0 = min(max(math.floor(x_from / hc * (1.0 + _EDGE_RTOL)), 0), n - 1)
    i1 = min(max(math.ceil(x_to / hc * (1.0 - _EDGE_RTOL)), i0 + 1), n)
    edges = hc * np.arange(i0, i1 + 1, dtype=float)
    edges[0] = x_from
    edges[-1] = x_to
    lengths = np.diff(edges)
    keep = lengths > _EDGE_RTOL * hc
    return values[i0:i1][keep], lengths[keep]


def _cell_coefficients(
    values: np.ndarray, lengths: np.ndarray, zs: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k2 = np.asarray(zs, dtype=complex)[..., None] - values
    w2 = k2 * lengths**2
    small = np.abs(w2) < _SERIES_CUTOFF
    w = np.sqrt(np.where(small, 1.0, w2))
    with np.errstate(over="ignore", invalid="ignore"):
        cos_w = np.where(small, 1.0 - w2 / 2.0 + w2**2 / 24.0 - w2**3 / 720.0, np.cos(w))
        sinc_w = np.where(small, 1.0 - w2 / 6.0 + w2**2 / 120.0 - w2**3 / 5040.0, np.sin(w) / w)
    if not (np.all(np.isfinite(cos_w)) and np.all(np.isfinite(sinc_w))):
        raise PropagationError("cell propagator overflow, refine the grid")
    return cos_w, lengths * sinc_w, -k2 * lengths * sinc_w


def _cell_matrices(values: np.ndarray, lengths: np.ndarray, zs: np.ndarray, *, backward: bool) -> np.ndarray:
    cos_w, upper, lower = _cell_coefficients(values, lengths, zs)
    sign = -1.0 if backward else 1.0
    mats = np.empty(cos_w.shape + (2, 2), dtype=complex)
    mats[..., 0, 0] = cos_w
    mats[..., 0, 1] = sign * upper
    mats[..., 1, 0] = sign * lower
    mats[..., 1, 1] = cos_w
    return mats


def _chain(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalised product mats[..., n-1] @ ... @ mats[..., 0] and its log scale."""
    batch = mats.shape[:-3]
    logs = np.zeros(mats.shape[:-2])
    if mats.shape[-3] == 0:
        eye = np.broadcast_to(np.eye(2, dtype=complex), batch + (2, 2)).copy()
        return eye, np.zeros(batch)
    while mats.shape[-3] > 1:
        if mats.shape[-3] % 2:
            pad = np.broadcast_to(np.eye(2, dtype=complex), batch + (1, 2, 2))
            mats = np.concatenate((mats, pad), axis=-3)
            logs = np.concatenate((logs, np.zeros(batch + (1,))), axis=-1)
        prod = mats[..., 1::2, :, :] @ mats[..., 0::2, :, :]
        logs = logs[..., 1::2] + logs[..., 0::2]
        scale = np.abs(prod).max(axis=(-2, -1))
        mats = prod / scale[..., None, None]
        logs = logs + np.log(scale)
    mat = mats[..., 0, :, :]
    scale = np.abs(mat).max(axis=(-2, -1))
    return mat / scale[..., None, None], logs[..., 0] + np.log(scale)


def transfer_matrices(
    v: PotentialSpec,
    zs: np.ndarray,
    x_from: float,
    x_to: float,
    *,
    backward: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalised transfer matrices over [x_from, x_to] for many spectral parameters.

    With ``backward`` the matrices map the state at x_to to the state at x_from.
    Real parameters are allowed here.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    values, lengths = segments(v, x_from, x_to)
    if backward:
        values, lengths = values[::-1], lengths[::-1]
    chunk = max(1, _BATCH_ELEMENTS // max(1, values.size))
    out_mats = np.empty((zs.size, 2, 2), dtype=complex)
    out_logs = np.empty(zs.size)
    for start in range(0, zs.size, chunk):
        part = zs[start : start + chunk]
        mats = _cell_matrices(values, lengths, part, backward=backward)
        out_mats[start : start + chunk], out_logs[start : start + chunk] = _chain(mats)
    return out_mats, out_logs


def transfer_matrix(v: PotentialSpec, z: complex, x_from: float, x_to: float) -> TransferMatrix:
    mats, logs = transfer_matrices(v, np.array([complex(z)]), x_from, x_to)
    return TransferMatrix.from_array(mats[0], float(logs[0]))


def fundamental_system(v: PotentialSpec, z: complex, x: float) -> TransferMatrix:
    return transfer_matrix(v, z, 0.0, x)


def propagate(
    v: PotentialSpec, z: complex, x_from: float, x_to: float, state: SolutionPair
) -> SolutionPair:
    z = _require_upper(z)
    if not x_from < x_to:
        raise ValueError(f"need x_from < x_to, got {x_from}, {x_to}")
    values, lengths = segments(v, x_from, x_to)
    cos_w, upper, lower = _cell_coefficients(values, lengths, np.array(z))
    f, fp, log_scale = state.f, state.fprime, state.log_scale
    for c, s12, s21 in zip(cos_w.tolist(), upper.tolist(), lower.tolist(), strict=True):
        f, fp = c * f + s12 * fp, s21 * f + c * fp
        mag = max(abs(f), abs(fp))
        if mag > _RENORM_HIGH or mag < _RENORM_LOW:
            f /= mag
            fp /= mag
            log_scale += math.log(mag)
    return SolutionPair(f=f, fprime=fp, log_scale=log_scale)


def orbit(
    v: PotentialSpec, z: complex, x_to: float, state: SolutionPair, *, x_from: float = 0.0
) -> Orbit:
    values, lengths = segments(v, x_from, x_to)
    half = np.repeat(lengths / 2.0, 2)
    cos_w, upper, lower = _cell_coefficients(np.repeat(values, 2), half, np.array(complex(z)))

    f, fp, log_scale = state.f, state.fprime, state.log_scale
    fs, fps, logs = [f], [fp], [log_scale]
    for c, s12, s21 in zip(cos_w.tolist(), upper.tolist(), lower.tolist(), strict=True):
        f, fp = c * f + s12 * fp, s21 * f + c * fp
        mag = max(abs(f), abs(fp))
        if mag > _RENORM_HIGH or mag < _RENORM_LOW:
            f /= mag
            fp /= mag
            log_scale += math.log(mag)
        fs.append(f)
        fps.append(fp)
        logs.append(log_scale)

    weight = np.exp(np.array(logs) - log_scale)
    f_all = np.array(fs) * weight
    fp_all = np.array(fps) * weight
    edges = np.concatenate(([x_from], x_from + np.cumsum(lengths)))

    def by_cell(arr: np.ndarray) -> np.ndarray:
        return np.stack((arr[0:-1:2], arr[1::2], arr[2::2]), axis=-1)

    return Orbit(
        edges=edges,
        potential=values,
        f=by_cell(f_all),
        fprime=by_cell(fp_all),
        log_scale=log_scale,
    )


def cellwise_simpson(values: np.ndarray, lengths: np.ndarray) -> tuple[float, float]:
    """Simpson's rule per cell on (left, mid, right) samples, with an error estimate."""
    values = np.asarray(values)
    if lengths.size == 0:
        return 0.0, 0.0
    nodes = lengths[:, None] * np.array([0.0, 0.5, 1.0])
    simpson = integrate.simpson(values, x=nodes, axis=-1)
    trapezoid = 0.25 * lengths * (values[:, 0] + 2.0 * values[:, 1] + values[:, 2])
    total = math.fsum(simpson)
    return total, abs(math.fsum(simpson - trapezoid))


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class WeightedIntegrals:
    """∫(V-Ṽ)²|ṽ|², ∫|ṽ|² and ∫|v|² over [0, x].

    Integrals of ṽ are stored relative to exp(2 vtilde_log_scale), those of v
    relative to exp(2 v_log_scale).
    """

    mismatch: float
    vtilde_l2: float
    v_l2: float
    mismatch_error: float
    vtilde_l2_error: float
    v_l2_error: float
    vtilde_log_scale: float
    v_log_scale: float

    @property
    def mismatch_ratio(self) -> float:
        """(∫(V-Ṽ)²|ṽ|² / ∫|ṽ|²)^{1/2}, free of scaling."""
        return math.sqrt(self.mismatch / self.vtilde_l2)

    def true_vtilde_l2(self) -> float:
        return _rescale(self.vtilde_l2, 2.0 * self.vtilde_log_scale)


def _rescale(value: float, log_factor: float) -> float:
    try:
        return value * math.exp(log_factor)
    except OverflowError:
        return math.inf


def weighted_l2_integrals(
    v: PotentialSpec, vtilde: PotentialSpec, z: complex, x: float
) -> WeightedIntegrals:
    z = _require_upper(z)
    if not v.same_grid(vtilde):
        raise IncompatibleGrid("both potentials must share one grid")
    orbit_v = orbit(v, z, x, SolutionPair.dirichlet())
    orbit_t = orbit(vtilde, z, x, SolutionPair.dirichlet())
    diff2 = (orbit_v.potential - orbit_t.potential) ** 2
    vt2 = np.abs(orbit_t.f) ** 2
    mismatch, mismatch_err = cellwise_simpson(diff2[:, None] * vt2, orbit_t.lengths)
    vtilde_l2, vtilde_err = cellwise_simpson(vt2, orbit_t.lengths)
    v_l2, v_err = orbit_v.l2()
    for value in (mismatch, vtilde_l2, v_l2):
        if not math.isfinite(value):
            raise PropagationError("non-finite weighted integral")
    return WeightedIntegrals(
        mismatch=mismatch,
        vtilde_l2=vtilde_l2,
        v_l2=v_l2,
        mismatch_error=mismatch_err,
        vtilde_l2_error=vtilde_err,
        v_l2_error=v_err,
        vtilde_log_scale=orbit_t.log_scale,
        v_log_scale=orbit_v.log_scale,
    )


def lagrange_identity_terms(
    v: PotentialSpec, vtilde: PotentialSpec, z: complex, x: float
) -> tuple[complex, complex]:
    """(ṽv' - vṽ')(x) and ∫_0^x (V-Ṽ) v ṽ, both scaled by the same factor."""
    if not v.same_grid(vtilde):
        raise IncompatibleGrid("both potentials must share one grid")
    orbit_v = orbit(v, z, x, SolutionPair.dirichlet())
    orbit_t = orbit(vtilde, z, x, SolutionPair.dirichlet())
    end_v, end_t = orbit_v.end, orbit_t.end
    wronskian = end_t.f * end_v.fprime - end_v.f * end_t.fprime
    diff = (orbit_v.potential - orbit_t.potential)[:, None]
    real, _ = cellwise_simpson((diff * orbit_v.f * orbit_t.f).real, orbit_v.lengths)
    imag, _ = cellwise_simpson((diff * orbit_v.f * orbit_t.f).imag, orbit_v.lengths)
    return wronskian, complex(real, imag)


def im_ubar_v_integral(v: PotentialSpec, z: complex, n: float) -> float:
    z = _require_upper(z)
    if not 0.0 < n <= v.x_max * (1.0 + _EDGE_RTOL):
        raise ValueError(f"need 0 < n <= x_max, got {n!r}")
    orbit_u = orbit(v, z, n, SolutionPair.neumann())
    orbit_v = orbit(v, z, n, SolutionPair.dirichlet())
    value, _ = cellwise_simpson(np.imag(np.conj(orbit_u.f) * orbit_v.f), orbit_v.lengths)
    result = _rescale(value, orbit_u.log_scale + orbit_v.log_scale)
    if math.isnan(result):
        raise PropagationError("non-finite Im(ū v) integral")
    return result


def free_fundamental(z: complex, x: float | np.ndarray) -> tuple[np.ndarray, ...]:
    """(u0, u0', v0, v0') of the zero potential."""
    k = principal_sqrt(z)
    w = k * np.asarray(x, dtype=float)
    return np.cos(w), -k * np.sin(w), np.sin(w) / k, np.cos(w)


def free_transfer_matrix(z: complex, x: float) -> TransferMatrix:
    u0, du0, v0, dv0 = free_fundamental(z, x)
    return TransferMatrix.from_array(np.array([[u0, v0], [du0, dv0]]))


def free_log_derivative(z: complex, x: float) -> HalfPlanePoint:
    z = _require_upper(z)
    if not x > 0.0:
        raise ValueError(f"need x > 0, got {x!r}")
    k = principal_sqrt(z)
    a, b = k.real, k.imag
    q = cmath.exp(2j * a * x) * math.exp(-2.0 * b * x)
    return HalfPlanePoint.from_complex((1j * a - b) * (1.0 + q) / (1.0 - q))


def free_gamma_to_limit(z: complex, x: float) -> float:
    """γ(-v0'/v0, i√z) at x from its closed form."""
    k = principal_sqrt(z)
    a, b = k.real, k.imag
    decay = math.exp(-2.0 * b * x)
    denom = -0.5 * a * math.expm1(-4.0 * b * x) - b * math.sin(2.0 * a * x) * decay
    return math.sqrt(2.0 * (a * a + b * b) / a) * decay / math.sqrt(denom)


def free_l2_integral(z: complex, x: float) -> float:
    k = principal_sqrt(z)
    a, b = k.real, k.imag
    return (math.sinh(2.0 * b * x) / (2.0 * b) - math.sin(2.0 * a * x) / (2.0 * a)) / (2.0 * (a * a + b * b))


def free_im_ubar_v_integral(z: complex, n: float) -> float:
    """∫_0^n Im(ū0 v0) by adaptive quadrature of the closed forms."""
    z = _require_upper(z)

    def integrand(t: float) -> float:
        u0, _, v0, _ = free_fundamental(z, t)
        return float(np.imag(np.conj(u0) * v0))

    value, _ = integrate.quad(integrand, 0.0, n, limit=400, epsabs=0.0, epsrel=1e-12)
    return value


class PropagationError(ArithmeticError): ...


class IncompatibleGrid(ValueError): ...
