"""Grid-sampled potentials, window norms and the sparse potential families."""

import csv
import dataclasses
import logging
import math
from collections.abc import Iterator
from pathlib import Path
from typing import Literal

import numpy as np

from .const import CSV_FLOAT_FORMAT, LINEAR_REFINEMENT

_LOGGER = logging.getLogger(__name__)

Interpolation = Literal["constant", "linear"]
BumpShape = Literal["rectangular", "raised_cosine"]

_SPACING_RTOL = 1e-9
_EDGE_RTOL = 1e-12


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True, eq=False)
class PotentialSpec:
    """Real potential on [0, x_max] given by uniform samples.

    With ``constant`` interpolation sample ``i`` holds on the cell [i h, (i+1) h);
    the last sample is only the value at ``x_max``. With ``linear`` interpolation
    the samples are joined by straight lines.
    """

    samples: np.ndarray
    h: float
    interpolation: Interpolation = "constant"

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise InvalidPotential("a potential needs at least two samples")
        if not np.all(np.isfinite(samples)):
            raise InvalidPotential("potential samples must be finite")
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise InvalidPotential(f"grid spacing must be positive, got {self.h!r}")
        if self.interpolation not in ("constant", "linear"):
            raise InvalidPotential(f"unknown interpolation {self.interpolation!r}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def zero(cls, x_max: float, h: float) -> "PotentialSpec":
        return cls(samples=np.zeros(_sample_count(x_max, h)), h=h)

    @classmethod
    def constant(cls, value: float, x_max: float, h: float) -> "PotentialSpec":
        return cls(samples=np.full(_sample_count(x_max, h), float(value)), h=h)

    @classmethod
    def from_function(
        cls, func, x_max: float, h: float, *, interpolation: Interpolation = "linear"
    ) -> "PotentialSpec":
        grid = h * np.arange(_sample_count(x_max, h))
        return cls(samples=np.asarray(func(grid), dtype=float), h=h, interpolation=interpolation)

    @property
    def size(self) -> int:
        return int(self.samples.size)

    @property
    def x_max(self) -> float:
        return self.h * (self.size - 1)

    @property
    def grid(self) -> np.ndarray:
        return self.h * np.arange(self.size)

    def evaluate(self, x: float | np.ndarray) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        if self.interpolation == "linear":
            return np.interp(xs, self.grid, self.samples)
        idx = np.floor(xs / self.h * (1.0 + _EDGE_RTOL)).astype(int)
        return self.samples[np.clip(idx, 0, self.size - 1)]

    def shifted(self, offset: float) -> "PotentialSpec":
        return dataclasses.replace(self, samples=self.samples + offset)

    def scaled(self, factor: float) -> "PotentialSpec":
        return dataclasses.replace(self, samples=self.samples * factor)

    def resampled(self, h: float, x_max: float | None = None) -> "PotentialSpec":
        x_max = self.x_max if x_max is None else x_max
        grid = h * np.arange(_sample_count(x_max, h))
        return PotentialSpec(samples=self.evaluate(grid), h=h, interpolation=self.interpolation)

    def translated(self, offset: float) -> "PotentialSpec":
        """The potential x -> V(x + offset), on [0, x_max - offset]."""
        steps = offset / self.h
        if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)):
            raise InvalidWindow(f"offset {offset!r} is not a multiple of the grid spacing")
        first = int(round(steps))
        if not 0 <= first < self.size - 1:
            raise InvalidWindow(f"offset {offset!r} outside [0, x_max)")
        return dataclasses.replace(self, samples=self.samples[first:])

    def propagation_cells(self) -> tuple[np.ndarray, float]:
        """Piecewise-constant cell values and cell width used by the propagator."""
        if self.interpolation == "constant":
            return self.samples[:-1], self.h
        sub_h = self.h / LINEAR_REFINEMENT
        mids = sub_h * (np.arange((self.size - 1) * LINEAR_REFINEMENT) + 0.5)
        return np.interp(mids, self.grid, self.samples), sub_h

    def same_grid(self, other: "PotentialSpec") -> bool:
        return (
            self.size == other.size
            and self.interpolation == other.interpolation
            and math.isclose(self.h, other.h, rel_tol=_SPACING_RTOL)
        )

    def digest_bytes(self) -> bytes:
        return b"|".join(
            (self.interpolation.encode(), repr(self.h).encode(), self.samples.tobytes())
        )


@dataclasses.dataclass(frozen=True, slots=True)
class SparseWindowSequence:
    """Ordered windows (a_k, b_k) on which a potential is small in L²."""

    windows: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        prev_a = -math.inf
        for a, b in self.windows:
            if not (0.0 <= a < b):
                raise InvalidWindowSequence(f"invalid window ({a}, {b})")
            if a < prev_a:
                raise InvalidWindowSequence("windows must be ordered by their left end")
            prev_a = a

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.windows)

    def __len__(self) -> int:
        return len(self.windows)

    def __getitem__(self, idx: int) -> tuple[float, float]:
        return self.windows[idx]

    @property
    def lengths(self) -> np.ndarray:
        return np.array([b - a for a, b in self.windows])

    def masses(self, v: PotentialSpec) -> np.ndarray:
        return np.array([window_norm(v, a, b, 2) for a, b in self.windows])

    def validate(self, v: PotentialSpec, *, atol: float = 1e-12) -> None:
        """Check the sparse-sequence shape: lengths increasing, masses non-increasing."""
        for a, b in self.windows:
            if b > v.x_max * (1.0 + _EDGE_RTOL):
                raise InvalidWindowSequence(f"window ({a}, {b}) exceeds x_max={v.x_max}")
        lengths = self.lengths
        if np.any(np.diff(lengths) <= 0.0):
            raise InvalidWindowSequence(f"window lengths are not increasing: {lengths}")
        masses = self.masses(v)
        if np.any(np.diff(masses) > atol):
            raise InvalidWindowSequence(f"window masses are not decreasing: {masses}")

    def monotone_subsequence(self, v: PotentialSpec) -> "SparseWindowSequence":
        """Greedy subsequence with growing lengths and non-increasing masses; passes ``validate``."""
        kept: list[tuple[float, float]] = []
        last_mass = math.inf
        for (a, b), mass in zip(self.windows, self.masses(v), strict=True):
            if mass <= last_mass and (not kept or b - a > kept[-1][1] - kept[-1][0]):
                kept.append((a, b))
                last_mass = mass
        return SparseWindowSequence(tuple(kept))


def _sample_count(x_max: float, h: float) -> int:
    if not (x_max > 0.0 and h > 0.0):
        raise InvalidPotential(f"need x_max > 0 and h > 0, got {x_max!r}, {h!r}")
    cells = x_max / h
    rounded = round(cells)
    if abs(cells - rounded) > 1e-9 * max(1.0, cells):
        raise InvalidPotential(f"x_max={x_max} is not a multiple of h={h}")
    return int(rounded) + 1


def _check_window(v: PotentialSpec, a: float, b: float) -> None:
    if not (0.0 <= a < b <= v.x_max * (1.0 + _EDGE_RTOL)):
        raise InvalidWindow(f"window ({a}, {b}) is not inside [0, {v.x_max}]")


def _linear_cell_integrals(fs: np.ndarray, ft: np.ndarray, width: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        return width * (fs * fs + fs * ft + ft * ft) / 3.0
    same_sign = fs * ft >= 0.0
    abs_sum = np.abs(fs) + np.abs(ft)
    with np.errstate(invalid="ignore", divide="ignore"):
        crossing = width * (fs * fs + ft * ft) / (2.0 * abs_sum)
    return np.where(same_sign, 0.5 * width * abs_sum, np.nan_to_num(crossing))


def window_norm(v: PotentialSpec, a: float, b: float, p: int) -> float:
    """∫_a^b |V|^p dx, exact for the declared interpolation."""
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p!r}")
    _check_window(v, a, b)
    b = min(b, v.x_max)
    left = v.grid[:-1]
    right = v.grid[1:]
    lo = np.maximum(left, a)
    hi = np.minimum(right, b)
    width = np.clip(hi - lo, 0.0, None)
    if v.interpolation == "constant":
        return float(math.fsum(np.abs(v.samples[:-1]) ** p * width))
    active = width > 0.0
    fs = v.evaluate(lo[active])
    ft = v.evaluate(hi[active])
    return float(math.fsum(_linear_cell_integrals(fs, ft, width[active], p)))


def cumulative_norm(v: PotentialSpec, p: int) -> np.ndarray:
    """∫_0^{x_i} |V|^p at every grid point x_i."""
    if v.interpolation == "constant":
        per_cell = np.abs(v.samples[:-1]) ** p * v.h
    else:
        width = np.full(v.size - 1, v.h)
        per_cell = _linear_cell_integrals(v.samples[:-1], v.samples[1:], width, p)
    return np.concatenate(([0.0], np.cumsum(per_cell)))


def make_sparse_bump_train(
    bump_height: float,
    bump_width: float,
    gap_growth: float,
    count: int,
    *,
    first_gap: float = 10.0,
    h: float | None = None,
    shape: BumpShape = "rectangular",
) -> tuple[PotentialSpec, SparseWindowSequence]:
    """Bumps separated by geometrically growing gaps; the gaps are the windows.

    Layout: bump 1 starts at 0, gap k follows bump k, the last gap ends at x_max.
    Bump and gap edges are snapped to the grid so every window carries zero mass.
    """
    if not (bump_width > 0.0 and gap_growth > 1.0 and first_gap > 0.0):
        raise InvalidPotential("bump_width, first_gap must be > 0 and gap_growth > 1")
    if count < 1:
        raise InvalidPotential(f"count must be >= 1, got {count!r}")
    if not math.isfinite(bump_height):
        raise InvalidPotential("bump_height must be finite")
    if h is None:
        h = bump_width / (4 if shape == "rectangular" else 16)

    width_cells = max(1, round(bump_width / h))
    gap_cells = [max(1, round(first_gap * gap_growth**k / h)) for k in range(count)]
    total = count * width_cells + sum(gap_cells)
    samples = np.zeros(total + 1)
    if shape == "rectangular":
        profile = np.full(width_cells, float(bump_height))
    elif shape == "raised_cosine":
        phase = (np.arange(width_cells) + 0.5) / width_cells
        profile = 0.5 * bump_height * (1.0 - np.cos(2.0 * math.pi * phase))
    else:
        raise InvalidPotential(f"unknown bump shape {shape!r}")

    windows = []
    cursor = 0
    for gap in gap_cells:
        samples[cursor : cursor + width_cells] = profile
        cursor += width_cells
        windows.append((cursor * h, (cursor + gap) * h))
        cursor += gap
    _LOGGER.debug("bump train with %d bumps on [0, %s]", count, total * h)
    return PotentialSpec(samples=samples, h=h), SparseWindowSequence(tuple(windows))


def make_l2_sparse(base: PotentialSpec, perturbation: PotentialSpec) -> PotentialSpec:
    if not math.isclose(base.x_max, perturbation.x_max, rel_tol=_SPACING_RTOL):
        raise InvalidPotential(
            f"incompatible x_max values {base.x_max} and {perturbation.x_max}"
        )
    if not base.same_grid(perturbation):
        perturbation = perturbation.resampled(base.h, base.x_max)
    return dataclasses.replace(base, samples=base.samples + perturbation.samples)


def make_inverse_decay(x_max: float, h: float, *, amplitude: float = 1.0) -> PotentialSpec:
    """amplitude · (1 + x)^{-1}; its L² norm on [0, ∞) is amplitude."""
    return PotentialSpec.from_function(lambda x: amplitude / (1.0 + x), x_max, h)


def make_slow_oscillation(x_max: float, h: float) -> PotentialSpec:
    """cos √x; ``.shifted(-1.0)`` gives the companion with plateaus near (2πn)²."""
    return PotentialSpec.from_function(lambda x: np.cos(np.sqrt(x)), x_max, h)


def read_potential_csv(path: str | Path, *, interpolation: Interpolation = "constant") -> PotentialSpec:
    path = Path(path)
    try:
        with path.open(newline="") as fp:
            reader = csv.DictReader(fp)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["x", "v"]:
                raise PotentialFileError(f"{path}: expected header 'x,v', got {reader.fieldnames}")
            rows = [(float(row["x"]), float(row["v"])) for row in reader]
    except OSError as exc:
        raise PotentialFileError(f"{path}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PotentialFileError):
            raise
        raise PotentialFileError(f"{path}: malformed row ({exc})") from exc

    if len(rows) < 2:
        raise PotentialFileError(f"{path}: need at least two samples")
    xs = np.array([x for x, _ in rows])
    vs = np.array([v for _, v in rows])
    steps = np.diff(xs)
    h = float(steps.mean())
    if not np.all(steps > 0.0):
        raise PotentialFileError(f"{path}: x must be strictly increasing")
    if not np.allclose(steps, h, rtol=_SPACING_RTOL, atol=0.0):
        raise PotentialFileError(f"{path}: x is not uniformly spaced")
    if abs(xs[0]) > _SPACING_RTOL * h:
        raise PotentialFileError(f"{path}: x must start at 0, got {xs[0]}")
    try:
        return PotentialSpec(samples=vs, h=h, interpolation=interpolation)
    except InvalidPotential as exc:
        raise PotentialFileError(f"{path}: {exc}") from exc


def write_potential_csv(path: str | Path, v: PotentialSpec) -> None:
    with Path(path).open("w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(("x", "v"))
        for x, value in zip(v.grid, v.samples, strict=True):
            writer.writerow((format(x, CSV_FLOAT_FORMAT), format(value, CSV_FLOAT_FORMAT)))


class InvalidPotential(ValueError): ...


class InvalidWindow(ValueError): ...


class InvalidWindowSequence(ValueError): ...


class PotentialFileError(ValueError): ...
