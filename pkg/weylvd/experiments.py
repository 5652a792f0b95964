"""Asymptotic value distribution along sparse windows.

For windows (a_k, b_k) of growing length and shrinking L² mass, the boundary
values of m^{a_k} and the real ratios v'(b_k, λ)/v(b_k, λ) are both expected
to distribute like i√λ, the latter against the reflected set -S.
"""

import asyncio
import dataclasses
import logging
import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ThreadPoolExecutor
from typing import Any

import numpy as np

from .const import DEFAULT_D_LADDER, ENV_THREADS
from .diagnostics import serialize_exception
from .halfplane import IntervalUnion
from .potential import PotentialSpec, SparseWindowSequence, cumulative_norm, window_norm
from .value_distribution import (
    SamplingPolicy,
    free_asymptotic_distribution,
    ladder_value_distribution,
    real_function_value_distribution,
)
from .weyl import dirichlet_ratios, seeded_m_values

_LOGGER = logging.getLogger(__name__)

_EXPERIMENT_QUAD_LIMIT = 500


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True, eq=False)
class ExperimentConfig:
    potential: PotentialSpec
    windows: SparseWindowSequence
    a_set: IntervalUnion
    s_set: IntervalUnion
    d_ladder: tuple[float, ...] = DEFAULT_D_LADDER
    # 1-based, inclusive
    k_range: tuple[int, int] | None = None
    lambda_points: int = 2001
    delta: float = 0.1
    corollary_a_set: IntervalUnion = IntervalUnion(((-2.0, -1.0),))
    corollary_s_set: IntervalUnion = IntervalUnion.negative_half()
    seed: int = 0

    def __post_init__(self) -> None:
        if not len(self.windows):
            raise ValueError("no windows to run on")
        for name, a in (("a_set", self.a_set), ("corollary a_set", self.corollary_a_set)):
            if a.is_empty or a.contains_minus_infinity_tail or a.contains_plus_infinity_tail:
                raise ValueError(f"{name} must have finite positive measure, got {a}")
        if not self.d_ladder or any(d <= 0.0 for d in self.d_ladder):
            raise ValueError("d_ladder must contain positive offsets")
        if any(d2 >= d1 for d1, d2 in zip(self.d_ladder, self.d_ladder[1:])):
            raise ValueError("d_ladder must be strictly decreasing")
        if self.k_range is not None:
            first, last = self.k_range
            if not 1 <= first <= last <= len(self.windows):
                raise ValueError(f"k_range {first}-{last} outside 1-{len(self.windows)}")
        if self.lambda_points < 2:
            raise ValueError("lambda_points must be at least 2")

    def selected(self) -> list[tuple[int, tuple[float, float]]]:
        first, last = self.k_range or (1, len(self.windows))
        return [(k, self.windows[k - 1]) for k in range(first, last + 1)]


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class ConvergenceRow:
    k: int
    a_k: float
    b_k: float
    l_k: float
    window_mass: float
    md_left: float
    md_right: float
    target: float
    target_right: float
    discrepancy_left: float
    discrepancy_right: float
    d_used: float
    quad_error: float

    @classmethod
    def failed(cls, k: int, window: tuple[float, float]) -> "ConvergenceRow":
        a, b = window
        nan = math.nan
        return cls(
            k=k,
            a_k=a,
            b_k=b,
            l_k=b - a,
            window_mass=nan,
            md_left=nan,
            md_right=nan,
            target=nan,
            target_right=nan,
            discrepancy_left=nan,
            discrepancy_right=nan,
            d_used=nan,
            quad_error=nan,
        )


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class Corollary2Row:
    k: int
    n_k: float
    specest1: float
    specest2: float
    gap: float
    valid: bool

    @classmethod
    def failed(cls, k: int, n_k: float) -> "Corollary2Row":
        return cls(k=k, n_k=n_k, specest1=math.nan, specest2=math.nan, gap=math.nan, valid=False)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class Corollary2Report:
    a_set: IntervalUnion
    s_set: IntervalUnion
    target_plus: float
    target_minus: float
    rows: tuple[Corollary2Row, ...]

    @property
    def target_gap(self) -> float:
        return self.target_plus - self.target_minus


def worker_count() -> int:
    """Threads for row-level parallelism; WEYLVD_THREADS=0 or unset means one per CPU."""
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        _LOGGER.warning("ignoring invalid %s=%r", ENV_THREADS, raw)
        requested = 0
    if requested < 0:
        _LOGGER.warning("ignoring negative %s=%r", ENV_THREADS, raw)
        requested = 0
    return requested or os.cpu_count() or 1


def m_function_of(v: PotentialSpec, start: float) -> Callable[[complex], complex]:
    """m^start with the exact free seed at x_max."""

    def evaluate(z: complex) -> complex:
        return complex(seeded_m_values(v, np.array([z]), start, v.x_max)[0])

    return evaluate


def ratio_function_of(v: PotentialSpec, x: float) -> Callable[[np.ndarray], np.ndarray]:
    def evaluate(lams: np.ndarray) -> np.ndarray:
        return dirichlet_ratios(v, lams, x)

    return evaluate


class ExperimentRunner:
    """Runs the sweeps of one configuration, one work unit per window."""

    config: ExperimentConfig
    executor: Executor | None

    def __init__(self, config: ExperimentConfig, *, executor: Executor | None = None) -> None:
        self.config = config
        self.executor = executor
        self._row_errors: list[dict[str, Any]] = []
        self._sampling = SamplingPolicy(points=config.lambda_points)

    @property
    def row_errors(self) -> list[dict[str, Any]]:
        return sorted(self._row_errors, key=lambda item: (item["experiment"], item["k"]))

    async def _gather_rows(
        self,
        experiment: str,
        units: Sequence[tuple[int, Any]],
        compute: Callable[[int, Any], Any],
        on_error: Callable[[int, Any], Any],
    ) -> list[Any]:
        loop = asyncio.get_running_loop()

        async def do_one(k: int, unit: Any) -> Any:
            try:
                row = await loop.run_in_executor(self.executor, compute, k, unit)
            except Exception as exc:
                _LOGGER.exception("%s row %d failed", experiment, k)
                self._row_errors.append({"experiment": experiment, "k": k, "error": serialize_exception(exc)})
                return on_error(k, unit)
            _LOGGER.info("%s row %d done", experiment, k)
            return row

        return list(await asyncio.gather(*(do_one(k, unit) for k, unit in units)))

    def _theorem2_row(self, k: int, window: tuple[float, float]) -> ConvergenceRow:
        cfg = self.config
        v = cfg.potential
        a_k, b_k = window
        target = free_asymptotic_distribution(cfg.a_set, cfg.s_set)
        target_right = free_asymptotic_distribution(cfg.a_set, cfg.s_set.negate())

        ladder = ladder_value_distribution(
            m_function_of(v, a_k), cfg.a_set, cfg.s_set, cfg.d_ladder, limit=_EXPERIMENT_QUAD_LIMIT
        )
        md_left = ladder.chosen.value
        md_right = real_function_value_distribution(
            ratio_function_of(v, b_k), cfg.a_set, cfg.s_set, self._sampling
        )
        return ConvergenceRow(
            k=k,
            a_k=a_k,
            b_k=b_k,
            l_k=b_k - a_k,
            window_mass=window_norm(v, a_k, b_k, 2),
            md_left=md_left,
            md_right=md_right,
            target=target,
            target_right=target_right,
            discrepancy_left=abs(md_left - target),
            discrepancy_right=abs(md_right - target_right),
            d_used=ladder.chosen.d_used,
            quad_error=ladder.chosen.quad_error,
        )

    def _corollary2_row(self, k: int, window: tuple[float, float]) -> Corollary2Row:
        cfg = self.config
        v = cfg.potential
        a_k, b_k = window
        n_k = 0.5 * (a_k + b_k)
        valid = window_norm(v, a_k, n_k, 2) < cfg.delta and window_norm(v, n_k, b_k, 2) < cfg.delta
        if not valid:
            _LOGGER.warning("half windows around N_%d=%s are not below delta=%s", k, n_k, cfg.delta)
        ladder = ladder_value_distribution(
            m_function_of(v, n_k),
            cfg.corollary_a_set,
            cfg.corollary_s_set,
            cfg.d_ladder,
            limit=_EXPERIMENT_QUAD_LIMIT,
        )
        specest2 = real_function_value_distribution(
            ratio_function_of(v, n_k), cfg.corollary_a_set, cfg.corollary_s_set, self._sampling
        )
        specest1 = ladder.chosen.value
        return Corollary2Row(k=k, n_k=n_k, specest1=specest1, specest2=specest2, gap=specest1 - specest2, valid=valid)

    async def theorem2(self) -> list[ConvergenceRow]:
        self.config.windows.validate(self.config.potential)
        return await self._gather_rows(
            "theorem2", self.config.selected(), self._theorem2_row, ConvergenceRow.failed
        )

    async def corollary2(self) -> Corollary2Report:
        cfg = self.config
        cfg.windows.validate(cfg.potential)
        if cfg.corollary_a_set.upper > 0.0:
            _LOGGER.info("corollary set %s reaches into the positive half-line, control run", cfg.corollary_a_set)
        rows = await self._gather_rows(
            "corollary2",
            cfg.selected(),
            self._corollary2_row,
            lambda k, window: Corollary2Row.failed(k, 0.5 * (window[0] + window[1])),
        )
        return Corollary2Report(
            a_set=cfg.corollary_a_set,
            s_set=cfg.corollary_s_set,
            target_plus=free_asymptotic_distribution(cfg.corollary_a_set, cfg.corollary_s_set),
            target_minus=free_asymptotic_distribution(cfg.corollary_a_set, cfg.corollary_s_set.negate()),
            rows=tuple(rows),
        )


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class SweepOutcome:
    theorem2: list[ConvergenceRow]
    corollary2: Corollary2Report
    row_errors: list[dict[str, Any]]


def _run(coro_factory: Callable[[ExperimentRunner], Any], config: ExperimentConfig) -> Any:
    with ThreadPoolExecutor(max_workers=worker_count()) as executor:
        runner = ExperimentRunner(config, executor=executor)
        return asyncio.run(coro_factory(runner))


def run_theorem2(config: ExperimentConfig) -> list[ConvergenceRow]:
    return _run(lambda runner: runner.theorem2(), config)


def run_corollary2(config: ExperimentConfig) -> Corollary2Report:
    return _run(lambda runner: runner.corollary2(), config)


def run_sweeps(config: ExperimentConfig) -> SweepOutcome:
    async def both(runner: ExperimentRunner) -> SweepOutcome:
        rows, report = await asyncio.gather(runner.theorem2(), runner.corollary2())
        return SweepOutcome(theorem2=rows, corollary2=report, row_errors=runner.row_errors)

    return _run(both, config)


def sliding_window_scan(
    v: PotentialSpec, window_length: float, delta: float, *, merge: bool = False
) -> SparseWindowSequence:
    """Maximal grid windows of length >= window_length with ∫V² < delta.

    With ``merge`` overlapping windows collapse into their longest representative.
    """
    if not 0.0 < window_length <= v.x_max:
        raise ValueError(f"window_length must lie in (0, {v.x_max}], got {window_length!r}")
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    cumulative = cumulative_norm(v, 2)
    grid = v.grid
    # furthest right end reachable from every left end
    reach = np.searchsorted(cumulative, cumulative + delta, side="left") - 1
    maximal = np.ones(reach.size, dtype=bool)
    maximal[1:] = reach[1:] > reach[:-1]
    long_enough = grid[reach] - grid >= window_length * (1.0 - 1e-12)
    starts = np.flatnonzero(maximal & long_enough)

    windows: list[tuple[float, float]] = []
    cluster_end = -math.inf
    for i in starts:
        a, b = float(grid[i]), float(grid[reach[i]])
        if merge and windows and a < cluster_end:
            if b - a > windows[-1][1] - windows[-1][0]:
                windows[-1] = (a, b)
            cluster_end = max(cluster_end, b)
            continue
        windows.append((a, b))
        cluster_end = b
    _LOGGER.debug("scan found %d windows of length >= %s", len(windows), window_length)
    return SparseWindowSequence(tuple(windows))
