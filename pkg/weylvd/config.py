"""Experiment configuration files.

INI-style ``key = value`` text with the sections ``[potential]``, ``[experiment]``,
``[corollary2]`` and ``[logger]``. Values are coerced and range-checked with
voluptuous before any potential is built.
"""

import configparser
import dataclasses
import logging
import math
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    CONF_A_SET,
    CONF_BUMP_HEIGHT,
    CONF_BUMP_SHAPE,
    CONF_BUMP_WIDTH,
    CONF_COROLLARY2,
    CONF_COUNT,
    CONF_D_LADDER,
    CONF_DEFAULT,
    CONF_DELTA,
    CONF_EXPERIMENT,
    CONF_FILE,
    CONF_FIRST_GAP,
    CONF_GAP_GROWTH,
    CONF_GENERATOR,
    CONF_INTERPOLATION,
    CONF_K_RANGE,
    CONF_LAMBDA_POINTS,
    CONF_LOGGER,
    CONF_PERTURBATION,
    CONF_PERTURBATION_AMPLITUDE,
    CONF_POTENTIAL,
    CONF_S_SET,
    CONF_SCAN_DELTA,
    CONF_SCAN_LENGTH,
    CONF_SEED,
    CONF_SHIFT,
    CONF_STEP,
    CONF_WINDOWS,
    CONF_X_MAX,
    DEFAULT_D_LADDER,
    DOMAIN,
)
from .diagnostics import config_digest
from .experiments import ExperimentConfig, sliding_window_scan
from .halfplane import IntervalUnion, InvalidInterval
from .potential import (
    InvalidPotential,
    PotentialFileError,
    PotentialSpec,
    SparseWindowSequence,
    make_inverse_decay,
    make_l2_sparse,
    make_slow_oscillation,
    make_sparse_bump_train,
    read_potential_csv,
)

_LOGGER = logging.getLogger(__name__)

GENERATORS = ("zero", "bump_train", "slow_oscillation", "file")
LOG_LEVELS = ("debug", "info", "warning", "error", "critical")


def _interval_union(value: Any) -> IntervalUnion:
    try:
        return IntervalUnion.parse(str(value))
    except InvalidInterval as exc:
        raise vol.Invalid(str(exc)) from exc


def _float_list(value: Any) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in str(value).split(",") if part.strip())
    except ValueError as exc:
        raise vol.Invalid(f"expected comma separated numbers, got {value!r}") from exc


def _k_range(value: Any) -> tuple[int, int]:
    text = str(value).strip()
    first, sep, last = text.partition("-")
    try:
        if not sep:
            return int(first), int(first)
        return int(first), int(last)
    except ValueError as exc:
        raise vol.Invalid(f"expected 'first-last', got {value!r}") from exc


def _windows(value: Any) -> str | tuple[tuple[float, float], ...]:
    """``generated``, ``scan`` or an explicit list ``a:b, a:b``."""
    text = str(value).strip().lower()
    if text in ("generated", "scan"):
        return text
    pairs = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        try:
            if not sep:
                raise ValueError(part)
            pairs.append((float(lo), float(hi)))
        except ValueError as exc:
            raise vol.Invalid(f"expected 'generated', 'scan' or 'a:b, ...', got {value!r}") from exc
    return tuple(pairs)


_POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0.0, min_included=False))
_LEVEL = vol.All(str, vol.Lower, vol.In(LOG_LEVELS))

POTENTIAL_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_GENERATOR, default="bump_train"): vol.All(str, vol.Lower, vol.In(GENERATORS)),
        vol.Optional(CONF_FILE): str,
        vol.Optional(CONF_INTERPOLATION, default="constant"): vol.In(("constant", "linear")),
        vol.Optional(CONF_X_MAX): _POSITIVE,
        vol.Optional(CONF_STEP): _POSITIVE,
        vol.Optional(CONF_BUMP_HEIGHT, default=5.0): vol.Coerce(float),
        vol.Optional(CONF_BUMP_WIDTH, default=1.0): _POSITIVE,
        vol.Optional(CONF_BUMP_SHAPE, default="rectangular"): vol.In(("rectangular", "raised_cosine")),
        vol.Optional(CONF_GAP_GROWTH, default=2.0): vol.All(vol.Coerce(float), vol.Range(min=1.0, min_included=False)),
        vol.Optional(CONF_FIRST_GAP, default=10.0): _POSITIVE,
        vol.Optional(CONF_COUNT, default=6): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_PERTURBATION, default="none"): vol.In(("none", "inverse_decay")),
        vol.Optional(CONF_PERTURBATION_AMPLITUDE, default=1.0): vol.Coerce(float),
        vol.Optional(CONF_SHIFT, default=0.0): vol.Coerce(float),
        vol.Optional(CONF_WINDOWS, default="generated"): _windows,
        vol.Optional(CONF_SCAN_LENGTH, default=10.0): _POSITIVE,
        vol.Optional(CONF_SCAN_DELTA, default=0.1): _POSITIVE,
    }
)

EXPERIMENT_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_A_SET): _interval_union,
        vol.Required(CONF_S_SET): _interval_union,
        vol.Optional(CONF_D_LADDER, default=",".join(map(str, DEFAULT_D_LADDER))): _float_list,
        vol.Optional(CONF_K_RANGE): _k_range,
        vol.Optional(CONF_LAMBDA_POINTS, default=2001): vol.All(vol.Coerce(int), vol.Range(min=2)),
        vol.Optional(CONF_DELTA, default=0.1): _POSITIVE,
        vol.Optional(CONF_SEED, default=0): vol.Coerce(int),
    }
)

COROLLARY2_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_A_SET, default="[-2, -1]"): _interval_union,
        vol.Optional(CONF_S_SET, default="(-inf, 0)"): _interval_union,
    }
)

LOGGER_SCHEMA = vol.Schema({vol.Optional(CONF_DEFAULT): _LEVEL, str: _LEVEL})


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True, eq=False)
class LoadedConfig:
    source: Path
    digest: str
    experiment: ExperimentConfig
    logger_levels: dict[str, str]

    def apply_logging(self) -> None:
        apply_logger_levels(self.logger_levels)


def apply_logger_levels(levels: dict[str, str]) -> None:
    """``default`` sets the package logger; other keys are logger names."""
    for name, level in levels.items():
        logger = logging.getLogger(DOMAIN if name == CONF_DEFAULT else name)
        logger.setLevel(level.upper())


def _validated(schema: vol.Schema, parser: configparser.ConfigParser, section: str) -> dict[str, Any]:
    raw = dict(parser.items(section)) if parser.has_section(section) else {}
    try:
        return schema(raw)
    except vol.Invalid as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def _base_potential(options: dict[str, Any], base_dir: Path) -> tuple[PotentialSpec, SparseWindowSequence | None]:
    generator = options[CONF_GENERATOR]
    if generator in ("zero", "bump_train"):
        # the zero generator keeps the bump-train layout, so both share windows
        return make_sparse_bump_train(
            options[CONF_BUMP_HEIGHT] if generator == "bump_train" else 0.0,
            options[CONF_BUMP_WIDTH],
            options[CONF_GAP_GROWTH],
            options[CONF_COUNT],
            first_gap=options[CONF_FIRST_GAP],
            h=options.get(CONF_STEP),
            shape=options[CONF_BUMP_SHAPE],
        )
    if generator == "slow_oscillation":
        if CONF_X_MAX not in options or CONF_STEP not in options:
            raise ConfigError("slow_oscillation needs x_max and h")
        return make_slow_oscillation(options[CONF_X_MAX], options[CONF_STEP]), None
    if CONF_FILE not in options:
        raise ConfigError("generator 'file' needs a file")
    path = Path(options[CONF_FILE])
    if not path.is_absolute():
        path = base_dir / path
    return read_potential_csv(path, interpolation=options[CONF_INTERPOLATION]), None


def build_potential(options: dict[str, Any], base_dir: Path) -> tuple[PotentialSpec, SparseWindowSequence]:
    try:
        potential, generated = _base_potential(options, base_dir)
        if options[CONF_PERTURBATION] == "inverse_decay":
            perturbation = make_inverse_decay(
                potential.x_max, potential.h, amplitude=options[CONF_PERTURBATION_AMPLITUDE]
            )
            potential = make_l2_sparse(potential, perturbation)
        if options[CONF_SHIFT]:
            potential = potential.shifted(options[CONF_SHIFT])
    except (InvalidPotential, PotentialFileError) as exc:
        raise ConfigError(str(exc)) from exc

    windows = options[CONF_WINDOWS]
    if windows == "scan":
        try:
            scanned = sliding_window_scan(
                potential, options[CONF_SCAN_LENGTH], options[CONF_SCAN_DELTA], merge=True
            )
        except ValueError as exc:
            raise ConfigError(f"window scan: {exc}") from exc
        kept = scanned.monotone_subsequence(potential)
        _LOGGER.info("scan kept %d of %d windows", len(kept), len(scanned))
        return potential, kept
    if windows == "generated":
        if generated is None:
            raise ConfigError(f"generator {options[CONF_GENERATOR]!r} has no generated windows, use scan")
        return potential, generated
    return potential, SparseWindowSequence(windows)


def parse_config(text: str, *, source: str | Path = "<string>") -> LoadedConfig:
    source = Path(source)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(source))
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if not parser.has_section(CONF_EXPERIMENT):
        raise ConfigError(f"{source}: missing [{CONF_EXPERIMENT}] section")
    unknown = set(parser.sections()) - {CONF_POTENTIAL, CONF_EXPERIMENT, CONF_COROLLARY2, CONF_LOGGER}
    if unknown:
        raise ConfigError(f"{source}: unknown sections {sorted(unknown)}")

    potential_options = _validated(POTENTIAL_SCHEMA, parser, CONF_POTENTIAL)
    experiment_options = _validated(EXPERIMENT_SCHEMA, parser, CONF_EXPERIMENT)
    corollary_options = _validated(COROLLARY2_SCHEMA, parser, CONF_COROLLARY2)
    logger_levels = _validated(LOGGER_SCHEMA, parser, CONF_LOGGER)

    a_set = experiment_options[CONF_A_SET]
    if not math.isfinite(a_set.measure) or a_set.is_empty:
        raise ConfigError(f"a_set {a_set} must be a bounded non-empty set")

    potential, windows = build_potential(potential_options, source.parent)
    _LOGGER.debug("config %s: %d samples, %d windows", source, potential.size, len(windows))
    try:
        experiment = ExperimentConfig(
            potential=potential,
            windows=windows,
            a_set=a_set,
            s_set=experiment_options[CONF_S_SET],
            d_ladder=experiment_options[CONF_D_LADDER],
            k_range=experiment_options.get(CONF_K_RANGE),
            lambda_points=experiment_options[CONF_LAMBDA_POINTS],
            delta=experiment_options[CONF_DELTA],
            corollary_a_set=corollary_options[CONF_A_SET],
            corollary_s_set=corollary_options[CONF_S_SET],
            seed=experiment_options[CONF_SEED],
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return LoadedConfig(source=source, digest=config_digest(text), experiment=experiment, logger_levels=logger_levels)


def load_config(path: str | Path) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=path)


class ConfigError(ValueError): ...
