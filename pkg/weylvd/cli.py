"""Command-line surface: ``weylvd mfunction | bounds | sparse-experiment``."""

import argparse
import asyncio
import contextlib
import dataclasses
import logging
import sys
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import colorlog

from . import __version__
from .bounds import CHECKS, BoundSuite, CheckTolerance, suite_rows
from .config import ConfigError, load_config
from .const import (
    DEFAULT_M_ATTEMPTS,
    DEFAULT_M_TOLERANCE,
    DEFAULT_TOL_ABS,
    DEFAULT_TOL_REL,
    DOMAIN,
    EXIT_BAD_INPUT,
    EXIT_BOUND_VIOLATION,
    EXIT_INVALID_WINDOWS,
    EXIT_NON_CONVERGENCE,
    EXIT_OK,
)
from .diagnostics import RunManifest, plot_discrepancy, write_dataclass_rows, write_rows
from .experiments import ConvergenceRow, run_sweeps, worker_count
from .potential import InvalidWindowSequence, read_potential_csv
from .weyl import MFunctionRequest, NonConvergence, evaluate_m

_LOGGER = logging.getLogger(__name__)

MFUNCTION_COLUMNS = ("re_z", "im_z", "re_m", "im_m", "gamma_diag")
BOUNDS_COLUMNS = ("check", "seed", "lhs", "rhs", "margin", "pass")
COROLLARY2_COLUMNS = ("k", "n_k", "specest1", "specest2", "gap", "valid")
THEOREM2_COLUMNS = tuple(field.name for field in dataclasses.fields(ConvergenceRow))


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        # usage errors are bad input, exit 2 is reserved for non-convergence
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _complex_arg(text: str) -> complex:
    re_part, sep, im_part = text.partition(",")
    try:
        if not sep:
            raise ValueError(text)
        return complex(float(re_part), float(im_part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=DOMAIN, description="Weyl m-functions and value distribution on sparse windows.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging for the package")
    commands = parser.add_subparsers(dest="command", required=True)

    mfunction = commands.add_parser("mfunction", help="evaluate m^start(z) for a potential file")
    mfunction.add_argument("--potential", required=True, type=Path, help="CSV with header x,v")
    mfunction.add_argument("--interpolation", choices=("constant", "linear"), default="constant")
    mfunction.add_argument("--start", type=float, default=0.0)
    mfunction.add_argument(
        "--z", dest="zs", action="append", type=_complex_arg, required=True, help="re,im (repeatable)"
    )
    mfunction.add_argument("--tail", type=float, default=None, help="truncation point, default from z")
    mfunction.add_argument("--tol", type=float, default=DEFAULT_M_TOLERANCE)
    mfunction.add_argument("--attempts", type=int, default=DEFAULT_M_ATTEMPTS)
    mfunction.add_argument("--out", required=True, type=Path)
    mfunction.set_defaults(handler=cmd_mfunction)

    bounds = commands.add_parser("bounds", help="run the seeded bound verifiers")
    bounds.add_argument("--check", choices=(*CHECKS, "all"), action="append", default=None)
    bounds.add_argument("--draws", type=int, default=None, help="draws per randomised check")
    bounds.add_argument("--seed", type=int, default=42)
    bounds.add_argument("--tol-rel", type=float, default=DEFAULT_TOL_REL)
    bounds.add_argument("--tol-abs", type=float, default=DEFAULT_TOL_ABS)
    bounds.add_argument("--rhs-scale", type=float, default=1.0, help="multiply every right side")
    bounds.add_argument("--out", required=True, type=Path)
    bounds.set_defaults(handler=cmd_bounds)

    experiment = commands.add_parser("sparse-experiment", help="value distribution along sparse windows")
    experiment.add_argument("--config", required=True, type=Path)
    experiment.add_argument("--outdir", required=True, type=Path)
    experiment.add_argument("--plot", action="store_true", help="also write discrepancy.svg")
    experiment.set_defaults(handler=cmd_sparse_experiment)
    return parser


def setup_logging(verbose: bool) -> None:
    handler = colorlog.StreamHandler(sys.stderr)
    handler.setFormatter(
        colorlog.ColoredFormatter("%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s")
    )
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.WARNING)
    logging.getLogger(DOMAIN).setLevel(logging.DEBUG if verbose else logging.INFO)


class CommandFailed(Exception):
    def __init__(self, code: int) -> None:
        super().__init__(code)
        self.code = code


@contextlib.contextmanager
def detect_failures() -> Iterator[None]:
    """Translate library exceptions into the exit-code contract."""
    try:
        yield
    except CommandFailed:
        raise
    except InvalidWindowSequence as exc:
        _LOGGER.error("invalid window sequence: %s", exc)
        raise CommandFailed(EXIT_INVALID_WINDOWS) from exc
    except NonConvergence as exc:
        _LOGGER.error("%s (best value %s)", exc, exc.value)
        raise CommandFailed(EXIT_NON_CONVERGENCE) from exc
    except ArithmeticError as exc:
        _LOGGER.error("numerical failure: %s", exc)
        raise CommandFailed(EXIT_NON_CONVERGENCE) from exc
    except (ConfigError, OSError, ValueError) as exc:
        _LOGGER.error("bad input: %s", exc)
        raise CommandFailed(EXIT_BAD_INPUT) from exc


def cmd_mfunction(args: argparse.Namespace) -> int:
    potential = read_potential_csv(args.potential, interpolation=args.interpolation)
    rows = []
    failed: NonConvergence | None = None
    for z in args.zs:
        req = MFunctionRequest(potential=potential, z=z, start=args.start, tail_x=args.tail)
        try:
            result = evaluate_m(req, tol=args.tol, attempts=args.attempts)
        except NonConvergence as exc:
            _LOGGER.error("z=%s: %s", z, exc)
            failed = exc
            continue
        _LOGGER.info("m(%s) = %s (diagnostic %.3g)", z, result.value.value, result.diagnostic)
        rows.append(
            {
                "re_z": req.z.real,
                "im_z": req.z.imag,
                "re_m": result.value.re,
                "im_m": result.value.im,
                "gamma_diag": result.diagnostic,
            }
        )
    write_rows(args.out, MFUNCTION_COLUMNS, rows)
    if failed is not None:
        raise failed
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    selected = args.check or ["all"]
    checks = list(CHECKS) if "all" in selected else list(dict.fromkeys(selected))
    if args.draws is not None and args.draws < 1:
        raise ValueError("--draws must be positive")
    suite = BoundSuite(
        seed=args.seed,
        draws=args.draws,
        tolerance=CheckTolerance(tol_rel=args.tol_rel, tol_abs=args.tol_abs, rhs_scale=args.rhs_scale),
    )
    with ThreadPoolExecutor(max_workers=worker_count()) as executor:
        results = asyncio.run(suite.run(checks, executor))
    write_rows(args.out, BOUNDS_COLUMNS, suite_rows(results))

    failures = [result for result in results if not result.passed]
    for result in failures:
        print(f"{result.name} seed={result.seed} inputs_digest={result.inputs_digest}", file=sys.stderr)
    if failures:
        _LOGGER.error("%d of %d checks violated", len(failures), len(results))
        raise CommandFailed(EXIT_BOUND_VIOLATION)
    _LOGGER.info("all %d checks passed", len(results))
    return EXIT_OK


def cmd_sparse_experiment(args: argparse.Namespace) -> int:
    loaded = load_config(args.config)
    loaded.apply_logging()
    if args.verbose:
        logging.getLogger(DOMAIN).setLevel(logging.DEBUG)
    config = loaded.experiment
    manifest = RunManifest(
        command="sparse-experiment",
        config_digest=loaded.digest,
        seed=config.seed,
        tool_version=__version__,
        extra={"windows": [list(window) for window in config.windows]},
    )
    outcome = run_sweeps(config)

    args.outdir.mkdir(parents=True, exist_ok=True)
    theorem2_path = write_dataclass_rows(args.outdir / "theorem2.csv", outcome.theorem2, THEOREM2_COLUMNS)
    corollary2_path = write_dataclass_rows(
        args.outdir / "corollary2.csv", outcome.corollary2.rows, COROLLARY2_COLUMNS
    )
    manifest.outputs.extend([theorem2_path.name, corollary2_path.name])
    manifest.row_errors.extend(outcome.row_errors)
    manifest.extra["corollary2_targets"] = {
        "a_set": str(outcome.corollary2.a_set),
        "s_set": str(outcome.corollary2.s_set),
        "plus": outcome.corollary2.target_plus,
        "minus": outcome.corollary2.target_minus,
    }
    if args.plot:
        manifest.outputs.append(plot_discrepancy(theorem2_path, args.outdir / "discrepancy.svg").name)
    manifest.write(args.outdir)
    if outcome.row_errors:
        _LOGGER.warning("%d rows failed, see %s", len(outcome.row_errors), args.outdir / "manifest.json")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        with detect_failures():
            return args.handler(args)
    except CommandFailed as exc:
        return exc.code
