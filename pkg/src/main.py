"""
gp: command-line entry point.

Evaluates kernels and event probabilities of determinantal random fields,
verifies their identities, samples windows, extracts path ensembles and
checks the Gibbs property on small boxes.

Commands:
  kernel        one kernel value
  prob          probability of a particle/hole event
  window-dist   every configuration probability of a small window
  verify        identity suites (randomized sweeps or one model)
  sample        exact samples of a window, as NDJSON
  paths         path ensembles (and SVG) of sampled configurations
  gibbs-check   Gibbs vs determinantal conditionals on a box
  preset        write a preset model file

Run as `python -m src.main <command> ...`.  Logs go to stderr; results go
to stdout or the requested files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import structlog

from src.config import Settings, get_settings
from src.correlations.events import event_probability, window_distribution
from src.correlations.sites import Configuration, EventSpec, Window, parse_range, parse_sites
from src.gibbs.box import load_box
from src.gibbs.conditionals import check_box
from src.identities.suite import Suite, run_model_checks, run_suite, summarize
from src.kernel.context import KernelContext, equal_time_closed_form
from src.kernel.factors import SpectralParameter
from src.kernel.model_file import ModelFile, load_model, save_model
from src.paths.ensemble import extract_paths, write_ensembles
from src.paths.svg import RenderMode, write_svg
from src.presets.presets import PresetName, PresetSpec, instantiate_preset
from src.sampler.sampling import read_samples, sample_many, write_samples

log = structlog.get_logger()


# ---------------------------------------------------------------------------
# Logging setup
# ---------------------------------------------------------------------------
def configure_logging(level: str) -> None:
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.dev.ConsoleRenderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level.upper(), logging.WARNING)
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
    )


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------
def _context(path: str, settings: Settings) -> KernelContext:
    model = load_model(path)
    return KernelContext.from_model(
        model.sequence(), model.spectral(), settings,
        quadrature=model.quadrature_spec(settings),
    )


def _window(args: argparse.Namespace) -> Window:
    return Window(cols=parse_range(args.cols), rows=parse_range(args.rows))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_kernel(args: argparse.Namespace, settings: Settings) -> int:
    ctx = _context(args.model, settings)
    value = ctx.original_kernel(args.sigma, args.x, args.tau, args.y)
    print(f"{value.real:.15g} {value.imag:.15g}")
    if args.closed_form:
        if args.sigma != args.tau:
            raise ValueError("--closed-form needs sigma == tau")
        ref = equal_time_closed_form(ctx.model_z, args.x - args.y)
        print(f"{ref.real:.15g} {ref.imag:.15g}")
    return 0


def cmd_prob(args: argparse.Namespace, settings: Settings) -> int:
    ctx = _context(args.model, settings)
    ev = EventSpec(particles=parse_sites(args.particles), holes=parse_sites(args.holes))
    print(f"{event_probability(ctx, ev, settings):.15g}")
    return 0


def cmd_window_dist(args: argparse.Namespace, settings: Settings) -> int:
    ctx = _context(args.model, settings)
    window = _window(args)
    dist = window_distribution(ctx, window, settings)
    if args.format == "json":
        text = _dump({
            "window": window.to_dict(),
            "probabilities": {hex(m): float(p) for m, p in enumerate(dist.probabilities)},
        })
    else:
        lines = ["configuration,probability"]
        for mask, p in enumerate(dist.probabilities):
            bits = "".join(str(v) for v in Configuration.from_mask(window, mask).values)
            lines.append(f"{bits},{p:.15g}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    suites = [Suite(s) for s in (args.suite or ["all"])]
    if args.model:
        reports = run_model_checks(_context(args.model, settings), suites, settings)
    else:
        reports = run_suite(suites, args.sweeps, args.seed, settings)
    summary = summarize(reports, args.seed, args.sweeps)
    if args.report:
        Path(args.report).write_text(_dump(summary), encoding="utf-8")
    print(f"checks={summary['checks']} failed={summary['failed']} "
          f"max_residual={summary['max_residual']:.3e}")
    return 1 if summary["failed"] else 0


def cmd_sample(args: argparse.Namespace, settings: Settings) -> int:
    ctx = _context(args.model, settings)
    samples = sample_many(ctx, _window(args), args.seed, args.count, settings)
    n = write_samples(args.out, samples)
    log.info("sample_done", count=n, out=args.out)
    return 0


def cmd_paths(args: argparse.Namespace, settings: Settings) -> int:
    ctx = _context(args.model, settings)
    ensembles = [extract_paths(s.configuration, ctx) for s in read_samples(args.inp)]
    write_ensembles(args.out, ensembles)
    if args.svg:
        out_dir = Path(args.svg)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, ensemble in enumerate(ensembles):
            write_svg(out_dir / f"{i:05d}.svg", ensemble, args.mode)
    bad = sum(not e.is_non_intersecting() for e in ensembles)
    if bad:
        log.error("paths_intersect", ensembles=bad)
        return 1
    return 0


def cmd_gibbs_check(args: argparse.Namespace, settings: Settings) -> int:
    ctx = _context(args.model, settings)
    result = check_box(load_box(args.box), ctx, settings)
    if args.report:
        Path(args.report).write_text(_dump(result.to_dict()), encoding="utf-8")
    print(f"tuples={result.tuples} total_variation={result.total_variation:.3e} "
          f"connected={result.move_graph_connected}")
    return 0 if result.passed else 1


def cmd_preset(args: argparse.Namespace, settings: Settings) -> int:
    z = SpectralParameter(args.z_modulus, args.z_argument)
    spec = PresetSpec(PresetName(args.name), args.kappa, args.lam, args.temp_tau, z)
    sequence = instantiate_preset(spec, parse_range(args.k_range), settings)
    save_model(ModelFile.from_model(sequence, z), args.out)
    log.info("preset_written", name=spec.name.value, out=args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gp", description=__doc__.split("\n\n")[1])
    parser.add_argument("--log-level", default=None, help="override GP_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="evaluate K(sigma, x; tau, y)")
    p.add_argument("--model", required=True)
    for name in ("sigma", "x", "tau", "y"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.add_argument("--closed-form", action="store_true",
                   help="also print the equal-column closed form")
    p.set_defaults(handler=cmd_kernel)

    p = sub.add_parser("prob", help="probability of a particle/hole event")
    p.add_argument("--model", required=True)
    p.add_argument("--particles", default="")
    p.add_argument("--holes", default="")
    p.set_defaults(handler=cmd_prob)

    p = sub.add_parser("window-dist", help="distribution of a small window")
    p.add_argument("--model", required=True)
    p.add_argument("--cols", required=True, help="A:B")
    p.add_argument("--rows", required=True, help="C:D")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_window_dist)

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument("--model", help="check this model instead of random sweeps")
    p.add_argument("--suite", action="append", choices=[s.value for s in Suite])
    p.add_argument("--sweeps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sample", help="exact samples of a window")
    p.add_argument("--model", required=True)
    p.add_argument("--cols", required=True, help="A:B")
    p.add_argument("--rows", required=True, help="C:D")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-n", dest="count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("paths", help="path ensembles of sampled configurations")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", help="directory for one SVG per sample")
    p.add_argument("--mode", choices=[m.value for m in RenderMode], default="paths")
    p.set_defaults(handler=cmd_paths)

    p = sub.add_parser("gibbs-check", help="compare conditionals on a box")
    p.add_argument("--model", required=True)
    p.add_argument("--box", required=True)
    p.add_argument("--report")
    p.set_defaults(handler=cmd_gibbs_check)

    p = sub.add_parser("preset", help="write a preset model file")
    p.add_argument("--name", required=True, choices=[n.value for n in PresetName])
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--temp-tau", type=float, default=0.0)
    p.add_argument("--k-range", required=True, help="A:B")
    p.add_argument("--z-modulus", type=float, default=1.0)
    p.add_argument("--z-argument", type=float, default=1.5707963267948966)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_preset)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)
    try:
        return args.handler(args, settings)
    except (ValueError, ArithmeticError, OSError) as exc:
        log.error("command_failed", command=args.command, error=str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
