"""Command-line entry point: ``afmsqueeze <subcommand> [options]``."""

import argparse
import logging
import sys
from dataclasses import replace

from .config import FIGURE_IDS, load_config
from .errors import ConfigurationError
from .figures import FigureAborted, SolveCache, required_solves, run_figure
from .report import write_aborted, write_figure
from .verify import run_suite

log = logging.getLogger("afmsqueeze")

SUBCOMMANDS = {
    "dispersion": ("fig1", "fig2"),
    "states": ("fig3",),
    "variance": ("fig4", "fig5", "fig6"),
    "factors": ("fig7", "fig11", "fig12"),
    "rates": ("fig8",),
    "correlate": ("fig9",),
    "path": ("fig10",),
    "all": FIGURE_IDS,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="afmsqueeze",
        description="Magnon squeezing in uniaxial antiferromagnets: figure data and oracle checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, figs in list(SUBCOMMANDS.items()) + [("verify", ())]:
        p = sub.add_parser(name, help=f"figures {', '.join(figs)}" if figs else "run the oracle suite")
        p.add_argument("--config", help="YAML run configuration (default: built-in defaults)")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--figure", help="restrict to one figure id of this subcommand")
        p.add_argument("--workers", type=int, help="process pool size (default: CPU count)")
        p.add_argument("--seed", type=int, help="recorded in metadata; nothing is random")
        p.add_argument("-v", "--verbose", action="store_true", help="log solver warnings")
        if name == "verify":
            p.add_argument("--cutoff", type=int, help="Fock cutoff for the oracle equivalence checks")
    return parser


def _select(command, figure, cfg):
    allowed = SUBCOMMANDS[command]
    if figure is not None:
        if figure not in allowed:
            raise ConfigurationError(f"--figure {figure} is not produced by '{command}' (choose from {allowed})")
        return [figure]
    return [f for f in allowed if f in cfg.figures]


def run_figures(cfg, figures, out=None):
    """Solve, build and write ``figures``; returns the number aborted."""
    out = sys.stdout if out is None else out
    cache = SolveCache(cfg)
    keys = [k for f in figures for k in required_solves(cfg, f)]
    cache.solve_all(keys, workers=cfg.workers)
    aborted = 0
    for fig in figures:
        try:
            data = run_figure(cache, cfg, fig)
        except FigureAborted as exc:
            aborted += 1
            path = write_aborted(cfg.out_dir, fig, {
                "figure": fig,
                "status": "aborted",
                "reason": str(exc),
                "diagnostic": exc.diagnostic,
                "config": cfg.to_dict(),
                "solver_diagnostics": cache.diagnostics(required_solves(cfg, fig)),
            })
            print(f"{fig}: ABORTED ({exc}); metadata in {path}", file=out)
            continue
        csv_path, _ = write_figure(cfg.out_dir, data)
        print(f"{fig}: {len(data.rows)} rows -> {csv_path}", file=out)
    return aborted


def run_verify(cfg, out=None):
    out = sys.stdout if out is None else out
    v = cfg.verify
    results = run_suite(cutoff=v.cutoff, hamiltonian_cutoff=v.hamiltonian_cutoff, r_values=v.r_values)
    for r in results:
        print(r.line(), file=out)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=out)
    return failed


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg = replace(cfg, out_dir=args.out)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigurationError("--workers must be >= 1")
            cfg = replace(cfg, workers=args.workers)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.command == "verify":
            if getattr(args, "cutoff", None) is not None:
                cfg = replace(cfg, verify=replace(cfg.verify, cutoff=args.cutoff))
            return 1 if run_verify(cfg) else 0
        figures = _select(args.command, args.figure, cfg)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1 if run_figures(cfg, figures) else 0


if __name__ == "__main__":
    sys.exit(main())
