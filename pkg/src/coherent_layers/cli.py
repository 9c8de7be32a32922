"""Command-line interface.

Exit codes: 0 success, 2 validation/parse error, 3 numerical failure. On
failure a single JSON object ``{"error": <code>, "message": ...}`` is
written to stderr.
"""

import argparse
from dataclasses import replace
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import CoherenceError, DomainError
from .fitting import fit_layer
from .io import packaged_scenario, parse_responses, parse_scenario, write_responses
from .pipeline import dump_report, emit_plot_tables, run_pipeline, simulate
from .stratification import assign_layers, coherence_onset, layer_mean_trajectories


def _emit(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_matrices(paths, space):
    if space and len(paths) > 1:
        raise DomainError("--space can only name a single response file")
    return {m.space: m for m in (parse_responses(p, space) for p in paths)}


def _with_seed(config, seed):
    return config if seed is None else replace(config, seed=seed)


def cmd_simulate(args):
    config = _with_seed(parse_scenario(args.scenario), args.seed)
    matrices, _ = simulate(config, args.mode, args.workers)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for name, m in matrices.items():
        path = write_responses(m, out / f"{name}.csv")
        print(path)


def cmd_fit(args):
    result = {}
    for name, m in _load_matrices(args.responses, args.space).items():
        layers = []
        for J, inp in layer_mean_trajectories(m, assign_layers(m, args.tail_len)).items():
            fit = fit_layer(inp)
            layers.append({"J": J, "m_hat": fit.m_hat, "beta_hat": fit.beta_hat,
                           "r_squared": fit.r_squared, "converged": fit.converged})
        result[name] = layers
    _emit(json.dumps(result, indent=2, sort_keys=True) + "\n", args.output)


def cmd_stratify(args):
    result = {}
    for name, m in _load_matrices(args.responses, args.space).items():
        a = assign_layers(m, args.tail_len)
        layers = []
        for J, inp in layer_mean_trajectories(m, a).items():
            layers.append({"J": J, "count": a.counts[J],
                           "onset_data": coherence_onset(inp.U, J, inp.B)})
        result[name] = {"layers": layers, "unassigned": a.unassigned}
    _emit(json.dumps(result, indent=2, sort_keys=True) + "\n", args.output)


def cmd_analyze(args):
    matrices = _load_matrices(args.responses, args.space)
    report = run_pipeline(matrices=matrices, tail_len=args.tail_len, workers=args.workers)
    _emit(dump_report(report), args.output)


def cmd_reproduce(args):
    config = parse_scenario(args.scenario) if args.scenario else packaged_scenario()
    config = _with_seed(config, args.seed)
    report = run_pipeline(config=config, tail_len=args.tail_len, mode=args.mode,
                          workers=args.workers)
    _emit(dump_report(report), args.output)


def cmd_plot_data(args):
    with open(args.report, encoding="utf-8") as f:
        report = json.load(f)
    for path in emit_plot_tables(report, args.output):
        print(path)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coherent-layers",
        description="Simulate, fit and analyse coherent attitude layers.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, mode=False, tail=False, workers=False):
        if seed:
            p.add_argument("--seed", type=int, help="override the scenario seed")
        if mode:
            p.add_argument("--mode", choices=["raw", "questionnaire"])
        if tail:
            p.add_argument("--tail-len", type=int, default=3,
                           help="stimuli used to find a participant's saturation level")
        if workers:
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("simulate", help="scenario JSON -> response CSVs")
    p.add_argument("scenario")
    p.add_argument("--output", required=True, help="output directory")
    common(p, seed=True, mode=True, workers=True)
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
        ("fit", cmd_fit, "response CSVs -> per-layer (m, beta)"),
        ("stratify", cmd_stratify, "response CSVs -> layer census and onsets"),
        ("analyze", cmd_analyze, "response CSVs -> full JSON report"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("responses", nargs="+")
        p.add_argument("--space", help="space name (default: file stem)")
        p.add_argument("--output", help="output file (default: stdout)")
        common(p, tail=True, workers=name == "analyze")
        p.set_defaults(func=func)

    p = sub.add_parser("reproduce", help="run the packaged reference scenarios end to end")
    p.add_argument("--scenario", help="use this scenario instead of the packaged one")
    p.add_argument("--output", help="report file (default: stdout)")
    common(p, seed=True, mode=True, tail=True, workers=True)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("plot-data", help="report JSON -> TSV plot tables")
    p.add_argument("report")
    p.add_argument("--output", required=True, help="output directory")
    p.set_defaults(func=cmd_plot_data)
    return parser


def _fail(code, message, status):
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return status


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CoherenceError as e:
        return _fail(e.code, str(e), e.exit_status)
    except (OSError, json.JSONDecodeError) as e:
        return _fail("io", str(e), 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
