"""End-to-end analysis: simulate, stratify, fit, and summarise into one report.

The report is a plain JSON-compatible dict. Its serialisation
(:func:`dump_report`) is canonical, so identical inputs give identical bytes.
"""

from concurrent.futures import ThreadPoolExecutor
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import build_population, sample_responses
from .errors import DomainError, NonIdentifiableError
from .fitting import fit_layer, residual_symmetry
from .io import scenario_to_dict
from .model import LayerParams, expected_charge
from .multivariate import correlation_matrix, histogram, pairwise_r2, pca
from .stratification import (
    LayerAssignment,
    assign_layers,
    coherence_onset,
    layer_mean_trajectories,
    pattern_census,
    profile,
)


def _num(x):
    if x is None:
        return None
    if isinstance(x, (np.integer, int)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def _list(a):
    return [_num(v) for v in np.asarray(a).tolist()]


def _sha256(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def simulate(config, mode=None, workers=1):
    """Response matrices for every space of ``config``."""
    mode = mode or config.output_mode
    pops = build_population(config)
    return {
        name: sample_responses(pop, config.stimulus_count, config.seed, mode, workers)
        for name, pop in pops.items()
    }, pops


def _roster_assignment(matrix, population):
    return LayerAssignment(list(matrix.participant_ids), [a.layer.J for a in population.agents])


def _fit_entry(inp):
    entry = {"J": inp.J, "B": _list(inp.B), "mean_U": _list(inp.U)}
    try:
        fit = fit_layer(inp)
    except NonIdentifiableError as e:
        entry["fit"] = None
        entry["skip_reason"] = str(e)
        entry["onset_curve"] = None
    else:
        sym = residual_symmetry(fit)
        entry["fit"] = {
            "m_hat": _num(fit.m_hat),
            "beta_hat": _num(fit.beta_hat),
            "g": _num(fit.g),
            "sse": _num(fit.sse),
            "r_squared": _num(fit.r_squared),
            "residuals": _list(fit.residuals),
            "converged": fit.converged,
            "iterations": fit.iterations,
            "starts_tried": fit.starts_tried,
            "residual_symmetry": {
                "mean_residual": _num(sym.mean_residual),
                "sign_balance": _num(sym.sign_balance),
                "skewness": _num(sym.skewness),
                "symmetric": sym.symmetric,
            },
        }
        entry["onset_curve"] = _num(coherence_onset(LayerParams(fit.J, fit.m_hat, fit.beta_hat, fit.g)))
    entry["onset_data"] = _num(coherence_onset(inp.U, inp.J, inp.B))
    return entry


def analyze_space(matrix, population=None, tail_len=3):
    """Report section for one attitude space.

    Layers come from the questionnaire stratification rule; raw-charge
    matrices use the simulated roster instead, since the rule needs the 0..8
    scale.
    """
    if matrix.mode == "questionnaire":
        assignment = assign_layers(matrix, tail_len)
        source = "stratified"
    elif population is not None:
        assignment = _roster_assignment(matrix, population)
        source = "roster"
    else:
        raise DomainError("raw-charge data need a population roster to define layers")

    inputs = layer_mean_trajectories(matrix, assignment)
    counts = assignment.counts
    layers = []
    for J, inp in inputs.items():
        entry = _fit_entry(inp)
        entry["count"] = counts[J]
        layers.append(entry)

    section = {
        "participants": matrix.n_participants,
        "stimulus_count": matrix.stimulus_count,
        "mode": matrix.mode,
        "assignment_source": source,
        "census": [{"J": J, "count": n} for J, n in counts.items()],
        "unassigned": assignment.unassigned,
        "assignment": [{"participant": p if isinstance(p, str) else int(p), "J": j}
                       for p, j in zip(assignment.participant_ids, assignment.J)],
        "layers": layers,
    }
    if matrix.n_participants >= 2:
        prof = profile(matrix)
        section["profile"] = {
            "B": _list(prof.B),
            "mean": _list(prof.mean),
            "variance": _list(prof.variance),
            "chi": _list(prof.chi),
            "differential_chi": _list(prof.differential_chi),
        }
    else:
        section["profile"] = None
    v = matrix.oriented_values
    lo, hi = math.floor(min(0.0, v.min())), math.ceil(max(8.0, v.max()))
    edges = np.arange(lo - 1, hi + 1, dtype=float)
    section["histograms"] = {
        "upper_bounds": _list(edges[1:]),
        "counts": {str(b): _list(histogram(matrix, int(b), edges)) for b in matrix.stimuli},
    }
    return section, assignment


def _cross_space(sections, assignments):
    bundle = {}
    for space, sec in sections.items():
        for layer in sec["layers"]:
            U = np.array(layer["mean_U"], dtype=float)
            if layer["fit"] is not None and np.ptp(U) > 0:
                bundle[f"{space}:J{layer['J']:g}"] = U
    out = {"correlation": None, "pca": None, "patterns": None}
    lengths = {len(u) for u in bundle.values()}
    if len(bundle) >= 2 and len(lengths) == 1:
        names = list(bundle)
        pairs = []
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                pairs.append({"a": a, "b": b, "r2": _num(pairwise_r2(bundle[a], bundle[b]))})
        out["correlation"] = {"names": names, "pairs": pairs}
        res = pca(correlation_matrix(bundle), names)
        out["pca"] = {
            "names": names,
            "eigenvalues": _list(res.eigenvalues),
            "n_retained": res.n_retained,
            "retained_share": _num(res.retained_share),
            "loadings_first": _list(res.loadings[:, 0]),
            "communalities": _list(res.communalities),
        }
    rosters = {tuple(a.participant_ids) for a in assignments.values()}
    if len(assignments) >= 2 and len(rosters) == 1:
        out["patterns"] = {
            "order": list(assignments),
            "counts": pattern_census(assignments.values()),
        }
    return out


def run_pipeline(config=None, matrices=None, tail_len=3, mode=None, workers=1):
    """Build an analysis report from a scenario or from parsed response matrices.

    Exactly one of ``config`` and ``matrices`` (name -> ResponseMatrix) is used.
    ``workers`` parallelises spaces and sampling without changing the result.
    """
    if (config is None) == (matrices is None):
        raise DomainError("pass either a scenario config or response matrices")
    populations = {}
    if config is not None:
        matrices, populations = simulate(config, mode, workers)
        provenance = {
            "source": "scenario",
            "config_sha256": _sha256(scenario_to_dict(config)),
            "seed": config.seed,
            "mode": mode or config.output_mode,
        }
    else:
        provenance = {
            "source": "responses",
            "config_sha256": _sha256({n: [list(map(str, m.participant_ids)), m.values.tolist()]
                                      for n, m in matrices.items()}),
            "seed": None,
            "mode": "questionnaire",
        }
    provenance["tool_version"] = __version__
    provenance["tail_len"] = tail_len

    def one(name):
        return analyze_space(matrices[name], populations.get(name), tail_len)

    names = list(matrices)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, names))
    else:
        results = [one(n) for n in names]
    sections = {n: r[0] for n, r in zip(names, results)}
    assignments = {n: r[1] for n, r in zip(names, results)}
    report = {"provenance": provenance, "spaces": sections}
    report.update(_cross_space(sections, assignments))
    return report


def dump_report(report):
    """Canonical JSON text of a report."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def report_hash(report):
    return hashlib.sha256(dump_report(report).encode()).hexdigest()


def _write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(header) + "\n")
        for row in rows:
            f.write("\t".join("" if v is None else repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def emit_plot_tables(report, out_dir):
    """Write the TSV data behind the layer-fit, histogram and profile figures.

    Returns the written paths. Raises :class:`DomainError` for a report with
    no spaces, before touching the filesystem.
    """
    spaces = report.get("spaces") or {}
    if not spaces:
        raise DomainError("report contains no attitude spaces; nothing to tabulate")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for space, sec in spaces.items():
        for layer in sec["layers"]:
            fit = layer["fit"]
            if fit is None:
                continue
            params = LayerParams(layer["J"], fit["m_hat"], fit["beta_hat"], fit["g"])
            B = np.array(layer["B"], dtype=float)
            fitted = np.atleast_1d(expected_charge(params, B)).tolist()
            rows = [(b, u, f, u - f) for b, u, f in zip(layer["B"], layer["mean_U"], fitted)]
            path = out / f"fit_{space}_J{layer['J']:g}.tsv"
            _write_tsv(path, ["B", "mean_U", "fitted_U", "residual"], rows)
            written.append(path)
        hist = sec["histograms"]
        rows = [(int(b), ub, c)
                for b, counts in hist["counts"].items()
                for ub, c in zip(hist["upper_bounds"], counts)]
        path = out / f"hist_{space}.tsv"
        _write_tsv(path, ["B", "upper_bound", "count"], rows)
        written.append(path)
        prof = sec["profile"]
        if prof is not None:
            rows = zip(prof["B"], prof["chi"], prof["differential_chi"], prof["variance"])
            path = out / f"profile_{space}.tsv"
            _write_tsv(path, ["B", "chi", "differential_chi", "variance"], rows)
            written.append(path)
    return written
