"""Command-line entry point: ghostsim <command> --config <path>."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from .branches import compute_branches
from .coherence import config_hash, duality_report
from .config import RunConfig, build, load_config, parse_config, with_value
from .errors import (
    ConfigError,
    DegenerateInputError,
    ExtractionError,
    GhostsimError,
    RegimeError,
    ResolutionError,
)
from .oracle import compare_patterns, propagate_pair
from .pattern import coherence_from_pattern, default_z2_grid, pattern_from_branches

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_REGIME = 0, 1, 2, 3
ORACLE_TOL = 1e-3
DEFAULT_SEED = 0

COMMANDS = ("pattern", "duality", "sweep", "oracle-compare")


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, np.generic):
        return _finite(x.item())
    return x


def dump_json(obj, path):
    text = json.dumps(_finite(obj), sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def effective_snapshot(cfg: RunConfig, seed):
    snap = cfg.snapshot()
    rnd = snap["detector"].get("random")
    if rnd is not None:
        if seed is not None:
            rnd["seed"] = seed
        rnd.setdefault("seed", DEFAULT_SEED)
    return snap


def z2_grid(cfg: RunConfig, built):
    g = cfg.grid
    if g.start is not None:
        return np.linspace(g.start, g.stop, g.points)
    return default_z2_grid(built.src, built.geo, points=g.points, periods=g.periods)


def evaluate(cfg: RunConfig, built, with_pattern=True):
    """Branches, coincidence pattern and duality report for one configuration."""
    br = compute_branches(built.src, built.geo)
    det = built.det.with_probs(br.c)
    pattern = None
    c2_pattern = None
    if with_pattern or br.max_psi_overlap >= 1e-6:
        pattern = pattern_from_branches(
            br, built.det, z2_grid(cfg, built), built.phases,
            {"path_amplitudes": br.c.tolist(), "envelopes": br.envelopes.tolist(),
             "max_psi_overlap": br.max_psi_overlap, "route": "exact"})
        try:
            c2_pattern = coherence_from_pattern(pattern)
        except ExtractionError:
            c2_pattern = None
    report = duality_report(det, br.envelopes, br.envelope_phases + built.phases,
                            pattern_c2=c2_pattern, max_psi_overlap=br.max_psi_overlap)
    return pattern, report


def _write_pattern(p, out, stem, outputs):
    if "csv" in outputs:
        p.to_csv(out / f"{stem}.csv")
    if "json" in outputs:
        dump_json(p.to_dict(), out / f"{stem}.json")
    if "svg" in outputs:
        p.to_svg(out / f"{stem}.svg", title=stem)


def cmd_pattern(cfg, built, out, args, snap):
    pattern, _ = evaluate(cfg, built)
    _write_pattern(pattern, out, "pattern", cfg.outputs)
    bad = not np.all(np.isfinite(pattern.intensity))
    print(f"pattern: {len(pattern.z2_grid)} points written to {out}")
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_duality(cfg, built, out, args, snap):
    pattern, report = evaluate(cfg, built)
    if "svg" in cfg.outputs:
        pattern.to_svg(out / "pattern.svg", title="duality check")
    doc = report.to_dict(config_hash(snap))
    dump_json(doc, out / "duality.json")
    print(json.dumps(_finite(doc), sort_keys=True))
    return EXIT_VIOLATION if report.violated else EXIT_OK


def sweep_point(snapshot, assignment, envelopes, seed):
    """One sweep row. Top-level so worker processes can pickle it."""
    cfg = parse_config(snapshot)
    for path, value in assignment:
        cfg = with_value(cfg, path, value)
    built = build(cfg, seed)
    if envelopes == "equal":
        report = duality_report(built.det, np.ones(built.det.n))
    else:
        _, report = evaluate(cfg, built, with_pattern=False)
    c2 = report.c2_matrix if report.matrix_route else report.c2_pattern
    return {
        **{path: value for path, value in assignment},
        "d_q1": report.d_q1,
        "c2": c2,
        "sum": report.sum,
        "violated": report.violated,
    }


def sweep_rows(cfg: RunConfig, seed=None, workers=1):
    if cfg.sweep is None:
        raise ConfigError("sweep: section required for the sweep command", ["sweep: missing"])
    axes = [[(p.path, float(v)) for v in np.linspace(p.start, p.stop, p.steps)]
            for p in cfg.sweep.parameters]
    points = [tuple(combo) for combo in product(*axes)]
    snap = cfg.snapshot()
    snap.pop("sweep")
    mode = cfg.sweep.envelopes
    # validate every path up front so a bad one fails as a config error
    for path, value in points[0]:
        with_value(cfg, path, value)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(sweep_point, [snap] * len(points), points,
                                 [mode] * len(points), [seed] * len(points)))
    return [sweep_point(snap, pt, mode, seed) for pt in points]


def cmd_sweep(cfg, built, out, args, snap):
    rows = sweep_rows(cfg, args.seed, args.workers)
    names = [p.path for p in cfg.sweep.parameters]
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["d_q1", "c2", "sum", "violated"])
        for r in rows:
            vals = [r[n] for n in names] + [r["d_q1"], r["c2"], r["sum"]]
            w.writerow([("" if v is None else f"{v:.12g}") for v in vals] + [int(r["violated"])])
    dump_json({"schema": 1, "config_hash": config_hash(snap), "rows": rows}, out / "sweep.json")
    n_bad = sum(r["violated"] for r in rows)
    print(f"sweep: {len(rows)} points, {n_bad} bound violations")
    return EXIT_VIOLATION if n_bad else EXIT_OK


def cmd_oracle_compare(cfg, built, out, args, snap):
    if built.oracle is None:
        raise ConfigError("oracle: section required for oracle-compare", ["oracle: missing"])
    result = propagate_pair(built.src, built.geo, built.det, built.oracle, built.phases)
    br = compute_branches(built.src, built.geo)
    exact = pattern_from_branches(br, built.det, result.pattern.z2_grid, built.phases)
    m = compare_patterns(result.pattern, exact)
    doc = {
        "schema": 1,
        "config_hash": config_hash(snap),
        "relative_l2": m.relative_l2,
        "max_abs_error": m.max_abs_error,
        "fringe_offset": m.fringe_offset,
        "visibility_delta": m.visibility_delta,
        "norm_drift": result.norm_drift,
        "tolerance": ORACLE_TOL,
        "passed": m.relative_l2 <= ORACLE_TOL,
    }
    dump_json(doc, out / "oracle_compare.json")
    _write_pattern(result.pattern, out, "oracle_pattern", [o for o in cfg.outputs if o != "json"])
    print(json.dumps(_finite(doc), sort_keys=True))
    return EXIT_OK if doc["passed"] else EXIT_VIOLATION


HANDLERS = {
    "pattern": cmd_pattern,
    "duality": cmd_duality,
    "sweep": cmd_sweep,
    "oracle-compare": cmd_oracle_compare,
}


def make_parser():
    ap = argparse.ArgumentParser(prog="ghostsim", description="Ghost-interference duality simulator.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True,
                    help="JSON config path, or 'strong' / 'weak' for the shipped references")
    ap.add_argument("--out", default=".", help="output directory (created if missing)")
    ap.add_argument("--seed", type=int, default=None, help="seed for a random detector Gram")
    ap.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    return ap


def run(command, cfg: RunConfig, out, seed=None, workers=1) -> int:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    snap = effective_snapshot(cfg, seed)
    built = build(cfg, seed if seed is not None else snap["detector"].get("random", {}).get("seed"))
    dump_json(snap, out / "config.json")
    args = argparse.Namespace(seed=seed, workers=max(1, workers))
    return HANDLERS[command](cfg, built, out, args, snap)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return run(args.command, cfg, args.out, args.seed, args.workers)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegimeError, ResolutionError, ExtractionError) as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_REGIME
    except (DegenerateInputError, GhostsimError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
