"""Command-line front end: optimize, evaluate, matrix sweeps, regression.

Exit codes: 0 ok, 2 config/input error, 3 internal evaluation failure,
4 insufficient data.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__, gait
from .analysis import compare_archives, regress_load
from .errors import ConfigError, EvaluationError, InsufficientDataError
from .io import read_archive, write_archive, write_generations_csv, write_json, write_trace_csv
from .pipeline import evaluate_genome, load_run_config, run_optimization

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EVAL = 3
EXIT_DATA = 4


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args, **kwargs):
    return load_run_config(
        args.config,
        seed=getattr(args, "seed", None),
        objective_count=getattr(args, "objectives", None),
        **kwargs,
    )


def cmd_optimize(args):
    cfg = _load_config(args)
    out = _out_dir(args)
    archive, result = run_optimization(cfg, jobs=args.jobs)
    meta = dict(archive.metadata)
    meta["version"] = __version__
    archive.metadata = meta
    write_archive(out / "archive.json", archive)
    write_generations_csv(out / "generations.csv", result.history)
    print(f"wrote {out / 'archive.json'} ({len(archive.entries)} entries)")
    return EXIT_OK


def _resolve_genome(args, cfg):
    if args.genome is not None:
        try:
            return np.array([float(v) for v in args.genome.split(",")])
        except ValueError as exc:
            raise ConfigError(f"--genome must be comma-separated floats: {exc}") from exc
    if args.archive is not None:
        archive = read_archive(args.archive)
        if not 0 <= args.index < len(archive.entries):
            raise ConfigError(
                f"--index {args.index} out of range for {len(archive.entries)} entries"
            )
        return archive.entries[args.index].genome
    raise ConfigError("eval needs --genome or --archive")


def cmd_eval(args):
    cfg = _load_config(args)
    out = _out_dir(args)
    genome = _resolve_genome(args, cfg)
    # Bound validation happens in decode/validate and raises ConfigError.
    gait.genome_decode(genome, cfg.gait_name, cfg.robot.leg_count).validate(cfg.gait_name)
    trace, triple, violation = evaluate_genome(cfg, genome)
    summary = {
        "genome": genome,
        "objectives_min": triple,
        "f_speed": -float(triple[0]),
        "f_stability": -float(triple[1]),
        "f_load": float(triple[2]),
        "constraint_violation": violation,
        "trace": trace.summary(),
        "config_hash": cfg.hash(),
    }
    write_json(out / "summary.json", summary)
    write_trace_csv(out / "trace.csv", trace)
    print(f"wrote {out / 'summary.json'} (failure={trace.failure})")
    return EXIT_OK


def _matrix_cells(cfg_data, base_dir):
    block = cfg_data.get("matrix", {})
    morphologies = block.get("morphologies", [])
    terrains = block.get("terrains", [])
    skip = {tuple(s) for s in block.get("skip", [])}
    if not morphologies or not terrains:
        raise ConfigError("matrix block needs non-empty 'morphologies' and 'terrains'")
    from .robot import load_morphology

    cells = []
    for morph in morphologies:
        mp = base_dir / str(morph)
        robot = load_morphology(mp if mp.exists() else morph)
        gaits = block.get("gaits") or [
            g for g, k in gait.GAIT_LEG_COUNT.items() if k == robot.leg_count
        ]
        for g in gaits:
            if gait.GAIT_LEG_COUNT[g] != robot.leg_count:
                continue
            for t in terrains:
                cells.append((str(morph), robot.leg_count, g, str(t),
                              (g, str(t)) in skip))
    return cells


def cmd_matrix(args):
    import copy
    import sys as _sys

    if _sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {args.config}")
    with open(path, "rb") as f:
        data = tomllib.load(f)
    cells = _matrix_cells(data, path.parent)
    out = _out_dir(args)
    from .pipeline import build_run_config

    results = []
    for morph, legs, gait_name, terrain_kind, skipped in cells:
        if skipped:
            results.append((morph, legs, gait_name, terrain_kind, "-"))
            continue
        cell_data = copy.deepcopy(data)
        cell_data.pop("matrix", None)
        cell_data["morphology"] = morph
        cell_data["gait"] = gait_name
        cell_data.setdefault("terrain", {})["kind"] = terrain_kind
        if args.seed is not None:
            cell_data.setdefault("optimizer", {})["seed"] = int(args.seed)
        try:
            cfg = build_run_config(cell_data, base_dir=path.parent)
            archive, _ = run_optimization(cfg, jobs=args.jobs)
            success = any(
                e.violation == 0.0 and e.summary.get("failure") is None
                for e in archive.entries
            )
            results.append((morph, legs, gait_name, terrain_kind, "ok" if success else "fail"))
        except Exception as exc:  # noqa: BLE001 - per-cell errors stay in-table
            results.append((morph, legs, gait_name, terrain_kind, f"err:{type(exc).__name__}"))

    terrains = list(dict.fromkeys(r[3] for r in results))
    lines = [f"{'legs':<6}{'gait':<10}" + "".join(f"{t:<10}" for t in terrains)]
    by_row = {}
    for morph, legs, g, t, mark in results:
        by_row.setdefault((legs, g), {})[t] = mark
    for (legs, g), marks in by_row.items():
        lines.append(
            f"{legs:<6}{g:<10}" + "".join(f"{marks.get(t, ''):<10}" for t in terrains)
        )
    table = "\n".join(lines) + "\n"
    (out / "matrix.txt").write_text(table)
    with open(out / "matrix.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["morphology", "legs", "gait", "terrain", "result"])
        w.writerows(results)
    print(table, end="")
    return EXIT_OK


def cmd_regress(args):
    archive = read_archive(args.archive)
    out = _out_dir(args)
    report = regress_load(archive)
    write_json(out / "regression.json", report.to_dict())
    (out / "regression.txt").write_text(report.to_text() + "\n")
    print(report.to_text())
    return EXIT_OK


def cmd_compare(args):
    a = read_archive(args.with_load)
    b = read_archive(args.without_load)
    summary = compare_archives(a, b)
    out = _out_dir(args)
    write_json(out / "comparison.json", summary)
    print(
        "min load with/without: "
        f"{summary['with_load']['min_load']:.4f} / {summary['without_load']['min_load']:.4f}"
    )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="modgait", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="run config TOML")
        p.add_argument("--seed", type=int, default=None, help="override optimizer seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel evaluations")
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("optimize", help="run the gait optimization")
    common(p)
    p.add_argument("--objectives", type=int, choices=(2, 3), default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("eval", help="evaluate one candidate and export its trace")
    common(p)
    p.add_argument("--genome", default=None, help="comma-separated decision variables")
    p.add_argument("--archive", default=None, help="archive JSON to pick a genome from")
    p.add_argument("--index", type=int, default=0, help="archive entry index")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("matrix", help="morphology x gait x terrain success table")
    common(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("regress", help="regress joint load on gait parameters")
    p.add_argument("--archive", required=True)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("compare", help="compare 3-objective vs load-blind archives")
    p.add_argument("--with-load", dest="with_load", required=True)
    p.add_argument("--without-load", dest="without_load", required=True)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
