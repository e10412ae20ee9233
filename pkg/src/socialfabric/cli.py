"""Command-line entry point."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from contextlib import nullcontext
from pathlib import Path

from . import __version__

log = logging.getLogger("socialfabric")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _load(args):
    from .config import load_config

    return load_config(args.config, override_buffer_check=args.override_buffer_check)


def _out_dir(args, cfg, suffix: str = "") -> Path:
    if getattr(args, "output", None):
        return Path(args.output)
    return cfg.output.directory / suffix if suffix else cfg.output.directory


def cmd_validate(args) -> int:
    cfg = _load(args)
    combos = cfg.fabric.combinations
    print(f"config OK: {args.config}")
    print(f"  hash            {cfg.config_hash}")
    print(f"  mesh            {cfg.mesh.resolution_m:g} m, buffer {cfg.mesh.buffer_m:g} m, {cfg.mesh.boundary_condition}")
    print(f"  indicators      {len(cfg.fabric.indicators)}")
    print(f"  poisson k       {combos['poissons_ratio'].k:g}")
    print(f"  event types     {', '.join(sorted(cfg.events.type_params))}")
    print(f"  configured loads {len(cfg.loads)}")
    return EXIT_OK


def cmd_fabric(args) -> int:
    from .analysis import prepare_scenario
    from .io import write_material_rasters

    cfg = _load(args)
    prep = prepare_scenario(cfg, events=[])
    files = write_material_rasters(prep, _out_dir(args, cfg, "fabric"))
    for name, path in files.items():
        grid = getattr(prep.materials, {"thickness": "h", "youngs_modulus": "E", "poissons_ratio": "nu"}[name])
        print(f"{name:15s} min {grid.min():.6g}  max {grid.max():.6g}  -> {path}")
    return EXIT_OK


def cmd_forces(args) -> int:
    from .analysis import prepare_scenario
    from .io import ensure_writable
    from .plots import event_map

    cfg = _load(args)
    prep = prepare_scenario(cfg)
    out = ensure_writable(_out_dir(args, cfg, "forces"))
    table = out / "forces.csv"
    with table.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["event_type", "sub_event_type", "x_m", "y_m", "magnitude_n", "distribution", "radius_m"])
        for f in prep.forces:
            w.writerow([f.event_type, f.sub_event_type, repr(f.location.x), repr(f.location.y),
                        repr(f.magnitude), f.distribution, repr(f.radius)])
    image = event_map(prep, out / "forces.png", boundary=cfg.output.boundary_file)
    if prep.event_report is not None:
        print(json.dumps(prep.event_report.as_dict(), indent=2))
    print(f"{len(prep.forces)} forces -> {table}, {image}")
    return EXIT_OK


def cmd_run(args) -> int:
    from .analysis import run_scenario
    from .io import ensure_writable, write_outputs

    cfg = _load(args)
    out = ensure_writable(_out_dir(args, cfg))
    result = run_scenario(cfg)
    bundle = write_outputs(result, cfg, out)
    m = result.metrics
    print(f"max displacement {m.max_displacement:.6g} m, affected area {m.affected_area:.4g} %, "
          f"max von Mises {m.max_von_mises:.6g} Pa")
    for key, path in sorted(bundle.files.items()):
        print(f"  {key:18s} {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    from .analysis import compare_fields
    from .io import ensure_writable, load_result_dir, write_csv_grid

    w_a, meta_a = load_result_dir(args.result_a)
    w_b, meta_b = load_result_dir(args.result_b)
    cmp = compare_fields(w_a, w_b, meta_a["metrics"], meta_b["metrics"])
    doc = {
        "a": {"path": str(args.result_a), "config_hash": meta_a.get("config_hash")},
        "b": {"path": str(args.result_b), "config_hash": meta_b.get("config_hash")},
        "deltas": cmp.deltas,
        "max_abs_difference_m": float(abs(cmp.difference).max()),
    }
    if args.output:
        out = ensure_writable(args.output)
        write_csv_grid(out / "difference.csv", cmp.difference, "field=displacement_b_minus_a_m rows=north_to_south")
        (out / "comparison.json").write_text(json.dumps(doc, indent=2))
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_all

    checks = run_all(quick=args.quick)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_RUNTIME


def cmd_demo_data(args) -> int:
    from .demo import write_demo

    paths = write_demo(Path(args.directory))
    print(f"demo scenario written; config: {paths['config']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="socialfabric", description="Plate-bending model of conflict impact.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=None, help="limit BLAS/LAPACK threads")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--override-buffer-check", action="store_true",
                   help="accept buffers below the 300 km minimum")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a scenario config")
    s.add_argument("config")
    s.set_defaults(func=cmd_validate)
    for name, func, text in (
        ("fabric", cmd_fabric, "write material-field rasters"),
        ("forces", cmd_forces, "write the force table and event map"),
        ("run", cmd_run, "run the full pipeline"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("config")
        s.add_argument("-o", "--output", help="output directory (default from config)")
        s.set_defaults(func=func)

    s = sub.add_parser("compare", help="difference of two result directories (b - a)")
    s.add_argument("result_a")
    s.add_argument("result_b")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("bench", help="classical benchmarks and property suite")
    s.add_argument("--quick", action="store_true", help="use a 20 km mesh for the property suite")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("demo-data", help="regenerate the synthetic demo scenario into a directory")
    s.add_argument("directory")
    s.set_defaults(func=cmd_demo_data)
    return p


def main(argv=None) -> int:
    from .analysis import StageError
    from .config import ConfigError
    from .translate import TranslationError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        from threadpoolctl import threadpool_limits

        limiter = threadpool_limits(limits=max(args.threads, 1))
    else:
        limiter = nullcontext()
    with limiter:
        try:
            return args.func(args)
        except (ConfigError, TranslationError) as exc:
            print(f"error [config] {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        except StageError as exc:
            print(f"error {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        except Exception as exc:  # noqa: BLE001
            print(f"error [{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
