"""Command line entry point ``lsts``.

Subcommands::

    lsts run    --config grid.yaml
    lsts charts --csv results.csv --out charts/
    lsts bounds --config bounds.yaml
    lsts gen    --config dataset.yaml
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import yaml

from . import bounds, dgp
from .charts import emit_charts
from .experiments import ExperimentConfig, run_experiment
from .noise import ParetoSpec, SubWeibullSpec, split

log = logging.getLogger("lsts")


def load_yaml(path) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise SystemExit(f"{path}: expected a mapping at the top level")
    return raw


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_dict(load_yaml(args.config))
    if args.csv:
        cfg.csv_path = args.csv
    if cfg.csv_path is None:
        raise SystemExit("config must set csv_path (or pass --csv)")
    n = 0
    for row in run_experiment(cfg):
        n += 1
        log.info("d=%d T=%d eta=%g %s rep=%d err=%.5g iters=%d", row.d, row.T, row.eta,
                 row.penalty, row.rep, row.gen_error, row.iters)
    print(f"wrote {n} new rows to {cfg.csv_path}")
    if cfg.chart_dir:
        paths = emit_charts(cfg.csv_path, cfg.chart_dir)
        print(f"wrote {len(paths)} charts to {cfg.chart_dir}")
    return 0


def cmd_charts(args) -> int:
    paths = emit_charts(args.csv, args.out)
    for p in paths:
        print(p)
    return 0


_BOUND_FIELDS = set(bounds.BoundParams.__dataclass_fields__) - {"gamma", "slowly_varying"}


def cmd_bounds(args) -> int:
    raw = load_yaml(args.config)
    family = raw.pop("family", "subweibull")
    gammas = raw.pop("gamma_grid")
    out = raw.pop("out", None)
    mc = raw.pop("mc", {}) or {}
    unknown = set(raw) - _BOUND_FIELDS
    if unknown:
        raise SystemExit(f"unknown bound parameters: {sorted(unknown)}")
    params = bounds.BoundParams(gamma=float(gammas[0]), **raw)
    rows = bounds.bound_grid(family, params, gammas, n_reps=int(mc.get("n_reps", 0)),
                             seed=int(mc.get("seed", 0)), r_index=mc.get("r_index"),
                             j_index=int(mc.get("j_index", 1)), d=int(mc.get("d", 5)))
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=bounds.BOUND_CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)
    finally:
        if out:
            fh.close()
    return 0


def cmd_gen(args) -> int:
    raw = load_yaml(args.config)
    d, T = int(raw["d"]), int(raw["T"])
    seed = int(raw.get("seed", 0))
    family = raw.get("noise", "subweibull")
    eta = float(raw.get("eta", 1.0))
    scale = float(raw.get("noise_scale", 1.0))
    noise = SubWeibullSpec(eta, scale) if family == "subweibull" else ParetoSpec(eta, scale)
    model = dgp.draw_covariate_model(d, T, split(seed, 0), m_order=int(raw.get("m_order", 2)),
                                     rho=float(raw.get("rho", 0.95)))
    ds = dgp.gen_dataset(model, dgp.gen_surface(d, T), noise, split(seed, 1),
                         noise_rng=split(seed, 2))
    out = Path(raw.get("out", "dataset.csv"))
    dgp.export_csv(ds, out)
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsts", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment grid")
    r.add_argument("--config", required=True)
    r.add_argument("--csv", help="override csv_path from the config")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("charts", help="render SVG charts from a results CSV")
    c.add_argument("--csv", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_charts)

    b = sub.add_parser("bounds", help="evaluate tail bounds with Monte Carlo checks")
    b.add_argument("--config", required=True)
    b.set_defaults(func=cmd_bounds)

    g = sub.add_parser("gen", help="export one simulated dataset to CSV")
    g.add_argument("--config", required=True)
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
