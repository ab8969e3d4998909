"""Command-line front end: ``spinhop {recall,image,maxcut,calibrate,sweep}``.

Settings are layered: built-in defaults, then ``--config`` (JSON), then
``SPINHOP_*`` environment variables, then command-line flags.  Each run
writes ``results.json`` and ``trials.csv`` into ``--out``.

Exit codes: 0 success, 1 configuration/input error, 2 numeric fault.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import CalibrationMode, calibrate_vdw
from .config import ConfigError, RunConfig, apply_env, dump_config, load_config
from .device import ParameterError
from .network import NumericFault
from .tasks import (
    CSV_COLUMNS,
    Graph,
    ParseError,
    TrialRecord,
    image_experiment,
    load_best_known,
    load_biqmac,
    load_image_grid,
    maxcut_experiment,
    random_graph,
    recall_experiment,
)

log = logging.getLogger("spinhop")

EXIT_OK, EXIT_CONFIG, EXIT_FAULT = 0, 1, 2
TRACE_EVERY_DEFAULT = 100
# environment variables that are read directly rather than as config overrides
RESERVED_ENV = {"SPINHOP_BIQMAC_DIR"}


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; this CLI reserves 2 for numeric faults
    def error(self, message):
        raise ConfigError(message, "argv")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file, or 'default'")
    common.add_argument("--seed", type=int)
    common.add_argument("--dt-ps", type=float, help="integration step in ps")
    common.add_argument("--t-max-ns", type=float, help="free-running time limit in ns")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, help="parallel trial processes")
    common.add_argument("--traces", action="store_true", default=None, help="write trace_<trial>.csv files")
    common.add_argument(
        "--parity", action="store_true", help="literal closed-form variants: no_metal calibration and N+1 drive branches"
    )
    common.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="spinhop", description="Spintronic Hopfield network simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("recall", parents=[common], help="associative recall trials")
    p.add_argument("--n", type=int)
    p.add_argument("--patterns", type=int, help="stored patterns per trial")
    p.add_argument("--trials", type=int)
    p.add_argument("--distortion", type=float, help="flip this fraction of a stored pattern (default: random input)")
    p.add_argument("--exhaustive", action="store_true", default=None, help="every pattern x every input")

    p = sub.add_parser("image", parents=[common], help="distorted 10x10 image recall")
    p.add_argument("--levels", type=_floats, help="comma-separated distortion fractions")
    p.add_argument("--trials", type=int, help="trials per level")
    p.add_argument("--images", nargs="+", help="image grid files (default: bundled glyphs)")

    p = sub.add_parser("maxcut", parents=[common], help="max-cut on graph files")
    p.add_argument(
        "--graph", nargs="+",
        help="graph file, instance name looked up in $SPINHOP_BIQMAC_DIR, or random:N:DENSITY:SEED",
    )  # fmt: skip
    p.add_argument("--best-known", help="sidecar of 'instance optimum' lines (default: bundled)")

    p = sub.add_parser("calibrate", parents=[common], help="print the V_DW calibration")
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=[m.value for m in CalibrationMode])

    p = sub.add_parser("sweep", parents=[common], help="recall accuracy across network sizes")
    p.add_argument("--sizes", type=_ints, help="comma-separated network sizes")
    p.add_argument("--patterns", type=int)
    p.add_argument("--trials", type=int)
    return parser


def resolve_config(ns: argparse.Namespace, environ=None) -> RunConfig:
    cfg = load_config(ns.config)
    environ = dict(os.environ if environ is None else environ)
    for key in RESERVED_ENV:
        environ.pop(key, None)
    cfg = apply_env(cfg, environ)
    if cfg.experiment not in (None, ns.command):
        raise ConfigError(f"config describes a {cfg.experiment!r} run, not {ns.command!r}", "experiment.name")
    sim = cfg.sim
    changes = {}
    if ns.dt_ps is not None:
        changes["dt"] = ns.dt_ps * 1e-12
    if ns.t_max_ns is not None:
        changes["t_max"] = ns.t_max_ns * 1e-9
    if ns.parity:
        changes.update(calibration="no_metal", drive_branches="literal")
    try:
        sim = sim.with_(**changes)
    except ParameterError as exc:
        raise ConfigError(str(exc), "argv") from None
    cfg = cfg.with_(sim=sim)
    if ns.seed is not None:
        cfg = cfg.with_(seed=ns.seed)
    if ns.workers is not None:
        cfg = cfg.with_(workers=ns.workers)
    if ns.out is not None:
        cfg = cfg.with_(out_dir=ns.out)
    if ns.traces:
        cfg = cfg.with_(traces=True)
    if cfg.traces and cfg.sim.trace_every == 0:
        cfg = cfg.with_(sim=cfg.sim.with_(trace_every=TRACE_EVERY_DEFAULT))

    args = cfg.experiment_args(ns.command)
    flag_map = {
        "recall": ("n", "patterns", "trials", "distortion", "exhaustive"),
        "image": ("levels", "trials", "images"),
        "maxcut": ("graph", "best_known"),
        "calibrate": ("n", "mode"),
        "sweep": ("sizes", "patterns", "trials"),
    }[ns.command]
    for name in flag_map:
        value = getattr(ns, name, None)
        if value is not None:
            args[name] = value
    return cfg.with_(experiment=ns.command, args=args)


# ---------------------------------------------------------------- output


def write_outputs(cfg: RunConfig, summary: dict, records: Sequence[TrialRecord]) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {
        "command": cfg.experiment,
        "config": json.loads(dump_config(cfg)),
        "summary": summary,
        "trials": [r.to_dict() for r in records],
    }
    (out / "results.json").write_text(json.dumps(results, indent=1, default=_json_default))
    with open(out / "trials.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in records:
            writer.writerow(r.row())
    if cfg.traces:
        for r in records:
            rep = r.report
            if rep.trace is None:
                continue
            with open(out / f"trace_{r.trial}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t_ns"] + [f"soma_{j}_nm" for j in range(rep.trace.shape[1])])
                for t, row in zip(rep.trace_t, rep.trace):
                    writer.writerow([f"{t * 1e9:.6g}"] + [f"{x * 1e9:.6g}" for x in row])
    return out


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _fmt(summary: dict) -> str:
    parts = []
    for k, v in summary.items():
        if isinstance(v, float):
            parts.append(f"{k}={v:.4g}")
        elif isinstance(v, (int, str)):
            parts.append(f"{k}={v}")
    return " ".join(parts)


# ---------------------------------------------------------------- commands


def _recall_summary(stats) -> dict:
    s = stats.summary()
    return {
        "n": s["n"],
        "n_patterns": s["n_patterns"],
        "trials": s["trials"],
        "full_recall_rate": s["full_recall_rate"],
        "bitwise_accuracy": s["bitwise_accuracy"],
        "mean_t_converge_ns": s["mean_t_converge"] * 1e9,
        "mean_energy_nJ": s["mean_energy"] * 1e9,
        "faults": s["faults"],
    }


def cmd_recall(cfg: RunConfig) -> tuple[dict, list]:
    a = cfg.args
    stats = recall_experiment(
        int(a["n"]),
        pattern_count=int(a["patterns"]),
        trials=int(a["trials"]),
        distortion=a["distortion"],
        seed=cfg.seed,
        config=cfg.sim,
        params=cfg.device,
        exhaustive=bool(a["exhaustive"]),
        workers=cfg.workers,
    )
    return _recall_summary(stats), stats.records


def cmd_sweep(cfg: RunConfig) -> tuple[dict, list]:
    a = cfg.args
    per_size = []
    records = []
    for n in a["sizes"]:
        stats = recall_experiment(
            int(n), pattern_count=int(a["patterns"]), trials=int(a["trials"]), seed=cfg.seed,
            config=cfg.sim, params=cfg.device, workers=cfg.workers,
        )  # fmt: skip
        per_size.append(_recall_summary(stats))
        offset = len(records)
        for r in stats.records:
            r.trial += offset
            r.instance = f"n{n}"
        records += stats.records
        print(_fmt(per_size[-1]))
    summary = {
        "sizes": list(a["sizes"]),
        "trials": len(records),
        "faults": sum(s["faults"] for s in per_size),
        "per_size": per_size,
    }
    return summary, records


def cmd_image(cfg: RunConfig) -> tuple[dict, list]:
    a = cfg.args
    images = None if not a["images"] else [load_image_grid(Path(p)) for p in a["images"]]
    stats = image_experiment(
        images, a["levels"], int(a["trials"]), seed=cfg.seed, config=cfg.sim, params=cfg.device, workers=cfg.workers
    )
    summary = {
        "levels": stats.levels,
        "mean_pixel_error": {f"{lv:g}": e for lv, e in stats.mean_pixel_error.items()},
        "trials": len(stats.records),
    }
    return summary, stats.records


def resolve_graph(spec: str) -> tuple[str, Graph]:
    """Instance name and graph for a path, a Biq Mac instance name, or ``random:N:DENSITY:SEED``."""
    if spec.startswith("random:"):
        try:
            _, n, dens, seed = spec.split(":")
            return spec, random_graph(int(n), float(dens), seed=int(seed))
        except ValueError:
            raise ConfigError(f"expected random:N:DENSITY:SEED, got {spec!r}", "--graph") from None
    path = Path(spec)
    if not path.is_file():
        base = os.environ.get("SPINHOP_BIQMAC_DIR")
        if base and (Path(base) / spec).is_file():
            path = Path(base) / spec
        else:
            raise ConfigError(f"graph file not found: {spec}", "--graph")
    return path.name, load_biqmac(path)


def cmd_maxcut(cfg: RunConfig) -> tuple[dict, list]:
    a = cfg.args
    if not a["graph"]:
        raise ConfigError("at least one graph is required", "--graph")
    best = load_best_known(a["best_known"])
    records = []
    for idx, spec in enumerate(a["graph"]):
        name, graph = resolve_graph(spec)
        res = maxcut_experiment(graph, cfg.sim, cfg.device, best_known=best.get(name))
        records.append(
            TrialRecord(
                trial=idx, stored=[], input_bits="", report=res.report,
                cut=res.cut, ratio=res.cut_ratio, instance=name,
            )
        )  # fmt: skip
    ratios = [r.ratio for r in records if r.ratio is not None]
    cuts = [r.cut for r in records]
    known = [best[r.instance] for r in records if r.instance in best]
    summary = {
        "graphs": len(records),
        "mean_cut_ratio": float(np.mean(ratios)) if ratios else None,
        "aggregate_cut_ratio": (
            float(sum(r.cut for r in records if r.instance in best) / sum(known)) if known else None
        ),
        "mean_cut": float(np.mean(cuts)),
        "converged": sum(r.report.converged for r in records),
        "mean_t_converge_ns": float(np.mean([r.report.t_converge for r in records])) * 1e9,
        "mean_energy_nJ": float(np.mean([r.report.energy_total for r in records])) * 1e9,
        "mean_power_mW": float(np.mean([r.report.avg_power for r in records])) * 1e3,
    }
    return summary, records


def cmd_calibrate(cfg: RunConfig) -> tuple[dict, list]:
    a = cfg.args
    n = int(a["n"])
    mode = a["mode"]
    if cfg.sim.calibration != "balanced" and mode == "balanced":
        mode = cfg.sim.calibration
    v = calibrate_vdw(cfg.device, n, mode)
    return {"n": n, "mode": str(getattr(mode, "value", mode)), "v_dw_V": v}, []


COMMANDS = {
    "recall": cmd_recall,
    "image": cmd_image,
    "maxcut": cmd_maxcut,
    "calibrate": cmd_calibrate,
    "sweep": cmd_sweep,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        cfg = resolve_config(ns)
        if ns.dump_config:
            print(dump_config(cfg))
            return EXIT_OK
        summary, records = COMMANDS[ns.command](cfg)
    except (ConfigError, ParseError, ParameterError, OSError) as exc:
        print(f"spinhop: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFault as exc:
        print(f"spinhop: numeric fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    if ns.command == "calibrate":
        print(f"V_DW = {summary['v_dw_V']:.6g} V (n={summary['n']}, mode={summary['mode']})")
        return EXIT_OK
    out = write_outputs(cfg, summary, records)
    print(f"{ns.command}: {_fmt(summary)} -> {out}")
    if summary.get("faults"):
        print(f"spinhop: numeric fault in {summary['faults']} trial(s)", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
