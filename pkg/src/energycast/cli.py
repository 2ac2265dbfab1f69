"""Command-line front end: ``energycast synth | fuse | train | tune | evaluate | ablate``.

Options may come from a JSON file (``--config``); flags given on the command
line override it. Every command writes its outputs atomically into ``--out``
together with ``run_manifest.json`` (resolved config, seed, input and output
digests).

Exit status: 0 success, 1 usage error, 2 data error, 3 training divergence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, evaluation, forecast, tune
from .align import GRID_INTERVAL, AlignedDataset, fuse
from .datagen import BuildingKind, DEFAULT_START, profile, synth_building
from .errors import DataError, DivergedTraining
from .features import chronological_split, correlations, correlations_csv, feature_scores, scores_csv
from .ingest import Channel, parse_series, parse_timestamp, serialize_series
from .models import load_model, save_model

log = logging.getLogger("energycast")

MANIFEST = "run_manifest.json"
DAY_LABELS = {1: "1 day", 7: "1 week", 30: "1 month", 60: "2 months", 90: "3 months",
              182: "6 months", 365: "1 year"}
HYPER_FLAGS = {
    "ridge": ("alpha",),
    "tree": ("max_depth", "min_samples_split"),
    "forest": ("n_estimators", "max_depth", "min_samples_split"),
    "lstm": ("units", "dense", "batch", "epochs", "lr", "rho"),
}
DEFAULTS = {
    "seed": 42,
    "out": ".",
    "profile": "academic",
    "days": 90,
    "start": None,
    "noise": None,
    "input": None,
    "grid": GRID_INTERVAL,
    "utc_offset": 0,
    "data": None,
    "model": "lstm",
    "ratios": [0.70, 0.15, 0.15],
    "window": None,
    "lags": None,
    "budget": 10,
    "radius": 1,
    "timing": False,
    "model_file": None,
    "overlay_rows": 300,
    "spans": [1, 7, 30, 182, 365],
    "building": [],
    "compare": [],
    "lengths": [365, 182, 90, 60, 30],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _strs(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    shared.add_argument("--config", help="JSON file with option values")
    shared.add_argument("--seed", type=int, help="random seed (default 42)")
    shared.add_argument("--out", help="output directory (default .)")
    shared.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    data.add_argument("--data", help="fused CSV")
    data.add_argument("--utc-offset", type=int, dest="utc_offset",
                      help="seconds east of UTC defining local days (default 0)")
    data.add_argument("--ratios", type=_floats, help="train,val,test split ratios")

    model = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    model.add_argument("--model", choices=forecast.KINDS)
    model.add_argument("--alpha", type=float)
    model.add_argument("--max-depth", type=int, dest="max_depth")
    model.add_argument("--min-samples-split", type=int, dest="min_samples_split")
    model.add_argument("--n-estimators", type=int, dest="n_estimators")
    model.add_argument("--units", type=int)
    model.add_argument("--dense", type=int)
    model.add_argument("--batch", type=int)
    model.add_argument("--epochs", type=int)
    model.add_argument("--lr", type=float)
    model.add_argument("--rho", type=float)
    model.add_argument("--window", type=int, help="LSTM input window in grid steps")
    model.add_argument("--lags", type=int, help="lag days for the tabular models")

    p = _Parser(prog="energycast", description="Building energy forecasting pipeline.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", parents=[shared], help="generate synthetic channel CSVs",
                       argument_default=argparse.SUPPRESS)
    s.add_argument("--profile", choices=[k.value for k in BuildingKind])
    s.add_argument("--days", type=int)
    s.add_argument("--noise", type=float)
    s.add_argument("--start", help="first day, ISO date (default 2014-01-01)")

    f = sub.add_parser("fuse", parents=[shared], help="fuse channel CSVs onto the grid",
                       argument_default=argparse.SUPPRESS)
    f.add_argument("--input", help="directory holding <channel>.csv files")
    for ch in Channel:
        f.add_argument(f"--{ch.value}", help=f"{ch.value} CSV (overrides --input)")
    f.add_argument("--grid", type=int, help="grid interval in seconds (default 600)")
    f.add_argument("--utc-offset", type=int, dest="utc_offset")

    sub.add_parser("train", parents=[shared, data, model], help="train one model",
                   argument_default=argparse.SUPPRESS)

    t = sub.add_parser("tune", parents=[shared, data, model], help="random then grid search",
                       argument_default=argparse.SUPPRESS)
    t.add_argument("--budget", type=int, help="random-search trials")
    t.add_argument("--radius", type=int, help="grid neighbours per axis")
    t.add_argument("--timing", action="store_true", help="record wall-clock training times")

    e = sub.add_parser("evaluate", parents=[shared, data, model], help="reports and plot data",
                       argument_default=argparse.SUPPRESS)
    e.add_argument("--model-file", dest="model_file")
    e.add_argument("--overlay-rows", type=int, dest="overlay_rows")
    e.add_argument("--spans", type=_ints, help="horizon spans in days")
    e.add_argument("--building", action="append", help="NAME=fused.csv, repeatable")
    e.add_argument("--compare", type=_strs, help="model kinds for the MAE bar table")

    a = sub.add_parser("ablate", parents=[shared, data, model], help="training-length ablation",
                       argument_default=argparse.SUPPRESS)
    a.add_argument("--lengths", type=_ints, help="training lengths in days")
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    given = vars(args).copy()
    cfg = dict(DEFAULTS)
    path = given.pop("config", None)
    if path:
        try:
            from_file = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read config {path}: {exc}") from None
        if not isinstance(from_file, dict):
            raise DataError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in from_file.items()})
    cfg.update(given)
    cfg["out"] = str(Path(cfg["out"]).resolve())
    for key in ("data", "input", "model_file", *(c.value for c in Channel)):
        if cfg.get(key):
            cfg[key] = str(Path(cfg[key]).resolve())
    ratios = cfg["ratios"]
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9 or min(ratios) < 0:
        raise UsageError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    return cfg


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Run:
    """Collects inputs/outputs of one command and writes them atomically."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs, self.outputs = {}, {}

    def read(self, path) -> bytes:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from None
        self.inputs[str(path)] = _digest(data)
        return data

    def write(self, name: str, data: bytes):
        fd, tmp = tempfile.mkstemp(dir=self.out, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, self.out / name)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        self.outputs[name] = _digest(data)
        log.info("wrote %s", self.out / name)

    def finish(self):
        manifest = {
            "command": self.cfg["command"],
            "version": __version__,
            "seed": self.cfg["seed"],
            "config": {k: v for k, v in sorted(self.cfg.items()) if k != "verbose"},
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
        }
        self.write(MANIFEST, (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())


def _hyper(cfg) -> dict:
    return {k: cfg[k] for k in HYPER_FLAGS[cfg["model"]] if cfg.get(k) is not None}


def _model_config(cfg) -> dict:
    return forecast.model_config(cfg["model"], _hyper(cfg), cfg["seed"], cfg["window"], cfg["lags"])


def _load_data(run: Run, path=None) -> AlignedDataset:
    path = path or run.cfg["data"]
    if not path:
        raise UsageError("--data is required")
    return AlignedDataset.from_csv(run.read(path), utc_offset=run.cfg["utc_offset"])


def _label(days: int) -> str:
    return DAY_LABELS.get(days, f"{days} days")


def cmd_synth(run: Run):
    cfg = run.cfg
    overrides = {} if cfg["noise"] is None else {"noise": cfg["noise"]}
    start = DEFAULT_START if not cfg["start"] else parse_timestamp(cfg["start"] + "T00:00:00Z")
    channels = synth_building(profile(cfg["profile"], **overrides), cfg["days"], cfg["seed"], start)
    for ch, series in channels.items():
        run.write(f"{ch.value}.csv", serialize_series(series))


def cmd_fuse(run: Run):
    cfg = run.cfg
    channels = {}
    for ch in Channel:
        path = cfg.get(ch.value) or (cfg["input"] and str(Path(cfg["input"]) / f"{ch.value}.csv"))
        if not path:
            raise UsageError(f"no file for channel {ch.value}; pass --input or --{ch.value}")
        channels[ch] = parse_series(run.read(path), ch, cfg["utc_offset"])
    d = fuse(channels, cfg["grid"], cfg["utc_offset"])
    run.write("fused.csv", d.to_csv())


def cmd_train(run: Run):
    cfg = run.cfg
    d = _load_data(run)
    split = chronological_split(d, cfg["ratios"])
    art = forecast.fit(d, split.train, cfg["model"], _model_config(cfg))
    run.write("model.decm", save_model(art))
    if art.history:
        lines = ["epoch,train_mae"] + [f"{i},{v!r}" for i, v in enumerate(art.history, start=1)]
    else:
        p = forecast.predict(art, d, split.train)
        lines = ["epoch,train_mae", f"1,{evaluation.mae(p.actual_norm, p.predicted_norm)!r}"]
    run.write("train_log.csv", ("\n".join(lines) + "\n").encode())


def cmd_tune(run: Run):
    cfg = run.cfg
    d = _load_data(run)
    split = chronological_split(d, cfg["ratios"])
    kind = cfg["model"]
    space = dict(tune.DEFAULT_SPACES[kind])
    # explicitly fixed hyperparameters are not searched
    fixed = {k: v for k, v in _hyper(cfg).items() if k in space}
    for k, v in fixed.items():
        space[k] = tune.Choice((v,))
    best, rand, grid = tune.two_stage_search(
        space, cfg["budget"], cfg["seed"], d, kind, cfg["radius"], split, cfg["window"], cfg["lags"]
    )
    run.write("trials_random.csv", tune.trials_csv(rand, cfg["timing"]))
    run.write("trials.csv", tune.trials_csv(grid, cfg["timing"]))
    summary = {"model": kind, "config": best.config, "val_mae": best.val_mae, "seed": best.seed}
    run.write("best.json", (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode())


def cmd_evaluate(run: Run):
    cfg = run.cfg
    if cfg["building"]:
        return _evaluate_buildings(run)
    if not cfg["model_file"]:
        raise UsageError("--model-file is required (or use --building)")
    d = _load_data(run)
    art = load_model(run.read(cfg["model_file"]))
    split = chronological_split(d, cfg["ratios"])

    p = forecast.predict(art, d, split.test)
    run.write("report.csv", evaluation.EvalReport([evaluation.score("test", p, split.test)]).to_csv())

    n_test = len(split.test)
    spans = []
    for days in cfg["spans"]:
        if days * 86400 // d.grid_interval <= n_test:
            spans.append((_label(days), days))
        else:
            log.warning("skipping %s horizon: test split has only %d rows", _label(days), n_test)
    if spans:
        run.write("horizon.csv", evaluation.horizon_report(art, d, split.test, spans).to_csv())
    rows = evaluation.forecast_overlay(art, d, split.test, cfg["overlay_rows"])
    run.write("overlay.csv", evaluation.overlay_csv(rows))
    run.write("feature_scores.csv", scores_csv(feature_scores(d)))
    run.write("correlations.csv", correlations_csv(correlations(d)))


def _evaluate_buildings(run: Run):
    cfg = run.cfg
    datasets = {}
    for item in cfg["building"]:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--building expects NAME=PATH, got {item!r}")
        datasets[name] = _load_data(run, str(Path(path).resolve()))
    report = evaluation.building_report(datasets, cfg["model"], _model_config(cfg), cfg["ratios"])
    run.write("buildings.csv", report.to_csv())
    if cfg["compare"]:
        configs = {
            k: forecast.model_config(k, None, cfg["seed"], cfg["window"], cfg["lags"])
            for k in cfg["compare"]
        }
        configs[cfg["model"]] = _model_config(cfg)
        bars = evaluation.mae_bars(datasets, configs, cfg["ratios"])
        run.write("mae_bars.csv", evaluation.mae_bars_csv(bars))


def cmd_ablate(run: Run):
    cfg = run.cfg
    d = _load_data(run)
    lengths = [(_label(n), n) for n in cfg["lengths"]]
    report = evaluation.ablation_report(d, lengths, cfg["model"], _model_config(cfg), cfg["ratios"])
    run.write("ablation.csv", report.to_csv())


COMMANDS = {
    "synth": cmd_synth,
    "fuse": cmd_fuse,
    "train": cmd_train,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
            format="%(levelname)s: %(message)s",
            stream=sys.stderr,
        )
        cfg = resolve(args)
        if cfg["model"] not in forecast.KINDS:
            raise UsageError(f"unknown model kind {cfg['model']!r}")
        run = Run(cfg)
        COMMANDS[cfg["command"]](run)
        run.finish()
    except UsageError as exc:
        print(f"energycast: usage error: {exc}", file=sys.stderr)
        return 1
    except DivergedTraining as exc:
        print(f"energycast: training diverged: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"energycast: data error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
