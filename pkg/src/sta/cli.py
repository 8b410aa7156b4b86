"""Command-line driver: ``sta train | project | eval | sweep | gen-data``.

Exit codes: 0 success, 1 configuration error, 2 data/model error,
3 numeric divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .analyze import SvgStyle, knn_map_accuracy, map_purity, project, write_svg
from .core import TrainConfig
from .data import (
    PRESETS,
    Dataset,
    apply_normalization,
    dataset_names,
    gen_preset,
    load_csv,
    normalize,
    resolve_dataset,
    save_csv,
)
from .errors import (
    DataError,
    InvalidArgumentError,
    InvalidConfigurationError,
    ModelFileError,
    TrainingDivergedError,
)
from .serialize import load_model, save_model
from .train import fit

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3

log = logging.getLogger("sta")


class ConfigError(Exception):
    pass


@dataclass
class RunManifest:
    config: dict
    dataset: str
    out_dir: str
    files: list[str] = field(default_factory=list)
    duration_s: float = 0.0

    def write(self, out: Path) -> None:
        doc = {"config": self.config, "dataset": self.dataset, "out_dir": self.out_dir, "files": self.files}
        (out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        # kept apart so manifest.json stays byte-identical across reruns
        (out / "timing.json").write_text(json.dumps({"duration_s": self.duration_s}) + "\n", encoding="utf-8")


def _grid(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like ROWSxCOLS, got {text!r}") from None


def _kappas(text: str) -> list[float]:
    try:
        return [float(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"kappas must be a comma-separated list of numbers, got {text!r}") from None


def _add_data_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--data", metavar="PATH", help="CSV file with a header row")
    src.add_argument("--dataset", metavar="NAME", help=f"bundled or generated set: {', '.join(dataset_names())}")
    p.add_argument("--label-col", metavar="NAME", help="label column of --data (default: unlabelled)")
    p.add_argument("--data-seed", type=int, default=0, help="seed for generated toy sets (default 0)")


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=_grid, default=(15, 15), metavar="RxC", help="hidden grid (default 15x15)")
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--sigma0", type=float, default=None, help="initial neighbourhood width (default max(R,C)/2)")
    p.add_argument("--sigma-inf", type=float, default=0.5)
    p.add_argument("--sigma-rbf", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sta", description="Soft-supervised topological autoencoder")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model")
    _add_data_flags(p)
    p.add_argument("--kappa", type=float, default=0.5, help="0 = autoencoder, 1 = classifier (default 0.5)")
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("project", help="project data onto a trained map")
    p.add_argument("--model", required=True, metavar="PATH")
    _add_data_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("eval", help="print map purity and kNN map accuracy")
    p.add_argument("--model", required=True, metavar="PATH")
    _add_data_flags(p)
    p.add_argument("--k", type=int, default=5)

    p = sub.add_parser("sweep", help="train one model per kappa with a shared seed")
    p.add_argument("--dataset", default="iris,wine", metavar="NAMES", help="comma-separated (default iris,wine)")
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--kappas", type=_kappas, default=[0.0, 0.1, 0.8, 1.0], metavar="LIST")
    p.add_argument("--shared-seed", type=int, default=42)
    p.add_argument("--k", type=int, default=5)
    _add_train_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("gen-data", help="write a synthetic toy dataset as CSV")
    p.add_argument("--preset", required=True, metavar="NAME", help=f"one of {', '.join(PRESETS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH")
    return parser


def _load_raw(args) -> Dataset:
    if args.data:
        return load_csv(args.data, label_column=args.label_col)
    return resolve_dataset(args.dataset, seed=args.data_seed)


def _source(args) -> str:
    return args.data if args.data else args.dataset


def _config(args, kappa: float, seed: int) -> TrainConfig:
    rows, cols = args.grid
    try:
        return TrainConfig(
            kappa=kappa,
            eta=args.eta,
            sigma0=args.sigma0,
            sigma_inf=args.sigma_inf,
            epochs=args.epochs,
            rows=rows,
            cols=cols,
            sigma_rbf=args.sigma_rbf,
            seed=seed,
        )
    except InvalidConfigurationError as exc:
        raise ConfigError(str(exc)) from None


def _train_into(dataset: Dataset, config: TrainConfig, out: Path, source: str) -> tuple:
    if config.kappa > 0 and not dataset.has_labels:
        raise ConfigError(f"kappa={config.kappa} > 0 requires labels; pass --label-col or use kappa 0")
    start = time.perf_counter()
    model, history = fit(dataset, config)
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / "model.json")
    history.write_csv(out / "history.csv")
    manifest = RunManifest(config.to_dict(), source, str(out), ["model.json", "history.csv", "manifest.json"])
    manifest.duration_s = time.perf_counter() - start
    manifest.write(out)
    return model, history


def cmd_train(args) -> int:
    config = _config(args, args.kappa, args.seed)
    dataset = normalize(_load_raw(args))
    _train_into(dataset, config, Path(args.out), _source(args))
    print(f"wrote {Path(args.out) / 'model.json'}")
    return EXIT_OK


def _model_data(args):
    model = load_model(args.model)
    raw = _load_raw(args)
    if raw.d != model.input_dim:
        raise DataError(f"data has {raw.d} features, model expects {model.input_dim}")
    if model.norm_min is not None and model.norm_max is not None:
        return model, apply_normalization(raw, model.norm_min, model.norm_max)
    return model, normalize(raw)


def cmd_project(args) -> int:
    model, dataset = _model_data(args)
    proj = project(model, dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    proj.write_csv(out / "projection.csv")
    write_svg(proj, out / "map.svg")
    print(f"wrote {out / 'projection.csv'} and {out / 'map.svg'}")
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.k < 1:
        raise ConfigError(f"--k must be >= 1, got {args.k}")
    model, dataset = _model_data(args)
    if not dataset.has_labels:
        raise ConfigError("metrics need labelled data; pass --label-col")
    proj = project(model, dataset)
    print(f"purity={format(map_purity(proj), '.6f')}")
    print(f"knn_acc={format(knn_map_accuracy(proj, args.k), '.6f')}")
    return EXIT_OK


def _kappa_tag(kappa: float) -> str:
    return "kappa_" + format(kappa, "g")


def cmd_sweep(args) -> int:
    names = [n.strip() for n in args.dataset.split(",") if n.strip()]
    if not names:
        raise ConfigError("--dataset needs at least one name")
    if not args.kappas:
        raise ConfigError("--kappas needs at least one value")
    for kappa in args.kappas:
        if not 0.0 <= kappa <= 1.0:
            raise ConfigError(f"kappa must lie in [0, 1], got {kappa}")
    if args.k < 1:
        raise ConfigError(f"--k must be >= 1, got {args.k}")
    configs = [_config(args, kappa, args.shared_seed) for kappa in args.kappas]
    failures = 0
    for name in names:
        dataset = normalize(resolve_dataset(name, seed=args.data_seed))
        base = Path(args.out) / name
        rows = []
        for config in configs:
            run_dir = base / _kappa_tag(config.kappa)
            try:
                model, _ = _train_into(dataset, config, run_dir, name)
            except (TrainingDivergedError, ConfigError, InvalidArgumentError) as exc:
                print(f"error: {name} kappa={config.kappa}: {exc}", file=sys.stderr)
                failures += 1
                continue
            proj = project(model, dataset)
            proj.write_csv(run_dir / "projection.csv")
            write_svg(proj, run_dir / "map.svg", SvgStyle(title=f"{name} (kappa={format(config.kappa, 'g')})"))
            purity, knn = map_purity(proj), knn_map_accuracy(proj, args.k)
            (run_dir / "metrics.txt").write_text(
                f"purity={format(purity, '.6f')}\nknn_acc={format(knn, '.6f')}\n", encoding="utf-8"
            )
            rows.append((config.kappa, purity, knn))
            print(f"{name} kappa={format(config.kappa, 'g')} purity={purity:.4f} knn_acc={knn:.4f}")
        base.mkdir(parents=True, exist_ok=True)
        with open(base / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["kappa", "purity", "knn_acc"])
            for kappa, purity, knn in rows:
                writer.writerow([format(kappa, "g"), format(purity, ".6f"), format(knn, ".6f")])
    return EXIT_DIVERGED if failures else EXIT_OK


def cmd_gen_data(args) -> int:
    if args.preset not in PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}")
    save_csv(gen_preset(args.preset, args.seed), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "project": cmd_project,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "gen-data": cmd_gen_data,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are configuration errors here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDivergedError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, ModelFileError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
