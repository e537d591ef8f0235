"""Command-line entry point: train / eval / params / compare / gradcheck.

Configuration is a flat ``key = value`` text file with ``#`` comments, no
nesting. Unknown keys are rejected rather than silently absorbed, and
``--override key=value`` pairs win over file values. All outputs of a run
land under a directory named from the resolved-config hash plus the seed,
so distinct runs never clobber each other.

Exit codes: 0 success, 1 runtime/check failure, 2 configuration error,
3 data/format error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path


from . import rng as rng_mod
from .data import Dataset, load_features, load_idx, standardize
from .errors import ConfigError, DataError, FormatError, ShapeError, SizeError
from .gradcheck import DEFAULT_H, DEFAULT_TOLERANCE, check_head
from .heads import (
    HeadConfig,
    VARIANTS,
    build_head,
    classifier_in_dim,
    hidden_in_dims,
    param_count,
)
from .optim import StepLR
from .train import TrainConfig, evaluate, fit, load_checkpoint

# key -> (parser, default); None default means "required if the command needs it"
_CONFIG_KEYS: dict = {
    "variant": (str, None),
    "input_dim": (int, None),
    "hidden": (int, None),
    "depth": (int, None),
    "classes": (int, None),
    "dropout": (float, 0.0),
    "optimizer": (str, "sgd"),
    "loss": (str, "nll"),
    "lr": (float, 0.001),
    "momentum": (float, 0.9),
    "beta1": (float, 0.9),
    "beta2": (float, 0.999),
    "eps": (float, 1e-8),
    "scheduler": (str, "none"),
    "step_size": (int, 7),
    "gamma": (float, 0.1),
    "batch_size": (int, 100),
    "epochs": (int, 50),
    "seed": (int, 0),
    "eval_every": (int, 1),
    "standardize": (bool, False),
    "data_format": (str, "idx"),
    "train_images": (str, None),
    "train_labels": (str, None),
    "test_images": (str, None),
    "test_labels": (str, None),
    "train_features": (str, None),
    "test_features": (str, None),
}


def _parse_value(key: str, raw: str):
    kind, _ = _CONFIG_KEYS[key]
    if kind is bool:
        if raw not in ("true", "false"):
            raise ConfigError(f"config key '{key}' must be true or false, got {raw!r}")
        return raw == "true"
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"config key '{key}' has invalid value {raw!r}: {exc}") from exc


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat key = value lines; '#' starts a comment; unknown keys rejected."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown config key '{key}'")
        raw[key] = value
    return raw


def load_config(path, overrides: list[str] | None = None) -> dict:
    """Read a config file, apply overrides, and type every value."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = parse_config_text(p.read_text(), source=str(path))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}' in override {item!r}")
        raw[key] = value
    cfg = {key: default for key, (_, default) in _CONFIG_KEYS.items()}
    for key, value in raw.items():
        cfg[key] = _parse_value(key, value)
    cfg["_raw"] = raw
    return cfg


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing config key(s): {', '.join(missing)}")


def config_hash(cfg: dict) -> str:
    """Hash of the resolved values (defaults included), override-order free."""
    lines = [
        f"{key} = {cfg[key]}"
        for key in sorted(_CONFIG_KEYS)
        if cfg.get(key) is not None
    ]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:8]


def canonical_config_text(cfg: dict) -> str:
    return "\n".join(
        f"{key} = {str(cfg[key]).lower() if isinstance(cfg[key], bool) else cfg[key]}"
        for key in sorted(_CONFIG_KEYS)
        if cfg.get(key) is not None
    ) + "\n"


def _head_config(cfg: dict, variant: str | None = None) -> HeadConfig:
    _require(cfg, "variant", "input_dim", "hidden", "depth", "classes")
    hc = HeadConfig(
        variant=variant or cfg["variant"],
        input_dim=cfg["input_dim"],
        hidden=cfg["hidden"],
        depth=cfg["depth"],
        classes=cfg["classes"],
        dropout_p=cfg["dropout"],
    )
    hc.validate()
    return hc


def _train_config(cfg: dict) -> TrainConfig:
    if cfg["scheduler"] not in ("none", "steplr"):
        raise ConfigError(f"scheduler must be 'none' or 'steplr', got {cfg['scheduler']!r}")
    schedule = (
        StepLR(base_lr=cfg["lr"], step_size=cfg["step_size"], gamma=cfg["gamma"])
        if cfg["scheduler"] == "steplr"
        else None
    )
    tc = TrainConfig(
        optimizer=cfg["optimizer"],
        lr=cfg["lr"],
        momentum=cfg["momentum"],
        beta1=cfg["beta1"],
        beta2=cfg["beta2"],
        eps=cfg["eps"],
        schedule=schedule,
        batch_size=cfg["batch_size"],
        epochs=cfg["epochs"],
        seed=cfg["seed"],
        loss=cfg["loss"],
        eval_every=cfg["eval_every"],
    )
    tc.validate()
    return tc


def _load_datasets(cfg: dict) -> tuple[Dataset, Dataset]:
    fmt = cfg["data_format"]
    if fmt == "idx":
        _require(cfg, "train_images", "train_labels", "test_images", "test_labels")
        train = load_idx(cfg["train_images"], cfg["train_labels"], name="train")
        test = load_idx(cfg["test_images"], cfg["test_labels"], name="test")
    elif fmt == "psnf":
        _require(cfg, "train_features", "test_features")
        train = load_features(cfg["train_features"], name="train")
        test = load_features(cfg["test_features"], name="test")
    else:
        raise ConfigError(f"data_format must be 'idx' or 'psnf', got {fmt!r}")
    if cfg["standardize"]:
        train, test = standardize(train, test)
    return train, test


def _run_dir(out: str, prefix: str, cfg: dict) -> Path:
    return Path(out) / f"{prefix}_{config_hash(cfg)}_seed{cfg['seed']}"


def cmd_train(args) -> int:
    cfg = load_config(args.config, args.override)
    head_cfg = _head_config(cfg)
    train_cfg = _train_config(cfg)
    train_set, test_set = _load_datasets(cfg)

    run_dir = _run_dir(args.out, "run", cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.cfg").write_text(canonical_config_text(cfg))

    head = build_head(head_cfg, rng_mod.init_rng(cfg["seed"]))
    result = fit(head, train_set, test_set, train_cfg, metrics_path=run_dir / "metrics.csv")
    (run_dir / "best.psnc").write_bytes(result.best_checkpoint)

    print(f"run_dir={run_dir}")
    print(f"best_epoch={result.best_epoch}")
    print(f"best_test_acc={result.best_test_acc!r}")
    return 0


def _eval_dataset(args) -> Dataset:
    if args.features:
        return load_features(args.features, name="eval")
    if args.images and args.labels:
        return load_idx(args.images, args.labels, name="eval")
    raise ConfigError("eval needs --features or both --images and --labels")


def cmd_eval(args) -> int:
    head = load_checkpoint(args.checkpoint)
    dataset = _eval_dataset(args)
    if dataset.dim != head.config.input_dim:
        raise DataError(
            f"dataset has {dataset.dim} features but checkpoint expects "
            f"{head.config.input_dim}"
        )
    acc, loss = evaluate(head, dataset)
    print(f"test_acc={acc!r} test_loss={loss!r}")
    return 0


def cmd_params(args) -> int:
    cfg = load_config(args.config, args.override)
    _require(cfg, "input_dim", "hidden", "depth", "classes")
    depth = cfg["depth"]

    columns = {}
    for variant in VARIANTS:
        hc = HeadConfig(
            variant=variant,
            input_dim=cfg["input_dim"],
            hidden=cfg["hidden"],
            depth=depth,
            classes=cfg["classes"],
            dropout_p=cfg["dropout"],
        )
        hc.validate()
        dims = hidden_in_dims(hc) + [classifier_in_dim(hc)]
        outs = [cfg["hidden"]] * depth + [cfg["classes"]]
        shapes = [f"{i}->{o}" for i, o in zip(dims, outs)]
        counts = [i * o + o for i, o in zip(dims, outs)]
        columns[variant] = (shapes, counts, param_count(hc))

    names = [f"hidden{k}" for k in range(1, depth + 1)] + ["classifier"]
    header = ["layer"] + [f"{v} ({c})" for v in VARIANTS for c in ("shape", "params")]
    rows = [header]
    for i, name in enumerate(names):
        row = [name]
        for variant in VARIANTS:
            shapes, counts, _ = columns[variant]
            row += [shapes[i], str(counts[i])]
        rows.append(row)
    total_row = ["total"]
    for variant in VARIANTS:
        total_row += ["", str(columns[variant][2])]
    rows.append(total_row)

    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args.config, args.override)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    if len(variants) < 2:
        raise ConfigError(f"compare needs at least 2 variants, got {variants}")
    if len(set(variants)) != len(variants):
        raise ConfigError(f"duplicate variant in {variants}")
    for v in variants:
        if v not in VARIANTS:
            raise ConfigError(f"unknown variant {v!r}, expected one of {VARIANTS}")

    train_cfg = _train_config(cfg)
    train_set, test_set = _load_datasets(cfg)
    out_dir = _run_dir(args.out, "compare", cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.cfg").write_text(canonical_config_text(cfg))

    def run_variant(variant: str):
        # same seed and budget for every variant; isolated head/optimizer/rng
        head_cfg = _head_config(cfg, variant=variant)
        head = build_head(head_cfg, rng_mod.init_rng(cfg["seed"]))
        result = fit(
            head,
            train_set,
            test_set,
            train_cfg,
            metrics_path=out_dir / f"{variant}_metrics.csv",
        )
        (out_dir / f"{variant}_best.psnc").write_bytes(result.best_checkpoint)
        return variant, param_count(head_cfg), result

    if args.parallel:
        with ThreadPoolExecutor(max_workers=len(variants)) as pool:
            results = list(pool.map(run_variant, variants))
    else:
        results = [run_variant(v) for v in variants]

    rows = [("variant", "params", "best_test_acc", "epochs_to_best")]
    csv_lines = ["variant,params,best_test_acc,epochs_to_best"]
    for variant, params, result in results:
        rows.append(
            (variant, str(params), f"{result.best_test_acc:.6f}", str(result.best_epoch))
        )
        csv_lines.append(
            f"{variant},{params},{result.best_test_acc!r},{result.best_epoch}"
        )
    (out_dir / "comparison.csv").write_text("\n".join(csv_lines) + "\n")

    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    print(f"comparison_csv={out_dir / 'comparison.csv'}")
    return 0


def cmd_gradcheck(args) -> int:
    config = HeadConfig(
        variant=args.variant,
        input_dim=args.input_dim,
        hidden=args.hidden,
        depth=args.depth,
        classes=args.classes,
        dropout_p=0.0,
    )
    config.validate()
    rng = rng_mod.check_rng(args.seed)
    x = rng.standard_normal((args.batch, args.input_dim))
    labels = rng.integers(0, args.classes, size=args.batch)
    report = check_head(
        config, (x, labels), tolerance=args.tolerance, h=args.step, seed=args.seed
    )
    print(report.format_table())
    if args.csv:
        report.to_csv(args.csv)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinalfc",
        description="Train and inspect dense classifier heads (progressive / plain / spinal).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a head from a config file")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_train.add_argument("--out", default="runs", help="output root directory")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--features", help="PSNF feature file")
    p_eval.add_argument("--images", help="IDX image file")
    p_eval.add_argument("--labels", help="IDX label file")
    p_eval.set_defaults(func=cmd_eval)

    p_params = sub.add_parser("params", help="per-layer shapes and totals for all variants")
    p_params.add_argument("--config", required=True)
    p_params.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_params.set_defaults(func=cmd_params)

    p_cmp = sub.add_parser("compare", help="train several variants with one seed and budget")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_cmp.add_argument("--variants", required=True, help="comma-separated, e.g. progressive,plain")
    p_cmp.add_argument("--out", default="runs")
    p_cmp.add_argument("--parallel", action="store_true", help="one thread per variant")
    p_cmp.set_defaults(func=cmd_compare)

    p_gc = sub.add_parser("gradcheck", help="finite-difference check of a small head")
    p_gc.add_argument("--variant", default="progressive", choices=VARIANTS)
    p_gc.add_argument("--input-dim", dest="input_dim", type=int, default=12)
    p_gc.add_argument("--hidden", type=int, default=6)
    p_gc.add_argument("--depth", type=int, default=3)
    p_gc.add_argument("--classes", type=int, default=4)
    p_gc.add_argument("--batch", type=int, default=3)
    p_gc.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p_gc.add_argument("--step", type=float, default=DEFAULT_H)
    p_gc.add_argument("--seed", type=int, default=1)
    p_gc.add_argument("--csv", help="also write the report as CSV")
    p_gc.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, FormatError, ShapeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
