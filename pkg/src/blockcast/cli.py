"""Command-line pipeline.

One binary, one subcommand per pipeline stage::

    blockcast simulate --out runs/scene
    blockcast label    --scenario runs/scene --out runs/data
    blockcast train    --dataset runs/data --variant localization --out runs/loc
    blockcast predict  --checkpoint runs/loc/model.json --dataset runs/data --out runs/pred
    blockcast evaluate --dataset runs/data --loc runs/loc/model.json --out runs/report
    blockcast transfer --scenario runs/scene --loc runs/loc/model.json \
                       --rx 4,12 --rx -6,12 --out runs/sweep

Every run writes a ``manifest.json`` next to its outputs holding the
subcommand, the fully resolved config, the input paths, and a sha256
checksum per output file. ``replay_manifest`` re-executes a manifest into
a fresh directory and verifies the outputs byte for byte; nothing is
written outside the chosen output directory.

Exit codes: 0 success, 1 domain error (contract violation, bad data),
2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import DEFAULTS, resolve_config
from .errors import PipelineError, SchemaError
from .evaluation import (
    BlockageReport,
    blockage_table,
    evaluate_blockage,
    evaluate_localization,
    multi_seed_report,
    write_blockage_csv,
    write_localization_csv,
    write_multi_seed_csv,
)
from .geometry import LinkGeometry, blockage_from_location, blockage_labels_from_rssi
from .ingest import (
    ScenarioBundle,
    load_dataset,
    load_scenario,
    save_dataset,
    save_scenario,
    split_dataset,
)
from .models import (
    RfBlockageModel,
    RfLidarBlockageModel,
    RfLocalizationModel,
    TrainConfig,
    load_model,
    predict_blockage_probs,
    predict_locations_batch,
    save_model,
    train_blockage,
    train_localization,
)
from .preprocess import (
    Centroid,
    DbscanConfig,
    SrcConfig,
    build_windows,
    scenario_centroids,
)
from .scene import (
    ChannelConfig,
    Vehicle,
    WorldState,
    build_codebook,
    segment_intersects_rect,
    simulate_scenario,
)

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: Path, subcommand: str, cfg: dict, inputs: dict,
                   outputs: list[str], wall_clock: float) -> Path:
    manifest = {
        "format_version": MANIFEST_VERSION,
        "subcommand": subcommand,
        "config": cfg,
        "inputs": inputs,
        "outputs": {name: _sha256(out_dir / name) for name in sorted(outputs)},
        "wall_clock_seconds": wall_clock,
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2), encoding="utf-8")
    return path


def replay_manifest(manifest_path, out_dir) -> dict[str, bool]:
    """Re-execute a recorded run into out_dir; map output name -> checksum
    match. Input files referenced by the manifest must still exist."""
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    if manifest.get("format_version") != MANIFEST_VERSION:
        raise SchemaError(
            f"{manifest_path}: unsupported manifest version "
            f"{manifest.get('format_version')!r}"
        )
    subcommand = manifest["subcommand"]
    if subcommand not in _COMMANDS:
        raise SchemaError(f"{manifest_path}: unknown subcommand {subcommand!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _COMMANDS[subcommand](manifest["config"], manifest["inputs"], out)
    return {
        name: (out / name).exists() and _sha256(out / name) == checksum
        for name, checksum in manifest["outputs"].items()
    }


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _road_frame_link(meta: dict) -> LinkGeometry:
    """Link endpoints shifted into the road frame used by centroids."""
    tx = meta.get("tx")
    rx = meta.get("rx")
    region = meta.get("road_region")
    if tx is None or rx is None or region is None:
        raise SchemaError(
            "metadata lacks tx/rx/road_region; cannot run the geometric blockage test"
        )
    ox = min(float(region[0]), float(region[2]))
    oy = min(float(region[1]), float(region[3]))
    threshold = meta.get("power_threshold")
    return LinkGeometry(
        tx=(float(tx[0]) - ox, float(tx[1]) - oy),
        rx=(float(rx[0]) - ox, float(rx[1]) - oy),
        object_width=float(meta.get("object_width", DEFAULTS["object_width"])),
        power_threshold=1.0 if threshold is None else float(threshold),
    )


def _geometric_flags(coords: np.ndarray, link: LinkGeometry) -> np.ndarray:
    """(B, N, 2) road-frame positions -> (B, N) blockage booleans."""
    flags = np.zeros(coords.shape[:2], dtype=bool)
    for i in range(coords.shape[0]):
        for k in range(coords.shape[1]):
            loc = Centroid(0, float(coords[i, k, 0]), float(coords[i, k, 1]))
            flags[i, k] = blockage_from_location(loc, link)
    return flags


def _split_stack(dataset, split: str):
    samples = dataset.subset(split)
    if not samples:
        raise ValueError(f"split {split!r} is empty")
    windows = np.stack([s.window for s in samples])
    futures = np.stack([s.future for s in samples])
    blocked = np.stack([s.future_blocked for s in samples])
    rasters = np.stack([s.lidar_raster for s in samples])
    times = [s.t for s in samples]
    return samples, windows, futures, blocked, rasters, times


# ---------------------------------------------------------------------------
# Subcommand bodies. Each takes (resolved config, inputs, out_dir) and
# returns the produced file names relative to out_dir; the dispatcher
# appends the manifest. Keeping them pure in (cfg, inputs) is what makes
# manifests replayable.
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: dict, inputs: dict, out_dir: Path) -> list[str]:
    codebook = build_codebook(int(cfg["num_beams"]), float(cfg["theta_offset"]), float(cfg["fov"]))
    channel = ChannelConfig(
        num_subcarriers=int(cfg["num_subcarriers"]),
        noise_variance=float(cfg["noise_variance"]),
        blocked_attenuation_db=float(cfg["blocked_attenuation_db"]),
        scatter_gain=float(cfg["scatter_gain"]),
        scatter_fluctuation_db=float(cfg["scatter_fluctuation_db"]),
        symbol_power=float(cfg["symbol_power"]),
    )
    vehicle = Vehicle(
        center=tuple(map(float, cfg["vehicle_center"])),
        width=float(cfg["vehicle_width"]),
        depth=float(cfg["vehicle_depth"]),
        velocity=tuple(map(float, cfg["vehicle_velocity"])),
    )
    walls = tuple(tuple(map(float, wall)) for wall in (cfg["walls"] or []))
    bounce = tuple(map(float, cfg["bounce_x"])) if cfg["bounce_x"] else None
    world = WorldState(
        tx_pos=tuple(map(float, cfg["tx"])),
        rx_pos=tuple(map(float, cfg["rx"])),
        vehicles=(vehicle,),
        static_obstacles=walls,
        lidar_max_range=float(cfg["lidar_max_range"]),
        bounce_x=bounce,
    )
    result = simulate_scenario(
        world, codebook, channel, int(cfg["steps"]), int(cfg["seed"]), int(cfg["lidar_rays"])
    )
    labels = None
    if result.power_threshold is not None:
        labels = blockage_labels_from_rssi(result.frames, result.power_threshold)
    meta = {
        "tx": list(map(float, cfg["tx"])),
        "rx": list(map(float, cfg["rx"])),
        "road_region": list(map(float, cfg["road_region"])),
        "vehicle_width": float(cfg["vehicle_width"]),
        "vehicle_depth": float(cfg["vehicle_depth"]),
        "theta_offset": float(cfg["theta_offset"]),
        "fov": float(cfg["fov"]),
        "num_subcarriers": int(cfg["num_subcarriers"]),
        "noise_variance": float(cfg["noise_variance"]),
        "blocked_attenuation_db": float(cfg["blocked_attenuation_db"]),
        "scatter_gain": float(cfg["scatter_gain"]),
        "scatter_fluctuation_db": float(cfg["scatter_fluctuation_db"]),
        "symbol_power": float(cfg["symbol_power"]),
        "steps": int(cfg["steps"]),
        "seed": int(cfg["seed"]),
        "lidar_max_range": float(cfg["lidar_max_range"]),
        "lidar_rays": int(cfg["lidar_rays"]),
        "power_threshold": (
            None if result.power_threshold is None else float(result.power_threshold)
        ),
    }
    bundle = ScenarioBundle(
        scenario_id=str(inputs.get("scenario_id") or out_dir.name),
        rssi=result.frames,
        lidar=result.scans,
        truth=result.truth,
        labels=labels,
        meta=meta,
    )
    save_scenario(bundle, out_dir)
    outputs = ["rssi.csv", "lidar.csv", "truth.csv", "meta.json"]
    if labels is not None:
        outputs.append("labels.csv")
    return outputs


def cmd_label(cfg: dict, inputs: dict, out_dir: Path) -> list[str]:
    src_cfg = SrcConfig(float(cfg["proximity_radius"]), tuple(map(float, cfg["road_region"])))
    db_cfg = DbscanConfig(float(cfg["eps"]), int(cfg["min_pts"]))
    samples = []
    link_meta: dict = {}
    for sdir in inputs["scenarios"]:
        bundle = load_scenario(sdir)
        threshold = bundle.meta.get("power_threshold")
        if threshold is None:
            raise SchemaError(
                f"{sdir}: scenario metadata has no power_threshold; "
                "blockage flags cannot be derived"
            )
        flags = [lab.blocked for lab in blockage_labels_from_rssi(bundle.rssi, threshold)]
        centroids = scenario_centroids(bundle, src_cfg, db_cfg)
        samples.extend(
            build_windows(
                bundle,
                centroids,
                int(cfg["window_len"]),
                int(cfg["horizon"]),
                flags,
                int(cfg["raster_bins"]),
                float(cfg["lidar_max_range"]),
            )
        )
        if not link_meta:
            link_meta = {
                "tx": bundle.meta.get("tx"),
                "rx": bundle.meta.get("rx"),
                "power_threshold": float(threshold),
            }
    if not samples:
        raise ValueError("no valid windows were produced from the given scenarios")
    meta = {
        "road_region": list(map(float, cfg["road_region"])),
        "lidar_max_range": float(cfg["lidar_max_range"]),
        "eps": float(cfg["eps"]),
        "min_pts": int(cfg["min_pts"]),
        "proximity_radius": float(cfg["proximity_radius"]),
        "object_width": float(cfg["object_width"]),
        **link_meta,
    }
    dataset = split_dataset(samples, tuple(cfg["ratios"]), meta=meta)
    save_dataset(dataset, out_dir)
    return ["samples.csv", "dataset.json"]


def cmd_train(cfg: dict, inputs: dict, out_dir: Path) -> list[str]:
    dataset = load_dataset(inputs["dataset"])
    tcfg = TrainConfig(
        lr=float(cfg["lr"]),
        batch_size=int(cfg["batch_size"]),
        episodes=int(cfg["episodes"]),
        iterations=int(cfg["iterations"]),
        seed=int(cfg["train_seed"]),
        delta=float(cfg["delta"]),
    )
    variant = inputs["variant"]
    if variant == "localization":
        model, curves = train_localization(dataset, tcfg)
    elif variant in ("rf", "rf+lidar"):
        model, curves = train_blockage(dataset, tcfg, variant)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    save_model(model, out_dir / "model.json")

    rows = []
    per_episode = tcfg.iterations
    for i, loss in enumerate(curves.train):
        val = ""
        if (i + 1) % per_episode == 0 and curves.val:
            val = repr(curves.val[(i + 1) // per_episode - 1])
        rows.append([str(i + 1), repr(loss), val])
    _write_csv(out_dir / "curves.csv", ["iteration", "train_loss", "val_loss"], rows)
    return ["model.json", "curves.csv"]


def cmd_predict(cfg: dict, inputs: dict, out_dir: Path) -> list[str]:
    del cfg
    dataset = load_dataset(inputs["dataset"])
    model = load_model(inputs["checkpoint"])
    _, windows, _, _, rasters, times = _split_stack(dataset, inputs["split"])
    if isinstance(model, RfLocalizationModel):
        coords = predict_locations_batch(model, windows)
        rows = [
            [str(i), str(times[i]), str(k + 1), repr(float(coords[i, k, 0])),
             repr(float(coords[i, k, 1]))]
            for i in range(coords.shape[0])
            for k in range(coords.shape[1])
        ]
        _write_csv(out_dir / "predictions.csv", ["sample", "t", "step", "x", "y"], rows)
    else:
        rasters_arg = rasters if isinstance(model, RfLidarBlockageModel) else None
        probs = predict_blockage_probs(model, windows, rasters_arg)
        rows = [
            [str(i), str(times[i]), str(k + 1), repr(float(probs[i, k])),
             str(int(probs[i, k] >= 0.5))]
            for i in range(probs.shape[0])
            for k in range(probs.shape[1])
        ]
        _write_csv(
            out_dir / "predictions.csv", ["sample", "t", "step", "probability", "blocked"], rows
        )
    return ["predictions.csv"]


def _blockage_flags_for(model, windows, rasters, link) -> tuple[np.ndarray, np.ndarray | None]:
    """Predicted (B, N) blockage flags; probabilities when the model emits
    them, None for the location pipeline (its flags come from geometry)."""
    if isinstance(model, RfLocalizationModel):
        coords = predict_locations_batch(model, windows)
        return _geometric_flags(coords, link), None
    rasters_arg = rasters if isinstance(model, RfLidarBlockageModel) else None
    probs = predict_blockage_probs(model, windows, rasters_arg)
    return probs >= 0.5, probs


def cmd_evaluate(cfg: dict, inputs: dict, out_dir: Path) -> list[str]:
    del cfg
    dataset = load_dataset(inputs["dataset"])
    samples, windows, futures, blocked, rasters, times = _split_stack(
        dataset, inputs["split"]
    )
    groups = [
        ("localization", inputs.get("loc") or []),
        ("rf", inputs.get("rf") or []),
        ("rf+lidar", inputs.get("lidar") or []),
    ]
    if not any(paths for _, paths in groups):
        raise ValueError("no checkpoints given; pass --loc/--rf/--lidar")

    link = None
    if groups[0][1]:
        link = _road_frame_link(dataset.meta)

    blockage_reports: list[tuple[str, BlockageReport]] = []
    loc_reports = []
    raw_rows: list[list[str]] = []
    per_method_step_acc: dict[str, list[list[float]]] = {}
    for method, paths in groups:
        for run_idx, ckpt in enumerate(paths):
            model = load_model(ckpt)
            expected = {
                "localization": RfLocalizationModel,
                "rf": RfBlockageModel,
                "rf+lidar": RfLidarBlockageModel,
            }[method]
            if not isinstance(model, expected):
                raise SchemaError(
                    f"{ckpt}: checkpoint kind does not match --{'loc' if method == 'localization' else method} usage"
                )
            flags, probs = _blockage_flags_for(model, windows, rasters, link)
            report = evaluate_blockage(flags, blocked)
            label = f"{method}#{run_idx}"
            blockage_reports.append((label, report))
            per_method_step_acc.setdefault(method, []).append(
                [c.accuracy for c in report.per_step]
            )
            if isinstance(model, RfLocalizationModel):
                coords = predict_locations_batch(model, windows)
                loc_reports.append((label, evaluate_localization(coords, futures)))
            for i in range(flags.shape[0]):
                for k in range(flags.shape[1]):
                    raw_rows.append(
                        [label, str(i), str(times[i]), str(k + 1),
                         "" if probs is None else repr(float(probs[i, k])),
                         str(int(flags[i, k])), str(int(blocked[i, k]))]
                    )

    outputs = ["blockage.csv", "predictions_raw.csv", "report.txt"]
    write_blockage_csv(out_dir / "blockage.csv", blockage_reports)
    _write_csv(
        out_dir / "predictions_raw.csv",
        ["method", "sample", "t", "step", "probability", "predicted", "actual"],
        raw_rows,
    )
    (out_dir / "report.txt").write_text(blockage_table(blockage_reports), encoding="utf-8")
    if loc_reports:
        write_localization_csv(out_dir / "localization.csv", loc_reports)
        outputs.append("localization.csv")
    multi = [
        (method, multi_seed_report(acc))
        for method, acc in sorted(per_method_step_acc.items())
        if len(acc) >= 2
    ]
    if multi:
        write_multi_seed_csv(out_dir / "summary.csv", multi)
        outputs.append("summary.csv")
    return outputs


def cmd_transfer(cfg: dict, inputs: dict, out_dir: Path) -> list[str]:
    bundle = load_scenario(inputs["scenario"])
    meta = bundle.meta
    if bundle.truth is None:
        raise SchemaError(f"{inputs['scenario']}: transfer needs truth.csv")
    if meta.get("tx") is None or meta.get("rx") is None:
        raise SchemaError(f"{inputs['scenario']}: scenario metadata lacks tx/rx")
    width = meta.get("vehicle_width")
    depth = meta.get("vehicle_depth")
    if width is None or depth is None:
        raise SchemaError(
            f"{inputs['scenario']}: scenario metadata lacks vehicle dimensions"
        )
    tx = tuple(map(float, meta["tx"]))

    src_cfg = SrcConfig(float(cfg["proximity_radius"]), tuple(map(float, cfg["road_region"])))
    db_cfg = DbscanConfig(float(cfg["eps"]), int(cfg["min_pts"]))
    threshold = meta.get("power_threshold")
    flags = None
    if threshold is not None:
        flags = [lab.blocked for lab in blockage_labels_from_rssi(bundle.rssi, threshold)]
    centroids = scenario_centroids(bundle, src_cfg, db_cfg)
    horizon_cfg = int(cfg["horizon"])
    samples = build_windows(
        bundle,
        centroids,
        int(cfg["window_len"]),
        horizon_cfg,
        flags,
        int(cfg["raster_bins"]),
        float(cfg["lidar_max_range"]),
    )
    truth_pos = {g.t: g.pos for g in bundle.truth}
    kept = []
    for s in samples:
        future_pos = [truth_pos.get(s.t + k) for k in range(1, horizon_cfg + 1)]
        if all(p is not None for p in future_pos):
            kept.append((s, np.array(future_pos, dtype=np.float64)))
    if not kept:
        raise ValueError("no windows with complete ground truth positions")

    windows = np.stack([s.window for s, _ in kept])
    rasters = np.stack([s.lidar_raster for s, _ in kept])
    positions = np.stack([pos for _, pos in kept])  # (B, N, 2) world frame

    loc_model = load_model(inputs["loc"])
    if not isinstance(loc_model, RfLocalizationModel):
        raise SchemaError(f"{inputs['loc']}: --loc expects a localization checkpoint")
    baselines = []
    for ckpt in inputs.get("rf") or []:
        m = load_model(ckpt)
        if not isinstance(m, RfBlockageModel):
            raise SchemaError(f"{ckpt}: --rf expects an rssi-only blockage checkpoint")
        baselines.append(("rf", m))
    for ckpt in inputs.get("lidar") or []:
        m = load_model(ckpt)
        if not isinstance(m, RfLidarBlockageModel):
            raise SchemaError(f"{ckpt}: --lidar expects an rssi+lidar blockage checkpoint")
        baselines.append(("rf+lidar", m))

    coords = predict_locations_batch(loc_model, windows)
    # Predictions live in the road frame the model was trained in; shift
    # the link into that frame rather than trusting the local config.
    origin = loc_model.stats.road_origin
    object_width = float(cfg["object_width"])
    rx_positions = [tuple(map(float, meta["rx"]))]
    rx_positions += [tuple(map(float, p)) for p in inputs["rx_positions"]]

    rows = []
    for pos_idx, rx in enumerate(rx_positions):
        truth_flags = np.zeros(positions.shape[:2], dtype=bool)
        for i in range(positions.shape[0]):
            for k in range(positions.shape[1]):
                truth_flags[i, k] = segment_intersects_rect(
                    tx, rx, positions[i, k], float(width), float(depth)
                )
        link = LinkGeometry(
            tx=(tx[0] - origin[0], tx[1] - origin[1]),
            rx=(rx[0] - origin[0], rx[1] - origin[1]),
            object_width=object_width,
            power_threshold=1.0 if threshold is None else float(threshold),
        )
        pred = _geometric_flags(coords, link)
        rows.append(
            ["localization", str(pos_idx), repr(rx[0]), repr(rx[1]),
             str(int(pos_idx == 0)),
             repr(float(np.mean(pred == truth_flags)))]
        )
        for name, m in baselines:
            probs = predict_blockage_probs(
                m, windows, rasters if isinstance(m, RfLidarBlockageModel) else None
            )
            acc = float(np.mean((probs >= 0.5) == truth_flags))
            rows.append(
                [name, str(pos_idx), repr(rx[0]), repr(rx[1]),
                 str(int(pos_idx == 0)), repr(acc)]
            )
    _write_csv(
        out_dir / "transfer.csv",
        ["method", "position", "rx_x", "rx_y", "is_original", "accuracy"],
        rows,
    )
    return ["transfer.csv"]


_COMMANDS = {
    "simulate": cmd_simulate,
    "label": cmd_label,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "transfer": cmd_transfer,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _set_pair(text: str):
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    if key not in DEFAULTS:
        raise argparse.ArgumentTypeError(f"unknown config key {key!r}")
    try:
        return key, json.loads(value.strip())
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(
            f"value for {key!r} is not valid JSON: {value!r}"
        ) from None


def _rx_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y coordinates, got {text!r}")
    try:
        return [float(parts[0]), float(parts[1])]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coordinates {text!r}") from None


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", required=True, help="output directory for artifacts + manifest")
    sub.add_argument("--config", help="key = value config file (default: $BLOCKCAST_CONFIG)")
    sub.add_argument(
        "--set",
        dest="overrides",
        type=_set_pair,
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (JSON value); repeatable",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockcast",
        description="Synthetic mmWave blockage prediction pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic scenario directory")
    _add_common(p)
    p.add_argument("--seed", type=int, help="simulation seed")
    p.add_argument("--steps", type=int, help="number of time steps")
    p.add_argument("--scenario-id", help="identifier stored in meta.json (default: out dir name)")

    p = sub.add_parser("label", help="derive labels and build a windowed dataset")
    _add_common(p)
    p.add_argument(
        "--scenario", action="append", required=True, metavar="DIR",
        help="scenario directory; repeatable",
    )
    p.add_argument("--window-len", type=int, help="observation window length")
    p.add_argument("--horizon", type=int, help="prediction horizon")

    p = sub.add_parser("train", help="train one model on a dataset")
    _add_common(p)
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument(
        "--variant", required=True, choices=["localization", "rf", "rf+lidar"],
        help="which model to train",
    )
    p.add_argument("--lr", type=float, help="learning rate")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--iterations", type=int, help="minibatches per episode")
    p.add_argument("--train-seed", type=int, help="init + batch sampling seed")
    p.add_argument("--delta", type=float, help="robust-loss transition point")

    p = sub.add_parser("predict", help="dump raw model predictions for a split")
    _add_common(p)
    p.add_argument("--checkpoint", required=True, help="model.json path")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test", help="dataset split (default: test)")

    p = sub.add_parser("evaluate", help="score checkpoints against a split")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--loc", action="append", default=[], metavar="CKPT",
                   help="localization checkpoint; repeatable")
    p.add_argument("--rf", action="append", default=[], metavar="CKPT",
                   help="rssi-only blockage checkpoint; repeatable")
    p.add_argument("--lidar", action="append", default=[], metavar="CKPT",
                   help="rssi+lidar blockage checkpoint; repeatable")

    p = sub.add_parser(
        "transfer",
        help="sweep receiver positions, reusing a trained location model",
    )
    _add_common(p)
    p.add_argument("--scenario", required=True, help="scenario directory with truth.csv")
    p.add_argument("--loc", required=True, help="localization checkpoint")
    p.add_argument("--rf", action="append", default=[], metavar="CKPT")
    p.add_argument("--lidar", action="append", default=[], metavar="CKPT")
    p.add_argument(
        "--rx", dest="rx_positions", type=_rx_pair, action="append", required=True,
        metavar="X,Y", help="receiver position to sweep; repeatable",
    )
    return parser


def _gather(args: argparse.Namespace) -> tuple[dict, dict]:
    overrides = dict(args.overrides)
    flag_map = {
        "seed": "seed",
        "steps": "steps",
        "window_len": "window_len",
        "horizon": "horizon",
        "lr": "lr",
        "batch_size": "batch_size",
        "episodes": "episodes",
        "iterations": "iterations",
        "train_seed": "train_seed",
        "delta": "delta",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value

    inputs: dict = {}
    if args.command == "simulate":
        inputs["scenario_id"] = args.scenario_id or Path(args.out).name
    elif args.command == "label":
        inputs["scenarios"] = [str(Path(p).resolve()) for p in args.scenario]
    elif args.command == "train":
        inputs["dataset"] = str(Path(args.dataset).resolve())
        inputs["variant"] = args.variant
    elif args.command == "predict":
        inputs["dataset"] = str(Path(args.dataset).resolve())
        inputs["checkpoint"] = str(Path(args.checkpoint).resolve())
        inputs["split"] = args.split
    elif args.command == "evaluate":
        inputs["dataset"] = str(Path(args.dataset).resolve())
        inputs["split"] = args.split
        inputs["loc"] = [str(Path(p).resolve()) for p in args.loc]
        inputs["rf"] = [str(Path(p).resolve()) for p in args.rf]
        inputs["lidar"] = [str(Path(p).resolve()) for p in args.lidar]
    elif args.command == "transfer":
        inputs["scenario"] = str(Path(args.scenario).resolve())
        inputs["loc"] = str(Path(args.loc).resolve())
        inputs["rf"] = [str(Path(p).resolve()) for p in args.rf]
        inputs["lidar"] = [str(Path(p).resolve()) for p in args.lidar]
        inputs["rx_positions"] = args.rx_positions
    return overrides, inputs


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        overrides, inputs = _gather(args)
        cfg = resolve_config(overrides, args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        outputs = _COMMANDS[args.command](cfg, inputs, out_dir)
        wall = time.perf_counter() - start
        write_manifest(out_dir, args.command, cfg, inputs, outputs, wall)
    except (PipelineError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
