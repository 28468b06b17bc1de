"""Command line interface.

Subcommands: verify, spectrum, synth, fit-sim, make-fakes, train, eval,
attack, experiment, bands. See README.md for worked examples.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness, simulator, spectral
from .detector import FeatureConfig, TrainConfig, evaluate, extract_features
from .detector import load_model, save_model, train as train_model, write_metrics_csv
from .rng import SplitMix64
from .tensor import write_rt01


def _feature_config(args) -> FeatureConfig:
    return FeatureConfig(
        mode=args.mode,
        input_side=args.side,
        band=None if args.band == "none" else args.band,
        grayscale=not args.rgb,
    )


def _add_feature_flags(p) -> None:
    p.add_argument("--mode", choices=("spectrum", "pixel"), default="spectrum")
    p.add_argument("--side", type=int, default=64, help="feature side length (default 64)")
    p.add_argument("--band", choices=("none", "low", "mid", "high"), default="none")
    p.add_argument("--rgb", action="store_true", help="keep channels instead of grayscale")


def cmd_verify(args) -> int:
    rng = SplitMix64(args.seed)
    worst_1d = 0.0
    for n in range(1, 65):
        for _ in range(args.draws):
            worst_1d = max(worst_1d, spectral.verify_replication(rng.randoms(n)))
    worst_2d = 0.0
    for _ in range(20):
        h = 4 + rng.below(29)
        w = 4 + rng.below(29)
        worst_2d = max(worst_2d, spectral.verify_replication_2d(rng.randoms(h * w).reshape(h, w)))
    print(f"replication 1d: N in 1..64, {args.draws} draws each, max error {worst_1d:.3e}")
    print(f"replication 2d: 20 random tensors up to 32x32, max error {worst_2d:.3e}")
    ok = worst_1d < 1e-9 and worst_2d < 1e-9
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_spectrum(args) -> int:
    img = harness.load_image(args.image)
    feat = spectral.log_spectrum(img)
    out = Path(args.output)
    if out.suffix == ".pgm":
        spectral.write_pgm(out, feat)
    else:
        spectral.write_sf01(out, feat, dc_centered=True)
    print(f"wrote {out}")
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = SplitMix64(args.seed)
    corpus = harness.synth_corpus(args.count, args.size, rng)
    entries = []
    for i, img in enumerate(corpus):
        name = f"real_{i:04d}.rt01"
        write_rt01(out_dir / name, img)
        entries.append(harness.ManifestEntry(name, "real", harness.corpus_family(i)))
    harness.write_manifest(out_dir / "manifest.tsv", entries)
    print(f"wrote {len(entries)} images + manifest.tsv to {out_dir}")
    return 0


def cmd_fit_sim(args) -> int:
    manifest = harness.read_manifest(args.manifest, split="train")
    reals = [
        harness.load_image(manifest.resolved(e)) for e in manifest.entries if e.label == "real"
    ][: args.max_images]
    if not reals:
        print("no real images in manifest", file=sys.stderr)
        return 1
    config = simulator.SimulatorConfig(
        stages=args.stages,
        kernel_size=args.kernel_size,
        upsampler_kind=args.kind,
        reg_weight=args.reg_weight,
        fit_iterations=args.iterations,
        learning_rate=args.lr,
        seed=args.seed,
    )
    state = simulator.fit(config, reals)
    simulator.save_state(args.output, state)
    hist = state.fit_loss_history
    print(f"fitted on {len(reals)} images: loss {hist[0]:.6f} -> {hist[-1]:.6f}")
    print(f"wrote {args.output}")
    return 0


def cmd_make_fakes(args) -> int:
    state = simulator.load_state(args.state)
    manifest = harness.read_manifest(args.manifest, split="train")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for e in manifest.entries:
        if e.label != "real":
            continue
        img = harness.load_image(manifest.resolved(e))
        name = f"fake_{Path(e.path).stem}.rt01"
        write_rt01(out_dir / name, simulator.reconstruct(state, img))
        entries.append(harness.ManifestEntry(name, "fake", e.category))
    harness.write_manifest(out_dir / "manifest.tsv", entries)
    print(f"wrote {len(entries)} fakes + manifest.tsv to {out_dir}")
    return 0


def cmd_train(args) -> int:
    manifest = harness.read_manifest(args.manifest, split="train")
    fc = _feature_config(args)
    images, labels = harness.build_samples(manifest, None, harness.AttackSpec("none"), None)
    x = np.stack([extract_features(img, fc) for img in images])
    tc = TrainConfig(
        batch_size=args.batch_size,
        learning_rate=args.lr,
        momentum=args.momentum,
        lr_decay=args.lr_decay,
        epochs=args.epochs,
        seed=args.seed,
    )
    model = train_model(x, labels, tc, kind=args.kind, hidden_units=args.hidden, feature_config=fc)
    save_model(args.output, model)
    print(f"final train loss {model.final_train_loss:.6f}; wrote {args.output}")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    manifest = harness.read_manifest(args.manifest, split=args.split)
    attack = harness.AttackSpec(args.attack)
    rng = SplitMix64(args.attack_seed)
    images, labels = harness.build_samples(manifest, None, attack, rng)
    x = np.stack([extract_features(img, model.feature_config) for img in images])
    m = evaluate(model, x, labels)
    print(
        f"accuracy {m.accuracy:.4f} (real {m.real_acc:.4f}, fake {m.fake_acc:.4f}, n={m.n})"
    )
    if args.output:
        write_metrics_csv(args.output, [(args.name, args.split, m)])
        print(f"wrote {args.output}")
    return 0


def cmd_attack(args) -> int:
    manifest = harness.read_manifest(args.manifest, split="test")
    spec = harness.AttackSpec(args.kind)
    rng = SplitMix64(args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for e in manifest.entries:
        img = harness.load_image(manifest.resolved(e))
        name = f"atk_{Path(e.path).stem}.rt01"
        write_rt01(out_dir / name, harness.apply_attack(img, spec, rng))
        entries.append(harness.ManifestEntry(name, e.label, e.category))
    harness.write_manifest(out_dir / "manifest.tsv", entries)
    print(f"wrote {len(entries)} attacked images + manifest.tsv to {out_dir}")
    return 0


def cmd_experiment(args) -> int:
    cfg = harness.read_experiment_config(args.config)
    rows = harness.run_experiment(cfg, args.out_dir)
    for name, split, m in rows:
        print(f"{name},{split}: accuracy {m.accuracy:.4f} (real {m.real_acc:.4f}, fake {m.fake_acc:.4f}, n={m.n})")
    print(f"wrote {Path(args.out_dir) / (cfg.name + '_metrics.csv')}")
    return 0


def cmd_bands(args) -> int:
    labels = spectral.band_partition(args.height, args.width)
    counts = [int(np.sum(labels == b)) for b in range(3)]
    print(f"low {counts[0]}  mid {counts[1]}  high {counts[2]}  (total {sum(counts)})")
    if args.pgm:
        feat = labels.astype(np.float64) - 1.0  # 0,1,2 -> -1,0,1 for the PGM mapper
        spectral.write_pgm(args.pgm, feat)
        print(f"wrote {args.pgm}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ganspectra",
        description="Detect and simulate up-sampling artifacts in image spectra",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check the zero-insertion spectrum replication identity")
    p.add_argument("--draws", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("spectrum", help="spectrum feature of an image (.sf01 or .pgm)")
    p.add_argument("image")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("synth", help="generate a procedural corpus")
    p.add_argument("-n", "--count", type=int, default=100)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out-dir", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("fit-sim", help="fit the reconstruction simulator on real images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--max-images", type=int, default=32)
    p.add_argument("--stages", type=int, default=2)
    p.add_argument("--kernel-size", type=int, default=3)
    p.add_argument("--kind", choices=("transposed", "nearest"), default="transposed")
    p.add_argument("--reg-weight", type=float, default=0.5)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_fit_sim)

    p = sub.add_parser("make-fakes", help="reconstruct the reals of a manifest into fakes")
    p.add_argument("--state", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("-o", "--out-dir", required=True)
    p.set_defaults(fn=cmd_make_fakes)

    p = sub.add_parser("train", help="train a real-vs-fake classifier from a manifest")
    p.add_argument("--manifest", required=True)
    _add_feature_flags(p)
    p.add_argument("--kind", choices=("logistic", "mlp1"), default="logistic")
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--lr-decay", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--attack", choices=("none", "jpeg", "resize"), default="none")
    p.add_argument("--attack-seed", type=int, default=0)
    p.add_argument("--name", default="eval")
    p.add_argument("--split", default="test")
    p.add_argument("-o", "--output", default=None, help="optional metrics CSV path")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("attack", help="post-process every image of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--kind", choices=("none", "jpeg", "resize"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out-dir", required=True)
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("experiment", help="run a full experiment from a config file")
    p.add_argument("config")
    p.add_argument("-o", "--out-dir", default="experiments")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("bands", help="frequency band partition sizes for an H x W grid")
    p.add_argument("height", type=int)
    p.add_argument("width", type=int)
    p.add_argument("--pgm", default=None, help="optional label map PGM")
    p.set_defaults(fn=cmd_bands)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
