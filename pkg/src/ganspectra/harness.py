"""Dataset plumbing and experiment orchestration.

Covers procedural corpus synthesis (four generator families spanning low,
mid and high spectral content), manifest files, JPEG/resize post-processing
attacks, and the end-to-end experiment runner used by the CLI.

Protocol conventions:
  * Manifests are one ``path<TAB>label<TAB>category`` line per image,
    label real or fake, paths relative to the manifest file.
  * When an experiment carries a simulator, every real entry also yields a
    generated fake, inserted right after its source image.
  * Attacks are applied to fake samples only (the post-processing threat
    model: the forger degrades the fake), with the JPEG quality or resize
    side drawn once per image from a seeded stream, so a config plus seeds
    reproduces the run byte for byte.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .detector import (
    FeatureConfig,
    Metrics,
    TrainConfig,
    evaluate,
    extract_features,
    save_model,
    train,
    write_metrics_csv,
)
from .ops import resize_bilinear
from .rng import SplitMix64
from .simulator import SimulatorConfig, SimulatorState, fit, load_state, reconstruct
from .tensor import RT01_MAGIC, channel_stack, read_rt01, validate_image

JPEG_QUALITIES = (100, 90, 70, 50)
RESIZE_SIDES = (256, 200, 150, 128)
ATTACK_KINDS = ("none", "jpeg", "resize")

LABELS = ("real", "fake")


# ------------------------------------------------------------ corpus synthesis


def _to_unit(arr: np.ndarray) -> np.ndarray:
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.full_like(arr, 0.5)
    return (arr - lo) / (hi - lo)


def gradient_image(side: int, rng: SplitMix64) -> np.ndarray:
    """Smooth low-frequency ramp with a random orientation and mild twist."""
    sign = lambda: 1.0 if rng.random() < 0.5 else -1.0
    a = sign() * rng.uniform(0.3, 1.0)
    b = sign() * rng.uniform(0.3, 1.0)
    c = rng.uniform(-0.5, 0.5)
    u = np.linspace(0.0, 1.0, side)
    yy, xx = np.meshgrid(u, u, indexing="ij")
    return _to_unit(a * xx + b * yy + c * xx * yy)[:, :, None]


def noise_field_image(side: int, rng: SplitMix64) -> np.ndarray:
    """Band-limited Gaussian noise: white noise low-passed at a random
    radial cutoff (kept below side/9 so a two-stage averaging encoder can
    in principle carry the content)."""
    cutoff = rng.uniform(side / 16.0, side / 9.0)
    white = rng.normals(side * side).reshape(side, side)
    freq = np.minimum(np.arange(side), side - np.arange(side)).astype(np.float64)
    radius = np.sqrt(freq[:, None] ** 2 + freq[None, :] ** 2)
    spec = np.fft.fft2(white) * (radius <= cutoff)
    return _to_unit(np.real(np.fft.ifft2(spec)))[:, :, None]


# periods 2 and 4 put the fundamental in the high/mid band, 12 and 16 well
# inside the band a 4x downsample preserves
STRIPE_PERIODS = (2, 4, 12, 16)
STRIPE_ORIENTATIONS = ("vertical", "horizontal", "checker")


def stripe_image(
    side: int,
    rng: SplitMix64,
    period: int | None = None,
    orientation: str | None = None,
) -> np.ndarray:
    """Hard-edged stripes or checkerboard at a random (even) period."""
    p = period if period is not None else rng.choice(STRIPE_PERIODS)
    orient = orientation if orientation is not None else rng.choice(STRIPE_ORIENTATIONS)
    phase = rng.below(p)
    lo = rng.uniform(0.0, 0.35)
    hi = rng.uniform(0.65, 1.0)
    idx = np.arange(side)
    wave = ((idx + phase) % p) < (p // 2)
    if orient == "vertical":
        mask = np.broadcast_to(wave[None, :], (side, side))
    elif orient == "horizontal":
        mask = np.broadcast_to(wave[:, None], (side, side))
    else:
        mask = wave[:, None] ^ wave[None, :]
    return np.where(mask, hi, lo)[:, :, None]


def sinusoid_image(side: int, rng: SplitMix64) -> np.ndarray:
    """Superposition of a few random sinusoidal gratings."""
    u = np.arange(side) / side
    yy, xx = np.meshgrid(u, u, indexing="ij")
    acc = np.zeros((side, side))
    for _ in range(2 + rng.below(3)):
        fy = rng.below(side // 10 + 1)
        fx = rng.below(side // 10 + 1)
        if fy == 0 and fx == 0:
            fx = 1
        amp = rng.uniform(0.3, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        acc += amp * np.sin(2.0 * np.pi * (fy * yy + fx * xx) + phase)
    return _to_unit(acc)[:, :, None]


FAMILY_NAMES = ("gradient", "noise", "stripes", "sinusoid")
_FAMILY_FNS = {
    "gradient": gradient_image,
    "noise": noise_field_image,
    "stripes": stripe_image,
    "sinusoid": sinusoid_image,
}


def corpus_family(i: int) -> str:
    """Family of the i-th corpus image (families cycle)."""
    return FAMILY_NAMES[i % len(FAMILY_NAMES)]


def synth_corpus(n: int, side: int, rng: SplitMix64) -> list[np.ndarray]:
    """n procedural "real" images of shape (side, side, 1), cycling the
    four generator families; fully determined by the rng seed."""
    if n < 1:
        raise ValueError("corpus size must be >= 1")
    if side % 4:
        raise ValueError("side must be divisible by 4")
    return [_FAMILY_FNS[corpus_family(i)](side, rng) for i in range(n)]


def make_fakes(corpus, sim_state: SimulatorState) -> list[np.ndarray]:
    """Reconstruct every corpus image; fakes stay index-paired with reals."""
    return [reconstruct(sim_state, img) for img in corpus]


# -------------------------------------------------------------------- attacks


@dataclass(frozen=True)
class AttackSpec:
    kind: str = "none"

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"attack kind must be one of {ATTACK_KINDS}")


def jpeg_roundtrip(img: np.ndarray, quality: int) -> np.ndarray:
    """Encode/decode through a baseline JPEG codec at the given quality."""
    stacked = channel_stack(validate_image(img))
    h, w, c = stacked.shape
    arr8 = np.clip(np.rint(stacked * 255.0), 0, 255).astype(np.uint8)
    pil = Image.fromarray(arr8[:, :, 0], mode="L") if c == 1 else Image.fromarray(arr8, mode="RGB")
    buf = io.BytesIO()
    pil.save(buf, format="JPEG", quality=int(quality))
    back = np.asarray(Image.open(io.BytesIO(buf.getvalue()))).astype(np.float64) / 255.0
    if back.ndim == 2:
        back = back[:, :, None]
    return back if img.ndim == 3 else back[:, :, 0]


def apply_attack(img: np.ndarray, spec: AttackSpec, rng: SplitMix64) -> np.ndarray:
    """Post-process one image. JPEG draws a quality from {100, 90, 70, 50};
    resize draws a side from {256, 200, 150, 128}, resamples there and back
    (feature dimensionality must stay constant)."""
    if spec.kind == "none":
        return img
    if spec.kind == "jpeg":
        return jpeg_roundtrip(img, rng.choice(JPEG_QUALITIES))
    side = rng.choice(RESIZE_SIDES)
    h, w = img.shape[0], img.shape[1]
    return resize_bilinear(resize_bilinear(img, side, side), h, w)


# ------------------------------------------------------------------ manifests


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    category: str


@dataclass
class DatasetManifest:
    entries: list
    split: str = "train"
    base_dir: Path = Path(".")

    def resolved(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.base_dir / p


def write_manifest(path, entries) -> None:
    lines = [f"{e.path}\t{e.label}\t{e.category}" for e in entries]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_manifest(path, split: str = "test") -> DatasetManifest:
    entries = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected path<TAB>label<TAB>category")
            p, label, category = parts
            if label not in LABELS:
                raise ValueError(f"{path}:{lineno}: label must be real or fake, got {label!r}")
            if p in seen:
                raise ValueError(f"{path}:{lineno}: duplicate path {p!r}")
            seen.add(p)
            entries.append(ManifestEntry(p, label, category))
    return DatasetManifest(entries, split=split, base_dir=Path(path).parent)


def load_image(path) -> np.ndarray:
    """Read an RT01, PNG or baseline JPEG file as a float image in [0, 1]
    (8-bit codec channels are mapped by / 255)."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
    if magic == RT01_MAGIC:
        return read_rt01(path)
    if magic[:2] == b"\xff\xd8" or magic == b"\x89PNG":
        pil = Image.open(path)
        if pil.mode not in ("L", "RGB"):
            pil = pil.convert("RGB")
        arr = np.asarray(pil).astype(np.float64) / 255.0
        return arr[:, :, None] if arr.ndim == 2 else arr
    raise ValueError(f"{path}: unrecognized image format (magic {magic!r})")


# ---------------------------------------------------------------- experiments


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    train_manifest: str
    test_manifests: tuple
    feature: FeatureConfig
    training: TrainConfig
    model_kind: str = "logistic"
    hidden_units: int = 64
    sim_state_path: str | None = None
    sim_config: SimulatorConfig | None = None
    sim_fit_max_images: int = 32
    train_attack: AttackSpec = AttackSpec("none")
    test_attack: AttackSpec = AttackSpec("none")
    attack_seed: int = 0


def _stage(name: str):
    """Context wrapper so any failure names the experiment stage."""

    class _Ctx:
        def __enter__(self):
            return None

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, RuntimeError):
                raise RuntimeError(f"experiment stage '{name}' failed: {exc}") from exc
            return False

    return _Ctx()


def build_samples(manifest: DatasetManifest, sim_state, attack: AttackSpec, attack_rng):
    """Images + labels for one manifest, in manifest order. With a
    simulator, each real spawns a fake right after it. Attacks hit fakes
    only, one parameter draw per fake."""
    images, labels = [], []
    for entry in manifest.entries:
        img = load_image(manifest.resolved(entry))
        pairs = [(img, entry.label)]
        if sim_state is not None and entry.label == "real":
            pairs.append((reconstruct(sim_state, img), "fake"))
        for sample, label in pairs:
            if label == "fake" and attack.kind != "none":
                sample = apply_attack(sample, attack, attack_rng)
            images.append(sample)
            labels.append(0 if label == "real" else 1)
    return images, np.array(labels, dtype=np.int64)


def run_experiment(cfg: ExperimentConfig, out_dir) -> list:
    """Train per the config, evaluate on every test manifest, persist the
    model and a metrics CSV. Returns (experiment, split, Metrics) rows."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with _stage("load-train-manifest"):
        train_manifest = read_manifest(cfg.train_manifest, split="train")

    with _stage("simulator"):
        sim_state = None
        if cfg.sim_state_path is not None:
            sim_state = load_state(cfg.sim_state_path)
        elif cfg.sim_config is not None:
            reals = [
                load_image(train_manifest.resolved(e))
                for e in train_manifest.entries
                if e.label == "real"
            ][: cfg.sim_fit_max_images]
            if not reals:
                raise ValueError("simulator fitting needs real images in the train manifest")
            sim_state = fit(cfg.sim_config, reals)

    with _stage("build-train-set"):
        rng = SplitMix64(cfg.attack_seed)
        images, labels = build_samples(train_manifest, sim_state, cfg.train_attack, rng)
        if np.unique(labels).size < 2:
            raise ValueError("training manifest must yield both classes")

    with _stage("train-features"):
        x = np.stack([extract_features(img, cfg.feature) for img in images])

    with _stage("train"):
        model = train(
            x,
            labels,
            cfg.training,
            kind=cfg.model_kind,
            hidden_units=cfg.hidden_units,
            feature_config=cfg.feature,
        )

    rows = []
    for i, test_path in enumerate(cfg.test_manifests):
        with _stage(f"evaluate[{Path(test_path).stem}]"):
            manifest = read_manifest(test_path, split="test")
            rng = SplitMix64(cfg.attack_seed + 1 + i)
            images, labels = build_samples(manifest, sim_state, cfg.test_attack, rng)
            feats = np.stack([extract_features(img, cfg.feature) for img in images])
            rows.append((cfg.name, Path(test_path).stem, evaluate(model, feats, labels)))

    with _stage("report"):
        write_metrics_csv(out_dir / f"{cfg.name}_metrics.csv", rows)
        save_model(out_dir / f"{cfg.name}_model.bin", model)
    return rows


# ------------------------------------------------------------- config parsing


def read_kv(path) -> dict:
    """Flat ``key = value`` file; blank lines and # comments ignored."""
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            out[key.strip()] = value.strip()
    return out


def _as_bool(s: str) -> bool:
    return s.strip().lower() in ("1", "true", "yes")


def read_experiment_config(path) -> ExperimentConfig:
    """Build an ExperimentConfig from a flat key = value file. Relative
    manifest and state paths resolve against the config file's directory."""
    kv = read_kv(path)
    base = Path(path).parent

    def resolve(p: str) -> str:
        q = Path(p)
        return str(q if q.is_absolute() else base / q)

    band = kv.get("band", "none")
    feature = FeatureConfig(
        mode=kv.get("feature_mode", "spectrum"),
        input_side=int(kv.get("input_side", 64)),
        band=None if band == "none" else band,
        grayscale=_as_bool(kv.get("grayscale", "1")),
    )
    training = TrainConfig(
        batch_size=int(kv.get("batch_size", 16)),
        learning_rate=float(kv.get("learning_rate", 0.01)),
        momentum=float(kv.get("momentum", 0.9)),
        lr_decay=float(kv.get("lr_decay", 0.01)),
        epochs=int(kv.get("epochs", 10)),
        seed=int(kv.get("seed", 0)),
    )
    sim_config = None
    if "sim_kind" in kv:
        sim_config = SimulatorConfig(
            stages=int(kv.get("sim_stages", 2)),
            kernel_size=int(kv.get("sim_kernel_size", 3)),
            upsampler_kind=kv["sim_kind"],
            reg_weight=float(kv.get("sim_reg_weight", 0.5)),
            fit_iterations=int(kv.get("sim_fit_iterations", 500)),
            learning_rate=float(kv.get("sim_learning_rate", 0.01)),
            seed=int(kv.get("sim_seed", 0)),
        )
    return ExperimentConfig(
        name=kv["name"],
        train_manifest=resolve(kv["train_manifest"]),
        test_manifests=tuple(resolve(p.strip()) for p in kv["test_manifests"].split(",") if p.strip()),
        feature=feature,
        training=training,
        model_kind=kv.get("model_kind", "logistic"),
        hidden_units=int(kv.get("hidden_units", 64)),
        sim_state_path=resolve(kv["sim_state"]) if "sim_state" in kv else None,
        sim_config=sim_config,
        sim_fit_max_images=int(kv.get("sim_fit_max_images", 32)),
        train_attack=AttackSpec(kv.get("train_attack", "none")),
        test_attack=AttackSpec(kv.get("test_attack", "none")),
        attack_seed=int(kv.get("attack_seed", 0)),
    )
