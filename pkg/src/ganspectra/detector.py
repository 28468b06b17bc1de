"""Real-vs-fake classifiers over spectrum or pixel features.

Features: spectrum mode feeds the normalized log-magnitude spectrum
(optionally restricted to one frequency band before resizing); pixel mode
feeds raw pixels rescaled to [-1, 1]. Either way the map is bilinearly
resized to input_side x input_side and flattened.

Models: logistic regression or a one-hidden-layer tanh network, trained
with mini-batch SGD plus momentum on mean binary cross-entropy. Labels are
0 = real, 1 = fake; a predicted probability of exactly 0.5 counts as fake
(the conservative tie-break for forensics use).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .ops import resize_bilinear, to_gray
from .rng import SplitMix64
from .spectral import BAND_NAMES, apply_band, band_partition, log_spectrum
from .tensor import channel_stack, validate_image

REAL, FAKE = 0, 1

FEATURE_MODES = ("spectrum", "pixel")
MODEL_KINDS = ("logistic", "mlp1")


@dataclass(frozen=True)
class FeatureConfig:
    mode: str = "spectrum"
    input_side: int = 64
    band: str | None = None
    grayscale: bool = True

    def __post_init__(self):
        if self.mode not in FEATURE_MODES:
            raise ValueError(f"mode must be one of {FEATURE_MODES}")
        if self.input_side < 8:
            raise ValueError("input_side must be >= 8")
        if self.band is not None and self.band not in BAND_NAMES:
            raise ValueError(f"band must be one of {tuple(BAND_NAMES)} or None")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    learning_rate: float = 0.01
    momentum: float = 0.9
    lr_decay: float = 1e-2
    epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if min(self.batch_size, self.epochs) < 1 or self.learning_rate <= 0:
            raise ValueError("batch_size, epochs and learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if not 0.0 <= self.lr_decay < 1.0:
            raise ValueError("lr_decay must be in [0, 1)")


@dataclass
class Model:
    kind: str
    weights: dict
    feature_config: FeatureConfig
    seed: int
    epochs: int
    final_train_loss: float
    hidden_units: int = 0
    epoch_losses: list = field(default_factory=list)

    @property
    def input_dim(self) -> int:
        if self.kind == "logistic":
            return self.weights["w"].size
        return self.weights["w1"].shape[0]


def feature_length(fc: FeatureConfig, channels: int) -> int:
    c = 1 if fc.grayscale else channels
    return fc.input_side * fc.input_side * c


def extract_features(img: np.ndarray, fc: FeatureConfig) -> np.ndarray:
    """Flattened feature vector for one image."""
    img = validate_image(img)
    stacked = channel_stack(img)
    h, w, c = stacked.shape
    if h < fc.input_side or w < fc.input_side:
        raise ValueError(f"image {h}x{w} smaller than input side {fc.input_side}")
    if fc.grayscale and c == 3:
        stacked = to_gray(stacked)
    if fc.mode == "spectrum":
        feat = log_spectrum(stacked)
        if fc.band is not None:
            feat = apply_band(feat, band_partition(h, w), fc.band)
    else:
        feat = 2.0 * stacked - 1.0
    feat = resize_bilinear(feat, fc.input_side, fc.input_side)
    return channel_stack(feat).ravel()


def _sigmoid(z):
    with np.errstate(over="ignore"):  # the where() picks the stable branch
        return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def _forward(model_kind, weights, x):
    """Probability per row of x (n, d); also returns the hidden activations
    needed by backprop for the mlp."""
    if model_kind == "logistic":
        z = x @ weights["w"] + weights["b"]
        return _sigmoid(z), None
    hidden = np.tanh(x @ weights["w1"] + weights["b1"])
    z = hidden @ weights["w2"] + weights["b2"]
    return _sigmoid(z), hidden


def bce_loss(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def bce_gradients(kind: str, weights: dict, x: np.ndarray, y: np.ndarray) -> dict:
    """Analytic gradient of mean BCE over the batch, per weight array."""
    n = x.shape[0]
    p, hidden = _forward(kind, weights, x)
    dz = (p - y) / n
    if kind == "logistic":
        return {"w": x.T @ dz, "b": np.array([dz.sum()])}
    dw2 = hidden.T @ dz
    dh = np.outer(dz, weights["w2"]) * (1.0 - hidden * hidden)
    return {
        "w1": x.T @ dh,
        "b1": dh.sum(axis=0),
        "w2": dw2,
        "b2": np.array([dz.sum()]),
    }


def init_weights(kind: str, dim: int, hidden_units: int, rng: SplitMix64) -> dict:
    """Logistic starts at zero (convex problem, label-flip symmetric);
    the mlp breaks symmetry with seeded uniform draws."""
    if kind == "logistic":
        return {"w": np.zeros(dim), "b": np.zeros(1)}
    r1 = 1.0 / np.sqrt(dim)
    r2 = 1.0 / np.sqrt(hidden_units)
    return {
        "w1": (rng.randoms(dim * hidden_units) * 2 - 1).reshape(dim, hidden_units) * r1,
        "b1": np.zeros(hidden_units),
        "w2": (rng.randoms(hidden_units) * 2 - 1) * r2,
        "b2": np.zeros(1),
    }


def train(
    features: np.ndarray,
    labels: np.ndarray,
    tc: TrainConfig,
    kind: str = "logistic",
    hidden_units: int = 64,
    feature_config: FeatureConfig | None = None,
) -> Model:
    """Mini-batch SGD with momentum; per-epoch learning rate decay of
    (1 - lr_decay); shuffling and init draw from SplitMix64(tc.seed)."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ValueError(f"features {x.shape} do not match {y.size} labels")
    if kind not in MODEL_KINDS:
        raise ValueError(f"kind must be one of {MODEL_KINDS}")
    if np.unique(y).size < 2:
        raise ValueError("training set must contain both classes")

    rng = SplitMix64(tc.seed)
    weights = init_weights(kind, x.shape[1], hidden_units, rng)
    velocity = {name: np.zeros_like(arr) for name, arr in weights.items()}
    n = x.shape[0]
    lr = tc.learning_rate
    epoch_losses = []
    for _ in range(tc.epochs):
        order = list(range(n))
        rng.shuffle(order)
        idx = np.array(order)
        for start in range(0, n, tc.batch_size):
            batch = idx[start : start + tc.batch_size]
            grads = bce_gradients(kind, weights, x[batch], y[batch])
            for name in weights:
                velocity[name] = tc.momentum * velocity[name] + lr * grads[name]
                weights[name] = weights[name] - velocity[name]
        p, _ = _forward(kind, weights, x)
        epoch_losses.append(bce_loss(p, y))
        lr *= 1.0 - tc.lr_decay
    fc = feature_config if feature_config is not None else FeatureConfig()
    return Model(
        kind=kind,
        weights=weights,
        feature_config=fc,
        seed=tc.seed,
        epochs=tc.epochs,
        final_train_loss=epoch_losses[-1],
        hidden_units=hidden_units if kind == "mlp1" else 0,
        epoch_losses=epoch_losses,
    )


def predict(model: Model, features: np.ndarray) -> float:
    """Fake probability for a single feature vector."""
    x = np.asarray(features, dtype=np.float64).ravel()
    if x.size != model.input_dim:
        raise ValueError(f"feature length {x.size} does not match model dim {model.input_dim}")
    p, _ = _forward(model.kind, model.weights, x[None, :])
    return float(p[0])


def predict_batch(model: Model, features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(f"feature matrix {x.shape} does not match model dim {model.input_dim}")
    p, _ = _forward(model.kind, model.weights, x)
    return p


def classify(p) -> np.ndarray:
    """Probability >= 0.5 means fake; exact ties go to fake."""
    return (np.asarray(p) >= 0.5).astype(np.int64)


@dataclass(frozen=True)
class Metrics:
    n: int
    n_real: int
    n_fake: int
    real_correct: int
    fake_correct: int

    @property
    def correct(self) -> int:
        return self.real_correct + self.fake_correct

    @property
    def accuracy(self) -> float:
        return self.correct / self.n

    @property
    def real_acc(self) -> float:
        return self.real_correct / self.n_real if self.n_real else float("nan")

    @property
    def fake_acc(self) -> float:
        return self.fake_correct / self.n_fake if self.n_fake else float("nan")


def evaluate(model: Model, features: np.ndarray, labels: np.ndarray) -> Metrics:
    y = np.asarray(labels).ravel().astype(np.int64)
    if y.size == 0:
        raise ValueError("empty test set")
    pred = classify(predict_batch(model, features))
    real = y == REAL
    fake = y == FAKE
    return Metrics(
        n=int(y.size),
        n_real=int(real.sum()),
        n_fake=int(fake.sum()),
        real_correct=int(np.sum(real & (pred == REAL))),
        fake_correct=int(np.sum(fake & (pred == FAKE))),
    )


# ------------------------------------------------------------------- file IO

_BAND_NONE = "none"


def save_model(path, model: Model) -> None:
    """Text header of key = value lines, then float32 little-endian weight
    blocks introduced by "[weights <name> <count>]" markers."""
    fc = model.feature_config
    header = [
        f"kind = {model.kind}",
        f"input_dim = {model.input_dim}",
        f"hidden_units = {model.hidden_units}",
        f"feature_mode = {fc.mode}",
        f"input_side = {fc.input_side}",
        f"band = {fc.band if fc.band is not None else _BAND_NONE}",
        f"grayscale = {int(fc.grayscale)}",
        f"seed = {model.seed}",
        f"epochs = {model.epochs}",
        f"final_train_loss = {model.final_train_loss!r}",
    ]
    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        for name in sorted(model.weights):
            arr = model.weights[name]
            f.write(f"[weights {name} {arr.size}]\n".encode("ascii"))
            f.write(struct.pack("<II", *(arr.shape if arr.ndim == 2 else (arr.size, 1))))
            f.write(arr.astype("<f4").tobytes())


def load_model(path) -> Model:
    with open(path, "rb") as f:
        blob = f.read()
    header = {}
    pos = 0
    while not blob[pos : pos + 9] == b"[weights ":
        end = blob.index(b"\n", pos)
        key, _, value = blob[pos:end].decode("ascii").partition("=")
        header[key.strip()] = value.strip()
        pos = end + 1
    weights = {}
    while pos < len(blob):
        end = blob.index(b"]\n", pos)
        marker = blob[pos + 1 : end].decode("ascii").split()
        name, count = marker[1], int(marker[2])
        pos = end + 2
        rows, cols = struct.unpack("<II", blob[pos : pos + 8])
        pos += 8
        arr = np.frombuffer(blob[pos : pos + 4 * count], dtype="<f4").astype(np.float64)
        pos += 4 * count
        weights[name] = arr.reshape(rows, cols)
    band = header["band"]
    fc = FeatureConfig(
        mode=header["feature_mode"],
        input_side=int(header["input_side"]),
        band=None if band == _BAND_NONE else band,
        grayscale=bool(int(header["grayscale"])),
    )
    kind = header["kind"]
    if kind == "logistic":
        weights = {"w": weights["w"].ravel(), "b": weights["b"].ravel()}
    else:
        weights = {
            "w1": weights["w1"],
            "b1": weights["b1"].ravel(),
            "w2": weights["w2"].ravel(),
            "b2": weights["b2"].ravel(),
        }
    return Model(
        kind=kind,
        weights=weights,
        feature_config=fc,
        seed=int(header["seed"]),
        epochs=int(header["epochs"]),
        final_train_loss=float(header["final_train_loss"]),
        hidden_units=int(header["hidden_units"]),
    )


def write_metrics_csv(path, rows: list[tuple[str, str, Metrics]]) -> None:
    """CSV of experiment results: experiment,split,accuracy,real_acc,fake_acc,n."""
    lines = ["experiment,split,accuracy,real_acc,fake_acc,n"]
    for experiment, split, m in rows:
        lines.append(
            f"{experiment},{split},{m.accuracy:.6f},{m.real_acc:.6f},{m.fake_acc:.6f},{m.n}"
        )
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
