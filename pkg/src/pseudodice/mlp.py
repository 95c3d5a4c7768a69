"""Small feed-forward network with full-batch momentum back-propagation.

Architecture and training rule: tanh hidden layers, logistic-sigmoid
scalar output, mean-squared-error loss over the whole dataset, and the
classical momentum update v <- m*v - lr*grad, theta <- theta + v.
Inputs are bits, encoded +-1 by default; labels stay 0/1.

Datasets are anything exposing ``inputs`` (N, input_len) and ``labels``
(N,) uint8 arrays.  Because inputs are short bit patterns, loss,
gradient and accuracy are aggregated over the distinct patterns with
their (count0, count1) label weights, which is exactly the full-batch
quantity at a fraction of the cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, DomainError
from .mtprng import MtState

ENCODING_PLUSMINUS = "plusminus"
ENCODING_ZEROONE = "zeroone"

_MODEL_FILE_MAGIC = "#pseudodice-mlp"

STOP_MAX_EPOCHS = "max_epochs"
STOP_MIN_GRADIENT = "min_gradient"


@dataclass
class Dataset:
    """Plain in-memory dataset for synthetic and test inputs."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.ascontiguousarray(self.inputs, dtype=np.uint8)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.inputs.ndim != 2 or self.labels.ndim != 1:
            raise DomainError("dataset needs (N, input_len) inputs and (N,) labels")
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise DomainError("inputs and labels disagree on instance count")

    @property
    def count(self) -> int:
        return int(self.labels.size)


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.95
    max_epochs: int = 100
    min_gradient: float = 1e-10
    init_seed: int = 1
    input_encoding: str = ENCODING_PLUSMINUS

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be at least 1")
        if self.min_gradient < 0:
            raise ConfigError("min_gradient must be non-negative")
        if self.input_encoding not in (ENCODING_PLUSMINUS, ENCODING_ZEROONE):
            raise ConfigError(f"unknown input encoding {self.input_encoding!r}")


@dataclass
class TrainLog:
    losses: np.ndarray
    gradient_norms: np.ndarray
    stop_reason: str

    @property
    def epochs(self) -> int:
        return int(self.losses.size)


@dataclass
class MlpModel:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]  # weights[l]: (sizes[l+1], sizes[l])
    biases: list[np.ndarray]  # biases[l]: (sizes[l+1],)
    encoding: str = ENCODING_PLUSMINUS

    @property
    def input_len(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_len(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> "MlpModel":
        return MlpModel(
            layer_sizes=self.layer_sizes,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            encoding=self.encoding,
        )

    def flat(self) -> np.ndarray:
        parts = [w.ravel() for w in self.weights] + [b.ravel() for b in self.biases]
        return np.concatenate(parts)

    def set_flat(self, theta: np.ndarray) -> None:
        pos = 0
        for w in self.weights:
            w[...] = theta[pos : pos + w.size].reshape(w.shape)
            pos += w.size
        for b in self.biases:
            b[...] = theta[pos : pos + b.size]
            pos += b.size
        if pos != theta.size:
            raise DomainError("parameter vector length does not match the model")


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def flat(self) -> np.ndarray:
        parts = [w.ravel() for w in self.weights] + [b.ravel() for b in self.biases]
        return np.concatenate(parts)


def init_model(layer_sizes, seed: int, encoding: str = ENCODING_PLUSMINUS) -> MlpModel:
    """Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] weights from a dedicated
    MT19937 stream; zero biases."""
    sizes = tuple(int(s) for s in layer_sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ConfigError("layer sizes must be a non-empty list of positive integers")
    if encoding not in (ENCODING_PLUSMINUS, ENCODING_ZEROONE):
        raise ConfigError(f"unknown input encoding {encoding!r}")
    rng = MtState(seed)
    total = sum(sizes[i + 1] * sizes[i] for i in range(len(sizes) - 1))
    draws = rng.real53_array(total)
    weights = []
    pos = 0
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        block = draws[pos : pos + fan_out * fan_in]
        pos += fan_out * fan_in
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(((2.0 * block - 1.0) * bound).reshape(fan_out, fan_in))
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    return MlpModel(layer_sizes=sizes, weights=weights, biases=biases, encoding=encoding)


# ---------------------------------------------------------------------------
# forward pass


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _encode(model: MlpModel, raw_bits: np.ndarray) -> np.ndarray:
    x = np.asarray(raw_bits, dtype=np.float64)
    if model.encoding == ENCODING_PLUSMINUS:
        return 2.0 * x - 1.0
    return x


def _forward_batch(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    """Activations per layer for encoded inputs x (rows = instances)."""
    acts = [x]
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w.T + b
        acts.append(_sigmoid(z) if l == last else np.tanh(z))
    return acts


def forward(model: MlpModel, input_bits) -> float:
    """Network output in (0, 1) for one bit-pattern input."""
    raw = np.asarray(input_bits, dtype=np.float64)
    if raw.ndim != 1 or raw.size != model.input_len:
        raise DomainError(f"input must have {model.input_len} bits, got shape {raw.shape}")
    if model.output_len != 1:
        raise DomainError("scalar forward requires an output layer of size 1")
    x = _encode(model, raw.reshape(1, -1))
    return float(_forward_batch(model, x)[-1][0, 0])


def predict_bit(model: MlpModel, input_bits) -> int:
    """1 when the output is >= 0.5 (exact 0.5 predicts 1), else 0."""
    return 1 if forward(model, input_bits) >= 0.5 else 0


# ---------------------------------------------------------------------------
# pattern-weighted aggregation


@dataclass
class _Compact:
    x: np.ndarray  # (M, input_len) encoded distinct patterns
    n0: np.ndarray  # label-0 multiplicity per pattern
    n1: np.ndarray  # label-1 multiplicity per pattern
    total: int


def _compact(model: MlpModel, dataset) -> _Compact:
    inputs = np.ascontiguousarray(dataset.inputs, dtype=np.uint8)
    labels = np.ascontiguousarray(dataset.labels, dtype=np.int64)
    n, width = inputs.shape
    if n == 0:
        raise DomainError("dataset is empty")
    if width != model.input_len:
        raise DomainError(f"model expects {model.input_len}-bit inputs, dataset has {width}")
    if model.output_len != 1:
        raise DomainError("loss/accuracy require an output layer of size 1")
    if width <= 20:
        shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
        codes = inputs.astype(np.int64) @ (np.int64(1) << shifts)
        joint = np.bincount((codes << 1) | labels, minlength=2 << width)
        pairs = joint.reshape(-1, 2)
        present = np.nonzero(pairs.sum(axis=1))[0]
        n0 = pairs[present, 0].astype(np.float64)
        n1 = pairs[present, 1].astype(np.float64)
        bits = ((present[:, None] >> shifts[None, :]) & 1).astype(np.float64)
    else:
        uniq, inverse = np.unique(inputs, axis=0, return_inverse=True)
        n1 = np.bincount(inverse, weights=labels.astype(np.float64), minlength=len(uniq))
        tot = np.bincount(inverse, minlength=len(uniq)).astype(np.float64)
        n0 = tot - n1
        bits = uniq.astype(np.float64)
    return _Compact(x=_encode(model, bits), n0=n0, n1=n1, total=n)


def _loss_and_grad(model: MlpModel, c: _Compact) -> tuple[float, Gradients]:
    acts = _forward_batch(model, c.x)
    o = acts[-1][:, 0]
    mse = float((c.n0 @ (o * o) + c.n1 @ ((1.0 - o) * (1.0 - o))) / c.total)
    # d(mse)/d(o), already carrying the per-pattern multiplicities
    dl_do = 2.0 * ((c.n0 + c.n1) * o - c.n1) / c.total
    delta = (dl_do * o * (1.0 - o))[:, None]
    grad_w: list[np.ndarray] = [None] * len(model.weights)
    grad_b: list[np.ndarray] = [None] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        grad_w[l] = delta.T @ acts[l]
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l]) * (1.0 - acts[l] * acts[l])
    return mse, Gradients(weights=grad_w, biases=grad_b)


def loss(model: MlpModel, dataset) -> float:
    """Mean squared error of the scalar output against the 0/1 labels."""
    c = _compact(model, dataset)
    o = _forward_batch(model, c.x)[-1][:, 0]
    return float((c.n0 @ (o * o) + c.n1 @ ((1.0 - o) * (1.0 - o))) / c.total)


def gradient(model: MlpModel, dataset) -> Gradients:
    """Exact full-batch back-propagation gradient of the MSE loss."""
    _, grads = _loss_and_grad(model, _compact(model, dataset))
    return grads


def correct_count(model: MlpModel, dataset) -> int:
    """Number of instances whose predicted bit equals the label."""
    c = _compact(model, dataset)
    o = _forward_batch(model, c.x)[-1][:, 0]
    picked = np.where(o >= 0.5, c.n1, c.n0)
    return int(picked.sum())


def accuracy(model: MlpModel, dataset) -> float:
    """Fraction of instances predicted correctly."""
    c = _compact(model, dataset)
    o = _forward_batch(model, c.x)[-1][:, 0]
    picked = np.where(o >= 0.5, c.n1, c.n0)
    return float(picked.sum() / c.total)


def train(model: MlpModel, dataset, config: TrainConfig) -> tuple[MlpModel, TrainLog]:
    """Full-batch gradient descent with classical momentum.

    Runs until max_epochs or until the L2 norm of the full gradient
    falls below min_gradient; each epoch logs (loss, gradient norm) at
    the pre-update parameters.  Deterministic in all arguments.
    """
    work = model.copy()
    compact = _compact(work, dataset)
    theta = work.flat()
    velocity = np.zeros_like(theta)
    losses: list[float] = []
    norms: list[float] = []
    stop = STOP_MAX_EPOCHS
    for epoch in range(1, config.max_epochs + 1):
        mse, grads = _loss_and_grad(work, compact)
        if not np.isfinite(mse):
            raise DivergenceError(f"non-finite loss at epoch {epoch}", epoch=epoch)
        flat_grad = grads.flat()
        gnorm = float(np.linalg.norm(flat_grad))
        losses.append(mse)
        norms.append(gnorm)
        if gnorm < config.min_gradient:
            stop = STOP_MIN_GRADIENT
            break
        velocity = config.momentum * velocity - config.learning_rate * flat_grad
        theta = theta + velocity
        work.set_flat(theta)
    log = TrainLog(
        losses=np.array(losses),
        gradient_norms=np.array(norms),
        stop_reason=stop,
    )
    return work, log


# ---------------------------------------------------------------------------
# serialization: layer sizes, then row-major weights and biases per layer,
# 17 significant digits (lossless for binary64)


def save_model(model: MlpModel, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        sizes = ",".join(str(s) for s in model.layer_sizes)
        fh.write(f"{_MODEL_FILE_MAGIC} layers={sizes} encoding={model.encoding}\n")
        for w, b in zip(model.weights, model.biases):
            for row in w:
                fh.write(" ".join(f"{v:.17g}" for v in row))
                fh.write("\n")
            fh.write(" ".join(f"{v:.17g}" for v in b))
            fh.write("\n")


def load_model(path) -> MlpModel:
    with open(path, "r", encoding="ascii") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or not lines[0].startswith(_MODEL_FILE_MAGIC + " "):
        raise DomainError(f"{path}: not a model file")
    fields = dict(token.partition("=")[::2] for token in lines[0].split(" ")[1:])
    sizes = tuple(int(s) for s in fields["layers"].split(","))
    encoding = fields.get("encoding", ENCODING_PLUSMINUS)
    weights = []
    biases = []
    lineno = 1
    for l in range(len(sizes) - 1):
        rows = []
        for _ in range(sizes[l + 1]):
            rows.append([float(v) for v in lines[lineno].split(" ")])
            lineno += 1
        weights.append(np.array(rows))
        biases.append(np.array([float(v) for v in lines[lineno].split(" ")]))
        lineno += 1
        if weights[-1].shape != (sizes[l + 1], sizes[l]) or biases[-1].shape != (sizes[l + 1],):
            raise DomainError(f"{path}: parameter block {l} has the wrong shape")
    return MlpModel(layer_sizes=sizes, weights=weights, biases=biases, encoding=encoding)
