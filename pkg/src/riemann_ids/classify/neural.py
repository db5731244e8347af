"""Small dense networks trained with hand-written backprop: a softmax MLP
classifier and the ``d-32-5-32-d`` reconstruction autoencoder."""
from dataclasses import dataclass, field

import numpy as np

from .mdrm import first_appearance


class TrainingError(FloatingPointError):
    pass


@dataclass
class DenseNet:
    """Fully connected net, relu between layers.

    Inputs are standardized with ``input_mean``/``input_scale`` (learned on
    the training set) before the first layer.
    """

    layer_sizes: list
    weights: list
    biases: list
    hidden_activation: str = "relu"
    output_activation: str = "linear"
    rng_seed: int = 0
    input_mean: np.ndarray = None
    input_scale: np.ndarray = None

    def __post_init__(self):
        d = self.layer_sizes[0]
        if self.input_mean is None:
            self.input_mean = np.zeros(d)
        if self.input_scale is None:
            self.input_scale = np.ones(d)

    def to_dict(self):
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
            "rng_seed": self.rng_seed,
            "input_mean": self.input_mean.tolist(),
            "input_scale": self.input_scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        arr = lambda v: np.asarray(v, dtype=np.float64)  # noqa: E731
        return cls(
            layer_sizes=[int(s) for s in d["layer_sizes"]],
            weights=[arr(w) for w in d["weights"]],
            biases=[arr(b) for b in d["biases"]],
            hidden_activation=d["hidden_activation"],
            output_activation=d["output_activation"],
            rng_seed=int(d["rng_seed"]),
            input_mean=arr(d["input_mean"]),
            input_scale=arr(d["input_scale"]),
        )

    @property
    def params(self):
        return [p for pair in zip(self.weights, self.biases) for p in pair]


def init_net(layer_sizes, output_activation, seed):
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-lim, lim, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return DenseNet(list(layer_sizes), weights, biases, "relu", output_activation, seed)


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def standardize(net, x):
    return (np.asarray(x, dtype=np.float64) - net.input_mean) / net.input_scale


def _forward(net, h):
    acts = [h]
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = acts[-1] @ w + b
        if k < last:
            z = np.maximum(z, 0.0)
        elif net.output_activation == "softmax":
            z = _softmax(z)
        acts.append(z)
    return acts


def forward(net, x):
    """Network output for raw (unstandardized) inputs."""
    return _forward(net, standardize(net, x))[-1]


def loss_and_grads(net, h, target):
    """Loss and per-parameter gradients on standardized inputs ``h``.

    Softmax output: mean cross-entropy against one-hot ``target``.
    Linear output: mean over samples of the per-sample mean squared error.
    Gradients come back in :attr:`DenseNet.params` order.
    """
    acts = _forward(net, h)
    out = acts[-1]
    n = h.shape[0]
    if net.output_activation == "softmax":
        loss = -np.sum(target * np.log(np.clip(out, 1e-300, None))) / n
        delta = (out - target) / n
    else:
        diff = out - target
        loss = np.sum(diff * diff) / (n * out.shape[1])
        delta = 2.0 * diff / (n * out.shape[1])
    grads = []
    for k in range(len(net.weights) - 1, -1, -1):
        gw = acts[k].T @ delta
        gb = delta.sum(axis=0)
        grads.append((gw, gb))
        if k:
            delta = (delta @ net.weights[k].T) * (acts[k] > 0)
    grads.reverse()
    return float(loss), [g for pair in grads for g in pair]


@dataclass
class TrainConfig:
    epochs: int = 20
    batch: int = 128
    lr: float = 0.01
    seed: int = 0
    optimizer: str = "adam"


def _train(net, h, target, cfg, rng):
    params = net.params
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    b1, b2, eps = 0.9, 0.999, 1e-8
    step = 0
    n = h.shape[0]
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch):
            idx = order[start:start + cfg.batch]
            loss, grads = loss_and_grads(net, h[idx], target[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch starting {start}")
            step += 1
            for k, (p, g) in enumerate(zip(params, grads)):
                if cfg.optimizer == "adam":
                    m[k] = b1 * m[k] + (1 - b1) * g
                    v[k] = b2 * v[k] + (1 - b2) * g * g
                    mh = m[k] / (1 - b1 ** step)
                    vh = v[k] / (1 - b2 ** step)
                    p -= cfg.lr * mh / (np.sqrt(vh) + eps)
                else:
                    p -= cfg.lr * g
            total += loss * len(idx)
        if not all(np.all(np.isfinite(p)) for p in params):
            raise TrainingError(f"non-finite parameters after epoch {epoch}")
        history.append(total / n)
    return history


def _fit_scaler(net, x):
    net.input_mean = x.mean(axis=0)
    sd = x.std(axis=0)
    # float noise makes constant columns report sd ~ 1e-17
    net.input_scale = np.where(sd > 1e-12 * np.maximum(1.0, np.abs(net.input_mean)), sd, 1.0)


@dataclass
class MlpModel:
    net: DenseNet
    class_labels: list
    history: list = field(default_factory=list)

    def to_dict(self):
        return {"net": self.net.to_dict(), "class_labels": list(self.class_labels)}

    @classmethod
    def from_dict(cls, d):
        return cls(DenseNet.from_dict(d["net"]), list(d["class_labels"]))


def mlp_fit(features, labels, hidden=(64,), cfg=None):
    """Softmax classifier ``[d, *hidden, K]`` trained on cross-entropy."""
    cfg = cfg or TrainConfig()
    x = np.asarray(features, dtype=np.float64)
    labels = list(labels)
    classes = first_appearance(labels)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("features must be an (n, d) array with d >= 1")
    if len(classes) < 2:
        raise ValueError("MLP needs at least two classes")
    idx = {c: i for i, c in enumerate(classes)}
    onehot = np.zeros((len(labels), len(classes)))
    onehot[np.arange(len(labels)), [idx[c] for c in labels]] = 1.0
    net = init_net([x.shape[1], *hidden, len(classes)], "softmax", cfg.seed)
    _fit_scaler(net, x)
    rng = np.random.default_rng(cfg.seed + 1)
    history = _train(net, standardize(net, x), onehot, cfg, rng)
    return MlpModel(net, classes, history)


def mlp_predict_proba(model, x):
    return forward(model.net, np.atleast_2d(x))


def mlp_predict(model, x):
    """Labels and class scores (rows sum to 1)."""
    single = np.ndim(x) == 1
    proba = mlp_predict_proba(model, x)
    labels = [model.class_labels[i] for i in np.argmax(proba, axis=1)]
    if single:
        return labels[0], proba[0]
    return labels, proba


AE_HIDDEN = (32, 5, 32)
NORMAL, ATTACK = "normal", "attack"


@dataclass
class AeModel:
    net: DenseNet
    threshold: float
    train_err_mean: float
    train_err_std: float
    history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "net": self.net.to_dict(),
            "threshold": self.threshold,
            "train_err_mean": self.train_err_mean,
            "train_err_std": self.train_err_std,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(DenseNet.from_dict(d["net"]), float(d["threshold"]), float(d["train_err_mean"]), float(d["train_err_std"]))


def _recon_error(net, x):
    h = standardize(net, np.atleast_2d(x))
    out = _forward(net, h)[-1]
    return np.mean((out - h) ** 2, axis=1)


def ae_fit(normal_features, cfg=None, hidden=AE_HIDDEN, n_sigma=2.0):
    """Autoencoder on normal traffic; threshold = mean + 2 std of the
    per-sample training reconstruction error."""
    cfg = cfg or TrainConfig()
    x = np.asarray(normal_features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 10:
        raise ValueError("autoencoder needs an (n, d) array with n >= 10")
    d = x.shape[1]
    net = init_net([d, *hidden, d], "linear", cfg.seed)
    _fit_scaler(net, x)
    h = standardize(net, x)
    history = _train(net, h, h, cfg, np.random.default_rng(cfg.seed + 1))
    err = _recon_error(net, x)
    mu, sd = float(err.mean()), float(err.std())
    return AeModel(net, mu + n_sigma * sd, mu, sd, history)


def ae_score(model, x):
    """Mean squared reconstruction error (standardized units)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.net.layer_sizes[0]:
        raise ValueError(f"expected {model.net.layer_sizes[0]} features, got {x.shape[-1]}")
    err = _recon_error(model.net, x)
    return float(err[0]) if x.ndim == 1 else err


def ae_predict(model, x):
    """``attack`` strictly above the threshold, ``normal`` otherwise."""
    s = ae_score(model, x)
    if np.ndim(s) == 0:
        return ATTACK if s > model.threshold else NORMAL
    return [ATTACK if v > model.threshold else NORMAL for v in s]
