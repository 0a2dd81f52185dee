"""Sine-activated coordinate MLP with hand-written backprop and Adam.

Layer ``k`` of ``d`` hidden layers computes ``sin(omega0 * (W_k h + b_k))``;
the output layer is affine. Weights are stored ``(out, in)`` so a batch of
row vectors maps as ``h @ W.T + b``.

Two evaluation paths exist on purpose:

* :func:`forward` goes through BLAS and is what training uses.
* :func:`evaluate` reduces every output element over its own contiguous
  product vector, so a pixel's value does not depend on which other pixels
  share the batch. Decoding relies on this to make crops, previews and the
  full frame agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "SirenConfig",
    "SirenModel",
    "AdamState",
    "param_count",
    "init_siren",
    "forward",
    "evaluate",
    "loss_and_grad",
    "adam_init",
    "adam_step",
]

_DTYPES = {"fp32": np.float32, "fp64": np.float64}

# product-tensor budget per chunk in evaluate()
_EVAL_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class SirenConfig:
    hidden_layers: int
    hidden_width: int
    out_dim: int
    omega0: float = 30.0
    in_dim: int = 2

    def __post_init__(self):
        if self.in_dim != 2:
            raise ValidationError("in_dim is fixed at 2 (x, y)")
        for name in ("hidden_layers", "hidden_width", "out_dim"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if not (np.isfinite(self.omega0) and self.omega0 > 0):
            raise ValidationError(f"omega0 must be positive, got {self.omega0!r}")
        # the bitstream stores omega0 as f32; keep encoder and decoder identical
        object.__setattr__(self, "omega0", float(np.float32(self.omega0)))

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        """``(fan_out, fan_in)`` for every layer, input to output."""
        w = self.hidden_width
        dims = [(w, self.in_dim)]
        dims += [(w, w)] * (self.hidden_layers - 1)
        dims.append((self.out_dim, w))
        return dims


def param_count(config: SirenConfig) -> int:
    return sum(o * i + o for o, i in config.layer_dims)


@dataclass(frozen=True, eq=False)
class SirenModel:
    config: SirenConfig
    layers: tuple[tuple[np.ndarray, np.ndarray], ...]
    precision: str = "fp32"

    def __post_init__(self):
        if self.precision not in _DTYPES:
            raise ValidationError(f"precision must be one of {sorted(_DTYPES)}")
        dims = self.config.layer_dims
        if len(self.layers) != len(dims):
            raise ValidationError(f"expected {len(dims)} layers, got {len(self.layers)}")
        dtype = self.dtype
        layers = []
        for (W, b), (o, i) in zip(self.layers, dims):
            W = np.asarray(W, dtype=dtype)
            b = np.asarray(b, dtype=dtype)
            if W.shape != (o, i) or b.shape != (o,):
                raise ValidationError(f"layer shapes {W.shape}, {b.shape} do not match ({o}, {i})")
            layers.append((W, b))
        object.__setattr__(self, "layers", tuple(layers))

    @property
    def dtype(self):
        return _DTYPES[self.precision]

    @property
    def omega0(self) -> float:
        return self.config.omega0

    def flat_params(self) -> np.ndarray:
        """All parameters in storage order: per layer, weights row-major then bias."""
        return np.concatenate([a.ravel() for W, b in self.layers for a in (W, b)])

    def with_flat_params(self, flat: np.ndarray) -> SirenModel:
        flat = np.asarray(flat)
        if flat.size != param_count(self.config):
            raise ValidationError(f"expected {param_count(self.config)} parameters, got {flat.size}")
        layers, pos = [], 0
        for o, i in self.config.layer_dims:
            W = flat[pos:pos + o * i].reshape(o, i)
            pos += o * i
            b = flat[pos:pos + o]
            pos += o
            layers.append((W, b))
        return SirenModel(self.config, tuple(layers), self.precision)

    def astype(self, precision: str) -> SirenModel:
        return SirenModel(self.config, self.layers, precision)


def init_siren(config: SirenConfig, seed: int, precision: str = "fp32") -> SirenModel:
    """Draw SIREN-initialized parameters.

    The first layer is uniform on ``±1/in_dim``; every later layer, the
    output layer included, on ``±sqrt(6/fan_in)/omega0``. Biases share their
    layer's interval.
    """
    rng = np.random.default_rng(seed)
    layers = []
    for k, (o, i) in enumerate(config.layer_dims):
        bound = 1.0 / i if k == 0 else np.sqrt(6.0 / i) / config.omega0
        W = rng.uniform(-bound, bound, size=(o, i))
        b = rng.uniform(-bound, bound, size=o)
        layers.append((W, b))
    return SirenModel(config, tuple(layers), precision)


def _check_coords(model: SirenModel, coords) -> np.ndarray:
    coords = np.asarray(coords, dtype=model.dtype)
    if coords.ndim != 2 or coords.shape[1] != model.config.in_dim:
        raise ValidationError(f"coords must have shape (batch, 2), got {coords.shape}")
    return coords


def forward(model: SirenModel, coords) -> np.ndarray:
    """Network outputs for a ``(batch, 2)`` coordinate array, shape ``(batch, out_dim)``."""
    h = _check_coords(model, coords)
    w0 = model.dtype(model.omega0)
    for W, b in model.layers[:-1]:
        h = np.sin(w0 * (h @ W.T + b))
    W, b = model.layers[-1]
    return h @ W.T + b


def _affine_rowwise(h: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (h[:, None, :] * W[None, :, :]).sum(axis=-1) + b


def evaluate(model: SirenModel, coords) -> np.ndarray:
    """Same function as :func:`forward`, computed independently of batch composition."""
    coords = _check_coords(model, coords)
    widest = max(o * i for o, i in model.config.layer_dims)
    step = max(1, _EVAL_CHUNK_ELEMS // widest)
    w0 = model.dtype(model.omega0)
    out = np.empty((coords.shape[0], model.config.out_dim), dtype=model.dtype)
    for start in range(0, coords.shape[0], step):
        h = coords[start:start + step]
        for W, b in model.layers[:-1]:
            h = np.sin(w0 * _affine_rowwise(h, W, b))
        W, b = model.layers[-1]
        out[start:start + step] = _affine_rowwise(h, W, b)
    return out


def loss_and_grad(model: SirenModel, coords, targets):
    """Mean squared error over all ``batch * out_dim`` residuals and its exact gradient.

    Returns ``(mse, grads)`` where ``grads`` mirrors ``model.layers``.
    """
    h = _check_coords(model, coords)
    targets = np.asarray(targets, dtype=model.dtype)
    if targets.shape != (h.shape[0], model.config.out_dim):
        raise ValidationError(
            f"targets shape {targets.shape} does not match batch {(h.shape[0], model.config.out_dim)}"
        )
    w0 = model.dtype(model.omega0)
    inputs, phases = [], []
    for W, b in model.layers[:-1]:
        inputs.append(h)
        z = w0 * (h @ W.T + b)
        phases.append(z)
        h = np.sin(z)
    W_out, b_out = model.layers[-1]
    resid = h @ W_out.T + b_out - targets
    mse = float(np.mean(np.square(resid, dtype=np.float64)))

    g = resid * model.dtype(2.0 / resid.size)
    grads = [None] * len(model.layers)
    grads[-1] = (g.T @ h, g.sum(axis=0))
    g = g @ W_out
    for k in range(len(model.layers) - 2, -1, -1):
        g = g * (w0 * np.cos(phases[k]))
        grads[k] = (g.T @ inputs[k], g.sum(axis=0))
        if k:
            g = g @ model.layers[k][0]
    return mse, grads


@dataclass(frozen=True, eq=False)
class AdamState:
    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: tuple = field(default=())
    v: tuple = field(default=())

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValidationError("Adam betas must lie in (0, 1)")
        if self.lr <= 0 or self.eps <= 0 or self.step < 0:
            raise ValidationError("Adam needs lr > 0, eps > 0 and step >= 0")


def adam_init(model: SirenModel, lr: float = 2e-4, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = tuple((np.zeros_like(W), np.zeros_like(b)) for W, b in model.layers)
    return AdamState(lr, beta1, beta2, eps, 0, zeros, tuple((a.copy(), c.copy()) for a, c in zeros))


def adam_step(model: SirenModel, grads, state: AdamState) -> tuple[SirenModel, AdamState]:
    """One bias-corrected Adam update; returns fresh model and state."""
    if len(grads) != len(model.layers) or len(state.m) != len(model.layers):
        raise ValidationError("gradient / moment layer count does not match model")
    t = state.step + 1
    dt = model.dtype
    b1, b2 = dt(state.beta1), dt(state.beta2)
    corr1 = dt(1.0 - state.beta1 ** t)
    corr2 = dt(1.0 - state.beta2 ** t)
    lr, eps = dt(state.lr), dt(state.eps)
    layers, ms, vs = [], [], []
    for params, gs, mk, vk in zip(model.layers, grads, state.m, state.v):
        new_p, new_m, new_v = [], [], []
        for p, g, m, v in zip(params, gs, mk, vk):
            if g.shape != p.shape or m.shape != p.shape:
                raise ValidationError(f"shape mismatch: param {p.shape}, grad {g.shape}")
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * (g * g)
            p = p - lr * (m / corr1) / (np.sqrt(v / corr2) + eps)
            new_p.append(p)
            new_m.append(m)
            new_v.append(v)
        layers.append(tuple(new_p))
        ms.append(tuple(new_m))
        vs.append(tuple(new_v))
    new_state = AdamState(state.lr, state.beta1, state.beta2, state.eps, t, tuple(ms), tuple(vs))
    return SirenModel(model.config, tuple(layers), model.precision), new_state
