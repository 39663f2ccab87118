"""From-scratch LSTM regressor with exact backpropagation through time.

One LSTM layer plus a linear scalar head.  The four gate weight matrices are
stored stacked as a single (4H, H+D) array in row order [forget, input,
output, candidate]; per-gate views are exposed as properties.  Training is
per-sample stochastic with Adam-style moments and global-norm gradient
clipping, fully determined by the config seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FeatureSample",
    "LstmParams",
    "LstmState",
    "LstmGrads",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "lstm_cell_forward",
    "forward_sequence",
    "predict",
    "backward",
    "train",
]


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss becomes non-finite."""


@dataclass(frozen=True)
class FeatureSample:
    """One supervised sample: L input vectors (L, D) and a scalar target."""

    inputs: np.ndarray
    target: float

    def __post_init__(self) -> None:
        inputs = np.asarray(self.inputs, dtype=np.float64)
        if inputs.ndim != 2 or inputs.shape[0] < 1:
            raise ValueError(f"inputs must be (L, D) with L >= 1, got shape {inputs.shape}")
        inputs.flags.writeable = False
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "target", float(self.target))

    @property
    def lag(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


@dataclass
class LstmParams:
    """Gate weights (stacked), biases, and the linear head."""

    weights: np.ndarray  # (4H, H+D), rows [forget; input; output; candidate]
    biases: np.ndarray  # (4H,)
    head_w: np.ndarray  # (H,)
    head_b: float

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        self.head_w = np.asarray(self.head_w, dtype=np.float64)
        self.head_b = float(self.head_b)
        if self.weights.ndim != 2 or self.weights.shape[0] % 4:
            raise ValueError("weights must be (4H, H+D)")
        h = self.weights.shape[0] // 4
        if self.weights.shape[1] <= h:
            raise ValueError("weights must have H+D columns with D >= 1")
        if self.biases.shape != (4 * h,) or self.head_w.shape != (h,):
            raise ValueError("bias/head shapes inconsistent with hidden size")
        for arr in (self.weights, self.biases, self.head_w):
            if not np.isfinite(arr).all():
                raise ValueError("parameters must be finite")
        if not math.isfinite(self.head_b):
            raise ValueError("parameters must be finite")

    @property
    def hidden_size(self) -> int:
        return self.weights.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.weights.shape[1] - self.hidden_size

    # Per-gate views into the stacked arrays.
    @property
    def w_forget(self) -> np.ndarray:
        return self.weights[: self.hidden_size]

    @property
    def w_input(self) -> np.ndarray:
        return self.weights[self.hidden_size : 2 * self.hidden_size]

    @property
    def w_output(self) -> np.ndarray:
        return self.weights[2 * self.hidden_size : 3 * self.hidden_size]

    @property
    def w_candidate(self) -> np.ndarray:
        return self.weights[3 * self.hidden_size :]

    @property
    def b_forget(self) -> np.ndarray:
        return self.biases[: self.hidden_size]

    @property
    def b_input(self) -> np.ndarray:
        return self.biases[self.hidden_size : 2 * self.hidden_size]

    @property
    def b_output(self) -> np.ndarray:
        return self.biases[2 * self.hidden_size : 3 * self.hidden_size]

    @property
    def b_candidate(self) -> np.ndarray:
        return self.biases[3 * self.hidden_size :]

    @classmethod
    def zeros(cls, hidden_size: int, input_size: int) -> "LstmParams":
        return cls(
            weights=np.zeros((4 * hidden_size, hidden_size + input_size)),
            biases=np.zeros(4 * hidden_size),
            head_w=np.zeros(hidden_size),
            head_b=0.0,
        )

    @classmethod
    def init(cls, rng: np.random.Generator, hidden_size: int, input_size: int) -> "LstmParams":
        """Seeded uniform init in +-1/sqrt(H+D); forget-gate bias +1."""
        bound = 1.0 / math.sqrt(hidden_size + input_size)
        gates = [rng.uniform(-bound, bound, size=(hidden_size, hidden_size + input_size)) for _ in range(4)]
        head_w = rng.uniform(-bound, bound, size=hidden_size)
        biases = np.zeros(4 * hidden_size)
        biases[:hidden_size] = 1.0
        return cls(weights=np.vstack(gates), biases=biases, head_w=head_w, head_b=0.0)

    def copy(self) -> "LstmParams":
        return LstmParams(
            weights=self.weights.copy(),
            biases=self.biases.copy(),
            head_w=self.head_w.copy(),
            head_b=self.head_b,
        )


@dataclass(frozen=True)
class LstmState:
    """Hidden output h and cell state c (each length H)."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zero(cls, hidden_size: int) -> "LstmState":
        return cls(h=np.zeros(hidden_size), c=np.zeros(hidden_size))


def lstm_cell_forward(params: LstmParams, x, state: LstmState):
    """One cell step; returns the new state and the cache for backprop.

    f, i, o = sigmoid(W_gate [h, x] + b_gate); c_hat = tanh(W_c [h, x] + b_c);
    c = i*c_hat + f*c_prev; h = o*tanh(c).
    """
    x = np.asarray(x, dtype=np.float64)
    hsz = params.hidden_size
    if x.shape != (params.input_size,):
        raise ValueError(f"input must have shape ({params.input_size},), got {x.shape}")
    if state.h.shape != (hsz,) or state.c.shape != (hsz,):
        raise ValueError("state shape inconsistent with parameters")
    z = np.concatenate([state.h, x])
    pre = params.weights @ z + params.biases
    gates = _sigmoid(pre[: 3 * hsz])
    f, i, o = gates[:hsz], gates[hsz : 2 * hsz], gates[2 * hsz :]
    c_hat = np.tanh(pre[3 * hsz :])
    c = i * c_hat + f * state.c
    tanh_c = np.tanh(c)
    h = o * tanh_c
    # Mathematically the gates live in (0,1) and c_hat in (-1,1); float
    # saturation can round onto the closed boundary, which is still healthy.
    assert ((gates >= 0) & (gates <= 1)).all(), "gate activations escaped [0, 1]"
    assert (np.abs(c_hat) <= 1).all() and (np.abs(h) <= 1).all(), "cell activations escaped range"
    cache = {"z": z, "f": f, "i": i, "o": o, "c_hat": c_hat, "c_prev": state.c, "tanh_c": tanh_c, "h": h}
    return LstmState(h=h, c=c), cache


def _run_sequence(params: LstmParams, inputs: np.ndarray):
    state = LstmState.zero(params.hidden_size)
    caches = []
    for t in range(inputs.shape[0]):
        state, cache = lstm_cell_forward(params, inputs[t], state)
        caches.append(cache)
    prediction = float(params.head_w @ state.h + params.head_b)
    return prediction, caches


def forward_sequence(params: LstmParams, sample: FeatureSample):
    """Run the cell chain from a zero state; prediction = head_w . h_L + head_b."""
    return _run_sequence(params, sample.inputs)


def predict(params: LstmParams, inputs) -> float:
    """Prediction for a raw (L, D) input window."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2:
        raise ValueError("inputs must be (L, D)")
    prediction, _ = _run_sequence(params, inputs)
    return prediction


@dataclass
class LstmGrads:
    """Gradients matching LstmParams' stacked layout."""

    weights: np.ndarray
    biases: np.ndarray
    head_w: np.ndarray
    head_b: float

    def global_norm(self) -> float:
        total = (
            float((self.weights * self.weights).sum())
            + float((self.biases * self.biases).sum())
            + float((self.head_w * self.head_w).sum())
            + self.head_b * self.head_b
        )
        return math.sqrt(total)

    def scale(self, factor: float) -> None:
        self.weights *= factor
        self.biases *= factor
        self.head_w *= factor
        self.head_b *= factor


def backward(params: LstmParams, sample: FeatureSample, caches, loss_grad: float) -> LstmGrads:
    """Exact reverse-mode gradients through the head and the unrolled chain.

    ``loss_grad`` is dLoss/dPrediction at the head output; for squared error
    pass 2 * (prediction - target).
    """
    hsz = params.hidden_size
    width = hsz + params.input_size
    if len(caches) != sample.lag:
        raise ValueError("cache does not match the sample's step count")
    if caches and caches[-1]["z"].shape != (width,):
        raise ValueError("cache does not match the parameter shapes")
    g_weights = np.zeros_like(params.weights)
    g_biases = np.zeros_like(params.biases)
    h_last = caches[-1]["h"]
    g_head_w = loss_grad * h_last
    g_head_b = float(loss_grad)
    dh = loss_grad * params.head_w
    dc = np.zeros(hsz)
    dz_all = np.empty(4 * hsz)
    for cache in reversed(caches):
        f, i, o = cache["f"], cache["i"], cache["o"]
        c_hat, tanh_c = cache["c_hat"], cache["tanh_c"]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
        dz_all[:hsz] = dc * cache["c_prev"] * f * (1.0 - f)
        dz_all[hsz : 2 * hsz] = dc * c_hat * i * (1.0 - i)
        dz_all[2 * hsz : 3 * hsz] = do * o * (1.0 - o)
        dz_all[3 * hsz :] = dc * i * (1.0 - c_hat * c_hat)
        g_weights += np.outer(dz_all, cache["z"])
        g_biases += dz_all
        dcat = params.weights.T @ dz_all
        dh = dcat[:hsz]
        dc = dc * f
    return LstmGrads(weights=g_weights, biases=g_biases, head_w=g_head_w, head_b=g_head_b)


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; every run is fully determined by the seed."""

    seed: int
    epochs: int = 200
    learning_rate: float = 1e-2
    hidden_size: int = 16
    optimizer: str = "adam"
    clip_norm: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")
        if self.optimizer != "adam":
            raise ValueError(f"unsupported optimizer {self.optimizer!r}")
        if self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")


@dataclass
class TrainResult:
    params: LstmParams
    loss_trace: list[float] = field(default_factory=list)


def train(samples, cfg: TrainConfig) -> TrainResult:
    """Seeded per-sample Adam training over shuffled epochs.

    Initialization, epoch-wise sample order, and updates are all driven by a
    PCG64 generator seeded with ``cfg.seed``, so identical (samples, config)
    give bit-identical parameter trajectories.  Raises
    TrainingDivergedError when the epoch loss becomes non-finite.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one training sample")
    dim = samples[0].dim
    if any(s.dim != dim for s in samples):
        raise ValueError("samples must share the same input dimension")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    params = LstmParams.init(rng, cfg.hidden_size, dim)

    m_w = np.zeros_like(params.weights)
    v_w = np.zeros_like(params.weights)
    m_b = np.zeros_like(params.biases)
    v_b = np.zeros_like(params.biases)
    m_hw = np.zeros_like(params.head_w)
    v_hw = np.zeros_like(params.head_w)
    m_hb = 0.0
    v_hb = 0.0
    step = 0
    loss_trace: list[float] = []

    for _ in range(cfg.epochs):
        order = rng.permutation(len(samples))
        sq_sum = 0.0
        for idx in order:
            sample = samples[idx]
            prediction, caches = forward_sequence(params, sample)
            err = prediction - sample.target
            sq_sum += err * err
            grads = backward(params, sample, caches, 2.0 * err)
            norm = grads.global_norm()
            if norm > cfg.clip_norm:
                grads.scale(cfg.clip_norm / norm)
            step += 1
            bias1 = 1.0 - cfg.beta1**step
            bias2 = 1.0 - cfg.beta2**step
            scale = cfg.learning_rate / bias1

            m_w = cfg.beta1 * m_w + (1.0 - cfg.beta1) * grads.weights
            v_w = cfg.beta2 * v_w + (1.0 - cfg.beta2) * grads.weights**2
            params.weights -= scale * m_w / (np.sqrt(v_w / bias2) + cfg.epsilon)

            m_b = cfg.beta1 * m_b + (1.0 - cfg.beta1) * grads.biases
            v_b = cfg.beta2 * v_b + (1.0 - cfg.beta2) * grads.biases**2
            params.biases -= scale * m_b / (np.sqrt(v_b / bias2) + cfg.epsilon)

            m_hw = cfg.beta1 * m_hw + (1.0 - cfg.beta1) * grads.head_w
            v_hw = cfg.beta2 * v_hw + (1.0 - cfg.beta2) * grads.head_w**2
            params.head_w -= scale * m_hw / (np.sqrt(v_hw / bias2) + cfg.epsilon)

            m_hb = cfg.beta1 * m_hb + (1.0 - cfg.beta1) * grads.head_b
            v_hb = cfg.beta2 * v_hb + (1.0 - cfg.beta2) * grads.head_b**2
            params.head_b -= scale * m_hb / (math.sqrt(v_hb / bias2) + cfg.epsilon)

        epoch_mse = sq_sum / len(samples)
        if not math.isfinite(epoch_mse):
            raise TrainingDivergedError(f"training loss became non-finite at step {step}")
        loss_trace.append(epoch_mse)
    return TrainResult(params=params, loss_trace=loss_trace)
