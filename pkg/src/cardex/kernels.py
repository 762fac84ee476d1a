"""Training-math kernels, built as verification targets: categorical
cross-entropy and its gradient, distribution focal loss, complete-IoU, and
the decoupled-weight-decay optimizer step.

These are standalone, gradient-checked reference implementations; no
autodiff or training loop is built on top of them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import RangeError, ShapeError
from .types import AbsBox
from .metrics import iou as box_iou

LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class ProbabilityVector:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ShapeError("probability vector must be 1D and non-empty")
        if p.min() < 0.0 or p.max() > 1.0 or abs(p.sum() - 1.0) > 1e-9:
            raise ShapeError("probabilities must lie in [0,1] and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def __len__(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class OneHot:
    k: int
    size: int

    def __post_init__(self):
        if not (0 <= self.k < self.size):
            raise ShapeError(f"true index {self.k} out of range for size {self.size}")


@dataclass(frozen=True)
class BinDistribution:
    """Probability distribution over the integer bin grid 0..n."""

    q: ProbabilityVector

    @property
    def n(self) -> int:
        return len(self.q) - 1


@dataclass(frozen=True)
class OptimizerState:
    theta: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        m = np.asarray(self.m, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if not (theta.shape == m.shape == v.shape) or theta.ndim != 1:
            raise ShapeError("theta, m, v must be 1D vectors of equal length")
        if self.alpha <= 0 or not (0 <= self.beta1 < 1) or not (0 <= self.beta2 < 1):
            raise RangeError("alpha must be > 0 and betas in [0, 1)")
        if self.eps <= 0 or self.weight_decay < 0 or self.t < 0:
            raise RangeError("eps must be > 0, weight_decay >= 0, t >= 0")
        for arr, name in ((theta, "theta"), (m, "m"), (v, "v")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def fresh(cls, theta, **kwargs) -> "OptimizerState":
        theta = np.asarray(theta, dtype=np.float64)
        return cls(theta=theta, m=np.zeros_like(theta), v=np.zeros_like(theta), **kwargs)


def cce(y_true: OneHot, y_pred: ProbabilityVector) -> float:
    """Categorical cross-entropy: -sum(y_true * ln(y_pred))."""
    if y_true.size != len(y_pred):
        raise ShapeError(f"length mismatch: {y_true.size} vs {len(y_pred)}")
    return float(-np.log(max(y_pred.p[y_true.k], LOG_CLAMP)))


def cce_grad(y_true: OneHot, y_pred: ProbabilityVector) -> np.ndarray:
    """Gradient of cce w.r.t. the probabilities: -1/p_k at the true index."""
    if y_true.size != len(y_pred):
        raise ShapeError(f"length mismatch: {y_true.size} vs {len(y_pred)}")
    grad = np.zeros(len(y_pred))
    grad[y_true.k] = -1.0 / max(y_pred.p[y_true.k], LOG_CLAMP)
    return grad


def dfl(target: float, dist: BinDistribution) -> float:
    """Distribution focal loss: cross-entropy against the two integer bins
    bracketing the continuous target."""
    n = dist.n
    if not (0.0 <= target <= n):
        raise RangeError(f"target {target} outside bin range [0, {n}]")
    i = int(np.floor(target))
    if i == n:  # target exactly at the top bin
        i = n - 1 if n > 0 else 0
    q = dist.q.p
    if n == 0:
        return float(-np.log(max(q[0], LOG_CLAMP)))
    wi = (i + 1) - target
    wj = target - i
    return float(
        -(wi * np.log(max(q[i], LOG_CLAMP)) + wj * np.log(max(q[i + 1], LOG_CLAMP)))
    )


def ciou(a: AbsBox, b: AbsBox) -> float:
    """Complete IoU: overlap minus center-distance and aspect-ratio penalties."""
    overlap = box_iou(a, b)
    acx, acy = (a.x1 + a.x2) / 2.0, (a.y1 + a.y2) / 2.0
    bcx, bcy = (b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0
    rho2 = (acx - bcx) ** 2 + (acy - bcy) ** 2
    ex1, ey1 = min(a.x1, b.x1), min(a.y1, b.y1)
    ex2, ey2 = max(a.x2, b.x2), max(a.y2, b.y2)
    c2 = (ex2 - ex1) ** 2 + (ey2 - ey1) ** 2
    aw, ah = a.x2 - a.x1, a.y2 - a.y1
    bw, bh = b.x2 - b.x1, b.y2 - b.y1
    v = (4.0 / np.pi**2) * (np.arctan(bw / bh) - np.arctan(aw / ah)) ** 2
    alpha = 0.0 if v == 0.0 else v / ((1.0 - overlap) + v)
    return float(overlap - rho2 / c2 - alpha * v)


def ciou_loss(a: AbsBox, b: AbsBox) -> float:
    return 1.0 - ciou(a, b)


def adamw_step(state: OptimizerState, grad: np.ndarray) -> OptimizerState:
    """One optimizer step with weight decay decoupled from the moment update.

    Moments use the standard exponential updates with bias correction; the
    decay term is computed from the pre-update parameters, so its
    contribution is exactly -alpha * weight_decay * theta regardless of the
    gradient.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.theta.shape:
        raise ShapeError(f"gradient shape {grad.shape} != theta shape {state.theta.shape}")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    update = state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
    theta = state.theta - update - (state.alpha * state.weight_decay) * state.theta
    return replace(state, theta=theta, m=m, v=v, t=t)
