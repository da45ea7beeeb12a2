"""Epsilon-insensitive support vector regression.

The dual problem

    min over b in [-C, C]^n, sum(b) = 0 of
    0.5 b'Kb - y'b + eps * sum|b_i|

is solved by sequential pair optimization: at each step the pair of points
with the largest Karush-Kuhn-Tucker violation (measured through the
feasible-bias intervals each point induces) is optimized exactly along the
sum-preserving direction, handling the kinks of the l1 term piecewise.
Training stops when the largest violation drops below the tolerance or the
pair-update cap is reached; in the latter case the model is returned with
``converged`` set to False.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import EmptyTrainingSet, ModelError, NonFiniteTarget, WidthMismatch

_AT_BOUND = 1e-12
_SUPPORT_EPS = 1e-10


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    a2 = np.sum(A * A, axis=1)[:, None]
    b2 = np.sum(B * B, axis=1)[None, :]
    sq = np.maximum(a2 + b2 - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * sq)


def linear_kernel(A: np.ndarray, B: np.ndarray, gamma: float = 0.0) -> np.ndarray:
    return A @ B.T


_KERNELS = {"rbf": rbf_kernel, "linear": linear_kernel}


@dataclass(frozen=True)
class SVRModel:
    support_vectors: np.ndarray
    coefficients: np.ndarray  # dual coefficients of the support vectors
    bias: float
    kernel: str
    gamma: float
    C: float
    epsilon: float
    converged: bool
    n_features: int
    config: dict

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise WidthMismatch(f"expected {self.n_features} features, got {X.shape}")
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias, dtype=np.float64)
        K = _KERNELS[self.kernel](X, self.support_vectors, self.gamma)
        return K @ self.coefficients + self.bias

    def to_dict(self) -> dict:
        return {
            "kind": "svr",
            "support_vectors": self.support_vectors.tolist(),
            "coefficients": self.coefficients.tolist(),
            "bias": self.bias,
            "kernel": self.kernel,
            "gamma": self.gamma,
            "C": self.C,
            "epsilon": self.epsilon,
            "converged": self.converged,
            "n_features": self.n_features,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SVRModel":
        return cls(
            support_vectors=np.array(data["support_vectors"], dtype=np.float64).reshape(
                -1, int(data["n_features"])
            ),
            coefficients=np.array(data["coefficients"], dtype=np.float64),
            bias=float(data["bias"]),
            kernel=str(data["kernel"]),
            gamma=float(data["gamma"]),
            C=float(data["C"]),
            epsilon=float(data["epsilon"]),
            converged=bool(data["converged"]),
            n_features=int(data["n_features"]),
            config=dict(data["config"]),
        )


def default_gamma(X: np.ndarray) -> float:
    """1 / (n_features * mean feature variance), the scale convention."""
    variances = X.var(axis=0)
    mean_var = float(variances.mean()) if variances.size else 0.0
    if mean_var <= 0.0:
        return 1.0
    return 1.0 / (X.shape[1] * mean_var)


def fit_svr(
    X,
    y,
    C: float = 500.0,
    epsilon: float = 0.75,
    kernel: str = "rbf",
    gamma: float | None = None,
    tol: float = 1e-3,
    max_updates: int = 100_000,
    seed: int = 0,
) -> SVRModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    if not np.all(np.isfinite(y)):
        raise NonFiniteTarget("target contains non-finite values")
    if kernel not in _KERNELS:
        raise ModelError(f"unknown kernel {kernel!r}; choose from {sorted(_KERNELS)}")

    n = X.shape[0]
    gamma_val = default_gamma(X) if gamma is None else float(gamma)
    K = _KERNELS[kernel](X, X, gamma_val)

    beta = np.zeros(n, dtype=np.float64)
    u = np.zeros(n, dtype=np.float64)  # K @ beta, maintained incrementally
    converged = False
    updates = 0

    def intervals() -> tuple[np.ndarray, np.ndarray]:
        v = y - u
        lo = np.empty(n)
        hi = np.empty(n)
        at_zero = np.abs(beta) <= _AT_BOUND
        at_upper = beta >= C - _AT_BOUND
        at_lower = beta <= -C + _AT_BOUND
        pos = (~at_zero) & (~at_upper) & (beta > 0)
        neg = (~at_zero) & (~at_lower) & (beta < 0)
        lo[at_zero], hi[at_zero] = v[at_zero] - epsilon, v[at_zero] + epsilon
        lo[pos] = hi[pos] = v[pos] - epsilon
        lo[neg] = hi[neg] = v[neg] + epsilon
        lo[at_upper], hi[at_upper] = -np.inf, v[at_upper] - epsilon
        lo[at_lower], hi[at_lower] = v[at_lower] + epsilon, np.inf
        return lo, hi

    while updates < max_updates:
        lo, hi = intervals()
        i = int(np.argmax(lo))
        j = int(np.argmin(hi))
        if i == j or lo[i] - hi[j] < tol:
            converged = True
            break
        delta = _optimize_pair(K, y, u, beta, i, j, C, epsilon)
        if abs(delta) < 1e-14:
            break  # numerically stuck; report as non-converged
        beta[i] += delta
        beta[j] -= delta
        u += delta * (K[:, i] - K[:, j])
        updates += 1

    lo, hi = intervals()
    max_lo = float(np.max(lo))
    min_hi = float(np.min(hi))
    if np.isfinite(max_lo) and np.isfinite(min_hi):
        bias = (max_lo + min_hi) / 2.0
    else:
        bias = float(np.mean(y - u))

    support = np.abs(beta) > _SUPPORT_EPS
    config = {
        "kind": "svr",
        "C": C,
        "epsilon": epsilon,
        "kernel": kernel,
        "gamma": gamma_val,
        "tol": tol,
        "max_updates": max_updates,
        "seed": seed,
    }
    return SVRModel(
        support_vectors=X[support].copy(),
        coefficients=beta[support].copy(),
        bias=bias,
        kernel=kernel,
        gamma=gamma_val,
        C=C,
        epsilon=epsilon,
        converged=converged,
        n_features=X.shape[1],
        config=config,
    )


def _optimize_pair(K, y, u, beta, i, j, C, epsilon) -> float:
    """Exact minimizer of the dual restricted to beta_i += d, beta_j -= d."""
    a = K[i, i] + K[j, j] - 2.0 * K[i, j]
    g = (u[i] - y[i]) - (u[j] - y[j])
    bi, bj = beta[i], beta[j]

    lo_box = max(-C - bi, bj - C)
    hi_box = min(C - bi, bj + C)
    if hi_box <= lo_box:
        return 0.0

    def value(d: float) -> float:
        return (
            0.5 * a * d * d
            + g * d
            + epsilon * (abs(bi + d) - abs(bi) + abs(bj - d) - abs(bj))
        )

    points = {lo_box, hi_box}
    for kink in (-bi, bj):
        if lo_box < kink < hi_box:
            points.add(kink)
    breaks = sorted(points)

    best_d, best_val = 0.0, 0.0
    for left, right in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (left + right)
        s1 = 1.0 if bi + mid > 0 else -1.0
        s2 = 1.0 if bj - mid > 0 else -1.0
        candidates = [left, right]
        if a > 0:
            stationary = -(g + epsilon * (s1 - s2)) / a
            if left < stationary < right:
                candidates.append(stationary)
        for d in candidates:
            val = value(d)
            if val < best_val - 1e-15:
                best_val, best_d = val, d
    return best_d
