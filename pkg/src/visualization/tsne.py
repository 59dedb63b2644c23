"""
Exact t-SNE for 2-D projections of latent embeddings
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist

from ..utils.errors import TsneConfigError

MAX_POINTS = 5000
_FLOOR = 1e-12


class TsneConfig(BaseModel):
    """
    Optimisation schedule for exact t-SNE

    Early exaggeration ends and momentum switches to ``final_momentum`` at
    the same iteration, ``exaggeration_iterations``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    perplexity: float = Field(default=30.0, gt=0)
    iterations: int = Field(default=1000, ge=1)
    learning_rate: float = Field(default=200.0, gt=0)
    early_exaggeration: float = Field(default=12.0, gt=0)
    exaggeration_iterations: int = Field(default=250, ge=0)
    momentum: float = Field(default=0.5, ge=0, lt=1)
    final_momentum: float = Field(default=0.8, ge=0, lt=1)
    min_gain: float = Field(default=0.01, gt=0)
    seed: int = 0
    kl_every: int = Field(default=50, ge=1)

    def check_points(self, n: int) -> None:
        if n < 2:
            raise TsneConfigError(f"t-SNE needs at least 2 points, got {n}")
        if n > MAX_POINTS:
            raise TsneConfigError(f"exact t-SNE is limited to {MAX_POINTS} points, got {n}")
        if self.perplexity >= n / 3:
            raise TsneConfigError(
                f"perplexity {self.perplexity} must be below N/3 = {n / 3:.3f} for N={n}"
            )


@dataclass
class TsneResult:
    embedding: np.ndarray
    kl_history: List[Tuple[int, float]] = field(default_factory=list)
    entropies: Optional[np.ndarray] = None

    def kl_at(self, iteration: int) -> float:
        for step, value in self.kl_history:
            if step == iteration:
                return value
        raise KeyError(f"KL divergence was not recorded at iteration {iteration}")

    @property
    def final_kl(self) -> float:
        return self.kl_history[-1][1]


def _row_entropy(distances: np.ndarray, beta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Entropy (nats) and normalised Gaussian affinities for each row"""
    shifted = distances - distances.min(axis=1, keepdims=True)
    weights = np.exp(-shifted * beta[:, None])
    total = weights.sum(axis=1)
    entropy = np.log(total) + beta * (shifted * weights).sum(axis=1) / total
    return entropy, weights / total[:, None]


def conditional_probabilities(
    X: np.ndarray,
    perplexity: float = 30.0,
    tol: float = 1e-4,
    max_steps: int = 50
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-point Gaussian conditionals p(j|i) hitting the target perplexity

    The precision of each row is found by bisection until the row entropy
    is within ``tol`` of log(perplexity), for at most ``max_steps`` steps.

    Returns:
        (P [N, N] with zero diagonal and unit row sums, row entropies [N])
    """
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    d2 = cdist(X, X, "sqeuclidean")
    off_diagonal = ~np.eye(n, dtype=bool)
    distances = d2[off_diagonal].reshape(n, n - 1)

    target = np.log(perplexity)
    beta = np.ones(n)
    low = np.zeros(n)
    high = np.full(n, np.inf)

    entropy, rows = _row_entropy(distances, beta)
    for _ in range(max_steps):
        diff = entropy - target
        active = np.abs(diff) > tol
        if not active.any():
            break
        # entropy above target: Gaussian too wide, raise the precision
        up = active & (diff > 0)
        down = active & (diff <= 0)
        low[up] = beta[up]
        beta[up] = np.where(np.isinf(high[up]), beta[up] * 2.0, (beta[up] + high[up]) / 2.0)
        high[down] = beta[down]
        beta[down] = (beta[down] + low[down]) / 2.0
        entropy, rows = _row_entropy(distances, beta)

    misses = int((np.abs(entropy - target) > tol).sum())
    if misses:
        logger.warning(f"{misses} points did not reach perplexity {perplexity} within {max_steps} steps")

    P = np.zeros((n, n))
    P[off_diagonal] = rows.reshape(-1)
    return P, entropy


def joint_probabilities(X: np.ndarray, perplexity: float = 30.0) -> np.ndarray:
    """Symmetrised P summing to 1 with a small floor"""
    conditional, _ = conditional_probabilities(X, perplexity)
    P = (conditional + conditional.T) / (2.0 * len(X))
    return np.maximum(P, _FLOOR)


def _student_t(Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    numerator = 1.0 / (1.0 + cdist(Y, Y, "sqeuclidean"))
    np.fill_diagonal(numerator, 0.0)
    Q = np.maximum(numerator / numerator.sum(), _FLOOR)
    return numerator, Q


def kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    return float(np.sum(P * np.log(P / Q)))


def run_tsne(X: np.ndarray, cfg: TsneConfig = TsneConfig()) -> TsneResult:
    """
    Exact t-SNE with gains, momentum and early exaggeration

    Args:
        X: High-dimensional points [N, D]
        cfg: Optimisation schedule

    Returns:
        TsneResult with the centred [N, 2] embedding and the KL trace
    """
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    cfg.check_points(n)

    conditional, entropies = conditional_probabilities(X, cfg.perplexity)
    P = np.maximum((conditional + conditional.T) / (2.0 * n), _FLOOR)

    rng = np.random.default_rng(cfg.seed)
    Y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    history: List[Tuple[int, float]] = []

    logger.info(f"Running t-SNE on {n} points (perplexity {cfg.perplexity}, {cfg.iterations} iterations)")
    for it in range(cfg.iterations):
        early = it < cfg.exaggeration_iterations
        exaggeration = cfg.early_exaggeration if early else 1.0
        momentum = cfg.momentum if early else cfg.final_momentum

        numerator, Q = _student_t(Y)
        weights = (exaggeration * P - Q) * numerator
        grad = 4.0 * (weights.sum(axis=1)[:, None] * Y - weights @ Y)

        same_sign = (grad > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, cfg.min_gain, out=gains)
        update = momentum * update - cfg.learning_rate * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)

        step = it + 1
        if step % cfg.kl_every == 0 or step == cfg.iterations:
            kl = kl_divergence(P, _student_t(Y)[1])
            history.append((step, kl))
            logger.debug(f"t-SNE iteration {step}: KL={kl:.6f}")

    logger.info(f"t-SNE finished with KL={history[-1][1]:.6f}")
    return TsneResult(embedding=Y, kl_history=history, entropies=entropies)


def tsne(X: np.ndarray, cfg: TsneConfig = TsneConfig()) -> np.ndarray:
    """Project ``X`` to two dimensions; see ``run_tsne``"""
    return run_tsne(X, cfg).embedding
