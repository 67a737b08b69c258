"""Performance functions over joint strategies, with analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonPositiveStrategy, ZeroAreaTotal
from .game import PlayerDims, check_strategy

# Mixing weight toward the uniform strategy when a target has zero entries.
# Without it, the divergence to a pure target is infinite.
KL_SMOOTHING_DEFAULT = 1e-3


@dataclass(frozen=True)
class PerformanceObjective:
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    name: str


def smooth_target(target: np.ndarray, dims: PlayerDims, delta: float) -> np.ndarray:
    """Blockwise mix of the target with the uniform strategy."""
    t = np.array(target, dtype=float)
    for i in range(dims.n):
        blk = dims.block(i)
        t[blk] = (1.0 - delta) * t[blk] + delta / dims.sizes[i]
    return t


def _require_positive(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveStrategy("objective evaluated at a strategy with nonpositive entries")
    return x


def kl_objective(
    target: np.ndarray,
    dims: PlayerDims,
    smoothing_delta: float = KL_SMOOTHING_DEFAULT,
) -> PerformanceObjective:
    """Summed divergence of each player's strategy from a target strategy.

    value(x) = sum_i x_i . (ln x_i - ln t_i) against the smoothed target
    t = (1-delta)*target + delta*uniform per block; gradient is
    ln x - ln t + 1.  Smoothing keeps the value finite for pure targets.
    """
    check_strategy(target, dims)
    if not 0 <= smoothing_delta <= 1:
        raise ValueError("smoothing_delta must lie in [0, 1]")
    log_t = np.log(smooth_target(target, dims, smoothing_delta))

    def value(x: np.ndarray) -> float:
        x = _require_positive(x)
        return float(x @ (np.log(x) - log_t))

    def gradient(x: np.ndarray) -> np.ndarray:
        x = _require_positive(x)
        return np.log(x) - log_t + 1.0

    return PerformanceObjective(value=value, gradient=gradient, name="kl")


def kl_to_pure(x: np.ndarray, target: np.ndarray) -> float:
    """Divergence of a pure/interior target from x: -sum over the target's
    support of ln x.  Finite for interior x even when the target has zeros,
    and it decreases monotonically as x concentrates on the target."""
    x = _require_positive(x)
    target = np.asarray(target, dtype=float)
    support = target > 0
    return float(np.sum(target[support] * (np.log(target[support]) - np.log(x[support]))))


def potential_delay_objective(dims: PlayerDims) -> PerformanceObjective:
    """Fairness objective: sum over areas of the reciprocal aggregate service.

    All players must share one action set (the areas).  value(x) =
    sum_a 1 / (sum_i x_i[a]); the gradient entry for any player at area a is
    -1 / (sum_i x_i[a])^2.  Lower is fairer for a fixed total supply.
    """
    sizes = set(dims.sizes)
    if len(sizes) != 1:
        raise ValueError("potential delay needs the same action count for every player")
    k = dims.sizes[0]

    def totals(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = x.reshape(dims.n, k).sum(axis=0)
        if np.any(t <= 0):
            raise ZeroAreaTotal("an area receives zero aggregate service")
        return t

    def value(x: np.ndarray) -> float:
        return float(np.sum(1.0 / totals(x)))

    def gradient(x: np.ndarray) -> np.ndarray:
        g = -1.0 / totals(x) ** 2
        return np.tile(g, dims.n)

    return PerformanceObjective(value=value, gradient=gradient, name="potential_delay")
