"""
最大 α-leakage 求解

- α = 1：给定先验下的 Shannon 互信息（不是 Shannon 容量）
- α = ∞：log Σ_y max_{x∈supp} W(y|x)
- α ∈ (1,∞)：在先验支撑集上的单纯形里最大化 Sibson 互信息（凹函数），
  用指数梯度（乘性）上升，先从均匀分布出发，未收敛时再用随机重启；结果只依赖先验的支撑集

另外提供网格 oracle（|支撑| ≤ 4）做独立校验。
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from leakage.alpha_measures import shannon_mutual_information
from leakage.errors import AlphaOutOfRange, DimensionMismatch, EmptySupport, LeakageError, SupportTooLarge
from leakage.prob_core import joint_from
from models.prob_model import AlphaOrder, Channel, Distribution
from models.results import CapacityResult

logger = logging.getLogger(__name__)

# ==================== 配置 ====================
LOG_FLOOR = -700.0          # log P 的下限，避免分量下溢成精确 0 后无法恢复
ACCEPT_TOL = 1e-14          # 目标函数的相对舍入容差，低于它的变化按噪声处理
STEP_GROWTH = 1.25
MAX_STEP = 1e6
MIN_STEP = 1e-14
ORACLE_CHUNK_ROWS = 250_000
ORACLE_MAX_SUPPORT = 4
ORACLE_MIN_RESOLUTION = 1e-3
# ==============================================


@dataclass
class SolverOptions:
    max_iterations: int = 100_000
    restarts: int = 5
    seed: int = 0
    improvement_tol: float = 1e-12
    kkt_tol: float = 1e-8
    initial_step: float = 1.0


def _log(values) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(values)


def _lse(values, axis=None):
    with np.errstate(divide="ignore", invalid="ignore"):
        return logsumexp(values, axis=axis)


def _check_support(channel: Channel, support: Sequence[int]) -> Tuple[int, ...]:
    support = tuple(sorted(int(x) for x in support))
    if not support:
        raise EmptySupport("support set is empty")
    if support[0] < 0 or support[-1] >= channel.in_size:
        raise DimensionMismatch(f"support {support} is outside the channel's {channel.in_size} inputs")
    if len(set(support)) != len(support):
        raise DimensionMismatch(f"support {support} has repeated indices")
    return support


def _check_capacity_alpha(alpha: AlphaOrder):
    if not alpha.is_finite or alpha.value <= 1.0:
        raise AlphaOutOfRange(f"the iterative solver needs a finite alpha > 1, got {alpha}")


def maxl(channel: Channel, support: Sequence[int]) -> float:
    """α = ∞ 的闭式：log Σ_y max_{x∈support} W(y|x)"""
    support = _check_support(channel, support)
    return float(np.log(channel.rows[list(support)].max(axis=0).sum()))


def uniform_sibson_lower_bound(channel: Channel, alpha: AlphaOrder) -> float:
    """均匀输入下的 Sibson 互信息，是最大 α-leakage 的下界（对称信道时取等）"""
    if alpha.is_infinite:
        return float(np.log(channel.rows.max(axis=0).sum()))
    _check_capacity_alpha(alpha)
    a = alpha.value
    per_column = _lse(a * _log(channel.rows), axis=0) / a
    per_column = per_column[np.isfinite(per_column)]
    return float(a / (a - 1.0) * (_lse(per_column) - math.log(channel.in_size) / a))


def sibson_gradient(weights: np.ndarray, channel: Channel, alpha: float) -> np.ndarray:
    """
    Sibson 互信息闭式对 P(x) 的解析梯度

    ∂I/∂P(x) = Σ_y A_y^{(1−α)/α} W(y|x)^α / ((α−1)·S)，
    其中 A_y = Σ_x P(x) W(y|x)^α，S = Σ_y A_y^{1/α}。A_y = 0 的列不计入。
    """
    weights = np.asarray(weights, dtype=np.float64)
    scaled = alpha * _log(channel.rows)
    log_a = _lse(_log(weights)[:, None] + scaled, axis=0)
    active = np.isfinite(log_a)
    log_s = _lse(log_a[active] / alpha)
    log_grad = _lse((1.0 - alpha) / alpha * log_a[None, active] + scaled[:, active], axis=1)
    return np.exp(log_grad - log_s) / (alpha - 1.0)


def kkt_residual(weights: np.ndarray, channel: Channel, alpha: float,
                 support: Optional[Sequence[int]] = None) -> float:
    """max_{x∈support} ((α−1)·∂I/∂P(x) − 1)⁺，权重需已归一化（此时 KKT 乘子为 1/(α−1)）"""
    weights = np.asarray(weights, dtype=np.float64)
    indices = np.flatnonzero(weights > 0) if support is None else np.asarray(list(support), dtype=int)
    scaled_grad = (alpha - 1.0) * sibson_gradient(weights, channel, alpha)
    return float(max(0.0, np.max(scaled_grad[indices] - 1.0)))


class _SibsonObjective:
    """支撑集上的对数域目标函数；返回 (I, log r)，r(x) = (α−1)·∂I/∂P(x)"""

    def __init__(self, rows: np.ndarray, alpha: float):
        self.alpha = alpha
        log_w = _log(rows)
        active = np.isfinite(log_w).any(axis=0)
        # 支撑集上整列为 0 的 y 对目标没有贡献
        self.scaled = alpha * log_w[:, active]

    def evaluate(self, log_p: np.ndarray) -> Tuple[float, np.ndarray]:
        a = self.alpha
        log_a = _lse(log_p[:, None] + self.scaled, axis=0)
        log_s = _lse(log_a / a)
        log_r = _lse((1.0 - a) / a * log_a[None, :] + self.scaled, axis=1) - log_s
        return float(a / (a - 1.0) * log_s), log_r


@dataclass
class _AscentRun:
    log_p: np.ndarray
    value: float
    iterations: int
    residual: float
    converged: bool
    stalled: bool


def _normalize_log(log_p: np.ndarray) -> np.ndarray:
    log_p = np.maximum(log_p - _lse(log_p), LOG_FLOOR)
    return log_p - _lse(log_p)


def _residual(log_r: np.ndarray) -> float:
    return float(max(0.0, np.max(np.expm1(log_r))))


def _ascend(objective: _SibsonObjective, p0: np.ndarray, options: SolverOptions) -> _AscentRun:
    """
    单个起点的指数梯度上升

    目标是凹函数，I* − I(P) ≤ residual/(α−1)，所以残差足够小的点就是全局最优。
    接近最优时目标值的变化低于舍入误差，此时以 KKT 残差是否下降来决定是否接受；
    只有目标值真正上升时才放大步长。
    """
    a = objective.alpha
    log_p = _normalize_log(_log(p0))
    value, log_r = objective.evaluate(log_p)
    residual = _residual(log_r)
    step = options.initial_step
    stalled = False
    converged = residual < options.kkt_tol and residual / (a - 1.0) < options.improvement_tol
    iterations = 0

    while not converged and iterations < options.max_iterations:
        iterations += 1
        candidate = _normalize_log(log_p + step * np.expm1(log_r))
        cand_value, cand_log_r = objective.evaluate(candidate)
        cand_residual = _residual(cand_log_r)
        noise = ACCEPT_TOL * (a / (a - 1.0) + abs(value))
        improvement = cand_value - value
        if (not math.isfinite(improvement) or improvement < -noise
                or (improvement <= noise and cand_residual >= residual)):
            step *= 0.5
            if step < MIN_STEP:
                stalled = True
                break
            continue

        log_p, value, log_r, residual = candidate, cand_value, cand_log_r, cand_residual
        if improvement > noise:
            step = min(step * STEP_GROWTH, MAX_STEP)
        if residual < options.kkt_tol and (improvement < options.improvement_tol
                                           or residual / (a - 1.0) < options.improvement_tol):
            converged = True

    if stalled and residual < options.kkt_tol:
        converged = True
    return _AscentRun(log_p, value, iterations, residual, converged, stalled)


def solve_alpha_capacity(channel: Channel, support: Sequence[int], alpha: AlphaOrder,
                         options: Optional[SolverOptions] = None) -> CapacityResult:
    """
    支撑集受限的 Arimoto/Sibson 信道容量（α ∈ (1,∞)）

    Args:
        channel: 信道
        support: 允许的输入下标集合
        alpha: 有限且大于 1 的阶数
        options: 迭代参数，默认 SolverOptions()

    Returns:
        CapacityResult；未收敛不报错，converged=False 并在 diagnostics 中记录
    """
    _check_capacity_alpha(alpha)
    support = _check_support(channel, support)
    options = options or SolverOptions()
    k = len(support)

    if k == 1:
        argmax = np.zeros(channel.in_size)
        argmax[support[0]] = 1.0
        return CapacityResult(nats=0.0, argmax_input=Distribution(argmax), alpha=alpha,
                              iterations=0, kkt_residual=0.0, converged=True, support=support,
                              diagnostics={"restarts": 0.0, "total_iterations": 0.0, "gap_bound": 0.0})

    objective = _SibsonObjective(channel.rows[list(support)], alpha.value)
    rng = np.random.default_rng(options.seed)
    starts = [np.full(k, 1.0 / k)] + [rng.dirichlet(np.ones(k)) for _ in range(options.restarts)]

    best: Optional[_AscentRun] = None
    best_index = 0
    total_iterations = 0
    for index, p0 in enumerate(starts):
        run = _ascend(objective, p0, options)
        total_iterations += run.iterations
        logger.debug("start %d: value=%.15g iterations=%d residual=%.3e converged=%s",
                     index, run.value, run.iterations, run.residual, run.converged)
        if best is None or run.value > best.value or (run.value == best.value and run.converged and not best.converged):
            best, best_index = run, index
        if run.converged:
            # 凹目标的 KKT 点即全局最优，剩下的起点不必再跑
            break
    restarts_run = index

    weights = np.exp(best.log_p)
    weights[weights < 1e-15] = 0.0
    weights /= weights.sum()
    argmax = np.zeros(channel.in_size)
    argmax[list(support)] = weights

    hit_cap = best.iterations >= options.max_iterations and not best.converged
    if not best.converged:
        logger.warning("alpha=%s capacity solve did not converge (residual %.3e after %d iterations)",
                       alpha, best.residual, best.iterations)
    return CapacityResult(
        nats=best.value,
        argmax_input=Distribution(argmax),
        alpha=alpha,
        iterations=best.iterations,
        kkt_residual=best.residual,
        converged=best.converged,
        support=support,
        diagnostics={
            "restarts": float(restarts_run),
            "gap_bound": best.residual / (alpha.value - 1.0),
            "best_start": float(best_index),
            "total_iterations": float(total_iterations),
            "stalled": 1.0 if best.stalled else 0.0,
            "max_iterations_exceeded": 1.0 if hit_cap else 0.0,
        },
    )


def maximal_alpha_leakage(prior: Distribution, channel: Channel, alpha: AlphaOrder,
                          options: Optional[SolverOptions] = None) -> CapacityResult:
    if alpha.is_finite and alpha.value < 1.0:
        raise AlphaOutOfRange(f"maximal leakage is defined for alpha in [1, inf], got {alpha}")
    if prior.alphabet_size != channel.in_size:
        raise DimensionMismatch(
            f"prior has {prior.alphabet_size} symbols but channel has {channel.in_size} inputs")
    support = prior.support

    if alpha.is_one:
        value = shannon_mutual_information(joint_from(prior, channel))
        return CapacityResult(nats=value, argmax_input=prior, alpha=alpha, support=support)
    if alpha.is_infinite:
        argmax = np.zeros(channel.in_size)
        argmax[list(support)] = 1.0 / len(support)
        return CapacityResult(nats=maxl(channel, support), argmax_input=Distribution(argmax),
                              alpha=alpha, support=support)
    return solve_alpha_capacity(channel, support, alpha, options)


def continuity_gap_at_one(prior: Distribution, channel: Channel, eps: float = 1e-4,
                          options: Optional[SolverOptions] = None) -> Dict[str, float]:
    """α=1 处的取值（给定先验的互信息）与 α→1⁺ 的支撑受限容量之间的差距"""
    at_one = maximal_alpha_leakage(prior, channel, AlphaOrder.of(1), options).nats
    near_one = maximal_alpha_leakage(prior, channel, AlphaOrder.of(1.0 + eps), options)
    return {
        "shannon_mi": at_one,
        "capacity_near_one": near_one.nats,
        "gap": near_one.nats - at_one,
        "eps": eps,
        "converged": 1.0 if near_one.converged else 0.0,
    }


# ---------- 网格 oracle ----------

def _compositions(n: int, k: int) -> np.ndarray:
    """所有和为 n 的 k 元非负整数组"""
    if k == 1:
        return np.array([[n]])
    if k == 2:
        a = np.arange(n + 1)
        return np.column_stack([a, n - a])
    blocks = []
    for first in range(n + 1):
        sub = _compositions(n - first, k - 1)
        blocks.append(np.column_stack([np.full(len(sub), first), sub]))
    return np.vstack(blocks)


def _lattice_chunks(n: int, k: int) -> Iterator[np.ndarray]:
    if k <= 3:
        yield _compositions(n, k)
        return
    for first in range(n + 1):
        for chunk in _lattice_chunks(n - first, k - 1):
            yield np.column_stack([np.full(len(chunk), first), chunk])


def _direct_values(points: np.ndarray, powered: np.ndarray, alpha: float) -> np.ndarray:
    # 不做对数域处理的直接求和
    inner = points @ powered
    return alpha / (alpha - 1.0) * np.log(np.power(inner, 1.0 / alpha).sum(axis=1))


def grid_oracle_capacity(channel: Channel, support: Sequence[int], alpha: AlphaOrder,
                         resolution: float = 1e-3) -> float:
    """
    在单纯形格点上暴力搜索 Sibson 互信息的最大值，再在最优格点附近做成对质量转移的局部细化

    Args:
        channel: 信道
        support: 输入支撑集（最多 4 个元素）
        alpha: 有限 α > 1，或 ∞
        resolution: 格点步长（≥ 1e-3）
    """
    support = _check_support(channel, support)
    if len(support) > ORACLE_MAX_SUPPORT:
        raise SupportTooLarge(f"grid oracle handles at most {ORACLE_MAX_SUPPORT} inputs, got {len(support)}")
    if resolution < ORACLE_MIN_RESOLUTION:
        raise LeakageError(f"resolution must be at least {ORACLE_MIN_RESOLUTION}, got {resolution}")
    rows = channel.rows[list(support)]
    if alpha.is_infinite:
        return float(np.log(rows.max(axis=0).sum()))
    _check_capacity_alpha(alpha)

    a = alpha.value
    powered = np.power(rows, a)
    n = max(1, int(round(1.0 / resolution)))
    k = len(support)

    best_value, best_point = -math.inf, None
    for chunk in _lattice_chunks(n, k):
        for start in range(0, len(chunk), ORACLE_CHUNK_ROWS):
            points = chunk[start:start + ORACLE_CHUNK_ROWS] / n
            with np.errstate(divide="ignore"):
                values = _direct_values(points, powered, a)
            i = int(np.argmax(values))
            if values[i] > best_value:
                best_value, best_point = float(values[i]), points[i].copy()

    return _refine(best_point, best_value, powered, a, resolution)


def _refine(point: np.ndarray, value: float, powered: np.ndarray, alpha: float, resolution: float) -> float:
    k = len(point)
    h = resolution / 2.0
    while h > 1e-12:
        improved = True
        while improved:
            improved = False
            for i in range(k):
                for j in range(k):
                    if i == j or point[j] <= 0:
                        continue
                    t = min(h, point[j])
                    candidate = point.copy()
                    candidate[i] += t
                    candidate[j] -= t
                    with np.errstate(divide="ignore"):
                        cand_value = float(_direct_values(candidate[None, :], powered, alpha)[0])
                    if cand_value > value + 1e-15:
                        point, value, improved = candidate, cand_value, True
        h /= 2.0
    return value
