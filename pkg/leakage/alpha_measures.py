"""
Rényi 熵/散度、Arimoto 条件熵、Sibson 互信息、Arimoto 互信息

单位统一为 nats。α 按 AlphaOrder 标签精确分派：
- Finite：对数域求和（logsumexp，先减最大值），α 到 1e4 也不会溢出
- One / Infinity：连续延拓后的闭式
概率为 0 的项直接跳过（0^α = 0），不参与任何运算。
"""

import numpy as np
from scipy.special import entr, logsumexp, xlogy

from leakage.errors import DimensionMismatch
from leakage.prob_core import joint_from
from models.prob_model import AlphaOrder, Channel, Distribution, Joint
from models.results import MeasureValue


def _log(values) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(values)


def _lse(values, axis=None):
    # 全为 -inf 时返回 -inf，不报警告
    with np.errstate(divide="ignore", invalid="ignore"):
        return logsumexp(values, axis=axis)


def _check_compatible(prior: Distribution, channel: Channel):
    if prior.alphabet_size != channel.in_size:
        raise DimensionMismatch(
            f"prior has {prior.alphabet_size} symbols but channel has {channel.in_size} inputs")


def shannon_entropy(p: Distribution) -> float:
    return float(entr(p.probs).sum())


def shannon_mutual_information(joint: Joint) -> float:
    """I(X;Y) = H(X) + H(Y) − H(X,Y)"""
    return float(entr(joint.marginal_x).sum() + entr(joint.marginal_y).sum() - entr(joint.mass).sum())


def renyi_entropy(p: Distribution, alpha: AlphaOrder) -> MeasureValue:
    probs = p.probs[p.probs > 0]
    if alpha.is_one:
        value = float(entr(probs).sum())
    elif alpha.is_infinite:
        value = float(-np.log(probs.max()))
    else:
        a = alpha.value
        # (α/(1−α))·log‖p‖_α = log(Σ p^α)/(1−α)
        value = float(_lse(a * np.log(probs)) / (1.0 - a))
    return MeasureValue(value, alpha)


def renyi_divergence(p: Distribution, q: Distribution, alpha: AlphaOrder) -> MeasureValue:
    if p.alphabet_size != q.alphabet_size:
        raise DimensionMismatch(f"alphabet sizes differ: {p.alphabet_size} vs {q.alphabet_size}")
    on_support = p.probs > 0
    ps = p.probs[on_support]
    qs = q.probs[on_support]
    q_missing = bool(np.any(qs <= 0))

    if alpha.is_one:
        if q_missing:
            return MeasureValue(float("inf"), alpha)
        value = float(np.sum(xlogy(p.probs, p.probs) - xlogy(p.probs, q.probs)))
    elif alpha.is_infinite:
        if q_missing:
            return MeasureValue(float("inf"), alpha)
        value = float(np.log(np.max(ps / qs)))
    else:
        a = alpha.value
        if a > 1 and q_missing:
            return MeasureValue(float("inf"), alpha)
        keep = qs > 0
        if not keep.any():
            # α<1 且支撑不相交：Σ 为 0，散度为 +∞
            return MeasureValue(float("inf"), alpha)
        total = _lse(a * np.log(ps[keep]) + (1.0 - a) * np.log(qs[keep]))
        value = float(total / (a - 1.0))
    return MeasureValue(value, alpha)


def arimoto_cond_entropy(joint: Joint, alpha: AlphaOrder) -> MeasureValue:
    mass = joint.mass
    if alpha.is_one:
        value = float(entr(mass).sum() - entr(joint.marginal_y).sum())
    elif alpha.is_infinite:
        # Σ_y P_Y(y)·max_x P_{X|Y}(x|y) = Σ_y max_x P_XY(x,y)
        value = float(-np.log(mass.max(axis=0).sum()))
    else:
        a = alpha.value
        columns = _lse(a * _log(mass), axis=0) / a
        columns = columns[np.isfinite(columns)]
        value = float(a / (1.0 - a) * _lse(columns))
    return MeasureValue(value, alpha)


def sibson_from_weights(weights: np.ndarray, channel: Channel, alpha: float) -> float:
    """
    Sibson 互信息的闭式，对任意非负权重向量求值（不要求归一化，求解器的目标函数）

    α/(α−1)·log Σ_y (Σ_x w(x) W(y|x)^α)^{1/α}
    """
    weights = np.asarray(weights, dtype=np.float64)
    rows = weights > 0
    log_inner = _lse(np.log(weights[rows])[:, None] + alpha * _log(channel.rows[rows]), axis=0)
    log_inner = log_inner[np.isfinite(log_inner)]
    return float(alpha / (alpha - 1.0) * _lse(log_inner / alpha))


def sibson_mi(prior: Distribution, channel: Channel, alpha: AlphaOrder) -> MeasureValue:
    _check_compatible(prior, channel)
    if alpha.is_one:
        value = shannon_mutual_information(joint_from(prior, channel))
    elif alpha.is_infinite:
        value = float(np.log(channel.rows[list(prior.support)].max(axis=0).sum()))
    else:
        value = sibson_from_weights(prior.probs, channel, alpha.value)
    return MeasureValue(value, alpha)


def arimoto_mi(prior: Distribution, channel: Channel, alpha: AlphaOrder) -> MeasureValue:
    _check_compatible(prior, channel)
    if alpha.is_one:
        value = shannon_mutual_information(joint_from(prior, channel))
    elif alpha.is_infinite:
        joint = joint_from(prior, channel)
        value = float(np.log(joint.mass.max(axis=0).sum()) - np.log(prior.probs.max()))
    else:
        a = alpha.value
        support = list(prior.support)
        log_p = np.log(prior.probs[support])
        log_inner = _lse(a * log_p[:, None] + a * _log(channel.rows[support]), axis=0)
        log_inner = log_inner[np.isfinite(log_inner)]
        numerator = _lse(log_inner / a)
        denominator = _lse(a * log_p) / a
        value = float(a / (a - 1.0) * (numerator - denominator))
    return MeasureValue(value, alpha)


def sibson_optimal_output(prior: Distribution, channel: Channel, alpha: AlphaOrder) -> Distribution:
    """使 D_α(P_XY‖P_X×Q_Y) 取到下确界的 Q_Y"""
    _check_compatible(prior, channel)
    support = list(prior.support)
    if alpha.is_one:
        return Distribution(joint_from(prior, channel).marginal_y)
    if alpha.is_infinite:
        column_max = channel.rows[support].max(axis=0)
        return Distribution(column_max / column_max.sum())
    a = alpha.value
    log_inner = _lse(np.log(prior.probs[support])[:, None] + a * _log(channel.rows[support]), axis=0)
    log_q = log_inner / a
    with np.errstate(invalid="ignore"):
        q = np.exp(log_q - _lse(log_q))
    return Distribution(np.nan_to_num(q, nan=0.0))


def joint_divergence_to_product(prior: Distribution, channel: Channel, q_y: Distribution,
                                alpha: AlphaOrder) -> MeasureValue:
    """D_α(P_XY ‖ P_X × Q_Y)"""
    _check_compatible(prior, channel)
    if q_y.alphabet_size != channel.out_size:
        raise DimensionMismatch(f"Q_Y has {q_y.alphabet_size} symbols but channel has {channel.out_size} outputs")
    joint = joint_from(prior, channel)
    product = np.outer(prior.probs, q_y.probs)
    return renyi_divergence(Distribution(joint.mass.reshape(-1)), Distribution(product.reshape(-1)), alpha)
