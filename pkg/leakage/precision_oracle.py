"""
高精度直接求和 oracle（mpmath，50 位十进制）

按定义逐项求和，不用任何对数域技巧，用来独立校验 alpha_measures 的结果。
只支持有限 α（One / Infinity 走闭式，不需要 oracle）。
"""

import mpmath

from leakage.errors import AlphaOutOfRange
from models.prob_model import AlphaOrder, Channel, Distribution, Joint

# ==================== 配置 ====================
PRECISION_DPS = 50
# ==============================================


def _finite_alpha(alpha: AlphaOrder) -> mpmath.mpf:
    if not alpha.is_finite:
        raise AlphaOutOfRange("the direct-summation oracle only handles finite alpha")
    return mpmath.mpf(alpha.value)


def _pow(base, exponent):
    # 0^α = 0 (α > 0)
    return mpmath.mpf(0) if base == 0 else mpmath.power(base, exponent)


def reference_renyi_entropy(p: Distribution, alpha: AlphaOrder) -> float:
    with mpmath.workdps(PRECISION_DPS):
        a = _finite_alpha(alpha)
        total = mpmath.fsum(_pow(mpmath.mpf(v), a) for v in p.probs if v > 0)
        return float(mpmath.log(total) / (1 - a))


def reference_renyi_divergence(p: Distribution, q: Distribution, alpha: AlphaOrder) -> float:
    with mpmath.workdps(PRECISION_DPS):
        a = _finite_alpha(alpha)
        terms = []
        for pv, qv in zip(p.probs, q.probs):
            if pv <= 0:
                continue
            if qv <= 0:
                if a > 1:
                    return float("inf")
                continue
            terms.append(mpmath.power(mpmath.mpf(pv), a) * mpmath.power(mpmath.mpf(qv), 1 - a))
        total = mpmath.fsum(terms)
        if total == 0:
            return float("inf")
        return float(mpmath.log(total) / (a - 1))


def reference_cond_entropy(joint: Joint, alpha: AlphaOrder) -> float:
    with mpmath.workdps(PRECISION_DPS):
        a = _finite_alpha(alpha)
        outer = []
        for column in joint.mass.T:
            inner = mpmath.fsum(_pow(mpmath.mpf(v), a) for v in column)
            if inner > 0:
                outer.append(mpmath.power(inner, 1 / a))
        return float(a / (1 - a) * mpmath.log(mpmath.fsum(outer)))


def reference_sibson_mi(prior: Distribution, channel: Channel, alpha: AlphaOrder) -> float:
    with mpmath.workdps(PRECISION_DPS):
        a = _finite_alpha(alpha)
        outer = []
        for y in range(channel.out_size):
            inner = mpmath.fsum(mpmath.mpf(prior.probs[x]) * _pow(mpmath.mpf(channel.rows[x, y]), a)
                                for x in range(channel.in_size) if prior.probs[x] > 0)
            if inner > 0:
                outer.append(mpmath.power(inner, 1 / a))
        return float(a / (a - 1) * mpmath.log(mpmath.fsum(outer)))


def reference_arimoto_mi(prior: Distribution, channel: Channel, alpha: AlphaOrder) -> float:
    with mpmath.workdps(PRECISION_DPS):
        a = _finite_alpha(alpha)
        norm = mpmath.fsum(_pow(mpmath.mpf(v), a) for v in prior.probs if v > 0)
        outer = []
        for y in range(channel.out_size):
            inner = mpmath.fsum(_pow(mpmath.mpf(prior.probs[x]), a) * _pow(mpmath.mpf(channel.rows[x, y]), a)
                                for x in range(channel.in_size) if prior.probs[x] > 0)
            if inner > 0:
                outer.append(mpmath.power(inner / norm, 1 / a))
        return float(a / (a - 1) * mpmath.log(mpmath.fsum(outer)))
