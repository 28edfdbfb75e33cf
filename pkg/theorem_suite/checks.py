"""
最大 α-leakage 各项性质的机械化检查

每个检查返回 TheoremVerdict（或若干条），witness 中保存全部输入，可以原样重放。
不等式检查默认 slack 1e-8（求解器容差远大于度量本身的舍入误差）。
"""

import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr

from leakage.alpha_measures import (
    arimoto_mi,
    joint_divergence_to_product,
    shannon_entropy,
    sibson_mi,
    sibson_optimal_output,
)
from leakage.capacity_solver import (
    SolverOptions,
    maximal_alpha_leakage,
    maxl,
    uniform_sibson_lower_bound,
)
from leakage.errors import AlphaOutOfRange, DimensionMismatch, InfeasibleTarget, InvalidCopies
from leakage.prob_core import (
    cascade_channel,
    is_rank_one,
    joint_from,
    make_distribution,
    mix_channels,
    product_channel,
    restrict_rows,
)
from models.prob_model import AlphaOrder, Channel, Distribution
from models.results import ShatterSpec, TheoremVerdict
from theorem_suite.witness import encode_witness

logger = logging.getLogger(__name__)

# ==================== 配置 ====================
DEFAULT_SLACK = 1e-8
ZERO_THRESHOLD = 1e-9
EQUALITY_SLACK = 1e-9
TILT_EQUALITY_TOL = 1e-6
DEFAULT_LAMBDA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_MONOTONE_ALPHAS = ("1", "1.2", "2", "5", "20", "inf")
# ==============================================


def _leakage(prior: Distribution, channel: Channel, alpha: AlphaOrder,
             options: Optional[SolverOptions] = None) -> float:
    return maximal_alpha_leakage(prior, channel, alpha, options).nats


def check_quasiconvexity(w0: Channel, w1: Channel, prior: Distribution, alpha: AlphaOrder,
                         lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
                         options: Optional[SolverOptions] = None) -> TheoremVerdict:
    """L(λ·w0 + (1−λ)·w1) ≤ max(L(w0), L(w1))，逐个 λ 检查，lhs 取最大超出量"""
    if w0.rows.shape != w1.rows.shape:
        raise DimensionMismatch(f"channels have shapes {w0.rows.shape} and {w1.rows.shape}")
    l0 = _leakage(prior, w0, alpha, options)
    l1 = _leakage(prior, w1, alpha, options)
    ceiling = max(l0, l1)
    values = [_leakage(prior, mix_channels(w0, w1, lam), alpha, options) for lam in lambda_grid]
    excess = max(v - ceiling for v in values)
    return TheoremVerdict(
        theorem_id="quasiconvexity",
        lhs=float(excess),
        rhs=0.0,
        slack=DEFAULT_SLACK,
        witness=encode_witness("quasiconvexity", w0=w0, w1=w1, prior=prior, alpha=alpha,
                               lambda_grid=list(lambda_grid)),
        details={"alpha": str(alpha), "l0": l0, "l1": l1,
                 "lambdas": [float(v) for v in lambda_grid], "values": values},
    )


def check_dpi(w1: Channel, w2: Channel, prior: Distribution, alpha: AlphaOrder,
              options: Optional[SolverOptions] = None) -> Tuple[TheoremVerdict, TheoremVerdict]:
    """
    X − Y − Z 上的两条数据处理不等式：L(X→Z) ≤ L(X→Y) 与 L(X→Z) ≤ L(Y→Z)

    Y→Z 一侧以 P_Y（X 经 w1 后的边缘分布）为先验。
    """
    w_xz = cascade_channel(w1, w2)
    p_y = make_distribution(joint_from(prior, w1).marginal_y)
    l_xz = _leakage(prior, w_xz, alpha, options)
    l_xy = _leakage(prior, w1, alpha, options)
    l_yz = _leakage(p_y, w2, alpha, options)

    witness = encode_witness("dpi", w1=w1, w2=w2, prior=prior, alpha=alpha)
    details = {"alpha": str(alpha), "l_xz": l_xz, "l_xy": l_xy, "l_yz": l_yz}
    return (
        TheoremVerdict("dpi.xy", lhs=l_xz, rhs=l_xy, slack=DEFAULT_SLACK, witness=witness, details=dict(details)),
        TheoremVerdict("dpi.yz", lhs=l_xz, rhs=l_yz, slack=DEFAULT_SLACK, witness=witness, details=dict(details)),
    )


def check_composition(w1: Channel, w2: Channel, prior: Distribution, alpha: AlphaOrder,
                      options: Optional[SolverOptions] = None) -> TheoremVerdict:
    """同一 X 的两次独立发布：L(X→Y1,Y2) ≤ L(X→Y1) + L(X→Y2)"""
    if w1.in_size != w2.in_size:
        raise DimensionMismatch(f"releases have {w1.in_size} and {w2.in_size} inputs")
    joint_release = _leakage(prior, product_channel(w1, w2), alpha, options)
    parts = [_leakage(prior, w1, alpha, options), _leakage(prior, w2, alpha, options)]
    return TheoremVerdict(
        theorem_id="composition",
        lhs=joint_release,
        rhs=float(sum(parts)),
        slack=DEFAULT_SLACK,
        witness=encode_witness("composition", w1=w1, w2=w2, prior=prior, alpha=alpha),
        details={"alpha": str(alpha), "parts": parts},
    )


def _is_deterministic_reverse(channel: Channel, support: Sequence[int]) -> bool:
    # 支撑集上每一列至多一个非零元：X 是 Y 的确定性函数
    rows = channel.rows[list(support)]
    return bool(np.all((rows > 0).sum(axis=0) <= 1))


def check_bounds(channel: Channel, prior: Distribution, alpha: AlphaOrder,
                 options: Optional[SolverOptions] = None) -> List[TheoremVerdict]:
    """
    上下界检查：
    - 0 ≤ L
    - L ≤ log|supp(P_X)|（α > 1）或 L ≤ H(P_X)（α = 1）
    - L ≤ maxl
    - L ≥ 支撑集上均匀输入的 Sibson 互信息（α > 1）
    - L = 0 当且仅当信道在支撑集上秩为 1
    - X 是 Y 的确定性函数时上界取等
    """
    if alpha.is_finite and alpha.value < 1.0:
        raise AlphaOutOfRange(f"bounds are checked for alpha in [1, inf], got {alpha}")
    support = prior.support
    value = _leakage(prior, channel, alpha, options)
    witness = encode_witness("bounds", channel=channel, prior=prior, alpha=alpha)
    base = {"alpha": str(alpha), "leakage": value}

    upper = shannon_entropy(prior) if alpha.is_one else math.log(len(support))
    verdicts = [
        TheoremVerdict("bounds.nonneg", lhs=0.0, rhs=value, slack=DEFAULT_SLACK,
                       witness=witness, details=dict(base)),
        TheoremVerdict("bounds.upper", lhs=value, rhs=upper, slack=DEFAULT_SLACK, witness=witness,
                       details={**base, "log_input_size": math.log(channel.in_size)}),
        TheoremVerdict("bounds.maxl", lhs=value, rhs=maxl(channel, support), slack=DEFAULT_SLACK,
                       witness=witness, details=dict(base)),
    ]
    if not alpha.is_one:
        lower = uniform_sibson_lower_bound(restrict_rows(channel, support), alpha)
        verdicts.append(TheoremVerdict("bounds.uniform_sibson", lhs=lower, rhs=value, slack=DEFAULT_SLACK,
                                       witness=witness, details=dict(base)))

    if is_rank_one(channel, support):
        verdicts.append(TheoremVerdict("bounds.zero_iff", lhs=value, rhs=0.0, slack=ZERO_THRESHOLD,
                                       relation="eq", witness=witness, details={**base, "rank_one": True}))
    else:
        # 非秩 1 信道的泄露必须严格为正
        verdicts.append(TheoremVerdict("bounds.zero_iff", lhs=ZERO_THRESHOLD, rhs=value, slack=0.0,
                                       witness=witness, details={**base, "rank_one": False}))

    if _is_deterministic_reverse(channel, support):
        verdicts.append(TheoremVerdict("bounds.deterministic", lhs=value, rhs=upper, slack=DEFAULT_SLACK,
                                       relation="eq", witness=witness, details=dict(base)))
    return verdicts


def check_sibson_infimum(prior: Distribution, channel: Channel, alpha: AlphaOrder,
                         trials: int = 50, seed: int = 0) -> TheoremVerdict:
    """
    Sibson 互信息的变分刻画：对随机 Q_Y，D_α(P_XY‖P_X×Q_Y) ≥ I_α^S；
    且在倾斜输出分布处取等（side_tilted_equality）
    """
    if not alpha.is_finite:
        raise AlphaOutOfRange(f"the infimum check needs a finite alpha, got {alpha}")
    value = sibson_mi(prior, channel, alpha).nats
    tilted = sibson_optimal_output(prior, channel, alpha)
    at_tilt = joint_divergence_to_product(prior, channel, tilted, alpha).nats

    rng = np.random.default_rng(seed)
    candidates = [Distribution(joint_from(prior, channel).marginal_y)]
    candidates += [Distribution(rng.dirichlet(np.ones(channel.out_size))) for _ in range(trials)]
    divergences = [joint_divergence_to_product(prior, channel, q, alpha).nats for q in candidates]
    smallest = float(min(divergences))

    return TheoremVerdict(
        theorem_id="sibson_infimum",
        lhs=value,
        rhs=smallest,
        slack=EQUALITY_SLACK,
        witness=encode_witness("sibson_infimum", prior=prior, channel=channel, alpha=alpha,
                               trials=int(trials), seed=int(seed)),
        details={
            "alpha": str(alpha),
            "tilted_divergence": at_tilt,
            "marginal_divergence": divergences[0],
            "trials": int(trials),
            "side_tilted_equality": abs(at_tilt - value) <= TILT_EQUALITY_TOL,
        },
    )


def _copies_map(copies_per_x: Union[Mapping[int, int], Sequence[int]], in_size: int) -> Dict[int, int]:
    if isinstance(copies_per_x, Mapping):
        copies = {int(x): int(k) for x, k in copies_per_x.items()}
    else:
        copies = {x: int(k) for x, k in enumerate(copies_per_x)}
    for x, k in copies.items():
        if x < 0 or x >= in_size:
            raise DimensionMismatch(f"copies given for x={x}, outside the {in_size} inputs")
        if k < 1:
            raise InvalidCopies(f"x={x} needs at least one copy, got {k}")
    return copies


def shatter_construction(prior: Distribution, channel: Channel, target: Distribution,
                         copies_per_x: Union[Mapping[int, int], Sequence[int]],
                         alpha: AlphaOrder) -> Tuple[ShatterSpec, TheoremVerdict]:
    """
    构造 U（每个 x 拆成 k_x 个副本，H(X|U)=0），使 U 的 α-倾斜在 X 上诱导出 target，
    并检查 I_α^A(U;Y) 等于 I_α^S(target;Y)

    Args:
        prior: X 的先验，只用到它的支撑集
        channel: P_{Y|X}
        target: 希望诱导出的 X 上的分布，支撑必须在 prior 支撑内
        copies_per_x: x -> 副本数（未给出的 x 取 1）
        alpha: 阶数（1、有限 >1 或 ∞）

    Returns:
        (ShatterSpec, TheoremVerdict)
    """
    if alpha.is_finite and alpha.value < 1.0:
        raise AlphaOutOfRange(f"shattering is defined for alpha in [1, inf], got {alpha}")
    if not (prior.alphabet_size == target.alphabet_size == channel.in_size):
        raise DimensionMismatch(
            f"prior ({prior.alphabet_size}), target ({target.alphabet_size}) and channel "
            f"({channel.in_size}) disagree on the input size")
    outside = sorted(set(target.support) - set(prior.support))
    if outside:
        raise InfeasibleTarget(f"target puts mass on x={outside[0]}, outside the prior's support")
    copies = _copies_map(copies_per_x, channel.in_size)

    # U 的字母表：prior 支撑上每个 x 一块，块内 k_x 个元素
    blocks = [x for x in prior.support]
    u_to_x = tuple(x for x in blocks for _ in range(copies.get(x, 1)))
    k = np.array([copies.get(x, 1) for x in u_to_x], dtype=np.float64)
    t = target.probs[list(u_to_x)]

    weights = np.zeros(len(u_to_x))
    positive = t > 0
    if alpha.is_one:
        weights[positive] = t[positive] / k[positive]
    elif alpha.is_infinite:
        weights[positive] = 1.0
    else:
        # 块内均匀，单个元素权重 ∝ target(x)^{1/α}·k_x^{−1/α}
        a = alpha.value
        log_w = (np.log(t[positive]) - np.log(k[positive])) / a
        weights[positive] = np.exp(log_w - log_w.max())
    weights /= weights.sum()
    u_weights = Distribution(weights)
    lifted = Channel(channel.rows[list(u_to_x)])

    block_of = np.array(u_to_x)
    induced = np.zeros(channel.in_size)
    if alpha.is_infinite:
        # ∞ 阶的倾斜只保留支撑集，按副本数分配质量
        for u, x in enumerate(u_to_x):
            if weights[u] > 0:
                induced[x] += 1.0
    else:
        a = 1.0 if alpha.is_one else alpha.value
        for u, x in enumerate(u_to_x):
            if weights[u] > 0:
                induced[x] += math.exp(a * math.log(weights[u] / weights.max()))
    induced /= induced.sum()
    induced_x_tilde = Distribution(induced)

    if alpha.is_infinite:
        induced_ok = set(induced_x_tilde.support) == set(target.support)
    else:
        induced_ok = bool(np.max(np.abs(induced - target.probs)) <= EQUALITY_SLACK)

    # H(X|U)：U 确定 X 时联合熵等于 U 的熵
    joint_ux = np.zeros((len(u_to_x), channel.in_size))
    joint_ux[np.arange(len(u_to_x)), block_of] = weights
    cond_entropy = float(entr(joint_ux).sum() - entr(weights).sum())

    spec = ShatterSpec(
        copies_per_x={x: copies.get(x, 1) for x in blocks},
        u_weights=u_weights,
        induced_x_tilde=induced_x_tilde,
        u_to_x=u_to_x,
        lifted_channel=lifted,
    )
    verdict = TheoremVerdict(
        theorem_id="shatter",
        lhs=arimoto_mi(u_weights, lifted, alpha).nats,
        rhs=sibson_mi(target, channel, alpha).nats,
        slack=EQUALITY_SLACK,
        relation="eq",
        witness=encode_witness("shatter", prior=prior, channel=channel, target=target,
                               copies_per_x=copies, alpha=alpha),
        details={
            "alpha": str(alpha),
            "u_size": len(u_to_x),
            "cond_entropy_x_given_u": cond_entropy,
            "side_induced_matches_target": induced_ok,
            "side_x_determined_by_u": abs(cond_entropy) <= 1e-12,
        },
    )
    return spec, verdict


def check_shatter_capacity(prior: Distribution, channel: Channel,
                           copies_per_x: Union[Mapping[int, int], Sequence[int]],
                           alpha: AlphaOrder, options: Optional[SolverOptions] = None) -> TheoremVerdict:
    """
    以求解器给出的 argmax 输入为 target 做 shatter 构造，I_α^A(U;Y) 应等于最大 α-leakage

    lhs 为构造出的 Arimoto 互信息，rhs 为最大 α-leakage；shatter 自身的附加条件一并计入。
    """
    result = maximal_alpha_leakage(prior, channel, alpha, options)
    _, shattered = shatter_construction(prior, channel, result.argmax_input, copies_per_x, alpha)
    verdict = TheoremVerdict(
        theorem_id="shatter.capacity",
        lhs=shattered.lhs,
        rhs=result.nats,
        slack=DEFAULT_SLACK,
        relation="eq",
        witness=encode_witness("shatter_capacity", prior=prior, channel=channel,
                               copies_per_x=_copies_map(copies_per_x, channel.in_size), alpha=alpha),
        details={
            "alpha": str(alpha),
            "argmax_input": result.argmax_input.to_list(),
            "solver_converged": result.converged,
            "sibson_of_argmax": shattered.rhs,
        },
    )
    for name in ("induced_matches_target", "x_determined_by_u"):
        verdict.add_side(name, shattered.details[f"side_{name}"])
    verdict.add_side("sibson_matches_shatter", shattered.passed)
    return verdict


def check_monotonicity(channel: Channel, prior: Distribution,
                       alphas: Sequence[Union[str, float]] = DEFAULT_MONOTONE_ALPHAS,
                       options: Optional[SolverOptions] = None) -> TheoremVerdict:
    """α 递增时最大 α-leakage 单调不减；lhs 为相邻两点间的最大下降量"""
    orders = [AlphaOrder.of(a) for a in alphas]
    values = [_leakage(prior, channel, a, options) for a in orders]
    drops = [values[i] - values[i + 1] for i in range(len(values) - 1)]
    return TheoremVerdict(
        theorem_id="monotonicity",
        lhs=float(max(drops)) if drops else 0.0,
        rhs=0.0,
        slack=DEFAULT_SLACK,
        witness=encode_witness("monotonicity", channel=channel, prior=prior, alphas=[str(a) for a in orders]),
        details={"alphas": [str(a) for a in orders], "values": values},
    )


def check_alpha_one_gap(channel: Channel, prior: Distribution, eps: float = 1e-4,
                        options: Optional[SolverOptions] = None) -> TheoremVerdict:
    """α = 1 处的 I(X;Y) 不超过 α = 1+eps 时的支撑受限容量；差距记录在 details 中"""
    at_one = _leakage(prior, channel, AlphaOrder.of(1), options)
    near_one = maximal_alpha_leakage(prior, channel, AlphaOrder.of(1.0 + eps), options)
    return TheoremVerdict(
        theorem_id="alpha_one_gap",
        lhs=at_one,
        rhs=near_one.nats,
        slack=DEFAULT_SLACK,
        witness=encode_witness("alpha_one_gap", channel=channel, prior=prior, eps=float(eps)),
        details={"eps": float(eps), "gap": near_one.nats - at_one, "converged": near_one.converged},
    )


# witness 中的 check 名称 -> 检查函数
CHECKS = {
    "quasiconvexity": check_quasiconvexity,
    "dpi": check_dpi,
    "composition": check_composition,
    "bounds": check_bounds,
    "sibson_infimum": check_sibson_infimum,
    "shatter": shatter_construction,
    "shatter_capacity": check_shatter_capacity,
    "monotonicity": check_monotonicity,
    "alpha_one_gap": check_alpha_one_gap,
}
