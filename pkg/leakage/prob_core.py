"""
有限字母表上的分布、信道、联合分布的构造与校验

- 输入容差 1e-9，不做静默重归一化（不合法直接报错）
- 小于 1e-15 的项截断为精确 0，保证支撑集精确
"""

from typing import Mapping, Sequence, Tuple, Union

import numpy as np

from leakage.errors import (
    DimensionMismatch,
    EmptyDistribution,
    NegativeEntry,
    NotNormalized,
    UncoveredX,
)
from models.prob_model import Channel, Distribution, Joint

# ==================== 配置 ====================
NORMALIZATION_TOL = 1e-9
ZERO_CLAMP = 1e-15
RANK_ONE_TOL = 1e-12
# ==============================================


def _validated_vector(raw, where: str = "") -> np.ndarray:
    arr = np.asarray(raw, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise EmptyDistribution(f"{where}empty probability vector")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NotNormalized(f"{where}entry {int(bad[0])} is not a finite number")
    negative = np.flatnonzero(arr < 0)
    if negative.size:
        i = int(negative[0])
        raise NegativeEntry(f"{where}entry {i} is negative ({arr[i]!r})")
    arr = np.where(arr < ZERO_CLAMP, 0.0, arr)
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"{where}entries sum to {total!r}, expected 1")
    return arr


def make_distribution(raw: Sequence[float]) -> Distribution:
    return Distribution(_validated_vector(raw))


def make_channel(rows: Sequence[Sequence[float]]) -> Channel:
    """逐行校验后构造信道，出错时指明是第几行（从 0 开始）"""
    matrix = [list(np.asarray(row, dtype=np.float64).reshape(-1)) for row in rows]
    if not matrix:
        raise EmptyDistribution("channel has no rows")
    width = len(matrix[0])
    validated = []
    for x, row in enumerate(matrix):
        if len(row) != width:
            raise DimensionMismatch(f"row {x} has {len(row)} entries, expected {width}")
        validated.append(_validated_vector(row, where=f"row {x}: "))
    return Channel(np.vstack(validated))


def make_joint(mass: Sequence[Sequence[float]]) -> Joint:
    arr = np.asarray(mass, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"joint mass must be a matrix, got shape {arr.shape}")
    flat = _validated_vector(arr.reshape(-1), where="joint: ")
    return Joint(flat.reshape(arr.shape))


# ---------- 常用构造 ----------

def uniform(n: int) -> Distribution:
    return Distribution(np.full(n, 1.0 / n))


def point_mass(n: int, index: int) -> Distribution:
    probs = np.zeros(n)
    probs[index] = 1.0
    return Distribution(probs)


def identity_channel(n: int) -> Channel:
    return Channel(np.eye(n))


def bsc(crossover: float) -> Channel:
    """二元对称信道 BSC(p)"""
    p = float(crossover)
    return make_channel([[1.0 - p, p], [p, 1.0 - p]])


def rank_one_channel(q: Union[Distribution, Sequence[float]], in_size: int) -> Channel:
    row = q.probs if isinstance(q, Distribution) else make_distribution(q).probs
    return Channel(np.tile(row, (in_size, 1)))


def restrict_rows(channel: Channel, support: Sequence[int]) -> Channel:
    return Channel(channel.rows[list(support), :])


def is_rank_one(channel: Channel, support: Sequence[int] = None) -> bool:
    """支撑集上所有行相同（输出与输入独立）"""
    rows = channel.rows if support is None else channel.rows[list(support), :]
    return bool(np.all(np.abs(rows - rows[0]) <= RANK_ONE_TOL))


# ---------- 组合操作 ----------

def joint_from(prior: Distribution, channel: Channel) -> Joint:
    if prior.alphabet_size != channel.in_size:
        raise DimensionMismatch(
            f"prior has {prior.alphabet_size} symbols but channel has {channel.in_size} inputs")
    return Joint(prior.probs[:, None] * channel.rows)


def conditional_channel(joint: Joint) -> Tuple[Distribution, Channel]:
    """从联合分布拆出 (P_X, P_{Y|X})；P_X=0 的行填入 Y 边缘分布（任意合法行均可）"""
    p_x = joint.marginal_x
    rows = np.tile(joint.marginal_y, (joint.mass.shape[0], 1))
    positive = p_x > 0
    rows[positive] = joint.mass[positive] / p_x[positive, None]
    return Distribution(p_x), Channel(rows)


def product_channel(w1: Channel, w2: Channel) -> Channel:
    """同一输入的两次独立发布：(y1,y2|x) = w1(y1|x)·w2(y2|x)，输出按 y1 主序展开"""
    if w1.in_size != w2.in_size:
        raise DimensionMismatch(f"product needs equal input sizes, got {w1.in_size} and {w2.in_size}")
    rows = np.einsum("xi,xj->xij", w1.rows, w2.rows).reshape(w1.in_size, w1.out_size * w2.out_size)
    return make_channel(rows)


def cascade_channel(w1: Channel, w2: Channel) -> Channel:
    """马尔可夫链 X - Y - Z 的级联信道 P_{Z|X} = P_{Y|X} · P_{Z|Y}"""
    if w1.out_size != w2.in_size:
        raise DimensionMismatch(f"cascade needs w1.out_size == w2.in_size, got {w1.out_size} and {w2.in_size}")
    return make_channel(w1.rows @ w2.rows)


def mix_channels(w0: Channel, w1: Channel, lam: float) -> Channel:
    if w0.rows.shape != w1.rows.shape:
        raise DimensionMismatch(f"cannot mix channels of shapes {w0.rows.shape} and {w1.rows.shape}")
    return make_channel(lam * w0.rows + (1.0 - lam) * w1.rows)


def reverse_deterministic_channel(assignment: Union[Sequence[int], Mapping[int, int]],
                                  out_dist: Distribution,
                                  in_size: int = None) -> Tuple[Channel, Distribution]:
    """
    X 是 Y 的确定性函数时的信道 P_{X⇐Y}（每列只有一个非零元）

    Args:
        assignment: y -> x 的映射，必须对所有 y 有定义
        out_dist: Y 的分布
        in_size: |X|，默认取 max(assignment)+1

    Returns:
        (channel, P_X)，channel 第 x 行为 out_dist 在 x 原像上的条件分布
    """
    n_out = out_dist.alphabet_size
    if isinstance(assignment, Mapping):
        missing = [y for y in range(n_out) if y not in assignment]
        if missing:
            raise DimensionMismatch(f"assignment is undefined for y={missing[0]}")
        targets = np.array([int(assignment[y]) for y in range(n_out)])
    else:
        targets = np.asarray(assignment, dtype=int)
        if targets.shape != (n_out,):
            raise DimensionMismatch(f"assignment has {targets.size} entries, out_dist has {n_out}")
    if np.any(targets < 0):
        raise DimensionMismatch("assignment maps to a negative input index")
    n_in = int(targets.max()) + 1 if in_size is None else int(in_size)
    if np.any(targets >= n_in):
        raise DimensionMismatch(f"assignment maps outside an input alphabet of size {n_in}")

    p_x = np.zeros(n_in)
    np.add.at(p_x, targets, out_dist.probs)
    uncovered = np.flatnonzero(p_x <= 0)
    if uncovered.size:
        raise UncoveredX(f"x={int(uncovered[0])} has no preimage with positive probability")

    rows = np.zeros((n_in, n_out))
    rows[targets, np.arange(n_out)] = out_dist.probs / p_x[targets]
    return make_channel(rows), make_distribution(p_x)
