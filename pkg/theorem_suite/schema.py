"""
性质检查树

叶节点在一个 RandomInstance 和一个 α 上运行，返回若干条 TheoremVerdict；
alphas 为空的叶节点与 α 无关，每个实例只运行一次。
"""

from typing import List, Optional

from models.check_node import CheckNode
from models.prob_model import AlphaOrder
from models.results import TheoremVerdict
from theorem_suite.checks import (
    check_alpha_one_gap,
    check_bounds,
    check_composition,
    check_dpi,
    check_monotonicity,
    check_quasiconvexity,
    check_shatter_capacity,
    check_sibson_infimum,
    shatter_construction,
)
from theorem_suite.instances import RandomInstance

LEAKAGE_ALPHAS = ["1", "1.5", "2", "inf"]
FINITE_ALPHAS = ["1.5", "2"]


# 1. Quasi-convexity - 信道上的拟凸性
def quasiconvexity_run(instance: RandomInstance, alpha: AlphaOrder) -> List[TheoremVerdict]:
    return [check_quasiconvexity(instance.channel, instance.partner, instance.prior, alpha)]

quasiconvexity_node = CheckNode(
    key="quasiconvexity",
    name="Quasi-convexity",
    description="Maximal leakage of a mixture of two channels never exceeds the larger of the two.",
    alphas=LEAKAGE_ALPHAS,
    run=quasiconvexity_run,
)


# 2. Data processing - 后处理不增加泄露
def dpi_run(instance: RandomInstance, alpha: AlphaOrder) -> List[TheoremVerdict]:
    return list(check_dpi(instance.channel, instance.post, instance.prior, alpha))

dpi_node = CheckNode(
    key="dpi",
    name="Data processing",
    description="L(X→Z) ≤ L(X→Y) and L(X→Z) ≤ L(Y→Z) on a Markov chain X − Y − Z.",
    alphas=LEAKAGE_ALPHAS,
    run=dpi_run,
)


# 3. Composition - 多次发布的预算
def composition_run(instance: RandomInstance, alpha: AlphaOrder) -> List[TheoremVerdict]:
    return [check_composition(instance.channel, instance.partner, instance.prior, alpha)]

composition_node = CheckNode(
    key="composition",
    name="Composition",
    description="Leakage of two independent releases is at most the sum of their leakages.",
    alphas=LEAKAGE_ALPHAS,
    run=composition_run,
)

channel_properties_node = CheckNode(
    key="channel_properties",
    name="Channel properties",
    children=[quasiconvexity_node, dpi_node, composition_node],
)


# 4. Bounds - 上下界
def bounds_run(instance: RandomInstance, alpha: AlphaOrder) -> List[TheoremVerdict]:
    return check_bounds(instance.channel, instance.prior, alpha)

bounds_node = CheckNode(
    key="bounds",
    name="Bounds",
    description="Non-negativity, log-support and maxl upper bounds, uniform-input lower bound, zero iff rank one.",
    alphas=LEAKAGE_ALPHAS,
    run=bounds_run,
)


# 5. Monotonicity / α=1 gap - 关于 α 的性质
def monotonicity_run(instance: RandomInstance, alpha: Optional[AlphaOrder]) -> List[TheoremVerdict]:
    return [check_monotonicity(instance.channel, instance.prior)]

monotonicity_node = CheckNode(
    key="monotonicity",
    name="Monotonicity in alpha",
    description="Maximal leakage is non-decreasing over 1, 1.2, 2, 5, 20, inf.",
    run=monotonicity_run,
)


def alpha_one_gap_run(instance: RandomInstance, alpha: Optional[AlphaOrder]) -> List[TheoremVerdict]:
    return [check_alpha_one_gap(instance.channel, instance.prior)]

alpha_one_gap_node = CheckNode(
    key="alpha_one_gap",
    name="Gap at alpha = 1",
    description="I(X;Y) does not exceed the support-constrained capacity just above alpha = 1.",
    run=alpha_one_gap_run,
)

order_properties_node = CheckNode(
    key="order_properties",
    name="Order properties",
    children=[monotonicity_node, alpha_one_gap_node],
)


# 6. Variational characterizations - Sibson 下确界与 shatter 构造
def sibson_infimum_run(instance: RandomInstance, alpha: AlphaOrder) -> List[TheoremVerdict]:
    return [check_sibson_infimum(instance.prior, instance.channel, alpha, trials=50, seed=instance.seed)]

sibson_infimum_node = CheckNode(
    key="sibson_infimum",
    name="Sibson infimum",
    description="Random output distributions never beat the closed form; the tilted output attains it.",
    alphas=FINITE_ALPHAS,
    run=sibson_infimum_run,
)


def shatter_random_run(instance: RandomInstance, alpha: AlphaOrder) -> List[TheoremVerdict]:
    _, verdict = shatter_construction(instance.prior, instance.channel, instance.target, instance.copies, alpha)
    return [verdict]

shatter_random_node = CheckNode(
    key="shatter.random_target",
    name="Shattering (random target)",
    description="A randomized function U of X realizes the Sibson MI of a random target.",
    alphas=LEAKAGE_ALPHAS,
    run=shatter_random_run,
)


def shatter_capacity_run(instance: RandomInstance, alpha: AlphaOrder) -> List[TheoremVerdict]:
    return [check_shatter_capacity(instance.prior, instance.channel, instance.copies, alpha)]

shatter_capacity_node = CheckNode(
    key="shatter.capacity_target",
    name="Shattering (capacity-achieving target)",
    description="Shattering the solver's argmax input reaches the maximal leakage itself.",
    alphas=FINITE_ALPHAS + ["inf"],
    run=shatter_capacity_run,
)

shatter_node = CheckNode(
    key="shatter",
    name="Shattering",
    children=[shatter_random_node, shatter_capacity_node],
)

variational_node = CheckNode(
    key="variational",
    name="Variational characterizations",
    children=[sibson_infimum_node, shatter_node],
)


check_tree = CheckNode(
    key="root",
    name="Maximal alpha-leakage properties",
    description="All property checks over seeded random instances.",
    children=[channel_properties_node, bounds_node, order_properties_node, variational_node],
)
