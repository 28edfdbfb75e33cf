"""
带种子的随机实例

信道每一行独立取自 Dirichlet(1)（单纯形上的均匀分布），先验同样如此；
第 i 个实例的种子为 seed·10000 + i，记录在实例中便于重放。
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from leakage.prob_core import make_channel, make_distribution
from models.prob_model import Channel, Distribution

# ==================== 配置 ====================
MIN_ALPHABET = 2
MAX_INPUTS = 3
MAX_OUTPUTS = 4
SEED_STRIDE = 10000
# ==============================================


@dataclass
class RandomInstance:
    seed: int
    prior: Distribution
    channel: Channel
    partner: Channel      # 与 channel 同形状，用于拟凸性和组合
    post: Channel         # Y → Z 的后处理信道，用于数据处理不等式
    target: Distribution  # shatter 构造的目标分布
    copies: List[int]     # shatter 构造每个 x 的副本数

    def to_dict(self):
        return {
            "seed": self.seed,
            "prior": self.prior.to_list(),
            "channel": self.channel.to_dict()["rows"],
            "partner": self.partner.to_dict()["rows"],
            "post": self.post.to_dict()["rows"],
            "target": self.target.to_list(),
            "copies": list(self.copies),
        }


def random_channel(rng: np.random.Generator, in_size: int, out_size: int) -> Channel:
    return make_channel(rng.dirichlet(np.ones(out_size), size=in_size))


def random_distribution(rng: np.random.Generator, size: int) -> Distribution:
    return make_distribution(rng.dirichlet(np.ones(size)))


def generate_instance(seed: int, max_inputs: int = MAX_INPUTS, max_outputs: int = MAX_OUTPUTS) -> RandomInstance:
    rng = np.random.default_rng(seed)
    n_in = int(rng.integers(MIN_ALPHABET, max_inputs + 1))
    n_out = int(rng.integers(MIN_ALPHABET, max_outputs + 1))
    n_post = int(rng.integers(MIN_ALPHABET, max_outputs + 1))
    return RandomInstance(
        seed=seed,
        prior=random_distribution(rng, n_in),
        channel=random_channel(rng, n_in, n_out),
        partner=random_channel(rng, n_in, n_out),
        post=random_channel(rng, n_out, n_post),
        target=random_distribution(rng, n_in),
        copies=[int(k) for k in rng.integers(1, 4, size=n_in)],
    )


def random_instances(count: int, seed: int = 0, max_inputs: int = MAX_INPUTS,
                     max_outputs: int = MAX_OUTPUTS) -> List[RandomInstance]:
    return [generate_instance(seed * SEED_STRIDE + i, max_inputs, max_outputs) for i in range(count)]
