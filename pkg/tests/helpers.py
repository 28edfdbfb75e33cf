import math

import numpy as np

from leakage.prob_core import make_channel, make_distribution

# 二元对称信道 BSC(0.1) 的常用取值（nats）
SIBSON_BSC_ALPHA2 = 2.0 * math.log(2.0 * math.sqrt(0.41))      # ≈ 0.494696
MI_BSC = math.log(2.0) + 0.1 * math.log(0.1) + 0.9 * math.log(0.9)  # ≈ 0.368064
MAXL_BSC = math.log(1.8)                                           # ≈ 0.587787


def random_channel(rng, n_in, n_out):
    return make_channel(rng.dirichlet(np.ones(n_out), size=n_in))


def random_distribution(rng, n):
    return make_distribution(rng.dirichlet(np.ones(n)))
