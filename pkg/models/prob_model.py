import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple, Union

import numpy as np

from leakage.errors import AlphaOutOfRange, ProbabilityError


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ProbabilityError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class AlphaTag(Enum):
    ONE = "one"
    INFINITY = "inf"
    FINITE = "finite"


@dataclass(frozen=True)
class AlphaOrder:
    """α 阶数；1 和 ∞ 用精确标签表示，Finite 的值永远不等于 1"""
    tag: AlphaTag
    value: float = 1.0

    def __post_init__(self):
        if self.tag is AlphaTag.FINITE:
            v = float(self.value)
            if math.isnan(v) or v <= 0 or math.isinf(v) or v == 1.0:
                raise AlphaOutOfRange(f"finite alpha must lie in (0,1)∪(1,∞), got {self.value!r}")
        elif self.tag is AlphaTag.ONE:
            object.__setattr__(self, "value", 1.0)
        else:
            object.__setattr__(self, "value", math.inf)

    @classmethod
    def of(cls, raw: Union[float, int, str, "AlphaOrder"]) -> "AlphaOrder":
        """从实数或字符串构造：1 → One，inf → Infinity"""
        if isinstance(raw, AlphaOrder):
            return raw
        if isinstance(raw, str):
            text = raw.strip().lower()
            if text in ("inf", "+inf", "infinity", "∞"):
                return cls(AlphaTag.INFINITY)
            try:
                raw = float(text)
            except ValueError:
                raise AlphaOutOfRange(f"cannot parse alpha {raw!r}")
        value = float(raw)
        if math.isnan(value) or value <= 0:
            raise AlphaOutOfRange(f"alpha must be positive, got {raw!r}")
        if value == 1.0:
            return cls(AlphaTag.ONE)
        if math.isinf(value):
            return cls(AlphaTag.INFINITY)
        return cls(AlphaTag.FINITE, value)

    @property
    def is_one(self) -> bool:
        return self.tag is AlphaTag.ONE

    @property
    def is_infinite(self) -> bool:
        return self.tag is AlphaTag.INFINITY

    @property
    def is_finite(self) -> bool:
        return self.tag is AlphaTag.FINITE

    def __str__(self) -> str:
        if self.is_one:
            return "1"
        if self.is_infinite:
            return "inf"
        return repr(self.value)


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: np.ndarray
    support: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        arr = _frozen_array(self.probs, 1)
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "support", tuple(int(i) for i in np.flatnonzero(arr > 0)))

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.shape[0])

    def __getitem__(self, index: int) -> float:
        return float(self.probs[index])

    def to_list(self) -> List[float]:
        return [float(v) for v in self.probs]


@dataclass(frozen=True, eq=False)
class Channel:
    """行随机矩阵 W(y|x)，第 x 行是给定 X=x 时 Y 的分布"""
    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen_array(self.rows, 2))

    @property
    def in_size(self) -> int:
        return int(self.rows.shape[0])

    @property
    def out_size(self) -> int:
        return int(self.rows.shape[1])

    def to_dict(self) -> Dict:
        return {"rows": [[float(v) for v in row] for row in self.rows]}


@dataclass(frozen=True, eq=False)
class Joint:
    mass: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mass", _frozen_array(self.mass, 2))

    @property
    def marginal_x(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    @property
    def marginal_y(self) -> np.ndarray:
        return self.mass.sum(axis=0)

    @property
    def active_columns(self) -> Tuple[int, ...]:
        # 边缘概率为 0 的列后验无定义，所有求和都跳过它们
        return tuple(int(y) for y in np.flatnonzero(self.marginal_y > 0))

    def posterior(self, y: int) -> np.ndarray:
        column = self.mass[:, y]
        total = column.sum()
        if total <= 0:
            raise ProbabilityError(f"posterior undefined: column {y} has zero mass")
        return column / total
