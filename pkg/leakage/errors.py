"""
泄露度量库的异常定义

所有异常都继承自 ValueError，调用方可以统一捕获 LeakageError。
"""

from typing import Optional


class LeakageError(ValueError):
    """库内所有校验/计算错误的基类"""


class ProbabilityError(LeakageError):
    """概率向量不合法（空、负数、未归一化）"""


class EmptyDistribution(ProbabilityError):
    pass


class NegativeEntry(ProbabilityError):
    pass


class NotNormalized(ProbabilityError):
    pass


class DimensionMismatch(LeakageError):
    pass


class UncoveredX(LeakageError):
    """确定性反向信道中某个 x 没有原像（或原像概率全为 0）"""


class AlphaOutOfRange(LeakageError):
    pass


class EmptySupport(LeakageError):
    pass


class SupportTooLarge(LeakageError):
    pass


class InfeasibleTarget(LeakageError):
    pass


class InvalidCopies(LeakageError):
    pass


class ChannelParseError(LeakageError):
    """输入文件解析失败，记录出错的行/列（从 1 开始计数）"""

    def __init__(self, message: str, path: Optional[str] = None,
                 row: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.row = row
        self.column = column
        location = []
        if path:
            location.append(str(path))
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
