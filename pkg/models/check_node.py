from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from models.results import TheoremVerdict


# 叶节点的 run 接收一个随机实例，返回若干条 TheoremVerdict
@dataclass
class CheckNode:
    key: str                 # 唯一标识，比如 "bounds.maxl"
    name: str                # 展示名
    description: str = ""
    children: List['CheckNode'] = field(default_factory=list)
    run: Optional[Callable[..., List[TheoremVerdict]]] = None
    alphas: List[str] = field(default_factory=list)    # 该检查适用的 α（字符串形式，"1" / "inf" / "2"）

    def is_leaf(self) -> bool:
        return not self.children

    def to_dict(self) -> Dict:
        """递归转换为字典，跳过 run 函数"""
        return {
            "key": self.key,
            "name": self.name,
            "description": self.description,
            "is_leaf": self.is_leaf(),
            "alphas": list(self.alphas),
            "children": [child.to_dict() for child in self.children],
        }
