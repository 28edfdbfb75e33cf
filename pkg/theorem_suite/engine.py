import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from leakage.errors import LeakageError
from models.check_node import CheckNode
from models.prob_model import AlphaOrder
from models.results import TheoremVerdict
from theorem_suite.instances import RandomInstance
from theorem_suite.witness_store import WitnessStore
from utils import gather_bounded


# 使用 DFS 迭代寻找 leaf_nodes
def find_leaf_nodes(node: CheckNode) -> List[CheckNode]:
    leaf_nodes = []
    stack = [node]
    while stack:
        current = stack.pop()
        if current.is_leaf():
            leaf_nodes.append(current)
        else:
            stack.extend(reversed(current.children))
    return leaf_nodes


# 后序遍历
def post_order_traversal(node: CheckNode) -> List[Tuple[CheckNode, int]]:
    """获取所有节点及其深度，深度大的在前（子节点先于父节点）"""
    nodes_with_depth = []
    stack = [(node, 0)]
    while stack:
        current, depth = stack.pop()
        nodes_with_depth.append((current, depth))
        for child in current.children:
            stack.append((child, depth + 1))
    nodes_with_depth.sort(key=lambda x: x[1], reverse=True)
    return nodes_with_depth


@dataclass
class SuiteReport:
    verdicts: List[TheoremVerdict] = field(default_factory=list)
    counts: Dict[str, Dict[str, int]] = field(default_factory=dict)    # node key -> {"passed", "failed"}
    witness_file: Optional[str] = None

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failed(self) -> List[TheoremVerdict]:
        return [v for v in self.verdicts if not v.passed]


def _error_verdict(leaf: CheckNode, instance: RandomInstance, alpha: Optional[AlphaOrder],
                   error: Exception) -> TheoremVerdict:
    # 检查本身抛错也算失败，实例原样保存便于排查
    return TheoremVerdict(
        theorem_id=leaf.key,
        lhs=math.inf,
        rhs=0.0,
        slack=0.0,
        witness={"check": leaf.key, "instance": instance.to_dict(), "alpha": str(alpha)},
        seed=instance.seed,
        details={"error": f"{type(error).__name__}: {error}"},
    )


def _run_task(task: Tuple[CheckNode, RandomInstance, Optional[AlphaOrder]]) -> List[TheoremVerdict]:
    leaf, instance, alpha = task
    try:
        verdicts = leaf.run(instance, alpha)
    except LeakageError as e:
        print(f"❌ {leaf.key} failed on seed {instance.seed} (alpha={alpha}): {e}", file=sys.stderr)
        return [_error_verdict(leaf, instance, alpha, e)]
    except Exception as e:
        # 非预期的异常同样记为失败，不中断其余任务
        print(f"❌ {leaf.key} crashed on seed {instance.seed} (alpha={alpha}): {type(e).__name__}: {e}",
              file=sys.stderr)
        return [_error_verdict(leaf, instance, alpha, e)]
    for verdict in verdicts:
        verdict.seed = instance.seed
        verdict.details.setdefault("node", leaf.key)
    return verdicts


def run_suite(root: CheckNode, instances: Sequence[RandomInstance],
              store: Optional[WitnessStore] = None, max_workers: Optional[int] = None) -> SuiteReport:
    """
    在所有实例上运行检查树的每个叶节点，自底向上汇总通过数

    Args:
        root: 检查树根节点
        instances: 随机实例
        store: 失败 witness 的持久化位置（None 则不保存）
        max_workers: 并发上限

    Returns:
        SuiteReport，verdicts 按 (叶节点, α, 实例) 的顺序排列
    """
    leaf_nodes = find_leaf_nodes(root)
    tasks = []
    owners = []
    for leaf in leaf_nodes:
        alphas = [AlphaOrder.of(a) for a in leaf.alphas] or [None]
        for alpha in alphas:
            for instance in instances:
                tasks.append((leaf, instance, alpha))
                owners.append(leaf.key)

    results = gather_bounded(_run_task, tasks, max_workers)

    report = SuiteReport()
    for (node, _) in post_order_traversal(root):
        report.counts[node.key] = {"passed": 0, "failed": 0}
    for key, verdicts in zip(owners, results):
        for verdict in verdicts:
            report.verdicts.append(verdict)
            report.counts[key]["passed" if verdict.passed else "failed"] += 1

    # 从下往上汇总非叶节点
    for node, _ in post_order_traversal(root):
        if not node.is_leaf():
            report.counts[node.key] = {
                "passed": sum(report.counts[child.key]["passed"] for child in node.children),
                "failed": sum(report.counts[child.key]["failed"] for child in node.children),
            }

    if store is not None and report.failed:
        report.witness_file = store.save(report.failed)
    return report


def save_tree_structure(root: CheckNode, output_path: str = "outputs/check_tree.json"):
    """将检查树结构保存为 JSON 文件"""
    output_dir = os.path.dirname(output_path)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(root.to_dict(), f, ensure_ascii=False, indent=2)
