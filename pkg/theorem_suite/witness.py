"""
检查输入的序列化与重放

每条 TheoremVerdict 的 witness 形如 {"check": 名称, "args": {参数名: 编码值}}，
浮点数按 repr 写出，JSON 往返后逐位相同，所以重放得到的 lhs/rhs 与原结果完全一致。
"""

from typing import Any, Dict, List, Mapping

from leakage.errors import LeakageError
from models.prob_model import AlphaOrder, Channel, Distribution
from models.results import ShatterSpec, TheoremVerdict


def encode_value(value: Any) -> Any:
    if isinstance(value, Channel):
        return {"type": "channel", "rows": value.to_dict()["rows"]}
    if isinstance(value, Distribution):
        return {"type": "distribution", "probs": value.to_list()}
    if isinstance(value, AlphaOrder):
        return {"type": "alpha", "value": str(value)}
    if isinstance(value, Mapping):
        # JSON 的键只能是字符串，整数键的映射按 [k, v] 列表保存
        return {"type": "int_map", "items": [[int(k), int(v)] for k, v in sorted(value.items())]}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    return float(value)


def decode_value(raw: Any) -> Any:
    if isinstance(raw, dict):
        kind = raw.get("type")
        if kind == "channel":
            return Channel(raw["rows"])
        if kind == "distribution":
            return Distribution(raw["probs"])
        if kind == "alpha":
            return AlphaOrder.of(raw["value"])
        if kind == "int_map":
            return {int(k): int(v) for k, v in raw["items"]}
        raise LeakageError(f"unknown witness value type: {kind!r}")
    if isinstance(raw, list):
        return [decode_value(v) for v in raw]
    return raw


def encode_witness(check: str, **kwargs) -> Dict[str, Any]:
    return {"check": check, "args": {name: encode_value(v) for name, v in kwargs.items()}}


def decode_witness(witness: Dict[str, Any]):
    return witness["check"], {name: decode_value(v) for name, v in witness["args"].items()}


def _as_list(outcome) -> List[TheoremVerdict]:
    if isinstance(outcome, TheoremVerdict):
        return [outcome]
    if isinstance(outcome, tuple) and outcome and isinstance(outcome[0], ShatterSpec):
        # shatter_construction 返回 (ShatterSpec, verdict)
        return [outcome[1]]
    return list(outcome)


def replay_witness(record: Dict[str, Any]) -> TheoremVerdict:
    """
    用记录中的 witness 重新运行对应检查

    Args:
        record: TheoremVerdict.to_dict() 的结果（或从 JSON lines 读回的字典）

    Returns:
        theorem_id 与记录相同的新 verdict
    """
    from theorem_suite.checks import CHECKS

    check, kwargs = decode_witness(record["witness"])
    if check not in CHECKS:
        raise LeakageError(f"unknown check in witness: {check!r}")
    verdicts = _as_list(CHECKS[check](**kwargs))
    for verdict in verdicts:
        if verdict.theorem_id == record["theorem_id"]:
            verdict.seed = record.get("seed")
            return verdict
    raise LeakageError(f"replaying {check!r} did not produce a verdict for {record['theorem_id']!r}")
