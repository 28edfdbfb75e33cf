import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from models.prob_model import AlphaOrder, Channel, Distribution

LN2 = math.log(2.0)


def nats_to_bits(nats: float) -> float:
    return nats / LN2


@dataclass(frozen=True)
class MeasureValue:
    nats: float
    alpha: AlphaOrder

    @property
    def bits(self) -> float:
        return nats_to_bits(self.nats)

    def __float__(self) -> float:
        return float(self.nats)


class EstimatorKind(Enum):
    PRIOR = "prior"
    POSTERIOR_COLUMN = "posterior_column"


@dataclass(frozen=True)
class Estimator:
    kind: EstimatorKind
    dist: Distribution
    alpha: AlphaOrder
    column: Optional[int] = None    # 仅 POSTERIOR_COLUMN 使用


class LeakageMethod(Enum):
    ARIMOTO_IDENTITY = "arimoto_identity"
    OPERATIONAL_RATIO = "operational_ratio"


@dataclass
class LeakageReport:
    nats: float
    alpha: AlphaOrder
    method: LeakageMethod
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def bits(self) -> float:
        return nats_to_bits(self.nats)

    def to_dict(self) -> Dict:
        return {
            "nats": self.nats,
            "alpha": str(self.alpha),
            "method": self.method.value,
            "diagnostics": dict(self.diagnostics),
        }


@dataclass
class CapacityResult:
    nats: float
    argmax_input: Distribution      # 支撑集之外的分量恒为 0
    alpha: AlphaOrder
    iterations: int = 0
    kkt_residual: float = 0.0
    converged: bool = True
    support: Tuple[int, ...] = ()
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def bits(self) -> float:
        return nats_to_bits(self.nats)

    def flat_diagnostics(self) -> Dict[str, float]:
        """导出为扁平的 key -> number，供 CLI 渲染"""
        flat = {
            "nats": self.nats,
            "iterations": float(self.iterations),
            "kkt_residual": self.kkt_residual,
            "converged": 1.0 if self.converged else 0.0,
        }
        flat.update(self.diagnostics)
        return flat


@dataclass
class TheoremVerdict:
    """
    单条性质检查的结果

    relation 为 "le" 时 passed ⇔ lhs ≤ rhs + slack；为 "eq" 时 passed ⇔ |lhs − rhs| ≤ slack。
    details 中以 side_ 开头的布尔项是组合检查的附加条件，也计入 passed。
    """
    theorem_id: str
    lhs: float
    rhs: float
    slack: float
    relation: str = "le"
    witness: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    details: Dict[str, Any] = field(default_factory=dict)
    instance_digest: str = field(init=False, default="")
    passed: bool = field(init=False, default=False)

    def __post_init__(self):
        canonical = json.dumps(self.witness, sort_keys=True, separators=(",", ":"))
        self.instance_digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
        self._evaluate()

    def add_side(self, name: str, holds: bool):
        """追加一个附加条件并重新判定"""
        self.details[f"side_{name}"] = bool(holds)
        self._evaluate()

    def _evaluate(self):
        if self.relation == "eq":
            holds = abs(self.lhs - self.rhs) <= self.slack
        else:
            holds = self.lhs <= self.rhs + self.slack
        side_ok = all(bool(v) for k, v in self.details.items() if k.startswith("side_"))
        self.passed = bool(holds and side_ok)

    def to_dict(self) -> Dict:
        return {
            "theorem_id": self.theorem_id,
            "seed": self.seed,
            "passed": self.passed,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "relation": self.relation,
            "instance_digest": self.instance_digest,
            "details": self.details,
            "witness": self.witness,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)


@dataclass
class ShatterSpec:
    copies_per_x: Dict[int, int]
    u_weights: Distribution
    induced_x_tilde: Distribution
    u_to_x: Tuple[int, ...]
    lifted_channel: Channel
