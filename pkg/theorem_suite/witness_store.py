#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
失败 witness 管理器
- 把失败的 verdict（含完整输入）追加保存为 JSON lines
- 读回已保存的记录
- 逐条重放，确认问题是否仍然存在
"""

import json
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from leakage.errors import LeakageError
from models.results import TheoremVerdict
from theorem_suite.witness import replay_witness
from utils import OUTPUT_DIR


class WitnessStore:
    """失败 witness 管理器"""

    def __init__(self, base_dir: Optional[str] = None):
        """
        初始化管理器

        Args:
            base_dir: 输出目录，默认取 LEAKAGE_OUTPUT_DIR
        """
        self.base_dir = Path(base_dir or OUTPUT_DIR)
        self.base_dir.mkdir(parents=True, exist_ok=True)

        # 失败 witness 文件路径
        self.witness_file = self.base_dir / "failed_witnesses.jsonl"

    def save(self, verdicts: Iterable[TheoremVerdict]) -> str:
        """
        追加保存失败的 verdict

        Returns:
            witness 文件路径
        """
        count = 0
        with open(self.witness_file, "a", encoding="utf-8", newline="\n") as f:
            for verdict in verdicts:
                f.write(verdict.to_json_line() + "\n")
                count += 1
        print(f"⚠️  已保存 {count} 条失败 witness 到: {self.witness_file}", file=sys.stderr)
        return str(self.witness_file)

    def load(self) -> List[Dict]:
        """
        读取全部已保存的记录，无法解析的行跳过

        Returns:
            TheoremVerdict.to_dict() 格式的字典列表
        """
        if not self.witness_file.exists():
            return []
        records = []
        with open(self.witness_file, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as e:
                    print(f"❌ 第 {line_no} 行无法解析，已跳过: {e}", file=sys.stderr)
        return records

    def replay_all(self) -> List[Tuple[Dict, Optional[TheoremVerdict], bool]]:
        """
        重放全部记录

        Returns:
            [(原记录, 重放得到的 verdict 或 None, lhs/rhs 是否与原记录逐位相同)]
        """
        outcomes = []
        for record in self.load():
            try:
                verdict = replay_witness(record)
            except (LeakageError, KeyError) as e:
                print(f"❌ 无法重放 {record.get('theorem_id')} (seed={record.get('seed')}): {e}", file=sys.stderr)
                outcomes.append((record, None, False))
                continue
            identical = verdict.lhs == record["lhs"] and verdict.rhs == record["rhs"]
            outcomes.append((record, verdict, identical))
        return outcomes

    def clear(self):
        if self.witness_file.exists():
            self.witness_file.unlink()
