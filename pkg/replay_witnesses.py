#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
失败 witness 重放脚本

读取 outputs/failed_witnesses.jsonl（或 LEAKAGE_OUTPUT_DIR 下的同名文件），逐条重新运行对应检查，
报告问题是否仍然存在，以及重放结果是否与记录逐位一致

使用方法:
    python replay_witnesses.py [输出目录]
"""

import sys

from theorem_suite.witness_store import WitnessStore
from utils import configure_logging


def main(argv=None):
    """主函数"""
    argv = sys.argv[1:] if argv is None else argv
    configure_logging()
    print("=" * 60)
    print("失败 witness 重放工具")
    print("=" * 60)
    print()

    store = WitnessStore(argv[0] if argv else None)

    print("[步骤 1/2] 加载失败记录...")
    print("-" * 60)
    records = store.load()
    if not records:
        print("✅ 没有找到失败记录")
        print(f"   witness 文件路径: {store.witness_file}")
        return 0
    print(f"   共找到 {len(records)} 条记录")
    print()

    print("[步骤 2/2] 重放...")
    print("-" * 60)
    still_failing = 0
    mismatched = 0
    for record, verdict, identical in store.replay_all():
        label = f"{record.get('theorem_id')} (seed={record.get('seed')}, digest={record.get('instance_digest')})"
        if verdict is None:
            still_failing += 1
            continue
        if not identical:
            mismatched += 1
            print(f"⚠️  {label}: 重放结果与记录不一致 lhs={verdict.lhs!r} rhs={verdict.rhs!r}")
        if verdict.passed:
            print(f"✅ {label}: 现在通过")
        else:
            still_failing += 1
            print(f"❌ {label}: 仍然失败 lhs={verdict.lhs!r} rhs={verdict.rhs!r} slack={verdict.slack!r}")

    print()
    print("=" * 60)
    print(f"仍然失败: {still_failing}，结果不一致: {mismatched}")
    print("=" * 60)
    return 1 if still_failing or mismatched else 0


if __name__ == "__main__":
    sys.exit(main())
