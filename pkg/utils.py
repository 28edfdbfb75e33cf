import dotenv
dotenv.load_dotenv()
import os
import asyncio
import logging
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

# ==================== 配置 ====================
# 所有配置都可以通过环境变量（或 .env 文件）覆盖
DEFAULT_UNITS = os.getenv("LEAKAGE_UNITS", "bits")
DEFAULT_TOL = float(os.getenv("LEAKAGE_TOL", "1e-8"))
DEFAULT_SEED = int(os.getenv("LEAKAGE_SEED", "0"))
OUTPUT_DIR = os.getenv("LEAKAGE_OUTPUT_DIR", "outputs")
MAX_WORKERS = int(os.getenv("LEAKAGE_MAX_WORKERS", "8"))
LOG_LEVEL = os.getenv("LEAKAGE_LOG_LEVEL", "WARNING")
# ==============================================


def configure_logging(level: Optional[str] = None):
    """按 LEAKAGE_LOG_LEVEL 配置日志，输出到 stderr，保证 stdout 只有结果数据"""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


async def _gather_bounded(fn: Callable[[T], R], items: Sequence[T], max_workers: int) -> List[R]:
    # 限制并发数的 Semaphore
    semaphore = asyncio.Semaphore(max(1, max_workers))

    async def run_one(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    # gather 按输入顺序返回结果，与完成顺序无关
    return await asyncio.gather(*(run_one(item) for item in items))


def gather_bounded(fn: Callable[[T], R], items: Sequence[T], max_workers: Optional[int] = None) -> List[R]:
    """
    并发执行一组阻塞计算（线程池 + asyncio），结果顺序与输入一致

    Args:
        fn: 对单个元素的计算函数（必须是纯函数）
        items: 输入列表
        max_workers: 最大并发数，默认取 LEAKAGE_MAX_WORKERS

    Returns:
        与 items 一一对应的结果列表
    """
    items = list(items)
    if not items:
        return []
    return asyncio.run(_gather_bounded(fn, items, max_workers or MAX_WORKERS))

