"""
信道/分布文件读写

支持两种格式：
- CSV：每行一组十进制概率，分隔符固定为逗号，小数点固定为 '.'
- JSON：{"rows": [[...], ...]}，分布也可以写成 {"probs": [...]}
"""

import csv
import json
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import List, Union

from leakage.errors import ChannelParseError, LeakageError
from leakage.prob_core import make_channel, make_distribution
from models.prob_model import Channel, Distribution

PathLike = Union[str, Path]


def _parse_cell(text, path, row: int, column: int) -> float:
    if isinstance(text, (int, Decimal)) and not isinstance(text, bool):
        value = Decimal(text)
    elif isinstance(text, str):
        try:
            value = Decimal(text.strip())
        except InvalidOperation:
            raise ChannelParseError(f"not a decimal number: {text!r}", path, row, column)
    else:
        raise ChannelParseError(f"not a decimal number: {text!r}", path, row, column)
    if not value.is_finite():
        raise ChannelParseError(f"non-finite value: {text!r}", path, row, column)
    return float(value)


def _read_csv_rows(path: Path) -> List[List[float]]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row_idx, record in enumerate(csv.reader(f), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if record[0].lstrip().startswith("#"):
                continue
            rows.append([_parse_cell(cell, str(path), row_idx, col_idx)
                         for col_idx, cell in enumerate(record, start=1)])
    return rows


def _read_json_rows(path: Path) -> List[List[float]]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f, parse_float=Decimal)
    except json.JSONDecodeError as e:
        raise ChannelParseError(f"invalid JSON: {e.msg}", str(path), e.lineno, e.colno)

    if isinstance(data, dict):
        if "rows" in data:
            raw_rows = data["rows"]
        elif "probs" in data:
            raw_rows = [data["probs"]]
        else:
            raise ChannelParseError('expected a "rows" or "probs" key', str(path))
    else:
        raw_rows = data
    if not isinstance(raw_rows, list):
        raise ChannelParseError("rows must be a list", str(path))
    # 允许直接给一维列表（单个分布）
    if raw_rows and not isinstance(raw_rows[0], list):
        raw_rows = [raw_rows]

    rows = []
    for row_idx, raw in enumerate(raw_rows, start=1):
        if not isinstance(raw, list):
            raise ChannelParseError("row must be a list", str(path), row_idx)
        rows.append([_parse_cell(cell, str(path), row_idx, col_idx)
                     for col_idx, cell in enumerate(raw, start=1)])
    return rows


def read_rows(path: PathLike) -> List[List[float]]:
    path = Path(path)
    if not path.exists():
        raise ChannelParseError("file does not exist", str(path))
    if path.suffix.lower() == ".json":
        return _read_json_rows(path)
    return _read_csv_rows(path)


def load_channel(path: PathLike) -> Channel:
    rows = read_rows(path)
    try:
        return make_channel(rows)
    except LeakageError as e:
        raise ChannelParseError(str(e), str(path))


def load_distribution(path: PathLike) -> Distribution:
    """读取分布：单行，或者每行一个数（单列）"""
    rows = read_rows(path)
    if len(rows) == 1:
        values = rows[0]
    elif rows and all(len(r) == 1 for r in rows):
        values = [r[0] for r in rows]
    else:
        raise ChannelParseError(f"expected a single row of probabilities, got {len(rows)} rows", str(path))
    try:
        return make_distribution(values)
    except LeakageError as e:
        raise ChannelParseError(str(e), str(path))


def dump_channel(channel: Channel, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".json":
        with open(path, "w", encoding="utf-8") as f:
            json.dump(channel.to_dict(), f, ensure_ascii=False, indent=2)
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in channel.rows:
            writer.writerow([repr(float(v)) for v in row])
