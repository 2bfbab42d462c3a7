"""
JSON and CSV writers with 17-significant-digit numbers
"""
import csv
import io
import json
import math
from enum import Enum
from typing import Any, Iterable, List, Sequence

from pydantic import BaseModel


def format_number(value: float) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "NaN"
    if value == 0:
        return "0"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return format(value, ".17g")


def _encode(obj: Any) -> str:
    if isinstance(obj, BaseModel):
        obj = obj.model_dump()
    if obj is None:
        return "null"
    if isinstance(obj, Enum):
        obj = obj.value
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, int, float)):
        return format_number(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(key))}: {_encode(value)}" for key, value in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(item) for item in obj) + "]"
    if hasattr(obj, "tolist"):
        return _encode(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj: Any) -> str:
    """Serialize dicts, lists, numbers and pydantic models; key order is preserved."""
    return _encode(obj)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, int, float)):
        return format_number(value)
    return str(value)


def rows_from_models(models: List[BaseModel]) -> List[List[Any]]:
    return [list(model.model_dump().values()) for model in models]
