#!/usr/bin/env python3
"""
Serialization helpers shared by every command that writes results.

Numbers are rounded to 9 significant digits and files end with a newline,
so identical inputs give byte-identical outputs.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Union

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 9


def round_sig(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    if value is None or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def rounded(document: Any) -> Any:
    """Round every float in a nested document."""
    if isinstance(document, float):
        return round_sig(document)
    if isinstance(document, dict):
        return {key: rounded(value) for key, value in document.items()}
    if isinstance(document, (list, tuple)):
        return [rounded(value) for value in document]
    return document


def dumps(document: Any) -> str:
    return json.dumps(rounded(document), indent=2, ensure_ascii=False) + "\n"


def write_json(document: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps(document))
    logger.info(f"Wrote {path}")
    return path
