"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

from typing import Sequence

from .types import STRATEGIES, CorpusRecord


def check_delta(delta) -> float:
    if not isinstance(delta, (int, float)) or isinstance(delta, bool):
        raise TypeError(f"delta must be a number, got {type(delta).__name__}")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    return float(delta)


def check_slack(slack) -> int:
    if not isinstance(slack, int) or isinstance(slack, bool):
        raise TypeError(f"slack must be an int, got {type(slack).__name__}")
    if slack < 0:
        raise ValueError(f"slack must be non-negative, got {slack}")
    return slack


def check_strategy(strategy) -> str:
    if strategy not in STRATEGIES:
        raise ValueError(
            f"strategy must be one of {', '.join(STRATEGIES)}; got {strategy!r}"
        )
    return strategy


def check_records(records) -> list[CorpusRecord]:
    if isinstance(records, CorpusRecord):
        raise TypeError("expected a sequence of records, got a single record")
    out = list(records)
    for item in out:
        if not isinstance(item, CorpusRecord):
            raise TypeError(f"expected CorpusRecord items, got {type(item).__name__}")
    return out


def check_ratios(ratios) -> tuple[float, float, float]:
    values = tuple(float(r) for r in ratios)
    if len(values) != 3:
        raise ValueError(f"expected three split ratios, got {len(values)}")
    if any(r < 0 for r in values):
        raise ValueError(f"split ratios must be non-negative, got {values}")
    if abs(sum(values) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {values}")
    return values


def check_sequence_of_str(items, name: str) -> list[str]:
    if isinstance(items, str):
        raise TypeError(f"{name} must be a sequence of strings, got a single string")
    out = list(items)
    for item in out:
        if not isinstance(item, str):
            raise TypeError(f"{name} items must be strings, got {type(item).__name__}")
    return out
