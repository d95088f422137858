"""JSON instance and result files.

Every integer travels as a decimal string so that values of any size
survive the round trip; keys are sorted so equal objects serialise to
identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import DeltaFptError
from .linalg import IntMatrix

STATUSES = ("optimal", "infeasible", "unbounded", "error")
PROBLEMS = ("svp", "ilp")


class FormatError(DeltaFptError, ValueError):
    """Input that is not a well-formed instance or result file."""


def _int(value: Any, what: str) -> int:
    if not isinstance(value, str):
        raise FormatError(f"{what} must be a decimal string, got {value!r}")
    try:
        return int(value, 10)
    except ValueError:
        raise FormatError(f"{what} is not a decimal integer: {value!r}") from None


def _ints(values: Any, what: str) -> tuple[int, ...]:
    if not isinstance(values, list):
        raise FormatError(f"{what} must be an array of decimal strings")
    return tuple(_int(v, f"{what}[{i}]") for i, v in enumerate(values))


def _strs(values: Sequence[int]) -> list[str]:
    return [str(int(v)) for v in values]


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_object(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise FormatError("top-level JSON value must be an object")
    return obj


@dataclass(frozen=True)
class InstanceFile:
    """A matrix plus the optional SVP exponent ``p`` and ILP data ``b``, ``c``."""

    matrix: IntMatrix
    p: int | None = None
    b: tuple[int, ...] | None = None
    c: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.p is not None and (isinstance(self.p, bool) or not isinstance(self.p, int) or self.p < 1):
            raise FormatError(f"p must be an integer >= 1, got {self.p!r}")
        if self.b is not None and len(self.b) != self.matrix.rows:
            raise FormatError(f"b has length {len(self.b)}, expected {self.matrix.rows}")
        if self.c is not None and len(self.c) != self.matrix.cols:
            raise FormatError(f"c has length {len(self.c)}, expected {self.matrix.cols}")

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "rows": self.matrix.rows,
            "cols": self.matrix.cols,
            "data": _strs(self.matrix.entries),
        }
        if self.p is not None:
            out["p"] = self.p
        if self.b is not None:
            out["b"] = _strs(self.b)
        if self.c is not None:
            out["c"] = _strs(self.c)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "InstanceFile":
        rows, cols = obj.get("rows"), obj.get("cols")
        for name, v in (("rows", rows), ("cols", cols)):
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise FormatError(f"{name} must be a non-negative integer")
        data = _ints(obj.get("data"), "data")
        if len(data) != rows * cols:
            raise FormatError(f"data has {len(data)} entries, expected {rows}x{cols}")
        matrix = IntMatrix(rows, cols, data)
        b = _ints(obj["b"], "b") if "b" in obj else None
        c = _ints(obj["c"], "c") if "c" in obj else None
        return cls(matrix, obj.get("p"), b, c)

    def serialize(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def parse(cls, text: str) -> "InstanceFile":
        return cls.from_dict(_load_object(text))


@dataclass(frozen=True)
class ResultFile:
    """Solver output; ``solution`` is present exactly when status is optimal."""

    problem: str
    method: str
    status: str
    objective: int | None = None
    solution: tuple[int, ...] | None = None
    delta: int | None = None
    stats: dict = field(default_factory=dict)
    message: str | None = None

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise FormatError(f"unknown problem {self.problem!r}")
        if self.status not in STATUSES:
            raise FormatError(f"unknown status {self.status!r}")
        if (self.solution is not None) != (self.status == "optimal"):
            raise FormatError("solution must be present exactly when status is optimal")

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "problem": self.problem,
            "method": self.method,
            "status": self.status,
            "stats": dict(self.stats),
        }
        if self.objective is not None:
            out["objective"] = str(self.objective)
        if self.solution is not None:
            out["solution"] = _strs(self.solution)
        if self.delta is not None:
            out["delta"] = str(self.delta)
        if self.message is not None:
            out["message"] = self.message
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ResultFile":
        stats = obj.get("stats", {})
        if not isinstance(stats, dict):
            raise FormatError("stats must be an object")
        return cls(
            problem=obj.get("problem"),
            method=obj.get("method"),
            status=obj.get("status"),
            objective=_int(obj["objective"], "objective") if "objective" in obj else None,
            solution=_ints(obj["solution"], "solution") if "solution" in obj else None,
            delta=_int(obj["delta"], "delta") if "delta" in obj else None,
            stats=stats,
            message=obj.get("message"),
        )

    def serialize(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def parse(cls, text: str) -> "ResultFile":
        return cls.from_dict(_load_object(text))
