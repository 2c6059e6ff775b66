"""Vibration pattern catalog, classification, scheduling, and trial scoring.

The sleeve's functionality quiz plays timed motor patterns and asks the
wearer for the movement direction and how many motors buzzed at once.
Answers are graded against two criteria (direction, simultaneity class).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .mapping import GRID_CELLS, GRID_SIZE, MAX_DUTY, MotorGrid

DEFAULT_STEP_MS = 500

# (motor_index, intensity) pairs; one Step is everything active at once.
Step = Tuple[Tuple[int, int], ...]


class Direction(Enum):
    ROW_SWEEP = "row_sweep"
    COLUMN_SWEEP = "column_sweep"
    DIAGONAL_SWEEP = "diagonal_sweep"
    STATIC = "static"
    UNKNOWN = "unknown"


class Simultaneity(Enum):
    SINGLE = "single"
    LOWER_MULTIPLE = "lower_multiple"
    HIGHER_MULTIPLE = "higher_multiple"


class Axis(Enum):
    SINGLE_AXIS = "single_axis"
    MULTI_AXIS = "multi_axis"


class Verdict(Enum):
    CORRECT = "correct"
    PARTIALLY_CORRECT = "partially_correct"
    WRONG = "wrong"


@dataclass(frozen=True)
class Pattern:
    id: str
    name: str
    steps: Tuple[Step, ...]
    step_ms: int = DEFAULT_STEP_MS
    direction: Direction = Direction.UNKNOWN

    def __post_init__(self):
        if not self.steps:
            raise ValueError("pattern needs at least one step")
        if self.step_ms <= 0:
            raise ValueError("step_ms must be positive")
        norm = []
        for step in self.steps:
            seen = set()
            for motor, intensity in step:
                if not (0 <= motor < GRID_CELLS):
                    raise ValueError(f"motor index {motor} out of range")
                if not (0 <= intensity <= MAX_DUTY):
                    raise ValueError(f"intensity {intensity} out of range")
                if motor in seen:
                    raise ValueError(f"motor {motor} repeated within a step")
                seen.add(motor)
            if not step:
                raise ValueError("empty step")
            norm.append(tuple(sorted(step)))
        object.__setattr__(self, "steps", tuple(norm))

    def to_json(self) -> str:
        doc = {
            "id": self.id,
            "name": self.name,
            "step_ms": self.step_ms,
            "steps": [[[m, i] for m, i in step] for step in self.steps],
            "direction": self.direction.value,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Pattern":
        doc = json.loads(text)
        return cls(
            id=doc["id"],
            name=doc["name"],
            step_ms=doc.get("step_ms", DEFAULT_STEP_MS),
            steps=tuple(tuple((int(m), int(i)) for m, i in step)
                        for step in doc["steps"]),
            direction=Direction(doc.get("direction", "unknown")),
        )


@dataclass(frozen=True)
class PatternClass:
    simultaneity: Simultaneity
    axis: Axis


@dataclass(frozen=True)
class TrialRecord:
    pattern_id: str
    answer_direction: Direction
    answer_simultaneity: Simultaneity
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())

    def to_json_line(self) -> str:
        return json.dumps({
            "pattern_id": self.pattern_id,
            "answer_direction": self.answer_direction.value,
            "answer_simultaneity": self.answer_simultaneity.value,
            "timestamp": self.timestamp,
        })

    @classmethod
    def from_json_line(cls, line: str) -> "TrialRecord":
        doc = json.loads(line)
        return cls(
            pattern_id=doc["pattern_id"],
            answer_direction=Direction(doc["answer_direction"]),
            answer_simultaneity=Simultaneity(doc["answer_simultaneity"]),
            timestamp=doc["timestamp"],
        )


@dataclass(frozen=True)
class TrialResult:
    verdict: Verdict
    criterion1_met: bool  # movement direction
    criterion2_met: bool  # simultaneity class


def _motor(row: int, col: int) -> int:
    return row * GRID_SIZE + col


def _single_steps(order: Iterable[int]) -> Tuple[Step, ...]:
    return tuple(((m, MAX_DUTY),) for m in order)


def _set_steps(sets: Iterable[Iterable[int]]) -> Tuple[Step, ...]:
    return tuple(tuple((m, MAX_DUTY) for m in sorted(s)) for s in sets)


def _ring(dist: int) -> List[int]:
    """Motors at Chebyshev distance `dist` from the grid center."""
    center = GRID_SIZE // 2
    out = []
    for r in range(GRID_SIZE):
        for c in range(GRID_SIZE):
            if max(abs(r - center), abs(c - center)) == dist:
                out.append(_motor(r, c))
    return out


def builtin_patterns() -> List[Pattern]:
    """The eleven-pattern catalog used by the sleeve quiz.

    Spans the full taxonomy: single / lower-multiple (2-5) /
    higher-multiple (>5) simultaneous motors, single- vs multi-axis
    movement, plus static localization tasks.
    """
    patterns = [
        Pattern("P1", "row-major single sweep",
                _single_steps(range(GRID_CELLS)),
                direction=Direction.ROW_SWEEP),
        Pattern("P2", "diagonal wavefront",
                _set_steps([[_motor(r, c) for r in range(GRID_SIZE)
                             for c in range(GRID_SIZE) if r + c == k]
                            for k in range(2 * GRID_SIZE - 1)]),
                direction=Direction.DIAGONAL_SWEEP),
        Pattern("P3", "row bar sweeping down",
                _set_steps([[_motor(r, c) for c in range(GRID_SIZE)]
                            for r in range(GRID_SIZE)]),
                direction=Direction.COLUMN_SWEEP),
        Pattern("P4", "column bar sweeping right",
                _set_steps([[_motor(r, c) for r in range(GRID_SIZE)]
                            for c in range(GRID_SIZE)]),
                direction=Direction.ROW_SWEEP),
        Pattern("P5", "expanding frame",
                _set_steps([_ring(0), _ring(1), _ring(2)]),
                direction=Direction.DIAGONAL_SWEEP),
        Pattern("P6", "static cluster of 3",
                _set_steps([[_motor(2, 1), _motor(2, 2), _motor(2, 3)]]),
                direction=Direction.STATIC),
        Pattern("P7", "column-major single sweep",
                _single_steps(_motor(r, c) for c in range(GRID_SIZE)
                              for r in range(GRID_SIZE)),
                direction=Direction.COLUMN_SWEEP),
        Pattern("P8", "reverse row-major single sweep",
                _single_steps(range(GRID_CELLS - 1, -1, -1)),
                direction=Direction.ROW_SWEEP),
        Pattern("P9", "main-diagonal single sweep",
                _single_steps(_motor(k, k) for k in range(GRID_SIZE)),
                direction=Direction.DIAGONAL_SWEEP),
        Pattern("P10", "contracting frame",
                _set_steps([_ring(2), _ring(1), _ring(0)]),
                direction=Direction.DIAGONAL_SWEEP),
        Pattern("P11", "static plus of 7",
                _set_steps([[_motor(0, 2), _motor(1, 2), _motor(2, 1),
                             _motor(2, 2), _motor(2, 3), _motor(3, 2),
                             _motor(4, 2)]]),
                direction=Direction.STATIC),
    ]
    assert len(patterns) == 11
    return patterns


def builtin_catalog() -> Dict[str, Pattern]:
    return {p.id: p for p in builtin_patterns()}


def _axis_index(motor: int, row_major: bool) -> int:
    if row_major:
        return motor
    r, c = divmod(motor, GRID_SIZE)
    return c * GRID_SIZE + r


def _is_single_axis(steps: Sequence[Step]) -> bool:
    """True when the active sets progress as adjacent contiguous blocks
    in row-major or column-major order, in either direction."""
    if len(steps) == 1:
        return True
    for row_major in (True, False):
        ivals = []
        ok = True
        for step in steps:
            idx = sorted(_axis_index(m, row_major) for m, _ in step)
            if idx[-1] - idx[0] != len(idx) - 1:
                ok = False
                break
            ivals.append((idx[0], idx[-1]))
        if not ok:
            continue
        forward = all(b[0] == a[1] + 1 for a, b in zip(ivals, ivals[1:]))
        backward = all(b[1] == a[0] - 1 for a, b in zip(ivals, ivals[1:]))
        if forward or backward:
            return True
    return False


def classify(p: Pattern) -> PatternClass:
    """Simultaneity from the peak number of active motors; axis from
    whether the activity walks along exactly one grid axis."""
    peak = max(len(step) for step in p.steps)
    if peak == 1:
        simult = Simultaneity.SINGLE
    elif peak <= 5:
        simult = Simultaneity.LOWER_MULTIPLE
    else:
        simult = Simultaneity.HIGHER_MULTIPLE
    axis = Axis.SINGLE_AXIS if _is_single_axis(p.steps) else Axis.MULTI_AXIS
    return PatternClass(simult, axis)


def schedule(p: Pattern) -> List[Tuple[int, MotorGrid]]:
    """Timed grid sequence: one grid per step plus a terminal all-off."""
    out = []
    for k, step in enumerate(p.steps):
        intensities = [0] * GRID_CELLS
        for motor, intensity in step:
            intensities[motor] = intensity
        out.append((k * p.step_ms, MotorGrid(tuple(intensities))))
    out.append((len(p.steps) * p.step_ms, MotorGrid.zero()))
    return out


def score_trial(p: Pattern, rec: TrialRecord) -> TrialResult:
    if rec.pattern_id != p.id:
        raise ValueError(f"trial is for {rec.pattern_id!r}, not {p.id!r}")
    c1 = rec.answer_direction is p.direction
    c2 = rec.answer_simultaneity is classify(p).simultaneity
    if c1 and c2:
        verdict = Verdict.CORRECT
    elif c1 or c2:
        verdict = Verdict.PARTIALLY_CORRECT
    else:
        verdict = Verdict.WRONG
    return TrialResult(verdict, c1, c2)


@dataclass(frozen=True)
class GroupShare:
    count: int
    correct_pct: float
    partial_pct: float
    wrong_pct: float


@dataclass(frozen=True)
class AccuracyTable:
    """Verdict shares grouped by simultaneity class and by axis class.

    Percentages are rounded to one decimal, matching how the quiz
    results are reported.
    """

    by_simultaneity: Dict[Simultaneity, GroupShare]
    by_axis: Dict[Axis, GroupShare]


def _shares(results: List[Verdict]) -> GroupShare:
    n = len(results)
    def pct(v):
        return round(100.0 * sum(1 for r in results if r is v) / n, 1)
    return GroupShare(n, pct(Verdict.CORRECT), pct(Verdict.PARTIALLY_CORRECT),
                      pct(Verdict.WRONG))


def aggregate_trials(trials: Sequence[Tuple[Pattern, TrialRecord]]) -> AccuracyTable:
    by_simult: Dict[Simultaneity, List[Verdict]] = {}
    by_axis: Dict[Axis, List[Verdict]] = {}
    for pattern, rec in trials:
        cls = classify(pattern)
        verdict = score_trial(pattern, rec).verdict
        by_simult.setdefault(cls.simultaneity, []).append(verdict)
        by_axis.setdefault(cls.axis, []).append(verdict)
    return AccuracyTable(
        by_simultaneity={k: _shares(v) for k, v in by_simult.items()},
        by_axis={k: _shares(v) for k, v in by_axis.items()},
    )


__all__ = [
    "AccuracyTable", "Axis", "DEFAULT_STEP_MS", "Direction", "GroupShare",
    "Pattern", "PatternClass", "Simultaneity", "TrialRecord", "TrialResult",
    "Verdict", "aggregate_trials", "builtin_catalog", "builtin_patterns",
    "classify", "schedule", "score_trial",
]
