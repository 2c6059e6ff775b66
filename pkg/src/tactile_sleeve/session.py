"""Session service: live navigation/quiz sessions over line-delimited
JSON, persistent experiment logs, and run-time aggregation.

Each client connection owns one isolated session state machine. Sessions
share only the immutable scene/pattern catalogs and an append-only log
directory. Steering commands are latest-wins: a tick consumes the most
recent command and keeps repeating it until a newer one arrives.
"""

from __future__ import annotations

import asyncio
import json
import math
import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .mapping import MappingConfig, MotorGrid, process_frame
from .patterns import (Direction, Pattern, Simultaneity, TrialRecord,
                       aggregate_trials, builtin_catalog, schedule)
from .sim import (AgentState, CameraModel, Command, Scene, SessionLog,
                  TickRecord, render_depth, step_agent)
from .wire import encode_wireframe

DATA_DIR_ENV = "TACTILE_DATA_DIR"
DEFAULT_ANSWER_TIMEOUT_S = 30.0


def data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "./data"))


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class RunSummary:
    """Per-run completion-time averages across persons.

    The percentage row is always recomputed from the unrounded means as
    round(100 * mean_k / mean_1); it is not hand-entered, so it can
    disagree with externally quoted percentages for the same times.
    """

    per_person: Tuple[Tuple[float, ...], ...]
    means: Tuple[float, ...]
    seconds_row: Tuple[int, ...]
    percent_row: Tuple[int, ...]


def aggregate_runs(per_person: Sequence[Sequence[float]]) -> RunSummary:
    """Average completion seconds per run over persons.

    Raises on ragged input (every person must have the same run count).
    """
    if not per_person:
        raise ValueError("no persons")
    n_runs = len(per_person[0])
    if n_runs == 0 or any(len(runs) != n_runs for runs in per_person):
        raise ValueError("every person must have the same, nonzero run count")
    means = tuple(sum(p[k] for p in per_person) / len(per_person)
                  for k in range(n_runs))
    seconds = tuple(round_half_up(m) for m in means)
    percent = tuple(round_half_up(100.0 * m / means[0]) for m in means)
    return RunSummary(tuple(tuple(p) for p in per_person), means, seconds,
                      percent)


class LogStore:
    """Append-only JSONL persistence; every line is independently valid
    so a crashed session still leaves a parseable prefix."""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else data_dir()
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = asyncio.Lock()
        self._counter = 0

    def _new_name(self, kind: str) -> Path:
        self._counter += 1
        stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        return self.root / f"{stamp}-{self._counter:04d}.{kind}.jsonl"

    async def append_session(self, log: SessionLog) -> Path:
        async with self._lock:
            path = self._new_name("session")
            path.write_text(log.to_jsonl())
            return path

    async def append_trials(self, trials: Sequence[TrialRecord]) -> Path:
        async with self._lock:
            path = self._new_name("trials")
            text = "".join(t.to_json_line() + "\n" for t in trials)
            path.write_text(text)
            return path


def load_session_logs(root: Path) -> List[SessionLog]:
    logs = []
    for path in sorted(Path(root).glob("*.session.jsonl")):
        logs.append(SessionLog.from_jsonl(path.read_text()))
    return logs


def load_trial_records(root: Path) -> List[TrialRecord]:
    records = []
    for path in sorted(Path(root).glob("*.trials.jsonl")):
        for line in path.read_text().splitlines():
            if line.strip():
                records.append(TrialRecord.from_json_line(line))
    return records


def runs_by_person(logs: Sequence[SessionLog]) -> List[List[float]]:
    """Group finished navigation runs into per-person ordered time lists."""
    by_person: Dict[str, List[Tuple[int, float]]] = {}
    for i, log in enumerate(logs):
        if log.completion_time_s is None:
            continue
        person = log.person or "anonymous"
        order = log.run if log.run is not None else i
        by_person.setdefault(person, []).append((order, log.completion_time_s))
    out = []
    for person in sorted(by_person):
        runs = sorted(by_person[person])
        out.append([t for _, t in runs])
    return out


class _WireSink:
    """Optional byte-stream mirror of every broadcast grid as wire
    frames, for hardware-in-the-loop setups."""

    def __init__(self, host: str, port: int):
        self.host, self.port = host, port
        self.writer: Optional[asyncio.StreamWriter] = None
        self.seq = 0

    async def open(self):
        _, self.writer = await asyncio.open_connection(self.host, self.port)

    async def send(self, grid: MotorGrid):
        if self.writer is None:
            return
        self.writer.write(encode_wireframe(grid, self.seq & 0xFF))
        self.seq += 1
        await self.writer.drain()

    async def close(self):
        if self.writer is not None:
            self.writer.close()


class SessionService:
    """TCP service speaking newline-delimited JSON messages."""

    def __init__(self, scenes: Dict[str, Scene],
                 patterns: Optional[Dict[str, Pattern]] = None,
                 config: Optional[MappingConfig] = None,
                 cam: Optional[CameraModel] = None,
                 tick_hz: float = 6.0,
                 budget_s: float = 300.0,
                 debug_pose: bool = False,
                 log_store: Optional[LogStore] = None,
                 wire_sink: Optional[Tuple[str, int]] = None,
                 answer_timeout_s: float = DEFAULT_ANSWER_TIMEOUT_S):
        if not scenes:
            raise ValueError("need at least one scene")
        self.scenes = scenes
        self.patterns = patterns if patterns is not None else builtin_catalog()
        self.config = config or MappingConfig.indoor()
        self.cam = cam or CameraModel()
        self.tick_hz = tick_hz
        self.budget_s = budget_s
        self.debug_pose = debug_pose
        self.log_store = log_store or LogStore()
        self.wire_sink_addr = wire_sink
        self.answer_timeout_s = answer_timeout_s
        self.server: Optional[asyncio.base_events.Server] = None

    async def start(self, port: int, host: str = "127.0.0.1"):
        self.server = await asyncio.start_server(self._handle, host, port)
        return self.server

    @property
    def port(self) -> int:
        return self.server.sockets[0].getsockname()[1]

    async def serve_forever(self):
        async with self.server:
            await self.server.serve_forever()

    async def _handle(self, reader: asyncio.StreamReader,
                      writer: asyncio.StreamWriter):
        session = _ClientSession(self, reader, writer)
        try:
            await session.run()
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            writer.close()


class _ClientSession:
    def __init__(self, svc: SessionService, reader, writer):
        self.svc = svc
        self.reader = reader
        self.writer = writer
        self.latest_cmd: Command = (0, 0)
        self.answers: asyncio.Queue = asyncio.Queue()

    async def send(self, message: dict):
        self.writer.write((json.dumps(message) + "\n").encode())
        await self.writer.drain()

    async def error(self, message: str):
        await self.send({"type": "error", "message": message})

    async def run(self):
        while True:
            line = await self.reader.readline()
            if not line:
                return
            try:
                msg = json.loads(line)
            except json.JSONDecodeError:
                await self.error("malformed JSON")
                continue
            if msg.get("type") != "start":
                await self.error(f"expected start, got {msg.get('type')!r}")
                continue
            mode = msg.get("mode")
            if mode == "navigate":
                await self._navigate(msg)
            elif mode == "pattern":
                await self._pattern_quiz(msg)
            else:
                await self.error(f"unknown mode {mode!r}")

    async def _pump_messages(self):
        """Background reader during an active session; latest-wins for
        cmd, queue for answers."""
        while True:
            line = await self.reader.readline()
            if not line:
                raise ConnectionError("client went away")
            try:
                msg = json.loads(line)
            except json.JSONDecodeError:
                await self.error("malformed JSON")
                continue
            mtype = msg.get("type")
            if mtype == "cmd":
                try:
                    fwd = int(msg["forward"])
                    turn = int(msg["turn"])
                    if fwd not in (-1, 0, 1) or turn not in (-1, 0, 1):
                        raise ValueError
                    self.latest_cmd = (fwd, turn)
                except (KeyError, ValueError, TypeError):
                    await self.error("bad cmd message")
            elif mtype == "answer":
                await self.answers.put(msg)
            else:
                await self.error(f"unexpected message {mtype!r}")

    async def _navigate(self, msg: dict):
        svc = self.svc
        scene_name = msg.get("scene")
        scene = svc.scenes.get(scene_name)
        if scene is None:
            await self.error(f"unknown scene {scene_name!r}")
            return
        tick_hz = float(msg.get("tick_hz", svc.tick_hz))
        budget_s = float(msg.get("budget_s", svc.budget_s))
        person = msg.get("person")
        run_no = msg.get("run")

        sink = None
        if svc.wire_sink_addr is not None:
            sink = _WireSink(*svc.wire_sink_addr)
            await sink.open()

        await self.send({"type": "started", "mode": "navigate",
                         "scene": scene.name, "tick_hz": tick_hz})
        self.latest_cmd = (0, 0)
        pump = asyncio.create_task(self._pump_messages())
        state = AgentState(*scene.start)
        dt = 1.0 / tick_hz
        ticks: List[TickRecord] = []
        completion = None
        collisions = 0
        try:
            for k in range(math.floor(budget_s * tick_hz) + 1):
                if scene.in_goal(state.x, state.y):
                    completion = k / tick_hz
                    break
                t_ms = round(k * 1000.0 / tick_hz)
                frame = render_depth(scene, state, svc.cam, timestamp_ms=t_ms)
                grid = process_frame(frame, svc.config)
                ticks.append(TickRecord(t_ms, state, grid))
                tick_msg = {"type": "tick", "t_ms": t_ms,
                            "grid": list(grid.intensities)}
                if svc.debug_pose:
                    tick_msg["pose"] = {"x": state.x, "y": state.y,
                                        "heading": state.heading,
                                        "collided": state.collided}
                await self.send(tick_msg)
                if sink is not None:
                    await sink.send(grid)
                await asyncio.sleep(dt)
                state = step_agent(scene, state, self.latest_cmd, dt)
                if state.collided:
                    collisions += 1
        finally:
            pump.cancel()
            if sink is not None:
                await sink.close()
        log = SessionLog(scene.name, tuple(ticks), completion, collisions,
                         person, run_no)
        await self.svc.log_store.append_session(log)
        await self.send({"type": "summary", "mode": "navigate",
                         "scene": scene.name,
                         "completion_time_s": completion,
                         "did_not_finish": completion is None,
                         "collision_count": collisions})

    async def _pattern_quiz(self, msg: dict):
        svc = self.svc
        step_ms = msg.get("step_ms")
        timeout = float(msg.get("answer_timeout_s", svc.answer_timeout_s))
        catalog = list(svc.patterns.values())
        self.answers = asyncio.Queue()
        await self.send({"type": "started", "mode": "pattern",
                         "count": len(catalog)})
        pump = asyncio.create_task(self._pump_messages())
        trials: List[Tuple[Pattern, TrialRecord]] = []
        try:
            for index, pattern in enumerate(catalog):
                play = pattern if step_ms is None else \
                    Pattern(pattern.id, pattern.name, pattern.steps,
                            int(step_ms), pattern.direction)
                await self.send({"type": "pattern_start", "index": index,
                                 "of": len(catalog), "pattern": pattern.id})
                prev_t = 0
                for t_ms, grid in schedule(play):
                    await asyncio.sleep((t_ms - prev_t) / 1000.0)
                    prev_t = t_ms
                    await self.send({"type": "tick", "t_ms": t_ms,
                                     "grid": list(grid.intensities)})
                await self.send({"type": "pattern_end", "index": index})
                try:
                    answer = await asyncio.wait_for(self.answers.get(), timeout)
                    rec = TrialRecord(
                        pattern.id,
                        Direction(answer.get("direction", "unknown")),
                        Simultaneity(answer["simultaneity"]))
                except asyncio.TimeoutError:
                    rec = TrialRecord(pattern.id, Direction.UNKNOWN,
                                      _wrong_simultaneity(pattern))
                except (KeyError, ValueError):
                    await self.error("bad answer message; scored as unknown")
                    rec = TrialRecord(pattern.id, Direction.UNKNOWN,
                                      _wrong_simultaneity(pattern))
                trials.append((pattern, rec))
        finally:
            pump.cancel()
        await self.svc.log_store.append_trials([rec for _, rec in trials])
        table = aggregate_trials(trials)
        await self.send({"type": "summary", "mode": "pattern",
                         "table": accuracy_table_doc(table)})


def _wrong_simultaneity(pattern: Pattern) -> Simultaneity:
    """A simultaneity answer guaranteed not to match, so an unanswered
    trial scores Wrong on both criteria."""
    from .patterns import classify
    actual = classify(pattern).simultaneity
    for cand in Simultaneity:
        if cand is not actual:
            return cand
    raise AssertionError("unreachable")


def accuracy_table_doc(table) -> dict:
    return {
        "by_simultaneity": {
            k.value: {"count": v.count, "correct_pct": v.correct_pct,
                      "partial_pct": v.partial_pct, "wrong_pct": v.wrong_pct}
            for k, v in table.by_simultaneity.items()},
        "by_axis": {
            k.value: {"count": v.count, "correct_pct": v.correct_pct,
                      "partial_pct": v.partial_pct, "wrong_pct": v.wrong_pct}
            for k, v in table.by_axis.items()},
    }


__all__ = [
    "DATA_DIR_ENV", "LogStore", "RunSummary", "SessionService",
    "accuracy_table_doc", "aggregate_runs", "data_dir",
    "load_session_logs", "load_trial_records", "round_half_up",
    "runs_by_person",
]
