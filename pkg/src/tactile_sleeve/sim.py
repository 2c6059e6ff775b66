"""2.5D raycast world: synthetic depth frames, agent kinematics, sessions.

Scenes are flat 2D wall segments with a height class (full wall,
waist-height obstacle, or overhead obstacle with walking clearance).
A steerable agent carries a virtual depth camera; each image column is
a 2D ray, each row an elevation sample that gates which height classes
the ray can see. Everything is deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .mapping import DepthFrame, MappingConfig, MotorGrid, process_frame

TWO_PI = 2.0 * math.pi

DEFAULT_SPEED_MPS = 1.0
DEFAULT_TURN_RATE_DEG = 90.0
AGENT_RADIUS_M = 0.25
DEFAULT_TICK_HZ = 6.0
DEFAULT_BUDGET_S = 300.0


class HeightClass(Enum):
    FULL = "full"
    WAIST = "waist"
    OVERHEAD = "overhead"


# Vertical extent (meters) of each obstacle class.
HEIGHT_BANDS = {
    HeightClass.FULL: (0.0, 2.5),
    HeightClass.WAIST: (0.0, 0.9),
    HeightClass.OVERHEAD: (1.8, 2.5),
}

# Overhead obstacles leave walking clearance underneath.
BLOCKING_CLASSES = (HeightClass.FULL, HeightClass.WAIST)


@dataclass(frozen=True)
class Wall:
    x0: float
    y0: float
    x1: float
    y1: float
    height_class: HeightClass = HeightClass.FULL


@dataclass(frozen=True)
class Scene:
    name: str
    walls: Tuple[Wall, ...]
    start: Tuple[float, float, float]  # x, y, heading
    goal: Tuple[float, float, float, float]  # x0, y0, x1, y1
    bounds: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self):
        x0, y0, x1, y1 = self.goal
        if x1 <= x0 or y1 <= y0:
            raise ValueError("goal region must be non-empty")

    def effective_bounds(self) -> Tuple[float, float, float, float]:
        if self.bounds is not None:
            return self.bounds
        xs = [self.start[0], self.goal[0], self.goal[2]]
        ys = [self.start[1], self.goal[1], self.goal[3]]
        for w in self.walls:
            xs += [w.x0, w.x1]
            ys += [w.y0, w.y1]
        pad = 1.0
        return (min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad)

    def in_goal(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.goal
        return x0 <= x <= x1 and y0 <= y <= y1

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "walls": [{"x0": w.x0, "y0": w.y0, "x1": w.x1, "y1": w.y1,
                       "height_class": w.height_class.value}
                      for w in self.walls],
            "start": {"x": self.start[0], "y": self.start[1],
                      "heading": self.start[2]},
            "goal": {"x0": self.goal[0], "y0": self.goal[1],
                     "x1": self.goal[2], "y1": self.goal[3]},
        }
        if self.bounds is not None:
            doc["bounds"] = list(self.bounds)
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Scene":
        doc = json.loads(text)
        walls = tuple(
            Wall(w["x0"], w["y0"], w["x1"], w["y1"],
                 HeightClass(w.get("height_class", "full")))
            for w in doc["walls"])
        start = (doc["start"]["x"], doc["start"]["y"], doc["start"]["heading"])
        goal = (doc["goal"]["x0"], doc["goal"]["y0"],
                doc["goal"]["x1"], doc["goal"]["y1"])
        bounds = tuple(doc["bounds"]) if "bounds" in doc else None
        return cls(doc["name"], walls, start, goal, bounds)


@dataclass(frozen=True)
class AgentState:
    x: float
    y: float
    heading: float
    collided: bool = False

    def __post_init__(self):
        object.__setattr__(self, "heading", self.heading % TWO_PI)


@dataclass(frozen=True)
class CameraModel:
    """Virtual depth camera; defaults are a scaled-down stand-in for a
    small stereo depth unit running at reduced resolution."""

    h_fov_deg: float = 65.0
    v_fov_deg: float = 40.0
    width: int = 160
    height: int = 90
    min_range_mm: int = 300
    max_range_mm: int = 10000
    mount_height_m: float = 1.6

    def __post_init__(self):
        if not (0 < self.h_fov_deg < 180 and 0 < self.v_fov_deg < 180):
            raise ValueError("FOV angles must be in (0, 180)")
        if self.width < 5 or self.height < 5:
            raise ValueError("camera resolution must be at least 5x5")


class AgentOutOfBounds(ValueError):
    pass


def column_angles(heading: float, cam: CameraModel) -> np.ndarray:
    """World angle of each image column's ray; column 0 is the agent's
    left edge of view, the last column the right edge."""
    h_fov = math.radians(cam.h_fov_deg)
    j = np.arange(cam.width)
    return heading + h_fov * (0.5 - j / (cam.width - 1))


def row_elevations(cam: CameraModel) -> np.ndarray:
    """Elevation angle per image row; row 0 looks up."""
    v_fov = math.radians(cam.v_fov_deg)
    i = np.arange(cam.height)
    return v_fov * (0.5 - i / (cam.height - 1))


def _ray_segment_t(ox, oy, dx, dy, walls: Sequence[Wall]) -> np.ndarray:
    """2D ray/segment intersection distances, shape (n_cols, n_walls);
    inf where a ray misses a wall."""
    ax = np.array([w.x0 for w in walls])
    ay = np.array([w.y0 for w in walls])
    bx = np.array([w.x1 for w in walls])
    by = np.array([w.y1 for w in walls])
    ex = bx - ax
    ey = by - ay
    # Solve o + t*d = a + u*e for t >= 0, u in [0, 1].
    denom = dx[:, None] * (-ey)[None, :] + dy[:, None] * ex[None, :]
    rx = ax[None, :] - ox
    ry = ay[None, :] - oy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rx * (-ey)[None, :] + ry * ex[None, :]) / denom
        u = (dx[:, None] * ry - dy[:, None] * rx) / denom
    miss = (np.abs(denom) < 1e-12) | (t < 0) | (u < 0) | (u > 1)
    return np.where(miss, np.inf, t)


def render_depth(scene: Scene, agent: AgentState, cam: CameraModel,
                 timestamp_ms: int = 0) -> DepthFrame:
    """Raycast a depth frame from the agent's pose.

    Per column the reported distance is the 2D ray length to the nearest
    wall whose height band contains the row's elevation sample at that
    distance. Misses, hits beyond max range and hits inside min range
    are no-data (0).
    """
    bx0, by0, bx1, by1 = scene.effective_bounds()
    if not (bx0 <= agent.x <= bx1 and by0 <= agent.y <= by1):
        raise AgentOutOfBounds(f"agent at ({agent.x:.2f}, {agent.y:.2f}) "
                               f"outside scene bounds")
    if not scene.walls:
        depths = np.zeros((cam.height, cam.width), dtype=np.uint16)
        return DepthFrame(cam.width, cam.height, depths, timestamp_ms)

    angles = column_angles(agent.heading, cam)
    t = _ray_segment_t(agent.x, agent.y, np.cos(angles), np.sin(angles),
                       scene.walls)  # (W, M)
    tan_phi = np.tan(row_elevations(cam))  # (H,)
    lo = np.array([HEIGHT_BANDS[w.height_class][0] for w in scene.walls])
    hi = np.array([HEIGHT_BANDS[w.height_class][1] for w in scene.walls])

    # z of each row's sample at each candidate hit: (H, W, M)
    with np.errstate(invalid="ignore"):
        z = cam.mount_height_m + t[None, :, :] * tan_phi[:, None, None]
        visible = np.isfinite(t)[None, :, :] & (z >= lo[None, None, :]) & (z <= hi[None, None, :])
    t_vis = np.where(visible, t[None, :, :], np.inf)
    nearest = t_vis.min(axis=2)  # (H, W), meters

    mm = np.where(np.isfinite(nearest), np.rint(nearest * 1000.0), 0.0)
    mm = np.where((mm < cam.min_range_mm) | (mm > cam.max_range_mm), 0.0, mm)
    return DepthFrame(cam.width, cam.height, mm.astype(np.uint16), timestamp_ms)


def _point_segment_dist(px, py, walls: Sequence[Wall]) -> float:
    """Smallest distance from a point to any blocking wall segment."""
    best = math.inf
    for w in walls:
        if w.height_class not in BLOCKING_CLASSES:
            continue
        ex, ey = w.x1 - w.x0, w.y1 - w.y0
        L2 = ex * ex + ey * ey
        if L2 == 0.0:
            u = 0.0
        else:
            u = max(0.0, min(1.0, ((px - w.x0) * ex + (py - w.y0) * ey) / L2))
        cx, cy = w.x0 + u * ex, w.y0 + u * ey
        best = min(best, math.hypot(px - cx, py - cy))
    return best


Command = Tuple[int, int]  # (forward in {-1,0,1}, turn in {-1,0,1})


def step_agent(scene: Scene, state: AgentState, cmd: Command, dt_s: float,
               speed_mps: float = DEFAULT_SPEED_MPS,
               turn_rate_deg: float = DEFAULT_TURN_RATE_DEG,
               radius_m: float = AGENT_RADIUS_M) -> AgentState:
    """Advance the agent one tick: turn, then translate, clamping the
    translation at contact with any blocking wall (positive turn is
    counterclockwise, i.e. to the agent's left)."""
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    forward, turn = cmd
    heading = (state.heading + turn * math.radians(turn_rate_deg) * dt_s) % TWO_PI
    if forward == 0:
        return AgentState(state.x, state.y, heading, collided=False)

    distance = abs(forward) * speed_mps * dt_s
    sign = 1.0 if forward > 0 else -1.0
    ux, uy = sign * math.cos(heading), sign * math.sin(heading)

    def safe(s: float) -> bool:
        return _point_segment_dist(state.x + s * ux, state.y + s * uy,
                                   scene.walls) >= radius_m

    n_sub = 64
    first_unsafe = None
    for k in range(1, n_sub + 1):
        if not safe(distance * k / n_sub):
            first_unsafe = k
            break
    if first_unsafe is None:
        return AgentState(state.x + distance * ux, state.y + distance * uy,
                          heading, collided=False)

    s_lo = distance * (first_unsafe - 1) / n_sub
    s_hi = distance * first_unsafe / n_sub
    for _ in range(80):
        mid = 0.5 * (s_lo + s_hi)
        if safe(mid):
            s_lo = mid
        else:
            s_hi = mid
    return AgentState(state.x + s_lo * ux, state.y + s_lo * uy, heading,
                      collided=True)


@dataclass(frozen=True)
class TickRecord:
    t_ms: int
    agent: AgentState
    grid: MotorGrid


@dataclass(frozen=True)
class SessionLog:
    scene_name: str
    ticks: Tuple[TickRecord, ...]
    completion_time_s: Optional[float]  # None = did not finish
    collision_count: int
    person: Optional[str] = None
    run: Optional[int] = None

    @property
    def did_not_finish(self) -> bool:
        return self.completion_time_s is None

    def to_jsonl(self) -> str:
        lines = []
        for t in self.ticks:
            lines.append(json.dumps({
                "t_ms": t.t_ms,
                "x": t.agent.x, "y": t.agent.y, "heading": t.agent.heading,
                "collided": t.agent.collided,
                "grid": list(t.grid.intensities),
            }))
        summary = {
            "summary": {
                "scene": self.scene_name,
                "completion_time_s": self.completion_time_s,
                "did_not_finish": self.did_not_finish,
                "collision_count": self.collision_count,
            }
        }
        if self.person is not None:
            summary["summary"]["person"] = self.person
        if self.run is not None:
            summary["summary"]["run"] = self.run
        lines.append(json.dumps(summary))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionLog":
        ticks = []
        summary = None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if "summary" in doc:
                summary = doc["summary"]
            else:
                ticks.append(TickRecord(
                    doc["t_ms"],
                    AgentState(doc["x"], doc["y"], doc["heading"],
                               doc["collided"]),
                    MotorGrid(tuple(doc["grid"]))))
        if summary is None:
            raise ValueError("log has no summary line")
        return cls(summary["scene"], tuple(ticks),
                   summary["completion_time_s"], summary["collision_count"],
                   summary.get("person"), summary.get("run"))


Controller = Union[Callable[[MotorGrid, int], Command], Sequence[Command]]


def scripted(commands: Iterable[Command]) -> Callable[[MotorGrid, int], Command]:
    """Wrap a fixed command list as a controller; (0, 0) once exhausted."""
    script = list(commands)

    def control(grid: MotorGrid, tick: int) -> Command:
        return script[tick] if tick < len(script) else (0, 0)

    return control


def greedy_policy(grid: MotorGrid, threshold: int = 1000) -> Command:
    """Reactive obstacle avoider over the 5x5 grid: go forward while the
    center column is quiet, otherwise turn toward the quieter side
    (ties turn left)."""
    cols = [sum(grid.intensity(r, c) for r in range(5)) for c in range(5)]
    left = cols[0] + cols[1]
    center = cols[2]
    right = cols[3] + cols[4]
    if center < threshold:
        return (1, 0)
    if left <= right:
        return (0, 1)   # counterclockwise = left
    return (0, -1)


def run_session(scene: Scene, config: MappingConfig, cam: CameraModel,
                controller: Controller, tick_hz: float = DEFAULT_TICK_HZ,
                budget_s: float = DEFAULT_BUDGET_S,
                speed_mps: float = DEFAULT_SPEED_MPS,
                turn_rate_deg: float = DEFAULT_TURN_RATE_DEG,
                person: Optional[str] = None,
                run: Optional[int] = None,
                on_tick: Optional[Callable[[TickRecord], None]] = None) -> SessionLog:
    """Tick-driven navigation run.

    Per tick: render depth, map to a grid, ask the controller for a
    command, step the agent. Ends on goal entry (records the completion
    time) or when the tick budget is spent (did not finish).
    """
    if not callable(controller):
        controller = scripted(controller)
    state = AgentState(*scene.start)
    dt = 1.0 / tick_hz
    ticks: List[TickRecord] = []
    completion: Optional[float] = None
    collisions = 0
    max_tick = math.floor(budget_s * tick_hz)
    for k in range(max_tick + 1):
        if scene.in_goal(state.x, state.y):
            completion = k / tick_hz
            break
        t_ms = round(k * 1000.0 / tick_hz)
        frame = render_depth(scene, state, cam, timestamp_ms=t_ms)
        grid = process_frame(frame, config)
        record = TickRecord(t_ms, state, grid)
        ticks.append(record)
        if on_tick is not None:
            on_tick(record)
        cmd = controller(grid, k)
        state = step_agent(scene, state, cmd, dt, speed_mps, turn_rate_deg)
        if state.collided:
            collisions += 1
    return SessionLog(scene.name, tuple(ticks), completion, collisions,
                      person, run)


__all__ = [
    "AGENT_RADIUS_M", "AgentOutOfBounds", "AgentState", "BLOCKING_CLASSES",
    "CameraModel", "Command", "DEFAULT_BUDGET_S", "DEFAULT_SPEED_MPS",
    "DEFAULT_TICK_HZ", "DEFAULT_TURN_RATE_DEG", "HEIGHT_BANDS",
    "HeightClass", "Scene", "SessionLog", "TickRecord", "Wall",
    "column_angles", "greedy_policy", "render_depth", "row_elevations",
    "run_session", "scripted", "step_agent",
]
