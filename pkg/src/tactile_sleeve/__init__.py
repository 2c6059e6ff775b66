"""Depth-camera to vibrotactile sleeve pipeline.

Pure mapping from depth frames to 5x5 motor grids, a bit-exact wire
codec with a PWM driver-chain emulator, a vibration pattern lab with
trial scoring, a 2.5D raycast navigation simulator, and a line-JSON
session service tying them together.
"""

from .mapping import (Aggregation, CellDepths, DepthFrame,
                      FrameTooSmallError, MappingConfig, Mode, MotorGrid,
                      downsample, map_intensity, process_frame)
from .patterns import (AccuracyTable, Axis, Direction, Pattern,
                       PatternClass, Simultaneity, TrialRecord, TrialResult,
                       Verdict, aggregate_trials, builtin_patterns, classify,
                       schedule, score_trial)
from .session import RunSummary, SessionService, aggregate_runs
from .sim import (AgentState, CameraModel, HeightClass, Scene, SessionLog,
                  Wall, greedy_policy, render_depth, run_session, step_agent)
from .wire import (DriverState, decode_wireframe, emulate_driver,
                   encode_wireframe, pack_tlc5947, split_channels)

__version__ = "0.1.0"
