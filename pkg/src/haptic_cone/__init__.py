"""Deterministic simulator and trial harness for ultrasonic haptic-cone
hand guidance: acoustic focusing, circle rendering by a moving focus, the
guidance-cone geometry, a latency-aware simulated participant, the full
experiment protocol and a human-in-the-loop trial service."""

from .acoustics import Medium, FieldSample, field_at, focal_spot_width, focus_phases
from .agent import AgentParams, PalmModel, Percept, PolicyResult, perceive, run_policy
from .array_geometry import (ArrayLayout, TransducerArray, UnitGrid, Workspace,
                             array_center, build_array, default_layout,
                             default_workspace, load_layout, tiled_layout)
from .cone import CrossSection, DegenerateConeError, GuidanceCone
from .experiment import (ExperimentConfig, Goal, SetSummary, TrialResult,
                         generate_goals, load_config, run_set)
from .stm import CircleStimulus, FocusSchedule, focus_at_time, sample_circle
from .tracking import HandSample, MarkerSet, SensorModel, Trajectory, centroid, observe

__version__ = "0.1.0"
