"""Time parameterization: expand frame targets into sampled joint trajectories.

Each frame's duration covers a motion segment followed by a dwell at the
target, so rests land on the notated rhythm.  Four transition profiles:

``vendor_default``
    Synchronized linear interpolation.  The largest joint move sets the
    segment length at ``v_max``; every moving joint starts and arrives
    together.
``min_jerk``
    Quintic ease 10u^3 - 15u^4 + 6u^5 over a fixed fraction of the frame,
    zero velocity and acceleration at both ends.
``s_curve``
    Jerk-limited S-curve (trapezoidal acceleration with the constant
    segments collapsed), same timing as min_jerk.
``linear_smoothed``
    Fixed-angle staircase paced at ``v_max``, smoothed by a 3-sample moving
    average within the frame.

Sampling is uniform.  Frame boundaries are snapped onto the sample grid and
the boundary samples carry the exact decoded targets; frames shorter than
one sample period collapse onto a single grid point (last frame wins).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decoder import JointTargets
from .notation import ProfileConfig

_GRID_EPS = 1e-6


class DurationTooShort(Exception):
    """A frame is too short to complete its motion at the configured speed."""

    def __init__(self, frame_index: int, needed_s: float, available_s: float):
        super().__init__(
            f"frame {frame_index} needs {needed_s:.3f}s of motion but only has "
            f"{available_s:.3f}s; raise v_max or lengthen the frame"
        )
        self.frame_index = frame_index
        self.needed_s = needed_s
        self.available_s = available_s


class LengthMismatch(ValueError):
    """Trajectory and target shapes disagree."""


@dataclass
class SampledTrajectory:
    """Uniformly sampled joint angles with per-frame boundary indices."""

    timestamps: np.ndarray
    angles: np.ndarray
    frame_boundaries: list[int]
    sample_rate: float

    @property
    def sample_count(self) -> int:
        return len(self.timestamps)


@dataclass(frozen=True)
class MotionMetrics:
    timing_deviation: float  # seconds, worst frame-boundary offset
    smoothness: float        # mean squared jerk, (deg/s^3)^2
    jitter: float            # degrees, RMS residual about a 5-sample moving average


def min_jerk_position(u):
    """Normalized quintic ease: 0 at u=0, 1 at u=1, zero boundary vel/acc."""
    u = np.asarray(u, dtype=float)
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def s_curve_position(u):
    """Normalized jerk-limited S-curve: constant-jerk quarters, symmetric."""
    u = np.asarray(u, dtype=float)
    first_half = u <= 0.5
    v = np.where(first_half, u, 1.0 - u)
    w = v - 0.25
    low = (16.0 / 3.0) * v ** 3
    high = 1.0 / 12.0 + w + 4.0 * w ** 2 - (16.0 / 3.0) * w ** 3
    half = np.where(v <= 0.25, low, high)
    return np.where(first_half, half, 1.0 - half)


def _snap_index(x: float) -> int:
    """Nearest grid index for x (in samples), tolerant of float droop."""
    k = round(x)
    if abs(x - k) <= _GRID_EPS:
        return int(k)
    return int(math.floor(x))


def motion_window(config: ProfileConfig, max_delta: float, duration_s: float,
                  frame_index: int = 0) -> float:
    """Motion time within a frame for the active profile; rest is dwell.

    Raises DurationTooShort when the speed-capped profiles cannot finish
    inside the frame.
    """
    if config.kind in ("min_jerk", "s_curve"):
        return config.transition_fraction * duration_s
    if config.kind == "vendor_default":
        needed = max_delta / config.v_max
    else:  # linear_smoothed
        steps = math.ceil(max_delta / config.step_deg - _GRID_EPS)
        needed = steps * config.step_deg / config.v_max
    if needed > duration_s + 1e-12:
        raise DurationTooShort(frame_index, needed, duration_s)
    return needed


def plan(targets: list[JointTargets], config: ProfileConfig,
         start: tuple[float, ...] | None = None) -> SampledTrajectory:
    """Sample the whole schedule at config.sample_rate.

    ``start`` is the pose before the first frame; it defaults to the first
    frame's own target, which makes the opening frame a pure dwell.
    """
    if not targets:
        raise ValueError("no targets to plan")
    n_joints = len(targets[0].angles)
    for t in targets:
        if len(t.angles) != n_joints:
            raise LengthMismatch("targets disagree on joint count")
    rate = config.sample_rate
    if start is None:
        start = targets[0].angles
    if len(start) != n_joints:
        raise LengthMismatch("start pose has wrong joint count")

    durations = [t.duration_s for t in targets]
    cumulative = np.cumsum(durations)
    last_index = _snap_index(float(cumulative[-1]) * rate)
    boundaries = [_snap_index(float(c) * rate) for c in cumulative]
    timestamps = np.arange(last_index + 1) / rate

    angles = np.empty((last_index + 1, n_joints))
    angles[0] = start
    prev_pose = np.asarray(start, dtype=float)
    prev_boundary = 0
    frame_start_t = 0.0
    for i, target in enumerate(targets):
        goal = np.asarray(target.angles, dtype=float)
        delta = goal - prev_pose
        b = boundaries[i]
        seg = np.arange(prev_boundary + 1, b + 1)
        if seg.size:
            tau = seg / rate - frame_start_t
            if config.kind == "linear_smoothed":
                block = _linear_smoothed_block(
                    angles[prev_boundary], prev_pose, delta, tau, config, i, durations[i]
                )
                angles[seg] = block
            else:
                t_m = motion_window(config, float(np.max(np.abs(delta))), durations[i], i)
                if t_m <= 0.0:
                    angles[seg] = goal
                else:
                    u = np.clip(tau / t_m, 0.0, 1.0)
                    if config.kind == "min_jerk":
                        s = min_jerk_position(u)
                    elif config.kind == "s_curve":
                        s = s_curve_position(u)
                    else:
                        s = u
                    angles[seg] = prev_pose + s[:, None] * delta
        else:
            # frame shorter than one sample period: fit-check it anyway
            motion_window(config, float(np.max(np.abs(delta))), durations[i], i)
        angles[b] = goal
        prev_pose = goal
        prev_boundary = b
        frame_start_t = float(cumulative[i])
    return SampledTrajectory(
        timestamps=timestamps, angles=angles, frame_boundaries=boundaries, sample_rate=rate
    )


def _linear_smoothed_block(left_edge, q0, delta, tau, config: ProfileConfig,
                           frame_index: int, duration_s: float) -> np.ndarray:
    """Per-joint staircase positions at local times tau, 3-sample smoothed."""
    motion_window(config, float(np.max(np.abs(delta))), duration_s, frame_index)
    step_time = config.step_deg / config.v_max
    n_steps = np.ceil(np.abs(delta) / config.step_deg - _GRID_EPS).astype(int)
    n_steps = np.maximum(n_steps, 0)
    done = np.floor(tau[:, None] / step_time + _GRID_EPS)
    with np.errstate(invalid="ignore", divide="ignore"):
        fraction = np.where(n_steps > 0, np.minimum(done, n_steps) / np.maximum(n_steps, 1), 1.0)
    block = q0 + fraction * delta
    # moving average over the frame block, edge-replicated so the dwell tail
    # stays pinned at the target
    padded = np.vstack([left_edge, block])
    padded = np.pad(padded, ((1, 1), (0, 0)), mode="edge")
    kernel = np.ones(3) / 3.0
    smoothed = np.empty_like(padded[1:-1])
    for j in range(padded.shape[1]):
        smoothed[:, j] = np.convolve(padded[:, j], kernel, mode="valid")
    return smoothed[1:]


def metrics(traj: SampledTrajectory, scheduled: list[JointTargets]) -> MotionMetrics:
    """Timing deviation, mean squared jerk, and jitter for a sampled trajectory.

    Boundary times are compared against the schedule snapped to the sample
    grid, so a freshly planned trajectory scores zero deviation; a lagging
    execution log resampled onto the same grid does not.
    """
    if len(traj.frame_boundaries) != len(scheduled):
        raise LengthMismatch(
            f"{len(traj.frame_boundaries)} boundaries vs {len(scheduled)} scheduled frames"
        )
    if scheduled and traj.angles.shape[1] != len(scheduled[0].angles):
        raise LengthMismatch("trajectory and schedule disagree on joint count")

    rate = traj.sample_rate
    deviation = 0.0
    cumulative = 0.0
    for target, b in zip(scheduled, traj.frame_boundaries):
        cumulative += target.duration_s
        expected = _snap_index(cumulative * rate) / rate
        deviation = max(deviation, abs(float(traj.timestamps[b]) - expected))

    return MotionMetrics(
        timing_deviation=deviation,
        smoothness=mean_squared_jerk(traj.angles, rate),
        jitter=jitter_rms(traj.angles, window=5),
    )


def mean_squared_jerk(angles: np.ndarray, rate: float) -> float:
    """Mean squared third derivative via central finite differences."""
    if len(angles) < 5:
        return 0.0
    dt = 1.0 / rate
    jerk = (angles[4:] - 2.0 * angles[3:-1] + 2.0 * angles[1:-3] - angles[:-4]) / (2.0 * dt ** 3)
    return float(np.mean(jerk ** 2))


def jitter_rms(angles: np.ndarray, window: int = 5) -> float:
    """RMS residual after removing a centered moving average per joint."""
    if len(angles) < 2:
        return 0.0
    half = window // 2
    padded = np.pad(angles, ((half, half), (0, 0)), mode="edge")
    kernel = np.ones(window) / window
    residual = np.empty_like(angles)
    for j in range(angles.shape[1]):
        residual[:, j] = angles[:, j] - np.convolve(padded[:, j], kernel, mode="valid")
    return float(np.sqrt(np.mean(residual ** 2)))
