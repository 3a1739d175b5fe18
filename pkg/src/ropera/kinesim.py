"""Forward kinematics over sampled trajectories.

A chain is a list of standard Denavit-Hartenberg rows (a, alpha, d,
theta_offset) plus named markers, each fixed to a joint frame with a local
offset.  The shipped default is shaped like a small desktop 6-channel arm
with roughly 280 mm of reach; its link lengths are NOT measurements of any
particular product and can be replaced via a chain description file (see
docs/file-formats.md).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .trajectory import LengthMismatch, SampledTrajectory


@dataclass(frozen=True)
class DHRow:
    a: float            # link length, mm
    alpha: float        # link twist, rad
    d: float            # link offset, mm
    theta_offset: float  # joint zero offset, rad


@dataclass(frozen=True)
class Marker:
    name: str
    joint: int                       # 1-based joint frame the marker rides on
    offset: tuple[float, float, float]  # mm, in that joint's frame


@dataclass(frozen=True)
class KinematicChain:
    rows: tuple[DHRow, ...]
    markers: tuple[Marker, ...]

    def __post_init__(self):
        for row in self.rows:
            for v in (row.a, row.alpha, row.d, row.theta_offset):
                if not math.isfinite(v):
                    raise ValueError("chain parameters must be finite")
        names = [m.name for m in self.markers]
        if len(set(names)) != len(names):
            raise ValueError("marker names must be unique")
        for m in self.markers:
            if not 1 <= m.joint <= len(self.rows):
                raise ValueError(f"marker {m.name!r} rides on joint {m.joint}, chain has {len(self.rows)}")

    @property
    def joint_count(self) -> int:
        return len(self.rows)


def default_chain() -> KinematicChain:
    """Six-channel desktop-arm stand-in (not calibrated to real hardware)."""
    half_pi = math.pi / 2
    rows = (
        DHRow(a=0.0, alpha=half_pi, d=132.0, theta_offset=0.0),
        DHRow(a=110.0, alpha=0.0, d=0.0, theta_offset=0.0),
        DHRow(a=96.0, alpha=0.0, d=0.0, theta_offset=0.0),
        DHRow(a=0.0, alpha=half_pi, d=66.0, theta_offset=0.0),
        DHRow(a=0.0, alpha=-half_pi, d=73.0, theta_offset=0.0),
        DHRow(a=0.0, alpha=0.0, d=44.0, theta_offset=0.0),
    )
    markers = (
        Marker("j4", 4, (0.0, 0.0, 0.0)),
        Marker("j5", 5, (0.0, 0.0, 0.0)),
        Marker("j6", 6, (0.0, 0.0, 0.0)),
        Marker("tip", 6, (0.0, 0.0, 30.0)),
    )
    return KinematicChain(rows=rows, markers=markers)


def _dh_matrix(row: DHRow, theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(row.alpha), math.sin(row.alpha)
    return np.array([
        [ct, -st * ca, st * sa, row.a * ct],
        [st, ct * ca, -ct * sa, row.a * st],
        [0.0, sa, ca, row.d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def fk(chain: KinematicChain, angles_deg) -> np.ndarray:
    """Marker positions (n_markers, 3) in mm for one joint configuration."""
    if len(angles_deg) != chain.joint_count:
        raise LengthMismatch(f"got {len(angles_deg)} angles for {chain.joint_count} joints")
    frames = []
    transform = np.eye(4)
    for row, angle in zip(chain.rows, angles_deg):
        transform = transform @ _dh_matrix(row, math.radians(angle) + row.theta_offset)
        frames.append(transform)
    out = np.empty((len(chain.markers), 3))
    for i, marker in enumerate(chain.markers):
        local = np.array([*marker.offset, 1.0])
        out[i] = (frames[marker.joint - 1] @ local)[:3]
    return out


@dataclass
class CartesianTrace:
    """Sample-aligned marker paths produced by running fk over a trajectory."""

    timestamps: np.ndarray
    positions: np.ndarray  # (n_samples, n_markers, 3), mm
    marker_names: tuple[str, ...]

    @property
    def sample_count(self) -> int:
        return len(self.timestamps)


def trace(chain: KinematicChain, traj: SampledTrajectory) -> CartesianTrace:
    """Forward kinematics at every sample of a trajectory."""
    if traj.angles.shape[1] != chain.joint_count:
        raise LengthMismatch(
            f"trajectory has {traj.angles.shape[1]} joints, chain has {chain.joint_count}"
        )
    positions = np.empty((len(traj.angles), len(chain.markers), 3))
    for k, angles in enumerate(traj.angles):
        positions[k] = fk(chain, angles)
    return CartesianTrace(
        timestamps=traj.timestamps,
        positions=positions,
        marker_names=tuple(m.name for m in chain.markers),
    )


# --- chain description file --------------------------------------------------

_OFFSET_RE = re.compile(r"^-?[\d.]+,-?[\d.]+,-?[\d.]+$")


def load_chain(path: str | Path) -> KinematicChain:
    """Read a chain description file: one ``joint`` line per DH row, then
    ``marker`` lines.  Lengths in mm, angles in radians."""
    return parse_chain(Path(path).read_text(), origin=str(path))


def parse_chain(text: str, origin: str = "<string>") -> KinematicChain:
    rows: list[DHRow] = []
    markers: list[Marker] = []
    path = origin
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind, fields = parts[0], dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        try:
            if kind == "joint":
                rows.append(DHRow(
                    a=float(fields.get("a", 0.0)),
                    alpha=float(fields.get("alpha", 0.0)),
                    d=float(fields.get("d", 0.0)),
                    theta_offset=float(fields.get("offset", 0.0)),
                ))
            elif kind == "marker":
                offset_text = fields.get("offset", "0,0,0")
                if not _OFFSET_RE.match(offset_text):
                    raise ValueError(f"bad offset {offset_text!r}")
                ox, oy, oz = (float(v) for v in offset_text.split(","))
                markers.append(Marker(
                    name=fields["name"],
                    joint=int(fields["joint"]),
                    offset=(ox, oy, oz),
                ))
            else:
                raise ValueError(f"unknown line kind {kind!r}")
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no joint lines")
    if not markers:
        markers.append(Marker("tip", len(rows), (0.0, 0.0, 0.0)))
    return KinematicChain(rows=tuple(rows), markers=tuple(markers))
