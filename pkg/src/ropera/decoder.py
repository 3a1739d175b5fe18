"""Frame decoding: symbols to commanded joint angles.

Each frame resolves per joint: dynamic joints look their symbol up in the
codebook (clipped), held joints keep the previous commanded angle (or the
home pose before any frame ran).  When a coupling model with nonzero kappa
is active, the driven joint's command is offset to cancel the mechanical
interaction from the driver joint:

    commanded[driven] = desired[driven] - kappa * commanded[driver]

so the effective angle, commanded[driven] + kappa * commanded[driver],
equals the desired one whenever the compensated command is not clipped.
The offset applies only when the driven joint is dynamic; held joints never
change between frames.
"""

from __future__ import annotations

from dataclasses import dataclass

from .notation import Codebook, CouplingModel, Frame, MotionFlag, Score

__all__ = ["JointTargets", "CouplingModel", "decode_frame", "decode_score", "effective_angles"]


@dataclass(frozen=True)
class JointTargets:
    """Commanded angles (degrees) for one frame, after decoding."""

    angles: tuple[float, ...]
    frame_index: int
    duration_s: float


def _check_coupling(coupling: CouplingModel, n: int) -> None:
    if coupling.kappa == 0.0:
        return
    if coupling.driver_index >= n or coupling.driven_index >= n:
        raise ValueError(f"coupling joints (s{coupling.driver_index + 1}, s{coupling.driven_index + 1}) "
                         f"exceed servo count {n}")


def decode_frame(
    frame: Frame,
    prev: JointTargets | None,
    codebook: Codebook,
    coupling: CouplingModel | None = None,
    home: tuple[float, ...] | None = None,
    frame_index: int = 0,
) -> JointTargets:
    """Resolve one frame to commanded angles, folding in the previous targets."""
    n = len(frame.symbols)
    coupling = coupling or CouplingModel()
    _check_coupling(coupling, n)
    if home is None:
        home = (0.0,) * n
    if len(home) != n:
        raise ValueError(f"home pose has length {len(home)}, expected {n}")
    base = prev.angles if prev is not None else home

    angles = [
        base[j] if flag is MotionFlag.HOLD else codebook.lookup(sym)
        for j, (sym, flag) in enumerate(zip(frame.symbols, frame.flags))
    ]
    if coupling.kappa != 0.0 and frame.flags[coupling.driven_index] is MotionFlag.DYNAMIC:
        compensated = angles[coupling.driven_index] - coupling.kappa * angles[coupling.driver_index]
        angles[coupling.driven_index] = codebook.clip(compensated)
    return JointTargets(angles=tuple(angles), frame_index=frame_index, duration_s=float(frame.duration))


def decode_score(
    score: Score,
    coupling: CouplingModel | None = None,
    home: tuple[float, ...] | None = None,
) -> list[JointTargets]:
    """Decode every frame in order, threading held angles through the sequence.

    The coupling model defaults to the score header's; pass one explicitly to
    override.
    """
    if coupling is None:
        coupling = score.coupling
    targets: list[JointTargets] = []
    prev = None
    for i, frame in enumerate(score.frames):
        prev = decode_frame(frame, prev, score.codebook, coupling, home, frame_index=i)
        targets.append(prev)
    return targets


def effective_angles(targets: JointTargets, coupling: CouplingModel) -> tuple[float, ...]:
    """Mechanical angles implied by commanded ones under the coupling model."""
    if coupling.kappa == 0.0:
        return targets.angles
    angles = list(targets.angles)
    angles[coupling.driven_index] += coupling.kappa * angles[coupling.driver_index]
    return tuple(angles)
