"""Command-stream records and the newline-delimited wire format.

One record per frame, JSON-shaped with a fixed field order (documented in
docs/protocol.md):

    {"seq":0,"t":0.0,"angles":[0.0,45.0,-45.0,-45.0,0.0,135.0],"speed":100,"last":false}

``t`` is the scheduled start of the frame in seconds from stream start.
``speed`` is a 1..100 hint for vendor APIs that take a speed argument: the
fraction of full speed (v_max) needed to finish the frame's largest joint
move inside the active profile's motion window.  Angles are hard-limited to
+-175 degrees on the wire regardless of the score's codebook.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal

from .decoder import decode_score
from .notation import CouplingModel, ProfileConfig, Score
from .trajectory import motion_window

WIRE_CLIP_LIMIT = 175.0
FIELD_ORDER = ("seq", "t", "angles", "speed", "last")


@dataclass(frozen=True)
class CommandMessage:
    seq: int
    t: float
    angles: tuple[float, ...]
    speed: int | None
    last: bool

    def __post_init__(self):
        if self.seq < 0:
            raise ValueError("seq must be non-negative")
        if self.t < 0:
            raise ValueError("t must be non-negative")
        for a in self.angles:
            if abs(a) > WIRE_CLIP_LIMIT:
                raise ValueError(f"angle {a} exceeds the +-{WIRE_CLIP_LIMIT} wire limit")
        if self.speed is not None and not 1 <= self.speed <= 100:
            raise ValueError("speed must be in 1..100")


def encode_record(msg: CommandMessage) -> str:
    payload = {
        "seq": msg.seq,
        "t": msg.t,
        "angles": list(msg.angles),
        "speed": msg.speed,
        "last": msg.last,
    }
    return json.dumps(payload, separators=(",", ":"))


def decode_record(line: str) -> CommandMessage:
    """Parse and validate one wire record; raises ValueError on any defect."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValueError("record must be a JSON object")
    missing = [k for k in FIELD_ORDER if k not in raw]
    if missing:
        raise ValueError(f"missing fields: {', '.join(missing)}")
    if not isinstance(raw["seq"], int) or isinstance(raw["seq"], bool):
        raise ValueError("seq must be an integer")
    if not isinstance(raw["angles"], list) or not all(
        isinstance(a, (int, float)) and not isinstance(a, bool) for a in raw["angles"]
    ):
        raise ValueError("angles must be a list of numbers")
    if not isinstance(raw["last"], bool):
        raise ValueError("last must be a boolean")
    speed = raw["speed"]
    if speed is not None and (not isinstance(speed, int) or isinstance(speed, bool)):
        raise ValueError("speed must be an integer or null")
    return CommandMessage(
        seq=raw["seq"],
        t=float(raw["t"]),
        angles=tuple(float(a) for a in raw["angles"]),
        speed=speed,
        last=raw["last"],
    )


def _speed_hint(config: ProfileConfig, max_delta: float, duration_s: float, frame_index: int) -> int:
    window = motion_window(config, max_delta, duration_s, frame_index)
    if window <= 0.0:
        return 1
    needed = max_delta / config.v_max
    return max(1, min(100, round(100.0 * needed / window)))


def build_stream(
    score: Score,
    coupling: CouplingModel | None = None,
    home: tuple[float, ...] | None = None,
    profile_kind: str | None = None,
) -> list[CommandMessage]:
    """Compile a score into one CommandMessage per frame.

    Frame start times come from the exact decimal duration sum.  Raises
    DurationTooShort (via the motion window) when the vendor_default or
    linear_smoothed profile cannot finish a frame in time.
    """
    if home is None:
        home = (0.0,) * score.servo_count
    targets = decode_score(score, coupling, home)
    config = score.profile
    if profile_kind is not None and profile_kind != config.kind:
        config = ProfileConfig(
            kind=profile_kind,
            v_max=config.v_max,
            transition_fraction=config.transition_fraction,
            step_deg=config.step_deg,
            sample_rate=config.sample_rate,
        )
    messages = []
    elapsed = Decimal(0)
    prev = tuple(home)
    for i, target in enumerate(targets):
        max_delta = max((abs(a - b) for a, b in zip(target.angles, prev)), default=0.0)
        messages.append(CommandMessage(
            seq=i,
            t=float(elapsed),
            angles=target.angles,
            speed=_speed_hint(config, max_delta, target.duration_s, i),
            last=(i == len(targets) - 1),
        ))
        elapsed += score.frames[i].duration
        prev = target.angles
    return messages


def stream_text(messages: list[CommandMessage]) -> str:
    """The canonical wire text: one record per line, trailing newline."""
    return "\n".join(encode_record(m) for m in messages) + "\n"
