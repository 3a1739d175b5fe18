"""Symbolic score notation: domain types, parser, and canonical serializer.

A score is a line-oriented text document.  Header directives (``ropera``,
``servos``, optional ``codebook``/``profile``/``rate``/``palette``/
``coupling``/``pose``) are followed by one ``frame`` line per notation unit.
Whole lines starting with ``#`` are comments.  The full grammar lives in
docs/grammar.md.

Each frame carries a symbol vector S (one letter per servo), a motion-flag
vector M (``D`` dynamic / ``H`` hold), and a duration T in seconds.  Symbol
letters resolve to joint angles through the score's codebook; the default
codebook quantizes a full revolution into 45-degree bins named A through I,
normalized into (-180, 180] and clipped to +-175 at lookup.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum

DEFAULT_CLIP_LIMIT = 175.0
PROFILE_KINDS = ("vendor_default", "linear_smoothed", "min_jerk", "s_curve")

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_COLOR_RE = re.compile(r"^#[0-9A-Fa-f]{6}$")


class ParseError(Exception):
    """Raised for any malformed score document; carries line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class BadHeader(ParseError):
    pass


class UnknownSymbol(ParseError):
    pass


class LengthMismatch(ParseError):
    pass


class NonPositiveDuration(ParseError):
    pass


class DuplicatePoseName(ParseError):
    pass


def normalize_degrees(angle: float) -> float:
    """Map an angle in degrees into the half-open interval (-180, 180]."""
    a = angle % 360.0
    if a > 180.0:
        a -= 360.0
    return a


class MotionFlag(Enum):
    """Per-joint motion state: move to the frame's symbol, or hold the prior command."""

    DYNAMIC = "D"
    HOLD = "H"

    @classmethod
    def from_text(cls, text: str) -> "MotionFlag":
        if text in ("D", "Default", "Dynamic"):
            return cls.DYNAMIC
        if text in ("H", "Hold"):
            return cls.HOLD
        raise ValueError(f"unknown motion flag {text!r}")


@dataclass(frozen=True)
class Codebook:
    """Ordered symbol-letter to angle-degrees table with a clip limit.

    Symbols must be consecutive uppercase letters starting at 'A'.  Lookups
    clip into [-clip_limit, clip_limit] so every resolved angle is reachable.
    """

    entries: dict[str, float]
    clip_limit: float = DEFAULT_CLIP_LIMIT

    def __post_init__(self):
        if not self.entries:
            raise ValueError("codebook has no entries")
        if self.clip_limit <= 0:
            raise ValueError("clip limit must be positive")
        expected = [chr(ord("A") + i) for i in range(len(self.entries))]
        if list(self.entries) != expected:
            raise ValueError("codebook symbols must be consecutive letters starting at A")

    def clip(self, angle: float) -> float:
        return max(-self.clip_limit, min(self.clip_limit, angle))

    def lookup(self, symbol: str) -> float:
        """Resolve a symbol to its clipped angle in degrees."""
        return self.clip(self.entries[symbol])

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(self.entries)


def default_codebook() -> Codebook:
    """Nine-bin codebook: symbol k maps to k*45 degrees folded into (-180, 180].

    A=0, B=45, C=90, D=135, E=180 (clipped to 175 at lookup), F=-135,
    G=-90, H=-45, I=0.
    """
    entries = {chr(ord("A") + k): normalize_degrees(k * 45.0) for k in range(9)}
    return Codebook(entries=entries)


@dataclass(frozen=True)
class ProfileConfig:
    """Transition profile selection and timing parameters (score header data).

    ``transition_fraction`` is the share of each frame's duration spent moving
    before the dwell, used by min_jerk and s_curve.  ``v_max`` caps joint
    speed for vendor_default and paces the linear_smoothed staircase.
    """

    kind: str = "vendor_default"
    v_max: float = 90.0
    transition_fraction: float = 0.7
    step_deg: float = 2.0
    sample_rate: float = 100.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not 0 < self.transition_fraction <= 1:
            raise ValueError("transition_fraction must be in (0, 1]")
        if self.v_max <= 0 or self.step_deg <= 0 or self.sample_rate <= 0:
            raise ValueError("v_max, step_deg and sample_rate must be positive")


@dataclass(frozen=True)
class CouplingModel:
    """Linear static coupling between a driver joint and a driven joint.

    The driven servo's command is offset by ``-kappa * commanded[driver]`` so
    that the effective (mechanical) angle matches the desired one.  Indices
    are zero-based; index k addresses servo s(k+1).  kappa=0 disables it.
    """

    kappa: float = 0.0
    driver_index: int = 4
    driven_index: int = 5

    def __post_init__(self):
        if self.driver_index == self.driven_index:
            raise ValueError("driver and driven joints must differ")
        if self.driver_index < 0 or self.driven_index < 0:
            raise ValueError("joint indices must be non-negative")


@dataclass(frozen=True)
class Frame:
    """One notation unit: symbols S, motion flags M, duration T, optional label."""

    symbols: tuple[str, ...]
    flags: tuple[MotionFlag, ...]
    duration: Decimal
    label: str | None = None

    def __post_init__(self):
        if len(self.symbols) != len(self.flags):
            raise ValueError("symbol and flag vectors must have equal length")
        if not (self.duration.is_finite() and self.duration > 0):
            raise ValueError("frame duration must be a positive finite number")


@dataclass
class Score:
    """A parsed score: header configuration plus the ordered frame sequence."""

    version: int = 1
    servo_count: int = 6
    codebook: Codebook = field(default_factory=default_codebook)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    coupling: CouplingModel = field(default_factory=CouplingModel)
    palette: dict[str, str] = field(default_factory=dict)
    poses: dict[str, tuple[str, ...]] = field(default_factory=dict)
    frames: list[Frame] = field(default_factory=list)

    @property
    def total_duration(self) -> Decimal:
        """Exact sum of frame durations (no float rounding)."""
        return sum((f.duration for f in self.frames), Decimal(0))

    def validate(self) -> None:
        """Check cross-field invariants; raises ValueError on violation."""
        if not self.frames:
            raise ValueError("score must contain at least one frame")
        if self.servo_count < 1:
            raise ValueError("servo count must be at least 1")
        for name, symbols in self.poses.items():
            if len(symbols) != self.servo_count:
                raise ValueError(f"pose {name!r} has length {len(symbols)}, expected {self.servo_count}")
            for sym in symbols:
                if sym not in self.codebook.entries:
                    raise ValueError(f"pose {name!r} uses unknown symbol {sym!r}")
        for i, frame in enumerate(self.frames):
            if len(frame.symbols) != self.servo_count:
                raise ValueError(f"frame {i} has length {len(frame.symbols)}, expected {self.servo_count}")
            for sym in frame.symbols:
                if sym not in self.codebook.entries:
                    raise ValueError(f"frame {i} uses unknown symbol {sym!r}")
        if self.coupling.kappa != 0.0:
            n = self.servo_count
            if self.coupling.driver_index >= n or self.coupling.driven_index >= n:
                raise ValueError("coupling joint indices exceed servo count")


# --- parsing ---------------------------------------------------------------

_SERVO_REF_RE = re.compile(r"^s([1-9][0-9]*)$")


def _tokens(line: str):
    """Yield (start_column, token) pairs, columns 1-based."""
    for m in re.finditer(r"\S+", line):
        yield m.start() + 1, m.group(0)


def _parse_float(token: str, name: str, lineno: int, col: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise BadHeader(f"invalid number for {name}: {token!r}", lineno, col) from None
    if not math.isfinite(value):
        raise BadHeader(f"{name} must be finite", lineno, col)
    return value


def _parse_int(token: str, name: str, lineno: int, col: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise BadHeader(f"invalid integer for {name}: {token!r}", lineno, col) from None


def _split_kv(token: str, lineno: int, col: int) -> tuple[str, str]:
    key, sep, value = token.partition("=")
    if not sep or not key or not value:
        raise ParseError(f"expected key=value, got {token!r}", lineno, col)
    return key, value


def _parse_servo_ref(value: str, name: str, lineno: int, col: int) -> int:
    m = _SERVO_REF_RE.match(value)
    if not m:
        raise BadHeader(f"{name} must be a servo reference like s5, got {value!r}", lineno, col)
    return int(m.group(1)) - 1


class _HeaderState:
    """Mutable accumulator for header directives while scanning lines."""

    def __init__(self):
        self.version: int | None = None
        self.servo_count: int | None = None
        self.codebook: Codebook | None = None
        self.profile_fields: dict = {}
        self.rate_set = False
        self.coupling_fields: dict = {}
        self.palette: dict[str, str] = {}
        self.poses: dict[str, tuple[str, ...]] = {}
        self.seen: set[str] = set()


def parse_score(source: str | bytes) -> Score:
    """Parse a score document; raises a ParseError subclass on any defect.

    Accepts raw bytes (decoded as UTF-8 with replacement) so arbitrary input
    never crashes the parser: the result is always a valid Score or exactly
    one ParseError carrying line and column.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    state = _HeaderState()
    frames: list[Frame] = []

    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        toks = list(_tokens(line))
        col0, directive = toks[0]

        if state.version is None and directive != "ropera":
            raise BadHeader("document must start with a 'ropera <version>' line", lineno, col0)
        if frames and directive != "frame":
            raise BadHeader(f"directive {directive!r} not allowed after the first frame", lineno, col0)

        if directive == "ropera":
            _require_once(state, "ropera", lineno, col0)
            _require_argc(toks, 2, "ropera <version>", lineno)
            state.version = _parse_int(toks[1][1], "version", lineno, toks[1][0])
        elif directive == "servos":
            _require_once(state, "servos", lineno, col0)
            _require_argc(toks, 2, "servos <count>", lineno)
            n = _parse_int(toks[1][1], "servo count", lineno, toks[1][0])
            if n < 1:
                raise BadHeader("servo count must be at least 1", lineno, toks[1][0])
            state.servo_count = n
        elif directive == "codebook":
            _require_once(state, "codebook", lineno, col0)
            state.codebook = _parse_codebook(toks[1:], lineno)
        elif directive == "profile":
            _require_once(state, "profile", lineno, col0)
            _parse_profile(state, toks[1:], lineno)
        elif directive == "rate":
            if state.rate_set:
                raise BadHeader("sample rate set twice", lineno, col0)
            _require_argc(toks, 2, "rate <hz>", lineno)
            rate = _parse_float(toks[1][1], "rate", lineno, toks[1][0])
            if rate <= 0:
                raise BadHeader("rate must be positive", lineno, toks[1][0])
            state.profile_fields["sample_rate"] = rate
            state.rate_set = True
        elif directive == "palette":
            _require_once(state, "palette", lineno, col0)
            _parse_palette(state, toks[1:], lineno)
        elif directive == "coupling":
            _require_once(state, "coupling", lineno, col0)
            _parse_coupling(state, toks[1:], lineno)
        elif directive == "pose":
            _parse_pose(state, toks[1:], raw, lineno, col0)
        elif directive == "frame":
            frames.append(_parse_frame(state, raw, toks[1:], frames, lineno, col0))
        else:
            raise ParseError(f"unknown directive {directive!r}", lineno, col0)

    last = source.count("\n") + 1
    if state.version is None:
        raise BadHeader("document must start with a 'ropera <version>' line", 1)
    if not frames:
        raise ParseError("score has no frames", last)

    codebook = state.codebook or default_codebook()
    try:
        profile = ProfileConfig(**state.profile_fields)
        coupling = CouplingModel(**state.coupling_fields)
    except ValueError as exc:  # field combinations checked by the dataclasses
        raise BadHeader(str(exc), last) from None
    score = Score(
        version=state.version,
        servo_count=state.servo_count,
        codebook=codebook,
        profile=profile,
        coupling=coupling,
        palette=state.palette,
        poses=state.poses,
        frames=frames,
    )
    if coupling.kappa != 0.0 and (
        coupling.driver_index >= score.servo_count or coupling.driven_index >= score.servo_count
    ):
        raise BadHeader("coupling joint indices exceed servo count", last)
    return score


def _require_once(state: _HeaderState, name: str, lineno: int, col: int) -> None:
    if name in state.seen:
        raise BadHeader(f"duplicate {name!r} directive", lineno, col)
    state.seen.add(name)


def _require_argc(toks, n: int, usage: str, lineno: int) -> None:
    if len(toks) != n:
        raise ParseError(f"expected '{usage}'", lineno, toks[0][0])


def _require_servos(state: _HeaderState, lineno: int, col: int) -> int:
    if state.servo_count is None:
        raise BadHeader("'servos <count>' must appear before poses and frames", lineno, col)
    return state.servo_count


def _parse_codebook(toks, lineno: int) -> Codebook:
    entries: dict[str, float] = {}
    clip = DEFAULT_CLIP_LIMIT
    for col, tok in toks:
        key, value = _split_kv(tok, lineno, col)
        if key == "clip":
            clip = _parse_float(value, "clip", lineno, col)
            if clip <= 0:
                raise BadHeader("clip must be positive", lineno, col)
        elif len(key) == 1 and key.isupper():
            if key in entries:
                raise BadHeader(f"duplicate codebook symbol {key!r}", lineno, col)
            entries[key] = _parse_float(value, f"angle for {key}", lineno, col)
        else:
            raise BadHeader(f"bad codebook entry {tok!r}", lineno, col)
    try:
        return Codebook(entries=entries, clip_limit=clip)
    except ValueError as exc:
        raise BadHeader(str(exc), lineno, toks[0][0] if toks else 1) from None


def _parse_profile(state: _HeaderState, toks, lineno: int) -> None:
    keymap = {"kind": "kind", "v_max": "v_max", "rho": "transition_fraction",
              "step": "step_deg", "rate": "sample_rate"}
    for col, tok in toks:
        key, value = _split_kv(tok, lineno, col)
        if key not in keymap:
            raise BadHeader(f"unknown profile parameter {key!r}", lineno, col)
        if key == "kind":
            if value not in PROFILE_KINDS:
                raise BadHeader(f"unknown profile kind {value!r}", lineno, col)
            state.profile_fields["kind"] = value
        elif key == "rate":
            if state.rate_set:
                raise BadHeader("sample rate set twice", lineno, col)
            state.rate_set = True
            state.profile_fields["sample_rate"] = _positive(value, key, lineno, col)
        elif key == "rho":
            rho = _parse_float(value, key, lineno, col)
            if not 0 < rho <= 1:
                raise BadHeader("rho must be in (0, 1]", lineno, col)
            state.profile_fields["transition_fraction"] = rho
        else:
            state.profile_fields[keymap[key]] = _positive(value, key, lineno, col)


def _positive(value: str, name: str, lineno: int, col: int) -> float:
    v = _parse_float(value, name, lineno, col)
    if v <= 0:
        raise BadHeader(f"{name} must be positive", lineno, col)
    return v


def _parse_palette(state: _HeaderState, toks, lineno: int) -> None:
    for col, tok in toks:
        name, value = _split_kv(tok, lineno, col)
        if not _NAME_RE.match(name):
            raise BadHeader(f"bad color name {name!r}", lineno, col)
        if not _COLOR_RE.match(value):
            raise BadHeader(f"bad color value {value!r} (expected #RRGGBB)", lineno, col)
        if name in state.palette:
            raise BadHeader(f"duplicate color name {name!r}", lineno, col)
        state.palette[name] = value


def _parse_coupling(state: _HeaderState, toks, lineno: int) -> None:
    for col, tok in toks:
        key, value = _split_kv(tok, lineno, col)
        if key == "kappa":
            state.coupling_fields["kappa"] = _parse_float(value, "kappa", lineno, col)
        elif key == "driver":
            state.coupling_fields["driver_index"] = _parse_servo_ref(value, "driver", lineno, col)
        elif key == "driven":
            state.coupling_fields["driven_index"] = _parse_servo_ref(value, "driven", lineno, col)
        else:
            raise BadHeader(f"unknown coupling parameter {key!r}", lineno, col)


def _parse_symbols(state: _HeaderState, text: str, lineno: int, col: int) -> tuple[str, ...]:
    n = _require_servos(state, lineno, col)
    if len(text) != n:
        raise LengthMismatch(f"expected {n} symbols, got {len(text)}", lineno, col)
    codebook = state.codebook or default_codebook()
    for i, sym in enumerate(text):
        if sym not in codebook.entries:
            raise UnknownSymbol(f"symbol {sym!r} not in codebook", lineno, col + i)
    return tuple(text)


def _parse_pose(state: _HeaderState, toks, raw: str, lineno: int, col0: int) -> None:
    if len(toks) != 1:
        raise ParseError("expected 'pose <name>=<symbols>'", lineno, col0)
    col, tok = toks[0]
    name, value = _split_kv(tok, lineno, col)
    if not _NAME_RE.match(name):
        raise ParseError(f"bad pose name {name!r}", lineno, col)
    if name in state.poses:
        raise DuplicatePoseName(f"pose {name!r} defined twice", lineno, col)
    state.poses[name] = _parse_symbols(state, value, lineno, col + len(name) + 1)


def _parse_frame(state: _HeaderState, raw: str, toks, frames, lineno: int, col0: int) -> Frame:
    n = _require_servos(state, lineno, col0)
    symbols = flags = None
    duration = None
    label = None
    for col, tok in toks:
        if tok.startswith("label="):
            label = raw[col - 1 + len("label="):].strip()
            if not label:
                raise ParseError("empty label", lineno, col)
            break
        key, value = _split_kv(tok, lineno, col)
        if key == "S":
            if value.startswith("@"):
                pose = state.poses.get(value[1:])
                if pose is None:
                    raise ParseError(f"unknown pose reference {value!r}", lineno, col)
                symbols = pose
            else:
                symbols = _parse_symbols(state, value, lineno, col + 2)
        elif key == "M":
            if len(value) != n:
                raise LengthMismatch(f"expected {n} flags, got {len(value)}", lineno, col)
            try:
                flags = tuple(MotionFlag.from_text(c) for c in value)
            except ValueError:
                raise ParseError(f"motion flags must be D or H, got {value!r}", lineno, col) from None
        elif key == "T":
            try:
                duration = Decimal(value)
            except InvalidOperation:
                raise NonPositiveDuration(f"invalid duration {value!r}", lineno, col) from None
            if not duration.is_finite() or duration <= 0:
                raise NonPositiveDuration(f"duration must be positive, got {value!r}", lineno, col)
        else:
            raise ParseError(f"unknown frame field {key!r}", lineno, col)
    if symbols is None or flags is None or duration is None:
        raise ParseError("frame needs S=, M= and T= fields", lineno, col0)
    return Frame(symbols=symbols, flags=flags, duration=duration, label=label)


# --- serialization ---------------------------------------------------------

def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def serialize_score(score: Score) -> str:
    """Render a Score as canonical text; parse_score inverts it structurally.

    Output is byte-deterministic: fixed directive order, poses before frames,
    durations as their exact decimal strings.
    """
    score.validate()
    lines = [f"ropera {score.version}", f"servos {score.servo_count}"]
    cb = " ".join(f"{sym}={_fmt_num(angle)}" for sym, angle in score.codebook.entries.items())
    lines.append(f"codebook {cb} clip={_fmt_num(score.codebook.clip_limit)}")
    p = score.profile
    lines.append(
        f"profile kind={p.kind} v_max={_fmt_num(p.v_max)} rho={_fmt_num(p.transition_fraction)} "
        f"step={_fmt_num(p.step_deg)} rate={_fmt_num(p.sample_rate)}"
    )
    c = score.coupling
    if c != CouplingModel():
        lines.append(
            f"coupling kappa={_fmt_num(c.kappa)} driver=s{c.driver_index + 1} driven=s{c.driven_index + 1}"
        )
    if score.palette:
        colors = " ".join(f"{name}={value}" for name, value in score.palette.items())
        lines.append(f"palette {colors}")
    for name, symbols in score.poses.items():
        lines.append(f"pose {name}={''.join(symbols)}")
    for frame in score.frames:
        flags = "".join(f.value for f in frame.flags)
        line = f"frame S={''.join(frame.symbols)} M={flags} T={frame.duration}"
        if frame.label is not None:
            if "\n" in frame.label or frame.label != frame.label.strip():
                raise ValueError(f"label {frame.label!r} not serializable")
            line += f" label={frame.label}"
        lines.append(line)
    return "\n".join(lines) + "\n"
