"""Posture vocabulary and cross-morphology score remapping.

The built-in vocabulary ships as an editable asset file using the score DSL's
``pose`` lines, extended with two asset-only directives: ``category`` and
``provenance`` apply to every pose line that follows them.  Joint values for
the shipped poses are hand-authored approximations, not captured data; the
provenance notes say so.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .notation import Frame, MotionFlag, Score, default_codebook

CATEGORIES = ("upper_limb", "full_body")
VOCABULARY_ASSET = "vocabulary.ropera"


class AssetMissing(Exception):
    """A required data asset could not be located or read."""


class IndexOutOfRange(ValueError):
    """A remap rule references a source servo outside the score."""


@dataclass(frozen=True)
class PosturePrimitive:
    name: str
    category: str
    symbols: tuple[str, ...]
    provenance: str


@dataclass(frozen=True)
class CopyFrom:
    """Remap rule: target channel copies symbol and flag from a source index."""

    source: int


@dataclass(frozen=True)
class Constant:
    """Remap rule: target channel pins a fixed symbol (dynamic once, then held)."""

    symbol: str


@dataclass(frozen=True)
class RemapSpec:
    """One rule per target channel; rules are CopyFrom or Constant."""

    target_servo_count: int
    rules: tuple

    def __post_init__(self):
        if self.target_servo_count < 1:
            raise ValueError("target servo count must be at least 1")
        if len(self.rules) != self.target_servo_count:
            raise ValueError("need exactly one rule per target servo")

    @classmethod
    def identity(cls, n: int) -> "RemapSpec":
        return cls(target_servo_count=n, rules=tuple(CopyFrom(i) for i in range(n)))


def asset_path(name: str) -> Path:
    """Resolve a named asset: $ROPERA_HOME first, then the packaged data."""
    home = os.environ.get("ROPERA_HOME")
    if home:
        candidate = Path(home) / name
        if candidate.exists():
            return candidate
    packaged = resources.files("ropera").joinpath("assets").joinpath(name)
    try:
        with resources.as_file(packaged) as p:
            if p.exists():
                return Path(p)
    except (FileNotFoundError, ModuleNotFoundError):
        pass
    raise AssetMissing(f"asset {name!r} not found (checked ROPERA_HOME and packaged data)")


_POSE_RE = re.compile(r"^pose\s+([A-Za-z_][A-Za-z0-9_.\-]*)=([A-Z]+)$")


def load_vocabulary(path: str | Path | None = None) -> list[PosturePrimitive]:
    """Read a vocabulary asset file into posture primitives, in file order."""
    if path is None:
        path = asset_path(VOCABULARY_ASSET)
    path = Path(path)
    if not path.exists():
        raise AssetMissing(f"vocabulary asset {path} does not exist")
    codebook = default_codebook()
    servo_count = None
    category = "upper_limb"
    provenance = "unspecified"
    primitives: list[PosturePrimitive] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        directive = line.split(None, 1)[0]
        if directive == "servos":
            servo_count = int(line.split()[1])
        elif directive == "category":
            category = line.split(None, 1)[1].strip()
            if category not in CATEGORIES:
                raise ValueError(f"{path}:{lineno}: unknown category {category!r}")
        elif directive == "provenance":
            provenance = line.split(None, 1)[1].strip()
        elif directive == "pose":
            m = _POSE_RE.match(line)
            if not m:
                raise ValueError(f"{path}:{lineno}: malformed pose line")
            name, symbols = m.group(1), tuple(m.group(2))
            if servo_count is not None and len(symbols) != servo_count:
                raise ValueError(f"{path}:{lineno}: pose {name!r} has wrong length")
            if any(s not in codebook.entries for s in symbols):
                raise ValueError(f"{path}:{lineno}: pose {name!r} uses unknown symbols")
            if any(p.name == name for p in primitives):
                raise ValueError(f"{path}:{lineno}: duplicate pose name {name!r}")
            primitives.append(PosturePrimitive(name, category, symbols, provenance))
        else:
            raise ValueError(f"{path}:{lineno}: unknown directive {directive!r}")
    return primitives


def builtin_vocabulary() -> list[PosturePrimitive]:
    """The 15 shipped posture primitives (12 upper-limb, 3 full-body)."""
    return load_vocabulary()


_RULE_RE = re.compile(r"^s([1-9][0-9]*)$")


def parse_remap_rules(items: list[str]) -> RemapSpec:
    """Build a RemapSpec from rule strings: ``sN`` copies source servo N
    (1-based), ``=X`` pins the constant symbol X."""
    rules = []
    for item in items:
        item = item.strip()
        if item.startswith("=") and len(item) == 2 and item[1].isupper():
            rules.append(Constant(item[1]))
            continue
        m = _RULE_RE.match(item)
        if not m:
            raise ValueError(f"bad remap rule {item!r}: use sN or =X")
        rules.append(CopyFrom(int(m.group(1)) - 1))
    return RemapSpec(target_servo_count=len(rules), rules=tuple(rules))


def _remap_vector(vector: tuple, rules, constant_value) -> tuple:
    out = []
    for rule in rules:
        if isinstance(rule, CopyFrom):
            out.append(vector[rule.source])
        else:
            out.append(constant_value(rule))
    return tuple(out)


def remap_score(score: Score, spec: RemapSpec) -> Score:
    """Rebuild a score for a different servo count without touching its timing.

    CopyFrom rules pull the source channel's symbol and flag per frame;
    Constant rules emit the fixed symbol, dynamic in the first frame and held
    afterwards.  Named poses are remapped the same way (symbols only).
    """
    for rule in spec.rules:
        if isinstance(rule, CopyFrom):
            if not 0 <= rule.source < score.servo_count:
                raise IndexOutOfRange(f"source index {rule.source} out of range for {score.servo_count} servos")
        elif isinstance(rule, Constant):
            if rule.symbol not in score.codebook.entries:
                raise IndexOutOfRange(f"constant symbol {rule.symbol!r} not in codebook")
        else:
            raise TypeError(f"unknown remap rule {rule!r}")

    frames = []
    for i, frame in enumerate(score.frames):
        symbols = _remap_vector(frame.symbols, spec.rules, lambda r: r.symbol)
        flags = _remap_vector(
            frame.flags, spec.rules,
            lambda r: MotionFlag.DYNAMIC if i == 0 else MotionFlag.HOLD,
        )
        frames.append(Frame(symbols=symbols, flags=flags, duration=frame.duration, label=frame.label))
    poses = {
        name: _remap_vector(symbols, spec.rules, lambda r: r.symbol)
        for name, symbols in score.poses.items()
    }
    coupling = score.coupling
    if coupling.kappa != 0.0 and (
        coupling.driver_index >= spec.target_servo_count
        or coupling.driven_index >= spec.target_servo_count
    ):
        coupling = replace(coupling, kappa=0.0)
    return Score(
        version=score.version,
        servo_count=spec.target_servo_count,
        codebook=score.codebook,
        profile=score.profile,
        coupling=coupling,
        palette=dict(score.palette),
        poses=poses,
        frames=frames,
    )
