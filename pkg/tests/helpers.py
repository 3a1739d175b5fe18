"""Shared test utilities: seeded random score generation."""

import random
from decimal import Decimal

from ropera.notation import (
    Codebook,
    CouplingModel,
    Frame,
    MotionFlag,
    ProfileConfig,
    Score,
    normalize_degrees,
)

SYMBOLS = "ABCDEFGHI"
PROFILE_KINDS = ("vendor_default", "linear_smoothed", "min_jerk", "s_curve")


def random_frame(rng: random.Random, n: int, symbols: str = SYMBOLS) -> Frame:
    syms = tuple(rng.choice(symbols) for _ in range(n))
    flags = tuple(rng.choice((MotionFlag.DYNAMIC, MotionFlag.HOLD)) for _ in range(n))
    # durations on a centi-second grid, 0.05s .. 4.00s
    duration = Decimal(rng.randint(5, 400)) / Decimal(100)
    label = f"mark-{rng.randint(0, 99)}" if rng.random() < 0.3 else None
    return Frame(symbols=syms, flags=flags, duration=duration, label=label)


def random_score(rng: random.Random, max_servos: int = 8, max_frames: int = 6,
                 servo_count: int | None = None) -> Score:
    n = servo_count if servo_count is not None else rng.randint(1, max_servos)
    if rng.random() < 0.15:
        n_syms = rng.randint(2, 9)
        entries = {chr(ord("A") + k): normalize_degrees(k * rng.choice([15.0, 30.0, 45.0]))
                   for k in range(n_syms)}
        codebook = Codebook(entries=entries, clip_limit=rng.choice([160.0, 175.0]))
    else:
        codebook = Codebook(entries={chr(ord("A") + k): normalize_degrees(k * 45.0) for k in range(9)})
    symbols = "".join(codebook.entries)

    profile = ProfileConfig(
        kind=rng.choice(PROFILE_KINDS),
        v_max=rng.choice([45.0, 90.0, 180.0]),
        transition_fraction=rng.randint(1, 10) / 10,
        step_deg=rng.choice([1.0, 2.0, 5.0]),
        sample_rate=rng.choice([50.0, 100.0, 200.0]),
    )
    if n >= 2 and rng.random() < 0.3:
        driver, driven = rng.sample(range(n), 2)
        coupling = CouplingModel(kappa=rng.choice([0.25, 0.5, 1.0]), driver_index=driver, driven_index=driven)
    else:
        coupling = CouplingModel()

    palette = {}
    if rng.random() < 0.3:
        for i in range(rng.randint(1, 3)):
            palette[f"color_{i}"] = "#%06X" % rng.randrange(0, 1 << 24)
    poses = {}
    for i in range(rng.randint(0, 3)):
        poses[f"pose_{i}"] = tuple(rng.choice(symbols) for _ in range(n))

    frames = [random_frame(rng, n, symbols) for _ in range(rng.randint(1, max_frames))]
    return Score(
        version=rng.randint(1, 3),
        servo_count=n,
        codebook=codebook,
        profile=profile,
        coupling=coupling,
        palette=palette,
        poses=poses,
        frames=frames,
    )
