import random
from decimal import Decimal

import pytest

from ropera.decoder import JointTargets, decode_frame, decode_score, effective_angles
from ropera.notation import (
    CouplingModel,
    Frame,
    MotionFlag,
    default_codebook,
    parse_score,
)

from helpers import random_score

D = MotionFlag.DYNAMIC
H = MotionFlag.HOLD
CB = default_codebook()


def frame(symbols, flags, t="1.0", label=None):
    return Frame(tuple(symbols), tuple(flags), Decimal(t), label)


def test_listing_frame_decodes_to_expected_angles():
    f = frame("ABHHAD", [D] * 6, "2.0")
    out = decode_frame(f, None, CB, CouplingModel(), home=(0.0,) * 6)
    assert out.angles == (0.0, 45.0, -45.0, -45.0, 0.0, 135.0)
    assert out.duration_s == 2.0


def test_all_hold_keeps_previous_angles():
    prev = JointTargets(angles=(10.0,) * 6, frame_index=0, duration_s=1.0)
    out = decode_frame(frame("AAAAAA", [H] * 6), prev, CB, frame_index=1)
    assert out.angles == (10.0,) * 6


def test_hold_without_prev_uses_home():
    out = decode_frame(frame("BB", [H, D]), None, CB, home=(7.5, 0.0))
    assert out.angles == (7.5, 45.0)


def test_hold_without_prev_defaults_to_zero_home():
    out = decode_frame(frame("B", [H]), None, CB)
    assert out.angles == (0.0,)


def test_compensation_algebra():
    # desired s6=90 with s5 commanded at 40 under kappa=0.5 -> command 70
    cb = default_codebook()
    coupling = CouplingModel(kappa=0.5, driver_index=4, driven_index=5)
    prev = JointTargets(angles=(0.0, 0.0, 0.0, 0.0, 40.0, 0.0), frame_index=0, duration_s=1.0)
    f = frame("AAAAHC", [H, H, H, H, H, D])
    out = decode_frame(f, prev, cb, coupling, frame_index=1)
    assert out.angles[4] == 40.0
    assert out.angles[5] == pytest.approx(70.0)
    assert effective_angles(out, coupling)[5] == pytest.approx(90.0)


def test_kappa_zero_is_identity():
    f = frame("ABHHAD", [D] * 6)
    plain = decode_frame(f, None, CB, CouplingModel())
    coupled = decode_frame(f, None, CB, CouplingModel(kappa=0.0))
    assert plain.angles == coupled.angles


def test_compensation_correctness_random():
    rng = random.Random(20)
    for kappa in (0.0, 0.25, 0.5, 1.0):
        coupling = CouplingModel(kappa=kappa, driver_index=4, driven_index=5)
        for _ in range(200):
            symbols = [rng.choice("ABHI") for _ in range(6)]  # small angles, no clipping
            f = frame(symbols, [D] * 6)
            out = decode_frame(f, None, CB, coupling)
            desired = CB.lookup(symbols[5])
            assert abs(effective_angles(out, coupling)[5] - desired) < 1e-9


def test_compensation_clipping_documented_case():
    # compensated command would be -220, clips to -175; the effective angle
    # then misses desired by exactly the clipped amount
    coupling = CouplingModel(kappa=1.0, driver_index=4, driven_index=5)
    f = frame("AAAADH", [D] * 6)  # s5 -> D=135, s6 -> H=-45; compensated -180
    out = decode_frame(f, None, CB, coupling)
    assert out.angles[5] == -175.0
    effective = effective_angles(out, coupling)[5]
    assert effective - CB.lookup("H") == pytest.approx(-175.0 - (-180.0))


def test_decode_rejects_bad_coupling_indices():
    f = frame("AB", [D, D])
    with pytest.raises(ValueError):
        decode_frame(f, None, CB, CouplingModel(kappa=0.5, driver_index=4, driven_index=5))
    # disabled coupling ignores indices
    decode_frame(f, None, CB, CouplingModel(kappa=0.0, driver_index=4, driven_index=5))


def test_decode_score_singleton():
    score = parse_score("ropera 1\nservos 6\nframe S=ABHHAD M=DDDDDD T=2.0\n")
    targets = decode_score(score, home=(0.0,) * 6)
    assert len(targets) == 1
    assert targets[0].frame_index == 0
    assert targets[0].angles == (0.0, 45.0, -45.0, -45.0, 0.0, 135.0)


def test_decode_score_hold_propagation():
    doc = "ropera 1\nservos 3\nframe S=BCD M=DDD T=1\nframe S=AAA M=HHH T=1\n"
    targets = decode_score(parse_score(doc))
    assert targets[0].angles == targets[1].angles == (45.0, 90.0, 135.0)


def test_decode_score_twelve_frames():
    doc = "ropera 1\nservos 6\n" + "frame S=ABHHAD M=DDDDDD T=1.5\n" * 12
    score = parse_score(doc)
    targets = decode_score(score)
    assert len(targets) == 12
    assert [t.frame_index for t in targets] == list(range(12))
    assert sum(t.duration_s for t in targets) == pytest.approx(float(score.total_duration))


def test_decode_score_uses_header_coupling():
    doc = (
        "ropera 1\nservos 6\ncoupling kappa=0.5 driver=s5 driven=s6\n"
        "frame S=AAAACC M=DDDDDD T=1\n"
    )
    targets = decode_score(parse_score(doc))
    assert targets[0].angles[5] == pytest.approx(90.0 - 0.5 * 90.0)


def test_clipping_invariant_on_random_scores():
    rng = random.Random(21)
    for _ in range(100):
        score = random_score(rng)
        for t in decode_score(score):
            for a in t.angles:
                assert abs(a) <= score.codebook.clip_limit


def test_hold_stability_on_random_scores():
    rng = random.Random(22)
    for _ in range(100):
        score = random_score(rng)
        targets = decode_score(score)
        for i in range(1, len(targets)):
            for j, flag in enumerate(score.frames[i].flags):
                if flag is H:
                    assert targets[i].angles[j] == targets[i - 1].angles[j]
