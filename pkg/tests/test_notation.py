import random
from decimal import Decimal

import pytest

from ropera.notation import (
    BadHeader,
    Codebook,
    CouplingModel,
    DuplicatePoseName,
    Frame,
    LengthMismatch,
    MotionFlag,
    NonPositiveDuration,
    ParseError,
    Score,
    UnknownSymbol,
    default_codebook,
    normalize_degrees,
    parse_score,
    serialize_score,
)

from helpers import random_score

LISTING_DOC = "ropera 1\nservos 6\nframe S=ABHHAD M=DDDDDD T=2.0\n"


def brute_normalize(angle):
    # independent oracle: walk the angle into (-180, 180] by whole turns
    while angle > 180.0:
        angle -= 360.0
    while angle <= -180.0:
        angle += 360.0
    return angle


def test_default_codebook_matches_normalization_oracle():
    cb = default_codebook()
    assert list(cb.entries) == list("ABCDEFGHI")
    for k, sym in enumerate("ABCDEFGHI"):
        assert cb.entries[sym] == brute_normalize(k * 45.0)


def test_default_codebook_table():
    cb = default_codebook()
    assert cb.entries == {
        "A": 0.0, "B": 45.0, "C": 90.0, "D": 135.0, "E": 180.0,
        "F": -135.0, "G": -90.0, "H": -45.0, "I": 0.0,
    }


def test_lookup_clips_to_limit():
    cb = default_codebook()
    assert cb.entries["E"] == 180.0
    assert cb.lookup("E") == 175.0
    assert cb.lookup("H") == -45.0
    for sym in cb.entries:
        assert abs(cb.lookup(sym)) <= cb.clip_limit


def test_normalize_degrees_edges():
    assert normalize_degrees(180.0) == 180.0
    assert normalize_degrees(360.0) == 0.0
    assert normalize_degrees(-180.0) == 180.0
    assert normalize_degrees(315.0) == -45.0


def test_codebook_rejects_non_consecutive_symbols():
    with pytest.raises(ValueError):
        Codebook(entries={"A": 0.0, "C": 90.0})
    with pytest.raises(ValueError):
        Codebook(entries={"B": 45.0})


def test_parse_listing_frame():
    score = parse_score(LISTING_DOC)
    assert score.servo_count == 6
    assert len(score.frames) == 1
    frame = score.frames[0]
    assert frame.symbols == tuple("ABHHAD")
    assert frame.flags == (MotionFlag.DYNAMIC,) * 6
    assert frame.duration == Decimal("2.0")


def test_parse_minimal_document():
    score = parse_score("ropera 1\nservos 1\nframe S=A M=D T=1.0\n")
    assert score.servo_count == 1
    assert score.frames[0].symbols == ("A",)


def test_length_mismatch_reported_with_position():
    with pytest.raises(LengthMismatch) as exc:
        parse_score("ropera 1\nservos 6\nframe S=ABZ M=DDD T=1.0\n")
    assert exc.value.line == 3


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol) as exc:
        parse_score("ropera 1\nservos 3\nframe S=ABZ M=DDD T=1.0\n")
    assert exc.value.line == 3
    assert "Z" in exc.value.message


@pytest.mark.parametrize("dur", ["0", "-1", "0.0", "nan", "inf", "abc"])
def test_non_positive_duration(dur):
    with pytest.raises(NonPositiveDuration):
        parse_score(f"ropera 1\nservos 1\nframe S=A M=D T={dur}\n")


def test_bad_header_cases():
    with pytest.raises(BadHeader):
        parse_score("servos 6\nframe S=A M=D T=1\n")  # missing ropera line
    with pytest.raises(BadHeader):
        parse_score("ropera 1\nframe S=A M=D T=1\n")  # missing servos
    with pytest.raises(BadHeader):
        parse_score("ropera 1\nservos 0\nframe S= M= T=1\n")
    with pytest.raises(BadHeader):
        parse_score("ropera 1\nservos 1\nservos 2\nframe S=A M=D T=1\n")
    with pytest.raises(BadHeader):
        parse_score("ropera 1\nservos 1\nframe S=A M=D T=1\nservos 2\n")


def test_duplicate_pose_name():
    doc = "ropera 1\nservos 1\npose x=A\npose x=B\nframe S=A M=D T=1\n"
    with pytest.raises(DuplicatePoseName):
        parse_score(doc)


def test_empty_document_and_no_frames():
    with pytest.raises(ParseError):
        parse_score("")
    with pytest.raises(ParseError):
        parse_score("ropera 1\nservos 6\n")


def test_comments_and_blank_lines_ignored():
    doc = "# heading\nropera 1\n\nservos 2\n  # indented comment\nframe S=AB M=DH T=0.5\n"
    score = parse_score(doc)
    assert score.frames[0].flags == (MotionFlag.DYNAMIC, MotionFlag.HOLD)


def test_pose_reference_in_frame():
    doc = "ropera 1\nservos 3\npose arc=BCD\nframe S=@arc M=DDD T=1\n"
    score = parse_score(doc)
    assert score.frames[0].symbols == ("B", "C", "D")
    with pytest.raises(ParseError):
        parse_score("ropera 1\nservos 3\nframe S=@nope M=DDD T=1\n")


def test_frame_label_takes_rest_of_line():
    doc = "ropera 1\nservos 1\nframe S=A M=D T=1 label=sleeve sweep, slow\n"
    score = parse_score(doc)
    assert score.frames[0].label == "sleeve sweep, slow"


def test_header_lines_parsed():
    doc = (
        "ropera 2\n"
        "servos 2\n"
        "codebook A=0 B=30 C=60 clip=150\n"
        "profile kind=min_jerk v_max=45 rho=0.5 step=1\n"
        "rate 200\n"
        "palette glow=#FFAA00\n"
        "coupling kappa=0.5 driver=s1 driven=s2\n"
        "frame S=AB M=DD T=1.5\n"
    )
    score = parse_score(doc)
    assert score.version == 2
    assert score.codebook.entries == {"A": 0.0, "B": 30.0, "C": 60.0}
    assert score.codebook.clip_limit == 150.0
    assert score.profile.kind == "min_jerk"
    assert score.profile.v_max == 45.0
    assert score.profile.transition_fraction == 0.5
    assert score.profile.sample_rate == 200.0
    assert score.palette == {"glow": "#FFAA00"}
    assert score.coupling == CouplingModel(kappa=0.5, driver_index=0, driven_index=1)


def test_coupling_indices_checked_against_servo_count():
    doc = "ropera 1\nservos 2\ncoupling kappa=0.5 driver=s5 driven=s6\nframe S=AA M=DD T=1\n"
    with pytest.raises(BadHeader):
        parse_score(doc)


def test_serialize_contains_canonical_frame_line():
    text = serialize_score(parse_score(LISTING_DOC))
    assert "frame S=ABHHAD M=DDDDDD T=2.0" in text


def test_serialize_emits_poses_before_frames():
    doc = "ropera 1\nservos 1\npose rest=A\nframe S=A M=D T=1\n"
    text = serialize_score(parse_score(doc))
    assert text.index("pose rest=A") < text.index("frame ")


def test_serialize_refuses_empty_score():
    with pytest.raises(ValueError):
        serialize_score(Score(frames=[]))


def test_duration_decimal_string_round_trip():
    for raw in ["2.0", "2", "0.125", "10.500"]:
        doc = f"ropera 1\nservos 1\nframe S=A M=D T={raw}\n"
        assert f"T={raw}" in serialize_score(parse_score(doc))


def test_round_trip_random_scores():
    rng = random.Random(7)
    for _ in range(200):
        score = random_score(rng)
        text = serialize_score(score)
        again = parse_score(text)
        assert again == score
        assert serialize_score(again) == text


def test_total_duration_is_exact():
    doc = "ropera 1\nservos 1\nframe S=A M=D T=0.1\n" + "frame S=A M=D T=0.1\n" * 9
    score = parse_score(doc)
    assert score.total_duration == Decimal("1.0")


def test_parser_total_on_random_bytes():
    rng = random.Random(11)
    for _ in range(5000):
        blob = rng.randbytes(rng.randint(0, 200))
        try:
            parse_score(blob)
        except ParseError:
            pass


def test_parser_total_on_structured_mutations():
    rng = random.Random(13)
    base = (
        "ropera 1\nservos 3\ncodebook A=0 B=45 clip=90\nprofile kind=s_curve\n"
        "palette a=#000000\npose p=ABA\nframe S=@p M=DHD T=1.25 label=x\n"
    )
    for _ in range(3000):
        chars = list(base)
        for _ in range(rng.randint(1, 6)):
            pos = rng.randrange(len(chars))
            chars[pos] = chr(rng.randrange(32, 127))
        try:
            parse_score("".join(chars))
        except ParseError as exc:
            assert exc.line >= 1


def test_frame_type_invariants():
    with pytest.raises(ValueError):
        Frame(symbols=("A",), flags=(), duration=Decimal("1"))
    with pytest.raises(ValueError):
        Frame(symbols=("A",), flags=(MotionFlag.DYNAMIC,), duration=Decimal("0"))


def test_motion_flag_text_forms():
    assert MotionFlag.from_text("Default") is MotionFlag.DYNAMIC
    assert MotionFlag.from_text("D") is MotionFlag.DYNAMIC
    assert MotionFlag.from_text("Hold") is MotionFlag.HOLD
    assert MotionFlag.from_text("H") is MotionFlag.HOLD
