"""Symbolic choreography scores for small servo arms.

Parse and validate scores, decode them to joint targets, retime transitions,
simulate forward kinematics, render light-trail SVGs, and stream commands to
a hardware bridge.  See the README for the CLI and HTTP service.
"""

__version__ = "0.1.0"

from .notation import (  # noqa: F401
    Codebook,
    CouplingModel,
    Frame,
    MotionFlag,
    ParseError,
    ProfileConfig,
    Score,
    default_codebook,
    parse_score,
    serialize_score,
)
