"""HTTP surface over the score toolchain.

Every endpoint takes the score document as text and returns JSON (or SVG
bytes for /render), so remote clients never need the package installed.
The bundled CLI talks to this app in-process by default and to a remote
instance with --server.

Run standalone with:  uvicorn ropera.service:app
"""

from __future__ import annotations

import csv
import io

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from pydantic import BaseModel, Field

from . import __version__
from .decoder import decode_score
from .kinesim import default_chain, parse_chain, trace
from .lightpaint import Palette, RenderConfig, render
from .notation import ParseError, ProfileConfig, parse_score, serialize_score
from .stream import build_stream, stream_text
from .trajectory import DurationTooShort, metrics, plan
from .vocabulary import builtin_vocabulary, parse_remap_rules, remap_score

app = FastAPI(title="ropera", version=__version__,
              description="Compile symbolic choreography scores for small servo arms.")


class ScoreRequest(BaseModel):
    text: str


class ErrorInfo(BaseModel):
    kind: str
    line: int
    column: int
    message: str


class ValidateResponse(BaseModel):
    valid: bool
    servo_count: int | None = None
    frame_count: int | None = None
    total_duration_s: float | None = None
    error: ErrorInfo | None = None


class CompileRequest(ScoreRequest):
    profile: str | None = None


class CompileResponse(BaseModel):
    stream: str
    record_count: int


class SimulateRequest(ScoreRequest):
    profile: str | None = None
    rate: float | None = Field(default=None, gt=0)
    include_samples: bool = False


class MetricsModel(BaseModel):
    timing_deviation: float
    smoothness: float
    jitter: float


class SimulateResponse(BaseModel):
    metrics: MetricsModel
    sample_count: int
    duration_s: float
    samples_csv: str | None = None


class RenderRequest(ScoreRequest):
    profile: str | None = None
    rate: float | None = Field(default=None, gt=0)
    plane: str = "XZ"
    width: int = Field(default=800, gt=0)
    height: int = Field(default=600, gt=0)
    title: str = ""
    chain_text: str | None = None


class RemapRequest(ScoreRequest):
    rules: list[str]


class RemapResponse(BaseModel):
    text: str


class PrimitiveModel(BaseModel):
    name: str
    category: str
    symbols: str
    provenance: str


class VocabularyResponse(BaseModel):
    primitives: list[PrimitiveModel]


def _parse_or_422(text: str):
    try:
        return parse_score(text)
    except ParseError as exc:
        raise HTTPException(status_code=422, detail={
            "kind": type(exc).__name__,
            "line": exc.line,
            "column": exc.column,
            "message": exc.message,
        }) from None


def _effective_profile(score, kind: str | None, rate: float | None) -> ProfileConfig:
    p = score.profile
    return ProfileConfig(
        kind=kind or p.kind,
        v_max=p.v_max,
        transition_fraction=p.transition_fraction,
        step_deg=p.step_deg,
        sample_rate=rate or p.sample_rate,
    )


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ScoreRequest):
    try:
        score = parse_score(req.text)
    except ParseError as exc:
        return ValidateResponse(valid=False, error=ErrorInfo(
            kind=type(exc).__name__, line=exc.line, column=exc.column, message=exc.message,
        ))
    return ValidateResponse(
        valid=True,
        servo_count=score.servo_count,
        frame_count=len(score.frames),
        total_duration_s=float(score.total_duration),
    )


@app.post("/compile", response_model=CompileResponse)
def compile_score(req: CompileRequest):
    score = _parse_or_422(req.text)
    try:
        messages = build_stream(score, profile_kind=req.profile)
    except DurationTooShort as exc:
        raise HTTPException(status_code=422, detail={"message": str(exc),
                                                     "frame_index": exc.frame_index}) from None
    except ValueError as exc:
        raise HTTPException(status_code=422, detail={"message": str(exc)}) from None
    return CompileResponse(stream=stream_text(messages), record_count=len(messages))


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest):
    score = _parse_or_422(req.text)
    config = _effective_profile(score, req.profile, req.rate)
    targets = decode_score(score, home=(0.0,) * score.servo_count)
    try:
        traj = plan(targets, config, start=(0.0,) * score.servo_count)
    except DurationTooShort as exc:
        raise HTTPException(status_code=422, detail={"message": str(exc),
                                                     "frame_index": exc.frame_index}) from None
    m = metrics(traj, targets)
    samples_csv = None
    if req.include_samples:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t"] + [f"s{j + 1}" for j in range(traj.angles.shape[1])])
        for t, row in zip(traj.timestamps, traj.angles):
            writer.writerow([repr(float(t))] + [repr(float(a)) for a in row])
        samples_csv = buf.getvalue()
    return SimulateResponse(
        metrics=MetricsModel(timing_deviation=m.timing_deviation,
                             smoothness=m.smoothness, jitter=m.jitter),
        sample_count=traj.sample_count,
        duration_s=float(score.total_duration),
        samples_csv=samples_csv,
    )


@app.post("/render")
def render_score(req: RenderRequest):
    score = _parse_or_422(req.text)
    config = _effective_profile(score, req.profile, req.rate)
    targets = decode_score(score, home=(0.0,) * score.servo_count)
    if req.chain_text is not None:
        try:
            chain = parse_chain(req.chain_text)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail={"message": str(exc)}) from None
    else:
        chain = default_chain()
    if chain.joint_count != score.servo_count:
        raise HTTPException(status_code=422, detail={
            "message": f"chain has {chain.joint_count} joints, score has {score.servo_count}"})
    try:
        traj = plan(targets, config, start=(0.0,) * score.servo_count)
    except DurationTooShort as exc:
        raise HTTPException(status_code=422, detail={"message": str(exc),
                                                     "frame_index": exc.frame_index}) from None
    cartesian = trace(chain, traj)
    render_config = RenderConfig(plane=req.plane, width=req.width, height=req.height,
                                 title=req.title)
    svg = render(cartesian, Palette.from_hex(score.palette), render_config)
    return Response(content=svg, media_type="image/svg+xml")


@app.post("/remap", response_model=RemapResponse)
def remap(req: RemapRequest):
    score = _parse_or_422(req.text)
    try:
        spec = parse_remap_rules(req.rules)
        out = remap_score(score, spec)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail={"message": str(exc)}) from None
    return RemapResponse(text=serialize_score(out))


@app.get("/vocabulary", response_model=VocabularyResponse)
def vocabulary():
    prims = builtin_vocabulary()
    return VocabularyResponse(primitives=[
        PrimitiveModel(name=p.name, category=p.category,
                       symbols="".join(p.symbols), provenance=p.provenance)
        for p in prims
    ])
