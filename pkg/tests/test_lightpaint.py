import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ropera.decoder import JointTargets
from ropera.kinesim import CartesianTrace, default_chain, trace
from ropera.lightpaint import DEFAULT_COLORS, EmptyTrace, Palette, RenderConfig, render
from ropera.notation import ProfileConfig
from ropera.trajectory import plan

SVG_NS = "{http://www.w3.org/2000/svg}"


def stationary_trace(n=5, point=(100.0, 0.0, 50.0)):
    positions = np.tile(np.asarray(point), (n, 1, 1))
    return CartesianTrace(
        timestamps=np.arange(n) / 10.0,
        positions=positions,
        marker_names=("tip",),
    )


def arc_trace():
    chain = default_chain()
    targets = [
        JointTargets(angles=(0.0,) * 6, frame_index=0, duration_s=0.2),
        JointTargets(angles=(0.0, 60.0, 0.0, 0.0, 0.0, 0.0), frame_index=1, duration_s=1.0),
    ]
    traj = plan(targets, ProfileConfig(kind="min_jerk", sample_rate=50.0))
    return trace(chain, traj)


def polylines(svg_bytes):
    root = ET.fromstring(svg_bytes)
    return root.findall(f".//{SVG_NS}polyline")


def test_default_palette_colors():
    palette = Palette()
    assert {name: palette.hex(name) for name in palette.colors} == DEFAULT_COLORS


def test_palette_from_score_header():
    palette = Palette.from_hex({"glow": "#A1B2C3"})
    assert palette.colors == {"glow": (0xA1, 0xB2, 0xC3)}
    assert Palette.from_hex({}).colors == Palette().colors


def test_stationary_marker_renders_degenerate_path():
    svg = render(stationary_trace())
    lines = polylines(svg)
    assert lines
    pts = set(lines[0].attrib["points"].split())
    assert len(pts) == 1  # every vertex collapses to one pixel position


def test_vertex_count_equals_sample_count():
    tr = arc_trace()
    svg = render(tr)
    for poly in polylines(svg):
        assert len(poly.attrib["points"].split()) == tr.sample_count


def test_render_is_byte_deterministic():
    tr = arc_trace()
    assert render(tr) == render(tr)


def test_arc_vertices_match_trace_projection():
    tr = arc_trace()
    cfg = RenderConfig(plane="XZ")
    svg = render(tr, config=cfg)
    poly = polylines(svg)[0]  # first marker, first pass
    got = np.array([[float(v) for v in pt.split(",")] for pt in poly.attrib["points"].split()])

    # recompute the projection the way the renderer defines it
    pts = tr.positions[:, :, (0, 2)]
    mins = pts.reshape(-1, 2).min(axis=0)
    span = pts.reshape(-1, 2).max(axis=0) - mins
    usable = np.array([cfg.width, cfg.height]) * (1 - 2 * cfg.margin)
    scale = min(usable[i] / span[i] for i in range(2) if span[i] > 0)
    offset = (np.array([cfg.width, cfg.height]) - span * scale) / 2
    expect_x = (pts[:, 0, 0] - mins[0]) * scale + offset[0]
    expect_y = cfg.height - ((pts[:, 0, 1] - mins[1]) * scale + offset[1])
    assert np.max(np.abs(got[:, 0] - expect_x)) <= 0.005 + 1e-9
    assert np.max(np.abs(got[:, 1] - expect_y)) <= 0.005 + 1e-9


def test_all_coordinates_inside_canvas():
    cfg = RenderConfig(width=400, height=300)
    svg = render(arc_trace(), config=cfg)
    for poly in polylines(svg):
        for pt in poly.attrib["points"].split():
            x, y = (float(v) for v in pt.split(","))
            assert -0.01 <= x <= cfg.width + 0.01
            assert -0.01 <= y <= cfg.height + 0.01


def test_empty_trace_rejected():
    empty = CartesianTrace(
        timestamps=np.empty(0), positions=np.empty((0, 1, 3)), marker_names=("tip",)
    )
    with pytest.raises(EmptyTrace):
        render(empty)


def test_marker_color_assignment():
    tr = arc_trace()
    cfg = RenderConfig(marker_colors={"tip": "ink_blue"})
    svg = render(tr, config=cfg).decode()
    assert '<g id="marker-tip">' in svg
    tip_block = svg.split('<g id="marker-tip">')[1]
    assert 'stroke="#2B4570"' in tip_block.split("</g>")[0]


def test_unknown_color_rejected():
    with pytest.raises(ValueError):
        render(arc_trace(), config=RenderConfig(marker_colors={"tip": "chartreuse"}))


def test_config_hash_changes_with_plane():
    tr = arc_trace()
    a = render(tr, config=RenderConfig(plane="XZ"))
    b = render(tr, config=RenderConfig(plane="XY"))
    assert a != b


def test_exposure_segments_present():
    tr = stationary_trace(n=4)
    root = ET.fromstring(render(tr))
    segments = root.findall(f".//{SVG_NS}line")
    assert len(segments) == 3  # one per sample interval
