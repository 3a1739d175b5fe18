"""Long-exposure style rendering of marker traces to SVG.

Each marker's path is drawn as translucent strokes on a dark canvas: glow
and core polylines carrying every sample as a vertex, plus one short line
per sample interval.  Slow passages pack those interval strokes into the
same pixels, so dwells and eases accumulate brightness the way a long
photographic exposure would.

Output is byte-deterministic for identical inputs: fixed element order,
coordinates in fixed two-decimal format, and a config hash embedded in the
leading comment.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .kinesim import CartesianTrace

DEFAULT_COLORS = {
    "peony_pink": "#E8859B",
    "celadon_green": "#9FD3C7",
    "ivory_white": "#F8F4E3",
    "ink_blue": "#2B4570",
}

PLANES = {"XY": (0, 1), "XZ": (0, 2), "YZ": (1, 2)}


class EmptyTrace(ValueError):
    """Rendering needs at least one sample and one marker."""


def _parse_hex(value: str) -> tuple[int, int, int]:
    if len(value) != 7 or value[0] != "#":
        raise ValueError(f"bad color {value!r}, expected #RRGGBB")
    return tuple(int(value[i:i + 2], 16) for i in (1, 3, 5))


@dataclass(frozen=True)
class Palette:
    """Named RGB colors; defaults follow traditional costume hues."""

    colors: dict[str, tuple[int, int, int]] = field(
        default_factory=lambda: {name: _parse_hex(v) for name, v in DEFAULT_COLORS.items()}
    )

    def __post_init__(self):
        if not self.colors:
            raise ValueError("palette has no colors")
        for rgb in self.colors.values():
            if len(rgb) != 3 or any(not 0 <= c <= 255 for c in rgb):
                raise ValueError(f"bad RGB triple {rgb!r}")

    @classmethod
    def from_hex(cls, named: dict[str, str]) -> "Palette":
        """Build from name -> #RRGGBB pairs (e.g. a score header palette)."""
        if not named:
            return cls()
        return cls(colors={name: _parse_hex(v) for name, v in named.items()})

    def hex(self, name: str) -> str:
        r, g, b = self.colors[name]
        return f"#{r:02X}{g:02X}{b:02X}"


@dataclass(frozen=True)
class RenderConfig:
    plane: str = "XZ"
    width: int = 800
    height: int = 600
    stroke_width: float = 2.0
    margin: float = 0.06
    background: str = "#0B0B12"
    # (stroke width multiplier, opacity) polyline passes, widest first
    passes: tuple[tuple[float, float], ...] = ((3.5, 0.10), (1.0, 0.45))
    exposure_opacity: float = 0.06
    marker_colors: dict[str, str] = field(default_factory=dict)
    title: str = ""

    def __post_init__(self):
        if self.plane not in PLANES:
            raise ValueError(f"plane must be one of {sorted(PLANES)}")
        if self.width <= 0 or self.height <= 0 or self.stroke_width <= 0:
            raise ValueError("canvas dimensions and stroke width must be positive")
        if not 0 <= self.margin < 0.5:
            raise ValueError("margin must be in [0, 0.5)")


def _config_hash(palette: Palette, config: RenderConfig, marker_names) -> str:
    blob = "|".join([
        config.plane, str(config.width), str(config.height), repr(config.stroke_width),
        repr(config.margin), config.background, repr(config.passes),
        repr(config.exposure_opacity),
        ",".join(f"{k}={v}" for k, v in config.marker_colors.items()),
        ",".join(f"{k}={palette.hex(k)}" for k in palette.colors),
        ",".join(marker_names),
    ])
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render(trace: CartesianTrace, palette: Palette | None = None,
           config: RenderConfig | None = None) -> bytes:
    """Render a trace to an SVG document (bytes), deterministically."""
    palette = palette or Palette()
    config = config or RenderConfig()
    if trace.sample_count == 0 or trace.positions.shape[1] == 0:
        raise EmptyTrace("nothing to render")

    ix, iy = PLANES[config.plane]
    points = trace.positions[:, :, (ix, iy)]  # (samples, markers, 2)
    mins = points.reshape(-1, 2).min(axis=0)
    maxs = points.reshape(-1, 2).max(axis=0)
    span = maxs - mins
    usable_w = config.width * (1 - 2 * config.margin)
    usable_h = config.height * (1 - 2 * config.margin)
    scales = [usable_w / span[0] if span[0] > 0 else None,
              usable_h / span[1] if span[1] > 0 else None]
    candidates = [s for s in scales if s is not None]
    scale = min(candidates) if candidates else 1.0
    offset_x = (config.width - span[0] * scale) / 2
    offset_y = (config.height - span[1] * scale) / 2

    def to_px(p):
        x = (p[0] - mins[0]) * scale + offset_x
        y = config.height - ((p[1] - mins[1]) * scale + offset_y)
        return _fmt(x), _fmt(y)

    marker_names = list(trace.marker_names)
    palette_names = list(palette.colors)
    colors = {}
    for i, name in enumerate(marker_names):
        chosen = config.marker_colors.get(name) or palette_names[i % len(palette_names)]
        if chosen not in palette.colors:
            raise ValueError(f"marker {name!r} wants unknown color {chosen!r}")
        colors[name] = palette.hex(chosen)

    title = config.title.replace("--", "-")
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{config.width}" height="{config.height}" '
        f'viewBox="0 0 {config.width} {config.height}">',
        f'<!-- light-trail title="{title}" plane={config.plane} samples={trace.sample_count} '
        f'config={_config_hash(palette, config, marker_names)} -->',
        f'<rect width="{config.width}" height="{config.height}" fill="{config.background}"/>',
        '<g fill="none" stroke-linecap="round" stroke-linejoin="round">',
    ]
    for m, name in enumerate(marker_names):
        color = colors[name]
        px = [to_px(points[k, m]) for k in range(trace.sample_count)]
        lines.append(f'<g id="marker-{name}">')
        for width_scale, opacity in config.passes:
            pts = " ".join(f"{x},{y}" for x, y in px)
            lines.append(
                f'<polyline points="{pts}" stroke="{color}" '
                f'stroke-opacity="{_fmt(opacity)}" stroke-width="{_fmt(config.stroke_width * width_scale)}"/>'
            )
        lines.append(
            f'<g stroke="{color}" stroke-opacity="{_fmt(config.exposure_opacity)}" '
            f'stroke-width="{_fmt(config.stroke_width * 1.8)}">'
        )
        for k in range(trace.sample_count - 1):
            (x1, y1), (x2, y2) = px[k], px[k + 1]
            lines.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
        lines.append("</g>")
        lines.append("</g>")
    lines.append("</g>")
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")
