"""R-X diagram rendering and binary PGM input/output.

An impedance trajectory is drawn onto a fixed-size grayscale canvas together
with the R and X axes and a mho zone circle, the way a relay screen shows
them. Rendering is a pure function of its inputs, so identical trajectories
give bit-identical images.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import CanvasConfig, RelayConfig
from .errors import ConfigError, DomainError, FormatError
from .netmodel import NetworkModel, cumulative_sequence_impedance
from .relaysim import ImpedanceTrajectory, converged_impedance
from .utils import NumericUtils

logger = logging.getLogger(__name__)

BACKGROUND = 0
AXIS_INTENSITY = 64
ZONE_INTENSITY = 128
TRAJECTORY_INTENSITY = 255
RENDER_LEVELS = 256
MIN_CANVAS_SIZE = 16


@dataclass(frozen=True)
class CanvasSpec:
    """Pixel size and impedance window of a rendered diagram."""

    width: int
    height: int
    r_min: float
    r_max: float
    x_min: float
    x_max: float

    def __post_init__(self) -> None:
        if self.width < MIN_CANVAS_SIZE or self.height < MIN_CANVAS_SIZE:
            raise ConfigError(
                f"canvas must be at least {MIN_CANVAS_SIZE}x{MIN_CANVAS_SIZE}, "
                f"got {self.width}x{self.height}"
            )
        if not (self.r_max > self.r_min and self.x_max > self.x_min):
            raise ConfigError("canvas window needs r_max > r_min and x_max > x_min")

    def to_float_pixel(self, r: float, x: float) -> tuple[float, float]:
        """Continuous (col, row) coordinates of an impedance point."""
        col = (r - self.r_min) / (self.r_max - self.r_min) * (self.width - 1)
        row = (self.x_max - x) / (self.x_max - self.x_min) * (self.height - 1)
        return col, row

    def to_pixel(self, r: float, x: float) -> tuple[int, int]:
        """Nearest (col, row) pixel; may fall outside the canvas."""
        col, row = self.to_float_pixel(r, x)
        return NumericUtils.round_half_up(col), NumericUtils.round_half_up(row)

    def to_dict(self) -> dict[str, float]:
        return {
            "width": self.width,
            "height": self.height,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "x_min": self.x_min,
            "x_max": self.x_max,
        }


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major grayscale raster with ``levels`` distinct gray values."""

    width: int
    height: int
    levels: int
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self) -> None:
        if not 2 <= self.levels <= RENDER_LEVELS:
            raise DomainError(f"levels must be in [2, {RENDER_LEVELS}], got {self.levels}")
        if self.pixels.shape != (self.height, self.width):
            raise DomainError(
                f"pixel grid {self.pixels.shape} does not match {self.height}x{self.width}"
            )
        if self.pixels.size and int(self.pixels.max()) >= self.levels:
            raise DomainError(f"pixel value {int(self.pixels.max())} >= levels {self.levels}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.levels == other.levels
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# rasterization


def _clip_segment(
    p0: tuple[float, float], p1: tuple[float, float], width: int, height: int
) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Liang-Barsky clip of a segment to the pixel footprint of the canvas.

    The footprint is [-0.5, width - 0.5] x [-0.5, height - 0.5]: every point
    that rounds onto a pixel of the canvas, as for single points.
    """
    x0, y0 = p0
    dx = p1[0] - x0
    dy = p1[1] - y0
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x0 + 0.5),
        (dx, (width - 0.5) - x0),
        (-dy, y0 + 0.5),
        (dy, (height - 0.5) - y0),
    ):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    start = (x0 + t0 * dx, y0 + t0 * dy)
    end = (x0 + t1 * dx, y0 + t1 * dy)
    return start, end


def _line_pixels(c0: int, r0: int, c1: int, r1: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint (Bresenham) line between two pixels, endpoints inclusive."""
    cols = []
    rows = []
    dc = abs(c1 - c0)
    dr = -abs(r1 - r0)
    sc = 1 if c0 < c1 else -1
    sr = 1 if r0 < r1 else -1
    err = dc + dr
    c, r = c0, r0
    while True:
        cols.append(c)
        rows.append(r)
        if c == c1 and r == r1:
            break
        e2 = 2 * err
        if e2 >= dr:
            err += dr
            c += sc
        if e2 <= dc:
            err += dc
            r += sr
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp)


def _stamp(img: np.ndarray, rows: np.ndarray, cols: np.ndarray, value: int) -> None:
    img[rows, cols] = np.maximum(img[rows, cols], value)


def _draw_segment(
    img: np.ndarray, canvas: CanvasSpec, z0: complex, z1: complex, value: int
) -> None:
    p0 = canvas.to_float_pixel(z0.real, z0.imag)
    p1 = canvas.to_float_pixel(z1.real, z1.imag)
    clipped = _clip_segment(p0, p1, canvas.width, canvas.height)
    if clipped is None:
        return
    (a_c, a_r), (b_c, b_r) = clipped
    rows, cols = _line_pixels(
        NumericUtils.round_half_up(a_c),
        NumericUtils.round_half_up(a_r),
        NumericUtils.round_half_up(b_c),
        NumericUtils.round_half_up(b_r),
    )
    # an end exactly on the far edge rounds one past the last pixel
    inside = (rows < canvas.height) & (cols < canvas.width)
    _stamp(img, rows[inside], cols[inside], value)


def _draw_polyline(
    img: np.ndarray, canvas: CanvasSpec, points: np.ndarray, value: int
) -> None:
    if points.size == 1:
        col, row = canvas.to_pixel(points[0].real, points[0].imag)
        if 0 <= col < canvas.width and 0 <= row < canvas.height:
            _stamp(img, np.array([row]), np.array([col]), value)
        return
    for a, b in zip(points[:-1], points[1:]):
        _draw_segment(img, canvas, complex(a), complex(b), value)


def mho_circle(zone_reach: float, line_angle: float, vertices: int = 256) -> np.ndarray:
    """Closed polygon approximating the mho circle through the origin."""
    centre = 0.5 * zone_reach * complex(math.cos(line_angle), math.sin(line_angle))
    angles = 2.0 * math.pi * np.arange(vertices + 1) / vertices
    return centre + 0.5 * zone_reach * np.exp(1j * angles)


def render_rx_image(
    traj: ImpedanceTrajectory,
    zone_reach: float,
    canvas: CanvasSpec,
    *,
    line_angle: float,
    circle_vertices: int = 256,
) -> GrayImage:
    """Rasterize a trajectory onto an R-X diagram.

    Axes are drawn at intensity 64, the mho circle at 128 and the trajectory
    last at 255, each stroke keeping the maximum where strokes overlap.
    Segments leaving the canvas are clipped.

    Args:
        traj: Non-empty impedance trajectory
        zone_reach: Mho reach in ohm (circle diameter)
        canvas: Pixel size and impedance window
        line_angle: Direction of the circle diameter in radians
        circle_vertices: Polygon vertices of the circle outline

    Returns:
        A 256-level image

    Raises:
        DomainError: If the trajectory is empty

    """
    if traj.impedance.size == 0:
        raise DomainError("cannot render an empty trajectory")
    img = np.zeros((canvas.height, canvas.width), dtype=np.uint8)

    _draw_segment(img, canvas, complex(0.0, canvas.x_min), complex(0.0, canvas.x_max), AXIS_INTENSITY)
    _draw_segment(img, canvas, complex(canvas.r_min, 0.0), complex(canvas.r_max, 0.0), AXIS_INTENSITY)
    if zone_reach > 0:
        _draw_polyline(img, canvas, mho_circle(zone_reach, line_angle, circle_vertices), ZONE_INTENSITY)
    _draw_polyline(img, canvas, np.asarray(traj.impedance, dtype=complex), TRAJECTORY_INTENSITY)
    return GrayImage(canvas.width, canvas.height, RENDER_LEVELS, img)


def quantize_levels(img: GrayImage, levels: int) -> GrayImage:
    """Uniformly rebin gray values: out = floor(in * levels / in_levels).

    Raises:
        ConfigError: If ``levels`` is not in [2, img.levels]

    """
    if not 2 <= levels <= img.levels:
        raise ConfigError(f"quantization levels must be in [2, {img.levels}], got {levels}")
    out = (img.pixels.astype(np.int64) * levels) // img.levels
    out = np.minimum(out, levels - 1).astype(np.uint8)
    return GrayImage(img.width, img.height, levels, out)


# ---------------------------------------------------------------------------
# framing


def line_angle(net: NetworkModel) -> float:
    """Angle of the whole-line positive-sequence impedance in radians."""
    z1 = net.line.total_impedance.z1
    return math.atan2(z1.imag, z1.real)


def zone_reach(net: NetworkModel, cfg: CanvasConfig) -> float:
    return cfg.zone_reach_fraction * abs(net.line.total_impedance.z1)


def line_canvas(net: NetworkModel, cfg: CanvasConfig) -> CanvasSpec:
    """Window [low, high] x |Z1 line| on both axes."""
    magnitude = abs(net.line.total_impedance.z1)
    low = cfg.line_low * magnitude
    high = cfg.line_high * magnitude
    return CanvasSpec(cfg.width, cfg.height, low, high, low, high)


def _square_window(cfg: CanvasConfig, start: complex, end: complex, margin: float) -> CanvasSpec:
    mid = 0.5 * (start + end)
    half = margin * abs(end - start)
    return CanvasSpec(
        cfg.width,
        cfg.height,
        mid.real - half,
        mid.real + half,
        mid.imag - half,
        mid.imag + half,
    )


def _check_section(net: NetworkModel, section_index: int) -> None:
    if not 0 <= section_index < len(net.line.sections):
        raise ConfigError(f"no section {section_index} on a {len(net.line.sections)}-section line")


def section_canvas(net: NetworkModel, section_index: int, cfg: CanvasConfig) -> CanvasSpec:
    """Square window centred on one section's nominal Z1 span."""
    _check_section(net, section_index)
    line = net.line
    start = cumulative_sequence_impedance(line, line.section_start(section_index)).z1
    end = cumulative_sequence_impedance(line, line.section_end(section_index)).z1
    return _square_window(cfg, start, end, cfg.margin_for(line.sections[section_index].kind))


def converged_canvas(
    net: NetworkModel, section_index: int, cfg: CanvasConfig, relay: RelayConfig
) -> CanvasSpec:
    """Square window centred on the span the relay's settled impedance covers.

    The span runs from the converged apparent impedance of a fault at the
    section start to that of a fault at its end, both as the configured
    relay measures them. Ends on the line terminals are pulled inside by a
    millionth of the line length.
    """
    _check_section(net, section_index)
    line = net.line
    inset = 1e-6 * line.total_length
    near = max(line.section_start(section_index), inset)
    far = min(line.section_end(section_index), line.total_length - inset)
    start = converged_impedance(net, near, relay)
    end = converged_impedance(net, far, relay)
    logger.debug("section %d settles between %s and %s ohm", section_index, start, end)
    return _square_window(cfg, start, end, cfg.margin_for(line.sections[section_index].kind))


def canvas_for(
    net: NetworkModel,
    section_index: int,
    cfg: CanvasConfig,
    relay: RelayConfig | None = None,
) -> CanvasSpec:
    """Canvas for an experiment on one section, per the configured framing."""
    _check_section(net, section_index)
    framing = cfg.framing_for(net.line.sections[section_index].kind)
    if framing == "converged":
        return converged_canvas(net, section_index, cfg, relay if relay is not None else RelayConfig())
    if framing == "section":
        return section_canvas(net, section_index, cfg)
    return line_canvas(net, cfg)


# ---------------------------------------------------------------------------
# PGM


_HEADER_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def write_pgm(img: GrayImage) -> bytes:
    """Encode as binary PGM (P5) with maxval = levels - 1."""
    header = f"P5\n{img.width} {img.height}\n{img.levels - 1}\n".encode("ascii")
    return header + np.ascontiguousarray(img.pixels, dtype=np.uint8).tobytes()


def read_pgm(data: bytes) -> GrayImage:
    """Decode a binary PGM (P5) with maxval below 256.

    Raises:
        FormatError: On a malformed header, a short or long payload, or a
            pixel above maxval

    """
    tokens = []
    pos = 0
    for _ in range(4):
        match = _HEADER_TOKEN.match(data, pos)
        if match is None:
            raise FormatError("truncated PGM header")
        tokens.append(match.group(1))
        pos = match.end()
    if tokens[0] != b"P5":
        raise FormatError(f"not a binary PGM (magic {tokens[0][:8]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError("non-integer PGM header field") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"invalid PGM size {width}x{height}")
    if not 1 <= maxval <= 255:
        raise FormatError(f"unsupported PGM maxval {maxval}")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError("missing whitespace after PGM header")
    payload = data[pos + 1 :]
    expected = width * height
    if len(payload) < expected:
        raise FormatError(f"PGM payload has {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise FormatError(f"PGM payload has {len(payload) - expected} trailing bytes")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    if pixels.size and int(pixels.max()) > maxval:
        raise FormatError(f"pixel value {int(pixels.max())} exceeds maxval {maxval}")
    return GrayImage(width, height, maxval + 1, pixels)


def save_pgm(path: Path, img: GrayImage) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_pgm(img))


def load_pgm(path: Path) -> GrayImage:
    return read_pgm(path.read_bytes())
