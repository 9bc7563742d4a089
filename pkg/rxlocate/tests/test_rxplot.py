"""Unit tests for the rxplot module."""

import math
import unittest
from dataclasses import replace

import numpy as np

from rxlocate.config import CanvasConfig, RelayConfig
from rxlocate.errors import ConfigError, DomainError, FormatError
from rxlocate.netmodel import build_standard_line
from rxlocate.relaysim import (
    FaultScenario,
    ImpedanceTrajectory,
    converged_impedance,
    simulate_trajectory,
)
from rxlocate.rxplot import (
    AXIS_INTENSITY,
    TRAJECTORY_INTENSITY,
    ZONE_INTENSITY,
    CanvasSpec,
    GrayImage,
    canvas_for,
    converged_canvas,
    line_angle,
    line_canvas,
    quantize_levels,
    read_pgm,
    render_rx_image,
    section_canvas,
    write_pgm,
    zone_reach,
)


def brute_force_segment(c0, r0, c1, r1):
    """Pixels of a horizontal run, endpoints inclusive."""
    assert r0 == r1
    lo, hi = sorted((c0, c1))
    return {(r0, c) for c in range(lo, hi + 1)}


class TestCanvasSpec(unittest.TestCase):
    """Test suite for CanvasSpec."""

    def test_corner_mapping(self):
        """Test R = r_min, X = x_min at the bottom-left pixel."""
        canvas = CanvasSpec(128, 96, -10.0, 30.0, -5.0, 15.0)
        self.assertEqual(canvas.to_pixel(-10.0, -5.0), (0, 95))
        self.assertEqual(canvas.to_pixel(30.0, 15.0), (127, 0))

    def test_invalid_size(self):
        """Test rejection of canvases smaller than 16 pixels."""
        with self.assertRaises(ConfigError):
            CanvasSpec(8, 128, 0.0, 1.0, 0.0, 1.0)

    def test_invalid_window(self):
        """Test rejection of an empty window."""
        with self.assertRaises(ConfigError):
            CanvasSpec(32, 32, 1.0, 1.0, 0.0, 1.0)


class TestRenderRxImage(unittest.TestCase):
    """Test suite for render_rx_image."""

    def setUp(self):
        """Set up test fixtures."""
        self.canvas = CanvasSpec(128, 128, -1.0, 1.0, -1.0, 1.0)

    def render(self, points, reach=0.0):
        return render_rx_image(
            ImpedanceTrajectory.from_points(points), reach, self.canvas, line_angle=math.radians(80)
        )

    def test_single_point_at_centre(self):
        """Test a one-point trajectory gives exactly one bright pixel."""
        img = self.render([(0.0, 0.0)])
        bright = np.argwhere(img.pixels == TRAJECTORY_INTENSITY)
        self.assertEqual(bright.tolist(), [[64, 64]])
        self.assertEqual(img.levels, 256)

    def test_axes_drawn(self):
        """Test that both axes appear at axis intensity."""
        img = self.render([(0.5, 0.5)])
        self.assertEqual(img.pixels[0, 64], AXIS_INTENSITY)
        self.assertEqual(img.pixels[64, 0], AXIS_INTENSITY)
        self.assertEqual(img.pixels[10, 10], 0)

    def test_horizontal_segment(self):
        """Test a same-row segment against a brute-force run."""
        canvas = CanvasSpec(64, 64, 0.0, 63.0, 0.0, 63.0)
        traj = ImpedanceTrajectory.from_points([(5.0, 40.0), (50.0, 40.0)])
        img = render_rx_image(traj, 0.0, canvas, line_angle=1.0)
        c0, r0 = canvas.to_pixel(5.0, 40.0)
        c1, r1 = canvas.to_pixel(50.0, 40.0)
        got = {tuple(p) for p in np.argwhere(img.pixels == TRAJECTORY_INTENSITY).tolist()}
        self.assertEqual(got, brute_force_segment(c0, r0, c1, r1))

    def test_clipping(self):
        """Test that a segment leaving the canvas stays inside the raster."""
        img = self.render([(0.5, 0.5), (50.0, 0.5)])
        rows, cols = np.nonzero(img.pixels == TRAJECTORY_INTENSITY)
        c0, r0 = self.canvas.to_pixel(0.5, 0.5)
        self.assertTrue(np.all(rows == r0))
        self.assertEqual(cols.min(), c0)
        self.assertEqual(cols.max(), 127)

    def test_segment_within_half_pixel_of_edge(self):
        """Test that segments rounding onto the edge pixels are drawn like single points."""
        beyond = 0.3 / 63.5
        img = self.render([(1.0 + beyond, 0.0), (1.0 + 2 * beyond, 0.0)])
        col, row = self.canvas.to_pixel(1.0 + beyond, 0.0)
        self.assertEqual(col, 127)
        self.assertEqual(img.pixels[row, 127], TRAJECTORY_INTENSITY)
        img = self.render([(-0.2, -1.0 - 2 * beyond), (0.2, -1.0 - 2 * beyond)])
        self.assertTrue(np.all(img.pixels[127, 51:77] == TRAJECTORY_INTENSITY))
        img = self.render([(1.0 + 2 * beyond, 0.0), (1.0 + 0.8 / 63.5, 0.0)])
        self.assertFalse(np.any(img.pixels == TRAJECTORY_INTENSITY))

    def test_fully_outside_segment(self):
        """Test that an off-canvas trajectory leaves no bright pixels."""
        img = self.render([(5.0, 5.0), (6.0, 7.0)])
        self.assertFalse(np.any(img.pixels == TRAJECTORY_INTENSITY))

    def test_mho_circle(self):
        """Test that the circle passes through the origin and the reach point."""
        canvas = CanvasSpec(128, 128, -2.0, 12.0, -2.0, 12.0)
        traj = ImpedanceTrajectory.from_points([(11.0, -1.5)])
        img = render_rx_image(traj, 10.0, canvas, line_angle=math.radians(90))
        col, row = canvas.to_pixel(0.0, 10.0)
        self.assertEqual(img.pixels[row, col], ZONE_INTENSITY)

    def test_overlap_keeps_maximum(self):
        """Test that a trajectory on an axis shows trajectory intensity."""
        img = self.render([(0.0, -0.5), (0.0, 0.5)])
        col, row = self.canvas.to_pixel(0.0, 0.0)
        self.assertEqual(img.pixels[row, col], TRAJECTORY_INTENSITY)

    def test_deterministic(self):
        """Test bit-identical output for identical input."""
        points = [(0.9, 0.1), (0.3, 0.4), (0.1, 0.7), (0.12, 0.71)]
        a = self.render(points, reach=1.0)
        b = self.render(points, reach=1.0)
        self.assertTrue(np.array_equal(a.pixels, b.pixels))

    def test_bright_pixels_cover_points(self):
        """Test that bright pixels are at least the distinct in-canvas points."""
        rng = np.random.default_rng(3)
        points = [tuple(p) for p in rng.uniform(-1.2, 1.2, size=(30, 2))]
        img = self.render(points)
        inside = {
            self.canvas.to_pixel(r, x)
            for r, x in points
            if -1 <= r <= 1 and -1 <= x <= 1
        }
        self.assertGreaterEqual(int(np.count_nonzero(img.pixels == TRAJECTORY_INTENSITY)), len(inside))
        for col, row in inside:
            self.assertEqual(img.pixels[row, col], TRAJECTORY_INTENSITY)

    def test_simulated_trajectory(self):
        """Test rendering a simulated fault on the line window."""
        net = build_standard_line()
        traj = simulate_trajectory(net, FaultScenario(100.0), RelayConfig())
        canvas = line_canvas(net, CanvasConfig())
        img = render_rx_image(traj, zone_reach(net, CanvasConfig()), canvas, line_angle=line_angle(net))
        col, row = canvas.to_pixel(traj.final.real, traj.final.imag)
        self.assertEqual(img.pixels[row, col], TRAJECTORY_INTENSITY)

    def test_empty_trajectory(self):
        """Test that an empty trajectory cannot be built or rendered."""
        with self.assertRaises(DomainError):
            ImpedanceTrajectory(np.array([], dtype=complex), np.array([], dtype=int))


class TestQuantizeLevels(unittest.TestCase):
    """Test suite for quantize_levels."""

    def setUp(self):
        """Set up test fixtures."""
        values = np.arange(256, dtype=np.uint8).reshape(16, 16)
        self.img = GrayImage(16, 16, 256, values)

    def test_examples(self):
        """Test the 256 to 8 level mapping."""
        out = quantize_levels(self.img, 8)
        flat = out.pixels.ravel()
        self.assertEqual(flat[255], 7)
        self.assertEqual(flat[0], 0)
        self.assertEqual(flat[64], 2)
        self.assertEqual(out.levels, 8)

    def test_identity(self):
        """Test that levels = img.levels is the identity."""
        out = quantize_levels(self.img, 256)
        self.assertTrue(np.array_equal(out.pixels, self.img.pixels))

    def test_monotone(self):
        """Test that quantization preserves ordering."""
        flat = quantize_levels(self.img, 5).pixels.ravel().astype(int)
        self.assertTrue(np.all(np.diff(flat) >= 0))

    def test_out_of_range(self):
        """Test rejection of invalid level counts."""
        for levels in (1, 257):
            with self.assertRaises(ConfigError):
                quantize_levels(self.img, levels)


class TestPgm(unittest.TestCase):
    """Test suite for PGM input/output."""

    def test_byte_layout(self):
        """Test the payload of a 2x2 image."""
        img = GrayImage(2, 2, 256, np.array([[0, 255], [128, 64]], dtype=np.uint8))
        data = write_pgm(img)
        self.assertTrue(data.startswith(b"P5"))
        self.assertEqual(data.split()[:4], [b"P5", b"2", b"2", b"255"])
        self.assertEqual(data[-4:], bytes([0x00, 0xFF, 0x80, 0x40]))

    def test_roundtrip(self):
        """Test that reading a written image gives identical pixels."""
        rng = np.random.default_rng(7)
        img = GrayImage(20, 13, 8, rng.integers(0, 8, size=(13, 20)).astype(np.uint8))
        back = read_pgm(write_pgm(img))
        self.assertEqual(back, img)
        self.assertEqual(back.levels, 8)

    def test_header_comment(self):
        """Test that header comments are skipped."""
        data = b"P5\n# made by hand\n2 1\n255\n\x01\x02"
        img = read_pgm(data)
        self.assertEqual(img.pixels.tolist(), [[1, 2]])

    def test_truncated_payload(self):
        """Test that a short payload is rejected."""
        data = write_pgm(GrayImage(4, 4, 256, np.zeros((4, 4), dtype=np.uint8)))
        with self.assertRaises(FormatError):
            read_pgm(data[:-1])

    def test_bad_magic(self):
        """Test that a non-P5 file is rejected."""
        with self.assertRaises(FormatError):
            read_pgm(b"P2\n1 1\n255\n0")

    def test_truncated_header(self):
        """Test that a missing header field is rejected."""
        with self.assertRaises(FormatError):
            read_pgm(b"P5\n4 4")

    def test_pixel_above_maxval(self):
        """Test that a pixel larger than maxval is rejected."""
        with self.assertRaises(FormatError):
            read_pgm(b"P5\n1 1\n7\n\x09")


class TestFraming(unittest.TestCase):
    """Test suite for canvas framing."""

    def setUp(self):
        """Set up test fixtures."""
        self.net = build_standard_line()
        self.cfg = CanvasConfig()
        self.relay = RelayConfig()

    def pixel_distance(self, canvas, a_km, b_km):
        a = canvas.to_float_pixel(*_ri(converged_impedance(self.net, a_km, self.relay)))
        b = canvas.to_float_pixel(*_ri(converged_impedance(self.net, b_km, self.relay)))
        return math.hypot(a[0] - b[0], a[1] - b[1])

    def test_line_canvas(self):
        """Test the default line window."""
        canvas = line_canvas(self.net, self.cfg)
        magnitude = abs(self.net.line.total_impedance.z1)
        self.assertAlmostEqual(canvas.r_min, -0.25 * magnitude)
        self.assertAlmostEqual(canvas.x_max, 1.25 * magnitude)
        self.assertEqual((canvas.width, canvas.height), (128, 128))

    def test_section_canvas(self):
        """Test the cable window centred on the nominal cable span."""
        canvas = section_canvas(self.net, 1, replace(self.cfg, cable_margin=2.5))
        centre_r = 0.5 * (canvas.r_min + canvas.r_max)
        centre_x = 0.5 * (canvas.x_min + canvas.x_max)
        self.assertAlmostEqual(centre_r, 9.2, places=9)
        self.assertAlmostEqual(centre_x, 85.05, places=9)
        self.assertAlmostEqual(canvas.x_max - canvas.x_min, 5.0 * abs(0.4 + 2.1j), places=9)

    def test_converged_canvas_centre_and_size(self):
        """Test the cable window spans 1.5 times the settled impedance span around its midpoint."""
        canvas = converged_canvas(self.net, 1, self.cfg, self.relay)
        start = converged_impedance(self.net, 200.0, self.relay)
        end = converged_impedance(self.net, 210.0, self.relay)
        self.assertAlmostEqual(0.5 * (canvas.r_min + canvas.r_max), 0.5 * (start + end).real, places=9)
        self.assertAlmostEqual(0.5 * (canvas.x_min + canvas.x_max), 0.5 * (start + end).imag, places=9)
        self.assertAlmostEqual(canvas.x_max - canvas.x_min, 1.5 * abs(end - start), places=9)

    def test_converged_canvas_resolves_location(self):
        """Test that the settled end point travels most of the canvas across each section."""
        cable = converged_canvas(self.net, 1, self.cfg, self.relay)
        self.assertGreater(self.pixel_distance(cable, 200.2, 209.8), 60.0)
        overhead = converged_canvas(self.net, 0, self.cfg, self.relay)
        self.assertGreater(self.pixel_distance(overhead, 20.0, 195.0), 60.0)
        for km in (200.2, 205.0, 209.8):
            col, row = cable.to_pixel(*_ri(converged_impedance(self.net, km, self.relay)))
            self.assertTrue(0 <= col < 128 and 0 <= row < 128)

    def test_trajectory_ends_inside_converged_canvas(self):
        """Test that a simulated cable fault finishes inside the window and is drawn."""
        fault = FaultScenario(205.0)
        traj = simulate_trajectory(self.net, fault, self.relay)
        canvas = converged_canvas(self.net, 1, self.cfg, self.relay)
        col, row = canvas.to_pixel(traj.final.real, traj.final.imag)
        self.assertTrue(0 <= col < 128 and 0 <= row < 128)
        img = render_rx_image(traj, zone_reach(self.net, self.cfg), canvas, line_angle=line_angle(self.net))
        self.assertEqual(img.pixels[row, col], TRAJECTORY_INTENSITY)

    def test_canvas_for_uses_framing(self):
        """Test the default converged framing and the per-topology overrides."""
        self.assertEqual(
            canvas_for(self.net, 1, self.cfg, self.relay),
            converged_canvas(self.net, 1, self.cfg, self.relay),
        )
        self.assertEqual(canvas_for(self.net, 0, self.cfg), converged_canvas(self.net, 0, self.cfg, self.relay))
        mixed = replace(self.cfg, overhead_framing="line", cable_framing="section")
        self.assertEqual(canvas_for(self.net, 0, mixed), line_canvas(self.net, mixed))
        self.assertEqual(canvas_for(self.net, 1, mixed), section_canvas(self.net, 1, mixed))

    def test_zone_reach(self):
        """Test the default 80 percent reach."""
        self.assertAlmostEqual(
            zone_reach(self.net, self.cfg), 0.8 * abs(self.net.line.total_impedance.z1)
        )

    def test_bad_section(self):
        """Test that an unknown section index is rejected."""
        with self.assertRaises(ConfigError):
            section_canvas(self.net, 5, self.cfg)
        with self.assertRaises(ConfigError):
            canvas_for(self.net, 3, self.cfg)


def _ri(z):
    return z.real, z.imag


if __name__ == "__main__":
    unittest.main()
