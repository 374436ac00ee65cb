"""Physical-world domain types and a synthetic scenario simulator.

The simulator generates correlated per-beam received-power streams and 2D
LiDAR point clouds for a transmitter-mounted sensor watching vehicles move
along a road, together with ground-truth object positions and link
blockage flags. It stands in for a hardware testbed at desk scale.

Signal model, per beam and subcarrier: the received sample is the beam's
complex amplitude plus circular Gaussian noise. The amplitude sums a
direct path toward the receiver (attenuated by a fixed dB amount while the
line of sight is occluded) and one scattered path per vehicle, arriving
from the vehicle's bearing and decaying with the two-hop distance. Beam
gain is a raised-cosine main lobe of width fov/M around each steering
direction, so the power vector carries the bearing of both the receiver
and the scatterers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError

TWO_PI = 2.0 * math.pi

# Tolerance for "point lies on an obstacle boundary" checks.
BOUNDARY_TOL = 1e-9


def ensure_finite(name: str, values) -> np.ndarray:
    """Return values as a float array, raising NonFiniteError on NaN/Inf."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class BeamCodebook:
    """Fixed set of steering directions partitioning the transmit FoV."""

    num_beams: int
    theta_offset: float
    fov: float
    steering_dirs: tuple[float, ...]

    def __post_init__(self):
        if self.num_beams < 1:
            raise ValueError("num_beams must be >= 1")
        if not (0.0 < self.fov <= TWO_PI):
            raise ValueError("fov must be in (0, 2*pi]")
        if len(self.steering_dirs) != self.num_beams:
            raise ValueError("steering_dirs length must equal num_beams")
        dirs = np.asarray(self.steering_dirs)
        if self.num_beams > 1 and not np.all(np.diff(dirs) > 0):
            raise ValueError("steering_dirs must be strictly increasing")
        lo, hi = self.theta_offset, self.theta_offset + self.fov
        if np.any(dirs < lo - 1e-12) or np.any(dirs > hi + 1e-12):
            raise ValueError("steering_dirs must lie within the field of view")

    @property
    def beam_width(self) -> float:
        return self.fov / self.num_beams


def build_codebook(num_beams: int, theta_offset: float, fov: float) -> BeamCodebook:
    """Evenly spaced beam centers: dir_m = offset + (m + 1/2) * fov / M."""
    if num_beams < 1:
        raise ValueError("num_beams must be >= 1")
    if fov <= 0:
        raise ValueError("fov must be positive")
    step = fov / num_beams
    dirs = tuple(theta_offset + (m + 0.5) * step for m in range(num_beams))
    return BeamCodebook(num_beams, theta_offset, fov, dirs)


@dataclass(frozen=True)
class ChannelConfig:
    """OFDM channel knobs. blocked_attenuation_db and scatter_gain are
    simulator-only; real captures carry whatever the hardware saw."""

    num_subcarriers: int = 64
    noise_variance: float = 1e-4
    blocked_attenuation_db: float = 25.0
    scatter_gain: float = 10.0
    scatter_fluctuation_db: float = 0.0
    symbol_power: float = 1.0

    def __post_init__(self):
        if self.num_subcarriers < 1:
            raise ValueError("num_subcarriers must be >= 1")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        if self.blocked_attenuation_db <= 0:
            raise ValueError("blocked_attenuation_db must be > 0")
        if self.scatter_gain < 0:
            raise ValueError("scatter_gain must be >= 0")
        if self.scatter_fluctuation_db < 0:
            raise ValueError("scatter_fluctuation_db must be >= 0")


@dataclass(frozen=True)
class RssiFrame:
    """Per-beam received power (linear units) at one time step."""

    t: int
    powers: np.ndarray

    def __post_init__(self):
        arr = ensure_finite("powers", self.powers)
        if arr.ndim != 1:
            raise ValueError("powers must be a 1-D vector")
        if np.any(arr < 0):
            raise ValueError("powers must be nonnegative")
        object.__setattr__(self, "powers", arr)


def total_power(frame: RssiFrame) -> float:
    """Total received power across all beams; drives the blockage flag."""
    return float(np.sum(frame.powers))


@dataclass(frozen=True)
class LidarScan:
    """Polar point set at one time step: rows of (angle [rad], depth [m])."""

    t: int
    points: np.ndarray

    def __post_init__(self):
        arr = ensure_finite("points", self.points)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if arr.shape[0]:
            if np.any(arr[:, 0] < 0) or np.any(arr[:, 0] >= TWO_PI):
                raise ValueError("angles must lie in [0, 2*pi)")
            if np.any(arr[:, 1] <= 0):
                raise ValueError("depths must be positive")
        object.__setattr__(self, "points", arr)


@dataclass(frozen=True)
class Vehicle:
    """Axis-aligned rectangle: width along x, depth along y, moving at
    velocity (meters per step)."""

    center: tuple[float, float]
    width: float
    depth: float
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.width <= 0 or self.depth <= 0:
            raise ValueError("vehicle width and depth must be positive")


@dataclass(frozen=True)
class WorldState:
    """Scene description: link endpoints, movers, static scenery.

    bounce_x, when set, reflects vehicle x-velocity at the given bounds so
    a single vehicle can cross the link repeatedly in one long run;
    without it vehicles advance linearly.
    """

    tx_pos: tuple[float, float]
    rx_pos: tuple[float, float]
    vehicles: tuple[Vehicle, ...] = ()
    static_obstacles: tuple[tuple[float, float, float, float], ...] = ()
    lidar_max_range: float = 16.0
    bounce_x: tuple[float, float] | None = None

    def __post_init__(self):
        if tuple(self.tx_pos) == tuple(self.rx_pos):
            raise ValueError("tx_pos and rx_pos must differ")
        if self.lidar_max_range <= 0:
            raise ValueError("lidar_max_range must be positive")
        if self.bounce_x is not None and self.bounce_x[0] >= self.bounce_x[1]:
            raise ValueError("bounce_x must be an increasing (min, max) pair")


@dataclass(frozen=True)
class BlockageLabel:
    t: int
    blocked: bool


@dataclass(frozen=True)
class GroundTruth:
    """Simulator-only truth: dominant object center (world frame) or None."""

    t: int
    pos: tuple[float, float] | None
    blocked: bool


@dataclass
class SimulationResult:
    frames: list[RssiFrame]
    scans: list[LidarScan]
    truth: list[GroundTruth]
    labels: list[BlockageLabel]
    power_threshold: float | None


def _rect_bounds(center, width, depth):
    cx, cy = center
    return cx - width / 2.0, cy - depth / 2.0, cx + width / 2.0, cy + depth / 2.0


def segment_intersects_rect(p, q, center, width, depth) -> bool:
    """Closed-boundary segment vs axis-aligned rectangle test (Liang-Barsky)."""
    x0, y0, x1, y1 = _rect_bounds(center, width, depth)
    px, py = p
    dx, dy = q[0] - p[0], q[1] - p[1]
    t_lo, t_hi = 0.0, 1.0
    for delta, lo_gap, hi_gap in (
        (dx, px - x0, x1 - px),
        (dy, py - y0, y1 - py),
    ):
        for sign, gap in ((-delta, lo_gap), (delta, hi_gap)):
            if sign == 0.0:
                if gap < 0.0:
                    return False
            else:
                ratio = gap / sign
                if sign < 0.0:
                    t_lo = max(t_lo, ratio)
                else:
                    t_hi = min(t_hi, ratio)
                if t_lo > t_hi:
                    return False
    return True


def _rect_edges(center, width, depth):
    x0, y0, x1, y1 = _rect_bounds(center, width, depth)
    return [
        (x0, y0, x1, y0),
        (x1, y0, x1, y1),
        (x1, y1, x0, y1),
        (x0, y1, x0, y0),
    ]


def _cast_rays(origin, angles, segments, max_range):
    """Min positive ray-segment hit distance per angle; NaN when no hit."""
    ox, oy = origin
    dirs_x = np.cos(angles)
    dirs_y = np.sin(angles)
    best = np.full(angles.shape, np.inf)
    for x0, y0, x1, y1 in segments:
        ex, ey = x1 - x0, y1 - y0
        ax, ay = x0 - ox, y0 - oy
        denom = dirs_x * ey - dirs_y * ex
        with np.errstate(divide="ignore", invalid="ignore"):
            t_ray = (ax * ey - ay * ex) / denom
            s_seg = (ax * dirs_y - ay * dirs_x) / denom
        hit = (np.abs(denom) > 1e-15) & (t_ray > 1e-12) & (s_seg >= 0.0) & (s_seg <= 1.0)
        best = np.where(hit & (t_ray < best), t_ray, best)
    best[best > max_range] = np.inf
    return best


def beam_gains(codebook: BeamCodebook, bearing: float) -> np.ndarray:
    """Raised-cosine main-lobe amplitude of every beam toward a bearing."""
    dirs = np.asarray(codebook.steering_dirs)
    delta = np.mod(bearing - dirs + math.pi, TWO_PI) - math.pi
    half = codebook.beam_width / 2.0
    gains = 0.5 * (1.0 + np.cos(math.pi * delta / half))
    gains[np.abs(delta) > half] = 0.0
    return gains


def _advance(vehicles, bounce_x):
    moved = []
    for v in vehicles:
        cx = v.center[0] + v.velocity[0]
        cy = v.center[1] + v.velocity[1]
        vx = v.velocity[0]
        if bounce_x is not None:
            lo, hi = bounce_x
            if cx > hi:
                cx = 2.0 * hi - cx
                vx = -vx
            elif cx < lo:
                cx = 2.0 * lo - cx
                vx = -vx
        moved.append(Vehicle((cx, cy), v.width, v.depth, (vx, v.velocity[1])))
    return moved


def simulate_scenario(
    world: WorldState,
    codebook: BeamCodebook,
    channel: ChannelConfig,
    steps: int,
    seed: int,
    lidar_rays: int = 360,
) -> SimulationResult:
    """Run the scene forward; deterministic given identical arguments.

    Each step advances vehicles first, then measures: LoS occlusion, the
    per-beam power vector, a LiDAR sweep, and the truth record.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if lidar_rays < 1:
        raise ValueError("lidar_rays must be >= 1")

    rng = np.random.default_rng(seed)
    tx = tuple(map(float, world.tx_pos))
    rx = tuple(map(float, world.rx_pos))
    rx_bearing = math.atan2(rx[1] - tx[1], rx[0] - tx[0])
    los_gains = beam_gains(codebook, rx_bearing)
    att_amp = 10.0 ** (-channel.blocked_attenuation_db / 20.0)
    amp0 = math.sqrt(channel.symbol_power)
    ray_angles = np.arange(lidar_rays) * (TWO_PI / lidar_rays)
    num_k = channel.num_subcarriers
    sigma = channel.noise_variance

    vehicles = list(world.vehicles)
    frames: list[RssiFrame] = []
    scans: list[LidarScan] = []
    truth: list[GroundTruth] = []
    labels: list[BlockageLabel] = []

    for t in range(steps):
        vehicles = _advance(vehicles, world.bounce_x)

        occluded = any(
            segment_intersects_rect(tx, rx, v.center, v.width, v.depth)
            for v in vehicles
        )

        amps = los_gains * (amp0 * att_amp if occluded else amp0)
        for v in vehicles:
            d_tx = math.hypot(v.center[0] - tx[0], v.center[1] - tx[1])
            d_rx = math.hypot(v.center[0] - rx[0], v.center[1] - rx[1])
            bearing = math.atan2(v.center[1] - tx[1], v.center[0] - tx[0])
            scatter_amp = channel.scatter_gain / ((1.0 + d_tx) * (1.0 + d_rx))
            if channel.scatter_fluctuation_db > 0.0:
                # Per-step reflection strength wobble (log-normal), the
                # main source of randomness in the power vectors.
                scatter_amp *= 10.0 ** (
                    channel.scatter_fluctuation_db * rng.standard_normal() / 20.0
                )
            amps = amps + beam_gains(codebook, bearing) * scatter_amp

        if sigma > 0.0:
            noise_scale = math.sqrt(sigma / 2.0)
            noise = noise_scale * (
                rng.standard_normal((codebook.num_beams, num_k))
                + 1j * rng.standard_normal((codebook.num_beams, num_k))
            )
            samples = amps[:, None] + noise
            powers = np.sum(np.abs(samples) ** 2, axis=1)
        else:
            powers = num_k * amps**2
        frames.append(RssiFrame(t, powers))

        segments = list(world.static_obstacles)
        for v in vehicles:
            segments.extend(_rect_edges(v.center, v.width, v.depth))
        dists = _cast_rays(tx, ray_angles, segments, world.lidar_max_range)
        hit = np.isfinite(dists)
        scans.append(LidarScan(t, np.column_stack([ray_angles[hit], dists[hit]])))

        pos = tuple(map(float, vehicles[0].center)) if vehicles else None
        truth.append(GroundTruth(t, pos, occluded))
        labels.append(BlockageLabel(t, occluded))

    threshold = calibrate_power_threshold(frames, labels)
    return SimulationResult(frames, scans, truth, labels, threshold)


def calibrate_power_threshold(frames, labels) -> float | None:
    """dB midpoint between mean blocked and mean unblocked total power.

    Returns None when the run contains only one class.
    """
    totals = np.array([total_power(f) for f in frames])
    blocked = np.array([lab.blocked for lab in labels], dtype=bool)
    if not blocked.any() or blocked.all():
        return None
    db = 10.0 * np.log10(np.maximum(totals, 1e-300))
    midpoint = 0.5 * (db[blocked].mean() + db[~blocked].mean())
    return float(10.0 ** (midpoint / 10.0))
