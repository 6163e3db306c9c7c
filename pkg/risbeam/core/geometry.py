"""
Aperture geometry: element lattice, path lengths, the prolate spheroidal frame
and the conic sections cut by constant path-sum spheroids on the z = 0 plane.

Frame: the surface lies in z = 0 and is the disk x^2 + y^2 <= R^2, the TX sits
on the boresight axis at (0, 0, l_tx) and the DT at (0, l_dt sin(gamma),
l_dt cos(gamma)).
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import optimize

from risbeam.config.config import ROOT_XTOL
from risbeam.errors import ConfigError, DomainError

if TYPE_CHECKING:
    from risbeam.config.scenario import ScenarioConfig

HALF_PI = 0.5 * math.pi


def tx_position(cfg: "ScenarioConfig") -> np.ndarray:
    return np.array([0.0, 0.0, cfg.l_tx_m])


def dt_position(cfg: "ScenarioConfig") -> np.ndarray:
    return np.array([0.0, cfg.l_dt_m * math.sin(cfg.gamma_rad), cfg.l_dt_m * math.cos(cfg.gamma_rad)])


def path_lengths(x, y, cfg: "ScenarioConfig") -> Tuple[np.ndarray, np.ndarray]:
    """
    Distances TX -> (x, y, 0) and (x, y, 0) -> DT.

    Args:
        x, y: Scalars or arrays of surface coordinates (m)
        cfg: Scenario

    Returns:
        (l_TX, l_DT) with the broadcast shape of x and y
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _, y_d, z_d = dt_position(cfg)
    l_tx = np.sqrt(x * x + y * y + cfg.l_tx_m ** 2)
    l_dt = np.sqrt(x * x + (y - y_d) ** 2 + z_d ** 2)
    return l_tx, l_dt


def path_sum(x, y, cfg: "ScenarioConfig") -> np.ndarray:
    l_tx, l_dt = path_lengths(x, y, cfg)
    return l_tx + l_dt


@dataclass(frozen=True)
class ElementGrid:
    """Reflecting elements on the disk, with per-element path lengths."""

    x: np.ndarray
    y: np.ndarray
    l_tx_len: np.ndarray
    l_dt_len: np.ndarray
    l_sum: np.ndarray
    spacing: float
    scenario: "ScenarioConfig"

    @property
    def count(self) -> int:
        return int(self.x.size)

    @property
    def elements(self) -> np.ndarray:
        """(N, 2) array of element coordinates."""
        return np.column_stack([self.x, self.y])


def build_element_grid(cfg: "ScenarioConfig") -> ElementGrid:
    """
    Square lattice of pitch Delta with one element at the origin, clipped to the disk.

    Raises:
        ConfigError: if the aperture is smaller than half an element pitch
    """
    spacing = cfg.spacing_m
    radius = cfg.radius_m
    if radius < spacing / 2.0:
        raise ConfigError(f"radius_m={radius} is below half the element spacing ({spacing / 2.0}); "
                          f"the grid would be empty", key="radius_m")

    n = int(math.floor(radius / spacing + 1e-9))
    idx = np.arange(-n, n + 1, dtype=float) * spacing
    xx, yy = np.meshgrid(idx, idx, indexing="ij")
    inside = xx * xx + yy * yy <= radius * radius * (1.0 + 1e-12)
    x = np.ascontiguousarray(xx[inside])
    y = np.ascontiguousarray(yy[inside])

    l_tx, l_dt = path_lengths(x, y, cfg)
    return ElementGrid(x=x, y=y, l_tx_len=l_tx, l_dt_len=l_dt, l_sum=l_tx + l_dt,
                       spacing=spacing, scenario=cfg)


def gamma_c_from_gamma(gamma: float, l_tx: float, l_dt: float) -> float:
    """Angle between +z and the TX -> DT vector (two-argument arctangent)."""
    return math.atan2(l_dt * math.sin(gamma), l_dt * math.cos(gamma) - l_tx)


def gamma_from_gamma_c(gamma_c: float, l_tx: float, l_dt: float) -> float:
    """
    Invert gamma_c_from_gamma for the DT polar angle on (-pi/2, pi/2).

    Raises:
        ConfigError: if no DT angle in range produces the requested tilt
    """
    def residual(g):
        return gamma_c_from_gamma(g, l_tx, l_dt) - gamma_c

    lo, hi = -HALF_PI + 1e-12, HALF_PI - 1e-12
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo * f_hi > 0:
        raise ConfigError(f"No DT angle in (-90, 90) deg yields gamma_c = {math.degrees(gamma_c):.6g} deg "
                          f"for l_tx_m={l_tx}, l_dt_m={l_dt}", key="gamma_c_deg")

    gamma = optimize.brentq(residual, lo, hi, xtol=ROOT_XTOL, maxiter=500)
    # atan2 wraps at +/-pi when l_dt < l_tx; brentq then lands on the jump
    if abs(residual(gamma)) > 1e-9:
        raise ConfigError(f"No DT angle in (-90, 90) deg yields gamma_c = {math.degrees(gamma_c):.6g} deg",
                          key="gamma_c_deg")
    return gamma


def derive_gamma_c(cfg: "ScenarioConfig") -> float:
    """
    Tilt angle gamma_c of the scenario, from whichever angle the file gave.

    When gamma_c was given directly it is returned unchanged; the matching DT
    angle is then available as cfg.gamma_rad (solved at validation time).
    """
    if cfg.gamma_deg is not None:
        return gamma_c_from_gamma(math.radians(cfg.gamma_deg), cfg.l_tx_m, cfg.l_dt_m)
    gamma_c = math.radians(cfg.gamma_c_deg)
    # Confirms the inversion exists; raises ConfigError otherwise
    gamma_from_gamma_c(gamma_c, cfg.l_tx_m, cfg.l_dt_m)
    return gamma_c


class SpheroidalFrame(BaseModel):
    """Translation to the TX-DT midpoint plus rotation by gamma_c about x."""

    model_config = ConfigDict(frozen=True)

    a: float
    gamma_c: float
    x_c: float
    y_c: float
    z_c: float


class SpheroidalPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma: float
    tau: float
    psi: float
    frame: SpheroidalFrame


def spheroidal_frame(cfg: "ScenarioConfig") -> SpheroidalFrame:
    tx = tx_position(cfg)
    dt = dt_position(cfg)
    center = 0.5 * (tx + dt)
    a = 0.5 * float(np.linalg.norm(dt - tx))
    return SpheroidalFrame(a=a, gamma_c=cfg.gamma_c_rad, x_c=center[0], y_c=center[1], z_c=center[2])


def spheroidal_to_cartesian(p: SpheroidalPoint) -> Tuple[float, float, float]:
    """
    Map (sigma, tau, psi) to Cartesian coordinates of the scenario frame.

    Raises:
        DomainError: sigma < 1 or |tau| > 1
    """
    if p.sigma < 1.0:
        raise DomainError(f"sigma must be >= 1, got {p.sigma}")
    if abs(p.tau) > 1.0:
        raise DomainError(f"tau must lie in [-1, 1], got {p.tau}")

    f = p.frame
    q = f.a * math.sqrt((p.sigma ** 2 - 1.0) * (1.0 - p.tau ** 2))
    s_g, c_g = math.sin(f.gamma_c), math.cos(f.gamma_c)
    along = f.a * p.sigma * p.tau
    x = f.x_c + q * math.cos(p.psi)
    y = f.y_c + along * s_g + q * c_g * math.sin(p.psi)
    z = f.z_c + along * c_g - q * s_g * math.sin(p.psi)
    return x, y, z


def cartesian_to_spheroidal(point, frame: SpheroidalFrame) -> SpheroidalPoint:
    """Inverse of spheroidal_to_cartesian."""
    x, y, z = (float(v) for v in point)
    s_g, c_g = math.sin(frame.gamma_c), math.cos(frame.gamma_c)
    dx, dy, dz = x - frame.x_c, y - frame.y_c, z - frame.z_c
    x1 = dx
    y1 = c_g * dy - s_g * dz
    z1 = s_g * dy + c_g * dz

    rho2 = x1 * x1 + y1 * y1
    d_tx = math.sqrt(rho2 + (z1 + frame.a) ** 2)
    d_dt = math.sqrt(rho2 + (z1 - frame.a) ** 2)
    sigma = max(1.0, (d_tx + d_dt) / (2.0 * frame.a))
    tau = min(1.0, max(-1.0, (d_tx - d_dt) / (2.0 * frame.a)))
    psi = math.atan2(y1, x1) % (2.0 * math.pi)
    return SpheroidalPoint(sigma=sigma, tau=tau, psi=psi, frame=frame)


class EllipseSection(BaseModel):
    """Conic {(x, y, 0) : l_TX + l_DT = l}, x = x_e + a_e cos(t), y = y_e + b_e sin(t)."""

    model_config = ConfigDict(frozen=True)

    l: float
    x_e: float
    y_e: float
    a_e: float
    b_e: float
    theta1: float = -HALF_PI
    theta2: float = 1.5 * math.pi
    fully_inside: bool = True

    def point(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.x_e + self.a_e * np.cos(theta), self.y_e + self.b_e * np.sin(theta)

    @property
    def retains_bottom(self) -> bool:
        """The extreme at theta = -pi/2 is the one nearer the origin."""
        return self.y_e >= 0.0

    @property
    def arcs(self) -> List[Tuple[float, float]]:
        """Parameter intervals of the section that lie on the aperture."""
        if self.fully_inside:
            return [(-HALF_PI, 1.5 * math.pi)]
        if self.retains_bottom:
            return [(-HALF_PI, self.theta1), (self.theta2, 1.5 * math.pi)]
        return [(self.theta1, self.theta2)]


def _conic_parameters(l: float, cfg: "ScenarioConfig") -> Tuple[float, float, float]:
    """(y_e, c_y, rho) of x^2 + c_y (y - y_e)^2 = rho."""
    y_d = cfg.l_dt_m * math.sin(cfg.gamma_rad)
    l2 = l * l
    p = l2 - cfg.l_dt_m ** 2 + cfg.l_tx_m ** 2
    c_y = 1.0 - (y_d * y_d) / l2
    y_e = p * y_d / (2.0 * (l2 - y_d * y_d))
    rho = p * p / (4.0 * l2) - cfg.l_tx_m ** 2 + c_y * y_e * y_e
    return y_e, c_y, rho


def ellipse_section(l: float, cfg: "ScenarioConfig", clip: bool = True) -> EllipseSection:
    """
    Centre and semi-axes of the section of the aperture plane at path sum l.

    Args:
        l: Path sum (m)
        cfg: Scenario
        clip: Fill theta1/theta2/fully_inside against the aperture circle

    Raises:
        DomainError: l below the plane-tangency value (empty intersection)
    """
    y_e, c_y, rho = _conic_parameters(l, cfg)
    if rho < 0.0:
        if rho > -1e-12 * l * l:
            rho = 0.0
        else:
            raise DomainError(f"path sum l={l!r} is below the plane tangency value; the section is empty")

    section = EllipseSection(l=l, x_e=0.0, y_e=y_e, a_e=math.sqrt(rho), b_e=math.sqrt(rho / c_y))
    if not clip:
        return section
    theta1, theta2, fully_inside = clip_to_aperture(section, cfg.radius_m)
    return section.model_copy(update={"theta1": theta1, "theta2": theta2, "fully_inside": fully_inside})


def clip_to_aperture(e: EllipseSection, radius: float) -> Tuple[float, float, bool]:
    """
    Parameter angles where the section crosses the aperture circle.

    With b_e >= a_e the squared radius along the section is a convex quadratic
    in sin(theta), so its extremes over theta sit at theta = +/- pi/2.

    Returns:
        (theta1, theta2, fully_inside) with theta1 in [-pi/2, pi/2] and
        theta2 in [pi/2, 3pi/2]

    Raises:
        DomainError: the section lies entirely outside the disk
    """
    r2 = radius * radius

    def excess(theta):
        x, y = e.point(theta)
        return float(x * x + y * y - r2)

    tol = 1e-12 * r2
    top, bottom = excess(HALF_PI), excess(-HALF_PI)
    if max(top, bottom) <= tol:
        return -HALF_PI, 1.5 * math.pi, True
    if min(top, bottom) > tol:
        raise DomainError(f"section at l={e.l!r} lies outside the aperture (empty arc)")

    theta1 = optimize.brentq(excess, -HALF_PI, HALF_PI, xtol=ROOT_XTOL, maxiter=500)
    theta2 = optimize.brentq(excess, HALF_PI, 1.5 * math.pi, xtol=ROOT_XTOL, maxiter=500)
    return theta1, theta2, False


def _outer_radius(l: float, cfg: "ScenarioConfig") -> float:
    """Largest distance from the origin reached by the section at l."""
    e = ellipse_section(l, cfg, clip=False)
    return abs(e.y_e) + e.b_e


class PathSumBounds(NamedTuple):
    l_min: float
    l_mid: Optional[float]
    l_max: float
    tangent_point_inside: bool


def plane_tangency(cfg: "ScenarioConfig") -> Tuple[float, float]:
    """
    Smallest path sum over the whole z = 0 plane and the y-coordinate where it is reached.

    The minimiser lies on the segment from the TX to the mirror image of the DT.
    """
    _, y_d, z_d = dt_position(cfg)
    l_tangent = math.hypot(y_d, cfg.l_tx_m + z_d)
    y_tangent = y_d * cfg.l_tx_m / (cfg.l_tx_m + z_d)
    return l_tangent, y_tangent


def _continuous_minimum(grid: ElementGrid) -> Tuple[float, bool]:
    cfg = grid.scenario
    radius = cfg.radius_m
    seed = int(np.argmin(grid.l_sum))

    result = optimize.minimize(
        lambda p: float(path_sum(p[0], p[1], cfg)),
        x0=np.array([grid.x[seed], grid.y[seed]]),
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda p: radius * radius - p[0] * p[0] - p[1] * p[1]}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    l_best = float(min(result.fun, grid.l_sum[seed]))

    l_tangent, y_tangent = plane_tangency(cfg)
    if abs(y_tangent) <= radius:
        return min(l_best, l_tangent), True

    # Constraint active: polish along the boundary circle
    boundary = optimize.minimize_scalar(
        lambda t: float(path_sum(radius * math.cos(t), radius * math.sin(t), cfg)),
        bounds=(-math.pi, math.pi), method="bounded", options={"xatol": 1e-12},
    )
    l_boundary = float(path_sum(0.0, math.copysign(radius, y_tangent), cfg))
    return min(l_best, float(boundary.fun), l_boundary), False


def boundary_maximum(cfg: "ScenarioConfig") -> float:
    """Largest path sum on the aperture circle (coarse scan, then a bounded refine)."""
    radius = cfg.radius_m

    def negative(t):
        return -float(path_sum(radius * math.cos(t), radius * math.sin(t), cfg))

    coarse = np.linspace(-math.pi, math.pi, 721)
    values = np.array([negative(t) for t in coarse])
    k = int(np.argmin(values))
    step = coarse[1] - coarse[0]
    refined = optimize.minimize_scalar(negative, bounds=(coarse[k] - step, coarse[k] + step),
                                       method="bounded", options={"xatol": 1e-12})
    return max(-float(refined.fun), -float(values[k]))


def path_sum_bounds(grid: ElementGrid) -> PathSumBounds:
    """
    Continuous path-sum interval of the aperture.

    l_min is minimised over the disk (seeded from the best lattice element),
    l_max over the boundary circle, and l_mid is the smallest l whose section
    touches the circle (only when the plane tangency point lies on the disk).
    """
    if grid.count == 0:
        raise ConfigError("element grid is empty")

    cfg = grid.scenario
    l_min, inside = _continuous_minimum(grid)
    l_max = boundary_maximum(cfg)

    l_mid = None
    if inside:
        radius = cfg.radius_m
        if _outer_radius(l_max, cfg) - radius <= 1e-12 * radius:
            l_mid = l_max
        else:
            l_mid = optimize.bisect(lambda l: _outer_radius(l, cfg) - radius, l_min, l_max,
                                    xtol=1e-14, maxiter=500)
    return PathSumBounds(l_min=l_min, l_mid=l_mid, l_max=l_max, tangent_point_inside=inside)
