"""Periodic dimer geometry.

A unit cell of length ``L`` along ``x1`` holds two disks of radius ``R_D``
whose centres are ``+/- (d/2)(cos theta, sin theta)``.  Disk 1 sits at the
``+`` centre, disk 2 at the ``-`` centre, so the point reflection
``x -> -x`` maps one disk onto the other.  ``x2`` is the direction
transverse to the screen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MetascreenConfig:
    """Geometry and material parameters of the dimer metascreen.

    Attributes
    ----------
    L : float
        Lattice period.
    R_D : float
        Disk radius.
    d : float
        Centre-to-centre separation of the two disks.
    theta : float
        Dimer inclination against the lattice axis, counterclockwise, radians.
    delta : float
        Material contrast parameter.
    v_b : float
        Wave speed inside the disks.
    v : float
        Exterior wave speed; only ``1`` is supported.
    """

    L: float = 1.0
    R_D: float = 0.05
    d: float = 0.3
    theta: float = 0.05 * math.pi
    delta: float = 1e-3
    v_b: float = 1.0
    v: float = field(default=1.0)

    @property
    def area(self) -> float:
        """Area of a single disk."""
        return math.pi * self.R_D**2

    def replace(self, **changes) -> "MetascreenConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class Incidence:
    """Fixed incidence direction ``(alpha0, w_perp)`` with unit length."""

    alpha0: float = 0.0

    def __post_init__(self):
        if not abs(self.alpha0) < 1.0:
            raise ValueError(f"|alpha0| must be < 1, got {self.alpha0}")

    @property
    def w_perp(self) -> float:
        return math.sqrt(1.0 - self.alpha0**2)

    @property
    def direction(self) -> np.ndarray:
        return np.array([self.alpha0, self.w_perp])

    def wavevectors(self, omega: complex) -> tuple[np.ndarray, np.ndarray]:
        """Upgoing and downgoing wave vectors ``k_+ , k_-`` at frequency ``omega``."""
        kp = omega * np.array([self.alpha0, self.w_perp])
        km = omega * np.array([self.alpha0, -self.w_perp])
        return kp, km


def reduce_quasimomentum(alpha: float, L: float = 1.0) -> float:
    """Map ``alpha`` into the Brillouin zone ``[-pi/L, pi/L)``."""
    period = 2 * math.pi / L
    return (alpha + math.pi / L) % period - math.pi / L


def disk_centers(cfg: MetascreenConfig) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * cfg.d * np.array([math.cos(cfg.theta), math.sin(cfg.theta)])
    return half, -half


def boundary_point(cfg: MetascreenConfig, disk: int, t) -> np.ndarray:
    """Point(s) on the boundary of ``disk`` (1 or 2) at polar angle(s) ``t``.

    Returns an array of shape ``(..., 2)``.
    """
    if disk not in (1, 2):
        raise ValueError("disk must be 1 or 2")
    c = disk_centers(cfg)[disk - 1]
    t = np.asarray(t, dtype=float)
    return c + cfg.R_D * np.stack([np.cos(t), np.sin(t)], axis=-1)


def outward_normal(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def arc_length_weight(cfg: MetascreenConfig, t) -> np.ndarray:
    """Jacobian ``|dx/dt|``, constant ``R_D`` on a circle."""
    return np.full(np.shape(t), cfg.R_D, dtype=float)


def validate(cfg: MetascreenConfig) -> list[str]:
    """Return a list of violated invariants; an empty list means valid."""
    problems = []
    if cfg.L <= 0:
        problems.append("L must be positive")
    if cfg.R_D <= 0:
        problems.append("R_D must be positive")
    if not cfg.d > 2 * cfg.R_D:
        problems.append("disks overlap: need d > 2*R_D")
    if not cfg.d * abs(math.cos(cfg.theta)) + 2 * cfg.R_D < cfg.L:
        problems.append("dimer exceeds cell: need d*|cos(theta)| + 2*R_D < L")
    if not 0 < cfg.delta < 1:
        problems.append("delta must lie in (0, 1)")
    if cfg.v_b <= 0:
        problems.append("v_b must be positive")
    if cfg.v != 1.0:
        problems.append("exterior wave speed v is fixed to 1")
    return problems


def check(cfg: MetascreenConfig) -> MetascreenConfig:
    problems = validate(cfg)
    if problems:
        raise ValueError("invalid metascreen: " + "; ".join(problems))
    return cfg
