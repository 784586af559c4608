"""Grids, conserved states, and pointwise shallow-water relations.

Conserved variables are the water depth h [m] and the unit discharge
q = h*u [m^2/s] (plus qy in 2D). Fields are stored as one contiguous
array per variable (structure of arrays); 2D arrays are laid out
row-major as (ny, nx), x varying fastest.
"""

from dataclasses import dataclass, field

import numpy as np

G_DEFAULT = 9.81
# Depths at or below this are treated as dry: velocity is zero and the
# cell carries no momentum.
H_EPS = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian grid of cell centers.

    nx, ny: number of cells per direction (ny == 1 means a 1D domain).
    dx, dy: cell sizes [m], strictly positive.
    x0, y0: coordinates of the lower-left corner of the domain [m].
    """

    nx: int
    dx: float
    ny: int = 1
    dy: float = 1.0
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.nx <= 0 or self.ny <= 0:
            raise ValueError(f"grid needs positive cell counts, got nx={self.nx} ny={self.ny}")
        if not (self.dx > 0.0) or not (self.dy > 0.0):
            raise ValueError(f"grid needs positive cell sizes, got dx={self.dx} dy={self.dy}")

    @property
    def is_1d(self):
        return self.ny == 1

    def cell_centers_x(self):
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def cell_centers_y(self):
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    @property
    def length_x(self):
        return self.nx * self.dx

    @property
    def length_y(self):
        return self.ny * self.dy


@dataclass
class State1D:
    """Conserved state on a 1D grid: depth h (nx,) and discharge q (nx,)."""

    h: np.ndarray
    q: np.ndarray

    def copy(self):
        return State1D(self.h.copy(), self.q.copy())


@dataclass
class State2D:
    """Conserved state on a 2D grid: h, qx, qy, each shaped (ny, nx)."""

    h: np.ndarray
    qx: np.ndarray
    qy: np.ndarray

    def copy(self):
        return State2D(self.h.copy(), self.qx.copy(), self.qy.copy())


def velocity(h, q, h_eps=H_EPS):
    """Velocity q/h with the dry convention: u = 0 where h <= h_eps."""
    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    wet = h > h_eps
    out = np.zeros(np.broadcast(h, q).shape)
    np.divide(q, h, out=out, where=wet)
    return out


def physical_flux_1d(h, q, g=G_DEFAULT):
    """Exact flux (q, q*u + g*h^2/2) of the 1D shallow-water system."""
    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    u = velocity(h, q)
    return q, q * u + 0.5 * g * h**2


def eigenvalues_1d(h, q, g=G_DEFAULT):
    """Characteristic speeds (u - sqrt(g*h), u + sqrt(g*h))."""
    u = velocity(h, q)
    c = np.sqrt(g * np.maximum(np.asarray(h, dtype=float), 0.0))
    return u - c, u + c


def eigenvalues_2d(h, qx, qy, direction, g=G_DEFAULT):
    """Characteristic speeds along a unit direction (dx, dy).

    Returns (un - c, un, un + c) where un is the velocity component
    along the direction and c = sqrt(g*h).
    """
    dx, dy = direction
    norm = np.hypot(dx, dy)
    if not np.isclose(norm, 1.0, rtol=1e-12, atol=1e-12):
        raise ValueError(f"direction must be a unit vector, got {direction}")
    un = dx * velocity(h, qx) + dy * velocity(h, qy)
    c = np.sqrt(g * np.maximum(np.asarray(h, dtype=float), 0.0))
    return un - c, un, un + c


def froude_number(h, q, g=G_DEFAULT):
    """Froude number |u| / sqrt(g*h); zero where dry."""
    h = np.asarray(h, dtype=float)
    u = velocity(h, q)
    wet = h > H_EPS
    c = np.sqrt(g * np.where(wet, h, 1.0))
    return np.where(wet, np.abs(u) / c, 0.0)


def froude_number_2d(h, qx, qy, g=G_DEFAULT):
    """Froude number |(u, v)| / sqrt(g*h); zero where dry."""
    h = np.asarray(h, dtype=float)
    speed = np.hypot(velocity(h, qx), velocity(h, qy))
    wet = h > H_EPS
    c = np.sqrt(g * np.where(wet, h, 1.0))
    return np.where(wet, speed / c, 0.0)


def critical_depth(q, g=G_DEFAULT):
    """Depth at which the flow with discharge q is exactly critical.

    h_c = (|q| / sqrt(g))**(2/3); the flow is subcritical iff h > h_c.
    """
    return (np.abs(np.asarray(q, dtype=float)) / np.sqrt(g)) ** (2.0 / 3.0)


def total_volume(state, grid):
    """Water volume: sum(h)*dx in 1D [m^2], sum(h)*dx*dy in 2D [m^3]."""
    if isinstance(state, State1D):
        return float(np.sum(state.h) * grid.dx)
    return float(np.sum(state.h) * grid.dx * grid.dy)
