"""Source terms: bed friction, rain, and Green-Ampt infiltration.

Friction is applied semi-implicitly after the convective update of a
stage: the updated discharge is divided by a positive damping factor
built from the pre-step state, which keeps the update unconditionally
stable and never flips the flow direction. Rain and infiltration act
on the depth only.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import G_DEFAULT, H_EPS

FRICTION_LAWS = ("none", "manning", "darcy_weisbach")
# Chezy C and Strickler K are accepted as aliases and converted to the
# two implemented laws: f = 8*g/C^2 (Darcy-Weisbach), n = 1/K (Manning).
FRICTION_ALIASES = ("chezy", "strickler")


@dataclass(frozen=True)
class FrictionParams:
    law: str = "none"
    coefficient: float = 0.0

    def __post_init__(self):
        if self.law not in FRICTION_LAWS:
            raise ValueError(
                f"unknown friction law {self.law!r}; choose one of {FRICTION_LAWS}"
                f" (or aliases {FRICTION_ALIASES} via resolve_friction)")
        if self.law != "none" and not self.coefficient > 0.0:
            raise ValueError(f"friction law {self.law!r} needs a positive coefficient")


def resolve_friction(law, coefficient, g=G_DEFAULT):
    """Build FrictionParams, converting the Chezy / Strickler aliases."""
    if law == "chezy":
        if not coefficient > 0.0:
            raise ValueError("chezy coefficient must be positive")
        return FrictionParams("darcy_weisbach", 8.0 * g / coefficient**2)
    if law == "strickler":
        if not coefficient > 0.0:
            raise ValueError("strickler coefficient must be positive")
        return FrictionParams("manning", 1.0 / coefficient)
    return FrictionParams(law, coefficient)


def friction_damping_factor(q_norm_n, h_n, h_np1, params, dt, g=G_DEFAULT,
                            h_eps=H_EPS):
    """Factor D >= 1 such that q_new = q_star / D.

    Manning:          D = 1 + g n^2 dt |q^n| / (h^n (h^{n+1})^{4/3})
    Darcy-Weisbach:   D = 1 + dt (f/8) |q^n| / (h^n h^{n+1})

    Cells dry at either time level get D = 1 (their discharge is zeroed
    by  the dry convention elsewhere).
    """
    if params.law == "none":
        return np.ones_like(np.asarray(h_np1, dtype=float))
    h_n = np.asarray(h_n, dtype=float)
    h_np1 = np.asarray(h_np1, dtype=float)
    wet = (h_n > h_eps) & (h_np1 > h_eps)
    h_n_safe = np.where(wet, h_n, 1.0)
    h_np1_safe = np.where(wet, h_np1, 1.0)
    if params.law == "manning":
        # h^(4/3) via cbrt: a dedicated ufunc, much cheaper than pow.
        denom = h_n_safe * (h_np1_safe * np.cbrt(h_np1_safe))
        term = g * params.coefficient**2 * dt * np.abs(q_norm_n) / denom
    else:  # darcy_weisbach
        denom = h_n_safe * h_np1_safe
        term = dt * (params.coefficient / 8.0) * np.abs(q_norm_n) / denom
    return np.where(wet, 1.0 + term, 1.0)


def friction_semi_implicit(q_star, q_n, h_n, h_np1, params, dt, g=G_DEFAULT,
                           h_eps=H_EPS):
    """Apply friction to a 1D discharge after the convective update.

    q_star is the post-convection discharge, (h_n, q_n) the state the
    stage started from, h_np1 the post-convection depth. The depth is
    not modified by friction.
    """
    factor = friction_damping_factor(q_n, h_n, h_np1, params, dt, g, h_eps)
    return np.asarray(q_star, dtype=float) / factor


def friction_semi_implicit_2d(qx_star, qy_star, qx_n, qy_n, h_n, h_np1,
                              params, dt, g=G_DEFAULT, h_eps=H_EPS):
    """2D variant: one scalar damping factor from |q^n| for both components."""
    q_norm = np.hypot(np.asarray(qx_n, dtype=float), np.asarray(qy_n, dtype=float))
    factor = friction_damping_factor(q_norm, h_n, h_np1, params, dt, g, h_eps)
    return (np.asarray(qx_star, dtype=float) / factor,
            np.asarray(qy_star, dtype=float) / factor)


@dataclass(frozen=True)
class Hyetograph:
    """Piecewise-constant rain intensity [m/s] over time.

    times must be strictly increasing; the rate before the first entry
    is zero and each entry holds until the next one.
    """

    times: tuple = ()
    intensities: tuple = ()

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        intensities = tuple(float(i) for i in self.intensities)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "intensities", intensities)
        if len(times) != len(intensities):
            raise ValueError("hyetograph needs one intensity per time")
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("hyetograph times must be strictly increasing")
        if any(i < 0.0 for i in intensities):
            raise ValueError("rain intensities must be nonnegative")

    def rate(self, t):
        idx = np.searchsorted(self.times, t, side="right") - 1
        return self.intensities[idx] if idx >= 0 else 0.0

    def change_times(self):
        return self.times


def rain_rate(t, hyetograph):
    """Rain intensity [m/s] at time t; zero without a hyetograph."""
    if hyetograph is None:
        return 0.0
    return hyetograph.rate(t)


@dataclass(frozen=True)
class GreenAmptParams:
    """Two-layer Green-Ampt soil parameters (uniform or per cell).

    ks: saturated conductivity of the soil [m/s] (the whole column
        when zc == 0, the layer below the crust otherwise)
    kc: saturated conductivity of the crust layer on top [m/s]
    zc: crust thickness [m]; 0 selects the single-layer model
    hf: wetting-front suction head [m]
    dtheta: saturated minus initial water content [-], in (0, 1]
    imax: optional cap on the infiltration rate [m/s]; None caps at
          whatever water is available during the step
    """

    ks: float
    kc: float = 0.0
    zc: float = 0.0
    hf: float = 0.0
    dtheta: float = 1.0
    imax: Optional[float] = None

    def __post_init__(self):
        if not self.ks > 0.0:
            raise ValueError("ks must be positive")
        if self.zc < 0.0:
            raise ValueError("zc must be nonnegative")
        if self.zc > 0.0 and not self.kc > 0.0:
            raise ValueError("a crust of nonzero thickness needs kc > 0")
        if not 0.0 < self.dtheta <= 1.0:
            raise ValueError("dtheta must lie in (0, 1]")
        if self.hf < 0.0:
            raise ValueError("hf must be nonnegative")
        if self.imax is not None and self.imax < 0.0:
            raise ValueError("imax must be nonnegative")


@dataclass
class GreenAmptState:
    """Infiltration state: cumulative infiltrated depth per cell [m]."""

    params: GreenAmptParams
    v_inf: np.ndarray

    @classmethod
    def zeros(cls, params, shape):
        return cls(params, np.zeros(shape))


def effective_conductivity(params, z_front):
    """Harmonic-mean conductivity of the wetted column of depth z_front.

    Single layer (zc == 0) gives ks; a front inside the crust gives kc;
    once the front passes the crust the two layers act in series.
    """
    z_front = np.asarray(z_front, dtype=float)
    if params.zc == 0.0:
        return np.full_like(z_front, params.ks)
    in_crust = z_front <= params.zc
    z_safe = np.where(z_front > 0.0, z_front, 1.0)
    series = z_safe / ((z_safe - params.zc) / params.ks + params.zc / params.kc)
    return np.where(in_crust, params.kc, series)


def infiltration_capacity(params, v_inf, h_surface):
    """Potential infiltration rate I_C [m/s] for ponded depth h_surface.

    I_C = K (1 + (hf + h_surface) / z_front) with z_front = v_inf/dtheta.
    An unstarted front (v_inf == 0) has unbounded capacity, returned as
    inf and meant to be clipped by the per-step limiter.
    """
    v_inf = np.asarray(v_inf, dtype=float)
    h_surface = np.asarray(h_surface, dtype=float)
    z_front = v_inf / params.dtheta
    started = z_front > 0.0
    z_safe = np.where(started, z_front, 1.0)
    k = effective_conductivity(params, z_front)
    capacity = k * (1.0 + (params.hf + h_surface) / z_safe)
    return np.where(started, capacity, np.inf)


def infiltration_step(state, h_surface, dt):
    """Water removed from the surface during dt, per cell.

    Returns (delta_v, new_state): delta_v = min(h_surface, I*dt) with
    I = min(I_C, imax); the cap defaults to draining at most the water
    present this step. The cumulative depth v_inf grows by delta_v.
    """
    h_surface = np.asarray(h_surface, dtype=float)
    if dt <= 0.0:
        return np.zeros_like(h_surface), state
    capacity = infiltration_capacity(state.params, state.v_inf, h_surface)
    if state.params.imax is not None:
        capacity = np.minimum(capacity, state.params.imax)
    rate = np.minimum(capacity, h_surface / dt)
    delta_v = np.minimum(h_surface, rate * dt)
    delta_v = np.maximum(delta_v, 0.0)
    new_state = GreenAmptState(state.params, state.v_inf + delta_v)
    return delta_v, new_state
