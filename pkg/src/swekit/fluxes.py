"""Numerical interface fluxes for the 1D shallow-water system.

Both solvers take the two reconstructed states (hL, qL) and (hR, qR)
that meet at an interface and return the numerical flux (f_h, f_q).
All functions are elementwise, so they accept scalars or arrays of
interface values.
"""

import numpy as np

from .core import G_DEFAULT, eigenvalues_1d, physical_flux_1d, velocity


def wave_speeds(h_left, q_left, h_right, q_right, g=G_DEFAULT):
    """Slowest and fastest characteristic speeds over the two states.

    c1 = min(u - sqrt(g*h)) and c2 = max(u + sqrt(g*h)), the minimum and
    maximum taken over the left and right states. A dry pair gives
    (0, 0).
    """
    lam1_l, lam2_l = eigenvalues_1d(h_left, q_left, g)
    lam1_r, lam2_r = eigenvalues_1d(h_right, q_right, g)
    return np.minimum(lam1_l, lam1_r), np.maximum(lam2_l, lam2_r)


def hll_flux(h_left, q_left, h_right, q_right, g=G_DEFAULT):
    """Two-wave approximate Riemann flux.

    Upwinds fully when all waves travel one way (0 <= c1 picks the left
    flux, c2 <= 0 the right flux, both compared exactly) and otherwise
    blends the two physical fluxes with a dissipation term proportional
    to the state jump. A dry-dry interface yields a zero flux.
    """
    h_l = np.asarray(h_left, dtype=float)
    q_l = np.asarray(q_left, dtype=float)
    h_r = np.asarray(h_right, dtype=float)
    q_r = np.asarray(q_right, dtype=float)
    u_l = velocity(h_l, q_l)
    u_r = velocity(h_r, q_r)
    c_l = np.sqrt(g * np.maximum(h_l, 0.0))
    c_r = np.sqrt(g * np.maximum(h_r, 0.0))
    c1 = np.minimum(u_l - c_l, u_r - c_r)
    c2 = np.maximum(u_l + c_l, u_r + c_r)
    half_g = 0.5 * g
    fl_h, fl_q = q_l, q_l * u_l + half_g * (h_l * h_l)
    fr_h, fr_q = q_r, q_r * u_r + half_g * (h_r * h_r)

    spread = c2 - c1
    inv = 1.0 / np.where(spread > 0.0, spread, 1.0)
    weight = (c1 * c2) * inv
    c2i = c2 * inv
    c1i = c1 * inv
    mid_h = (c2i * fl_h - c1i * fr_h) + weight * (h_r - h_l)
    mid_q = (c2i * fl_q - c1i * fr_q) + weight * (q_r - q_l)

    left_going = c1 >= 0.0
    right_going = c2 <= 0.0
    f_h = np.where(left_going, fl_h, np.where(right_going, fr_h, mid_h))
    f_q = np.where(left_going, fl_q, np.where(right_going, fr_q, mid_q))
    return f_h, f_q


def rusanov_flux(h_left, q_left, h_right, q_right, g=G_DEFAULT):
    """Central flux with local Lax-Friedrichs dissipation.

    More diffusive than hll_flux but with the same interface contract;
    the dissipation speed is the largest |eigenvalue| of either state.
    """
    lam1_l, lam2_l = eigenvalues_1d(h_left, q_left, g)
    lam1_r, lam2_r = eigenvalues_1d(h_right, q_right, g)
    c = np.maximum(np.maximum(np.abs(lam1_l), np.abs(lam2_l)),
                   np.maximum(np.abs(lam1_r), np.abs(lam2_r)))
    fl_h, fl_q = physical_flux_1d(h_left, q_left, g)
    fr_h, fr_q = physical_flux_1d(h_right, q_right, g)
    f_h = 0.5 * (fl_h + fr_h) - 0.5 * c * (np.asarray(h_right, dtype=float) - h_left)
    f_q = 0.5 * (fl_q + fr_q) - 0.5 * c * (np.asarray(q_right, dtype=float) - q_left)
    return f_h, f_q


def transverse_component(f_mass, u_left, u_right, v_left, v_right, axis):
    """Transverse momentum flux carried by the mass flux f_mass.

    The transported transverse velocity is chosen upwind by the sign of
    the summed normal velocities; a zero sum takes the right/downwind
    state. For an x interface the normal velocity is u and the
    transported quantity is v; for a y interface the roles swap.
    """
    if axis == "x":
        normal_sum = np.asarray(u_left, dtype=float) + u_right
        carried = np.where(normal_sum > 0.0, v_left, v_right)
    elif axis == "y":
        normal_sum = np.asarray(v_left, dtype=float) + v_right
        carried = np.where(normal_sum > 0.0, u_left, u_right)
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return f_mass * carried


FLUX_FUNCTIONS = {"hll": hll_flux, "rusanov": rusanov_flux}
