"""Time integration: step control, well-balancing, mass accounting."""

import math

import numpy as np
import pytest

from swekit.boundary import BoundaryCondition, BoundarySet
from swekit.core import Grid, State1D, State2D, total_volume
from swekit.sources import FrictionParams, GreenAmptParams, Hyetograph
from swekit.timeloop import (
    CFL_MAX,
    NumericalFault,
    SchemeConfig,
    SimulationConfig,
    compute_dt,
    run_simulation,
    spatial_operator_phi,
)

WALL = BoundarySet()
NEUMANN = BoundarySet(left=BoundaryCondition("neumann"),
                      right=BoundaryCondition("neumann"))


def bump_lake(n=100, length=25.0, level=0.1):
    """Still water around an emerged parabolic bump."""
    grid = Grid(nx=n, dx=length / n)
    x = grid.cell_centers_x()
    z = np.where(np.abs(x - 10.0) < 2.0, 0.2 - 0.05 * (x - 10.0) ** 2, 0.0)
    h = np.maximum(level - z, 0.0)
    return grid, z, State1D(h, np.zeros(n))


# ------------------------------------------------------------- dt


def test_cfl_defaults_per_dimension_and_order():
    assert CFL_MAX == {(1, 1): 1.0, (1, 2): 0.5, (2, 1): 0.5, (2, 2): 0.25}
    grid = Grid(nx=4, dx=2.0)
    state = State1D(np.ones(4), np.array([2.0, 0.0, 0.0, 0.0]))
    expected_sup = 2.0 + math.sqrt(9.81)
    dt = compute_dt(state, grid, SchemeConfig(order=2))
    assert dt == pytest.approx(0.5 * 2.0 / expected_sup, rel=1e-14)
    dt1 = compute_dt(state, grid, SchemeConfig(order=1))
    assert dt1 == pytest.approx(2.0 / expected_sup, rel=1e-14)


def test_dt_is_bounded_by_cell_size_for_slow_or_dry_water():
    grid = Grid(nx=4, dx=2.0)
    slow = State1D(np.full(4, 0.01), np.zeros(4))
    assert compute_dt(slow, grid, SchemeConfig(order=2)) == pytest.approx(1.0)
    dry = State1D(np.zeros(4), np.zeros(4))
    assert compute_dt(dry, grid, SchemeConfig(order=2)) == pytest.approx(1.0)


def test_dt_accounts_for_imposed_inflow_onto_dry_bed():
    grid = Grid(nx=4, dx=2.0)
    dry = State1D(np.zeros(4), np.zeros(4))
    bcs = BoundarySet(left=BoundaryCondition("imposed_both", depth=0.5,
                                             discharge=2.5),
                      right=BoundaryCondition("neumann"))
    speed = 2.5 / 0.5 + math.sqrt(9.81 * 0.5)
    dt = compute_dt(dry, grid, SchemeConfig(order=2), bcs)
    assert dt == pytest.approx(0.5 * 2.0 / speed, rel=1e-14)


def test_cfl_out_of_range_rejected():
    with pytest.raises(ValueError, match="cfl"):
        SchemeConfig(order=2, cfl=0.8).cfl_for(1)
    assert SchemeConfig(order=2, cfl=0.4).cfl_for(1) == 0.4


def test_2d_dt_uses_both_directions():
    grid = Grid(nx=3, ny=3, dx=1.0, dy=0.5)
    h = np.ones((3, 3))
    qx = np.zeros((3, 3))
    qy = np.full((3, 3), 2.0)
    sup = 2.0 + math.sqrt(9.81)
    dt = compute_dt(State2D(h, qx, qy), grid, SchemeConfig(order=1))
    assert dt == pytest.approx(0.5 * min(0.5, 1.0 / math.sqrt(9.81), 0.5 / sup),
                               rel=1e-14)


# --------------------------------------------------- well-balancing


@pytest.mark.parametrize("order", [1, 2])
def test_lake_at_rest_operator_vanishes(order):
    grid, z, state = bump_lake()
    phi_h, phi_q = spatial_operator_phi(state, z, grid, SchemeConfig(order=order),
                                        WALL)
    assert np.max(np.abs(phi_h)) < 1e-13
    assert np.max(np.abs(phi_q)) < 1e-13


@pytest.mark.parametrize("order", [1, 2])
def test_lake_at_rest_stays_at_rest(order):
    grid, z, state = bump_lake()
    config = SimulationConfig(grid=grid, topography=z, initial_state=state,
                              final_time=5.0, scheme=SchemeConfig(order=order))
    result = run_simulation(config)
    final = result.final_state
    assert np.max(np.abs(final.h - state.h)) < 1e-13
    assert np.max(np.abs(final.q)) < 1e-13
    assert result.min_depth_seen >= 0.0


def test_lake_at_rest_2d_operator_vanishes():
    grid = Grid(nx=20, ny=15, dx=0.2, dy=0.2)
    x = grid.cell_centers_x()
    y = grid.cell_centers_y()
    xx, yy = np.meshgrid(x, y)
    z = np.maximum(0.0, 0.3 - 0.5 * ((xx - 2.0) ** 2 + (yy - 1.5) ** 2))
    h = np.maximum(0.2 - z, 0.0)
    state = State2D(h, np.zeros_like(h), np.zeros_like(h))
    phi_h, phi_qx, phi_qy = spatial_operator_phi(state, z, grid,
                                                 SchemeConfig(order=2), WALL)
    assert np.max(np.abs(phi_h)) < 1e-13
    assert np.max(np.abs(phi_qx)) < 1e-13
    assert np.max(np.abs(phi_qy)) < 1e-13


# ------------------------------------------------------------- rain


def test_uniform_rain_fills_exactly():
    n = 50
    grid = Grid(nx=n, dx=0.1)
    z = np.zeros(n)
    state = State1D(np.zeros(n), np.zeros(n))
    rain = Hyetograph(times=(0.0,), intensities=(0.001,))
    config = SimulationConfig(grid=grid, topography=z, initial_state=state,
                              final_time=20.0, scheme=SchemeConfig(order=2),
                              rain=rain)
    result = run_simulation(config)
    assert np.allclose(result.final_state.h, 0.001 * 20.0, rtol=1e-12, atol=0)
    assert np.all(result.final_state.q == 0.0)
    row = result.mass_balance[-1]
    assert row.rain == pytest.approx(0.001 * 20.0 * n * 0.1, rel=1e-12)
    assert row.residual_rel < 1e-13


def test_hyetograph_change_time_is_landed_on_exactly():
    n = 20
    grid = Grid(nx=n, dx=0.1)
    state = State1D(np.zeros(n), np.zeros(n))
    # 1 mm/s for the first 0.7 s, then dry; 0.7 never divides the CFL dt
    rain = Hyetograph(times=(0.0, 0.7), intensities=(0.001, 0.0))
    config = SimulationConfig(grid=grid, topography=np.zeros(n),
                              initial_state=state, final_time=2.0,
                              scheme=SchemeConfig(order=1), rain=rain)
    result = run_simulation(config)
    assert np.allclose(result.final_state.h, 0.0007, rtol=1e-12, atol=0)


def test_rain_enters_phi_with_negative_sign():
    grid, z, state = bump_lake()
    rain = Hyetograph(times=(0.0,), intensities=(0.002,))
    phi_h, _ = spatial_operator_phi(state, z, grid, SchemeConfig(order=2),
                                    WALL, t=0.0, rain=rain)
    assert np.allclose(phi_h, -0.002, atol=1e-13)


# ------------------------------------------------- stepping structure


def make_periodic_wave(n=64):
    grid = Grid(nx=n, dx=1.0 / n)
    x = grid.cell_centers_x()
    h = 1.0 + 0.1 * np.sin(2 * np.pi * x)
    u = 0.2 + 0.05 * np.cos(2 * np.pi * x)
    per = BoundaryCondition("periodic")
    bcs = BoundarySet(left=per, right=per)
    return grid, bcs, State1D(h, h * u)


def test_heun_step_matches_two_explicit_stages():
    grid, bcs, state = make_periodic_wave()
    scheme = SchemeConfig(order=2, fixed_dt=1e-3)
    z = np.zeros(grid.nx)

    phi1 = spatial_operator_phi(state, z, grid, scheme, bcs)
    h1 = state.h - 1e-3 * phi1[0]
    q1 = state.q - 1e-3 * phi1[1]
    phi2 = spatial_operator_phi(State1D(h1, q1), z, grid, scheme, bcs)
    h_expected = 0.5 * (state.h + (h1 - 1e-3 * phi2[0]))
    q_expected = 0.5 * (state.q + (q1 - 1e-3 * phi2[1]))

    config = SimulationConfig(grid=grid, topography=z, initial_state=state,
                              final_time=1e-3, scheme=scheme, boundaries=bcs)
    final = run_simulation(config).final_state
    assert np.array_equal(final.h, h_expected)
    assert np.array_equal(final.q, q_expected)


def test_euler_step_is_a_single_stage():
    grid, bcs, state = make_periodic_wave()
    scheme = SchemeConfig(order=1, fixed_dt=1e-3)
    z = np.zeros(grid.nx)
    phi = spatial_operator_phi(state, z, grid, scheme, bcs)
    config = SimulationConfig(grid=grid, topography=z, initial_state=state,
                              final_time=1e-3, scheme=scheme, boundaries=bcs)
    final = run_simulation(config).final_state
    assert np.array_equal(final.h, state.h - 1e-3 * phi[0])
    assert np.array_equal(final.q, state.q - 1e-3 * phi[1])


def test_periodic_mass_is_conserved():
    grid, bcs, state = make_periodic_wave()
    config = SimulationConfig(grid=grid, topography=np.zeros(grid.nx),
                              initial_state=state, final_time=0.5,
                              scheme=SchemeConfig(order=2), boundaries=bcs)
    result = run_simulation(config)
    v0 = total_volume(state, grid)
    v1 = total_volume(result.final_state, grid)
    assert v1 == pytest.approx(v0, rel=1e-13)
    assert result.mass_balance[-1].residual_rel < 1e-13


def test_snapshots_land_exactly_on_output_times():
    n = 10
    grid = Grid(nx=n, dx=0.5)
    state = State1D(np.ones(n), np.zeros(n))
    config = SimulationConfig(grid=grid, topography=np.zeros(n),
                              initial_state=state, final_time=1.0,
                              scheme=SchemeConfig(order=1, fixed_dt=0.2),
                              output_times=(0.3, 0.7))
    result = run_simulation(config)
    assert [t for t, _ in result.snapshots] == [0.0, 0.3, 0.7, 1.0]
    assert [row.time for row in result.mass_balance] == [0.0, 0.3, 0.7, 1.0]


# ------------------------------------------------------ conservation


def test_dam_break_onto_dry_bed_stays_positive_and_conservative():
    n = 200
    grid = Grid(nx=n, dx=10.0 / n)
    x = grid.cell_centers_x()
    h = np.where(x < 5.0, 1.0, 0.0)
    config = SimulationConfig(grid=grid, topography=np.zeros(n),
                              initial_state=State1D(h, np.zeros(n)),
                              final_time=0.5, scheme=SchemeConfig(order=2),
                              boundaries=NEUMANN)
    result = run_simulation(config)
    final = result.final_state
    assert result.min_depth_seen >= 0.0
    # the front has advanced into the dry half
    assert final.h[n // 2 + 5] > 1e-4
    assert result.mass_balance[-1].residual_rel < 1e-12
    assert result.warnings == []


def test_mass_ledger_closes_with_rain_friction_and_infiltration():
    n = 80
    grid = Grid(nx=n, dx=0.5)
    x = grid.cell_centers_x()
    z = 0.05 * (40.0 - x) / 40.0
    h0 = np.full(n, 0.02)
    rain = Hyetograph(times=(0.0, 30.0), intensities=(5e-4, 0.0))
    ga = GreenAmptParams(ks=2e-6, kc=1e-6, zc=0.01, hf=0.1, dtheta=0.3)
    config = SimulationConfig(
        grid=grid, topography=z, initial_state=State1D(h0, np.zeros(n)),
        final_time=60.0, scheme=SchemeConfig(order=2),
        friction=FrictionParams(law="manning", coefficient=0.03),
        rain=rain, infiltration=ga, output_times=(30.0,))
    result = run_simulation(config)
    row = result.mass_balance[-1]
    assert row.residual_rel < 1e-12
    assert row.rain == pytest.approx(5e-4 * 30.0 * n * 0.5, rel=1e-12)
    assert row.infiltration > 0.0
    # the soil ledger matches the accumulated infiltration volume
    assert row.infiltration == pytest.approx(
        float(result.ga_state.v_inf.sum()) * grid.dx, rel=1e-12)


def test_imposed_inflow_wets_a_dry_channel():
    n = 100
    grid = Grid(nx=n, dx=1.0)
    z = -0.01 * grid.cell_centers_x()
    bcs = BoundarySet(left=BoundaryCondition("imposed_both", depth=0.5,
                                             discharge=2.5),
                      right=BoundaryCondition("neumann"))
    config = SimulationConfig(grid=grid, topography=z,
                              initial_state=State1D(np.zeros(n), np.zeros(n)),
                              final_time=10.0, scheme=SchemeConfig(order=2),
                              boundaries=bcs,
                              friction=FrictionParams("darcy_weisbach", 0.065))
    result = run_simulation(config)
    assert result.final_state.h[0] > 0.1
    assert result.min_depth_seen >= 0.0
    assert result.mass_balance[-1].boundary_in > 0.0
    assert result.mass_balance[-1].residual_rel < 1e-12


# ------------------------------------------------------------ symmetry


@pytest.mark.parametrize("order", [1, 2])
def test_walled_box_preserves_mirror_symmetry(order):
    n = 100
    grid = Grid(nx=n, dx=0.1)
    x = grid.cell_centers_x()
    h = 1.0 + 0.2 * np.exp(-((x - 5.0) ** 2))
    config = SimulationConfig(grid=grid, topography=np.zeros(n),
                              initial_state=State1D(h, np.zeros(n)),
                              final_time=2.0, scheme=SchemeConfig(order=order))
    final = run_simulation(config).final_state
    assert np.max(np.abs(final.h - final.h[::-1])) < 1e-12
    assert np.max(np.abs(final.q + final.q[::-1])) < 1e-12


def test_2d_with_uniform_transverse_direction_matches_1d():
    n = 60
    dt = 0.01
    grid1 = Grid(nx=n, dx=10.0 / n)
    x = grid1.cell_centers_x()
    h = np.where(x < 5.0, 1.0, 0.2)
    z1 = 0.02 * x
    config1 = SimulationConfig(grid=grid1, topography=z1,
                               initial_state=State1D(h, np.zeros(n)),
                               final_time=0.5,
                               scheme=SchemeConfig(order=2, fixed_dt=dt))
    h1 = run_simulation(config1).final_state

    ny = 6
    grid2 = Grid(nx=n, ny=ny, dx=10.0 / n, dy=0.3)
    h2 = np.tile(h, (ny, 1))
    z2 = np.tile(z1, (ny, 1))
    zero = np.zeros_like(h2)
    config2 = SimulationConfig(grid=grid2, topography=z2,
                               initial_state=State2D(h2, zero.copy(), zero.copy()),
                               final_time=0.5,
                               scheme=SchemeConfig(order=2, fixed_dt=dt))
    res2 = run_simulation(config2).final_state
    assert np.max(np.abs(res2.h - h1.h[None, :])) < 1e-13
    assert np.max(np.abs(res2.qx - h1.q[None, :])) < 1e-13
    assert np.max(np.abs(res2.qy)) < 1e-13


def test_2d_x_and_y_sweeps_are_equivalent():
    n = 40
    dt = 0.01
    base = Grid(nx=n, ny=5, dx=0.25, dy=0.25)
    x = base.cell_centers_x()
    h_row = np.where(x < 5.0, 1.0, 0.3)
    h_x = np.tile(h_row, (5, 1))
    zero_x = np.zeros_like(h_x)
    cfg_x = SimulationConfig(grid=base, topography=zero_x.copy(),
                             initial_state=State2D(h_x, zero_x.copy(),
                                                   zero_x.copy()),
                             final_time=0.4,
                             scheme=SchemeConfig(order=2, fixed_dt=dt))
    res_x = run_simulation(cfg_x).final_state

    rot = Grid(nx=5, ny=n, dx=0.25, dy=0.25)
    h_y = h_x.T.copy()
    zero_y = np.zeros_like(h_y)
    cfg_y = SimulationConfig(grid=rot, topography=zero_y.copy(),
                             initial_state=State2D(h_y, zero_y.copy(),
                                                   zero_y.copy()),
                             final_time=0.4,
                             scheme=SchemeConfig(order=2, fixed_dt=dt))
    res_y = run_simulation(cfg_y).final_state
    assert np.max(np.abs(res_y.h - res_x.h.T)) < 1e-13
    assert np.max(np.abs(res_y.qy - res_x.qx.T)) < 1e-13


# ------------------------------------------------------------- faults


def test_blowup_raises_a_numerical_fault():
    n = 50
    grid = Grid(nx=n, dx=0.1)
    x = grid.cell_centers_x()
    h = np.where(x < 2.5, 1.0, 0.0)
    config = SimulationConfig(grid=grid, topography=np.zeros(n),
                              initial_state=State1D(h, np.zeros(n)),
                              final_time=10.0,
                              scheme=SchemeConfig(order=1, fixed_dt=5.0),
                              boundaries=NEUMANN)
    with pytest.raises(NumericalFault) as excinfo:
        run_simulation(config)
    assert excinfo.value.time == 0.0
    assert "cell" in str(excinfo.value)


def test_config_validation():
    grid = Grid(nx=4, dx=1.0)
    good = State1D(np.ones(4), np.zeros(4))
    with pytest.raises(ValueError, match="topography"):
        SimulationConfig(grid=grid, topography=np.zeros(5),
                         initial_state=good, final_time=1.0)
    with pytest.raises(ValueError, match="nonnegative"):
        SimulationConfig(grid=grid, topography=np.zeros(4),
                         initial_state=State1D(np.array([1.0, -0.1, 1.0, 1.0]),
                                               np.zeros(4)),
                         final_time=1.0)
    with pytest.raises(ValueError, match="output times"):
        SimulationConfig(grid=grid, topography=np.zeros(4),
                         initial_state=good, final_time=1.0,
                         output_times=(2.0,))
    with pytest.raises(ValueError, match="paired"):
        SimulationConfig(grid=grid, topography=np.zeros(4),
                         initial_state=good, final_time=1.0,
                         boundaries=BoundarySet(
                             left=BoundaryCondition("periodic")))
