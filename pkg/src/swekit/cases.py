"""Built-in benchmark cases with exact reference solutions.

Each case bundles a canonical parameter text plus any topography /
initial-state files it references (written next to the parameter file),
so `generate-case` output re-runs identically to the validation
harness. All floats are printed to 17 significant digits, which
round-trips 64-bit values exactly.
"""

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .analytic import (
    ThackerParams,
    macdonald_rain_profile,
    macdonald_shock_profile,
    macdonald_topography,
    ritter_profile,
    thacker_bowl,
    thacker_depth,
    thacker_planar_profile,
    thacker_velocity,
)
from .config import parse_parameter_file
from .fileio import DemGrid, format_float, write_dem, write_profile_1d, \
    write_profile_2d


@dataclass(frozen=True)
class Case:
    """A runnable benchmark: parameter text, input files, references."""

    name: str
    title: str
    parameter_text: str
    runtime_limit: float
    aux_files: tuple = ()  # (filename, writer(path)) pairs
    extras: dict = field(default_factory=dict)
    reference_writer: object = None  # writer(path) for the expected profile

    def write_inputs(self, directory):
        """Write the parameter file and its data files; return its path."""
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{self.name}.params")
        with open(path, "w", encoding="utf-8") as stream:
            stream.write(self.parameter_text)
        for filename, writer in self.aux_files:
            writer(os.path.join(directory, filename))
        return path

    def write_reference(self, directory):
        """Write the exact expected profile next to the inputs, if any."""
        if self.reference_writer is None:
            return None
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{self.name}.reference")
        self.reference_writer(path)
        return path

    def build(self):
        """SimulationConfig for this case, via the same files users get."""
        with tempfile.TemporaryDirectory() as tmp:
            return parse_parameter_file(self.write_inputs(tmp))


def _centers(length, cells):
    return (np.arange(cells) + 0.5) * (length / cells)


def lake_at_rest_case():
    """Still water at level 0.1 around a bump that pokes above it."""
    length, cells, surface = 25.0, 500, 0.1
    x = _centers(length, cells)
    z = np.maximum(0.0, 0.2 - 0.05 * (x - 10.0) ** 2)

    def write_bed(path):
        write_dem(path, DemGrid.from_south_up(z[None, :],
                                              cellsize=length / cells))

    text = (
        "name = lake_at_rest_emerged\n"
        f"length = {format_float(length)}\n"
        f"cells = {cells}\n"
        "final_time = 100\n"
        "topography = file:lake_at_rest_emerged.dem\n"
        f"initial_state = lake:{format_float(surface)}\n"
        "boundary_left = wall\n"
        "boundary_right = wall\n"
    )
    def write_reference(path):
        h_ref = np.maximum(surface - z, 0.0)
        write_profile_1d(path, x, z, h_ref, np.zeros(cells), time=100.0,
                         g=9.81)

    return Case(
        name="lake_at_rest_emerged",
        title="still water around an emerged bump",
        parameter_text=text,
        runtime_limit=5.0,
        aux_files=(("lake_at_rest_emerged.dem", write_bed),),
        extras={"surface": surface, "topography": z},
        reference_writer=write_reference)


def ritter_case(cells=500):
    """Instant dam break onto a dry, frictionless, flat bed."""
    length, h_left, x_dam, final_time = 10.0, 0.005, 5.0, 6.0
    x = _centers(length, cells)
    h = np.where(x < x_dam, h_left, 0.0)

    def write_init(path):
        write_profile_1d(path, x, np.zeros(cells), h, np.zeros(cells),
                         time=0.0, g=9.81)

    name = "ritter_dry_dam_break"
    suffix = "" if cells == 500 else f"_{cells}"
    text = (
        f"name = {name}{suffix}\n"
        f"length = {format_float(length)}\n"
        f"cells = {cells}\n"
        f"final_time = {format_float(final_time)}\n"
        f"initial_state = file:{name}{suffix}.init\n"
        "boundary_left = neumann\n"
        "boundary_right = neumann\n"
    )
    def write_reference(path):
        ref = ritter_profile(x, final_time, h_left, x_dam)
        write_profile_1d(path, x, np.zeros(cells), ref.h, ref.q,
                         time=final_time, g=9.81)

    return Case(
        name=f"{name}{suffix}",
        title="dam break onto a dry bed",
        parameter_text=text,
        runtime_limit=10.0,
        aux_files=((f"{name}{suffix}.init", write_init),),
        extras={"h_left": h_left, "x_dam": x_dam},
        reference_writer=write_reference)


def thacker_case():
    """Planar surface rotating in a paraboloid bowl, run three periods."""
    params = ThackerParams()
    length, cells = 4.0, 100
    final_time = 3.0 * params.period
    x = _centers(length, cells)
    y = _centers(length, cells)
    xx, yy = np.meshgrid(x, y)
    z = thacker_bowl(params, xx, yy)
    h = thacker_depth(params, xx, yy, 0.0)
    u, v = thacker_velocity(params, 0.0)

    def write_bed(path):
        write_dem(path, DemGrid.from_south_up(z, cellsize=length / cells))

    def write_init(path):
        write_profile_2d(path, x, y, z, h, h * u, h * v, time=0.0, g=params.g)

    text = (
        "name = thacker_planar_2d\n"
        f"length = {format_float(length)}\n"
        f"cells = {cells}\n"
        f"width = {format_float(length)}\n"
        f"cells_y = {cells}\n"
        f"final_time = {format_float(final_time)}\n"
        f"output_times = {format_float(params.period)}, "
        f"{format_float(2.0 * params.period)}\n"
        "topography = file:thacker_planar_2d.dem\n"
        "initial_state = file:thacker_planar_2d.init\n"
        "boundary_left = wall\n"
        "boundary_right = wall\n"
        "boundary_bottom = wall\n"
        "boundary_top = wall\n"
    )
    def write_reference(path):
        ref = thacker_planar_profile(params, x, y, final_time)
        write_profile_2d(path, x, y, z, ref.h, ref.qx, ref.qy,
                         time=final_time, g=params.g)

    return Case(
        name="thacker_planar_2d",
        title="rotating planar surface in a paraboloid bowl",
        parameter_text=text,
        runtime_limit=120.0,
        aux_files=(("thacker_planar_2d.dem", write_bed),
                   ("thacker_planar_2d.init", write_init)),
        extras={"params": params},
        reference_writer=write_reference)


def macdonald_shock_case():
    """Steady transcritical channel with a hydraulic jump (Manning)."""
    profile = macdonald_shock_profile()
    length, cells, final_time = profile.length, 500, 1500.0
    x = _centers(length, cells)
    z = macdonald_topography(profile.h, profile.q0, profile.rain,
                             profile.friction, x, dh_profile=profile.dh,
                             shocks=profile.shocks)
    h0 = profile.h(x)

    def write_bed(path):
        write_dem(path, DemGrid.from_south_up(z[None, :],
                                              cellsize=length / cells))

    def write_init(path):
        write_profile_1d(path, x, z, h0, np.zeros(cells), time=0.0, g=9.81)

    outlet = profile.params["outlet_depth"]
    text = (
        "name = macdonald_short_channel_shock\n"
        f"length = {format_float(length)}\n"
        f"cells = {cells}\n"
        f"final_time = {format_float(final_time)}\n"
        "friction = manning\n"
        f"friction_coefficient = {format_float(profile.friction.coefficient)}\n"
        "topography = file:macdonald_short_channel_shock.dem\n"
        "initial_state = file:macdonald_short_channel_shock.init\n"
        f"boundary_left = imposed_discharge:{format_float(profile.q0)}\n"
        f"boundary_right = imposed_depth:{format_float(outlet)}\n"
    )
    def write_reference(path):
        write_profile_1d(path, x, z, profile.h(x),
                         np.full(cells, profile.q0), time=final_time, g=9.81)

    return Case(
        name="macdonald_short_channel_shock",
        title="steady channel flow through a hydraulic jump",
        parameter_text=text,
        runtime_limit=30.0,
        aux_files=(("macdonald_short_channel_shock.dem", write_bed),
                   ("macdonald_short_channel_shock.init", write_init)),
        extras={"profile": profile, "topography": z},
        reference_writer=write_reference)


def macdonald_rain_case():
    """Steady supercritical channel fed by rain (Darcy-Weisbach)."""
    profile = macdonald_rain_profile()
    length, cells, final_time = profile.length, 500, 3000.0
    rain_start, rain_rate = 1500.0, profile.rain
    x = _centers(length, cells)
    z = macdonald_topography(profile.h, profile.q0, profile.rain,
                             profile.friction, x, dh_profile=profile.dh)

    def write_bed(path):
        write_dem(path, DemGrid.from_south_up(z[None, :],
                                              cellsize=length / cells))

    text = (
        "name = macdonald_rain_supercritical\n"
        f"length = {format_float(length)}\n"
        f"cells = {cells}\n"
        f"final_time = {format_float(final_time)}\n"
        f"output_times = {format_float(rain_start)}\n"
        "friction = darcy_weisbach\n"
        f"friction_coefficient = {format_float(profile.friction.coefficient)}\n"
        f"rain = {format_float(rain_start)}:{format_float(rain_rate)}\n"
        "topography = file:macdonald_rain_supercritical.dem\n"
        "initial_state = dry\n"
        "boundary_left = imposed_both:"
        f"{format_float(profile.h(0.0))}:{format_float(profile.q0)}\n"
        "boundary_right = neumann\n"
    )
    def write_reference(path):
        write_profile_1d(path, x, z, profile.h(x), profile.discharge(x),
                         time=final_time, g=9.81)

    return Case(
        name="macdonald_rain_supercritical",
        title="rain-fed supercritical channel reaching steady state",
        parameter_text=text,
        runtime_limit=30.0,
        aux_files=(("macdonald_rain_supercritical.dem", write_bed),),
        extras={"profile": profile, "topography": z,
                "rain_start": rain_start},
        reference_writer=write_reference)


CASE_BUILDERS = {
    "lake_at_rest_emerged": lake_at_rest_case,
    "ritter_dry_dam_break": ritter_case,
    "thacker_planar_2d": thacker_case,
    "macdonald_short_channel_shock": macdonald_shock_case,
    "macdonald_rain_supercritical": macdonald_rain_case,
}

CASE_NAMES = tuple(CASE_BUILDERS)


def get_case(name):
    if name not in CASE_BUILDERS:
        raise KeyError(f"unknown case {name!r}; choose from {CASE_NAMES}")
    return CASE_BUILDERS[name]()
