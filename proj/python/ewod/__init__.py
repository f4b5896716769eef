"""Diffuse-interface electrowetting-on-dielectric simulator.

The compiled core exposes the mesh/material/scheme building blocks and a
`Simulation` driver; presets reproduce the droplet move/split/merge
experiments at desk scale.
"""

from ._core import (  # noqa: F401
    ChannelGeometry,
    DropletPrimitive,
    ElectrodeSegment,
    EnergyBreakdown,
    MaterialParams,
    Mesh,
    NonDimGroups,
    Observables,
    PhysicalScales,
    PinningParams,
    Plate,
    Preset,
    RunConfig,
    SchemeMode,
    SchemeParams,
    Simulation,
    StepReport,
    Vec2,
    build_channel_mesh,
    dirichlet_boundary_value,
    double_well,
    make_preset,
    nondim_groups,
    parse_config,
    perm_diff_quotient,
    psi_eval,
    refine_uniform,
    run_simulation,
    serialize_config,
    slave_deriv,
    slave_eval,
    slip_coefficient,
    stabilization_bounds,
    theta_fs,
)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
