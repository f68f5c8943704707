"""Berry phases, Berry bundles and their topology for parameter-dependent
Hamiltonians."""

from .eigenbundle import Frame, branch_sample, continue_frame, reference_frame, spectra, track_branch
from .errors import BerryError, DomainError, InputError, NumericalError
from .gauge import classify_bundle, pole_section, planar_section, transition_function, winding_number_u1
from .geometry import (
    PlanarLoop,
    SphericalLoop,
    circle_path,
    fourier_path,
    geodesic_polygon_path,
    make_path,
    meridian_path,
    planar_winding,
    solid_angle,
    spherical_cap_path,
)
from .models import make_lambda_system, make_model, make_planar_spin, make_spin_dipole, make_tabulated
from .paths import ParameterPath, from_nodes
from .transport import (
    connection_at,
    curvature_plaquette,
    holonomy,
    is_flat,
    transport_ode,
    wilson_line_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "BerryError",
    "DomainError",
    "Frame",
    "InputError",
    "NumericalError",
    "ParameterPath",
    "PlanarLoop",
    "SphericalLoop",
    "branch_sample",
    "circle_path",
    "classify_bundle",
    "connection_at",
    "continue_frame",
    "curvature_plaquette",
    "fourier_path",
    "from_nodes",
    "geodesic_polygon_path",
    "holonomy",
    "is_flat",
    "make_lambda_system",
    "make_model",
    "make_path",
    "make_planar_spin",
    "make_spin_dipole",
    "make_tabulated",
    "meridian_path",
    "planar_section",
    "planar_winding",
    "pole_section",
    "reference_frame",
    "solid_angle",
    "spectra",
    "spherical_cap_path",
    "track_branch",
    "transition_function",
    "transport_ode",
    "wilson_line_oracle",
    "winding_number_u1",
]
