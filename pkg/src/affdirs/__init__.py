"""Directions in affine lattices: shell enumeration, spherical statistics,
reduction theory diagnostics, and the Monte Carlo experiments tying them
to the limit theorems."""

from .constants import Constants, ball_volume, dimension_constants, sphere_area
from .diophantine import (
    BrjunoSum,
    SurdValue,
    VaguelyDiophantineSum,
    as_xi,
    box_shell,
    brjuno_partial,
    dirichlet_bound,
    frac_dist,
    parse_xi,
    vaguely_diophantine_partial,
    zeta,
)
from .errors import BudgetError, ConfigError, NumericError
from .experiments import (
    BridgeCheck,
    CapCountRun,
    EscapeScan,
    LimitDistribution,
    MeanValueCheck,
    MomentEstimate,
    bridge_check,
    cap_count_run,
    empirical_limit_distribution,
    empirical_moment,
    escape_scan,
    moment_hypothesis,
    rng_for,
    sample_directions,
    siegel_mc_check_d2,
)
from .geometry import (
    AffineGroupElement,
    IwasawaCoordinates,
    SiegelCoordinates,
    cone_count,
    cone_counts,
    element_of,
    escape_mass,
    escape_mass_profile,
    expanding_flow,
    horospherical_shear,
    iwasawa,
    lattice_of,
    reduced_count_bound,
    rotate_to_e1,
    siegel_ratio_bound,
    siegel_reduce,
    tall_count,
    tangent_coordinates,
    unipotent_matrix,
)
from .lattice_enum import (
    AffineLattice,
    ConeSpec,
    ShellPoints,
    ShellSpec,
    brute_force_shell,
    count_in_cone,
    counts_in_cones,
    enumerate_shell,
    expected_shell_count,
    integer_points_in_ball,
)
from .reduction import hkz_reduce, integer_det, lll_reduce, shortest_vector_coeffs
from .sphere_stats import (
    CapSpec,
    DirectionSet,
    PairCorrelationResult,
    cap_area,
    cap_intersection_fraction,
    cap_radius,
    count_in_cap,
    count_in_cap_scan,
    count_in_caps,
    directions_of,
    geodesic_distance,
    geodesic_distances,
    pair_correlation,
    pair_correlation_fn,
    pair_correlation_restricted,
    pair_correlation_scan,
    poisson_pair_reference,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
