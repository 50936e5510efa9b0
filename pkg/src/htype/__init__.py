"""Solvable extensions S = NA of H-type groups.

Builds the groups from Clifford-module data and checks numerically that they
are harmonic Riemannian spaces, that most of them are not symmetric, and which
dimensions the nonsymmetric ones occupy.
"""
from .algebra import (
    CliffordModule,
    CliffordSpec,
    HTypeAlgebra,
    bracket,
    build_module,
    j_map,
    min_dimension,
    verify_clifford,
)
from .catalog import expected_symmetric, nonsymmetric_dims, render_table
from .geometry import (
    curvature,
    distance_from_origin,
    geodesic_fan,
    geodesic_integrate,
    is_symmetric,
    koszul_connection,
    metric_at_ball,
    nabla_R_norm,
    sectional_curvature,
    totally_geodesic_check,
)
from .group import (
    AlgebraElement,
    BallPoint,
    DomainError,
    GroupElement,
    SiegelPoint,
    Space,
    ball_to_group,
    cayley,
    cayley_inv,
    group_to_ball,
    haar_density,
    inverse,
    make_space,
    multiply,
)
from .radial import (
    RadialProfile,
    density_omega,
    harmonicity_check,
    heat_solve,
    laplace_beltrami_at,
    radial_laplacian,
    volume_density_numeric,
)

__version__ = "0.1.0"
