"""CMC leaves of flat wedge spacetimes over hyperbolic cross-sections.

Builds reduced chain models (Lorentz cones deformed by flat wedges), solves
the symmetry-reduced constant-mean-curvature boundary-value problem, and
measures the collapse asymptotics: barrier bounds, product-limit profiles,
volume and distance rates, marked length spectra against the dual metric
tree, and the Dirichlet-energy / rescaled-Hamiltonian limits.
"""

from ._kernels import BACKEND as kernel_backend
from .config import Diagnostics, RunConfig, load_config, loads_config
from .errors import *  # noqa: F401,F403
from .fitting import ConvergenceFit, fit_convergence, fit_or_degenerate
from .leaf import (
    GeodesicQuery,
    LeafSample,
    clairaut_distance,
    induced_metric,
    leaf_distance,
    leaf_sample,
    leaf_volume,
    mesh_dijkstra_distance,
    second_fundamental_form,
)
from .model import (
    ChartPoint,
    MinkowskiPoint,
    ModelSpec,
    Segment,
    barrier_interval,
    build_model,
    chain_model,
    kasner_model,
    level_set_mean_curvature,
    minkowski_embed,
    necklace_model,
    pure_collar_model,
    single_wedge_model,
)
from .solver import (
    HeightField,
    SolverConfig,
    cone_field,
    fd_mean_curvature_oracle,
    kasner_field,
    kasner_limit_check,
    reduced_mean_curvature,
    rescale,
    solve_cmc_leaf,
    solve_ladder,
)
from .spectra import (
    CurveClass,
    DualTree,
    MultiCurve,
    leaf_length_spectrum,
    measure_spectrum,
    spectrum_convergence_report,
)
from .energetics import (
    area_monotonicity_check,
    asymptotic_energy_fit,
    dirichlet_energy,
    energy_row,
    gauss_identity_residual,
    hamiltonian_lower_bound_check,
    rescaled_hamiltonian,
)
from .conformal import conformal_flatness_diagnostic
from .sweep import run_sweep

__version__ = "0.1.0"
