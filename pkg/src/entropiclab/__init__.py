"""Numerical laboratory for entropy-generated quantum evolution.

The package puts four constructions side by side and makes every claimed
identity machine-checkable:

* evolution generated by a Hamiltonian in laboratory time, and the same
  dynamics rewritten with an entropy operator in dimensionless thermal
  time, where a gravity-controlled rotation of the time axis turns the
  unitary group into a dissipative semigroup;
* weak-field source integrals producing the dimensionless field strength
  that controls that rotation;
* linear irreversible thermodynamics (kinetic matrix, conjugate forces,
  reciprocity, production rate);
* a Gaussian thermodynamic fluctuation sampler whose log-probability is a
  symplectic area, checked by quadrature against the boundary circulation.
"""
from .constants import NATURAL, Constants
from .energy_picture import HTrajectory, evolve_h, evolve_h_perturbed, noether_energy_drift
from .entropy_picture import (
    ConvergenceError,
    EigenSolutionSpec,
    EntropyOperator,
    EntropyProductionReport,
    STrajectory,
    SecondLawVerdict,
    ThermalTimeChart,
    UncertaintyProduct,
    WickFactor,
    dissipative_part,
    eigen_solution,
    entropy_operator,
    entropy_production,
    entropy_production_via_chart,
    evolve_s,
    generator_reading_gap,
    picture_consistency,
    second_law_refinement,
    uncertainty_product,
    wick_factor,
)
from .fluctuations import (
    CanonicalPoint,
    CovarianceReport,
    FluctuationSample,
    FluctuationSamples,
    Statistic,
    SymplecticPatch,
    ThermoReference,
    boundary_action,
    covariance_report,
    disk_patch,
    fourier_patch,
    gaussian_sample,
    log_probability,
    rectangle_patch,
    symplectic_area,
    to_canonical,
    two_plane_patch,
    write_samples_csv,
)
from .gravity import (
    RegionSpec,
    SourceDistribution,
    laplacian_spot_check,
    load_source,
    mean_h,
    rasterize,
    save_source,
    trace_potential,
)
from .onsager import (
    EntropyRate,
    OnsagerSystem,
    OnsagerTrajectory,
    ReciprocityReport,
    entropy_rate,
    forces,
    harmonic_hamiltonian,
    reciprocity_check,
    relax,
    wick_map,
)
from .operators import (
    HermitianOperator,
    SpectralDecomposition,
    StateVector,
    apply_exponential,
    build_hamiltonian,
    expectation,
    spectral_decompose,
    uncertainty,
)
from .report import ReportSummary, emit_report
from .suite import CheckResult, criterion_names, run_all

__version__ = "0.1.0"
