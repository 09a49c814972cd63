"""Multi-path traffic flow on road networks."""

from .flux import (
    FluxDomainError,
    FluxModel,
    InfeasibleLevelError,
    demand,
    flux_deriv,
    flux_eval,
    godunov_flux,
    sharp,
    solve_flux_level,
    supply,
)
from .network import (
    Arc,
    DensityField,
    GridError,
    Network,
    NetworkError,
    NetworkGrid,
    Path,
    accumulate_omega,
    build_grid,
    check_admissible,
    turning_fractions,
)
from .scheme import (
    AdmissibilityError,
    CFLError,
    SchemeConfig,
    SimState,
    Snapshot,
    Trajectory,
    initial_state,
    max_stable_dt,
    run,
    run_to_steady,
    step,
    total_mass,
)
from .junction import (
    MergeBoundary,
    Region,
    RegionBoundaryError,
    UnsupportedRegimeError,
    buffer_fluxes,
    buffer_step,
    classify_region,
    merge_recursion,
    stability_eigenvalues,
    stationary_merge,
)
from .riemann import (
    ShiftedFlux,
    UnsupportedWaveError,
    Wave,
    WaveKind,
    WaveSign,
    attainable_negative,
    attainable_positive,
    rarefaction_profile,
    solve_modified_merge,
    solve_riemann_classical,
    two_flux_wave,
)
from .fileio import (
    DocumentError,
    NetworkDocument,
    SnapshotRecord,
    load_network,
    parse_network,
    render_network,
    snapshot_records,
    write_snapshots_csv,
)

__version__ = "0.1.0"
