from .tissue import (
    BREAST_LAYERS,
    TUMOR_PROPERTIES,
    BloodParams,
    BoundaryConditions,
    SimGrid,
    SurfaceMode,
    TissueLayer,
    TumorSpec,
    build_grid,
)
from .solver import energy_residual, solve_steady, stable_time_step, surface_profile
from .synthetic import SyntheticParams, SyntheticRanges, generate_synthetic_set, write_synthetic_records
