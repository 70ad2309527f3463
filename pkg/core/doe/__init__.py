from .plan import (
    TABULAR_ROSTER,
    THERMAL_ROSTER,
    DatasetKind,
    ExperimentPlan,
    RosterEntry,
    ThermalSettings,
    default_roster,
    tabular_grid,
    thermal_grid,
)
from .runner import (
    DoeResult,
    FailureRecord,
    ResultRow,
    curve_name,
    read_results_csv,
    run_doe,
    write_failures_csv,
    write_results_csv,
)
from .hpo_phase import PhaseRow, read_phase2_csv, run_hpo_phase, write_phase2_csv
from .report import SummaryRow, render_report, summarize, write_summary_csv
