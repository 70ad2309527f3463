from .metrics import (
    METRIC_NAMES,
    ConfusionMatrix,
    MetricSet,
    confusion_at,
    f1_from_precision_recall,
    metric_set,
    roc_auc,
)
from .sweep import CURVE_COLUMNS, CurvePoint, SweepResult, sweep_grid, threshold_sweep, write_curve_csv
