from .tabular import (
    TabularDataset,
    class_counts,
    concat,
    load_csv,
    save_csv,
    set_positive_label,
    subset,
)
from .splits import FoldPlan, split_indices, stratified_allocation, stratified_kfold, train_test_split
from .eit import EIT_FEATURES, EIT_LABELS, EitLabelMode, relabel_eit
