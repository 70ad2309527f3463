from .tabular import (
    EXPANDED_FEATURES,
    FittedScaler,
    LeakageMode,
    TransformRecipe,
    apply_recipe,
    augment,
    expand,
    fit_scaler,
    polynomial,
    polynomial_feature_count,
    scale,
)
from .thermal import (
    AugmentOp,
    MaskImage,
    PatientRecord,
    Thermogram,
    ThermogramSource,
    ThermalToggles,
    apply_thermal_toggles,
    augment_images,
    load_mask,
    load_temperature_matrix,
    load_thermal_directory,
    mask_and_crop,
    normalize,
    patient_split,
    read_tensor_cache,
    records_to_arrays,
    resize_bilinear,
    standardize_images,
    write_tensor_cache,
)
