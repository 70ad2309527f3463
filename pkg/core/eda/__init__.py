from .analysis import (
    CorrelationMatrix,
    Projection2D,
    pair_grid,
    pca_2d,
    pearson_matrix,
    principal_components,
    reconstruction_error,
    standardize,
    write_correlation_csv,
    write_pair_grid_csv,
    write_projection_csv,
)
