from .run_config import (
    HpoConfig,
    RunConfig,
    SimulateConfig,
    apply_overrides,
    config_from_mapping,
    parse_config,
    write_config_echo,
)
from .commands import (
    COMMANDS,
    EXIT_CONFIG,
    EXIT_FAILURES,
    EXIT_OK,
    CommandOptions,
    execute,
    load_data,
    prepare_tabular,
)
