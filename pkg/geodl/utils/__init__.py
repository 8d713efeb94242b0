from geodl.utils.files import (
    read_txt,
    write_txt,
    load_json,
    dump_json,
    load_matrix,
    save_matrix
)
from geodl.utils.format import round_half
from geodl.utils.config import (
    ConfigError,
    ExperimentConfig,
    parse_config,
    default_config_text
)
