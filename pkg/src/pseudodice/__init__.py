"""Predictability and normality analysis for pseudo-random 0-1 sequences.

Builds binary sequences from high-precision constant digits or MT19937
output, trains a small feed-forward network to predict the next bit,
and evaluates census-based normality bounds and guess-rate statistics.
"""

from .bitseq import (
    BitSequence,
    PatternCensus,
    WindowDataset,
    binarize_digits,
    dataset_census,
    load_bit_file,
    make_windows,
    ones_frequency,
    pattern_census,
    save_bit_file,
    save_census_csv,
)
from .constdigits import (
    Constant,
    DigitStream,
    gen_digits,
    gen_digits_alt,
    load_digit_file,
    save_digit_file,
)
from .errors import (
    BoundsError,
    CapacityError,
    ConfigError,
    DivergenceError,
    DomainError,
    FormatError,
    PseudodiceError,
    ValidationError,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    default_config,
    emit_report,
    parse_config,
    run_experiment,
    run_experiment_a,
    run_experiment_b,
    run_experiment_c,
)
from .mlp import (
    Dataset,
    MlpModel,
    TrainConfig,
    TrainLog,
    accuracy,
    correct_count,
    forward,
    gradient,
    init_model,
    load_model,
    loss,
    predict_bit,
    save_model,
    train,
)
from .mtprng import MtState, mt_binary_sequence, mt_next_real53, mt_next_u32, mt_seed
from .stats import (
    NormalityReport,
    ideal_predictor_rate,
    majority_label,
    normality_test,
    null_sigma,
    sigma_exceeds,
    subgroup_lcl,
    t_quantile,
)

__version__ = "0.1.0"
