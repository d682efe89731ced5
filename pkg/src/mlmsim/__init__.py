"""Modulo-lattice modulation toolkit.

Simulation and analysis of joint source/channel transmission by dithered
modulo-lattice modulation: lattice decoders and goodness benchmarks, the
encoder/decoder pair with its parameter selection rules, Monte Carlo
distortion experiments, and closed-form robustness/broadcast regions.
"""

from .analysis import (
    BroadcastPoint,
    BroadcastRegion,
    MismatchInputs,
    RobustEncoder,
    broadcast_curve,
    broadcast_point,
    mismatch_sdr,
    no_interference_point,
    optimality_condition,
    robust_encoder_params,
    separation_curve,
    unequal_variance_sdr,
)
from .codec import (
    MODE_ASYMPTOTIC,
    MODE_FINITE_K,
    MODE_MANUAL,
    MlmParams,
    d_max,
    d_opt,
    decode,
    encode,
    make_params,
    params_from_json,
    params_to_json,
    sdr_opt,
)
from .errors import EstimationError, InvalidInputError
from .lattices import (
    GoodnessReport,
    Lattice,
    covering_radius,
    custom_lattice,
    from_name,
    goodness_report,
    make_lattice,
    mod_lattice,
    nearest_point,
    sample_dither,
    scale_to_second_moment,
    second_moment,
)
from .rng import block_stream
from .simulate import (
    BlockTrial,
    DistortionReport,
    Generators,
    SignalGenerator,
    monte_carlo,
    monte_carlo_with_trace,
    parse_generator,
    replay_block,
    run_block,
    validate_dmax,
)

__version__ = "0.1.0"
