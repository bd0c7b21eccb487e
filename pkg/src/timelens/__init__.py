"""Window embeddings, Hankel-SVD subspace identification, and Kalman forecasting."""

from .kalman import (
    BallRegion,
    BoxRegion,
    ForecastResult,
    KalmanState,
    OnlineEvalResult,
    forecast,
    kalman_filter,
    kalman_step,
    next_region_entry,
    online_forecast_eval,
    region_from_dict,
    rts_smooth,
)
from .series import ScalingParams, TimeSeries, detrend, inverse_scale, load_csv, minmax_scale
from .spectral import (
    AlignmentReport,
    ComponentSplit,
    Embedding,
    SpectralDecomposition,
    align_embeddings,
    decompose,
    embedding_from_states,
    hankel_states,
    pca_embed,
    select_rank,
    split_components,
    subspace_embed,
)
from .statespace import StateSpaceModel, StateTrajectory
from .sysid import (
    ACEstimate,
    ResidualSet,
    estimate_AC,
    estimate_QR,
    estimate_initial_state,
    identify_output_only,
    identify_with_inputs,
    observability_matrix,
    project_out_inputs,
    simulate,
)
from .synth import SynthOutput, gen_ar2, gen_double_periodic, gen_exogenous_stepped, gen_periodic_ssm
from .trajectory import BlockHankel, TrajectoryMatrix, block_hankel, hankel_from_trajectory, trajectory_matrix

__version__ = "0.1.0"
