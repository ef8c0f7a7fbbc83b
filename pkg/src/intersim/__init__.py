"""Two-vehicle unsignalized-intersection simulator and decision library.

Implements a socially-compatible game-theoretic crossing policy for an
automated car interacting with a human-driven truck — built on a
probabilistic model of the truck driver's visual field — alongside a
social-terms-off variant and a worst-case rule baseline, with batch
evaluation and a human-in-the-loop session bridge.
"""

from .baselines import AebGuard, CoastPolicy, NoScPolicy, RssParams, RssPolicy, aeb_override, conflict_margin
from .config import AebConfig, DriverModel, ScenarioConfig, config_from_dict, dump_config, load_config, save_config
from .errors import (
    CalibrationError,
    ConfigError,
    EfficiencyError,
    GeometryError,
    IntersimError,
    MetricError,
    ModelError,
    PredictionError,
)
from .game import (
    ActuationLimits,
    CalibrationObjective,
    Decision,
    ScPolicy,
    action_from_decision,
    calibrate_weights,
    pure_nash,
    select_decision,
)
from .sim import (
    BatchSummary,
    EpisodeEngine,
    EpisodeRecord,
    ScenarioSampler,
    batch_run,
    classify,
    make_policy,
    run_episode,
    speed_bin,
    step,
    tta,
)
from .utilities import (
    ArrivalPrediction,
    ConflictGeometry,
    GameWeights,
    PredictionParams,
    Strategy,
    StrategyProfile,
    UtilityMatrix,
    altruism,
    av_utility,
    build_matrix,
    efficiency,
    hv_safety,
    hv_utility,
    predict_arrivals,
    safety_core,
    social_fitness,
)
from .visibility import (
    BlindZone,
    CabinGeometry,
    Region,
    RelativePose,
    ViewModel,
    compute_blind_zone,
    observation_probability,
    relative_pose,
    visibility_probability,
)
from .world import VehicleSpec, VehicleState, WorldConfig

__version__ = "0.1.0"
