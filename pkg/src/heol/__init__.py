"""Homeostat-based model-free control on flat systems.

The package derives per-channel ultra-local models ("homeostats")
``d^n(Dy)/dt^n = F + alpha Du`` by tangent linearisation of implicit flat
input/output relations, estimates the lumped disturbance F with windowed
integral kernels that need no output derivatives, closes each channel with
an intelligent iP/iPD law, and ships a deterministic simulation harness with
a two-input flat benchmark plant.
"""

from .errors import (
    AlignmentError,
    CapabilityError,
    ConfigurationError,
    DegenerateRelationError,
    DivergenceError,
    EmptyLogError,
    ExportError,
    FlatnessSingularityError,
    HeolError,
    HorizonError,
    InsufficientDataError,
    IntervalError,
    SingularChannelError,
    SingularGainError,
    StabilityError,
    TimeOrderError,
    WarmUpError,
)
from .signals import (
    ReferenceTrajectory,
    SampledSeries,
    Segment,
    TimeGrid,
    Window,
    eval_trajectory,
    make_constant,
    make_smoothstep,
    window_slice,
)
from .homeostat import (
    FlatIoProfile,
    HomeostatChannel,
    ImplicitFlatRelation,
    build_reference_table,
    derive_channel,
    finite_diff_partial,
    nominal_u1,
    nominal_u2,
    perturbed_nominal_u2,
    validate_flat_io,
)
from .estimators import (
    EstimatorConfig,
    FEstimate,
    estimate_f_nu1,
    estimate_f_nu2,
    quadrature,
)
from .controllers import (
    ChannelController,
    ChannelHistory,
    ChannelRecord,
    ControllerState,
    Gains,
    channel_step,
    derivative_estimate,
    gains_from_poles,
    ip_control,
    ipd_control,
    poles_from_gains,
)
from .plant import (
    MismatchSpec,
    PlantModel,
    SimState,
    benchmark_relations,
    example_plant,
    initial_state,
    rk4_step,
)
from .scenarios import (
    ChannelSpec,
    Metrics,
    Scenario,
    SimLog,
    Timing,
    builtin_names,
    builtin_scenario,
    compute_metrics,
    export_csv,
    export_metrics,
    load_scenario,
    run_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)

__version__ = "0.1.0"
