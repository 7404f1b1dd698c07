"""Simulation and analysis tools for a cable-coupled quadrotor pair.

Two vehicles carry an inextensible hanging cable. The package provides
the static cable model, rigid-body and reduced relative-error dynamics,
a geometric tracking controller with cable-force feedforward, an energy
style convergence monitor, and a deterministic fixed-step simulator
with CSV output and parameter sweeps.
"""

from .errors import (
    CatsimError,
    ConfigInvalid,
    DegenerateForce,
    DegenerateMatrix,
    DegenerateSeparation,
    FitFailed,
    HeadingDegenerate,
    InadmissibleConfiguration,
    InsufficientSamples,
    IOFailure,
    NoConvergence,
    NonPositiveInput,
    NonSkewInput,
    ParamOutOfRange,
    TautCable,
)
from .geom3 import (
    attitude_error,
    angular_velocity_error,
    hat,
    is_rotation,
    nearest_rotation,
    rot_from_rotvec,
    rot_z,
    vee,
)
from .catenary import (
    Admissibility,
    CableParams,
    CatenaryShape,
    EndpointTensions,
    admissible,
    catenary_of_positions,
    curve_point,
    endpoint_forces_inertial,
    endpoint_tensions,
    half_span,
    orientation,
    solve_shape_parameter,
    tension_distribution,
)
from .plant import (
    DisturbanceProfile,
    ReducedErrorState,
    RigidBodyState,
    SystemState,
    VehicleParams,
    WorldParams,
    coupled_derivatives,
    disturbance_signal,
    effective_disturbance,
    per_agent_disturbances,
    reduced_error_derivatives,
    uav_derivatives,
)
from .controller import (
    AgentTarget,
    ControlInput,
    DesiredAttitude,
    GainSet,
    GeometricController,
    ReferenceTrajectory,
    desired_attitude,
    force_command,
    thrust,
    torque,
)
from .analysis import (
    DecayFit,
    ISSEstimate,
    LyapunovParams,
    TraceSeries,
    decay_rate_fit,
    dissipation_check,
    estimate_lambda_gamma,
    lyapunov_value,
    report_lines,
    tail_metric,
    ultimate_bound,
)
from .simkit import (
    DISTURBANCE_SWEEP_AMPLITUDES,
    GAIN_SWEEP_KVS,
    SimConfig,
    SimTrace,
    SweepPoint,
    SweepResult,
    emit_csv,
    emit_lyapunov_csv,
    load_config,
    rk4_step,
    run_scenario,
    sweep_disturbance,
    sweep_gain,
    trace_report,
)

__version__ = "0.1.0"
