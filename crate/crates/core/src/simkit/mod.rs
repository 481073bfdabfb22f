//! Simulation toolkit: trajectories, synthetic sensors, run loops and
//! Lyapunov diagnostics.

pub mod lyapunov;
pub mod run;
pub mod scenario;
pub mod trajectory;

pub use run::{
    run_algorithm1, run_continuous, run_stream, simulate, synthesize_stream, ErrorNorms, Frame, ImuSample, JumpEvent,
    LogRecord, MeasurementStream, RunLog, StreamOptions, TruthSample,
};
pub use scenario::{
    bench_landmarks, reference_landmarks, reference_params, reference_params_algorithm1, reference_scenario,
    reference_scenario_algorithm1, reference_trajectory, AxisChoice, ImuSpec,
    InitialEstimate, LandmarkSensorSpec, Mode, PoseInit, RunSpec, Scenario,
};
pub use trajectory::{AngularRate, CubicSpline, Path, Trajectory};
