//! Experiment orchestration behind the CLI: configuration files, training and
//! evaluation runs, parameter sweeps, scenario series and CSV reports. Every
//! command is deterministic in its configuration and seed.

mod config;
mod metrics;
mod report;
mod runner;

pub use config::{load_config, AgentKind, ExperimentConfig, Scenario, SweepGrid, SWEEP_TRAINING_STEPS};
pub use metrics::{read_csv, summarize, write_csv, MetricsRow, Stats, SummaryRow};
pub use report::{acceptance_box_plot, cmd_report};
pub use runner::{
    cmd_evaluate, cmd_rbd, cmd_scenario_series, cmd_sweep, cmd_train, evaluate_once, evaluate_runs, evaluation_seed,
    summarize_rows, MeanCurvePoint, SeriesAxis, SweepCell, CHECKPOINT_FILE, CURVE_FILE, METRICS_FILE, SERIES_FILE,
    SUMMARY_FILE, SWEEP_SUMMARY_FILE,
};
