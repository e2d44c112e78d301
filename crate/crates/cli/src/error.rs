use std::fmt;
use std::process::ExitCode;

use kondo::env::EnvError;
use kondo::harness::HarnessError;
use kondo::planner::PlanError;
use kondo::task::TaskError;

/// A failure with its exit status: 2 usage or config, 3 infeasible input, 4 internal invariant breach.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::InfeasiblePrefix(_) | PlanError::Infeasible(_) => CliError::Infeasible(e.to_string()),
            PlanError::TooLarge { .. } | PlanError::DimensionMismatch { .. } | PlanError::BadInstance(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::MalformedMap(_) => CliError::Usage(e.to_string()),
            EnvError::Unreachable { .. } | EnvError::NotWalkable(_) | EnvError::SamplingExhausted { .. } => {
                CliError::Infeasible(e.to_string())
            }
        }
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Env(env) => env.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Task(t) => t.into(),
            HarnessError::Env(env) => env.into(),
            HarnessError::Io { .. } | HarnessError::Config(_) => CliError::Usage(e.to_string()),
            HarnessError::Episode { .. } | HarnessError::Metrics(_) | HarnessError::BadTrace { .. } => {
                CliError::Internal(e.to_string())
            }
        }
    }
}
