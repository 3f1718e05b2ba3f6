use ordist_core::cohomology::CohomologyError;
use ordist_core::distribution::DistError;
use ordist_core::groupring::GroupRingError;
use ordist_core::quadfield::QuadError;
use ordist_core::rayclass::RayError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Internal(String),
    #[error("cache: {0}")]
    Cache(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Hypothesis(_) => 2,
            CliError::Internal(_) | CliError::Cache(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Hypothesis(_) => "hypothesis",
            CliError::Internal(_) => "internal",
            CliError::Cache(_) => "cache",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(s) | CliError::Hypothesis(s) | CliError::Internal(s) | CliError::Cache(s) => s.clone(),
        }
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::NotSquarefree(_)
            | QuadError::NotPrime(_)
            | QuadError::BadSpec(..)
            | QuadError::DuplicatePrime(_)
            | QuadError::ModulusTooLarge { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<RayError> for CliError {
    fn from(e: RayError) -> Self {
        match e {
            RayError::Quad(q) => q.into(),
            e => CliError::Internal(e.to_string()),
        }
    }
}

impl From<GroupRingError> for CliError {
    fn from(e: GroupRingError) -> Self {
        match e {
            GroupRingError::Ray(r) => r.into(),
            e @ GroupRingError::NotCoprimeToW(..) => CliError::Hypothesis(e.to_string()),
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::Ray(r) => r.into(),
            DistError::GroupRing(g) => g.into(),
            DistError::HypothesisFailed(_) | DistError::WrongShape(_) | DistError::NotCoprimeToW(..) => {
                CliError::Hypothesis(e.to_string())
            }
            e => CliError::Internal(e.to_string()),
        }
    }
}

impl From<CohomologyError> for CliError {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::InvalidFrame(_) | CohomologyError::InvalidIndexSet(_) => CliError::Usage(e.to_string()),
            CohomologyError::NotCyclic(_) => CliError::Hypothesis(e.to_string()),
            e => CliError::Internal(e.to_string()),
        }
    }
}
