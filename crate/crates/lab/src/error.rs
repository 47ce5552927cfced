use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("criteria failed: {}", .0.join(", "))]
    Criteria(Vec<String>),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<LabError>,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// 0 success, 2 validation, 3 criterion failure, 4 resource, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 2,
            LabError::Criteria(_) => 3,
            LabError::Resource(_) => 4,
            LabError::Stage { source, .. } => source.exit_code(),
            LabError::Compute(_) | LabError::Io(_) => 1,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            LabError::Stage { .. } => self,
            other => LabError::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }
}

impl From<anderson_core::Error> for LabError {
    fn from(e: anderson_core::Error) -> Self {
        use anderson_core::Error as E;
        match e {
            E::Config(m) => LabError::Validation(m),
            E::Resource(m) => LabError::Resource(m),
            other => LabError::Compute(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Compute(format!("json: {e}"))
    }
}
