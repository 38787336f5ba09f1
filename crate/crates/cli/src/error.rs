use hireg_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable files, or expressions that are not finite.
    #[error("{0}")]
    Usage(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// 0 success, 1 usage or parse, 2 infeasible or invalid parameters,
    /// 3 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Core(e) => match e {
                CoreError::Parse { .. } | CoreError::Io { .. } => 1,
                CoreError::Domain(_) | CoreError::Parameter(_) | CoreError::Infeasible(_) | CoreError::Shape(_) => 2,
                CoreError::NewtonNonConvergence { .. } | CoreError::LinearSolver(_) | CoreError::Divergence { .. } => 3,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Config { line: 1, message: "x".into() }.exit_code(), 1);
        assert_eq!(CliError::from(CoreError::Infeasible("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::Parameter("x".into())).exit_code(), 2);
        let newton = CoreError::NewtonNonConvergence {
            step: 1,
            iterations: 50,
            residual: 1.0,
        };
        assert_eq!(CliError::from(newton).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::Divergence { iterations: 3, ratio: 2.0 }).exit_code(), 3);
    }
}
