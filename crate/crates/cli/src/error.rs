use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Core(#[from] sfg_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 0 ok, 1 usage or configuration, 2 unstable operating point, 3 ensemble divergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(sfg_core::Error::Unstable { .. }) => 2,
            CliError::Core(sfg_core::Error::EnsembleQuality { .. }) => 3,
            _ => 1,
        }
    }
}
