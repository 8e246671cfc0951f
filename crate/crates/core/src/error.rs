use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PbxError {
    #[error("invalid dimension {dim}: need at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("trust window {window} exceeds dimension {dim}")]
    WindowTooLarge { window: usize, dim: usize },

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("matrix exponential overflowed while squaring (scale 2^{scale}, step {step})")]
    Overflow { scale: u32, step: u32 },

    #[error("singular matrix in linear solve (pivot {pivot})")]
    Singular { pivot: usize },

    #[error("index {n} above cap {cap}")]
    IndexCap { n: usize, cap: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid model parameter: {0}")]
    Parameter(String),

    #[error("unsupported parameter regime: {0}")]
    UnsupportedRegime(String),

    #[error("no vacuum: residual certificate {certificate:.3e} above {threshold:.1e}")]
    NoVacuum { certificate: f64, threshold: f64 },

    #[error("intertwiner ill-conditioned on window: condition estimate {estimate:.3e}")]
    IllConditioned { estimate: f64 },

    #[error("quadrature did not converge up to {max_nodes} nodes (last relative change {last_change:.3e})")]
    Quadrature { max_nodes: usize, last_change: f64 },

    #[error("mismatched basis families: {0}")]
    FamilyMismatch(String),

    #[error("gram check failed: {0}")]
    GramFailure(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("report parse error: {0}")]
    Parse(String),
}

impl PbxError {
    /// Errors that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            PbxError::Overflow { .. }
                | PbxError::Singular { .. }
                | PbxError::NoVacuum { .. }
                | PbxError::IllConditioned { .. }
                | PbxError::Quadrature { .. }
                | PbxError::NonFinite { .. }
                | PbxError::GramFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, PbxError>;
