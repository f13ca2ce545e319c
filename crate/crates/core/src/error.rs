use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `J = 0` and `B_0 = 0`: the triplet block vanishes in the shifted frame.
    #[error("degenerate input: J_x = J_z and B_0 = 0 leave the triplet fully degenerate")]
    DegenerateInput,

    #[error("arccos argument {ratio} lies outside [-1, 1] beyond rounding")]
    ArccosDomain { ratio: f64 },

    #[error("{eps} is not a root of the shifted cubic (residual {residual:e})")]
    NotARoot { eps: f64, residual: f64 },

    #[error("level {level} is degenerate (gap {gap:e})")]
    DegenerateSpectrum { level: usize, gap: f64 },

    #[error("level index {0} out of range (expected 0..=3)")]
    LevelOutOfRange(usize),

    #[error("Jacobi iteration did not converge (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { off_norm: f64 },

    #[error("state is not normalized (norm {norm})")]
    NormError { norm: f64 },

    #[error("step too coarse: dt·‖H‖ = {dt_norm} must be below 0.1")]
    StepUnderflow { dt_norm: f64 },

    #[error("evolution was not adiabatic (fidelity {fidelity})")]
    AdiabaticityViolation { fidelity: f64 },
}
