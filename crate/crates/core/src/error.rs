use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
  /// Input outside the domain of a matrix function or group operation.
  #[error("domain error: {0}")]
  Domain(String),

  #[error("invalid argument: {0}")]
  InvalidArgument(String),

  /// The linear system `dT = Q` has no solution inside the basic subcomplex.
  #[error("not exact in basic subcomplex: {0}")]
  NotExact(String),

  #[error("incompatible data: {0}")]
  Incompatible(String),

  #[error("not a cycle: nonzero boundary on {0}")]
  NotACycle(String),

  #[error("syntax error at position {pos}: {msg}")]
  Syntax { pos: usize, msg: String },

  #[error("unknown variable `{0}`")]
  UnknownVariable(String),

  #[error("format error: {0}")]
  Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
