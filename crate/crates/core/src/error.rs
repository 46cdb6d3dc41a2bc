use crate::position::Position;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("position `{0}` does not exist in the term")]
    InvalidPosition(Position),

    #[error("partial term not allowed here: {0}")]
    PartialTerm(String),

    #[error("term is not pure (contains an explicit substitution or bot): {0}")]
    ImpureTerm(String),

    #[error("redex occurrence at `{0}` no longer matches")]
    StaleOccurrence(Position),

    /// The meaningfulness oracle ran out of fuel on the subterm at this position.
    #[error("meaningfulness undetermined for the subterm at `{0}`")]
    Undetermined(Position),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A construction produced something its underlying invariant rules out.
    #[error("assumption check failed: {0}")]
    Assumption(String),

    #[error("derivation error: {0}")]
    Derivation(String),

    #[error("malformed document: {0}")]
    Document(String),
}
