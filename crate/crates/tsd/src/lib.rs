//! Token-machine evaluation of a small functional language with dataflow
//! cells.

pub mod bench;
pub mod graph;
pub mod machine;
pub mod oracle;
pub mod propagation;
pub mod syntax;
pub mod translate;
pub mod validity;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Translate(#[from] translate::TranslateError),
    #[error(transparent)]
    Open(#[from] machine::OpenTerm),
}
