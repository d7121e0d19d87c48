pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod types;

pub use ast::{BinOp, Prim, Term, Type};
pub use parser::{parse, parse_type};
pub use pretty::pretty;
pub use types::{infer_type, typecheck, TypeEnv, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}
