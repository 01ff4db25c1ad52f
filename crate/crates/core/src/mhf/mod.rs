//! Labeling, keyed permutations and the cache-resident evaluator.

pub mod eval;
pub mod label;
pub mod oracle;
pub mod perm;
pub mod vector;

pub use eval::{eval, eval_hybrid, setup, EvalError, EvalOutput, Evaluator, EvaluatorKind, UsedArray, WORKING_LINES};
pub use label::{f, label, labels, resolve, GraphRef};
pub use oracle::Oracle;
pub use perm::{Identity, KeyedPerm, LazyPerm, PermutationFamily, RangeError};
pub use vector::TestVector;
