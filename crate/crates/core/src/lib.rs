// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod coherence;
pub mod densmat;
pub mod error;
pub mod figures;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod saddle;
pub mod specfun;
pub mod statemap;
pub mod validation;
pub mod wigner;

pub use error::{Error, Result};

/// Ordered parallel map over `0..count`; the result does not depend on scheduling.
pub(crate) fn parallel_map<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}
