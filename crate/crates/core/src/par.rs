//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs on
//! the rayon thread pool. Without it every call runs sequentially. Output order
//! is always the input order, so results are identical either way.

/// How an embarrassingly parallel loop is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when `Parallel` actually dispatches to a thread pool.
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluates `f(0..count)` and collects the results in index order.
pub fn map_indexed<U, F>(exec: Execution, count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, U, F>(exec: Execution, data: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            data.par_iter().map(f).collect()
        }
        _ => data.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(Execution::Sequential, 1000, |i| i * i);
        let par = map_indexed(Execution::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(
            map_slice(Execution::Parallel, &v, |x| x.sqrt()),
            map_slice(Execution::Sequential, &v, |x| x.sqrt())
        );
    }
}
