//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon when
//! asked for [`Execution::Parallel`]; without it every call runs sequentially.
//! Callers get identical results either way: work items never share RNG state
//! and results are collected in input order.

/// How a batch of independent evaluations is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this execution mode actually runs in parallel in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn is_parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Map `f` over `0..count`, preserving order.
pub fn map_indexed<U, F>(exec: Execution, count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Map `f` over a slice, preserving order.
pub fn map_slice<T, U, F>(exec: Execution, data: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return data.par_iter().map(f).collect();
    }
    let _ = exec;
    data.iter().map(f).collect()
}

/// Size the global thread pool. Returns `false` if the pool was already
/// initialised or the build is sequential-only.
pub fn configure_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = map_indexed(Execution::Sequential, 1000, |i| (i as f64).sqrt());
        let par = map_indexed(Execution::Parallel, 1000, |i| (i as f64).sqrt());
        assert_eq!(seq, par);

        let data: Vec<f64> = (0..257).map(|i| i as f64 * 0.5).collect();
        let a = map_slice(Execution::Sequential, &data, |x| x * x);
        let b = map_slice(Execution::Parallel, &data, |x| x * x);
        assert_eq!(a, b);
    }
}
