//! Data-parallel helpers. With the `parallel` feature (default) work is
//! spread with rayon; without it, or under [`Parallelism::Sequential`], the
//! same closures run on the calling thread.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    pub fn enabled(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Caps the global worker pool at `n` threads. Only the first call has an
/// effect; a no-op without the `parallel` feature.
pub fn set_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let _ = n;
}

/// Order-preserving map.
pub fn map<T, R, F>(mode: Parallelism, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.enabled() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = mode;
    items.into_iter().map(f).collect()
}

/// Maps `0..n` and keeps the `Some` results in index order.
pub fn filter_map_range<R, F>(mode: Parallelism, n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().filter_map(f).collect();
    }
    let _ = mode;
    (0..n).filter_map(f).collect()
}

/// True iff `f` holds for every index in `0..n`.
pub fn all_range<F>(mode: Parallelism, n: u64, f: F) -> bool
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().all(f);
    }
    let _ = mode;
    (0..n).all(f)
}

/// True iff `f` holds for some index in `0..n`.
pub fn any_range<F>(mode: Parallelism, n: u64, f: F) -> bool
where
    F: Fn(u64) -> bool + Sync + Send,
{
    !all_range(mode, n, |i| !f(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = filter_map_range(Parallelism::Sequential, 1000, |i| (i % 7 == 0).then_some(i * i));
        let par = filter_map_range(Parallelism::Parallel, 1000, |i| (i % 7 == 0).then_some(i * i));
        assert_eq!(seq, par);
        let v: Vec<u32> = (0..100).collect();
        assert_eq!(map(Parallelism::Parallel, v.clone(), |x| x + 1), map(Parallelism::Sequential, v, |x| x + 1));
        assert!(all_range(Parallelism::Parallel, 50, |i| i < 50));
        assert!(any_range(Parallelism::Sequential, 50, |i| i == 49));
        assert!(!any_range(Parallelism::Parallel, 0, |_| true));
    }
}
