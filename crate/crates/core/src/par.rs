//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `parallel` flag selects rayon; without it
//! every call runs sequentially and the flag is ignored.

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(n: usize, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Whether parallel execution is compiled in.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = super::map(&xs, true, |x| x * x);
        let b = super::map(&xs, false, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(super::map_range(10, true, |i| i + 1), super::map_range(10, false, |i| i + 1));
    }
}
