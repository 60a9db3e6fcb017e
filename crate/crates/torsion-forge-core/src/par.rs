//! Data-parallel map with a sequential fallback.

/// Map `f` over `0..n`, results in index order.
pub fn map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Map `f` over `0..n` on the rayon pool, results in index order.
#[cfg(feature = "parallel")]
pub fn map_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Parallel when the `parallel` feature is enabled, sequential otherwise.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(n, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = map_seq(100, |i| i * i);
        let b = map_indexed(100, |i| i * i);
        assert_eq!(a, b);
    }
}
