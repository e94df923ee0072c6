//! Thin indexed-map helpers that run on rayon when the `parallel` feature is
//! enabled and fall back to plain iteration otherwise.
//!
//! Every parallel axis in the crate is an independent-output map (per tile,
//! per hypothesis, per channel, per frequency bin), so results are identical
//! bit-for-bit between the two modes.

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps `f` over disjoint mutable chunks of `data`, one chunk per index.
///
/// `data.len()` must be an exact multiple of `chunk_len`.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert_eq!(data.len() % chunk_len.max(1), 0, "chunk length must divide data length");
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, chunk)| f(i, chunk));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, chunk)| f(i, chunk));
    }
}
