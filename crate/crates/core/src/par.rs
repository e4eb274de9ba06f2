//! Optional data parallelism. Results never depend on the partitioning.

/// Calls `f(y, row_a, row_b)` for each row of two equally shaped row-major
/// buffers of width `width`.
pub(crate) fn for_each_row_pair<A: Send, B: Send>(
    a: &mut [A],
    b: &mut [B],
    width: usize,
    f: impl Fn(usize, &mut [A], &mut [B]) + Sync,
) {
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        a.par_chunks_mut(width)
            .zip(b.par_chunks_mut(width))
            .enumerate()
            .for_each(|(y, (ra, rb))| f(y, ra, rb));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (y, (ra, rb)) in a.chunks_mut(width).zip(b.chunks_mut(width)).enumerate() {
            f(y, ra, rb);
        }
    }
}

/// Order-preserving map over `0..n`.
pub(crate) fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
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
