//! Thin switch between rayon and sequential execution.
//!
//! With the `parallel` feature (default) the `*_auto` entry points dispatch
//! to rayon; without it they fall back to the sequential twins.  The
//! sequential versions are always compiled so the bench suite can compare
//! both code paths in a single run.

/// Map `0..n` and collect results in index order (sequential).
pub fn map_indexed_seq<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed_auto<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed_auto<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    map_indexed_seq(n, f)
}

/// Sum `f(i)` over `0..n` (sequential).
pub fn sum_indexed_seq(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    (0..n).map(f).sum()
}

#[cfg(feature = "parallel")]
pub fn sum_indexed_auto(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).sum()
}

#[cfg(not(feature = "parallel"))]
pub fn sum_indexed_auto(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    sum_indexed_seq(n, f)
}

/// `all(f(i))` over `0..n` (sequential).
pub fn all_indexed_seq(n: usize, f: impl Fn(usize) -> bool + Sync + Send) -> bool {
    (0..n).all(f)
}

#[cfg(feature = "parallel")]
pub fn all_indexed_auto(n: usize, f: impl Fn(usize) -> bool + Sync + Send) -> bool {
    use rayon::prelude::*;
    (0..n).into_par_iter().all(f)
}

#[cfg(not(feature = "parallel"))]
pub fn all_indexed_auto(n: usize, f: impl Fn(usize) -> bool + Sync + Send) -> bool {
    all_indexed_seq(n, f)
}

/// Write `f(i)` into `out[i]` for disjoint chunks (sequential).
pub fn fill_chunks_seq(out: &mut [f64], chunk: usize, f: impl Fn(usize, &mut [f64]) + Sync + Send) {
    for (ci, c) in out.chunks_mut(chunk).enumerate() {
        f(ci * chunk, c);
    }
}

#[cfg(feature = "parallel")]
pub fn fill_chunks_auto(out: &mut [f64], chunk: usize, f: impl Fn(usize, &mut [f64]) + Sync + Send) {
    use rayon::prelude::*;
    out.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(ci, c)| f(ci * chunk, c));
}

#[cfg(not(feature = "parallel"))]
pub fn fill_chunks_auto(out: &mut [f64], chunk: usize, f: impl Fn(usize, &mut [f64]) + Sync + Send) {
    fill_chunks_seq(out, chunk, f);
}
