//! Pluggable index-parallel maps. The core only ships the sequential
//! executor; results always come back in index order and are reduced in
//! that order, so output does not depend on the thread count.

use alloc::vec::Vec;
use num_complex::Complex64;

pub trait Executor: Sync {
    fn map_complex(&self, n: usize, f: &(dyn Fn(usize) -> Complex64 + Sync)) -> Vec<Complex64>;
    fn map_vec(&self, n: usize, f: &(dyn Fn(usize) -> Vec<f64> + Sync)) -> Vec<Vec<f64>>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_complex(&self, n: usize, f: &(dyn Fn(usize) -> Complex64 + Sync)) -> Vec<Complex64> {
        (0..n).map(f).collect()
    }

    fn map_vec(&self, n: usize, f: &(dyn Fn(usize) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
        (0..n).map(f).collect()
    }
}
