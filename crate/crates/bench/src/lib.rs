//! Shared setup for the criterion benchmarks.

use cutters::generate::{random_instance, GeneratedInstance, Geometry};

pub fn standard_instance(n: usize, m: usize) -> GeneratedInstance {
    random_instance(n, m, Geometry::Mixed, 0xBEEF).expect("benchmark instance")
}
