//! File formats, model export, wall-clock timing and the benchmark harness
//! around `qnr-core`. The `qnr` binary exposes all of it on the command line.

pub mod bench;
pub mod io;
pub mod lp_format;

use std::time::Instant;

use qnr_core::bnb::Clock;

/// Monotonic clock started at construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
