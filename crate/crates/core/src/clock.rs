/// Source of elapsed wall time for fit traces and time budgets.
pub trait Clock {
    /// Seconds elapsed since the clock was started.
    fn elapsed_seconds(&self) -> f64;
}

/// A clock that never advances. Time budgets never trigger under it.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_seconds(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
impl Clock for std::time::Instant {
    fn elapsed_seconds(&self) -> f64 {
        self.elapsed().as_secs_f64()
    }
}
