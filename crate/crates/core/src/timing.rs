//! Step schedules that land exactly on snapshot times.

use crate::error::{BllError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Step actually used: `interval / steps_per_snapshot`.
    pub dt: f64,
    pub steps_per_snapshot: usize,
    /// Number of snapshots after the initial one.
    pub snapshots: usize,
    pub interval: f64,
}

impl Schedule {
    /// Largest step not exceeding `dt_max` that divides `interval`, with
    /// `t_end` required to be a whole number of intervals.
    pub fn new(dt_max: f64, interval: f64, t_end: f64) -> Result<Self> {
        if !(dt_max > 0.0) || !(interval > 0.0) || !(t_end >= 0.0) {
            return Err(BllError::Parameter(format!(
                "invalid schedule: dt = {dt_max}, interval = {interval}, t_end = {t_end}"
            )));
        }
        let ratio = t_end / interval;
        let snapshots = ratio.round();
        if (ratio - snapshots).abs() > 1e-9 * ratio.max(1.0) {
            return Err(BllError::Parameter(format!(
                "t_end = {t_end} is not a multiple of the snapshot interval {interval}"
            )));
        }
        let steps = (interval / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Self { dt: interval / steps as f64, steps_per_snapshot: steps, snapshots: snapshots as usize, interval })
    }

    pub fn total_steps(&self) -> usize {
        self.steps_per_snapshot * self.snapshots
    }

    /// Time of step `n`, computed without accumulating round-off.
    pub fn time_of(&self, n: usize) -> f64 {
        let k = n / self.steps_per_snapshot;
        let rem = n % self.steps_per_snapshot;
        k as f64 * self.interval + rem as f64 * self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_hits_snapshots() {
        let s = Schedule::new(0.03, 0.1, 1.0).unwrap();
        assert_eq!(s.steps_per_snapshot, 4);
        assert_eq!(s.snapshots, 10);
        assert!((s.dt - 0.025).abs() < 1e-15);
        assert_eq!(s.time_of(8), 0.2);
        assert!(Schedule::new(0.01, 0.3, 1.0).is_err());
        assert_eq!(Schedule::new(0.1, 0.1, 0.5).unwrap().steps_per_snapshot, 1);
    }
}
