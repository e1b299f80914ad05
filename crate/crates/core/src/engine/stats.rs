use serde::Serialize;

use crate::ext::ExtReal;
use crate::Scalar;

/// Tail window used by the asymptotic estimators: `max(100, k/10)`.
pub fn tail_window(k: usize) -> usize {
    100.max(k / 10).min(k)
}

/// Running mean and running minimum of an extended-real sample stream.
///
/// A `+∞` sample makes the running mean `+∞` from then on; the minimum ignores it.
#[derive(Debug, Clone, Default)]
pub struct RunningStats<T> {
    count: usize,
    sum: T,
    infinite: bool,
    min: Option<T>,
}

impl<T: Scalar> RunningStats<T> {
    pub fn new() -> Self {
        RunningStats { count: 0, sum: T::zero(), infinite: false, min: None }
    }

    pub fn push(&mut self, x: ExtReal<T>) {
        self.count += 1;
        match x {
            ExtReal::Finite(v) => {
                self.sum = self.sum + v;
                self.min = Some(self.min.map_or(v, |m| m.min(v)));
            }
            ExtReal::PosInf => self.infinite = true,
            ExtReal::NegInf => self.min = Some(T::neg_infinity()),
        }
    }

    pub fn mean(&self) -> T {
        if self.infinite || self.count == 0 {
            T::infinity()
        } else {
            self.sum / T::lit(self.count as f64)
        }
    }

    pub fn min(&self) -> T {
        self.min.unwrap_or(T::infinity())
    }
}

/// Summary of the objective samples of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ObjectiveStats<T> {
    /// Running mean after the last iteration.
    pub running_mean: T,
    /// Running minimum over the whole run.
    pub running_min: T,
    /// Mean of the samples in the tail window.
    pub tail_mean: T,
    /// Minimum of the samples in the tail window.
    pub tail_min: T,
    /// Last sample.
    pub last: T,
    /// Least-squares slope of the samples against `k` over the tail window.
    pub slope: T,
    /// Least-squares slope against `ln k` over the second half of the run.
    pub log_slope: T,
    pub window: usize,
    pub finite_samples: usize,
}

/// Least-squares slope of `ys` against `xs` (finite pairs only).
pub fn lsq_slope<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    let pairs: Vec<(T, T)> =
        xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(&x, &y)| (x, y)).collect();
    if pairs.len() < 2 {
        return T::nan();
    }
    let n = T::lit(pairs.len() as f64);
    let mx = pairs.iter().map(|p| p.0).sum::<T>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pairs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: T = pairs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == T::zero() {
        T::nan()
    } else {
        sxy / sxx
    }
}

/// Objective statistics from per-iteration samples (sample `i` belongs to iteration `i + 1`).
pub fn objective_stats_from<T: Scalar>(samples: &[ExtReal<T>]) -> Option<ObjectiveStats<T>> {
    let k = samples.len();
    let finite_samples = samples.iter().filter(|s| s.is_finite()).count();
    if finite_samples == 0 {
        return None;
    }
    let mut rs = RunningStats::new();
    samples.iter().for_each(|&s| rs.push(s));
    let window = tail_window(k).max(1);
    let tail = &samples[k - window..];
    let tail_vals: Vec<T> = tail.iter().map(|s| s.to_scalar()).collect();
    let tail_mean = if tail.iter().all(|s| s.is_finite()) {
        tail_vals.iter().copied().sum::<T>() / T::lit(window as f64)
    } else {
        T::infinity()
    };
    let tail_min = tail_vals.iter().copied().fold(T::infinity(), T::min);
    let ks: Vec<T> = (k - window..k).map(|i| T::lit((i + 1) as f64)).collect();
    let slope = lsq_slope(&ks, &tail_vals);
    let half = k / 2;
    let lks: Vec<T> = (half..k).map(|i| T::lit((i + 1) as f64).ln()).collect();
    let lvals: Vec<T> = samples[half..].iter().map(|s| s.to_scalar()).collect();
    let log_slope = lsq_slope(&lks, &lvals);
    Some(ObjectiveStats {
        running_mean: rs.mean(),
        running_min: rs.min(),
        tail_mean,
        tail_min,
        last: samples[k - 1].to_scalar(),
        slope,
        log_slope,
        window,
        finite_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_stats() {
        let mut rs = RunningStats::<f64>::new();
        for x in [3.0, 1.0, 2.0] {
            rs.push(ExtReal::Finite(x));
        }
        assert_eq!(rs.mean(), 2.0);
        assert_eq!(rs.min(), 1.0);
        rs.push(ExtReal::PosInf);
        assert_eq!(rs.mean(), f64::INFINITY);
        assert_eq!(rs.min(), 1.0);
    }

    #[test]
    fn slopes() {
        let samples: Vec<ExtReal<f64>> = (1..=1000).map(|k| ExtReal::Finite(-4.0 * k as f64 + 1.0)).collect();
        let s = objective_stats_from(&samples).unwrap();
        assert!((s.slope + 4.0).abs() < 1e-9);
        let logs: Vec<ExtReal<f64>> = (1..=1000).map(|k| ExtReal::Finite(2.0 * (k as f64).ln())).collect();
        let s = objective_stats_from(&logs).unwrap();
        assert!((s.log_slope - 2.0).abs() < 1e-9);
    }

    #[test]
    fn window_rule() {
        assert_eq!(tail_window(50), 50);
        assert_eq!(tail_window(500), 100);
        assert_eq!(tail_window(100_000), 10_000);
    }
}
