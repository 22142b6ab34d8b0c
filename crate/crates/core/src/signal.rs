//! Time-dependent boundary signals.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A scalar function of time with a known (or numerically estimated) derivative.
#[derive(Clone)]
pub enum Signal<T> {
    Constant(T),
    /// Linear from `from` at `t = 0` to `to` at `t = duration`, then held.
    Ramp {
        from: T,
        to: T,
        duration: T,
    },
    /// `mean + amplitude sin(2 pi frequency t + phase)`.
    Sinusoid {
        mean: T,
        amplitude: T,
        frequency: T,
        phase: T,
    },
    /// Piecewise-linear interpolation of `(t, value)` samples, held constant outside.
    Table {
        t: Vec<T>,
        values: Vec<T>,
    },
    /// Arbitrary closure. The derivative is taken by central differences.
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: fmt::Debug> fmt::Debug for Signal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Constant(c) => write!(f, "Constant({c:?})"),
            Signal::Ramp { from, to, duration } => write!(f, "Ramp({from:?} -> {to:?} over {duration:?})"),
            Signal::Sinusoid { mean, amplitude, frequency, phase } => {
                write!(f, "Sinusoid({mean:?} + {amplitude:?} sin(2pi {frequency:?} t + {phase:?}))")
            }
            Signal::Table { t, .. } => write!(f, "Table({} samples)", t.len()),
            Signal::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: Real> Signal<T> {
    pub fn custom<F: Fn(T) -> T + Send + Sync + 'static>(f: F) -> Self {
        Signal::Custom(Arc::new(f))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Signal::Ramp { duration, .. } if !(*duration > T::zero()) => {
                Err(Error::Config("ramp duration must be positive".into()))
            }
            Signal::Table { t, values } => {
                if t.is_empty() || t.len() != values.len() {
                    return Err(Error::Config("signal table needs matching, non-empty t and value lists".into()));
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Config("signal table times must be strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, time: T) -> T {
        match self {
            Signal::Constant(c) => *c,
            Signal::Ramp { from, to, duration } => {
                if time >= *duration {
                    *to
                } else if time <= T::zero() {
                    *from
                } else {
                    *from + (*to - *from) * time / *duration
                }
            }
            Signal::Sinusoid { mean, amplitude, frequency, phase } => {
                *mean + *amplitude * (T::TAU() * *frequency * time + *phase).sin()
            }
            Signal::Table { t, values } => {
                let n = t.len();
                if time <= t[0] {
                    return values[0];
                }
                if time >= t[n - 1] {
                    return values[n - 1];
                }
                let k = t.partition_point(|&s| s <= time) - 1;
                let w = (time - t[k]) / (t[k + 1] - t[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
            Signal::Custom(f) => f(time),
        }
    }

    /// Right derivative at `time`.
    pub fn derivative(&self, time: T) -> T {
        match self {
            Signal::Constant(_) => T::zero(),
            Signal::Ramp { from, to, duration } => {
                if time >= *duration {
                    T::zero()
                } else {
                    (*to - *from) / *duration
                }
            }
            Signal::Sinusoid { amplitude, frequency, phase, .. } => {
                *amplitude * T::TAU() * *frequency * (T::TAU() * *frequency * time + *phase).cos()
            }
            Signal::Table { t, values } => {
                let n = t.len();
                if n < 2 || time < t[0] || time >= t[n - 1] {
                    return T::zero();
                }
                let k = t.partition_point(|&s| s <= time) - 1;
                (values[k + 1] - values[k]) / (t[k + 1] - t[k])
            }
            Signal::Custom(f) => {
                let h = T::epsilon().cbrt() * (T::one() + time.abs());
                (f(time + h) - f(time - h)) / (h + h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_derivatives() {
        let r = Signal::Ramp { from: 1.0, to: 3.0, duration: 2.0 };
        assert_eq!((r.value(1.0), r.derivative(1.0), r.value(5.0), r.derivative(5.0)), (2.0, 1.0, 3.0, 0.0));
        let s = Signal::<f64>::Sinusoid { mean: 1.0, amplitude: 0.5, frequency: 1.0, phase: 0.0 };
        assert!((s.value(0.25) - 1.5).abs() < 1e-15);
        assert!((s.derivative(0.0) - std::f64::consts::PI).abs() < 1e-14);
        let t = Signal::Table { t: vec![0.0, 1.0, 3.0], values: vec![0.0, 2.0, 3.0] };
        assert_eq!((t.value(0.5), t.value(2.0), t.value(9.0)), (1.0, 2.5, 3.0));
        assert_eq!((t.derivative(0.5), t.derivative(2.0)), (2.0, 0.5));
        let c = Signal::custom(|t: f64| t * t);
        assert!((c.derivative(3.0) - 6.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_tables_are_rejected() {
        assert!(Signal::Table { t: vec![0.0, 0.0], values: vec![1.0, 2.0] }.validate().is_err());
        assert!(Signal::Ramp { from: 0.0, to: 1.0, duration: 0.0 }.validate().is_err());
    }
}
