use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Three-hump camel plus 5.
pub fn camel3_plus5(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let a2 = a * a;
    2.0 * a2 - 1.05 * a2 * a2 + a2 * a2 * a2 / 6.0 + a * b + b * b + 5.0
}

/// `sum_i |x_i|^(i+1)` (1-based `i`) plus 5.
pub fn sumpower_plus5(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| v.abs().powi(i as i32 + 2))
        .sum::<f64>()
        + 5.0
}

/// Matyas plus 5.
pub fn matyas_plus5(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    0.26 * (a * a + b * b) - 0.48 * a * b + 5.0
}

/// The optimisation test functions with their sampling domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Camel,
    Sumpower,
    Matyas,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [TestFunction::Camel, TestFunction::Sumpower, TestFunction::Matyas];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Camel => "camel",
            TestFunction::Sumpower => "sumpower",
            TestFunction::Matyas => "matyas",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TestFunction::Camel => "Camel",
            TestFunction::Sumpower => "Sum power",
            TestFunction::Matyas => "Matya",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            TestFunction::Sumpower => 5,
            _ => 2,
        }
    }

    /// Symmetric sampling half-width per coordinate.
    pub fn half_width(self) -> f64 {
        match self {
            TestFunction::Camel => 5.0,
            TestFunction::Sumpower => 1.0,
            TestFunction::Matyas => 10.0,
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Camel => camel3_plus5(x),
            TestFunction::Sumpower => sumpower_plus5(x),
            TestFunction::Matyas => matyas_plus5(x),
        }
    }

    /// Optimisation start point in original units.
    pub fn start(self) -> Vec<f64> {
        match self {
            TestFunction::Sumpower => vec![-1.0; 5],
            _ => vec![1.0; 2],
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "camel" | "camel3" => Ok(TestFunction::Camel),
            "sumpower" => Ok(TestFunction::Sumpower),
            "matyas" | "matya" => Ok(TestFunction::Matyas),
            other => Err(Error::config(format!("unknown test function `{other}`"))),
        }
    }
}

/// Two-spill advection-free diffusion model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpillParams {
    pub mass: f64,
    pub diffusion: f64,
    /// `(location, time)` of each release, in increasing time.
    pub events: Vec<(f64, f64)>,
    pub location_range: (f64, f64),
    pub time_range: (f64, f64),
}

impl Default for SpillParams {
    fn default() -> Self {
        SpillParams {
            mass: 10.0,
            diffusion: 0.07,
            events: vec![(0.0, 0.0), (0.8, 10.0)],
            location_range: (0.01, 1.0),
            time_range: (0.01, 15.0),
        }
    }
}

impl SpillParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion > 0.0) {
            return Err(Error::config("diffusion must be positive"));
        }
        if self.events.iter().any(|e| e.1 < 0.0) || self.events.windows(2).any(|w| w[1].1 <= w[0].1) {
            return Err(Error::config("spill times must be nonnegative and increasing"));
        }
        Ok(())
    }
}

/// Concentration at `(location, time)`; a release contributes only once `time > tau`.
pub fn spill_concentration(location: f64, time: f64, p: &SpillParams) -> f64 {
    p.events
        .iter()
        .filter(|&&(_, tau)| time > tau)
        .map(|&(l, tau)| {
            let dt = time - tau;
            p.mass / (4.0 * PI * p.diffusion * dt).sqrt()
                * (-(location - l).powi(2) / (4.0 * p.diffusion * dt)).exp()
        })
        .sum()
}
