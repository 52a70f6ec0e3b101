//! Input library `(U_C, U_D)`: constant flow signals with durations in
//! `(0, T_m]` and values in a box, and jump values drawn from a second box.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::ConstantInputSignal;
use crate::Rng;

/// Axis-aligned box `[min, max]` in `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl InputBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: max.len(),
            });
        }
        if min.is_empty() {
            return Err(Error::param("box", "zero-dimensional box"));
        }
        if min.iter().chain(&max).any(|v| !v.is_finite()) {
            return Err(Error::param("box", "bounds must be finite"));
        }
        if min.iter().zip(&max).any(|(a, b)| a > b) {
            return Err(Error::param("box", "min exceeds max"));
        }
        Ok(Self { min, max })
    }

    pub fn interval(min: f64, max: f64) -> Result<Self> {
        Self::new(vec![min], vec![max])
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && u.iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(v, (a, b))| v >= a && v <= b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Uniform draw from the open box; a degenerate side `[a, a]` yields `a`.
    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(&a, &b)| {
                if a == b {
                    return a;
                }
                loop {
                    let v = rng.random_range(a..b);
                    if v > a {
                        return v;
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputLibrary {
    t_max: f64,
    flow_box: InputBox,
    jump_box: InputBox,
}

impl InputLibrary {
    pub fn new(t_max: f64, flow_box: InputBox, jump_box: InputBox) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
        }
        Ok(Self {
            t_max,
            flow_box,
            jump_box,
        })
    }

    /// The library used for the bouncing ball: `T_m = 0.1`, inputs in `(0, 5)`.
    pub fn bouncing_ball() -> Self {
        Self::new(
            0.1,
            InputBox::interval(0.0, 5.0).expect("valid box"),
            InputBox::interval(0.0, 5.0).expect("valid box"),
        )
        .expect("valid library")
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn flow_box(&self) -> &InputBox {
        &self.flow_box
    }

    pub fn jump_box(&self) -> &InputBox {
        &self.jump_box
    }

    /// Duration uniform on `(0, T_m]`, value uniform on the flow box.
    pub fn sample_flow_signal(&self, rng: &mut Rng) -> ConstantInputSignal {
        let w: f64 = rng.random();
        ConstantInputSignal {
            value: self.flow_box.sample(rng),
            duration: self.t_max * (1.0 - w),
        }
    }

    pub fn sample_jump_value(&self, rng: &mut Rng) -> Vec<f64> {
        self.jump_box.sample(rng)
    }
}

/// Checked constructor mirroring the library construction procedure.
pub fn build_library(t_max: f64, flow_box: InputBox, jump_box: InputBox) -> Result<InputLibrary> {
    InputLibrary::new(t_max, flow_box, jump_box)
}
