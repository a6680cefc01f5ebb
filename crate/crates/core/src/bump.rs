//! The fixed catalog of smooth compactly supported test functions.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bump {
    /// exp(−1/(x(1−x))) on (0, 1)
    BumpA,
    /// exp(−1/(x(2−x))) on (0, 2)
    BumpB,
}

impl Bump {
    pub const ALL: [Bump; 2] = [Bump::BumpA, Bump::BumpB];

    pub fn name(self) -> &'static str {
        match self {
            Bump::BumpA => "bump_a",
            Bump::BumpB => "bump_b",
        }
    }

    /// Right end of the support; the left end is always 0.
    pub fn support_end(self) -> f64 {
        match self {
            Bump::BumpA => 1.0,
            Bump::BumpB => 2.0,
        }
    }

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        let b = self.support_end();
        if x <= 0.0 || x >= b {
            0.0
        } else {
            (-1.0 / (x * (b - x))).exp()
        }
    }

    /// A frequency beyond which |F̂(y)| is below e^{−50}. Near each end of
    /// the support F behaves like exp(−1/(b·t)), whose transform decays like
    /// exp(−2√(π y/b)).
    pub fn negligible_frequency(self) -> f64 {
        let root = 25.0;
        root * root * self.support_end() / std::f64::consts::PI
    }

    /// ∫₀^∞ F(x) dx, computed once by quadrature.
    pub fn integral(self) -> f64 {
        crate::quadrature::integrate(|x| self.eval(x), 0.0, self.support_end(), 1e-15)
            .expect("bump integrand is smooth")
    }
}

impl fmt::Display for Bump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bump {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bump_a" => Ok(Bump::BumpA),
            "bump_b" => Ok(Bump::BumpB),
            other => Err(format!("unknown test function '{other}' (expected bump_a or bump_b)")),
        }
    }
}

/// A catalog bump multiplied by a constant amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub shape: Bump,
    pub amplitude: f64,
}

impl TestFunction {
    pub fn new(shape: Bump) -> Self {
        Self { shape, amplitude: 1.0 }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { amplitude: self.amplitude * factor, ..self }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * self.shape.eval(x)
    }

    pub fn support_end(&self) -> f64 {
        self.shape.support_end()
    }

    pub fn integral(&self) -> f64 {
        self.amplitude * self.shape.integral()
    }
}

impl From<Bump> for TestFunction {
    fn from(b: Bump) -> Self {
        TestFunction::new(b)
    }
}
