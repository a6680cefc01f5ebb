//! Compensated and order-deterministic summation.

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for Neumaier {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of a complex stream (real and imaginary parts separately).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut acc = Neumaier::new();
    acc.extend(xs.iter().copied());
    acc.value()
}

const LEAF: usize = 128;

/// Sum whose result depends only on `xs`, never on how the caller computed it:
/// fixed-size leaves are summed with compensation, then combined pairwise.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return neumaier_sum(xs);
    }
    let leaves: Vec<f64> = xs.chunks(LEAF).map(neumaier_sum).collect();
    tree_reduce(leaves)
}

fn tree_reduce(mut level: Vec<f64>) -> f64 {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0] + c[1] } else { c[0] })
            .collect();
    }
    level.first().copied().unwrap_or(0.0)
}

pub fn pairwise_sum_complex(zs: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = zs.iter().map(|z| z.re).collect();
    let im: Vec<f64> = zs.iter().map(|z| z.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}
