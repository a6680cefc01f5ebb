//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::cmp::Ordering;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 20_000;

/// Values that can be integrated: real or complex.
pub trait Integrand: Copy + std::ops::Add<Output = Self> + std::ops::Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
    fn sub(self, other: Self) -> Self;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        // max-norm keeps the tolerance meaningful for each component
        self.re.abs().max(self.im.abs())
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
}

fn gk15<T: Integrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron = kron + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, kron.sub(gauss).norm())
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`, bisecting the
/// subinterval with the largest error estimate. On failure, reports that
/// subinterval.
pub fn integrate<T: Integrand, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, tol: f64) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (value, err) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let mut total_err = err;
    loop {
        if total_err <= tol {
            break;
        }
        if heap.len() >= MAX_INTERVALS {
            let worst = heap.peek().unwrap();
            return Err(Error::Quadrature { a: worst.a, b: worst.b, error: worst.err });
        }
        let seg = heap.pop().unwrap();
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::Quadrature { a: seg.a, b: seg.b, error: seg.err });
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
        // the running error can drift from rounding; resync occasionally
        if heap.len() % 64 == 0 {
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
    let mut segs: Vec<Segment<T>> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(segs.into_iter().fold(T::zero(), |acc, s| acc + s.value))
}
