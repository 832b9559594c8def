//! Symmetric tensors in two and three space dimensions.
//!
//! Only the upper triangle is stored. Contractions count off-diagonal entries
//! twice, so `a.contract(&b)` equals the full-matrix double dot product.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("tensor dimension mismatch: {left} vs {right}")]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

/// Symmetric `d x d` tensor, `d` in {2, 3}.
///
/// Storage is the row-major upper triangle: `[xx, xy, yy]` in 2D and
/// `[xx, xy, xz, yy, yz, zz]` in 3D. Unused trailing slots are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct SymTensor {
    dim: u8,
    c: [f64; 6],
}

const DIAG_2: [usize; 2] = [0, 2];
const DIAG_3: [usize; 3] = [0, 3, 5];

#[inline]
fn diag_slots(dim: u8) -> &'static [usize] {
    if dim == 2 {
        &DIAG_2
    } else {
        &DIAG_3
    }
}

#[inline]
fn slot_count(dim: u8) -> usize {
    if dim == 2 {
        3
    } else {
        6
    }
}

#[inline]
fn is_diag(dim: u8, slot: usize) -> bool {
    diag_slots(dim).contains(&slot)
}

impl SymTensor {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "SymTensor supports d = 2 or 3, got {dim}");
        SymTensor { dim: dim as u8, c: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = SymTensor::zero(dim);
        for &s in diag_slots(t.dim) {
            t.c[s] = 1.0;
        }
        t
    }

    /// Two-dimensional tensor from its three independent entries.
    pub fn new2(xx: f64, xy: f64, yy: f64) -> Self {
        SymTensor { dim: 2, c: [xx, xy, yy, 0.0, 0.0, 0.0] }
    }

    pub fn new3(xx: f64, xy: f64, xz: f64, yy: f64, yz: f64, zz: f64) -> Self {
        SymTensor { dim: 3, c: [xx, xy, xz, yy, yz, zz] }
    }

    pub fn diag2(a: f64, b: f64) -> Self {
        SymTensor::new2(a, 0.0, b)
    }

    /// Symmetric part of a full matrix given as rows.
    pub fn from_full2(m: [[f64; 2]; 2]) -> Self {
        SymTensor::new2(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }

    pub fn from_full3(m: [[f64; 3]; 3]) -> Self {
        SymTensor::new3(
            m[0][0],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            m[1][1],
            0.5 * (m[1][2] + m[2][1]),
            m[2][2],
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Upper-triangle components (length 3 in 2D, 6 in 3D).
    #[inline]
    pub fn components(&self) -> &[f64] {
        &self.c[..slot_count(self.dim)]
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match (self.dim, i, j) {
            (2, 0, 0) => 0,
            (2, 0, 1) => 1,
            (2, 1, 1) => 2,
            (3, 0, 0) => 0,
            (3, 0, 1) => 1,
            (3, 0, 2) => 2,
            (3, 1, 1) => 3,
            (3, 1, 2) => 4,
            (3, 2, 2) => 5,
            _ => panic!("index ({i}, {j}) out of range for d = {}", self.dim),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.c[s] = v;
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        diag_slots(self.dim).iter().map(|&s| self.c[s]).sum()
    }

    /// `S - (tr S / d) I`.
    #[inline]
    pub fn deviatoric(&self) -> Self {
        let mut out = *self;
        let m = self.trace() / self.dim as f64;
        for &s in diag_slots(self.dim) {
            out.c[s] -= m;
        }
        out
    }

    /// Double contraction `S : R`. Panics on dimension mismatch; see
    /// [`SymTensor::try_contract`] for the checked form.
    #[inline]
    pub fn contract(&self, other: &SymTensor) -> f64 {
        assert_eq!(self.dim, other.dim, "tensor dimension mismatch");
        let mut acc = 0.0;
        for s in 0..slot_count(self.dim) {
            let w = if is_diag(self.dim, s) { 1.0 } else { 2.0 };
            acc += w * self.c[s] * other.c[s];
        }
        acc
    }

    pub fn try_contract(&self, other: &SymTensor) -> Result<f64, DimensionMismatch> {
        if self.dim != other.dim {
            return Err(DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.contract(other))
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.contract(self)
    }

    /// Frobenius norm `|S|`.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Mandel coordinates of a 2D tensor: `[xx, yy, sqrt(2) xy]`.
    ///
    /// The map is an isometry, so contraction becomes the Euclidean dot product.
    #[inline]
    pub fn to_mandel2(&self) -> [f64; 3] {
        debug_assert_eq!(self.dim, 2);
        [self.c[0], self.c[2], std::f64::consts::SQRT_2 * self.c[1]]
    }

    #[inline]
    pub fn from_mandel2(m: [f64; 3]) -> Self {
        SymTensor::new2(m[0], m[2] * std::f64::consts::FRAC_1_SQRT_2, m[1])
    }

    pub fn to_full(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

impl Default for SymTensor {
    fn default() -> Self {
        SymTensor::zero(2)
    }
}

impl fmt::Debug for SymTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymTensor{}{:?}", self.dim, self.components())
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    #[inline]
    fn add(mut self, rhs: SymTensor) -> SymTensor {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor {
    #[inline]
    fn add_assign(&mut self, rhs: SymTensor) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    #[inline]
    fn sub(mut self, rhs: SymTensor) -> SymTensor {
        self -= rhs;
        self
    }
}

impl SubAssign for SymTensor {
    #[inline]
    fn sub_assign(&mut self, rhs: SymTensor) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    #[inline]
    fn mul(self, mut rhs: SymTensor) -> SymTensor {
        for a in rhs.c.iter_mut() {
            *a *= self;
        }
        rhs
    }
}

impl Mul<f64> for SymTensor {
    type Output = SymTensor;
    #[inline]
    fn mul(self, rhs: f64) -> SymTensor {
        rhs * self
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    #[inline]
    fn neg(self) -> SymTensor {
        -1.0 * self
    }
}

/// `x |x|^(a-1)`, extended by 0 at `x = 0`.
#[inline]
pub fn signed_power(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_contract(a: &SymTensor, b: &SymTensor) -> f64 {
        let (fa, fb) = (a.to_full(), b.to_full());
        let mut acc = 0.0;
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                acc += fa[i][j] * fb[i][j];
            }
        }
        acc
    }

    #[test]
    fn trace_examples() {
        assert_eq!(SymTensor::identity(2).trace(), 2.0);
        assert_eq!(SymTensor::identity(3).trace(), 3.0);
        assert_eq!(SymTensor::zero(2).trace(), 0.0);
        // stress of the manufactured solution at the origin
        let t = SymTensor::diag2(0f64.exp(), 0f64.cos());
        assert_eq!(t.trace(), 2.0);
    }

    #[test]
    fn deviatoric_examples() {
        assert_eq!(SymTensor::identity(2).deviatoric(), SymTensor::zero(2));
        assert_eq!(SymTensor::identity(3).deviatoric(), SymTensor::zero(3));
        let s = SymTensor::new2(1.0, 0.3, -1.0);
        assert_eq!(s.deviatoric(), s);
        let d = SymTensor::diag2(2.0, 0.0).deviatoric();
        assert_eq!(d, SymTensor::diag2(1.0, -1.0));
        // full-matrix check
        let full = d.to_full();
        assert_eq!(full, vec![vec![1.0, 0.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn contract_and_norm_examples() {
        let i2 = SymTensor::identity(2);
        assert_eq!(i2.contract(&i2), 2.0);
        assert!((i2.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(SymTensor::zero(3).norm(), 0.0);
        let s = SymTensor::new3(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        assert_eq!(s.contract(&SymTensor::identity(3)), s.trace());
        assert!((s.norm_sq() - dense_contract(&s, &s)).abs() < 1e-12);
    }

    #[test]
    fn contract_dimension_mismatch() {
        let err = SymTensor::identity(2).try_contract(&SymTensor::identity(3)).unwrap_err();
        assert_eq!(err, DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn mandel_is_isometric() {
        let a = SymTensor::new2(1.5, -0.25, 3.0);
        let b = SymTensor::new2(-2.0, 0.75, 0.5);
        let (ma, mb) = (a.to_mandel2(), b.to_mandel2());
        let dot: f64 = ma.iter().zip(mb.iter()).map(|(x, y)| x * y).sum();
        assert!((dot - a.contract(&b)).abs() < 1e-14);
        assert!((SymTensor::from_mandel2(ma) - a).norm() < 1e-15);
    }

    #[test]
    fn signed_power_extension() {
        assert_eq!(signed_power(0.0, 0.5), 0.0);
        assert_eq!(signed_power(-4.0, 0.5), -2.0);
        assert_eq!(signed_power(9.0, 0.5), 3.0);
    }
}
