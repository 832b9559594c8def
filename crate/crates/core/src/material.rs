//! Constitutive maps: the strain-limiting law, its regularizations and the
//! element-local resolvent solve used in the first half-step of the
//! decoupled iteration.

use thiserror::Error;

use crate::tensor::{signed_power, SymTensor};

/// Absolute tolerance of the scalar root finder.
pub const ROOT_TOL: f64 = 1e-13;
/// Relative residual tolerance of the tensor-valued local solve.
pub const LOCAL_RESIDUAL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("bracket [{lo}, {hi}] does not straddle target {target} (g(lo) = {g_lo}, g(hi) = {g_hi})")]
    NotBracketed { lo: f64, hi: f64, target: f64, g_lo: f64, g_hi: f64 },
    #[error("non-finite evaluation at {at}")]
    NonFinite { at: f64 },
    #[error("root finder did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("local solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("invalid regularization parameters n = {n}, t = {t} (need n >= 1, t >= 1)")]
    InvalidRegularization { n: f64, t: f64 },
}

/// The positive constants `C1, C2, kappa, alpha` bounding `lambda` and `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants {
    pub c1: f64,
    pub c2: f64,
    pub kappa: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawKind {
    /// `lambda(s) = mu(s) = (1 + s^2)^(-1/2)`.
    StrainLimiting,
    /// Constant coefficients: a linear (Hooke-type compliance) law.
    Constant { lambda: f64, mu: f64 },
}

/// Scalar response functions `lambda`, `mu` of the constitutive relation
/// `eps(u) = lambda(tr T) tr T I + mu(|T^d|) T^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialLaw {
    pub kind: LawKind,
    /// `None` for laws outside the strain-limiting class (e.g. linear ones).
    pub constants: Option<StructureConstants>,
}

/// `lambda(s) = mu(s) = (1+s^2)^(-1/2)` with `C1 = C2 = kappa = 1`.
///
/// `alpha = 2`: `(mu(s) s)' = (1+s^2)^(-3/2) >= (1+s)^(-3)` because
/// `1 + s^2 <= (1+s)^2`, and no smaller exponent works as `s -> infinity`.
pub fn builtin_law() -> MaterialLaw {
    MaterialLaw {
        kind: LawKind::StrainLimiting,
        constants: Some(StructureConstants { c1: 1.0, c2: 1.0, kappa: 1.0, alpha: 2.0 }),
    }
}

impl MaterialLaw {
    pub fn linear(lambda: f64, mu: f64) -> Self {
        MaterialLaw { kind: LawKind::Constant { lambda, mu }, constants: None }
    }

    /// The law for which `A(T) = T` in `dim` dimensions.
    pub fn identity(dim: usize) -> Self {
        MaterialLaw::linear(1.0 / dim as f64, 1.0)
    }

    #[inline]
    pub fn lambda(&self, s: f64) -> f64 {
        match self.kind {
            LawKind::StrainLimiting => 1.0 / (1.0 + s * s).sqrt(),
            LawKind::Constant { lambda, .. } => lambda,
        }
    }

    #[inline]
    pub fn mu(&self, s: f64) -> f64 {
        match self.kind {
            LawKind::StrainLimiting => 1.0 / (1.0 + s * s).sqrt(),
            LawKind::Constant { mu, .. } => mu,
        }
    }

    /// `lambda(s) s` and its derivative.
    #[inline]
    pub fn lambda_s(&self, s: f64) -> (f64, f64) {
        match self.kind {
            LawKind::StrainLimiting => {
                let q = 1.0 + s * s;
                (s / q.sqrt(), 1.0 / (q * q.sqrt()))
            }
            LawKind::Constant { lambda, .. } => (lambda * s, lambda),
        }
    }

    /// `mu(r) r` and its derivative.
    #[inline]
    pub fn mu_s(&self, r: f64) -> (f64, f64) {
        match self.kind {
            LawKind::StrainLimiting => {
                let q = 1.0 + r * r;
                (r / q.sqrt(), 1.0 / (q * q.sqrt()))
            }
            LawKind::Constant { mu, .. } => (mu * r, mu),
        }
    }
}

/// Unregularized constitutive image `lambda(tr S) tr S I + mu(|S^d|) S^d`.
#[inline]
pub fn apply_a(s: &SymTensor, law: &MaterialLaw) -> SymTensor {
    let tr = s.trace();
    let dev = s.deviatoric();
    let r = dev.norm();
    law.lambda_s(tr).0 * SymTensor::identity(s.dim()) + law.mu(r) * dev
}

/// Form of the regularizer at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearForm {
    /// `(1/n) S`.
    #[default]
    Scaled,
    /// `(1/n)(tr S I + S^d)`, the power form evaluated at `t = 1`.
    Split,
}

/// Regularization strength `n`, power exponent `t` and the `t = 1` form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    pub n: f64,
    pub t: f64,
    pub linear_form: LinearForm,
}

impl RegularizationParams {
    pub fn new(n: f64, t: f64) -> Result<Self, MaterialError> {
        if !(n >= 1.0 && t >= 1.0 && n.is_finite() && t.is_finite()) {
            return Err(MaterialError::InvalidRegularization { n, t });
        }
        Ok(RegularizationParams { n, t, linear_form: LinearForm::Scaled })
    }

    pub fn with_linear_form(self, linear_form: LinearForm) -> Self {
        RegularizationParams { linear_form, ..self }
    }

    /// The regularizer used by the solver: linear when `t = 1` (in the
    /// configured form), otherwise the trace/deviatoric power form.
    pub fn regularizer(&self) -> Regularizer {
        if self.t == 1.0 {
            Regularizer::Linear { n: self.n, split: self.linear_form == LinearForm::Split }
        } else {
            Regularizer::Power { n: self.n, t: self.t }
        }
    }
}

/// Coercive term added to the constitutive map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// `(1/n) S`, or `(1/n)(tr S I + S^d)` when `split`.
    Linear { n: f64, split: bool },
    /// `(1/n) [tr S |tr S|^(1/t-1) I + S^d |S^d|^(1/t-1)]`.
    Power { n: f64, t: f64 },
}

impl Regularizer {
    pub fn n(&self) -> f64 {
        match *self {
            Regularizer::Linear { n, .. } | Regularizer::Power { n, .. } => n,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Regularizer::Linear { .. })
    }

    /// For a linear regularizer, the factors `(a, b)` with
    /// `reg(S) = a (tr S / d) I + b S^d` in dimension `d`.
    pub fn linear_factors(&self, dim: usize) -> Option<(f64, f64)> {
        match *self {
            Regularizer::Linear { n, split } => Some((if split { dim as f64 } else { 1.0 } / n, 1.0 / n)),
            Regularizer::Power { .. } => None,
        }
    }

    #[inline]
    pub fn apply(&self, s: &SymTensor) -> SymTensor {
        match *self {
            Regularizer::Linear { n, split: false } => (1.0 / n) * *s,
            Regularizer::Linear { n, split: true } => power_regularizer(s, n, 1.0),
            Regularizer::Power { n, t } => power_regularizer(s, n, t),
        }
    }
}

#[inline]
fn power_regularizer(s: &SymTensor, n: f64, t: f64) -> SymTensor {
    let tr = s.trace();
    let dev = s.deviatoric();
    let r = dev.norm();
    let e = 1.0 / t;
    let dev_scale = if r == 0.0 { 0.0 } else { r.powf(e - 1.0) };
    (1.0 / n) * (signed_power(tr, e) * SymTensor::identity(s.dim()) + dev_scale * dev)
}

/// Power-form regularizer for any `t >= 1`; at `t = 1` this is
/// `(1/n)(tr S I + S^d)`, which is not `(1/n) S`.
pub fn apply_reg(s: &SymTensor, reg: &RegularizationParams) -> SymTensor {
    power_regularizer(s, reg.n, reg.t)
}

/// Regularized map `A(S) + regularizer(S)` with the regularizer chosen by
/// [`RegularizationParams::regularizer`].
pub fn apply_a_n(s: &SymTensor, law: &MaterialLaw, reg: &RegularizationParams) -> SymTensor {
    apply_a(s, law) + reg.regularizer().apply(s)
}

/// Root of a strictly increasing scalar map `g(x) = target` inside `bracket`.
///
/// `g` returns the value and derivative. Newton steps that leave the current
/// bracket or have non-positive slope are replaced by bisection.
pub fn solve_radial<G>(g: G, target: f64, bracket: (f64, f64)) -> Result<f64, MaterialError>
where
    G: Fn(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = bracket;
    let eval = |x: f64| -> Result<(f64, f64), MaterialError> {
        let (v, d) = g(x);
        if v.is_finite() && d.is_finite() {
            Ok((v - target, d))
        } else {
            Err(MaterialError::NonFinite { at: x })
        }
    };
    let (f_lo, _) = eval(lo)?;
    let (f_hi, _) = eval(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(MaterialError::NotBracketed {
            lo,
            hi,
            target,
            g_lo: f_lo + target,
            g_hi: f_hi + target,
        });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = eval(x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = if df > 0.0 { x - f / df } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= ROOT_TOL || hi - lo <= ROOT_TOL || next == lo || next == hi {
            return Ok(x);
        }
    }
    Err(MaterialError::NoConvergence { iterations: 200 })
}

/// Solves `(1/tau) T + A(T) = r_hat` for `T`.
///
/// The map is isotropic, so the trace solves a scalar equation and the
/// deviator keeps the direction of `r_hat^d` with a radial magnitude.
pub fn solve_local_step1(
    r_hat: &SymTensor,
    tau: f64,
    law: &MaterialLaw,
) -> Result<SymTensor, MaterialError> {
    let dim = r_hat.dim();
    let d = dim as f64;
    let inv_tau = 1.0 / tau;

    let b = r_hat.trace();
    let tr = if b == 0.0 {
        0.0
    } else {
        let g = |s: f64| {
            let (v, dv) = law.lambda_s(s);
            (inv_tau * s + d * v, inv_tau + d * dv)
        };
        let bound = tau * b;
        solve_radial(g, b, if b > 0.0 { (0.0, bound) } else { (bound, 0.0) })?
    };

    let rd = r_hat.deviatoric();
    let rd_norm = rd.norm();
    let dev = if rd_norm == 0.0 {
        SymTensor::zero(dim)
    } else {
        let g = |rho: f64| {
            let (v, dv) = law.mu_s(rho);
            (inv_tau * rho + v, inv_tau + dv)
        };
        let rho = solve_radial(g, rd_norm, (0.0, tau * rd_norm))?;
        (rho / rd_norm) * rd
    };

    let t = (tr / d) * SymTensor::identity(dim) + dev;
    let residual = (inv_tau * t + apply_a(&t, law) - *r_hat).norm();
    let tolerance = LOCAL_RESIDUAL_TOL * (1.0 + r_hat.norm());
    if residual > tolerance {
        return Err(MaterialError::Residual { residual, tolerance });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(g: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn builtin_law_values() {
        let law = builtin_law();
        assert_eq!(law.lambda(0.0), 1.0);
        assert!((law.lambda(2.0) * 2.0 - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((law.lambda(2.0) * 2.0 - 0.894427).abs() < 1e-6);
        // (A1) lower bound at s = 3 with C1 = kappa = 1
        let s: f64 = 3.0;
        assert!(s * s / (1.0 + s) <= law.lambda(s) * s * s);
        assert!((9.0f64 / 4.0) <= 9.0 / 10f64.sqrt());
    }

    #[test]
    fn structure_bounds_on_log_grid() {
        let law = builtin_law();
        let k = law.constants.unwrap();
        for i in 0..=240 {
            let s = 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0);
            for s in [s, -s] {
                let ls = law.lambda(s) * s * s;
                assert!(k.c1 * s * s / (k.kappa + s.abs()) <= ls * (1.0 + 1e-14));
                assert!(ls <= k.c2 * s.abs() * (1.0 + 1e-14));
                assert!(law.lambda(s) * s.abs() <= k.c2);
                // (A3)
                assert!(law.lambda_s(s).1 >= 0.0);
            }
            let ms = law.mu(s) * s * s;
            assert!(k.c1 * s * s / (k.kappa + s) <= ms * (1.0 + 1e-14));
            assert!(ms <= k.c2 * s * (1.0 + 1e-14));
            assert!(law.mu(s) * s <= k.c2);
            // (A4)
            let lower = k.c1 / (k.kappa + s).powf(k.alpha + 1.0);
            assert!(law.mu_s(s).1 >= lower * (1.0 - 1e-12), "A4 fails at s = {s}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let law = builtin_law();
        for &s in &[-3.0, -0.5, 0.0, 0.7, 4.0] {
            let h = 1e-6;
            let fd = (law.lambda_s(s + h).0 - law.lambda_s(s - h).0) / (2.0 * h);
            assert!((fd - law.lambda_s(s).1).abs() < 1e-8);
            let fd = (law.mu_s(s.abs() + h).0 - law.mu_s(s.abs() - h).0) / (2.0 * h);
            assert!((fd - law.mu_s(s.abs()).1).abs() < 1e-8);
        }
    }

    #[test]
    fn apply_a_examples() {
        let law = builtin_law();
        assert_eq!(apply_a(&SymTensor::zero(2), &law), SymTensor::zero(2));
        let s = SymTensor::diag2(2.0, 0.0);
        let got = apply_a(&s, &law);
        let mu = 1.0 / (1.0 + 2.0f64).sqrt(); // |S^d| = sqrt(2)
        let expect = (2.0 / 5f64.sqrt()) * SymTensor::identity(2) + mu * SymTensor::diag2(1.0, -1.0);
        assert!((got - expect).norm() < 1e-15);
        // dense oracle on the full matrix
        let full = got.to_full();
        assert!((full[0][0] - (2.0 / 5f64.sqrt() + mu)).abs() < 1e-15);
        assert!((full[1][1] - (2.0 / 5f64.sqrt() - mu)).abs() < 1e-15);
    }

    #[test]
    fn identity_law_is_identity() {
        let s = SymTensor::new2(1.3, -0.4, 2.2);
        assert!((apply_a(&s, &MaterialLaw::identity(2)) - s).norm() < 1e-15);
        let s3 = SymTensor::new3(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        assert!((apply_a(&s3, &MaterialLaw::identity(3)) - s3).norm() < 1e-14);
    }

    #[test]
    fn apply_reg_examples() {
        let p = RegularizationParams::new(3.0, 2.5).unwrap();
        assert_eq!(apply_reg(&SymTensor::zero(2), &p), SymTensor::zero(2));
        let dev_only = SymTensor::new2(0.5, 1.0, -0.5);
        let p11 = RegularizationParams::new(1.0, 1.0).unwrap();
        assert!((apply_reg(&dev_only, &p11) - dev_only).norm() < 1e-15);
        // t = 2: trace part sign(4)|4|^(1/2) = 2, deviator |S^d|^(1/2) times direction
        let p2 = RegularizationParams::new(1.0, 2.0).unwrap();
        let s = SymTensor::diag2(4.0, 0.0);
        let dev = s.deviatoric();
        let r = dev.norm(); // 2 sqrt(2)
        assert!((r - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let expect = 2.0 * SymTensor::identity(2) + (r.sqrt() / r) * dev;
        assert!((apply_reg(&s, &p2) - expect).norm() < 1e-15);
        assert!((apply_reg(&s, &p2).trace() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn linear_regularizer_differs_from_power_at_t1() {
        let p = RegularizationParams::new(2.0, 1.0).unwrap();
        let s = SymTensor::new2(1.0, 0.5, 3.0);
        let law = builtin_law();
        assert!((apply_a_n(&s, &law, &p) - (apply_a(&s, &law) + 0.5 * s)).norm() < 1e-15);
        // power form at t = 1 scales the trace part by d
        let pow = apply_reg(&s, &p);
        let expect = 0.5 * (s.trace() * SymTensor::identity(2) + s.deviatoric());
        assert!((pow - expect).norm() < 1e-15);
        assert!((pow - 0.5 * s).norm() > 0.1);
        let split = p.with_linear_form(LinearForm::Split).regularizer();
        assert!(split.is_linear());
        assert!((split.apply(&s) - pow).norm() < 1e-15);
        let (a, b) = split.linear_factors(2).unwrap();
        let rebuilt = (a * s.trace() / 2.0) * SymTensor::identity(2) + b * s.deviatoric();
        assert!((rebuilt - pow).norm() < 1e-15);
        let (a, b) = p.regularizer().linear_factors(2).unwrap();
        assert_eq!((a, b), (0.5, 0.5));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(RegularizationParams::new(0.5, 1.0).is_err());
        assert!(RegularizationParams::new(1.0, 0.9).is_err());
        assert!(RegularizationParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn solve_radial_examples() {
        let x = solve_radial(|s| (s, 1.0), 3.0, (0.0, 10.0)).unwrap();
        assert!((x - 3.0).abs() < 1e-13);

        let g = |s: f64| s + 2.0 * s / (1.0 + s * s).sqrt();
        let dg = |s: f64| 1.0 + 2.0 / (1.0 + s * s).powf(1.5);
        let x = solve_radial(|s| (g(s), dg(s)), 3.0, (0.0, 3.0)).unwrap();
        let oracle = bisect(g, 3.0, 0.0, 3.0);
        assert!((x - oracle).abs() < 1e-11);
        assert!(x > 0.0 && x < 3.0);

        let law = builtin_law();
        let g = |r: f64| r + law.mu(r) * r;
        let x = solve_radial(|r| { let (v, d) = law.mu_s(r); (r + v, 1.0 + d) }, 5.0, (0.0, 5.0)).unwrap();
        let oracle = bisect(g, 5.0, 0.0, 5.0);
        assert!((x - oracle).abs() < 1e-11);
    }

    #[test]
    fn solve_radial_errors() {
        let err = solve_radial(|s| (s, 1.0), 30.0, (0.0, 10.0)).unwrap_err();
        assert!(matches!(err, MaterialError::NotBracketed { .. }));
        let err = solve_radial(|s| (s.ln(), 1.0 / s), -1.0, (-1.0, 10.0)).unwrap_err();
        assert!(matches!(err, MaterialError::NonFinite { .. }));
    }

    #[test]
    fn local_step1_examples() {
        let law = builtin_law();
        let t = solve_local_step1(&SymTensor::zero(2), 1.0, &law).unwrap();
        assert_eq!(t, SymTensor::zero(2));

        let r_hat = 1.5 * SymTensor::identity(2); // (3/d) I with d = 2
        let t = solve_local_step1(&r_hat, 1.0, &law).unwrap();
        let s = bisect(|s| s + 2.0 * s / (1.0 + s * s).sqrt(), 3.0, 0.0, 3.0);
        assert!((t - (s / 2.0) * SymTensor::identity(2)).norm() < 1e-11);
    }

    #[test]
    fn local_step1_negative_trace_and_linear_law() {
        let law = MaterialLaw::linear(0.25, 2.0);
        let r = SymTensor::new2(-3.0, 0.7, -1.0);
        let tau = 0.5;
        let t = solve_local_step1(&r, tau, &law).unwrap();
        let res = (1.0 / tau) * t + apply_a(&t, &law) - r;
        assert!(res.norm() < 1e-12);
    }
}
