//! Construction of vector fields that conserve a prescribed integral set.
//!
//! Given N functions f1..fN on R^{2N} and a Hamiltonian H, the field keeps
//! the canonical x-equations and corrects the y-equations:
//!
//! ```text
//! dx_k/dt = dH/dy_k
//! dy_k/dt = -dH/dx_k + c_k
//! ```
//!
//! The correction c solves A c = r, where A is the y-block of the integral
//! Jacobian and r_j = {H, f_j} is the canonical Poisson bracket; this is
//! exactly the condition that every f_j has zero derivative along the flow.
//!
//! A point is classified by the rank of A:
//! * full rank with a robustly nonzero determinant: the regular case, solved
//!   by LU or by the cofactor brackets (Cramer's rule), per backend;
//! * rank N-1: the degenerate case, solved in the minimum-norm least-squares
//!   sense, plus an optional multiple of the kernel direction w (the bracket
//!   family {f1..fN, x1..x_{N-1}, y_k}*), which spans the null space of A
//!   there and so leaves conservation intact;
//! * anything else: singular, no field is produced.
//!
//! Rank decides the split rather than the determinant alone: near strata
//! where A degenerates, the determinant and its natural scale vanish
//! together, so a scaled determinant test cannot see the approach while the
//! pivot ranks separate cleanly.

use alloc::vec;
use alloc::vec::Vec;

use crate::brackets::{self, BracketError, IntegralSet};
use crate::expr::{Bindings, EvalError, Expression};
use crate::linalg;

/// Scaled determinant below this multiple of its Hadamard bound is treated
/// as zero when deciding the regular case.
pub const DET_ZERO_REL_TOL: f64 = 1e-9;

/// Least-squares drift must be consistent to this normalized residual in
/// the degenerate case; a larger residual means no conserving field exists
/// along the requested Hamiltonian.
pub const DRIFT_CONSISTENCY_TOL: f64 = 1e-8;

/// The kernel direction must annihilate the y-block to this relative
/// accuracy before it is used.
pub const KERNEL_RESIDUAL_TOL: f64 = 1e-10;

/// A kernel vector smaller than this multiple of its Hadamard-type scale is
/// considered degenerate and refused.
pub const KERNEL_DEGENERATE_TOL: f64 = 1e-13;

/// Numerical thresholds for classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Relative determinant floor for the regular case.
    pub det_zero: f64,
    /// Relative pivot floor for rank decisions.
    pub rank_pivot: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds {
            det_zero: DET_ZERO_REL_TOL,
            rank_pivot: brackets::RANK_PIVOT_REL_TOL,
        }
    }
}

/// How the regular-case linear system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Cofactor brackets (Cramer's rule).
    Cramer,
    /// LU factorization.
    Solve,
    /// Both, reporting their worst componentwise disagreement; the LU
    /// result is the one returned.
    Both,
}

impl Backend {
    pub fn label(self) -> &'static str {
        match self {
            Backend::Cramer => "cramer",
            Backend::Solve => "solve",
            Backend::Both => "both",
        }
    }
}

/// Pointwise classification of the correction problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// y-block of full rank with robustly nonzero determinant.
    CaseI,
    /// y-block of rank exactly N-1.
    CaseII,
    /// Everything else; no field is constructed.
    Singular,
}

impl Case {
    pub fn label(self) -> &'static str {
        match self {
            Case::CaseI => "case-i",
            Case::CaseII => "case-ii",
            Case::Singular => "singular",
        }
    }
}

/// Diagnostics from classifying one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub case: Case,
    /// {f1..fN, x1..xN}* = (-1)^N det A.
    pub s_zero: f64,
    /// Hadamard bound on |s_zero|: the product of the row norms of A.
    pub s_zero_scale: f64,
    /// {f1..fN, x1..x_{N-1}, y1}*.
    pub s_n: f64,
    /// Numerical rank of A.
    pub y_block_rank: usize,
}

/// One evaluation of the constructed field.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
    pub case: Case,
    pub s_zero: f64,
    pub s_zero_scale: f64,
    pub s_n: f64,
    /// Normalized residual of A c = r with the final correction c.
    pub correction_residual: f64,
    /// Worst componentwise relative disagreement between the two regular
    /// backends; present only when both ran.
    pub backend_discrepancy: Option<f64>,
    /// Backend that produced the returned velocity.
    pub backend_used: Backend,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldError {
    Eval(EvalError),
    Bracket(BracketError),
    /// Classification refused the point.
    SingularLocus { s_zero: f64, s_zero_scale: f64, y_block_rank: usize },
    /// Degenerate case with drift outside the column space of the y-block.
    InconsistentDrift { residual: f64 },
    /// Kernel direction requested where it vanishes.
    DegenerateKernel,
    /// Kernel direction failed to annihilate the y-block.
    KernelResidual { residual: f64 },
    /// LU hit an exactly zero pivot despite classification.
    SolveFailed,
}

impl core::fmt::Display for FieldError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FieldError::Eval(e) => write!(f, "evaluation failed: {e}"),
            FieldError::Bracket(e) => write!(f, "bracket failed: {e}"),
            FieldError::SingularLocus { s_zero, s_zero_scale, y_block_rank } => write!(
                f,
                "singular point: s_zero {s_zero:e} (scale {s_zero_scale:e}), y-block rank {y_block_rank}"
            ),
            FieldError::InconsistentDrift { residual } => write!(
                f,
                "no conserving correction exists: least-squares residual {residual:e}"
            ),
            FieldError::DegenerateKernel => {
                write!(f, "kernel direction vanishes at this point")
            }
            FieldError::KernelResidual { residual } => write!(
                f,
                "kernel direction fails to annihilate the y-block: residual {residual:e}"
            ),
            FieldError::SolveFailed => write!(f, "linear solve hit a zero pivot"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FieldError {}

impl From<EvalError> for FieldError {
    fn from(e: EvalError) -> FieldError {
        FieldError::Eval(e)
    }
}

impl From<BracketError> for FieldError {
    fn from(e: BracketError) -> FieldError {
        FieldError::Bracket(e)
    }
}

/// An integral set, a Hamiltonian, a multiplier for the degenerate case,
/// and the numerical policy, compiled for repeated evaluation.
///
/// Parameters are substituted once at construction so the per-point work is
/// free of name lookups.
#[derive(Debug, Clone)]
pub struct FieldModel {
    set: IntegralSet,
    bound_fs: Vec<Expression>,
    bound_h: Expression,
    bound_lambda: Expression,
    backend: Backend,
    thresholds: Thresholds,
    empty: Bindings,
}

impl FieldModel {
    /// `lambda` scales the kernel direction in the degenerate case; pass a
    /// zero constant when no multiple is wanted. It is ignored in the
    /// regular case, where the correction is unique.
    pub fn new(
        set: IntegralSet,
        hamiltonian: Expression,
        lambda: Expression,
        backend: Backend,
        thresholds: Thresholds,
    ) -> Result<FieldModel, FieldError> {
        let bindings = set.bindings();
        let mut bound_fs = Vec::with_capacity(set.integrals().len());
        for f in set.integrals() {
            bound_fs.push(f.bind_params(bindings)?);
        }
        let bound_h = hamiltonian.bind_params(bindings)?;
        let bound_lambda = lambda.bind_params(bindings)?;
        Ok(FieldModel {
            set,
            bound_fs,
            bound_h,
            bound_lambda,
            backend,
            thresholds,
            empty: Bindings::new(),
        })
    }

    pub fn set(&self) -> &IntegralSet {
        &self.set
    }

    pub fn hamiltonian(&self) -> &Expression {
        &self.bound_h
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    fn n(&self) -> usize {
        self.set.space().n()
    }

    fn check_point(&self, p: &[f64]) -> Result<(), FieldError> {
        let dim = self.set.space().dim();
        if p.len() != dim {
            return Err(FieldError::Bracket(BracketError::PointDimension {
                expected: dim,
                got: p.len(),
            }));
        }
        Ok(())
    }

    /// Gradient rows of the integrals, parameters already substituted.
    fn jac(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, FieldError> {
        let mut rows = Vec::with_capacity(self.bound_fs.len());
        for f in &self.bound_fs {
            rows.push(f.gradient(p, &self.empty)?);
        }
        Ok(rows)
    }

    fn classify_jac(&self, jac: &[Vec<f64>], det_zero: f64) -> Classification {
        let n = self.n();
        let mut a_flat = Vec::with_capacity(n * n);
        let mut scale = 1.0_f64;
        for row in jac {
            let mut row_sq = 0.0;
            for c in 0..n {
                let v = row[n + c];
                a_flat.push(v);
                row_sq += v * v;
            }
            scale *= crate::math::sqrt(row_sq);
        }
        let rank = linalg::rank(a_flat, n, n, self.thresholds.rank_pivot);
        let s_zero = brackets::s_zero_from(jac, n);
        let s_n = brackets::s_n_from(jac, n);
        let case = if rank == n && s_zero.abs() > det_zero * scale {
            Case::CaseI
        } else if rank + 1 == n {
            Case::CaseII
        } else {
            Case::Singular
        };
        Classification { case, s_zero, s_zero_scale: scale, s_n, y_block_rank: rank }
    }

    /// Classify `p` with the model's determinant floor.
    pub fn classify(&self, p: &[f64]) -> Result<Classification, FieldError> {
        self.classify_with_threshold(p, self.thresholds.det_zero)
    }

    /// Classify `p` with an explicit determinant floor (used by integrators
    /// that stop earlier than the model itself would refuse).
    pub fn classify_with_threshold(
        &self,
        p: &[f64],
        det_zero: f64,
    ) -> Result<Classification, FieldError> {
        self.check_point(p)?;
        let jac = self.jac(p)?;
        Ok(self.classify_jac(&jac, det_zero))
    }

    /// Evaluate the field and its diagnostics at `p`.
    pub fn sample(&self, p: &[f64]) -> Result<FieldSample, FieldError> {
        self.check_point(p)?;
        let n = self.n();
        let jac = self.jac(p)?;
        let cls = self.classify_jac(&jac, self.thresholds.det_zero);
        if cls.case == Case::Singular {
            return Err(FieldError::SingularLocus {
                s_zero: cls.s_zero,
                s_zero_scale: cls.s_zero_scale,
                y_block_rank: cls.y_block_rank,
            });
        }

        let gh = self.bound_h.gradient(p, &self.empty)?;
        // r_j = {H, f_j}; the correction must satisfy A c = r
        let rhs: Vec<f64> = jac.iter().map(|row| brackets::poisson_from(&gh, row, n)).collect();
        let mut a_flat = Vec::with_capacity(n * n);
        for row in &jac {
            a_flat.extend_from_slice(&row[n..2 * n]);
        }

        let (correction, discrepancy, backend_used) = match cls.case {
            Case::CaseI => self.regular_correction(&jac, &a_flat, &rhs, cls.s_zero)?,
            Case::CaseII => {
                let c = self.degenerate_correction(&jac, &a_flat, &rhs, p)?;
                (c, None, Backend::Solve)
            }
            Case::Singular => unreachable!(),
        };

        let correction_residual = normalized_residual(&a_flat, &correction, &rhs, n);

        let mut velocity = vec![0.0; 2 * n];
        for k in 0..n {
            velocity[k] = gh[n + k];
            velocity[n + k] = -gh[k] + correction[k];
        }
        if velocity.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::Eval(EvalError::NonFinite));
        }

        Ok(FieldSample {
            point: p.to_vec(),
            velocity,
            case: cls.case,
            s_zero: cls.s_zero,
            s_zero_scale: cls.s_zero_scale,
            s_n: cls.s_n,
            correction_residual,
            backend_discrepancy: discrepancy,
            backend_used,
        })
    }

    /// Just the velocity; `sample` with the diagnostics dropped.
    pub fn velocity(&self, p: &[f64]) -> Result<Vec<f64>, FieldError> {
        Ok(self.sample(p)?.velocity)
    }

    fn regular_correction(
        &self,
        jac: &[Vec<f64>],
        a_flat: &[f64],
        rhs: &[f64],
        s_zero: f64,
    ) -> Result<(Vec<f64>, Option<f64>, Backend), FieldError> {
        let n = self.n();
        let cramer = |jac: &[Vec<f64>]| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let num: f64 =
                        (0..n).map(|j| rhs[j] * brackets::cofactor_from(jac, n, j, k)).sum();
                    num / s_zero
                })
                .collect()
        };
        let solve = |a_flat: &[f64]| -> Result<Vec<f64>, FieldError> {
            linalg::solve_lu(a_flat.to_vec(), rhs.to_vec(), n).ok_or(FieldError::SolveFailed)
        };
        match self.backend {
            Backend::Cramer => Ok((cramer(jac), None, Backend::Cramer)),
            Backend::Solve => Ok((solve(a_flat)?, None, Backend::Solve)),
            Backend::Both => {
                let by_cramer = cramer(jac);
                let by_solve = solve(a_flat)?;
                let mut worst = 0.0_f64;
                for k in 0..n {
                    let denom = by_solve[k].abs().max(1.0);
                    worst = worst.max((by_cramer[k] - by_solve[k]).abs() / denom);
                }
                Ok((by_solve, Some(worst), Backend::Solve))
            }
        }
    }

    fn degenerate_correction(
        &self,
        jac: &[Vec<f64>],
        a_flat: &[f64],
        rhs: &[f64],
        p: &[f64],
    ) -> Result<Vec<f64>, FieldError> {
        let n = self.n();
        let (mut c, _kept) = linalg::lstsq_min_norm(a_flat, rhs, n, self.thresholds.rank_pivot);
        let residual = normalized_residual(a_flat, &c, rhs, n);
        if residual > DRIFT_CONSISTENCY_TOL {
            return Err(FieldError::InconsistentDrift { residual });
        }
        let lam = self.bound_lambda.evaluate(p, &self.empty)?;
        if lam != 0.0 {
            let w: Vec<f64> = (0..n).map(|k| brackets::kernel_from(jac, n, k)).collect();
            // Hadamard-type bound on each kernel component
            let w_scale: f64 =
                jac.iter().map(|row| linalg::norm2(row)).fold(1.0, |acc, v| acc * v);
            let w_norm = linalg::norm2(&w);
            if !(w_norm > KERNEL_DEGENERATE_TOL * w_scale) {
                return Err(FieldError::DegenerateKernel);
            }
            // w must lie in the null space of A before it can be added
            let mut aw = vec![0.0; n];
            for r in 0..n {
                aw[r] = linalg::dot(&a_flat[r * n..(r + 1) * n], &w);
            }
            let a_norm = linalg::frobenius(a_flat);
            let kernel_residual = linalg::norm2(&aw) / (a_norm * w_norm);
            if !(kernel_residual <= KERNEL_RESIDUAL_TOL) {
                return Err(FieldError::KernelResidual { residual: kernel_residual });
            }
            for k in 0..n {
                c[k] += lam * w[k];
            }
        }
        Ok(c)
    }

    /// Derivative of each integral along a velocity: the inner product of
    /// its gradient with `velocity`. Zero up to rounding for velocities
    /// produced by `sample`.
    pub fn drift_rates(&self, point: &[f64], velocity: &[f64]) -> Result<Vec<f64>, FieldError> {
        self.check_point(point)?;
        let jac = self.jac(point)?;
        Ok(jac.iter().map(|row| linalg::dot(row, velocity)).collect())
    }

    /// Values of the integrals at `p` (parameters already substituted).
    pub fn integral_values(&self, p: &[f64]) -> Result<Vec<f64>, FieldError> {
        self.check_point(p)?;
        let mut out = Vec::with_capacity(self.bound_fs.len());
        for f in &self.bound_fs {
            out.push(f.evaluate(p, &self.empty)?);
        }
        Ok(out)
    }

    /// Value of the Hamiltonian at `p`.
    pub fn hamiltonian_value(&self, p: &[f64]) -> Result<f64, FieldError> {
        self.check_point(p)?;
        Ok(self.bound_h.evaluate(p, &self.empty)?)
    }
}

/// ||A c - r|| / (1 + ||A||_F ||c|| + ||r||).
fn normalized_residual(a_flat: &[f64], c: &[f64], rhs: &[f64], n: usize) -> f64 {
    let mut res_sq = 0.0;
    for r in 0..n {
        let v = linalg::dot(&a_flat[r * n..(r + 1) * n], c) - rhs[r];
        res_sq += v * v;
    }
    let scale = 1.0 + linalg::frobenius(a_flat) * linalg::norm2(c) + linalg::norm2(rhs);
    crate::math::sqrt(res_sq) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, PhaseSpace};

    fn space(n: usize) -> PhaseSpace {
        PhaseSpace::new(n).unwrap()
    }

    fn model_from(
        n: usize,
        fs: &[&str],
        h: &str,
        lambda: &str,
        backend: Backend,
    ) -> FieldModel {
        let s = space(n);
        let fs: Vec<Expression> = fs.iter().map(|t| parse(t, s, &[]).unwrap()).collect();
        let set = IntegralSet::new(s, fs, Bindings::new()).unwrap();
        let h = parse(h, s, &[]).unwrap();
        let lambda = parse(lambda, s, &[]).unwrap();
        FieldModel::new(set, h, lambda, backend, Thresholds::default()).unwrap()
    }

    #[test]
    fn conserving_momentum_cancels_restoring_force() {
        // conserving f = y1 under H = (x1^2 + y1^2)/2 forces dy/dt = 0
        let m = model_from(1, &["y1"], "(x1^2 + y1^2)/2", "0", Backend::Both);
        let s = m.sample(&[1.0, 2.0]).unwrap();
        assert_eq!(s.case, Case::CaseI);
        assert_eq!(s.velocity, vec![2.0, 0.0]);
        assert!(s.correction_residual <= 1e-15);
        assert!(s.backend_discrepancy.unwrap() <= 1e-15);
    }

    #[test]
    fn product_integral_unit_correction() {
        // f = x1*y1, H = x1: conservation needs c = 1 exactly
        let m = model_from(1, &["x1*y1"], "x1", "0", Backend::Both);
        let s = m.sample(&[2.0, 3.0]).unwrap();
        assert_eq!(s.case, Case::CaseI);
        assert_eq!(s.velocity[0], 0.0);
        assert!((s.velocity[1] - (-1.0 + 1.0)).abs() <= 1e-15);
        assert_eq!(s.s_zero, -2.0);
        // drift of f along the field vanishes
        let rates = m.drift_rates(&s.point, &s.velocity).unwrap();
        assert!(rates[0].abs() <= 1e-15);
    }

    #[test]
    fn hamiltonian_as_own_integral_yields_canonical_field() {
        let m = model_from(1, &["(x1^2 + y1^2)/2"], "(x1^2 + y1^2)/2", "0", Backend::Both);
        let s = m.sample(&[0.6, -0.8]).unwrap();
        assert_eq!(s.case, Case::CaseI);
        assert!((s.velocity[0] - (-0.8)).abs() <= 1e-15);
        assert!((s.velocity[1] - (-0.6)).abs() <= 1e-15);
        // turning point y = 0: the y-block degenerates but the canonical
        // field continues smoothly with a zero correction
        let s = m.sample(&[0.9, 0.0]).unwrap();
        assert_eq!(s.case, Case::CaseII);
        assert_eq!(s.velocity, vec![0.0, -0.9]);
        assert!(s.correction_residual <= 1e-15);
    }

    #[test]
    fn classification_tracks_y_block_rank() {
        let m = model_from(
            3,
            &["x2*y3 - x3*y2", "x3*y1 - x1*y3", "x1*y2 - x2*y1"],
            "(y1^2 + y2^2 + y3^2)/2",
            "0",
            Backend::Both,
        );
        // the y-block of the angular momenta is skew of odd size: rank 2
        let c = m.classify(&[0.3, -1.2, 0.7, 0.9, 0.4, -1.1]).unwrap();
        assert_eq!(c.case, Case::CaseII);
        assert_eq!(c.y_block_rank, 2);
        assert!(c.s_zero.abs() <= 1e-15);
        // all gradients vanish at the origin
        let c = m.classify(&[0.0; 6]).unwrap();
        assert_eq!(c.case, Case::Singular);
        assert!(matches!(m.sample(&[0.0; 6]), Err(FieldError::SingularLocus { .. })));
    }

    #[test]
    fn two_y_independent_integrals_are_singular() {
        let m = model_from(2, &["x1", "x2"], "y1*y2", "0", Backend::Both);
        let c = m.classify(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(c.y_block_rank, 0);
        assert_eq!(c.case, Case::Singular);
    }

    #[test]
    fn unreachable_drift_is_reported_not_absorbed() {
        // f = x1 cannot be conserved under H with dH/dy1 != 0: the y-block
        // row is zero while the drift is not
        let m = model_from(1, &["x1"], "(x1^2 + y1^2)/2", "0", Backend::Both);
        match m.sample(&[0.4, 1.5]) {
            Err(FieldError::InconsistentDrift { residual }) => assert!(residual > 1e-3),
            other => panic!("expected InconsistentDrift, got {other:?}"),
        }
    }

    #[test]
    fn kernel_multiple_preserves_conservation() {
        let m = model_from(
            3,
            &["x2*y3 - x3*y2", "x3*y1 - x1*y3", "x1*y2 - x2*y1"],
            "(y1^2 + y2^2 + y3^2)/2",
            "2",
            Backend::Both,
        );
        let p = [0.3, -1.2, 0.7, 0.9, 0.4, -1.1];
        let with = m.sample(&p).unwrap();
        let rates = m.drift_rates(&p, &with.velocity).unwrap();
        for r in &rates {
            assert!(r.abs() <= 1e-12, "drift rate {r}");
        }

        // lambda = 0 changes the velocity by exactly the kernel multiple
        let m0 = model_from(
            3,
            &["x2*y3 - x3*y2", "x3*y1 - x1*y3", "x1*y2 - x2*y1"],
            "(y1^2 + y2^2 + y3^2)/2",
            "0",
            Backend::Both,
        );
        let without = m0.sample(&p).unwrap();
        let w = m.set().kernel_vector(&p).unwrap();
        for (k, wk) in w.iter().enumerate() {
            assert!((with.velocity[k] - without.velocity[k]).abs() <= 1e-15);
            let dy = with.velocity[3 + k] - without.velocity[3 + k];
            assert!((dy - 2.0 * wk).abs() <= 1e-12 * (1.0 + wk.abs()), "{dy} vs {}", 2.0 * wk);
        }
    }

    #[test]
    fn backends_agree_on_regular_points() {
        let m = model_from(
            2,
            &["x1*y1 + x2*y2 + x1^2", "y1 + y2 + sin(x1)"],
            "(y1^2 + y2^2)/2 + x1*x2",
            "0",
            Backend::Both,
        );
        let p = [0.7, -0.4, 1.2, 0.5];
        let s = m.sample(&p).unwrap();
        assert_eq!(s.case, Case::CaseI);
        assert!(s.backend_discrepancy.unwrap() <= 1e-12);
        assert_eq!(s.backend_used, Backend::Solve);
        let rates = m.drift_rates(&p, &s.velocity).unwrap();
        for r in &rates {
            assert!(r.abs() <= 1e-12, "drift rate {r}");
        }

        // single backends produce what they claim
        let mc = model_from(
            2,
            &["x1*y1 + x2*y2 + x1^2", "y1 + y2 + sin(x1)"],
            "(y1^2 + y2^2)/2 + x1*x2",
            "0",
            Backend::Cramer,
        );
        let sc = mc.sample(&p).unwrap();
        assert_eq!(sc.backend_used, Backend::Cramer);
        assert!(sc.backend_discrepancy.is_none());
        for k in 0..4 {
            assert!((sc.velocity[k] - s.velocity[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn unbound_parameter_is_a_construction_error() {
        let s = space(1);
        let f = parse("mu*y1", s, &["mu"]).unwrap();
        let set = IntegralSet::new(s, vec![f], Bindings::new()).unwrap();
        let h = parse("x1", s, &[]).unwrap();
        let zero = parse("0", s, &[]).unwrap();
        assert!(matches!(
            FieldModel::new(set, h, zero, Backend::Both, Thresholds::default()),
            Err(FieldError::Eval(EvalError::UnboundParameter(_)))
        ));
    }
}
