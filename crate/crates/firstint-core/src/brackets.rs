//! Determinant brackets over phase space.
//!
//! For a phase space R^{2N} with coordinates (x1..xN, y1..yN), the star
//! bracket of 2N slot entries is the determinant of the 2N x 2N matrix whose
//! i-th row is the gradient of the i-th entry. A slot is either a function
//! (its row is the gradient) or a bare coordinate (its row is a unit vector).
//!
//! Coordinate rows are eliminated exactly rather than numerically: a unit
//! row at position i whose coordinate sits at column position j contributes
//! a factor (-1)^(i+j) and deletes its row and column, and a coordinate that
//! appears twice makes the determinant exactly zero. Only the fully reduced
//! matrix of function gradients meets floating-point LU. This keeps the
//! sparse structural part of the determinant free of rounding.
//!
//! The named brackets of an [`IntegralSet`] (the scalar `s_zero`, the kernel
//! family, cofactors, the pairwise Poisson matrix) are thin slot recipes on
//! top of the shared reduction.

use alloc::vec::Vec;

use crate::expr::{Bindings, EvalError, Expression, PhaseSpace};
use crate::linalg;

/// Largest supported number of degrees of freedom. Determinant work grows
/// factorially with slot shuffles and cubically per reduction; this cap keeps
/// every operation comfortably cheap.
pub const MAX_DOF: usize = 16;

/// Relative pivot threshold for numerical rank: a pivot counts while it
/// exceeds this multiple of the largest entry seen at the first elimination
/// step.
pub const RANK_PIVOT_REL_TOL: f64 = 1e-10;

/// One slot of a star bracket.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    /// A differentiable function; contributes its gradient row.
    Fun(Expression),
    /// A bare coordinate (index into the (x1..xN, y1..yN) ordering);
    /// contributes a unit row.
    Coord(usize),
}

/// A validated list of exactly 2N slots over one phase space.
#[derive(Debug, Clone)]
pub struct SlotList {
    space: PhaseSpace,
    slots: Vec<Slot>,
}

impl SlotList {
    pub fn new(space: PhaseSpace, slots: Vec<Slot>) -> Result<SlotList, BracketError> {
        if space.n() > MAX_DOF {
            return Err(BracketError::DimensionTooLarge { n: space.n() });
        }
        if slots.len() != space.dim() {
            return Err(BracketError::WrongSlotCount {
                expected: space.dim(),
                got: slots.len(),
            });
        }
        for slot in &slots {
            if let Slot::Coord(c) = slot {
                if *c >= space.dim() {
                    return Err(BracketError::CoordOutOfRange { index: *c, dim: space.dim() });
                }
            }
        }
        Ok(SlotList { space, slots })
    }

    pub fn space(&self) -> PhaseSpace {
        self.space
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BracketError {
    Eval(EvalError),
    DimensionTooLarge { n: usize },
    WrongSlotCount { expected: usize, got: usize },
    CoordOutOfRange { index: usize, dim: usize },
    WrongIntegralCount { expected: usize, got: usize },
    PointDimension { expected: usize, got: usize },
}

impl core::fmt::Display for BracketError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BracketError::Eval(e) => write!(f, "evaluation failed: {e}"),
            BracketError::DimensionTooLarge { n } => {
                write!(f, "{n} degrees of freedom exceeds the supported maximum of {MAX_DOF}")
            }
            BracketError::WrongSlotCount { expected, got } => {
                write!(f, "bracket needs {expected} slots, got {got}")
            }
            BracketError::CoordOutOfRange { index, dim } => {
                write!(f, "coordinate index {index} out of range for dimension {dim}")
            }
            BracketError::WrongIntegralCount { expected, got } => {
                write!(f, "integral set needs {expected} functions, got {got}")
            }
            BracketError::PointDimension { expected, got } => {
                write!(f, "point has {got} coordinates, expected {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for BracketError {}

impl From<EvalError> for BracketError {
    fn from(e: EvalError) -> BracketError {
        BracketError::Eval(e)
    }
}

// ---------------------------------------------------------------------------
// exact reduction core
// ---------------------------------------------------------------------------

/// A row of the determinant after gradients have been evaluated: either an
/// index into a table of gradient rows or a unit row for a coordinate.
#[derive(Clone, Copy)]
pub(crate) enum Row {
    Grad(usize),
    Coord(usize),
}

/// Determinant of the matrix described by `rows` over `dim` columns, with
/// all coordinate rows eliminated exactly before LU runs on what remains.
pub(crate) fn reduced_det(grads: &[Vec<f64>], rows: &[Row], dim: usize) -> f64 {
    let mut live: Vec<Row> = rows.to_vec();
    let mut active: Vec<usize> = (0..dim).collect();
    let mut sign = 1.0;
    while let Some(i) = live.iter().position(|r| matches!(r, Row::Coord(_))) {
        let coord = match live[i] {
            Row::Coord(c) => c,
            Row::Grad(_) => unreachable!(),
        };
        let j = match active.iter().position(|&c| c == coord) {
            Some(j) => j,
            // the same coordinate twice means two equal unit rows
            None => return 0.0,
        };
        if (i + j) % 2 == 1 {
            sign = -sign;
        }
        live.remove(i);
        active.remove(j);
    }
    let m = live.len();
    debug_assert_eq!(m, active.len());
    let mut mat = Vec::with_capacity(m * m);
    for row in &live {
        let g = match row {
            Row::Grad(g) => *g,
            Row::Coord(_) => unreachable!(),
        };
        for &c in &active {
            mat.push(grads[g][c]);
        }
    }
    sign * linalg::det_lu(mat, m)
}

/// The full star bracket of an arbitrary slot list at `p`.
pub fn bracket_star(list: &SlotList, p: &[f64], bindings: &Bindings) -> Result<f64, BracketError> {
    let dim = list.space.dim();
    if p.len() != dim {
        return Err(BracketError::PointDimension { expected: dim, got: p.len() });
    }
    let mut grads: Vec<Vec<f64>> = Vec::new();
    let mut rows: Vec<Row> = Vec::with_capacity(dim);
    for slot in &list.slots {
        match slot {
            Slot::Fun(e) => {
                grads.push(e.gradient(p, bindings)?);
                rows.push(Row::Grad(grads.len() - 1));
            }
            Slot::Coord(c) => rows.push(Row::Coord(*c)),
        }
    }
    Ok(reduced_det(&grads, &rows, dim))
}

/// Canonical Poisson bracket of two functions:
/// sum over j of (da/dx_j db/dy_j - da/dy_j db/dx_j).
pub fn poisson(
    a: &Expression,
    b: &Expression,
    space: PhaseSpace,
    p: &[f64],
    bindings: &Bindings,
) -> Result<f64, BracketError> {
    if p.len() != space.dim() {
        return Err(BracketError::PointDimension { expected: space.dim(), got: p.len() });
    }
    let ga = a.gradient(p, bindings)?;
    let gb = b.gradient(p, bindings)?;
    Ok(poisson_from(&ga, &gb, space.n()))
}

/// Poisson bracket from precomputed gradients. Term order is fixed, so
/// swapping the arguments negates the result exactly in floating point.
pub(crate) fn poisson_from(ga: &[f64], gb: &[f64], n: usize) -> f64 {
    (0..n).map(|j| ga[j] * gb[n + j] - ga[n + j] * gb[j]).sum()
}

// ---------------------------------------------------------------------------
// slot recipes over a precomputed Jacobian
// ---------------------------------------------------------------------------
//
// `grads` holds the gradients of the N integrals in order; `n` is N. These
// are the hot-path entries used by the field constructor, which evaluates
// the Jacobian once per point and then takes as many brackets as it needs.

/// {f1..fN, x1..xN}*: the determinant deciding the regular case. Equals
/// (-1)^N times the determinant of the y-block of the Jacobian.
pub(crate) fn s_zero_from(grads: &[Vec<f64>], n: usize) -> f64 {
    let mut rows: Vec<Row> = (0..n).map(Row::Grad).collect();
    rows.extend((0..n).map(Row::Coord));
    reduced_det(grads, &rows, 2 * n)
}

/// {f1..fN, x1..x_{N-1}, y_{k+1}}*: component k (0-based) of the kernel
/// direction used in the degenerate case.
pub(crate) fn kernel_from(grads: &[Vec<f64>], n: usize, k: usize) -> f64 {
    debug_assert!(k < n);
    let mut rows: Vec<Row> = (0..n).map(Row::Grad).collect();
    rows.extend((0..n - 1).map(Row::Coord));
    rows.push(Row::Coord(n + k));
    reduced_det(grads, &rows, 2 * n)
}

/// {f1..fN, x1..x_{N-1}, y1}*: the scalar reported alongside `s_zero` in
/// diagnostics; identical to the first kernel component.
pub(crate) fn s_n_from(grads: &[Vec<f64>], n: usize) -> f64 {
    kernel_from(grads, n, 0)
}

/// The bracket with integral j (0-based) replaced in place by coordinate
/// y_{k+1}, followed by x1..xN. Equals (-1)^N times the (j,k) cofactor of
/// the y-block, which is what Cramer's rule needs.
pub(crate) fn cofactor_from(grads: &[Vec<f64>], n: usize, j: usize, k: usize) -> f64 {
    debug_assert!(j < n && k < n);
    let mut rows: Vec<Row> = Vec::with_capacity(2 * n);
    for i in 0..n {
        if i == j {
            rows.push(Row::Coord(n + k));
        } else {
            rows.push(Row::Grad(i));
        }
    }
    rows.extend((0..n).map(Row::Coord));
    reduced_det(grads, &rows, 2 * n)
}

// ---------------------------------------------------------------------------
// integral sets
// ---------------------------------------------------------------------------

/// N functions on R^{2N} meant to be conserved together, with their
/// parameter bindings.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    space: PhaseSpace,
    fs: Vec<Expression>,
    bindings: Bindings,
}

impl IntegralSet {
    /// Exactly N functions over a phase space with N degrees of freedom.
    pub fn new(
        space: PhaseSpace,
        fs: Vec<Expression>,
        bindings: Bindings,
    ) -> Result<IntegralSet, BracketError> {
        if space.n() > MAX_DOF {
            return Err(BracketError::DimensionTooLarge { n: space.n() });
        }
        if fs.len() != space.n() {
            return Err(BracketError::WrongIntegralCount { expected: space.n(), got: fs.len() });
        }
        Ok(IntegralSet { space, fs, bindings })
    }

    pub fn space(&self) -> PhaseSpace {
        self.space
    }

    pub fn integrals(&self) -> &[Expression] {
        &self.fs
    }

    pub fn bindings(&self) -> &Bindings {
        &self.bindings
    }

    fn check_point(&self, p: &[f64]) -> Result<(), BracketError> {
        if p.len() != self.space.dim() {
            return Err(BracketError::PointDimension { expected: self.space.dim(), got: p.len() });
        }
        Ok(())
    }

    /// Gradient rows of all N integrals at `p` (each of length 2N).
    pub fn jacobian(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, BracketError> {
        self.check_point(p)?;
        let mut rows = Vec::with_capacity(self.fs.len());
        for f in &self.fs {
            rows.push(f.gradient(p, &self.bindings)?);
        }
        Ok(rows)
    }

    /// {f1..fN, x1..xN}* at `p`.
    pub fn s_zero(&self, p: &[f64]) -> Result<f64, BracketError> {
        let grads = self.jacobian(p)?;
        Ok(s_zero_from(&grads, self.space.n()))
    }

    /// {f1..fN, x1..x_{N-1}, y1}* at `p`.
    pub fn s_n(&self, p: &[f64]) -> Result<f64, BracketError> {
        let grads = self.jacobian(p)?;
        Ok(s_n_from(&grads, self.space.n()))
    }

    /// All N kernel components w_k = {f1..fN, x1..x_{N-1}, y_{k+1}}*.
    ///
    /// When the y-block of the Jacobian has rank N-1 this vector spans its
    /// null space: row by row, the products A w collapse to determinants
    /// with a repeated row.
    pub fn kernel_vector(&self, p: &[f64]) -> Result<Vec<f64>, BracketError> {
        let grads = self.jacobian(p)?;
        let n = self.space.n();
        Ok((0..n).map(|k| kernel_from(&grads, n, k)).collect())
    }

    /// Cofactor bracket for integral `j` and correction component `k`
    /// (both 0-based): integral j's slot replaced by coordinate y_{k+1}.
    pub fn cofactor_bracket(&self, j: usize, k: usize, p: &[f64]) -> Result<f64, BracketError> {
        let n = self.space.n();
        if j >= n || k >= n {
            return Err(BracketError::CoordOutOfRange { index: j.max(k), dim: n });
        }
        let grads = self.jacobian(p)?;
        Ok(cofactor_from(&grads, n, j, k))
    }

    /// Matrix of pairwise Poisson brackets P[i][j] = {f_i, f_j} at `p`.
    pub fn involution_matrix(&self, p: &[f64]) -> Result<InvolutionMatrix, BracketError> {
        let grads = self.jacobian(p)?;
        let n = self.space.n();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(poisson_from(&grads[i], &grads[j], n));
            }
        }
        Ok(InvolutionMatrix { n, entries })
    }

    /// Numerical rank of the N x 2N Jacobian at `p`, with the pivot
    /// threshold [`RANK_PIVOT_REL_TOL`].
    pub fn independence_rank(&self, p: &[f64]) -> Result<usize, BracketError> {
        let grads = self.jacobian(p)?;
        let n = self.space.n();
        let mut flat = Vec::with_capacity(n * 2 * n);
        for row in &grads {
            flat.extend_from_slice(row);
        }
        Ok(linalg::rank(flat, n, 2 * n, RANK_PIVOT_REL_TOL))
    }
}

/// Pairwise Poisson brackets of an integral set at one point, stored row
/// major. Exact antisymmetry is expected: entry (i,j) and entry (j,i) are
/// computed from the same gradient rows with identical term order, so each
/// is the floating-point negation of the other.
#[derive(Debug, Clone)]
pub struct InvolutionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl InvolutionMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry {f_i, f_j}, 0-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// max over (i,j) of |P_ij + P_ji|; exact zero in the absence of bugs.
    pub fn max_antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest off-diagonal magnitude: zero means the set is in involution
    /// at this point.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    worst = worst.max(self.get(i, j).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use alloc::vec;

    fn space(n: usize) -> PhaseSpace {
        PhaseSpace::new(n).unwrap()
    }

    fn no_params() -> Bindings {
        Bindings::new()
    }

    #[test]
    fn coordinate_slots_reduce_exactly() {
        let s = space(1);
        let b = no_params();
        // identity arrangement {x1, y1}* = det I = 1
        let list = SlotList::new(s, vec![Slot::Coord(0), Slot::Coord(1)]).unwrap();
        assert_eq!(bracket_star(&list, &[0.3, -2.0], &b).unwrap(), 1.0);
        // swapped rows flip the sign
        let list = SlotList::new(s, vec![Slot::Coord(1), Slot::Coord(0)]).unwrap();
        assert_eq!(bracket_star(&list, &[0.3, -2.0], &b).unwrap(), -1.0);
        // a repeated coordinate gives exactly zero
        let list = SlotList::new(s, vec![Slot::Coord(0), Slot::Coord(0)]).unwrap();
        assert_eq!(bracket_star(&list, &[0.3, -2.0], &b).unwrap(), 0.0);
    }

    #[test]
    fn mixed_slots_match_hand_determinant() {
        let s = space(1);
        let b = no_params();
        // rows [grad(x1*y1); e_x1] at (2,3) = [[3,2],[1,0]], det = -2
        let f = parse("x1*y1", s, &[]).unwrap();
        let list = SlotList::new(s, vec![Slot::Fun(f.clone()), Slot::Coord(0)]).unwrap();
        assert_eq!(bracket_star(&list, &[2.0, 3.0], &b).unwrap(), -2.0);
        // swapping the two slots negates
        let list = SlotList::new(s, vec![Slot::Coord(0), Slot::Fun(f)]).unwrap();
        assert_eq!(bracket_star(&list, &[2.0, 3.0], &b).unwrap(), 2.0);
    }

    #[test]
    fn slot_list_validation() {
        let s = space(2);
        assert!(matches!(
            SlotList::new(s, vec![Slot::Coord(0)]),
            Err(BracketError::WrongSlotCount { expected: 4, got: 1 })
        ));
        assert!(matches!(
            SlotList::new(s, vec![Slot::Coord(0), Slot::Coord(1), Slot::Coord(2), Slot::Coord(4)]),
            Err(BracketError::CoordOutOfRange { index: 4, dim: 4 })
        ));
        assert!(PhaseSpace::new(17).is_some());
        let big = PhaseSpace::new(17).unwrap();
        assert!(matches!(
            SlotList::new(big, vec![]),
            Err(BracketError::DimensionTooLarge { n: 17 })
        ));
    }

    #[test]
    fn poisson_canonical_pairs() {
        let s = space(2);
        let b = no_params();
        let x1 = parse("x1", s, &[]).unwrap();
        let y1 = parse("y1", s, &[]).unwrap();
        let y2 = parse("y2", s, &[]).unwrap();
        let p = [0.4, -1.0, 2.2, 0.9];
        assert_eq!(poisson(&x1, &y1, s, &p, &b).unwrap(), 1.0);
        assert_eq!(poisson(&y1, &x1, s, &p, &b).unwrap(), -1.0);
        assert_eq!(poisson(&x1, &y2, s, &p, &b).unwrap(), 0.0);
        assert_eq!(poisson(&y1, &y2, s, &p, &b).unwrap(), 0.0);
    }

    #[test]
    fn poisson_satisfies_leibniz() {
        let s = space(2);
        let b = no_params();
        let a = parse("sin(x1) + y2^2", s, &[]).unwrap();
        let c = parse("x2*y1", s, &[]).unwrap();
        let prod = Expression::Prod(Box::new(a.clone()), Box::new(c.clone()));
        let h = parse("x1*y1 + cos(x2*y2)", s, &[]).unwrap();
        let p = [0.7, -0.3, 1.1, 0.5];
        let lhs = poisson(&prod, &h, s, &p, &b).unwrap();
        let av = a.evaluate(&p, &b).unwrap();
        let cv = c.evaluate(&p, &b).unwrap();
        let rhs = av * poisson(&c, &h, s, &p, &b).unwrap() + cv * poisson(&a, &h, s, &p, &b).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    fn angular_momentum_set() -> IntegralSet {
        let s = space(3);
        let m1 = parse("x2*y3 - x3*y2", s, &[]).unwrap();
        let m2 = parse("x3*y1 - x1*y3", s, &[]).unwrap();
        let m3 = parse("x1*y2 - x2*y1", s, &[]).unwrap();
        IntegralSet::new(s, vec![m1, m2, m3], Bindings::new()).unwrap()
    }

    #[test]
    fn angular_momentum_brackets() {
        let set = angular_momentum_set();
        let p = [0.3, -1.2, 0.7, 0.9, 0.4, -1.1];
        // {m1, m2} = m3
        let m3 = set.integrals()[2].evaluate(&p, set.bindings()).unwrap();
        let pb = poisson(&set.integrals()[0], &set.integrals()[1], set.space(), &p, set.bindings())
            .unwrap();
        assert!((pb - m3).abs() <= 1e-12 * (1.0 + m3.abs()));

        // the y-block is skew of odd size, so s_zero vanishes identically;
        // LU leaves at most elimination-level rounding
        assert!(set.s_zero(&p).unwrap().abs() <= 1e-15);

        // s_n = -x1 * m3
        let sn = set.s_n(&p).unwrap();
        let want = -p[0] * m3;
        assert!((sn - want).abs() <= 1e-12 * (1.0 + want.abs()), "{sn} vs {want}");

        // the kernel vector is -m3 * x
        let w = set.kernel_vector(&p).unwrap();
        for k in 0..3 {
            let want = -m3 * p[k];
            assert!((w[k] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn kernel_vector_annihilates_rank_deficient_y_block() {
        // linear set whose y-block [[1,1],[1,1]] is singular while the naive
        // coordinate-replacement recipe would miss the null space
        let s = space(2);
        let f1 = parse("5*x1 + 7*x2 + y1 + y2", s, &[]).unwrap();
        let f2 = parse("11*x1 + 13*x2 + y1 + y2", s, &[]).unwrap();
        let set = IntegralSet::new(s, vec![f1, f2], Bindings::new()).unwrap();
        let p = [0.2, -0.7, 1.3, 0.4];
        let w = set.kernel_vector(&p).unwrap();
        let norm = crate::math::sqrt(w[0] * w[0] + w[1] * w[1]);
        assert!(norm > 1e-6, "kernel vector degenerated: {w:?}");
        // rows of the y-block are (1,1); both must annihilate w
        assert!((w[0] + w[1]).abs() <= 1e-12 * norm, "{w:?}");
    }

    #[test]
    fn products_of_y_block_with_kernel_track_determinant() {
        // for any set, A w = (-1)^(N+1) det(A) * df/dx_N row by row
        let s = space(2);
        let f1 = parse("(x1 + y1)^2 + x2*y2", s, &[]).unwrap();
        let f2 = parse("sin(x2) + y1*y2 + x1", s, &[]).unwrap();
        let set = IntegralSet::new(s, vec![f1, f2], Bindings::new()).unwrap();
        let p = [0.5, -0.8, 1.1, 0.3];
        let jac = set.jacobian(&p).unwrap();
        let n = 2;
        let mut a_flat = Vec::with_capacity(n * n);
        for row in &jac {
            a_flat.extend_from_slice(&row[n..]);
        }
        let det_a = linalg::det_lu(a_flat, n);
        let w = set.kernel_vector(&p).unwrap();
        for (r, row) in jac.iter().enumerate() {
            let lhs: f64 = (0..n).map(|c| row[n + c] * w[c]).sum();
            let rhs = -det_a * row[n - 1]; // (-1)^(N+1) with N=2
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            assert!((lhs - rhs).abs() <= 1e-12 * scale, "row {r}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn cofactor_brackets_give_cofactors_of_y_block() {
        // N=1: the single cofactor bracket is {y1, x1}* = -1
        let s = space(1);
        let f = parse("x1*y1", s, &[]).unwrap();
        let set = IntegralSet::new(s, vec![f], Bindings::new()).unwrap();
        assert_eq!(set.cofactor_bracket(0, 0, &[2.0, 3.0]).unwrap(), -1.0);

        // N=2 hand case: y-block [[a,b],[c,d]] has cofactors
        // [[d,-c],[-b,a]]; the brackets carry the extra (-1)^N = +1
        let s = space(2);
        let f1 = parse("2*y1 + 3*y2 + x1", s, &[]).unwrap();
        let f2 = parse("5*y1 + 7*y2 + x2", s, &[]).unwrap();
        let set = IntegralSet::new(s, vec![f1, f2], Bindings::new()).unwrap();
        let p = [0.1, 0.2, 0.3, 0.4];
        let want = [[7.0, -5.0], [-3.0, 2.0]];
        for (j, row) in want.iter().enumerate() {
            for (k, expected) in row.iter().enumerate() {
                assert_eq!(set.cofactor_bracket(j, k, &p).unwrap(), *expected, "({j},{k})");
            }
        }
    }

    #[test]
    fn involution_matrix_properties() {
        let set = angular_momentum_set();
        let p = [0.3, -1.2, 0.7, 0.9, 0.4, -1.1];
        let m = set.involution_matrix(&p).unwrap();
        assert_eq!(m.n(), 3);
        assert_eq!(m.max_antisymmetry_defect(), 0.0);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
        }
        // angular momenta are not in involution
        assert!(m.max_off_diagonal() > 0.1);
    }

    #[test]
    fn independence_rank_counts_pivots() {
        let set = angular_momentum_set();
        assert_eq!(set.independence_rank(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap(), 3);
        // at the origin every gradient vanishes
        assert_eq!(set.independence_rank(&[0.0; 6]).unwrap(), 0);

        // duplicated integral drops the rank
        let s = space(2);
        let f = parse("x1*y1 + x2*y2", s, &[]).unwrap();
        let set = IntegralSet::new(s, vec![f.clone(), f], Bindings::new()).unwrap();
        assert_eq!(set.independence_rank(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 1);
    }

    #[test]
    fn integral_set_validation() {
        let s = space(2);
        let f = parse("x1", s, &[]).unwrap();
        assert!(matches!(
            IntegralSet::new(s, vec![f.clone()], Bindings::new()),
            Err(BracketError::WrongIntegralCount { expected: 2, got: 1 })
        ));
        let set = IntegralSet::new(s, vec![f.clone(), f], Bindings::new()).unwrap();
        assert!(matches!(
            set.s_zero(&[0.0; 3]),
            Err(BracketError::PointDimension { expected: 4, got: 3 })
        ));
    }
}
