//! Exact linear programming over polyhedra given by constraints
//! `normal·x + offset {≥, >, =} 0`.
//!
//! Problems in this crate have few variables and many constraints (a layer
//! with hundreds of neurons in three or four dimensions), so every primal
//! problem is solved through its dual in column form, where the tableau has
//! one row per variable instead of one row per constraint. Primal points are
//! read off the dual multipliers; primal recession rays come from phase-one
//! Farkas multipliers.

pub mod simplex;

use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::{dot, neg, primitive_direction, zero_vec, RMatrix, RVector, Rational};
use simplex::{StandardLp, StandardOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("strict constraints are not allowed here")]
    StrictConstraint,
    #[error("half-space cover precondition violated: {0}")]
    CoverPrecondViolated(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `normal·x + offset ≥ 0`
    Ge,
    /// `normal·x + offset > 0`
    Gt,
    /// `normal·x + offset = 0`
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub normal: RVector,
    pub offset: Rational,
    pub relation: Relation,
}

impl Constraint {
    pub fn ge(normal: RVector, offset: Rational) -> Self {
        Constraint { normal, offset, relation: Relation::Ge }
    }

    pub fn gt(normal: RVector, offset: Rational) -> Self {
        Constraint { normal, offset, relation: Relation::Gt }
    }

    pub fn eq(normal: RVector, offset: Rational) -> Self {
        Constraint { normal, offset, relation: Relation::Eq }
    }

    /// `normal·x + offset`.
    pub fn value(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x) + &self.offset
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let v = self.value(x);
        match self.relation {
            Relation::Ge => !v.is_negative(),
            Relation::Gt => v.is_positive(),
            Relation::Eq => v.is_zero(),
        }
    }

    /// Same constraint with the strict relation relaxed to `≥`.
    pub fn closure(&self) -> Self {
        let relation = if self.relation == Relation::Gt { Relation::Ge } else { self.relation };
        Constraint { relation, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polyhedron {
    pub dim: usize,
    pub constraints: Vec<Constraint>,
}

impl Polyhedron {
    pub fn new(dim: usize) -> Self {
        Polyhedron { dim, constraints: Vec::new() }
    }

    pub fn with_constraints(dim: usize, constraints: Vec<Constraint>) -> Result<Self, LpError> {
        let p = Polyhedron { dim, constraints };
        p.check_dims()?;
        Ok(p)
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn check_dims(&self) -> Result<(), LpError> {
        for c in &self.constraints {
            if c.normal.len() != self.dim {
                return Err(LpError::DimensionMismatch { expected: self.dim, got: c.normal.len() });
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim && self.constraints.iter().all(|c| c.holds(x))
    }

    pub fn has_strict(&self) -> bool {
        self.constraints.iter().any(|c| c.relation == Relation::Gt)
    }

    /// Box `lo ≤ x_i ≤ hi` in every coordinate.
    pub fn cube(dim: usize, lo: &Rational, hi: &Rational) -> Self {
        let mut p = Polyhedron::new(dim);
        for i in 0..dim {
            let mut e = zero_vec(dim);
            e[i] = Rational::one();
            p.push(Constraint::ge(e.clone(), -lo.clone()));
            p.push(Constraint::ge(neg(&e), hi.clone()));
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Optimal { point: RVector, value: Rational },
    Unbounded { point: RVector, ray: RVector },
}

/// Columns of the dual problem `min Σ offset_i u_i  s.t.  Σ u_i normal_i = rhs`.
/// Equalities contribute a free multiplier, split as two columns.
fn dual_columns(p: &Polyhedron) -> (Vec<RVector>, RVector) {
    let mut cols = Vec::with_capacity(p.constraints.len());
    let mut costs = Vec::with_capacity(p.constraints.len());
    for c in &p.constraints {
        debug_assert!(c.relation != Relation::Gt);
        cols.push(c.normal.clone());
        costs.push(c.offset.clone());
        if c.relation == Relation::Eq {
            cols.push(neg(&c.normal));
            costs.push(-c.offset.clone());
        }
    }
    (cols, costs)
}

fn dual_lp(p: &Polyhedron, rhs: RVector) -> StandardLp {
    let (cols, costs) = dual_columns(p);
    let a = (0..p.dim).map(|r| cols.iter().map(|col| col[r].clone()).collect()).collect();
    StandardLp { a, b: rhs, c: costs }
}

fn check_objective(objective: &[Rational], p: &Polyhedron) -> Result<(), LpError> {
    p.check_dims()?;
    if objective.len() != p.dim {
        return Err(LpError::DimensionMismatch { expected: p.dim, got: objective.len() });
    }
    if p.has_strict() {
        return Err(LpError::StrictConstraint);
    }
    Ok(())
}

/// Some point of a polyhedron without strict constraints.
fn closed_point(p: &Polyhedron) -> Option<RVector> {
    match dual_lp(p, zero_vec(p.dim)).solve() {
        StandardOutcome::Optimal { duals, .. } => Some(neg(&duals)),
        StandardOutcome::Unbounded { .. } => None,
        StandardOutcome::Infeasible { .. } => unreachable!("u = 0 is dual feasible"),
    }
}

/// Maximizes `objective·x` over a polyhedron with `≥`/`=` constraints.
///
/// `Unbounded` carries a feasible point and a recession direction along which
/// the objective strictly increases.
pub fn maximize(objective: &[Rational], p: &Polyhedron) -> Result<LpOutcome, LpError> {
    check_objective(objective, p)?;
    let outcome = match dual_lp(p, neg(objective)).solve() {
        StandardOutcome::Optimal { duals, value, .. } => {
            LpOutcome::Optimal { point: neg(&duals), value }
        }
        // Dual unbounded: the primal is empty.
        StandardOutcome::Unbounded { .. } => LpOutcome::Infeasible,
        StandardOutcome::Infeasible { farkas } => match closed_point(p) {
            None => LpOutcome::Infeasible,
            Some(point) => LpOutcome::Unbounded { point, ray: primitive_direction(&neg(&farkas)) },
        },
    };
    debug_assert!(outcome_is_consistent(objective, p, &outcome));
    Ok(outcome)
}

fn outcome_is_consistent(objective: &[Rational], p: &Polyhedron, o: &LpOutcome) -> bool {
    match o {
        LpOutcome::Infeasible => true,
        LpOutcome::Optimal { point, value } => p.contains(point) && dot(objective, point) == *value,
        LpOutcome::Unbounded { point, ray } => {
            p.contains(point)
                && dot(objective, ray).is_positive()
                && p.constraints.iter().all(|c| {
                    let s = dot(&c.normal, ray);
                    match c.relation {
                        Relation::Eq => s.is_zero(),
                        _ => !s.is_negative(),
                    }
                })
        }
    }
}

/// A point satisfying every constraint, strict ones strictly, or `None`.
///
/// Strict constraints are handled with one shared slack: maximize `ε`
/// subject to `normal·x + offset ≥ ε` for each strict constraint and
/// `ε ≤ 1`; the open system is feasible iff the optimum is positive.
pub fn feasible_point(p: &Polyhedron) -> Result<Option<RVector>, LpError> {
    p.check_dims()?;
    if !p.has_strict() {
        return Ok(closed_point(p));
    }
    let d = p.dim;
    let mut lifted = Polyhedron::new(d + 1);
    for c in &p.constraints {
        let mut normal = c.normal.clone();
        let slack = if c.relation == Relation::Gt { -Rational::one() } else { Rational::zero() };
        normal.push(slack);
        let relation = if c.relation == Relation::Eq { Relation::Eq } else { Relation::Ge };
        lifted.push(Constraint { normal, offset: c.offset.clone(), relation });
    }
    let mut cap = zero_vec(d + 1);
    cap[d] = -Rational::one();
    lifted.push(Constraint::ge(cap, Rational::one()));
    let mut objective = zero_vec(d + 1);
    objective[d] = Rational::one();
    let point = match maximize(&objective, &lifted)? {
        LpOutcome::Optimal { point, value } if value.is_positive() => Some(point),
        LpOutcome::Unbounded { point, .. } => Some(point),
        _ => None,
    };
    let point = point.map(|mut x| {
        x.truncate(d);
        x
    });
    debug_assert!(point.as_ref().is_none_or(|x| p.contains(x)));
    Ok(point)
}

pub fn is_feasible(p: &Polyhedron) -> Result<bool, LpError> {
    Ok(feasible_point(p)?.is_some())
}

/// Extreme ray of the cone `{v : M v = 0, v ≥ 0}` with positive objective,
/// together with its support. The ray is a vertex of the normalized slice
/// `1·v = 1`, so its support has at most `rank(M) + 1` elements.
pub fn extreme_ray_support(m: &RMatrix, objective: &[Rational]) -> Option<(RVector, Vec<usize>)> {
    extreme_ray_support_lex(m, &[objective.to_vec()])
}

/// Lexicographic variant: finds an extreme ray `v` whose objective vector
/// `(o_1·v, o_2·v, …)` is lexicographically positive.
///
/// Each stage maximizes one objective over the current face of the slice;
/// when the maximum is zero the face `o_i·v = 0` is kept and the next
/// objective decides. Vertices of a face are vertices of the slice, so the
/// support bound is unchanged.
pub fn extreme_ray_support_lex(m: &RMatrix, objectives: &[RVector]) -> Option<(RVector, Vec<usize>)> {
    let n = m.cols();
    let mut a: Vec<RVector> = m.to_rows();
    let mut b = zero_vec(m.rows());
    a.push(vec![Rational::one(); n]);
    b.push(Rational::one());
    for obj in objectives {
        assert_eq!(obj.len(), n, "objective width must match cone dimension");
        let lp = StandardLp { a: a.clone(), b: b.clone(), c: neg(obj) };
        match lp.solve() {
            StandardOutcome::Infeasible { .. } => return None,
            StandardOutcome::Unbounded { .. } => unreachable!("normalized slice is bounded"),
            StandardOutcome::Optimal { x, value, .. } => {
                // value = -max
                if value.is_negative() {
                    let support = (0..n).filter(|&i| !x[i].is_zero()).collect();
                    return Some((primitive_direction(&x), support));
                }
                if value.is_positive() {
                    return None;
                }
                a.push(obj.clone());
                b.push(Rational::zero());
            }
        }
    }
    None
}

static HELLY_CALLS: AtomicUsize = AtomicUsize::new(0);
static HELLY_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Process-wide counts of [`helly_cover`] results and of results that were
/// too large or failed the coverage check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HellyAudit {
    pub calls: usize,
    pub violations: usize,
}

pub fn helly_audit() -> HellyAudit {
    HellyAudit { calls: HELLY_CALLS.load(Ordering::Relaxed), violations: HELLY_VIOLATIONS.load(Ordering::Relaxed) }
}

/// Given a polyhedron `cover_target` (≥/= constraints) contained in the union
/// of the half-spaces `w_i·x + b_i ≥ 0`, returns at most `dim + 1` indices
/// whose half-spaces still cover it.
///
/// The indices are the `y`-support of an extreme ray `(y, z) ≥ 0` of the
/// Farkas cone `Σ z_j a_j − Σ y_i w_i = 0` for the system
/// `{a_j·x + p_j ≥ 0, w_i·x + b_i ≤ −ε}`, chosen so that
/// `(b·y − p·z) + ε·(1·y) > 0` for every `ε > 0`; that is, the objective pair
/// `(b·y − p·z, 1·y)` is lexicographically positive. The result is then
/// re-verified with one emptiness LP.
pub fn helly_cover(
    cover_target: &Polyhedron,
    halfspaces: &[(RVector, Rational)],
) -> Result<Vec<usize>, LpError> {
    cover_target.check_dims()?;
    if cover_target.has_strict() {
        return Err(LpError::StrictConstraint);
    }
    let d = cover_target.dim;
    for (w, _) in halfspaces {
        if w.len() != d {
            return Err(LpError::DimensionMismatch { expected: d, got: w.len() });
        }
    }
    let mut rows: Vec<(RVector, Rational)> = Vec::new();
    for c in &cover_target.constraints {
        rows.push((c.normal.clone(), c.offset.clone()));
        if c.relation == Relation::Eq {
            rows.push((neg(&c.normal), -c.offset.clone()));
        }
    }
    let n = halfspaces.len();
    let total = n + rows.len();
    // Column i < n is -w_i (multiplier y_i); column n + j is a_j (z_j).
    let mut m = RMatrix::zeros(d, total);
    for (i, (w, _)) in halfspaces.iter().enumerate() {
        for r in 0..d {
            m.set(r, i, -w[r].clone());
        }
    }
    for (j, (a, _)) in rows.iter().enumerate() {
        for r in 0..d {
            m.set(r, n + j, a[r].clone());
        }
    }
    let mut primary = zero_vec(total);
    let mut secondary = zero_vec(total);
    for (i, (_, b)) in halfspaces.iter().enumerate() {
        primary[i] = b.clone();
        secondary[i] = Rational::one();
    }
    for (j, (_, p)) in rows.iter().enumerate() {
        primary[n + j] = -p.clone();
    }
    let Some((_, support)) = extreme_ray_support_lex(&m, &[primary, secondary]) else {
        return Err(LpError::CoverPrecondViolated("no Farkas ray: target not covered".into()));
    };
    let cover: Vec<usize> = support.into_iter().filter(|&i| i < n).collect();
    HELLY_CALLS.fetch_add(1, Ordering::Relaxed);
    if cover.len() > d + 1 {
        HELLY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        return Err(LpError::CoverPrecondViolated(format!(
            "cover of size {} exceeds dim + 1 = {}",
            cover.len(),
            d + 1
        )));
    }
    if !covers(cover_target, halfspaces, &cover)? {
        HELLY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        return Err(LpError::CoverPrecondViolated("verification LP found an uncovered point".into()));
    }
    Ok(cover)
}

/// True iff `target ⊆ ∪_{i ∈ chosen} {w_i·x + b_i ≥ 0}`, decided by one
/// strict feasibility LP.
pub fn covers(
    target: &Polyhedron,
    halfspaces: &[(RVector, Rational)],
    chosen: &[usize],
) -> Result<bool, LpError> {
    let mut outside = target.clone();
    for &i in chosen {
        let (w, b) = &halfspaces[i];
        outside.push(Constraint::gt(neg(w), -b.clone()));
    }
    Ok(feasible_point(&outside)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, qvec, ratio};

    fn poly(dim: usize, cs: Vec<Constraint>) -> Polyhedron {
        Polyhedron::with_constraints(dim, cs).unwrap()
    }

    #[test]
    fn feasible_point_examples() {
        let p = poly(1, vec![Constraint::gt(qvec(&[1]), int(0)), Constraint::gt(qvec(&[-1]), int(1))]);
        let x = feasible_point(&p).unwrap().unwrap();
        assert!(x[0] > int(0) && x[0] < int(1));

        let p = poly(1, vec![Constraint::gt(qvec(&[1]), int(0)), Constraint::gt(qvec(&[-1]), int(0))]);
        assert!(feasible_point(&p).unwrap().is_none());

        let p = poly(2, vec![Constraint::gt(qvec(&[1, -1]), int(0)), Constraint::gt(qvec(&[0, 1]), int(0))]);
        let x = feasible_point(&p).unwrap().unwrap();
        assert!(x[0] > x[1] && x[1] > int(0));
    }

    #[test]
    fn feasible_point_dimension_mismatch() {
        let p = Polyhedron { dim: 2, constraints: vec![Constraint::ge(qvec(&[1]), int(0))] };
        assert!(matches!(feasible_point(&p), Err(LpError::DimensionMismatch { .. })));
    }

    #[test]
    fn maximize_examples() {
        let p = poly(1, vec![Constraint::ge(qvec(&[-1]), int(3))]);
        assert_eq!(
            maximize(&qvec(&[1]), &p).unwrap(),
            LpOutcome::Optimal { point: qvec(&[3]), value: int(3) }
        );

        let p = poly(1, vec![Constraint::ge(qvec(&[1]), int(0))]);
        match maximize(&qvec(&[1]), &p).unwrap() {
            LpOutcome::Unbounded { point, ray } => {
                assert!(point[0] >= int(0));
                assert_eq!(ray, qvec(&[1]));
            }
            other => panic!("unexpected {other:?}"),
        }

        let p = poly(1, vec![Constraint::ge(qvec(&[1]), int(-1)), Constraint::ge(qvec(&[-1]), int(0))]);
        assert_eq!(maximize(&qvec(&[0]), &p).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn maximize_rejects_strict() {
        let p = poly(1, vec![Constraint::gt(qvec(&[1]), int(0))]);
        assert_eq!(maximize(&qvec(&[1]), &p), Err(LpError::StrictConstraint));
    }

    #[test]
    fn maximize_with_equalities_and_lineality() {
        // x + y = 1, x >= 0, maximize y - x: optimum at x = 0, y = 1.
        let p = poly(2, vec![Constraint::eq(qvec(&[1, 1]), int(-1)), Constraint::ge(qvec(&[1, 0]), int(0))]);
        assert_eq!(
            maximize(&qvec(&[-1, 1]), &p).unwrap(),
            LpOutcome::Optimal { point: qvec(&[0, 1]), value: int(1) }
        );
        // free plane, objective zero
        let p = Polyhedron::new(2);
        match maximize(&qvec(&[0, 0]), &p).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(0)),
            other => panic!("unexpected {other:?}"),
        }
        match maximize(&qvec(&[0, 1]), &p).unwrap() {
            LpOutcome::Unbounded { ray, .. } => assert!(ray[1] > int(0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extreme_ray_examples() {
        let (ray, support) = extreme_ray_support(&RMatrix::from_i64(&[&[1, -1]]), &qvec(&[1, 0])).unwrap();
        assert_eq!(ray, qvec(&[1, 1]));
        assert_eq!(support, vec![0, 1]);

        assert!(extreme_ray_support(&RMatrix::identity(2), &qvec(&[1, 1])).is_none());

        let (ray, support) = extreme_ray_support(&RMatrix::zeros(0, 2), &qvec(&[1, -1])).unwrap();
        assert_eq!(ray, qvec(&[1, 0]));
        assert_eq!(support, vec![0]);
    }

    fn hs(w: &[i64], b: i64) -> (RVector, Rational) {
        (qvec(w), int(b))
    }

    #[test]
    fn helly_cover_line() {
        let c = Polyhedron::new(1);
        let h = vec![hs(&[1], 0), hs(&[-1], 0), hs(&[1], 1)];
        let a = helly_cover(&c, &h).unwrap();
        assert_eq!(a.len(), 2);
        assert!(covers(&c, &h, &a).unwrap());
        // Only {x ≥ 0, -x ≥ 0} and {-x ≥ 0, x + 1 ≥ 0} cover the line; the
        // primary objective prefers the pair with positive offset slack.
        assert_eq!(a, vec![1, 2]);
    }

    #[test]
    fn helly_cover_half_line() {
        let c = poly(1, vec![Constraint::ge(qvec(&[1]), int(-5))]);
        assert_eq!(helly_cover(&c, &[hs(&[1], 0)]).unwrap(), vec![0]);
    }

    #[test]
    fn helly_cover_plane_cross() {
        let c = Polyhedron::new(2);
        let h = vec![hs(&[1, 0], 0), hs(&[-1, 0], 0), hs(&[0, 1], 0), hs(&[0, -1], 0)];
        let a = helly_cover(&c, &h).unwrap();
        assert!(a.len() <= 3);
        assert!(covers(&c, &h, &a).unwrap());
        // exhaustive oracle: no single half-plane covers R², so |A| ≥ 2
        assert!(a.len() >= 2);
    }

    #[test]
    fn helly_cover_empty_target() {
        let c = poly(1, vec![Constraint::ge(qvec(&[1]), int(-1)), Constraint::ge(qvec(&[-1]), int(0))]);
        let h = [hs(&[1], 0)];
        let a = helly_cover(&c, &h).unwrap();
        assert!(a.len() <= 2);
        assert!(covers(&c, &h, &a).unwrap());
    }

    #[test]
    fn helly_cover_rejects_uncovered() {
        let c = Polyhedron::new(1);
        let err = helly_cover(&c, &[hs(&[1], 0)]).unwrap_err();
        assert!(matches!(err, LpError::CoverPrecondViolated(_)));
    }

    #[test]
    fn lex_stage_decides_ties() {
        // Cone v1 = v2: both objectives zero on primary, positive on secondary.
        let m = RMatrix::from_i64(&[&[1, -1]]);
        let (ray, _) = extreme_ray_support_lex(&m, &[qvec(&[1, -1]), qvec(&[1, 0])]).unwrap();
        assert_eq!(ray, qvec(&[1, 1]));
        assert!(extreme_ray_support_lex(&m, &[qvec(&[1, -1]), qvec(&[-1, 0])]).is_none());
        let _ = ratio(1, 2);
    }
}
