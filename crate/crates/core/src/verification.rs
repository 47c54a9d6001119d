//! Exact output-range verification of two-layer scalar networks over
//! polyhedral domains, and the embedding of positivity instances into
//! verification instances over a ball inside an affine subspace.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arrangement::AffineLayer;
use crate::exact::{
    add_scaled, dot, int, kernel_of_rows, neg, rank_of_rows, solve, sub, zero_vec, RMatrix,
    RVector, Rational,
};
use crate::lp::{feasible_point, maximize, Constraint, LpError, LpOutcome, Polyhedron, Relation};
use crate::range::{RangeError, TwoLayerScalarNet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerificationError {
    #[error("the input domain is empty")]
    EmptyDomain,
    #[error("domain constraints must be non-strict")]
    StrictDomain,
    #[error("subspace basis vectors are linearly dependent")]
    DependentBasis,
    #[error("shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Range(#[from] RangeError),
}

/// Where inputs range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputDomain {
    Polytope(Polyhedron),
    /// `{z + Σ c_i u_i : ‖Σ c_i u_i‖₂ < radius}`.
    BallInSubspace { center: RVector, basis: Vec<RVector>, radius: Rational },
}

impl InputDomain {
    pub fn dim(&self) -> usize {
        match self {
            InputDomain::Polytope(p) => p.dim,
            InputDomain::BallInSubspace { center, .. } => center.len(),
        }
    }

    /// The polytope itself, or a box inscribed in the ball.
    pub fn polyhedron(&self) -> Result<Polyhedron, VerificationError> {
        match self {
            InputDomain::Polytope(p) => Ok(p.clone()),
            InputDomain::BallInSubspace { center, basis, radius } => inscribed_box(center, basis, radius),
        }
    }
}

/// Coordinates in the subspace basis: `(UᵀU)⁻¹Uᵀ`, a `k × d` matrix.
pub fn basis_coordinates(basis: &[RVector], d: usize) -> Result<RMatrix, VerificationError> {
    let k = basis.len();
    if basis.iter().any(|u| u.len() != d) {
        return Err(VerificationError::Shape(format!("basis vectors must have length {d}")));
    }
    let rows: Vec<&[Rational]> = basis.iter().map(|u| u.as_slice()).collect();
    if rank_of_rows(&rows, d) < k {
        return Err(VerificationError::DependentBasis);
    }
    let u_t = RMatrix::from_rows(basis.to_vec(), d).expect("width d");
    let gram = u_t.mul(&u_t.transpose());
    let mut coords = RMatrix::zeros(k, d);
    for j in 0..d {
        let column: RVector = (0..k).map(|i| u_t.get(i, j).clone()).collect();
        let x = solve(&gram, &column).expect("Gram matrix of independent vectors is invertible");
        for i in 0..k {
            coords.set(i, j, x[i].clone());
        }
    }
    Ok(coords)
}

/// `{x : x − z ∈ span(U), |A(x − z)|_i ≤ ρ}` with `ρ = radius / (2 Σ‖u_i‖₁)`,
/// which lies inside the open ball since `‖Σ c_i u_i‖₂ ≤ Σ |c_i| ‖u_i‖₁`.
pub fn inscribed_box(center: &[Rational], basis: &[RVector], radius: &Rational) -> Result<Polyhedron, VerificationError> {
    let d = center.len();
    if !radius.is_positive() {
        return Err(VerificationError::Shape("radius must be positive".into()));
    }
    let coords = basis_coordinates(basis, d)?;
    let l1: Rational = basis.iter().flat_map(|u| u.iter().map(|v| v.abs())).sum();
    let mut poly = Polyhedron::new(d);
    let rows: Vec<&[Rational]> = basis.iter().map(|u| u.as_slice()).collect();
    for normal in kernel_of_rows(&rows, d) {
        let offset = -dot(&normal, center);
        poly.push(Constraint::eq(normal, offset));
    }
    if l1.is_zero() {
        return Ok(poly);
    }
    let rho = radius / (int(2) * l1);
    for i in 0..coords.rows() {
        let a = coords.row_vec(i);
        let az = dot(&a, center);
        poly.push(Constraint::ge(neg(&a), &az + &rho));
        poly.push(Constraint::ge(a, &rho - &az));
    }
    Ok(poly)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaxValue {
    Attained { value: Rational, point: RVector },
    /// `f` grows without bound along `point + λ·ray`.
    Unbounded { point: RVector, ray: RVector },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxResult {
    pub max: MaxValue,
    /// Linear pieces of `f` meeting the domain.
    pub pieces: usize,
}

/// Exact maximum of `f` over a closed polyhedron.
///
/// Neurons are split depth-first: a neuron is branched on only when both of
/// its open sides meet the current region, otherwise its sign is fixed. The
/// affine form of each piece is maximized by LP. Ties go to the
/// lexicographically smallest attaining point among those reported.
pub fn exact_max(net: &TwoLayerScalarNet, domain: &Polyhedron) -> Result<MaxResult, VerificationError> {
    if domain.dim != net.input_dim() {
        return Err(VerificationError::Shape(format!(
            "domain has dimension {}, network input {}",
            domain.dim,
            net.input_dim()
        )));
    }
    domain.check_dims()?;
    if domain.constraints.iter().any(|c| c.relation == Relation::Gt) {
        return Err(VerificationError::StrictDomain);
    }
    let Some(start) = feasible_point(domain)? else {
        return Err(VerificationError::EmptyDomain);
    };
    let mut search = PieceSearch { net, best: None, pieces: 0 };
    let mut active = Vec::with_capacity(net.hidden());
    search.descend(domain, &start, &mut active)?;
    let max = search.best.expect("a nonempty domain has at least one piece");
    Ok(MaxResult { max, pieces: search.pieces })
}

struct PieceSearch<'a> {
    net: &'a TwoLayerScalarNet,
    best: Option<MaxValue>,
    pieces: usize,
}

impl PieceSearch<'_> {
    fn pre(&self, i: usize) -> (RVector, Rational) {
        let b = self.net.b1.as_ref().map_or_else(Rational::zero, |b| b[i].clone());
        (self.net.w1.row_vec(i), b)
    }

    fn descend(&mut self, region: &Polyhedron, witness: &RVector, active: &mut Vec<bool>) -> Result<(), VerificationError> {
        let i = active.len();
        if i == self.net.hidden() {
            return self.leaf(region, active);
        }
        let (w, b) = self.pre(i);
        let at = dot(&w, witness) + &b;
        let side = |sign: i64| {
            let mut p = region.clone();
            let s = int(sign);
            p.push(Constraint::gt(w.iter().map(|v| v * &s).collect(), &b * &s));
            p
        };
        let pos = if at.is_positive() { Some(witness.clone()) } else { feasible_point(&side(1))? };
        let neg_pt = if at.is_negative() { Some(witness.clone()) } else { feasible_point(&side(-1))? };
        let mut branches: Vec<(bool, RVector)> = Vec::new();
        match (pos, neg_pt) {
            (Some(p), Some(n)) => {
                branches.push((true, p));
                branches.push((false, n));
            }
            (Some(p), None) => branches.push((true, p)),
            (None, Some(n)) => branches.push((false, n)),
            (None, None) => branches.push((true, witness.clone())),
        }
        let split = branches.len() == 2;
        for (on, point) in branches {
            let mut next = region.clone();
            if split {
                next.push(if on {
                    Constraint::ge(w.clone(), b.clone())
                } else {
                    Constraint::ge(neg(&w), -b.clone())
                });
            }
            active.push(on);
            self.descend(&next, &point, active)?;
            active.pop();
        }
        Ok(())
    }

    fn leaf(&mut self, region: &Polyhedron, active: &[bool]) -> Result<(), VerificationError> {
        self.pieces += 1;
        let d = self.net.input_dim();
        let mut grad = zero_vec(d);
        let mut offset = self.net.b2.clone().unwrap_or_else(Rational::zero);
        for (i, on) in active.iter().enumerate() {
            if *on {
                let (w, b) = self.pre(i);
                grad = add_scaled(&grad, &self.net.w2[i], &w);
                offset += &self.net.w2[i] * b;
            }
        }
        match maximize(&grad, region)? {
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded { point, ray } => {
                if !matches!(self.best, Some(MaxValue::Unbounded { .. })) {
                    self.best = Some(MaxValue::Unbounded { point, ray });
                }
            }
            LpOutcome::Optimal { point, value } => {
                let value = value + offset;
                debug_assert_eq!(self.net.eval(&point), value);
                let better = match &self.best {
                    None => true,
                    Some(MaxValue::Unbounded { .. }) => false,
                    Some(MaxValue::Attained { value: v, point: p }) => value > *v || (value == *v && point < *p),
                };
                if better {
                    self.best = Some(MaxValue::Attained { value, point });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerificationCertificate {
    /// `point` in the domain with `f(point) = value > t`.
    Violation { point: RVector, value: Rational },
    /// `max f ≤ t`, attained at `point`.
    MaxCertified { value: Rational, point: RVector },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationVerdict {
    pub answer: bool,
    pub certificate: VerificationCertificate,
}

/// Whether `f(x) ≤ t` for every `x` in the domain.
pub fn verify(net: &TwoLayerScalarNet, domain: &Polyhedron, t: &Rational) -> Result<VerificationVerdict, VerificationError> {
    let result = exact_max(net, domain)?;
    let verdict = match result.max {
        MaxValue::Attained { value, point } => {
            if value > *t {
                VerificationVerdict { answer: false, certificate: VerificationCertificate::Violation { point, value } }
            } else {
                VerificationVerdict { answer: true, certificate: VerificationCertificate::MaxCertified { value, point } }
            }
        }
        MaxValue::Unbounded { point, ray } => {
            let point = escape_along_ray(net, &point, &ray, t);
            let value = net.eval(&point);
            VerificationVerdict { answer: false, certificate: VerificationCertificate::Violation { point, value } }
        }
    };
    if let VerificationCertificate::Violation { point, value } = &verdict.certificate {
        debug_assert!(domain.contains(point) && value > t);
    }
    Ok(verdict)
}

/// `p + λr` with `f > t`; `f` is affine with positive slope along the ray
/// from `p`, so doubling `λ` terminates.
fn escape_along_ray(net: &TwoLayerScalarNet, p: &[Rational], r: &[Rational], t: &Rational) -> RVector {
    let mut step = Rational::one();
    loop {
        let q = add_scaled(p, &step, r);
        if net.eval(&q) > *t {
            return q;
        }
        step = &step * int(2);
    }
}

/// Componentwise check `f_j(x) ≤ t_j` for a network with one hidden ReLU
/// layer and an affine output layer, one scalar verification per output.
pub fn verify_componentwise(
    hidden: &AffineLayer,
    output: &AffineLayer,
    domain: &Polyhedron,
    thresholds: &[Rational],
) -> Result<Vec<VerificationVerdict>, VerificationError> {
    if thresholds.len() != output.output_dim() {
        return Err(VerificationError::Shape(format!(
            "{} thresholds for {} outputs",
            thresholds.len(),
            output.output_dim()
        )));
    }
    let mut out = Vec::with_capacity(thresholds.len());
    for (j, t) in thresholds.iter().enumerate() {
        let net = TwoLayerScalarNet::with_biases(
            hidden.weights.clone(),
            output.weights.row_vec(j),
            Some(hidden.bias.clone()),
            Some(output.bias[j].clone()),
        )?;
        out.push(verify(&net, domain, t)?);
    }
    Ok(out)
}

/// Embeds a bias-free positivity instance on `ℝᵏ` into a verification
/// instance on `ℝᵈ`: `g(x) = v·[W·A(x − z)]_+ + t`, where `A` maps the
/// subspace to basis coordinates. Then `g(z + y) > t` iff `f₀(A y) > 0`.
pub fn build_verification_instance(
    positive: &TwoLayerScalarNet,
    center: &[Rational],
    basis: &[RVector],
    t: &Rational,
) -> Result<TwoLayerScalarNet, VerificationError> {
    let d = center.len();
    if basis.len() != positive.input_dim() {
        return Err(VerificationError::Shape(format!(
            "basis has {} vectors, positivity instance has input dimension {}",
            basis.len(),
            positive.input_dim()
        )));
    }
    let coords = basis_coordinates(basis, d)?;
    let w1 = positive.w1.mul(&coords);
    let b1 = neg(&w1.mul_vec(center));
    Ok(TwoLayerScalarNet::with_biases(w1, positive.w2.clone(), Some(b1), Some(t.clone()))?)
}

/// `z + U c` for basis coordinates `c`.
pub fn from_coordinates(center: &[Rational], basis: &[RVector], c: &[Rational]) -> RVector {
    let mut x = center.to_vec();
    for (ci, u) in c.iter().zip(basis) {
        x = add_scaled(&x, ci, u);
    }
    x
}

/// Basis coordinates of `x − z`.
pub fn to_coordinates(center: &[Rational], basis: &[RVector], x: &[Rational]) -> Result<RVector, VerificationError> {
    let coords = basis_coordinates(basis, center.len())?;
    Ok(coords.mul_vec(&sub(x, center)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qvec, ratio};
    use crate::lp::Polyhedron;

    fn net(rows: &[&[i64]], w2: &[i64]) -> TwoLayerScalarNet {
        TwoLayerScalarNet::new(RMatrix::from_i64(rows), qvec(w2)).unwrap()
    }

    fn interval(lo: i64, hi: i64) -> Polyhedron {
        Polyhedron::cube(1, &int(lo), &int(hi))
    }

    #[test]
    fn max_examples() {
        let r = exact_max(&net(&[&[1]], &[1]), &interval(-1, 1)).unwrap();
        assert_eq!(r.max, MaxValue::Attained { value: int(1), point: qvec(&[1]) });

        let mut half_line = Polyhedron::new(1);
        half_line.push(Constraint::ge(qvec(&[1]), int(0)));
        let r = exact_max(&net(&[&[1], &[-1]], &[1, -1]), &half_line).unwrap();
        assert!(matches!(r.max, MaxValue::Unbounded { .. }));

        let k3 = net(&[&[1, -1, 0], &[-1, 1, 0], &[1, 0, -1], &[-1, 0, 1], &[0, 1, -1], &[0, -1, 1]], &[1; 6]);
        let r = exact_max(&k3, &Polyhedron::cube(3, &int(0), &int(1))).unwrap();
        match r.max {
            MaxValue::Attained { value, point } => {
                assert_eq!(value, int(2));
                assert_eq!(k3.eval(&point), int(2));
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut empty = Polyhedron::new(1);
        empty.push(Constraint::ge(qvec(&[1]), int(-2)));
        empty.push(Constraint::ge(qvec(&[-1]), int(1)));
        assert_eq!(exact_max(&net(&[&[1]], &[1]), &empty), Err(VerificationError::EmptyDomain));
    }

    #[test]
    fn verify_examples() {
        let relu = net(&[&[1]], &[1]);
        assert!(verify(&relu, &interval(-1, 1), &int(1)).unwrap().answer);
        let v = verify(&relu, &interval(-1, 1), &ratio(1, 2)).unwrap();
        assert_eq!(v.certificate, VerificationCertificate::Violation { point: qvec(&[1]), value: int(1) });
        assert!(verify(&net(&[&[0, 0]], &[1]), &Polyhedron::cube(2, &int(-3), &int(3)), &int(0)).unwrap().answer);

        let mut half_line = Polyhedron::new(1);
        half_line.push(Constraint::ge(qvec(&[1]), int(0)));
        let v = verify(&net(&[&[1], &[-1]], &[1, -1]), &half_line, &int(100)).unwrap();
        match v.certificate {
            VerificationCertificate::Violation { value, point } => {
                assert!(value > int(100));
                assert!(half_line.contains(&point));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn build_examples() {
        let identity = net(&[&[1], &[-1]], &[1, -1]);
        let g = build_verification_instance(&identity, &qvec(&[0]), &[qvec(&[1])], &int(0)).unwrap();
        for x in [-2, 0, 3] {
            assert_eq!(g.eval(&qvec(&[x])), int(x));
        }
        assert!(!verify(&g, &interval(-1, 1), &int(0)).unwrap().answer);

        let abs = net(&[&[1], &[-1]], &[-1, -1]);
        let g = build_verification_instance(&abs, &qvec(&[2, 1]), &[qvec(&[1, 1])], &int(5)).unwrap();
        let ball = InputDomain::BallInSubspace { center: qvec(&[2, 1]), basis: vec![qvec(&[1, 1])], radius: int(1) };
        let v = verify(&g, &ball.polyhedron().unwrap(), &int(5)).unwrap();
        assert_eq!(v.certificate, VerificationCertificate::MaxCertified { value: int(5), point: qvec(&[2, 1]) });

        assert_eq!(
            build_verification_instance(&identity, &qvec(&[0, 0]), &[qvec(&[1, 1]), qvec(&[2, 2])], &int(0)),
            Err(VerificationError::Shape("basis has 2 vectors, positivity instance has input dimension 1".into()))
        );
        assert_eq!(basis_coordinates(&[qvec(&[1, 1]), qvec(&[2, 2])], 2), Err(VerificationError::DependentBasis));
    }

    #[test]
    fn box_stays_in_ball() {
        let center = qvec(&[1, 0, -1]);
        let basis = vec![qvec(&[1, 2, 0]), qvec(&[0, 1, 1])];
        let poly = inscribed_box(&center, &basis, &int(1)).unwrap();
        let corner = from_coordinates(&center, &basis, &[ratio(1, 10), ratio(-1, 10)]);
        assert!(poly.contains(&corner));
        let back = to_coordinates(&center, &basis, &corner).unwrap();
        assert_eq!(back, vec![ratio(1, 10), ratio(-1, 10)]);
        assert!(!poly.contains(&from_coordinates(&center, &basis, &[int(1), int(0)])));
    }

    #[test]
    fn componentwise_loops_over_outputs() {
        let hidden = AffineLayer::new(RMatrix::from_i64(&[&[1], &[-1]]), qvec(&[0, 0])).unwrap();
        let output = AffineLayer::new(RMatrix::from_i64(&[&[1, 0], &[0, 1]]), qvec(&[0, 0])).unwrap();
        let v = verify_componentwise(&hidden, &output, &interval(-2, 1), &[int(1), int(1)]).unwrap();
        assert!(v[0].answer);
        assert!(!v[1].answer);
    }
}
