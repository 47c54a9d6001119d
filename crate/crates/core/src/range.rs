//! Range questions for two-layer scalar networks `f(x) = v·[Wx + b]_+ + c`.
//!
//! The bias-free part `f₀(x) = v·[Wx]_+` is positively homogeneous, so its
//! sign pattern is decided on the rays of the arrangement of `W`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arrangement::{enumerate_rays, quotient_lineality, AffineLayer, ArrangementError, LayeredNetwork};
use crate::exact::{
    add_scaled, dot, is_zero_vec, kernel_of_rows, neg, primitive_direction, rank_of_rows, relu,
    scale, zero_vec, RMatrix, RVector, Rational,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("network shape: {0}")]
    Shape(String),
    #[error("zero-map search hit a point where f vanishes on both sides of a bend; this contradicts the construction")]
    ProofViolation,
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// `f(x) = v·[Wx + b]_+ + c` with `n ≥ 1` hidden neurons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoLayerScalarNet {
    pub w1: RMatrix,
    pub w2: RVector,
    pub b1: Option<RVector>,
    pub b2: Option<Rational>,
}

impl TwoLayerScalarNet {
    pub fn new(w1: RMatrix, w2: RVector) -> Result<Self, RangeError> {
        Self::with_biases(w1, w2, None, None)
    }

    pub fn with_biases(
        w1: RMatrix,
        w2: RVector,
        b1: Option<RVector>,
        b2: Option<Rational>,
    ) -> Result<Self, RangeError> {
        if w1.rows() == 0 {
            return Err(RangeError::Shape("need at least one hidden neuron".into()));
        }
        if w2.len() != w1.rows() {
            return Err(RangeError::Shape(format!(
                "output weights have length {}, hidden layer has {} neurons",
                w2.len(),
                w1.rows()
            )));
        }
        if let Some(b) = &b1 {
            if b.len() != w1.rows() {
                return Err(RangeError::Shape(format!("hidden bias has length {}", b.len())));
            }
        }
        Ok(TwoLayerScalarNet { w1, w2, b1, b2 })
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.rows()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut pre = self.w1.mul_vec(x);
        if let Some(b) = &self.b1 {
            for (p, bi) in pre.iter_mut().zip(b) {
                *p += bi;
            }
        }
        let out: Rational = pre.iter().zip(&self.w2).map(|(p, v)| relu(p) * v).sum();
        match &self.b2 {
            Some(c) => out + c,
            None => out,
        }
    }

    /// `f₀(x) = v·[Wx]_+`.
    pub fn eval_homogeneous(&self, x: &[Rational]) -> Rational {
        self.w1.mul_vec(x).iter().zip(&self.w2).map(|(p, v)| relu(p) * v).sum()
    }

    pub fn without_biases(&self) -> Self {
        TwoLayerScalarNet { w1: self.w1.clone(), w2: self.w2.clone(), b1: None, b2: None }
    }

    pub fn negated(&self) -> Self {
        TwoLayerScalarNet {
            w1: self.w1.clone(),
            w2: neg(&self.w2),
            b1: self.b1.clone(),
            b2: self.b2.as_ref().map(|c| -c.clone()),
        }
    }
}

impl TwoLayerScalarNet {
    /// As a network with one hidden layer and a one-row output layer.
    pub fn to_network(&self) -> LayeredNetwork {
        let n = self.hidden();
        let hidden = AffineLayer {
            weights: self.w1.clone(),
            bias: self.b1.clone().unwrap_or_else(|| zero_vec(n)),
        };
        let output = AffineLayer {
            weights: RMatrix::from_rows(vec![self.w2.clone()], n).expect("width n"),
            bias: vec![self.b2.clone().unwrap_or_else(Rational::zero)],
        };
        LayeredNetwork { hidden: vec![hidden], output: Some(output) }
    }

    /// Inverse of [`TwoLayerScalarNet::to_network`]; zero biases become `None`.
    pub fn from_network(net: &LayeredNetwork) -> Result<Self, RangeError> {
        let (hidden, output) = match (net.hidden.as_slice(), &net.output) {
            ([h], Some(o)) if o.output_dim() == 1 => (h, o),
            _ => {
                return Err(RangeError::Shape(
                    "expected one hidden ReLU layer followed by a single linear output".into(),
                ))
            }
        };
        let b1 = (!is_zero_vec(&hidden.bias)).then(|| hidden.bias.clone());
        let b2 = (!output.bias[0].is_zero()).then(|| output.bias[0].clone());
        Self::with_biases(hidden.weights.clone(), output.weights.row_vec(0), b1, b2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZeroMapVerdict {
    Zero,
    /// `x*` with `f₀(x*) ≠ 0`.
    Nonzero(RVector),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeCertificate {
    /// `f₀(r) > 0`.
    PositiveRay(RVector),
    /// `f₀(positive) > 0` and `f₀(negative) < 0`.
    RayPair { positive: RVector, negative: RVector },
    /// Every ray generator evaluates to `≤ 0` (`rays` of them; zero when the
    /// map is constant on a line).
    SignUniform { rays: usize },
    ZeroMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeVerdict {
    pub answer: bool,
    pub certificate: RangeCertificate,
}

/// Groups rows by open ray: `Σ v_i [w_i·x]_+ = Σ_ray c·[u·x]_+` with `u`
/// primitive. Rays with net coefficient zero are dropped.
fn merged_rays(net: &TwoLayerScalarNet) -> BTreeMap<RVector, Rational> {
    let mut rays: BTreeMap<RVector, Rational> = BTreeMap::new();
    for (row, v) in net.w1.row_iter().zip(&net.w2) {
        if v.is_zero() || is_zero_vec(row) {
            continue;
        }
        let u = primitive_direction(row);
        let k = u.iter().zip(row).find(|(a, _)| !a.is_zero()).map(|(a, b)| b / a).expect("nonzero row");
        *rays.entry(u).or_insert_with(Rational::zero) += k * v;
    }
    rays.retain(|_, c| !c.is_zero());
    rays
}

/// Decides whether `f₀` vanishes identically; otherwise returns a point
/// where it does not. Biases are ignored.
pub fn zero_map_check(net: &TwoLayerScalarNet) -> Result<ZeroMapVerdict, RangeError> {
    let d = net.input_dim();
    let rays = merged_rays(net);
    let unmatched = rays.iter().find(|(u, c)| rays.get(&neg(u)) != Some(&-(*c).clone()));
    let Some((u, _)) = unmatched else {
        // Linear: c[u·x]_+ − c[−u·x]_+ = c·u·x, each pair seen twice.
        let mut grad = zero_vec(d);
        for (u, c) in &rays {
            grad = add_scaled(&grad, c, u);
        }
        if is_zero_vec(&grad) {
            return Ok(ZeroMapVerdict::Zero);
        }
        debug_assert!(net.eval_homogeneous(&grad).is_positive());
        return Ok(ZeroMapVerdict::Nonzero(grad));
    };
    let wj = u.clone();
    let others: Vec<&RVector> =
        rays.keys().filter(|r| rank_of_rows(&[r.as_slice(), wj.as_slice()], d) == 2).collect();
    let x = point_on_hyperplane_off_others(&wj, &others, d);
    let mut eps = Rational::one();
    let half = Rational::new(1.into(), 2.into());
    for r in &others {
        let across = dot(r, &wj);
        if across.is_zero() {
            continue;
        }
        let bound = &half * (dot(r, &x).abs() / across.abs());
        if bound < eps {
            eps = bound;
        }
    }
    for candidate in [add_scaled(&x, &eps, &wj), add_scaled(&x, &-eps.clone(), &wj), x.clone()] {
        if !net.eval_homogeneous(&candidate).is_zero() {
            return Ok(ZeroMapVerdict::Nonzero(candidate));
        }
    }
    Err(RangeError::ProofViolation)
}

/// `x` with `w·x = 0` and `r·x ≠ 0` for each `r` in `avoid` (all of which
/// are non-collinear with `w`). Integer combinations of a kernel basis are
/// tried in growing boxes, lexicographically within each box.
fn point_on_hyperplane_off_others(w: &[Rational], avoid: &[&RVector], d: usize) -> RVector {
    let basis = kernel_of_rows(&[w], d);
    if avoid.is_empty() || basis.is_empty() {
        return zero_vec(d);
    }
    let k = basis.len();
    for radius in 1i64.. {
        let side = (2 * radius + 1) as usize;
        for idx in 0..side.pow(k as u32) {
            let mut rem = idx;
            let coeffs: Vec<i64> = (0..k)
                .map(|_| {
                    let c = (rem % side) as i64 - radius;
                    rem /= side;
                    c
                })
                .collect();
            if coeffs.iter().all(|c| c.abs() < radius) {
                continue;
            }
            let mut x = zero_vec(d);
            for (c, b) in coeffs.iter().zip(&basis) {
                x = add_scaled(&x, &Rational::from_integer((*c).into()), b);
            }
            if avoid.iter().all(|r| !dot(r, &x).is_zero()) {
                return x;
            }
        }
    }
    unreachable!("the avoided set is a finite union of proper subspaces")
}

/// Whether `f₀` takes a positive value. Biases are ignored.
///
/// The common kernel of the hidden rows is factored out first; on the
/// quotient the fan is pointed and `f₀` is positive somewhere iff it is
/// positive on some ray generator. The first positive generator in
/// canonical order is reported, lifted back to the input space.
pub fn positivity(net: &TwoLayerScalarNet) -> Result<RangeVerdict, RangeError> {
    let q = quotient_lineality(&net.w1);
    if q.reduced_dim() == 0 {
        return Ok(RangeVerdict { answer: false, certificate: RangeCertificate::SignUniform { rays: 0 } });
    }
    let rays = enumerate_rays(&q.reduced)?;
    for ray in &rays {
        let r = q.lift_point(&ray.direction);
        if net.eval_homogeneous(&r).is_positive() {
            return Ok(RangeVerdict { answer: true, certificate: RangeCertificate::PositiveRay(r) });
        }
    }
    Ok(RangeVerdict { answer: false, certificate: RangeCertificate::SignUniform { rays: rays.len() } })
}

/// Whether `f` is onto `ℝ`. Depends only on the bias-free part.
pub fn surjectivity(net: &TwoLayerScalarNet) -> Result<RangeVerdict, RangeError> {
    let f0 = net.without_biases();
    let x_star = match zero_map_check(&f0)? {
        ZeroMapVerdict::Zero => {
            return Ok(RangeVerdict { answer: false, certificate: RangeCertificate::ZeroMap })
        }
        ZeroMapVerdict::Nonzero(x) => x,
    };
    let flipped = f0.eval_homogeneous(&x_star).is_positive();
    let g = if flipped { f0.negated() } else { f0.clone() };
    let verdict = positivity(&g)?;
    let RangeCertificate::PositiveRay(r) = verdict.certificate else {
        return Ok(verdict);
    };
    let (positive, negative) = if flipped { (x_star, r) } else { (r, x_star) };
    debug_assert!(f0.eval_homogeneous(&positive).is_positive());
    debug_assert!(f0.eval_homogeneous(&negative).is_negative());
    Ok(RangeVerdict { answer: true, certificate: RangeCertificate::RayPair { positive, negative } })
}

/// Rescales rows so output weights are `±1`, dropping zero-weight rows.
pub fn normalize_output_weights(net: &TwoLayerScalarNet) -> TwoLayerScalarNet {
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    for (i, v) in net.w2.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        rows.push(scale(net.w1.row(i), &v.abs()));
        weights.push(if v.is_positive() { Rational::one() } else { -Rational::one() });
        if let Some(b) = &net.b1 {
            bias.push(&b[i] * v.abs());
        }
    }
    let d = net.input_dim();
    if rows.is_empty() {
        rows.push(zero_vec(d));
        weights.push(Rational::one());
        bias.push(Rational::zero());
    }
    TwoLayerScalarNet {
        w1: RMatrix::from_rows(rows, d).expect("rows have width d"),
        w2: weights,
        b1: net.b1.as_ref().map(|_| bias),
        b2: net.b2.clone(),
    }
}
