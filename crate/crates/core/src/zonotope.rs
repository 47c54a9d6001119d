//! Zonotopes anchored at the origin: `Z(G) = {Gᵀλ : λ ∈ [0,1]ⁿ}`.
//!
//! Containment reduces to positivity of `x ↦ h_inner(x) − h_outer(x)`,
//! which is a two-layer network with output weights `±1`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arrangement::{enumerate_cells, ReluLayer, Sign};
use crate::exact::{dot, is_zero_vec, relu, zero_vec, RMatrix, RVector, Rational};
use crate::lp::{is_feasible, Constraint, Polyhedron};
use crate::range::{positivity, RangeCertificate, RangeError, TwoLayerScalarNet};

pub const VERTEX_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZonotopeError {
    #[error("zonotope needs dimension >= 1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{generators} generators exceed the vertex enumeration cap of {cap}")]
    CapExceeded { generators: usize, cap: usize },
    #[error(transparent)]
    Range(#[from] RangeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zonotope {
    /// One generator per row.
    generators: RMatrix,
}

impl Zonotope {
    pub fn new(generators: RMatrix) -> Result<Self, ZonotopeError> {
        if generators.cols() == 0 {
            return Err(ZonotopeError::ZeroDimension);
        }
        Ok(Zonotope { generators })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Zonotope::new(RMatrix::from_i64(rows)).expect("nonempty rows")
    }

    pub fn generators(&self) -> &RMatrix {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators.cols()
    }

    pub fn len(&self) -> usize {
        self.generators.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, got: usize) -> Result<(), ZonotopeError> {
        if got != self.dim() {
            return Err(ZonotopeError::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }
}

/// `h_Z(x) = max_{y∈Z} x·y = Σ [g_i·x]_+`.
pub fn support(z: &Zonotope, x: &[Rational]) -> Result<Rational, ZonotopeError> {
    z.check(x.len())?;
    Ok(z.generators.row_iter().map(|g| relu(&dot(g, x))).sum())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Containment {
    pub contained: bool,
    /// `x` with `h_inner(x) > h_outer(x)` when not contained.
    pub separating_direction: Option<RVector>,
}

/// Whether `inner ⊆ outer`.
pub fn contains(outer: &Zonotope, inner: &Zonotope) -> Result<Containment, ZonotopeError> {
    outer.check(inner.dim())?;
    let d = outer.dim();
    let rows: Vec<RVector> = inner.generators.to_rows().into_iter().chain(outer.generators.to_rows()).collect();
    if rows.is_empty() {
        return Ok(Containment { contained: true, separating_direction: None });
    }
    let mut weights = vec![Rational::one(); inner.len()];
    weights.extend(vec![-Rational::one(); outer.len()]);
    let net = TwoLayerScalarNet::new(RMatrix::from_rows(rows, d).expect("width d"), weights)?;
    let verdict = positivity(&net)?;
    match verdict.certificate {
        RangeCertificate::PositiveRay(r) => {
            debug_assert!(support(inner, &r)? > support(outer, &r)?);
            Ok(Containment { contained: false, separating_direction: Some(r) })
        }
        _ => Ok(Containment { contained: true, separating_direction: None }),
    }
}

/// LP feasibility of `{λ ∈ [0,1]ⁿ : Gᵀλ = p}`.
pub fn membership(z: &Zonotope, p: &[Rational]) -> Result<bool, ZonotopeError> {
    z.check(p.len())?;
    let n = z.len();
    if n == 0 {
        return Ok(is_zero_vec(p));
    }
    let mut poly = Polyhedron::new(n);
    for i in 0..n {
        let mut e = zero_vec(n);
        e[i] = Rational::one();
        poly.push(Constraint::ge(e.clone(), Rational::zero()));
        e[i] = -Rational::one();
        poly.push(Constraint::ge(e, Rational::one()));
    }
    for k in 0..z.dim() {
        let column: RVector = (0..n).map(|i| z.generators.get(i, k).clone()).collect();
        poly.push(Constraint::eq(column, -p[k].clone()));
    }
    Ok(is_feasible(&poly).expect("dimensions agree"))
}

/// Extreme points, sorted.
///
/// A corner `Σ_{i∈S} g_i` of the cube image is a vertex iff some direction is
/// strictly positive on `S` and strictly negative on the other nonzero
/// generators. Such sign patterns are the cells of the central arrangement of
/// the generators, so the corners are filtered by enumerating those cells
/// instead of testing all `2ⁿ` of them.
pub fn vertices(z: &Zonotope) -> Result<Vec<RVector>, ZonotopeError> {
    if z.len() > VERTEX_CAP {
        return Err(ZonotopeError::CapExceeded { generators: z.len(), cap: VERTEX_CAP });
    }
    let d = z.dim();
    let nonzero: Vec<RVector> = z.generators.row_iter().filter(|g| !is_zero_vec(g)).map(<[_]>::to_vec).collect();
    if nonzero.is_empty() {
        return Ok(vec![zero_vec(d)]);
    }
    let layer = ReluLayer::homogeneous(RMatrix::from_rows(nonzero.clone(), d).expect("width d"))
        .expect("nonempty, positive dimension");
    let mut out = BTreeSet::new();
    for cell in enumerate_cells(&layer) {
        let mut v = zero_vec(d);
        for (g, s) in nonzero.iter().zip(&cell.signs) {
            if *s == Sign::Pos {
                v = v.iter().zip(g).map(|(a, b)| a + b).collect();
            }
        }
        out.insert(v);
    }
    Ok(out.into_iter().collect())
}

/// Containment decided by testing every vertex of `inner` for membership in
/// `outer`. Independent of [`contains`]; meant for cross-checks.
pub fn contains_by_vertices(outer: &Zonotope, inner: &Zonotope) -> Result<bool, ZonotopeError> {
    outer.check(inner.dim())?;
    for v in vertices(inner)? {
        if !membership(outer, &v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Unit cube in `d` dimensions.
pub fn unit_cube(d: usize) -> Zonotope {
    let rows: Vec<RVector> = (0..d).map(|i| crate::exact::unit_vec(d, i)).collect();
    Zonotope::new(RMatrix::from_rows(rows, d).expect("width d")).expect("d >= 1")
}

/// True when `h_inner(x) > h_outer(x)`.
pub fn separates(outer: &Zonotope, inner: &Zonotope, x: &[Rational]) -> Result<bool, ZonotopeError> {
    Ok((support(inner, x)? - support(outer, x)?).is_positive())
}
