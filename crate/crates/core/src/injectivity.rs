//! Injectivity of ReLU layers and small deep networks.
//!
//! A layer `x ↦ [Wx + b]_+` is injective exactly when every cell activates a
//! set of rows of full rank `d`. [`injective_oracle`] checks this cell by
//! cell; [`layer_injectivity`] searches for a rank-deficient cell by
//! branching on at most `d + 1` covering neurons per step.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arrangement::{
    enumerate_cells, enumerate_regions, region_polyhedron, ArrangementError, LayeredNetwork,
    ReluLayer, Sign,
};
use crate::exact::{
    add_scaled, dot, in_span, int, kernel_of_rows, neg, rank, rank_of_rows, sub, unit_vec,
    zero_vec, RVector, Rational,
};
use crate::lp::{feasible_point, helly_cover, Constraint, LpError, Polyhedron};

pub const DEFAULT_NEURON_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InjectivityError {
    #[error("network has {neurons} hidden neurons, above the cap of {cap}")]
    CapExceeded { neurons: usize, cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// Two distinct inputs with the same image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub first: RVector,
    pub second: RVector,
    pub image: RVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InjectivityCertificate {
    /// A point whose active rows (`w_i·x + b_i ≥ 0`) have rank below `d`.
    NonInjectiveWitness { point: RVector, active: Vec<usize>, rank: usize, collision: Collision },
    /// Two regions of a deep network and a collision between them.
    RegionCollision { regions: (Vec<Vec<Sign>>, Vec<Vec<Sign>>), collision: Collision },
    /// Nothing found after examining `examined` cells, search nodes or
    /// region pairs.
    InjectiveExhausted { examined: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectivityVerdict {
    pub injective: bool,
    pub certificate: InjectivityCertificate,
    /// Cells scanned, search-tree nodes visited, or region pairs tested.
    pub examined: usize,
}

impl InjectivityVerdict {
    pub fn witness_point(&self) -> Option<&RVector> {
        match &self.certificate {
            InjectivityCertificate::NonInjectiveWitness { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn collision(&self) -> Option<&Collision> {
        match &self.certificate {
            InjectivityCertificate::NonInjectiveWitness { collision, .. }
            | InjectivityCertificate::RegionCollision { collision, .. } => Some(collision),
            InjectivityCertificate::InjectiveExhausted { .. } => None,
        }
    }
}

/// `Σ_{k=0..d} (d+1)^k`, the size bound on the find-cell search tree.
pub fn search_tree_bound(d: usize) -> u128 {
    let base = d as u128 + 1;
    (0..=d as u32).map(|k| base.pow(k)).sum()
}

fn witness_verdict(layer: &ReluLayer, point: RVector, examined: usize) -> InjectivityVerdict {
    let active = layer.active_set(&point);
    let rows: Vec<&[Rational]> = active.iter().map(|&i| layer.row(i)).collect();
    let rank = rank_of_rows(&rows, layer.input_dim());
    let collision = verify_noninjectivity_witness(layer, &point)
        .expect("witness points always have rank-deficient active rows");
    InjectivityVerdict {
        injective: false,
        certificate: InjectivityCertificate::NonInjectiveWitness { point, active, rank, collision },
        examined,
    }
}

fn injective_verdict(examined: usize) -> InjectivityVerdict {
    InjectivityVerdict {
        injective: true,
        certificate: InjectivityCertificate::InjectiveExhausted { examined },
        examined,
    }
}

/// Cell-by-cell rank check. Exponential in `m`; the witness is the first
/// deficient cell in canonical order.
pub fn injective_oracle(layer: &ReluLayer) -> InjectivityVerdict {
    let d = layer.input_dim();
    let cells = enumerate_cells(layer);
    for (k, cell) in cells.iter().enumerate() {
        let rows: Vec<&[Rational]> = cell
            .signs
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Sign::Pos)
            .map(|(i, _)| layer.row(i))
            .collect();
        if rank_of_rows(&rows, d) < d {
            return witness_verdict(layer, cell.witness.clone(), k + 1);
        }
    }
    injective_verdict(cells.len())
}

/// Branching search for a rank-deficient cell.
pub fn layer_injectivity(layer: &ReluLayer) -> Result<InjectivityVerdict, InjectivityError> {
    let d = layer.input_dim();
    if rank(layer.weights()) < d {
        return Ok(witness_verdict(layer, zero_vec(d), 0));
    }
    let mut all_off = Polyhedron::new(d);
    for i in 0..layer.neurons() {
        all_off.push(layer.strict_side(i, Sign::Neg));
    }
    if let Some(x) = feasible_point(&all_off)? {
        return Ok(witness_verdict(layer, x, 0));
    }
    let rows: Vec<(RVector, Rational)> =
        (0..layer.neurons()).map(|i| (layer.row(i).to_vec(), layer.bias()[i].clone())).collect();
    let mut search = FindCell { rows: &rows, d, nodes: 0 };
    let remaining: Vec<usize> = (0..rows.len()).collect();
    let found = search.run(&[], &remaining)?;
    let nodes = search.nodes;
    debug_assert!(nodes as u128 <= search_tree_bound(d));
    Ok(match found {
        Some(x) => witness_verdict(layer, x, nodes),
        None => injective_verdict(nodes),
    })
}

/// One step of the branching search, exposed for direct use: looks for `x`
/// with `c_i·x + p_i ≥ 0` for every active pair and
/// `rank(C ∪ {m_i : m_i·x + b_i ≥ 0}) < d`.
pub fn find_cell(
    active: &[(RVector, Rational)],
    remaining: &[(RVector, Rational)],
    d: usize,
) -> Result<Option<RVector>, LpError> {
    let rows: Vec<(RVector, Rational)> = active.iter().chain(remaining).cloned().collect();
    let c: Vec<usize> = (0..active.len()).collect();
    let m: Vec<usize> = (active.len()..rows.len()).collect();
    FindCell { rows: &rows, d, nodes: 0 }.run(&c, &m)
}

struct FindCell<'a> {
    rows: &'a [(RVector, Rational)],
    d: usize,
    nodes: usize,
}

impl FindCell<'_> {
    fn run(&mut self, active: &[usize], remaining: &[usize]) -> Result<Option<RVector>, LpError> {
        self.nodes += 1;
        let d = self.d;
        let c_rows: Vec<&[Rational]> = active.iter().map(|&i| self.rows[i].0.as_slice()).collect();
        if rank_of_rows(&c_rows, d) == d {
            return Ok(None);
        }
        let span: Vec<RVector> = c_rows.iter().map(|r| r.to_vec()).collect();
        let kept: Vec<usize> =
            remaining.iter().copied().filter(|&i| !in_span(&self.rows[i].0, &span)).collect();

        let mut region = Polyhedron::new(d);
        for &i in active {
            let (w, b) = &self.rows[i];
            region.push(Constraint::ge(w.clone(), b.clone()));
        }
        let mut probe = region.clone();
        for &i in &kept {
            let (w, b) = &self.rows[i];
            probe.push(Constraint::gt(neg(w), -b.clone()));
        }
        if let Some(x) = feasible_point(&probe)? {
            return Ok(Some(x));
        }
        if kept.is_empty() {
            return Ok(None);
        }
        let halfspaces: Vec<(RVector, Rational)> = kept.iter().map(|&i| self.rows[i].clone()).collect();
        let mut cover = helly_cover(&region, &halfspaces)?;
        cover.sort_unstable();
        for k in cover {
            let chosen = kept[k];
            let mut next_active = active.to_vec();
            next_active.push(chosen);
            let next_remaining: Vec<usize> = kept.iter().copied().filter(|&i| i != chosen).collect();
            if let Some(x) = self.run(&next_active, &next_remaining)? {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}

/// If the rows active at `x` have rank below `d`, returns a collision
/// `(x, x + λ·v)` with `v` in their common kernel.
pub fn verify_noninjectivity_witness(layer: &ReluLayer, x: &[Rational]) -> Option<Collision> {
    let d = layer.input_dim();
    if x.len() != d {
        return None;
    }
    let pre = layer.pre_activation(x);
    let active: Vec<usize> = (0..layer.neurons()).filter(|&i| !pre[i].is_negative()).collect();
    let rows: Vec<&[Rational]> = active.iter().map(|&i| layer.row(i)).collect();
    let kernel = if rows.is_empty() { vec![unit_vec(d, 0)] } else { kernel_of_rows(&rows, d) };
    let mut dir = kernel.into_iter().next()?;
    let inactive: Vec<usize> = (0..layer.neurons()).filter(|&i| pre[i].is_negative()).collect();
    let drift: Rational = inactive.iter().map(|&i| dot(layer.row(i), &dir)).sum();
    if drift.is_positive() {
        dir = neg(&dir);
    }
    let half = Rational::new(1.into(), 2.into());
    let mut step = Rational::one();
    let second = loop {
        let y = add_scaled(x, &step, &dir);
        let ok = inactive.iter().all(|&i| !(dot(layer.row(i), &y) + &layer.bias()[i]).is_positive());
        if ok {
            break y;
        }
        step *= &half;
    };
    let image = layer.eval(x);
    debug_assert_eq!(image, layer.eval(&second));
    debug_assert!(sub(&second, x).iter().any(|v| !v.is_zero()));
    Some(Collision { first: x.to_vec(), second, image })
}

/// Searches `x ∈ P_{s1}`, `x′ ∈ P_{s2}` with equal images and `x ≠ x′`, one
/// strict LP per coordinate and direction.
pub fn deep_collision_check(
    net: &LayeredNetwork,
    s1: &[Vec<Sign>],
    s2: &[Vec<Sign>],
) -> Result<Option<Collision>, InjectivityError> {
    let d = net.input_dim();
    let (p1, g1) = region_polyhedron(net, s1)?;
    let (p2, g2) = region_polyhedron(net, s2)?;
    let mut base = Polyhedron::new(2 * d);
    let lift = |c: &Constraint, shift: usize| {
        let mut normal = zero_vec(2 * d);
        for (j, v) in c.normal.iter().enumerate() {
            normal[shift + j] = v.clone();
        }
        Constraint { normal, offset: c.offset.clone(), relation: c.relation }
    };
    for c in &p1.constraints {
        base.push(lift(c, 0));
    }
    for c in &p2.constraints {
        base.push(lift(c, d));
    }
    for r in 0..g1.matrix.rows() {
        let mut normal = g1.matrix.row_vec(r);
        normal.extend(neg(g2.matrix.row(r)));
        base.push(Constraint::eq(normal, &g1.offset[r] - &g2.offset[r]));
    }
    for k in 0..d {
        for sign in [int(1), int(-1)] {
            let mut normal = zero_vec(2 * d);
            normal[k] = sign.clone();
            normal[d + k] = -sign;
            let mut probe = base.clone();
            probe.push(Constraint::gt(normal, Rational::zero()));
            if let Some(z) = feasible_point(&probe)? {
                let first = z[..d].to_vec();
                let second = z[d..].to_vec();
                let image = net.eval(&first);
                debug_assert_eq!(image, net.eval(&second));
                return Ok(Some(Collision { first, second, image }));
            }
        }
    }
    Ok(None)
}

/// Tests every pair of nonempty regions (including each region with
/// itself). Exponential; refuses networks with more than `cap` hidden
/// neurons.
pub fn deep_injectivity_bruteforce(
    net: &LayeredNetwork,
    cap: usize,
) -> Result<InjectivityVerdict, InjectivityError> {
    let neurons = net.hidden_neurons();
    if neurons > cap {
        return Err(InjectivityError::CapExceeded { neurons, cap });
    }
    let regions = enumerate_regions(net)?;
    let mut examined = 0;
    for (i, r1) in regions.iter().enumerate() {
        for r2 in &regions[i..] {
            examined += 1;
            if let Some(collision) = deep_collision_check(net, r1, r2)? {
                return Ok(InjectivityVerdict {
                    injective: false,
                    certificate: InjectivityCertificate::RegionCollision {
                        regions: (r1.clone(), r2.clone()),
                        collision,
                    },
                    examined,
                });
            }
        }
    }
    Ok(injective_verdict(examined))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::AffineLayer;
    use crate::exact::{qvec, RMatrix};
    use Sign::{Neg, Pos};

    fn layer(rows: &[&[i64]], bias: &[i64]) -> ReluLayer {
        ReluLayer::new(RMatrix::from_i64(rows), qvec(bias)).unwrap()
    }

    fn both(l: &ReluLayer) -> bool {
        let a = injective_oracle(l);
        let b = layer_injectivity(l).unwrap();
        assert_eq!(a.injective, b.injective);
        for v in [&a, &b] {
            if let Some(c) = v.collision() {
                assert_ne!(c.first, c.second);
                assert_eq!(l.eval(&c.first), l.eval(&c.second));
            }
        }
        a.injective
    }

    #[test]
    fn hinge_pair_is_injective() {
        assert!(both(&layer(&[&[1], &[-1]], &[-1, 1])));
        assert!(both(&layer(&[&[1], &[-1]], &[0, 0])));
    }

    #[test]
    fn zero_row_layer_is_not_injective() {
        let l = layer(&[&[0], &[-1]], &[0, 0]);
        assert!(!both(&l));
        let v = injective_oracle(&l);
        match &v.certificate {
            InjectivityCertificate::NonInjectiveWitness { point, rank, .. } => {
                assert!(point[0].is_positive());
                assert_eq!(*rank, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_is_not_injective() {
        let l = layer(&[&[1, 0], &[0, 1]], &[0, 0]);
        let v = injective_oracle(&l);
        match &v.certificate {
            InjectivityCertificate::NonInjectiveWitness { point, active, rank, .. } => {
                assert!(point.iter().all(|x| x.is_negative()));
                assert!(active.is_empty());
                assert_eq!(*rank, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(!both(&l));
    }

    #[test]
    fn three_lines_have_a_thin_cell() {
        let l = layer(&[&[1, 0], &[0, 1], &[-1, -1]], &[0, 0, 0]);
        assert!(!both(&l));
        let v = layer_injectivity(&l).unwrap();
        let x = v.witness_point().unwrap();
        let active = l.active_set(x);
        let rows: Vec<&[Rational]> = active.iter().map(|&i| l.row(i)).collect();
        assert!(rank_of_rows(&rows, 2) < 2);
    }

    #[test]
    fn signed_axes_are_injective() {
        assert!(both(&layer(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]], &[0, 0, 0, 0])));
    }

    #[test]
    fn find_cell_examples() {
        let x = find_cell(&[], &[(qvec(&[1]), int(0))], 1).unwrap().unwrap();
        assert!(x[0].is_negative());
        assert_eq!(find_cell(&[(qvec(&[1]), int(0))], &[], 1).unwrap(), None);
    }

    #[test]
    fn witness_examples() {
        let id = layer(&[&[1, 0], &[0, 1]], &[0, 0]);
        let c = verify_noninjectivity_witness(&id, &qvec(&[-1, -1])).unwrap();
        assert_eq!(c.second, qvec(&[-2, -1]));
        assert_eq!(c.image, qvec(&[0, 0]));

        let hinge = layer(&[&[1], &[-1]], &[0, 0]);
        assert!(verify_noninjectivity_witness(&hinge, &qvec(&[1])).is_none());

        let tri = layer(&[&[1, 0], &[0, 1], &[-1, -1]], &[0, 0, 0]);
        let c = verify_noninjectivity_witness(&tri, &qvec(&[2, -1])).unwrap();
        let step = sub(&c.second, &c.first);
        assert!(step[0].is_zero() && !step[1].is_zero());
        assert_eq!(tri.eval(&c.first), tri.eval(&c.second));
    }

    fn net(hidden: Vec<(&[&[i64]], &[i64])>, output: Option<(&[&[i64]], &[i64])>) -> LayeredNetwork {
        let mk = |(w, b): (&[&[i64]], &[i64])| AffineLayer::new(RMatrix::from_i64(w), qvec(b)).unwrap();
        LayeredNetwork::new(hidden.into_iter().map(mk).collect(), output.map(mk)).unwrap()
    }

    #[test]
    fn deep_collision_examples() {
        let n = net(vec![(&[&[0], &[-1]], &[0, 0])], None);
        let c = deep_collision_check(&n, &[vec![Neg, Neg]], &[vec![Neg, Neg]]).unwrap().unwrap();
        assert_ne!(c.first, c.second);
        assert_eq!(c.image, qvec(&[0, 0]));

        let identity = net(vec![(&[&[1], &[-1]], &[0, 0])], Some((&[&[1, -1]], &[0])));
        for s1 in [[Pos, Neg], [Neg, Pos], [Pos, Pos]] {
            for s2 in [[Pos, Neg], [Neg, Pos], [Pos, Pos]] {
                assert_eq!(deep_collision_check(&identity, &[s1.to_vec()], &[s2.to_vec()]).unwrap(), None);
            }
        }

        let hinge = net(vec![(&[&[1]], &[-1])], None);
        let c = deep_collision_check(&hinge, &[vec![Pos]], &[vec![Neg]]).unwrap().unwrap();
        assert_eq!(c.first, qvec(&[1]));
        assert!(c.second[0] < int(1));
        assert_eq!(c.image, qvec(&[0]));
    }

    #[test]
    fn deep_bruteforce_examples() {
        let identity = net(
            vec![(&[&[1], &[-1]], &[0, 0]), (&[&[1, 0], &[0, 1]], &[0, 0])],
            Some((&[&[1, -1]], &[0])),
        );
        assert!(deep_injectivity_bruteforce(&identity, DEFAULT_NEURON_CAP).unwrap().injective);

        let hinge = net(vec![(&[&[1]], &[-1])], None);
        let v = deep_injectivity_bruteforce(&hinge, DEFAULT_NEURON_CAP).unwrap();
        assert!(!v.injective);
        let c = v.collision().unwrap();
        assert_eq!(hinge.eval(&c.first), hinge.eval(&c.second));

        assert!(matches!(
            deep_injectivity_bruteforce(&hinge, 0),
            Err(InjectivityError::CapExceeded { neurons: 1, cap: 0 })
        ));
    }

    #[test]
    fn bound_values() {
        assert_eq!(search_tree_bound(1), 3);
        assert_eq!(search_tree_bound(2), 13);
        assert_eq!(search_tree_bound(3), 85);
    }
}
