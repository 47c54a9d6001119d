//! Hyperplane-arrangement view of ReLU layers and layered networks.
//!
//! A layer `x ↦ [Wx + b]_+` is affine on every full-dimensional cell of the
//! arrangement `{w_i·x + b_i = 0}`. Cells are indexed by strict sign vectors
//! and carry an interior witness. A neuron whose row and bias are both zero is
//! identically zero; it has no hyperplane, takes sign `+` everywhere (the
//! `≥ 0` convention for active sets) and is left out of the strict systems.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exact::{
    dot, is_zero_vec, kernel_basis, kernel_of_rows, neg, primitive_direction, rank, rank_of_rows,
    relu, rref, zero_vec, RMatrix, RVector, Rational,
};
use crate::lp::{feasible_point, Constraint, LpError, Polyhedron};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("the fan is not pointed: common kernel of the rows has dimension {0}")]
    NotPointed(usize),
    #[error("sign assignment shape does not match the network: {0}")]
    SignShape(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Activation pattern of one neuron. `Neg` sorts first, so canonical
/// scans meet the all-inactive cell before any other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    pub fn of(v: &Rational) -> Sign {
        if v.is_negative() {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }
}

pub fn format_signs(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.symbol()).collect()
}

/// Weights and bias of one affine map `x ↦ Wx + b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineLayer {
    pub weights: RMatrix,
    pub bias: RVector,
}

impl AffineLayer {
    pub fn new(weights: RMatrix, bias: RVector) -> Result<Self, ArrangementError> {
        if bias.len() != weights.rows() {
            return Err(ArrangementError::InvalidLayer(format!(
                "bias has length {}, weights have {} rows",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(AffineLayer { weights, bias })
    }

    pub fn apply(&self, x: &[Rational]) -> RVector {
        self.weights.mul_vec(x).into_iter().zip(&self.bias).map(|(v, b)| v + b).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// A single rectified layer `x ↦ [Wx + b]_+` with `m ≥ 1` neurons and input
/// dimension `d ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReluLayer {
    weights: RMatrix,
    bias: RVector,
}

impl ReluLayer {
    pub fn new(weights: RMatrix, bias: RVector) -> Result<Self, ArrangementError> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(ArrangementError::InvalidLayer(format!(
                "need m >= 1 and d >= 1, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        if bias.len() != weights.rows() {
            return Err(ArrangementError::InvalidLayer(format!(
                "bias has length {}, weights have {} rows",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(ReluLayer { weights, bias })
    }

    /// Bias-free layer.
    pub fn homogeneous(weights: RMatrix) -> Result<Self, ArrangementError> {
        let m = weights.rows();
        Self::new(weights, zero_vec(m))
    }

    pub fn weights(&self) -> &RMatrix {
        &self.weights
    }

    pub fn bias(&self) -> &[Rational] {
        &self.bias
    }

    pub fn neurons(&self) -> usize {
        self.weights.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn pre_activation(&self, x: &[Rational]) -> RVector {
        self.weights.mul_vec(x).into_iter().zip(&self.bias).map(|(v, b)| v + b).collect()
    }

    pub fn eval(&self, x: &[Rational]) -> RVector {
        self.pre_activation(x).iter().map(relu).collect()
    }

    /// Indices with `w_i·x + b_i ≥ 0`.
    pub fn active_set(&self, x: &[Rational]) -> Vec<usize> {
        self.pre_activation(x)
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_negative())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        self.weights.row(i)
    }

    fn is_degenerate(&self, i: usize) -> bool {
        self.bias[i].is_zero() && is_zero_vec(self.weights.row(i))
    }

    /// Strict constraint `s·(w_i·x + b_i) > 0`.
    pub fn strict_side(&self, i: usize, sign: Sign) -> Constraint {
        match sign {
            Sign::Pos => Constraint::gt(self.weights.row_vec(i), self.bias[i].clone()),
            Sign::Neg => Constraint::gt(neg(self.weights.row(i)), -self.bias[i].clone()),
        }
    }

    /// Closed constraint `s·(w_i·x + b_i) ≥ 0`.
    pub fn closed_side(&self, i: usize, sign: Sign) -> Constraint {
        self.strict_side(i, sign).closure()
    }
}

/// Hidden rectified layers followed by an optional affine output layer that
/// is applied without rectification.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayeredNetwork {
    pub hidden: Vec<AffineLayer>,
    pub output: Option<AffineLayer>,
}

impl LayeredNetwork {
    pub fn new(hidden: Vec<AffineLayer>, output: Option<AffineLayer>) -> Result<Self, ArrangementError> {
        let mut width: Option<usize> = None;
        for layer in hidden.iter().chain(output.iter()) {
            if let Some(w) = width {
                if layer.input_dim() != w {
                    return Err(ArrangementError::InvalidLayer(format!(
                        "layer expects input dimension {}, previous layer outputs {}",
                        layer.input_dim(),
                        w
                    )));
                }
            }
            width = Some(layer.output_dim());
        }
        if width.is_none() {
            return Err(ArrangementError::InvalidLayer("network has no layers".into()));
        }
        Ok(LayeredNetwork { hidden, output })
    }

    pub fn from_layer(layer: &ReluLayer) -> Self {
        LayeredNetwork {
            hidden: vec![AffineLayer { weights: layer.weights.clone(), bias: layer.bias.clone() }],
            output: None,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.first().or(self.output.as_ref()).map_or(0, AffineLayer::input_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.output.as_ref().or(self.hidden.last()).map_or(0, AffineLayer::output_dim)
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.hidden.iter().map(AffineLayer::output_dim).collect()
    }

    pub fn hidden_neurons(&self) -> usize {
        self.hidden_widths().iter().sum()
    }

    pub fn eval(&self, x: &[Rational]) -> RVector {
        let mut v = x.to_vec();
        for layer in &self.hidden {
            v = layer.apply(&v).iter().map(relu).collect();
        }
        match &self.output {
            Some(out) => out.apply(&v),
            None => v,
        }
    }

    /// Sign pattern at `x`, with `+` on zero pre-activations.
    pub fn signs_at(&self, x: &[Rational]) -> Vec<Vec<Sign>> {
        let mut v = x.to_vec();
        let mut out = Vec::with_capacity(self.hidden.len());
        for layer in &self.hidden {
            let pre = layer.apply(&v);
            out.push(pre.iter().map(Sign::of).collect());
            v = pre.iter().map(relu).collect();
        }
        out
    }
}

/// A full-dimensional cell of a layer's arrangement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cell {
    pub signs: Vec<Sign>,
    pub witness: RVector,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] @ {}", format_signs(&self.signs), crate::exact::format_vec(&self.witness))
    }
}

/// Checks that the witness lies strictly on the recorded side of every
/// hyperplane of the layer.
pub fn cell_is_valid(layer: &ReluLayer, cell: &Cell) -> bool {
    cell.signs.len() == layer.neurons()
        && layer.pre_activation(&cell.witness).iter().enumerate().all(|(i, v)| {
            if layer.is_degenerate(i) {
                cell.signs[i] == Sign::Pos
            } else {
                match cell.signs[i] {
                    Sign::Pos => v.is_positive(),
                    Sign::Neg => v.is_negative(),
                }
            }
        })
}

/// Output of [`enumerate_cells_counted`].
#[derive(Debug, Clone)]
pub struct CellEnumeration {
    pub cells: Vec<Cell>,
    pub lp_calls: usize,
}

pub fn enumerate_cells(layer: &ReluLayer) -> Vec<Cell> {
    enumerate_cells_counted(layer).cells
}

/// All full-dimensional cells, in lexicographic order of sign vectors
/// (`-` before `+`).
///
/// Depth-first over sign prefixes; a prefix is extended only while its strict
/// system is feasible. A child whose sign agrees with the parent witness
/// reuses that witness, so each node costs at most one LP.
pub fn enumerate_cells_counted(layer: &ReluLayer) -> CellEnumeration {
    let mut out = CellEnumeration { cells: Vec::new(), lp_calls: 0 };
    let d = layer.input_dim();
    let root = Polyhedron::new(d);
    let witness = zero_vec(d);
    let mut signs = Vec::with_capacity(layer.neurons());
    extend_cells(layer, &root, witness, &mut signs, &mut out);
    debug_assert!(out.cells.iter().all(|c| cell_is_valid(layer, c)));
    out
}

fn extend_cells(
    layer: &ReluLayer,
    region: &Polyhedron,
    witness: RVector,
    signs: &mut Vec<Sign>,
    out: &mut CellEnumeration,
) {
    let i = signs.len();
    if i == layer.neurons() {
        out.cells.push(Cell { signs: signs.clone(), witness });
        return;
    }
    if layer.is_degenerate(i) {
        signs.push(Sign::Pos);
        extend_cells(layer, region, witness, signs, out);
        signs.pop();
        return;
    }
    let value = dot(layer.row(i), &witness) + &layer.bias[i];
    for sign in [Sign::Neg, Sign::Pos] {
        let mut child = region.clone();
        child.push(layer.strict_side(i, sign));
        let agrees = match sign {
            Sign::Pos => value.is_positive(),
            Sign::Neg => value.is_negative(),
        };
        let next = if agrees {
            Some(witness.clone())
        } else {
            out.lp_calls += 1;
            feasible_point(&child).expect("dimensions agree")
        };
        if let Some(w) = next {
            signs.push(sign);
            extend_cells(layer, &child, w, signs, out);
            signs.pop();
        }
    }
}

/// Restriction of a layer to a cell: rows with sign `+` kept, others zeroed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveMatrix {
    pub weights: RMatrix,
    pub bias: RVector,
    pub active: Vec<usize>,
}

pub fn active_matrix(layer: &ReluLayer, cell: &Cell) -> ActiveMatrix {
    let mut weights = RMatrix::zeros(layer.neurons(), layer.input_dim());
    let mut bias = zero_vec(layer.neurons());
    let mut active = Vec::new();
    for (i, s) in cell.signs.iter().enumerate() {
        if *s == Sign::Pos {
            for j in 0..layer.input_dim() {
                weights.set(i, j, layer.weights.get(i, j).clone());
            }
            bias[i] = layer.bias[i].clone();
            active.push(i);
        }
    }
    ActiveMatrix { weights, bias, active }
}

/// Generator of a one-dimensional face of a bias-free arrangement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RayGenerator {
    /// Primitive integer direction (coprime entries).
    pub direction: RVector,
    /// Rows vanishing on the direction.
    pub zero_set: Vec<usize>,
}

/// Rays of the fan cut out by the rows of `w` (no biases).
///
/// Every rank-`(d−1)` subset of rows has a kernel line; both halves of that
/// line are rays, because any other row is either zero on the whole line or
/// nonzero on each open half. Rows are first collapsed to distinct
/// hyperplanes and subsets are grown only with independent rows. Output is
/// sorted by direction.
pub fn enumerate_rays(w: &RMatrix) -> Result<Vec<RayGenerator>, ArrangementError> {
    let d = w.cols();
    let r = rank(w);
    if r < d {
        return Err(ArrangementError::NotPointed(d - r));
    }
    let mut hyperplanes: Vec<RVector> = Vec::new();
    let mut seen = BTreeSet::new();
    for row in w.row_iter() {
        if is_zero_vec(row) {
            continue;
        }
        let mut p = primitive_direction(row);
        if p.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
            p = neg(&p);
        }
        if seen.insert(p.clone()) {
            hyperplanes.push(p);
        }
    }
    let mut directions = BTreeSet::new();
    let mut chosen: Vec<usize> = Vec::new();
    collect_lines(&hyperplanes, d, 0, &mut chosen, &mut directions);
    let mut rays = Vec::with_capacity(directions.len());
    for direction in directions {
        let zero_set: Vec<usize> =
            (0..w.rows()).filter(|&i| dot(w.row(i), &direction).is_zero()).collect();
        let zero_rows: Vec<&[Rational]> = zero_set.iter().map(|&i| w.row(i)).collect();
        debug_assert_eq!(rank_of_rows(&zero_rows, d), d - 1);
        rays.push(RayGenerator { direction, zero_set });
    }
    Ok(rays)
}

fn collect_lines(
    hyperplanes: &[RVector],
    d: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut BTreeSet<RVector>,
) {
    if chosen.len() + 1 == d {
        let rows: Vec<&[Rational]> = chosen.iter().map(|&i| hyperplanes[i].as_slice()).collect();
        let kernel = kernel_of_rows(&rows, d);
        debug_assert_eq!(kernel.len(), 1);
        let k = primitive_direction(&kernel[0]);
        out.insert(neg(&k));
        out.insert(k);
        return;
    }
    for i in start..hyperplanes.len() {
        let mut rows: Vec<&[Rational]> = chosen.iter().map(|&c| hyperplanes[c].as_slice()).collect();
        rows.push(&hyperplanes[i]);
        if rank_of_rows(&rows, d) < rows.len() {
            continue;
        }
        chosen.push(i);
        collect_lines(hyperplanes, d, i + 1, chosen, out);
        chosen.pop();
    }
}

/// Quotient of the input space by the common kernel of the rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    /// `W · lift`, of width `d′`.
    pub reduced: RMatrix,
    /// Basis of `N = ∩ ker(w_i)`.
    pub lineality: Vec<RVector>,
    /// `d × d′` matrix whose columns span the row space of `W`, a complement
    /// of `N`.
    pub lift: RMatrix,
}

impl Quotient {
    pub fn reduced_dim(&self) -> usize {
        self.reduced.cols()
    }

    pub fn lift_point(&self, y: &[Rational]) -> RVector {
        self.lift.mul_vec(y)
    }
}

pub fn quotient_lineality(w: &RMatrix) -> Quotient {
    let lineality = kernel_basis(w);
    let (basis, _) = rref(w);
    let d = w.cols();
    let lift = RMatrix::from_rows(basis, d).expect("rref rows have width d").transpose();
    let lift = if lift.cols() == 0 { RMatrix::zeros(d, 0) } else { lift };
    let reduced = if lift.cols() == 0 { RMatrix::zeros(w.rows(), 0) } else { w.mul(&lift) };
    Quotient { reduced, lineality, lift }
}

/// `x ↦ Ax + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub matrix: RMatrix,
    pub offset: RVector,
}

impl AffineMap {
    pub fn identity(d: usize) -> Self {
        AffineMap { matrix: RMatrix::identity(d), offset: zero_vec(d) }
    }

    pub fn apply(&self, x: &[Rational]) -> RVector {
        self.matrix.mul_vec(x).into_iter().zip(&self.offset).map(|(v, c)| v + c).collect()
    }

    /// `layer ∘ self`.
    fn then(&self, layer: &AffineLayer) -> AffineMap {
        let matrix = layer.weights.mul(&self.matrix);
        let offset = layer.apply(&self.offset);
        AffineMap { matrix, offset }
    }
}

/// Closed region `P_s` of a sign assignment (one sign per hidden neuron, `+`
/// meaning pre-activation `≥ 0`) and the affine map the network computes on
/// it.
pub fn region_polyhedron(
    net: &LayeredNetwork,
    signs: &[Vec<Sign>],
) -> Result<(Polyhedron, AffineMap), ArrangementError> {
    if signs.len() != net.hidden.len() {
        return Err(ArrangementError::SignShape(format!(
            "{} sign layers for {} hidden layers",
            signs.len(),
            net.hidden.len()
        )));
    }
    let d = net.input_dim();
    let mut poly = Polyhedron::new(d);
    let mut map = AffineMap::identity(d);
    for (layer, s) in net.hidden.iter().zip(signs) {
        if s.len() != layer.output_dim() {
            return Err(ArrangementError::SignShape(format!(
                "{} signs for a layer of width {}",
                s.len(),
                layer.output_dim()
            )));
        }
        let pre = map.then(layer);
        let mut rows = Vec::with_capacity(s.len());
        let mut offs = Vec::with_capacity(s.len());
        for (j, sign) in s.iter().enumerate() {
            let normal = pre.matrix.row_vec(j);
            let offset = pre.offset[j].clone();
            let c = match sign {
                Sign::Pos => Constraint::ge(normal.clone(), offset.clone()),
                Sign::Neg => Constraint::ge(neg(&normal), -offset.clone()),
            };
            poly.push(c);
            match sign {
                Sign::Pos => {
                    rows.push(normal);
                    offs.push(offset);
                }
                Sign::Neg => {
                    rows.push(zero_vec(d));
                    offs.push(Rational::zero());
                }
            }
        }
        map = AffineMap { matrix: RMatrix::from_rows(rows, d).expect("rows have width d"), offset: offs };
    }
    if let Some(out) = &net.output {
        map = map.then(out);
    }
    Ok((poly, map))
}

/// Nonempty closed regions of a network, depth-first over neurons in layer
/// order with a feasibility LP per extension.
pub fn enumerate_regions(net: &LayeredNetwork) -> Result<Vec<Vec<Vec<Sign>>>, ArrangementError> {
    let widths = net.hidden_widths();
    let flat: usize = widths.iter().sum();
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(flat);
    regions_dfs(net, &widths, &mut prefix, &mut out)?;
    Ok(out)
}

fn nest(widths: &[usize], flat: &[Sign]) -> Vec<Vec<Sign>> {
    let mut out = Vec::with_capacity(widths.len());
    let mut k = 0;
    for &w in widths {
        out.push(flat[k..k + w].to_vec());
        k += w;
    }
    out
}

fn regions_dfs(
    net: &LayeredNetwork,
    widths: &[usize],
    prefix: &mut Vec<Sign>,
    out: &mut Vec<Vec<Vec<Sign>>>,
) -> Result<(), ArrangementError> {
    let total: usize = widths.iter().sum();
    if prefix.len() == total {
        out.push(nest(widths, prefix));
        return Ok(());
    }
    for sign in [Sign::Neg, Sign::Pos] {
        prefix.push(sign);
        if partial_region_nonempty(net, widths, prefix)? {
            regions_dfs(net, widths, prefix, out)?;
        }
        prefix.pop();
    }
    Ok(())
}

fn partial_region_nonempty(
    net: &LayeredNetwork,
    widths: &[usize],
    prefix: &[Sign],
) -> Result<bool, ArrangementError> {
    let d = net.input_dim();
    let mut poly = Polyhedron::new(d);
    let mut map = AffineMap::identity(d);
    let mut k = 0;
    for (layer, &w) in net.hidden.iter().zip(widths) {
        if k >= prefix.len() {
            break;
        }
        let pre = map.then(layer);
        let mut rows = Vec::with_capacity(w);
        let mut offs = Vec::with_capacity(w);
        for j in 0..w {
            let normal = pre.matrix.row_vec(j);
            let offset = pre.offset[j].clone();
            let Some(sign) = prefix.get(k + j) else {
                break;
            };
            match sign {
                Sign::Pos => {
                    poly.push(Constraint::ge(normal.clone(), offset.clone()));
                    rows.push(normal);
                    offs.push(offset);
                }
                Sign::Neg => {
                    poly.push(Constraint::ge(neg(&normal), -offset));
                    rows.push(zero_vec(d));
                    offs.push(Rational::zero());
                }
            }
        }
        k += w;
        if rows.len() == w {
            map = AffineMap { matrix: RMatrix::from_rows(rows, d).expect("width d"), offset: offs };
        }
    }
    Ok(feasible_point(&poly)?.is_some())
}
