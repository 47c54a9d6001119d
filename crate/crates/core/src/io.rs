//! Instance files: a line-oriented text format and an equivalent JSON
//! object format. Numbers are exact rationals written as `p/q`, integers or
//! plain decimals; node labels are 1-based.
//!
//! ```text
//! relu-cert v1
//! kind: layer
//! rows: 2
//! cols: 1
//! 1
//! -1
//! bias: -1 1
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{AffineLayer, LayeredNetwork, ReluLayer};
use crate::exact::{format_rational, parse_rational, RMatrix, RVector, Rational};
use crate::lp::{Constraint, Polyhedron, Relation};
use crate::reductions::{Digraph, Hypergraph3, WeightedGraph};
use crate::verification::InputDomain;
use crate::zonotope::Zonotope;

pub const HEADER: &str = "relu-cert v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Layer(ReluLayer),
    Network(LayeredNetwork),
    ZonotopePair { outer: Zonotope, inner: Zonotope },
    Graph(WeightedGraph),
    Digraph(Digraph),
    Hypergraph(Hypergraph3),
    Verification { network: LayeredNetwork, threshold: Rational, domain: InputDomain },
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Layer(_) => "layer",
            Instance::Network(_) => "network",
            Instance::ZonotopePair { .. } => "zonotope-pair",
            Instance::Graph(_) => "graph",
            Instance::Digraph(_) => "digraph",
            Instance::Hypergraph(_) => "hypergraph",
            Instance::Verification { .. } => "verification",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Object,
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

/// Parses either format; JSON is recognized by a leading `{`.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    if text.trim_start().starts_with('{') {
        parse_object(text)
    } else {
        parse_text(text)
    }
}

pub fn emit(instance: &Instance, format: Format) -> String {
    match format {
        Format::Text => emit_text(instance),
        Format::Object => emit_object(instance),
    }
}

// ---------------------------------------------------------------- text

/// Tokens of one line with their 1-based columns.
type Tokens<'a> = Vec<(usize, &'a str)>;

struct Line<'a> {
    number: usize,
    text: &'a str,
}

struct Cursor<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_line: usize,
}

fn parse_err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Parse { line, column, message: message.into() })
}

/// Whitespace-separated tokens with 1-based columns.
fn tokens(text: &str, base: usize) -> Tokens<'_> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((base + text[..s].chars().count(), &text[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    out
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines: Vec<Line> = text
            .lines()
            .enumerate()
            .map(|(i, t)| Line { number: i + 1, text: t.split('#').next().unwrap_or("") })
            .filter(|l| !l.text.trim().is_empty())
            .collect();
        let last_line = text.lines().count().max(1);
        Cursor { lines, pos: 0, last_line }
    }

    fn next(&mut self, what: &str) -> Result<&Line<'a>, IoError> {
        if self.pos >= self.lines.len() {
            return parse_err(self.last_line, 1, format!("unexpected end of file, expected {what}"));
        }
        self.pos += 1;
        Ok(&self.lines[self.pos - 1])
    }

    fn peek_key(&self) -> Option<&str> {
        let line = self.lines.get(self.pos)?;
        let (key, _) = line.text.trim().split_once(':')?;
        Some(key.trim())
    }

    fn done(&self) -> bool {
        self.pos >= self.lines.len()
    }

    /// `key: rest`, returning the tokens of `rest`.
    fn keyed(&mut self, key: &str) -> Result<(usize, Tokens<'a>), IoError> {
        let line = self.next(&format!("`{key}:`"))?;
        let (number, text) = (line.number, line.text);
        let Some((k, rest)) = text.split_once(':') else {
            return parse_err(number, 1, format!("expected `{key}:`"));
        };
        if k.trim() != key {
            let col = text.len() - text.trim_start().len() + 1;
            return parse_err(number, col, format!("expected `{key}:`, found `{}:`", k.trim()));
        }
        let base = k.chars().count() + 2;
        Ok((number, tokens(rest, base)))
    }

    fn keyed_value(&mut self, key: &str) -> Result<(usize, usize, &'a str), IoError> {
        let (number, toks) = self.keyed(key)?;
        match toks.as_slice() {
            [(col, tok)] => Ok((number, *col, tok)),
            [] => parse_err(number, 1, format!("`{key}:` needs a value")),
            [_, (col, _), ..] => parse_err(number, *col, format!("`{key}:` takes a single value")),
        }
    }

    fn keyed_usize(&mut self, key: &str) -> Result<usize, IoError> {
        let (line, col, tok) = self.keyed_value(key)?;
        parse_usize(tok, line, col)
    }

    fn plain(&mut self, what: &str) -> Result<(usize, Tokens<'a>), IoError> {
        let line = self.next(what)?;
        Ok((line.number, tokens(line.text, 1)))
    }

    fn rationals(&mut self, count: usize, what: &str) -> Result<RVector, IoError> {
        let (line, toks) = self.plain(what)?;
        rational_tokens(&toks, count, line)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<RMatrix, IoError> {
        let mut data = Vec::with_capacity(rows);
        for r in 0..rows {
            data.push(self.rationals(cols, &format!("matrix row {}", r + 1))?);
        }
        Ok(RMatrix::from_rows(data, cols).expect("rows checked"))
    }
}

fn parse_usize(tok: &str, line: usize, col: usize) -> Result<usize, IoError> {
    tok.parse().or_else(|_| parse_err(line, col, format!("expected a nonnegative integer, found `{tok}`")))
}

fn parse_q(tok: &str, line: usize, col: usize) -> Result<Rational, IoError> {
    parse_rational(tok).or_else(|e| parse_err(line, col, e.to_string()))
}

fn rational_tokens(toks: &[(usize, &str)], count: usize, line: usize) -> Result<RVector, IoError> {
    if toks.len() != count {
        let col = toks.get(count).map_or(1, |t| t.0);
        return parse_err(line, col, format!("expected {count} entries, found {}", toks.len()));
    }
    toks.iter().map(|(c, t)| parse_q(t, line, *c)).collect()
}

fn node_label(tok: &str, n: usize, line: usize, col: usize) -> Result<usize, IoError> {
    let v = parse_usize(tok, line, col)?;
    if v == 0 || v > n {
        return parse_err(line, col, format!("node {v} outside 1..={n}"));
    }
    Ok(v - 1)
}

fn affine_block(c: &mut Cursor) -> Result<AffineLayer, IoError> {
    let rows = c.keyed_usize("rows")?;
    let cols = c.keyed_usize("cols")?;
    let weights = c.matrix(rows, cols)?;
    let (line, toks) = c.keyed("bias")?;
    let bias = rational_tokens(&toks, rows, line)?;
    Ok(AffineLayer { weights, bias })
}

fn network_blocks(c: &mut Cursor) -> Result<LayeredNetwork, IoError> {
    let mut hidden = Vec::new();
    let mut output = None;
    while c.peek_key() == Some("layer") {
        let (line, col, kind) = c.keyed_value("layer")?;
        if output.is_some() {
            return parse_err(line, col, "a linear layer must be the last layer");
        }
        let block = affine_block(c)?;
        match kind {
            "relu" => hidden.push(block),
            "linear" => output = Some(block),
            other => return parse_err(line, col, format!("unknown layer type `{other}`")),
        }
    }
    LayeredNetwork::new(hidden, output).map_err(|e| IoError::DimensionMismatch(e.to_string()))
}

fn domain_block(c: &mut Cursor, d: usize) -> Result<InputDomain, IoError> {
    let (line, col, kind) = c.keyed_value("domain")?;
    match kind {
        "polytope" => {
            let k = c.keyed_usize("constraints")?;
            let mut poly = Polyhedron::new(d);
            for _ in 0..k {
                let (line, toks) = c.plain("constraint")?;
                let Some(((rcol, rel), rest)) = toks.split_first() else {
                    return parse_err(line, 1, "empty constraint");
                };
                let relation = match *rel {
                    "ge" => Relation::Ge,
                    "eq" => Relation::Eq,
                    other => return parse_err(line, *rcol, format!("expected `ge` or `eq`, found `{other}`")),
                };
                let mut values = rational_tokens(rest, d + 1, line)?;
                let offset = values.pop().expect("d + 1 entries");
                poly.push(Constraint { normal: values, offset, relation });
            }
            Ok(InputDomain::Polytope(poly))
        }
        "ball" => {
            let (line, toks) = c.keyed("center")?;
            let center = rational_tokens(&toks, d, line)?;
            let (line, rcol, r) = c.keyed_value("radius")?;
            let radius = parse_q(r, line, rcol)?;
            let k = c.keyed_usize("basis")?;
            let basis = c.matrix(k, d)?.to_rows();
            Ok(InputDomain::BallInSubspace { center, basis, radius })
        }
        other => parse_err(line, col, format!("unknown domain `{other}`")),
    }
}

pub fn parse_text(text: &str) -> Result<Instance, IoError> {
    let mut c = Cursor::new(text);
    let first = c.next("header")?;
    if first.text.trim() != HEADER {
        return parse_err(first.number, 1, format!("expected header `{HEADER}`"));
    }
    let (kline, kcol, kind) = c.keyed_value("kind")?;
    let instance = match kind {
        "layer" => {
            let block = affine_block(&mut c)?;
            Instance::Layer(ReluLayer::new(block.weights, block.bias).map_err(|e| IoError::DimensionMismatch(e.to_string()))?)
        }
        "network" => Instance::Network(network_blocks(&mut c)?),
        "zonotope-pair" => {
            let d = c.keyed_usize("dim")?;
            if d == 0 {
                return Err(IoError::DimensionMismatch("zonotopes need dim >= 1".into()));
            }
            let n = c.keyed_usize("outer")?;
            let outer = c.matrix(n, d)?;
            let k = c.keyed_usize("inner")?;
            let inner = c.matrix(k, d)?;
            Instance::ZonotopePair {
                outer: Zonotope::new(outer).expect("d >= 1"),
                inner: Zonotope::new(inner).expect("d >= 1"),
            }
        }
        "graph" | "digraph" | "hypergraph" => {
            let (line, toks) = c.plain("node count")?;
            let n = match toks.as_slice() {
                [(col, t)] => parse_usize(t, line, *col)?,
                _ => return parse_err(line, 1, "expected the node count alone on a line"),
            };
            let mut rows = Vec::new();
            while !c.done() {
                rows.push(c.plain("edge")?);
            }
            let width = if kind == "digraph" { 2 } else { 3 };
            let mut parsed = Vec::new();
            for (line, toks) in &rows {
                if toks.len() != width {
                    let col = toks.get(width).map_or(1, |t| t.0);
                    return parse_err(*line, col, format!("expected {width} entries, found {}", toks.len()));
                }
                parsed.push((*line, toks.clone()));
            }
            let invalid = |e: crate::reductions::ReductionError| IoError::DimensionMismatch(e.to_string());
            match kind {
                "graph" => {
                    let mut edges = Vec::new();
                    for (line, t) in parsed {
                        let u = node_label(t[0].1, n, line, t[0].0)?;
                        let v = node_label(t[1].1, n, line, t[1].0)?;
                        let w: i64 = t[2].1.parse().or_else(|_| parse_err(line, t[2].0, "edge weight must be an integer"))?;
                        edges.push((u, v, w));
                    }
                    Instance::Graph(WeightedGraph::new(n, edges).map_err(invalid)?)
                }
                "digraph" => {
                    let mut arcs = Vec::new();
                    for (line, t) in parsed {
                        arcs.push((node_label(t[0].1, n, line, t[0].0)?, node_label(t[1].1, n, line, t[1].0)?));
                    }
                    Instance::Digraph(Digraph::new(n, arcs).map_err(invalid)?)
                }
                _ => {
                    let mut edges = Vec::new();
                    for (line, t) in parsed {
                        let mut e = [0; 3];
                        for (slot, (col, tok)) in e.iter_mut().zip(&t) {
                            *slot = node_label(tok, n, line, *col)?;
                        }
                        edges.push(e);
                    }
                    Instance::Hypergraph(Hypergraph3::new(n, edges).map_err(invalid)?)
                }
            }
        }
        "verification" => {
            let network = network_blocks(&mut c)?;
            let (line, col, t) = c.keyed_value("threshold")?;
            let threshold = parse_q(t, line, col)?;
            let domain = domain_block(&mut c, network.input_dim())?;
            Instance::Verification { network, threshold, domain }
        }
        other => return parse_err(kline, kcol, format!("unknown kind `{other}`")),
    };
    if let Some(line) = c.lines.get(c.pos) {
        return parse_err(line.number, 1, "unexpected trailing content");
    }
    Ok(instance)
}

fn join(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

fn push_matrix(out: &mut String, m: &RMatrix) {
    for row in m.row_iter() {
        out.push_str(&join(row));
        out.push('\n');
    }
}

fn push_affine(out: &mut String, layer: &AffineLayer) {
    out.push_str(&format!("rows: {}\ncols: {}\n", layer.weights.rows(), layer.weights.cols()));
    push_matrix(out, &layer.weights);
    out.push_str(&format!("bias: {}\n", join(&layer.bias)));
}

fn push_network(out: &mut String, net: &LayeredNetwork) {
    for layer in &net.hidden {
        out.push_str("layer: relu\n");
        push_affine(out, layer);
    }
    if let Some(layer) = &net.output {
        out.push_str("layer: linear\n");
        push_affine(out, layer);
    }
}

pub fn emit_text(instance: &Instance) -> String {
    let mut out = format!("{HEADER}\nkind: {}\n", instance.kind());
    match instance {
        Instance::Layer(l) => push_affine(&mut out, &AffineLayer { weights: l.weights().clone(), bias: l.bias().to_vec() }),
        Instance::Network(n) => push_network(&mut out, n),
        Instance::ZonotopePair { outer, inner } => {
            out.push_str(&format!("dim: {}\nouter: {}\n", outer.dim(), outer.len()));
            push_matrix(&mut out, outer.generators());
            out.push_str(&format!("inner: {}\n", inner.len()));
            push_matrix(&mut out, inner.generators());
        }
        Instance::Graph(g) => {
            out.push_str(&format!("{}\n", g.nodes()));
            for (u, v, w) in g.edges() {
                out.push_str(&format!("{} {} {}\n", u + 1, v + 1, w));
            }
        }
        Instance::Digraph(d) => {
            out.push_str(&format!("{}\n", d.nodes()));
            for (u, v) in d.arcs() {
                out.push_str(&format!("{} {}\n", u + 1, v + 1));
            }
        }
        Instance::Hypergraph(h) => {
            out.push_str(&format!("{}\n", h.nodes()));
            for e in h.edges() {
                out.push_str(&format!("{} {} {}\n", e[0] + 1, e[1] + 1, e[2] + 1));
            }
        }
        Instance::Verification { network, threshold, domain } => {
            push_network(&mut out, network);
            out.push_str(&format!("threshold: {}\n", format_rational(threshold)));
            match domain {
                InputDomain::Polytope(p) => {
                    out.push_str(&format!("domain: polytope\nconstraints: {}\n", p.constraints.len()));
                    for c in &p.constraints {
                        let rel = if c.relation == Relation::Eq { "eq" } else { "ge" };
                        out.push_str(&format!("{rel} {} {}\n", join(&c.normal), format_rational(&c.offset)));
                    }
                }
                InputDomain::BallInSubspace { center, basis, radius } => {
                    out.push_str(&format!("domain: ball\ncenter: {}\nradius: {}\nbasis: {}\n", join(center), format_rational(radius), basis.len()));
                    for u in basis {
                        out.push_str(&join(u));
                        out.push('\n');
                    }
                }
            }
        }
    }
    out
}

// -------------------------------------------------------------- object

#[derive(Debug, Serialize, Deserialize)]
struct ObjectFile {
    format: String,
    #[serde(flatten)]
    body: ObjectBody,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum ObjectBody {
    Layer { weights: Vec<Vec<String>>, bias: Vec<String> },
    Network { layers: Vec<ObjectLayer> },
    ZonotopePair { dim: usize, outer: Vec<Vec<String>>, inner: Vec<Vec<String>> },
    Graph { nodes: usize, edges: Vec<(usize, usize, i64)> },
    Digraph { nodes: usize, arcs: Vec<(usize, usize)> },
    Hypergraph { nodes: usize, edges: Vec<[usize; 3]> },
    Verification { layers: Vec<ObjectLayer>, threshold: String, domain: ObjectDomain },
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectLayer {
    activation: String,
    weights: Vec<Vec<String>>,
    bias: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum ObjectDomain {
    Polytope { constraints: Vec<ObjectConstraint> },
    Ball { center: Vec<String>, radius: String, basis: Vec<Vec<String>> },
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectConstraint {
    relation: String,
    normal: Vec<String>,
    offset: String,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn string_rows(m: &RMatrix) -> Vec<Vec<String>> {
    m.row_iter().map(strings).collect()
}

fn object_layers(net: &LayeredNetwork) -> Vec<ObjectLayer> {
    let mk = |activation: &str, l: &AffineLayer| ObjectLayer {
        activation: activation.into(),
        weights: string_rows(&l.weights),
        bias: strings(&l.bias),
    };
    net.hidden.iter().map(|l| mk("relu", l)).chain(net.output.iter().map(|l| mk("linear", l))).collect()
}

pub fn emit_object(instance: &Instance) -> String {
    let body = match instance {
        Instance::Layer(l) => ObjectBody::Layer { weights: string_rows(l.weights()), bias: strings(l.bias()) },
        Instance::Network(n) => ObjectBody::Network { layers: object_layers(n) },
        Instance::ZonotopePair { outer, inner } => ObjectBody::ZonotopePair {
            dim: outer.dim(),
            outer: string_rows(outer.generators()),
            inner: string_rows(inner.generators()),
        },
        Instance::Graph(g) => ObjectBody::Graph {
            nodes: g.nodes(),
            edges: g.edges().iter().map(|&(u, v, w)| (u + 1, v + 1, w)).collect(),
        },
        Instance::Digraph(d) => ObjectBody::Digraph {
            nodes: d.nodes(),
            arcs: d.arcs().iter().map(|&(u, v)| (u + 1, v + 1)).collect(),
        },
        Instance::Hypergraph(h) => ObjectBody::Hypergraph {
            nodes: h.nodes(),
            edges: h.edges().iter().map(|e| [e[0] + 1, e[1] + 1, e[2] + 1]).collect(),
        },
        Instance::Verification { network, threshold, domain } => ObjectBody::Verification {
            layers: object_layers(network),
            threshold: format_rational(threshold),
            domain: match domain {
                InputDomain::Polytope(p) => ObjectDomain::Polytope {
                    constraints: p
                        .constraints
                        .iter()
                        .map(|c| ObjectConstraint {
                            relation: if c.relation == Relation::Eq { "eq" } else { "ge" }.into(),
                            normal: strings(&c.normal),
                            offset: format_rational(&c.offset),
                        })
                        .collect(),
                },
                InputDomain::BallInSubspace { center, basis, radius } => ObjectDomain::Ball {
                    center: strings(center),
                    radius: format_rational(radius),
                    basis: basis.iter().map(|u| strings(u)).collect(),
                },
            },
        },
    };
    let file = ObjectFile { format: HEADER.into(), body };
    let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
    s.push('\n');
    s
}

fn object_error(message: impl Into<String>) -> IoError {
    IoError::Parse { line: 0, column: 0, message: message.into() }
}

fn object_q(s: &str) -> Result<Rational, IoError> {
    parse_rational(s).map_err(|e| object_error(e.to_string()))
}

fn object_vec(v: &[String]) -> Result<RVector, IoError> {
    v.iter().map(|s| object_q(s)).collect()
}

fn object_matrix(rows: &[Vec<String>], cols: Option<usize>) -> Result<RMatrix, IoError> {
    let width = cols.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    let data = rows.iter().map(|r| object_vec(r)).collect::<Result<Vec<_>, _>>()?;
    RMatrix::from_rows(data, width).map_err(|e| object_error(e.to_string()))
}

fn object_network(layers: &[ObjectLayer]) -> Result<LayeredNetwork, IoError> {
    let mut hidden = Vec::new();
    let mut output = None;
    for l in layers {
        if output.is_some() {
            return Err(object_error("a linear layer must be the last layer"));
        }
        let layer = AffineLayer::new(object_matrix(&l.weights, None)?, object_vec(&l.bias)?)
            .map_err(|e| IoError::DimensionMismatch(e.to_string()))?;
        match l.activation.as_str() {
            "relu" => hidden.push(layer),
            "linear" => output = Some(layer),
            other => return Err(object_error(format!("unknown activation `{other}`"))),
        }
    }
    LayeredNetwork::new(hidden, output).map_err(|e| IoError::DimensionMismatch(e.to_string()))
}

fn zero_based(v: usize, n: usize) -> Result<usize, IoError> {
    if v == 0 || v > n {
        return Err(object_error(format!("node {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

pub fn parse_object(text: &str) -> Result<Instance, IoError> {
    let file: ObjectFile = serde_json::from_str(text).map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.format != HEADER {
        return Err(object_error(format!("expected format `{HEADER}`, found `{}`", file.format)));
    }
    let dims = |e: crate::reductions::ReductionError| IoError::DimensionMismatch(e.to_string());
    Ok(match file.body {
        ObjectBody::Layer { weights, bias } => {
            let w = object_matrix(&weights, None)?;
            Instance::Layer(ReluLayer::new(w, object_vec(&bias)?).map_err(|e| IoError::DimensionMismatch(e.to_string()))?)
        }
        ObjectBody::Network { layers } => Instance::Network(object_network(&layers)?),
        ObjectBody::ZonotopePair { dim, outer, inner } => {
            let mk = |rows: &[Vec<String>]| -> Result<Zonotope, IoError> {
                Zonotope::new(object_matrix(rows, Some(dim))?).map_err(|e| IoError::DimensionMismatch(e.to_string()))
            };
            Instance::ZonotopePair { outer: mk(&outer)?, inner: mk(&inner)? }
        }
        ObjectBody::Graph { nodes, edges } => {
            let e = edges
                .iter()
                .map(|&(u, v, w)| Ok((zero_based(u, nodes)?, zero_based(v, nodes)?, w)))
                .collect::<Result<Vec<_>, IoError>>()?;
            Instance::Graph(WeightedGraph::new(nodes, e).map_err(dims)?)
        }
        ObjectBody::Digraph { nodes, arcs } => {
            let a = arcs
                .iter()
                .map(|&(u, v)| Ok((zero_based(u, nodes)?, zero_based(v, nodes)?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            Instance::Digraph(Digraph::new(nodes, a).map_err(dims)?)
        }
        ObjectBody::Hypergraph { nodes, edges } => {
            let e = edges
                .iter()
                .map(|t| Ok([zero_based(t[0], nodes)?, zero_based(t[1], nodes)?, zero_based(t[2], nodes)?]))
                .collect::<Result<Vec<_>, IoError>>()?;
            Instance::Hypergraph(Hypergraph3::new(nodes, e).map_err(dims)?)
        }
        ObjectBody::Verification { layers, threshold, domain } => {
            let network = object_network(&layers)?;
            let d = network.input_dim();
            let domain = match domain {
                ObjectDomain::Polytope { constraints } => {
                    let mut poly = Polyhedron::new(d);
                    for c in constraints {
                        let relation = match c.relation.as_str() {
                            "ge" => Relation::Ge,
                            "eq" => Relation::Eq,
                            other => return Err(object_error(format!("unknown relation `{other}`"))),
                        };
                        let normal = object_vec(&c.normal)?;
                        if normal.len() != d {
                            return Err(IoError::DimensionMismatch(format!("constraint has {} entries, expected {d}", normal.len())));
                        }
                        poly.push(Constraint { normal, offset: object_q(&c.offset)?, relation });
                    }
                    InputDomain::Polytope(poly)
                }
                ObjectDomain::Ball { center, radius, basis } => InputDomain::BallInSubspace {
                    center: object_vec(&center)?,
                    radius: object_q(&radius)?,
                    basis: object_matrix(&basis, Some(d))?.to_rows(),
                },
            };
            Instance::Verification { network, threshold: object_q(&threshold)?, domain }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, qvec, ratio};

    const HINGE: &str = "relu-cert v1\nkind: layer\nrows: 2\ncols: 1\n1\n-1\nbias: -1 1\n";

    #[test]
    fn parses_layer() {
        let Instance::Layer(l) = parse_instance(HINGE).unwrap() else { panic!() };
        assert_eq!(l.weights(), &RMatrix::from_i64(&[&[1], &[-1]]));
        assert_eq!(l.bias(), &qvec(&[-1, 1])[..]);
        assert_eq!(emit_text(&Instance::Layer(l)), HINGE);
    }

    #[test]
    fn decimals_are_exact() {
        let text = "relu-cert v1\nkind: layer\nrows: 1\ncols: 1\n0.5\nbias: 0\n";
        let Instance::Layer(l) = parse_instance(text).unwrap() else { panic!() };
        assert_eq!(l.weights().get(0, 0), &ratio(1, 2));
    }

    #[test]
    fn ragged_rows_are_rejected_with_position() {
        let text = "relu-cert v1\nkind: layer\nrows: 2\ncols: 2\n1 0\n1 0 3\nbias: 0 0\n";
        assert_eq!(
            parse_instance(text),
            Err(IoError::Parse { line: 6, column: 5, message: "expected 2 entries, found 3".into() })
        );
        let text = "relu-cert v1\nkind: layer\nrows: 1\ncols: 1\n1e3\nbias: 0\n";
        assert!(matches!(parse_instance(text), Err(IoError::Parse { line: 5, column: 1, .. })));
    }

    #[test]
    fn object_matches_text() {
        let inst = parse_instance(HINGE).unwrap();
        let json = emit_object(&inst);
        assert_eq!(parse_instance(&json).unwrap(), inst);
    }

    #[test]
    fn round_trips_every_kind() {
        let net = LayeredNetwork::new(
            vec![AffineLayer::new(RMatrix::from_i64(&[&[1, 0], &[0, 1]]), vec![ratio(1, 3), int(0)]).unwrap()],
            Some(AffineLayer::new(RMatrix::from_i64(&[&[1, -1]]), qvec(&[2])).unwrap()),
        )
        .unwrap();
        let instances = vec![
            Instance::Network(net.clone()),
            Instance::ZonotopePair { outer: Zonotope::from_i64(&[&[1, 0], &[0, 1]]), inner: Zonotope::new(RMatrix::zeros(0, 2)).unwrap() },
            Instance::Graph(WeightedGraph::new(3, [(0, 1, 2), (1, 2, -1)]).unwrap()),
            Instance::Digraph(Digraph::new(3, [(0, 1), (2, 0)]).unwrap()),
            Instance::Hypergraph(Hypergraph3::new(4, [[0, 1, 2], [1, 2, 3]]).unwrap()),
            Instance::Verification {
                network: net.clone(),
                threshold: ratio(-7, 2),
                domain: InputDomain::Polytope(Polyhedron::cube(2, &int(-1), &int(1))),
            },
            Instance::Verification {
                network: net,
                threshold: int(0),
                domain: InputDomain::BallInSubspace { center: qvec(&[1, 1]), basis: vec![qvec(&[1, -1])], radius: ratio(1, 2) },
            },
        ];
        for inst in instances {
            for format in [Format::Text, Format::Object] {
                let text = emit(&inst, format);
                let back = parse_instance(&text).unwrap();
                assert_eq!(back, inst, "{text}");
                assert_eq!(emit(&back, format), text);
            }
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# hinge\nrelu-cert v1\n\nkind: digraph\n2  # nodes\n1 2\n";
        let Instance::Digraph(d) = parse_instance(text).unwrap() else { panic!() };
        assert_eq!(d.arcs(), &[(0, 1)]);
    }
}
