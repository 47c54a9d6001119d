//! The `relu-cert` command line.
//!
//! Exit codes: 0 when the property holds, 1 when it fails (a certificate is
//! printed), 2 on errors and on certificates that fail their recheck.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::arrangement::{format_signs, LayeredNetwork, ReluLayer};
use crate::exact::{add_scaled, approx_decimal, format_rational, format_vec, int, Rational};
use crate::generate;
use crate::injectivity::{
    deep_injectivity_bruteforce, injective_oracle, layer_injectivity, search_tree_bound,
    verify_noninjectivity_witness, InjectivityCertificate, InjectivityVerdict, DEFAULT_NEURON_CAP,
};
use crate::io::{emit, read_instance, Format, Instance};
use crate::range::{positivity, surjectivity, zero_map_check, RangeCertificate, TwoLayerScalarNet, ZeroMapVerdict};
use crate::reductions::{
    acyclic_2disconnection_by_orders, acyclic_2disconnection_oracle, check_two_disconnection, coloring_oracle,
    densest_cut_to_positive_cut, digraph_to_layer, hypergraph_arc_count, hypergraph_construction,
    positive_cut_oracle, positive_cut_to_network, Digraph, BIPARTITION_CAP, COLORING_CAP, CUT_CAP,
    PERMUTATION_CAP,
};
use crate::verification::{
    build_verification_instance, exact_max, inscribed_box, verify, InputDomain, MaxValue, VerificationCertificate,
};
use crate::zonotope::{contains, separates};

pub const REPORT_VERSION: &str = "relu-cert v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Object,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Object => Format::Object,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "relu-cert", version, about = "Exact certificates for ReLU network properties")]
pub struct Args {
    /// injectivity, injectivity-oracle, surjectivity, positivity, zero-map,
    /// zonotope-contain, verify, max, reduce:<positive-cut|densest-cut|digraph|hypergraph>,
    /// oracle:<positive-cut|acyclic-2-disconnection|acyclic-2-disconnection-orders|coloring>,
    /// selftest
    pub command: String,
    /// Instance file (text or JSON object format).
    pub input: Option<PathBuf>,
    /// Worker threads for the brute-force oracles.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Size guard for the exponential oracles.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Report and emitted-instance format.
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Dump the full certificate.
    #[arg(long)]
    pub verbose: bool,
    /// Output path for `reduce:*`; defaults to the input path with a new
    /// extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Density numerator for `reduce:densest-cut`.
    #[arg(long, default_value_t = 1)]
    pub a: i64,
    /// Density denominator for `reduce:densest-cut`.
    #[arg(long, default_value_t = 2)]
    pub b: i64,
    /// Seed for `selftest`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("certificate recheck failed: {0}")]
    Recheck(String),
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

/// Problem, answer, certificate and statistics as ordered key/value pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictReport {
    pub problem: String,
    pub answer: bool,
    pub certificate: Vec<(String, String)>,
    /// Printed with `--verbose` only.
    pub dump: Vec<(String, String)>,
    pub stats: Vec<(String, String)>,
}

impl VerdictReport {
    fn new(problem: &str, answer: bool) -> Self {
        VerdictReport { problem: problem.into(), answer, certificate: Vec::new(), dump: Vec::new(), stats: Vec::new() }
    }

    fn cert(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.certificate.push((key.into(), value.to_string()));
        self
    }

    /// Exact point plus a labeled decimal approximation.
    fn point(&mut self, key: &str, x: &[Rational]) -> &mut Self {
        self.cert(key, format_vec(x));
        let approx: Vec<String> = x.iter().map(|q| approx_decimal(q, 6)).collect();
        self.cert(&format!("{key}.approx"), format!("({})", approx.join(", ")))
    }

    fn value(&mut self, key: &str, q: &Rational) -> &mut Self {
        self.cert(key, format_rational(q));
        self.cert(&format!("{key}.approx"), approx_decimal(q, 6))
    }

    fn dump(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.dump.push((key.into(), value.to_string()));
        self
    }

    fn stat(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.stats.push((key.into(), value.to_string()));
        self
    }

    pub fn exit_code(&self) -> u8 {
        if self.answer {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format, verbose: bool) -> String {
        let dump: &[(String, String)] = if verbose { &self.dump } else { &[] };
        match format {
            Format::Text => {
                let mut out = format!("report: {REPORT_VERSION}\nproblem: {}\nanswer: {}\n", self.problem, self.answer);
                for (k, v) in self.certificate.iter().chain(dump) {
                    out.push_str(&format!("{k}: {v}\n"));
                }
                for (k, v) in &self.stats {
                    out.push_str(&format!("stats.{k}: {v}\n"));
                }
                out
            }
            Format::Object => {
                let pairs = |kv: &[(String, String)]| -> Map<String, Value> {
                    kv.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()
                };
                let mut certificate = pairs(&self.certificate);
                certificate.extend(pairs(dump));
                let value = json!({
                    "report": REPORT_VERSION,
                    "problem": self.problem,
                    "answer": self.answer,
                    "certificate": certificate,
                    "stats": pairs(&self.stats),
                });
                let mut s = serde_json::to_string_pretty(&value).expect("plain data");
                s.push('\n');
                s
            }
        }
    }
}

/// Parses arguments, runs, prints, and returns the exit code.
pub fn main() -> u8 {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(report) => {
            print!("{}", report.render(args.format.into(), args.verbose));
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs one command inside a pool of `--threads` workers.
pub fn run(args: &Args) -> Result<VerdictReport, CliError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads.max(1)).build().map_err(failed)?;
    let start = Instant::now();
    let mut report = pool.install(|| dispatch(args))?;
    report.stat("elapsed-ms", start.elapsed().as_millis());
    Ok(report)
}

fn load(args: &Args) -> Result<Instance, CliError> {
    let path = args.input.as_ref().ok_or_else(|| CliError::Usage(format!("`{}` needs an input file", args.command)))?;
    read_instance(path).map_err(|e| failed(format!("{}: {e}", path.display())))
}

fn wrong_kind(command: &str, inst: &Instance, expected: &str) -> CliError {
    CliError::Usage(format!("`{command}` expects a {expected} instance, got `{}`", inst.kind()))
}

fn dispatch(args: &Args) -> Result<VerdictReport, CliError> {
    let cmd = args.command.as_str();
    if cmd == "selftest" {
        return Ok(selftest_report(args.seed));
    }
    let inst = load(args)?;
    match cmd {
        "injectivity" => match &inst {
            Instance::Layer(l) => injectivity_report(cmd, l, layer_injectivity(l).map_err(failed)?),
            Instance::Network(n) if n.hidden.len() == 1 && n.output.is_none() => {
                let l = single_layer(n)?;
                injectivity_report(cmd, &l, layer_injectivity(&l).map_err(failed)?)
            }
            Instance::Network(n) => deep_injectivity_report(n, args.cap.unwrap_or(DEFAULT_NEURON_CAP)),
            other => Err(wrong_kind(cmd, other, "layer or network")),
        },
        "injectivity-oracle" => {
            let l = match &inst {
                Instance::Layer(l) => l.clone(),
                Instance::Network(n) if n.hidden.len() == 1 && n.output.is_none() => single_layer(n)?,
                other => return Err(wrong_kind(cmd, other, "layer")),
            };
            let cap = args.cap.unwrap_or(DEFAULT_NEURON_CAP);
            if l.neurons() > cap {
                return Err(failed(format!("{} neurons exceed the oracle cap of {cap}", l.neurons())));
            }
            injectivity_report(cmd, &l, injective_oracle(&l))
        }
        "positivity" | "surjectivity" | "zero-map" => {
            let net = scalar_net(cmd, &inst)?;
            range_report(cmd, &net)
        }
        "zonotope-contain" => {
            let Instance::ZonotopePair { outer, inner } = &inst else { return Err(wrong_kind(cmd, &inst, "zonotope-pair")) };
            let c = contains(outer, inner).map_err(failed)?;
            let mut r = VerdictReport::new(cmd, c.contained);
            match &c.separating_direction {
                Some(x) => {
                    if !separates(outer, inner, x).map_err(failed)? {
                        return Err(CliError::Recheck("direction does not separate the support functions".into()));
                    }
                    r.cert("certificate", "separating-direction").point("direction", x);
                    let h_in = crate::zonotope::support(inner, x).map_err(failed)?;
                    let h_out = crate::zonotope::support(outer, x).map_err(failed)?;
                    r.value("support.inner", &h_in).value("support.outer", &h_out);
                }
                None => {
                    r.cert("certificate", "no-positive-ray");
                }
            }
            r.stat("generators.outer", outer.len()).stat("generators.inner", inner.len());
            Ok(r)
        }
        "verify" | "max" => {
            let Instance::Verification { network, threshold, domain } = &inst else {
                return Err(wrong_kind(cmd, &inst, "verification"));
            };
            let net = TwoLayerScalarNet::from_network(network).map_err(failed)?;
            let poly = domain.polyhedron().map_err(failed)?;
            let domain_name = match domain {
                InputDomain::Polytope(_) => "polytope",
                InputDomain::BallInSubspace { .. } => "inscribed-box",
            };
            if cmd == "verify" {
                let v = verify(&net, &poly, threshold).map_err(failed)?;
                let mut r = VerdictReport::new(cmd, v.answer);
                r.cert("domain", domain_name).value("threshold", threshold);
                match &v.certificate {
                    VerificationCertificate::Violation { point, value } => {
                        if !(poly.contains(point) && net.eval(point) == *value && value > threshold) {
                            return Err(CliError::Recheck("violation point".into()));
                        }
                        r.cert("certificate", "violation").point("point", point).value("value", value);
                    }
                    VerificationCertificate::MaxCertified { value, point } => {
                        if !(poly.contains(point) && net.eval(point) == *value && value <= threshold) {
                            return Err(CliError::Recheck("maximizer".into()));
                        }
                        r.cert("certificate", "maximum").point("argmax", point).value("max", value);
                    }
                }
                Ok(r)
            } else {
                let m = exact_max(&net, &poly).map_err(failed)?;
                let attained = matches!(m.max, MaxValue::Attained { .. });
                let mut r = VerdictReport::new(cmd, attained);
                r.cert("domain", domain_name);
                match &m.max {
                    MaxValue::Attained { value, point } => {
                        if !(poly.contains(point) && net.eval(point) == *value) {
                            return Err(CliError::Recheck("maximizer".into()));
                        }
                        r.cert("certificate", "attained").point("argmax", point).value("max", value);
                    }
                    MaxValue::Unbounded { point, ray } => {
                        let far = add_scaled(point, &int(1), ray);
                        if !(poly.contains(point) && poly.contains(&far) && net.eval(&far) > net.eval(point)) {
                            return Err(CliError::Recheck("unbounded ray".into()));
                        }
                        r.cert("certificate", "unbounded").point("point", point).point("ray", ray);
                    }
                }
                r.stat("pieces", m.pieces);
                Ok(r)
            }
        }
        _ => {
            if let Some(name) = cmd.strip_prefix("reduce:") {
                reduce(args, name, &inst)
            } else if let Some(name) = cmd.strip_prefix("oracle:") {
                oracle(cmd, name, &inst, args.cap)
            } else {
                Err(CliError::Usage(format!("unknown command `{cmd}`")))
            }
        }
    }
}

fn single_layer(n: &LayeredNetwork) -> Result<ReluLayer, CliError> {
    let l = &n.hidden[0];
    ReluLayer::new(l.weights.clone(), l.bias.clone()).map_err(failed)
}

fn scalar_net(cmd: &str, inst: &Instance) -> Result<TwoLayerScalarNet, CliError> {
    match inst {
        Instance::Network(n) => TwoLayerScalarNet::from_network(n).map_err(failed),
        Instance::Verification { network, .. } => TwoLayerScalarNet::from_network(network).map_err(failed),
        other => Err(wrong_kind(cmd, other, "two-layer scalar network")),
    }
}

fn check_collision(
    eval: impl Fn(&[Rational]) -> Vec<Rational>,
    c: &crate::injectivity::Collision,
) -> Result<(), CliError> {
    if c.first == c.second || eval(&c.first) != eval(&c.second) || eval(&c.first) != c.image {
        return Err(CliError::Recheck("collision pair".into()));
    }
    Ok(())
}

fn injectivity_report(cmd: &str, layer: &ReluLayer, v: InjectivityVerdict) -> Result<VerdictReport, CliError> {
    let mut r = VerdictReport::new(cmd, v.injective);
    match &v.certificate {
        InjectivityCertificate::NonInjectiveWitness { point, active, rank, collision } => {
            if verify_noninjectivity_witness(layer, point).is_none() {
                return Err(CliError::Recheck("witness point has full-rank active rows".into()));
            }
            check_collision(|x| layer.eval(x), collision)?;
            r.cert("certificate", "rank-deficient-witness").point("witness", point);
            r.cert("active", format!("{:?}", active.iter().map(|i| i + 1).collect::<Vec<_>>()));
            r.cert("rank", rank);
            r.point("collision.first", &collision.first).point("collision.second", &collision.second);
            r.dump("collision.image", format_vec(&collision.image));
        }
        InjectivityCertificate::InjectiveExhausted { examined } => {
            r.cert("certificate", "exhausted").cert("examined", examined);
        }
        InjectivityCertificate::RegionCollision { .. } => unreachable!("single-layer procedures"),
    }
    let d = layer.input_dim();
    r.stat("neurons", layer.neurons()).stat("input-dim", d).stat("examined", v.examined);
    if cmd == "injectivity" {
        r.stat("search-tree-bound", search_tree_bound(d));
    }
    Ok(r)
}

fn deep_injectivity_report(net: &LayeredNetwork, cap: usize) -> Result<VerdictReport, CliError> {
    let v = deep_injectivity_bruteforce(net, cap).map_err(failed)?;
    let mut r = VerdictReport::new("injectivity", v.injective);
    match &v.certificate {
        InjectivityCertificate::RegionCollision { regions, collision } => {
            check_collision(|x| net.eval(x), collision)?;
            let show = |s: &[Vec<crate::arrangement::Sign>]| s.iter().map(|l| format_signs(l)).collect::<Vec<_>>().join("|");
            r.cert("certificate", "region-collision");
            r.point("collision.first", &collision.first).point("collision.second", &collision.second);
            r.dump("region.first", show(&regions.0)).dump("region.second", show(&regions.1));
            r.dump("collision.image", format_vec(&collision.image));
        }
        InjectivityCertificate::InjectiveExhausted { examined } => {
            r.cert("certificate", "exhausted").cert("examined", examined);
        }
        InjectivityCertificate::NonInjectiveWitness { .. } => unreachable!("deep procedure"),
    }
    r.stat("hidden-neurons", net.hidden_neurons()).stat("region-pairs", v.examined);
    Ok(r)
}

fn range_report(cmd: &str, net: &TwoLayerScalarNet) -> Result<VerdictReport, CliError> {
    let f0 = |x: &[Rational]| net.eval_homogeneous(x);
    let mut r;
    if cmd == "zero-map" {
        match zero_map_check(net).map_err(failed)? {
            ZeroMapVerdict::Zero => {
                r = VerdictReport::new(cmd, true);
                r.cert("certificate", "zero-map");
            }
            ZeroMapVerdict::Nonzero(x) => {
                let v = f0(&x);
                if v.is_zero() {
                    return Err(CliError::Recheck("nonzero point evaluates to 0".into()));
                }
                r = VerdictReport::new(cmd, false);
                r.cert("certificate", "nonzero-point").point("point", &x).value("value", &v);
            }
        }
    } else {
        let v = if cmd == "positivity" { positivity(net) } else { surjectivity(net) }.map_err(failed)?;
        r = VerdictReport::new(cmd, v.answer);
        match &v.certificate {
            RangeCertificate::PositiveRay(x) => {
                if !f0(x).is_positive() {
                    return Err(CliError::Recheck("ray value is not positive".into()));
                }
                r.cert("certificate", "positive-ray").point("ray", x).value("value", &f0(x));
            }
            RangeCertificate::RayPair { positive, negative } => {
                if !(f0(positive).is_positive() && f0(negative).is_negative()) {
                    return Err(CliError::Recheck("ray pair signs".into()));
                }
                r.cert("certificate", "ray-pair").point("positive", positive).point("negative", negative);
                r.value("value.positive", &f0(positive)).value("value.negative", &f0(negative));
            }
            RangeCertificate::SignUniform { rays } => {
                r.cert("certificate", "sign-uniform").cert("rays", rays);
            }
            RangeCertificate::ZeroMap => {
                r.cert("certificate", "zero-map");
            }
        }
    }
    r.stat("hidden", net.hidden()).stat("input-dim", net.input_dim());
    Ok(r)
}

fn default_out(input: &Path, ext: &str) -> PathBuf {
    input.with_extension(ext)
}

fn reduce(args: &Args, name: &str, inst: &Instance) -> Result<VerdictReport, CliError> {
    let cmd = args.command.as_str();
    let mut r = VerdictReport::new(cmd, true);
    let (produced, ext) = match (name, inst) {
        ("positive-cut", Instance::Graph(g)) => {
            let net = positive_cut_to_network(g).map_err(failed)?;
            r.stat("hidden", net.hidden());
            (Instance::Network(net.to_network()), "net")
        }
        ("densest-cut", Instance::Graph(g)) => {
            let out = densest_cut_to_positive_cut(g, args.a, args.b).map_err(failed)?;
            r.stat("edges", out.edges().len());
            (Instance::Graph(out), "cut.graph")
        }
        ("digraph", Instance::Digraph(d)) => {
            let layer = digraph_to_layer(d).map_err(failed)?;
            r.stat("neurons", layer.neurons()).stat("input-dim", layer.input_dim());
            (Instance::Layer(layer), "layer")
        }
        ("hypergraph", Instance::Hypergraph(h)) => {
            let (d, layout) = hypergraph_construction(h);
            if d.arcs().len() != hypergraph_arc_count(h) {
                return Err(CliError::Recheck("arc count differs from the closed form".into()));
            }
            r.stat("nodes", layout.total).stat("arcs", d.arcs().len());
            (Instance::Digraph(d), "digraph")
        }
        ("positive-cut" | "densest-cut", other) | ("digraph", other) | ("hypergraph", other) => {
            let want = match name {
                "digraph" => "digraph",
                "hypergraph" => "hypergraph",
                _ => "graph",
            };
            return Err(wrong_kind(cmd, other, want));
        }
        _ => return Err(CliError::Usage(format!("unknown reduction `{name}`"))),
    };
    let input = args.input.as_deref().expect("loaded from a path");
    let out = args.out.clone().unwrap_or_else(|| default_out(input, ext));
    std::fs::write(&out, emit(&produced, args.format.into())).map_err(|e| failed(format!("{}: {e}", out.display())))?;
    r.cert("wrote", out.display()).cert("kind", produced.kind());
    Ok(r)
}

fn check_coloring(h: &crate::reductions::Hypergraph3, colors: &[bool]) -> bool {
    h.edges().iter().all(|e| !(colors[e[0]] == colors[e[1]] && colors[e[1]] == colors[e[2]]))
}

fn one_based(nodes: &[usize]) -> String {
    format!("{:?}", nodes.iter().map(|v| v + 1).collect::<Vec<_>>())
}

fn arcs_text(arcs: &[(usize, usize)]) -> String {
    arcs.iter().map(|(u, v)| format!("{}>{}", u + 1, v + 1)).collect::<Vec<_>>().join(" ")
}

fn oracle(cmd: &str, name: &str, inst: &Instance, cap: Option<usize>) -> Result<VerdictReport, CliError> {
    match (name, inst) {
        ("positive-cut", Instance::Graph(g)) => {
            let cut = positive_cut_oracle(g, cap.unwrap_or(CUT_CAP)).map_err(failed)?;
            let mut r = VerdictReport::new(cmd, cut.is_some());
            if let Some(c) = cut {
                let side: Vec<bool> = (0..g.nodes()).map(|v| c.side.contains(&v)).collect();
                if g.cut_weight(&side) != c.weight || c.weight <= 0 {
                    return Err(CliError::Recheck("cut weight".into()));
                }
                r.cert("certificate", "cut").cert("side", one_based(&c.side)).cert("weight", c.weight);
            }
            r.stat("nodes", g.nodes());
            Ok(r)
        }
        ("acyclic-2-disconnection", Instance::Digraph(d)) => {
            let found = acyclic_2disconnection_oracle(d, cap.unwrap_or(BIPARTITION_CAP)).map_err(failed)?;
            let mut r = VerdictReport::new(cmd, found.is_some());
            if let Some(t) = found {
                recheck_disconnection(d, &t.removed)?;
                r.cert("certificate", "bipartition").cert("side", one_based(&t.side)).cert("removed", arcs_text(&t.removed));
            }
            r.stat("nodes", d.nodes()).stat("arcs", d.arcs().len());
            Ok(r)
        }
        ("acyclic-2-disconnection-orders", Instance::Digraph(d)) => {
            let found = acyclic_2disconnection_by_orders(d, cap.unwrap_or(PERMUTATION_CAP)).map_err(failed)?;
            let mut r = VerdictReport::new(cmd, found.is_some());
            if let Some(removed) = found {
                recheck_disconnection(d, &removed)?;
                r.cert("certificate", "removed-arcs").cert("removed", arcs_text(&removed));
            }
            r.stat("nodes", d.nodes()).stat("arcs", d.arcs().len());
            Ok(r)
        }
        ("coloring", Instance::Hypergraph(h)) => {
            let found = coloring_oracle(h, cap.unwrap_or(COLORING_CAP)).map_err(failed)?;
            let mut r = VerdictReport::new(cmd, found.is_some());
            if let Some(colors) = found {
                if !check_coloring(h, &colors) {
                    return Err(CliError::Recheck("monochromatic hyperedge".into()));
                }
                let ones: Vec<usize> = (0..h.nodes()).filter(|&v| colors[v]).collect();
                r.cert("certificate", "coloring").cert("color-1", one_based(&ones));
            }
            r.stat("nodes", h.nodes()).stat("edges", h.edges().len());
            Ok(r)
        }
        ("positive-cut" | "acyclic-2-disconnection" | "acyclic-2-disconnection-orders" | "coloring", other) => {
            let want = match name {
                "positive-cut" => "graph",
                "coloring" => "hypergraph",
                _ => "digraph",
            };
            Err(wrong_kind(cmd, other, want))
        }
        _ => Err(CliError::Usage(format!("unknown oracle `{name}`"))),
    }
}

fn recheck_disconnection(d: &Digraph, removed: &[(usize, usize)]) -> Result<(), CliError> {
    if check_two_disconnection(d, removed) {
        Ok(())
    } else {
        Err(CliError::Recheck("removed arcs are cyclic or leave the digraph connected".into()))
    }
}

/// Agreement counts of one cross-check suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub agreed: usize,
    pub total: usize,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.agreed == self.total
    }
}

fn suite(name: &'static str, outcomes: impl Iterator<Item = bool>) -> SuiteResult {
    let (mut agreed, mut total) = (0, 0);
    for ok in outcomes {
        total += 1;
        agreed += ok as usize;
    }
    SuiteResult { name, agreed, total }
}

/// Cross-module agreement at reduced scale.
pub fn selftest(seed: u64) -> Vec<SuiteResult> {
    let mut rng = generate::seeded(seed);
    let mut out = Vec::new();

    let layers: Vec<_> = (0..60)
        .map(|i| {
            let d = 1 + i % 3;
            let m = 1 + i % 6;
            generate::layer(&mut rng, d, m, 2)
        })
        .collect();
    out.push(suite(
        "injectivity",
        layers.iter().map(|l| {
            let fast = layer_injectivity(l).expect("valid layer");
            let slow = injective_oracle(l);
            fast.injective == slow.injective
                && fast.witness_point().is_none_or(|x| verify_noninjectivity_witness(l, x).is_some())
        }),
    ));

    let graphs: Vec<_> = (0..40).map(|i| generate::graph(&mut rng, 2 + i % 4, 0.6, 3)).collect();
    out.push(suite(
        "positive-cut",
        graphs.iter().map(|g| {
            let net = positive_cut_to_network(g).expect("n >= 1");
            positivity(&net).expect("valid net").answer == positive_cut_oracle(g, CUT_CAP).expect("small").is_some()
        }),
    ));

    let digraphs: Vec<_> = (0..40).map(|i| generate::digraph(&mut rng, 2 + i % 3, 0.4)).collect();
    out.push(suite(
        "digraph",
        digraphs.iter().map(|d| {
            let layer = digraph_to_layer(d).expect("has arcs");
            let yes = acyclic_2disconnection_oracle(d, BIPARTITION_CAP).expect("small").is_some();
            let by_orders = acyclic_2disconnection_by_orders(d, PERMUTATION_CAP).expect("small").is_some();
            layer_injectivity(&layer).expect("valid layer").injective == !yes && yes == by_orders
        }),
    ));

    out.push(suite(
        "hypergraph",
        (3..=4).flat_map(generate::all_hypergraphs).map(|h| {
            let colorable = coloring_oracle(&h, COLORING_CAP).expect("small").is_some();
            let d = hypergraph_construction(&h).0;
            colorable == acyclic_2disconnection_oracle(&d, BIPARTITION_CAP).expect("contracted").is_some()
        }),
    ));

    let pairs: Vec<_> = (0..30)
        .map(|i| {
            let d = 1 + i % 2;
            (generate::zonotope(&mut rng, d, 1 + i % 4, 2), generate::zonotope(&mut rng, d, 1 + i % 3, 2))
        })
        .collect();
    out.push(suite(
        "zonotope",
        pairs.iter().map(|(outer, inner)| {
            let c = contains(outer, inner).expect("same dim");
            c.contained == crate::zonotope::contains_by_vertices(outer, inner).expect("small")
                && c.separating_direction.as_ref().is_none_or(|x| separates(outer, inner, x).expect("same dim"))
        }),
    ));

    let nets: Vec<_> = (0..30).map(|i| generate::two_layer(&mut rng, 1 + i % 3, 1 + i % 4, 2, true)).collect();
    out.push(suite(
        "bias-invariance",
        nets.iter().map(|n| {
            surjectivity(n).expect("valid").answer == surjectivity(&n.without_biases()).expect("valid").answer
        }),
    ));

    let triples: Vec<_> = (0..20)
        .map(|i| {
            let k = 1 + i % 2;
            let d = k + i % 2;
            let f = generate::two_layer(&mut rng, k, 1 + i % 3, 2, false);
            let center = generate::int_vec(&mut rng, d, 2);
            let basis = generate::independent_basis(&mut rng, k, d, 2);
            (f, center, basis, int(i as i64 % 3 - 1))
        })
        .collect();
    out.push(suite(
        "verification",
        triples.iter().map(|(f, center, basis, t)| {
            let g = build_verification_instance(f, center, basis, t).expect("shapes agree");
            let domain = inscribed_box(center, basis, &int(1)).expect("independent basis");
            verify(&g, &domain, t).expect("closed domain").answer == !positivity(f).expect("valid").answer
        }),
    ));
    out
}

fn selftest_report(seed: u64) -> VerdictReport {
    let results = selftest(seed);
    let mut r = VerdictReport::new("selftest", results.iter().all(SuiteResult::passed));
    for s in &results {
        r.cert(&format!("suite.{}", s.name), format!("{}/{}", s.agreed, s.total));
    }
    r.stat("seed", seed);
    r
}
