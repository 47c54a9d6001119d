//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! cargo test --test acceptance

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::Rng;
use relu_cert::arrangement::ReluLayer;
use relu_cert::exact::{int, qvec, ratio, RMatrix, RVector, Rational};
use relu_cert::generate::{self, seeded};
use relu_cert::injectivity::{
    injective_oracle, layer_injectivity, search_tree_bound, verify_noninjectivity_witness, InjectivityVerdict,
};
use relu_cert::lp::{helly_audit, Polyhedron};
use relu_cert::range::{positivity, surjectivity, zero_map_check, RangeError, RangeVerdict, TwoLayerScalarNet};
use relu_cert::reductions::{
    acyclic_2disconnection_by_orders, acyclic_2disconnection_oracle, check_two_disconnection, coloring_oracle,
    digraph_to_layer, hypergraph_arc_count, hypergraph_construction, positive_cut_oracle, positive_cut_to_network,
    BIPARTITION_CAP, COLORING_CAP, CUT_CAP, PERMUTATION_CAP,
};
use relu_cert::verification::{build_verification_instance, exact_max, inscribed_box, verify, MaxValue};
use relu_cert::zonotope::{contains, contains_by_vertices, support};

const COUNTEREXAMPLE_LIMIT: Duration = Duration::from_secs(1);
const RANDOM_LAYER_LIMIT: Duration = Duration::from_secs(120);
const WIDE_LAYER_LIMIT: Duration = Duration::from_secs(10);
const GRAPH_LIMIT: Duration = Duration::from_secs(120);
const HYPERGRAPH_LIMIT: Duration = Duration::from_secs(30 * 60);

const RANDOM_LAYERS: usize = 500;
const WIDE_LAYERS: usize = 3;
const GRAPHS: usize = 300;
const DIGRAPHS: usize = 300;
const BIAS_NETS: usize = 200;
const ZONOTOPE_PAIRS: usize = 200;
const VERIFICATION_TRIPLES: usize = 100;
const GRID_NETS: usize = 40;

/// `zero_map_check` proof violations seen anywhere in the suite.
static PROOF_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

fn range_checked(r: Result<RangeVerdict, RangeError>) -> RangeVerdict {
    match r {
        Err(RangeError::ProofViolation) => {
            PROOF_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            panic!("zero-map proof violation");
        }
        other => other.expect("range procedures accept these nets"),
    }
}

fn pos(net: &TwoLayerScalarNet) -> bool {
    range_checked(positivity(net)).answer
}

fn surj(net: &TwoLayerScalarNet) -> bool {
    range_checked(surjectivity(net)).answer
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn collision_ok(layer: &ReluLayer, v: &InjectivityVerdict) -> bool {
    match (v.witness_point(), v.collision()) {
        (Some(x), Some(c)) => {
            verify_noninjectivity_witness(layer, x).is_some()
                && c.first != c.second
                && layer.eval(&c.first) == layer.eval(&c.second)
        }
        _ => false,
    }
}

fn counterexamples() -> Outcome {
    let start = Instant::now();
    let hinge = ReluLayer::new(RMatrix::from_i64(&[&[1], &[-1]]), qvec(&[-1, 1])).unwrap();
    let flat = ReluLayer::homogeneous(RMatrix::from_i64(&[&[0], &[-1]])).unwrap();
    let hinge_fast = layer_injectivity(&hinge).unwrap();
    let flat_fast = layer_injectivity(&flat).unwrap();
    let ok = hinge_fast.injective
        && injective_oracle(&hinge).injective
        && !flat_fast.injective
        && !injective_oracle(&flat).injective
        && collision_ok(&flat, &flat_fast)
        && collision_ok(&flat, &injective_oracle(&flat));
    let elapsed = start.elapsed();
    outcome(ok && elapsed < COUNTEREXAMPLE_LIMIT, format!("hinge injective, zero-row layer collides; {elapsed:.2?}"))
}

struct LayerRun {
    agreed: usize,
    witnesses_ok: bool,
    within_bound: usize,
    total: usize,
    elapsed: Duration,
}

fn random_layers() -> LayerRun {
    let mut rng = seeded(2024);
    let start = Instant::now();
    let mut run = LayerRun { agreed: 0, witnesses_ok: true, within_bound: 0, total: 0, elapsed: Duration::ZERO };
    for _ in 0..RANDOM_LAYERS {
        let d = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=10);
        let layer = generate::rational_layer(&mut rng, d, m, 3);
        let fast = layer_injectivity(&layer).unwrap();
        let slow = injective_oracle(&layer);
        run.total += 1;
        run.agreed += (fast.injective == slow.injective) as usize;
        run.within_bound += (fast.examined as u128 <= search_tree_bound(d)) as usize;
        if !fast.injective {
            run.witnesses_ok &= collision_ok(&layer, &fast);
        }
    }
    run.elapsed = start.elapsed();
    run
}

fn wide_layers(run: &LayerRun) -> Outcome {
    let mut rng = seeded(77);
    let mut slowest = Duration::ZERO;
    let mut nodes_ok = true;
    let mut verdicts = Vec::new();
    for _ in 0..WIDE_LAYERS {
        let layer = generate::rational_layer(&mut rng, 3, 200, 3);
        let start = Instant::now();
        let v = layer_injectivity(&layer).unwrap();
        slowest = slowest.max(start.elapsed());
        nodes_ok &= v.examined as u128 <= search_tree_bound(3);
        verdicts.push(v.injective);
    }
    let ok = run.within_bound == run.total && nodes_ok && slowest < WIDE_LAYER_LIMIT;
    outcome(
        ok,
        format!(
            "{}/{} random layers within the node bound; d=3, m=200 slowest {slowest:.2?} (verdicts {verdicts:?})",
            run.within_bound, run.total
        ),
    )
}

fn graphs() -> Outcome {
    let mut rng = seeded(31);
    let start = Instant::now();
    let mut agreed = 0;
    for i in 0..GRAPHS {
        let n = 1 + i % 6;
        let density = rng.gen_range(0.2..0.9);
        let g = generate::graph(&mut rng, n, density, 3);
        let net = positive_cut_to_network(&g).unwrap();
        agreed += (pos(&net) == positive_cut_oracle(&g, CUT_CAP).unwrap().is_some()) as usize;
    }
    let elapsed = start.elapsed();
    outcome(agreed == GRAPHS && elapsed < GRAPH_LIMIT, format!("{agreed}/{GRAPHS} graphs agree; {elapsed:.2?}"))
}

fn digraphs() -> Outcome {
    let mut rng = seeded(53);
    let mut agreed = 0;
    let mut oracles_agree = 0;
    for i in 0..DIGRAPHS {
        let n = 2 + i % 4;
        let density = rng.gen_range(0.1..0.8);
        let d = generate::digraph(&mut rng, n, density);
        let yes = acyclic_2disconnection_oracle(&d, BIPARTITION_CAP).unwrap();
        let sound = yes.as_ref().is_none_or(|t| check_two_disconnection(&d, &t.removed));
        let injective = layer_injectivity(&digraph_to_layer(&d).unwrap()).unwrap().injective;
        agreed += (sound && injective == yes.is_none()) as usize;
    }
    for i in 0..DIGRAPHS {
        let n = 2 + i % 5;
        let density = rng.gen_range(0.1..0.8);
        let d = generate::digraph(&mut rng, n, density);
        let a = acyclic_2disconnection_oracle(&d, BIPARTITION_CAP).unwrap().is_some();
        let b = acyclic_2disconnection_by_orders(&d, PERMUTATION_CAP).unwrap().is_some();
        oracles_agree += (a == b) as usize;
    }
    outcome(
        agreed == DIGRAPHS && oracles_agree == DIGRAPHS,
        format!("{agreed}/{DIGRAPHS} layers agree (n <= 5); oracles agree on {oracles_agree}/{DIGRAPHS} (n <= 6)"),
    )
}

fn hypergraphs() -> Outcome {
    let start = Instant::now();
    let (mut agreed, mut sizes_ok, mut total) = (0, 0, 0);
    for n in 1..=4 {
        for h in generate::all_hypergraphs(n) {
            total += 1;
            let m = h.edges().len();
            let (d, layout) = hypergraph_construction(&h);
            let sizes = layout.u.iter().all(|u| u.len() == n + 2 * m)
                && (0..n).all(|v| layout.x[v].len() == 2 * h.degree(v) + 2)
                && layout.q.len() == 4 * m
                && d.nodes() == layout.total
                && d.arcs().len() == hypergraph_arc_count(&h);
            sizes_ok += sizes as usize;
            let colorable = coloring_oracle(&h, COLORING_CAP).unwrap().is_some();
            agreed += (colorable == acyclic_2disconnection_oracle(&d, BIPARTITION_CAP).unwrap().is_some()) as usize;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        agreed == total && sizes_ok == total && elapsed < HYPERGRAPH_LIMIT,
        format!("{agreed}/{total} hypergraphs agree, {sizes_ok}/{total} layouts match the closed forms; {elapsed:.2?}"),
    )
}

fn surjectivity_suite() -> Outcome {
    let mut rng = seeded(89);
    let mut invariant = 0;
    for i in 0..BIAS_NETS {
        let net = generate::two_layer(&mut rng, 1 + i % 3, 1 + i % 6, 3, true);
        invariant += (surj(&net) == surj(&net.without_biases())) as usize;
        let _ = zero_map_check(&net).map_err(|e| {
            if e == RangeError::ProofViolation {
                PROOF_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            }
        });
    }
    let identity = TwoLayerScalarNet::new(RMatrix::from_i64(&[&[1], &[-1]]), qvec(&[1, -1])).unwrap();
    let abs = TwoLayerScalarNet::new(RMatrix::from_i64(&[&[1], &[-1]]), qvec(&[1, 1])).unwrap();
    let abs2 = TwoLayerScalarNet::new(RMatrix::from_i64(&[&[1, 1], &[-1, -1]]), qvec(&[1, 1])).unwrap();
    let fixed = surj(&identity) && !surj(&abs) && !surj(&abs2) && !surj(&abs.negated());
    outcome(
        invariant == BIAS_NETS && fixed,
        format!("{invariant}/{BIAS_NETS} nets bias invariant; identity surjective, |x| nets not"),
    )
}

fn zonotopes() -> Outcome {
    let mut rng = seeded(97);
    let (mut agreed, mut certified) = (0, 0);
    for _ in 0..ZONOTOPE_PAIRS {
        let d = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=6);
        let outer = generate::zonotope(&mut rng, d, n, 2);
        let inner = generate::zonotope(&mut rng, d, k, 2);
        let c = contains(&outer, &inner).unwrap();
        agreed += (c.contained == contains_by_vertices(&outer, &inner).unwrap()) as usize;
        certified += match &c.separating_direction {
            Some(r) => support(&inner, r).unwrap() > support(&outer, r).unwrap(),
            None => c.contained,
        } as usize;
    }
    outcome(
        agreed == ZONOTOPE_PAIRS && certified == ZONOTOPE_PAIRS,
        format!("{agreed}/{ZONOTOPE_PAIRS} pairs agree, {certified}/{ZONOTOPE_PAIRS} certificates exact"),
    )
}

fn grid(d: usize) -> Vec<RVector> {
    let steps: Vec<Rational> = (-8..=8).map(|i| ratio(i, 8)).collect();
    let mut points = vec![Vec::new()];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p: RVector| steps.iter().map(move |s| [p.clone(), vec![s.clone()]].concat()))
            .collect();
    }
    points
}

fn verification() -> Outcome {
    let mut rng = seeded(101);
    let mut agreed = 0;
    for i in 0..VERIFICATION_TRIPLES {
        let k = 1 + i % 3;
        let d = rng.gen_range(k..=5);
        let m = rng.gen_range(1..=5);
        let f = generate::two_layer(&mut rng, k, m, 2, false);
        let center = generate::int_vec(&mut rng, d, 3);
        let basis = generate::independent_basis(&mut rng, k, d, 2);
        let t = int(rng.gen_range(-3..=3));
        let radius = ratio(1, rng.gen_range(1..=4));
        let g = build_verification_instance(&f, &center, &basis, &t).unwrap();
        let domain = inscribed_box(&center, &basis, &radius).unwrap();
        agreed += (pos(&f) == !verify(&g, &domain, &t).unwrap().answer) as usize;
    }
    let mut grid_ok = 0;
    for i in 0..GRID_NETS {
        let d = 1 + i % 2;
        let m = rng.gen_range(1..=4);
        let f = generate::two_layer(&mut rng, d, m, 3, true);
        let square = Polyhedron::cube(d, &int(-1), &int(1));
        let ok = match exact_max(&f, &square).unwrap().max {
            MaxValue::Attained { value, point } => {
                square.contains(&point) && f.eval(&point) == value && grid(d).iter().all(|x| f.eval(x) <= value)
            }
            MaxValue::Unbounded { .. } => false,
        };
        grid_ok += ok as usize;
    }
    outcome(
        agreed == VERIFICATION_TRIPLES && grid_ok == GRID_NETS,
        format!("{agreed}/{VERIFICATION_TRIPLES} triples agree; {grid_ok}/{GRID_NETS} maxima bound the 1/8 grid"),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| e.downcast_ref::<String>().cloned());
        outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
    })
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "counterexample fidelity", guarded(counterexamples)));
    let run = catch_unwind(random_layers).ok();
    results.push((
        2,
        "fast search agrees with the cell oracle",
        match &run {
            Some(r) => outcome(
                r.agreed == r.total && r.witnesses_ok && r.total >= 500 && r.elapsed < RANDOM_LAYER_LIMIT,
                format!("{}/{} layers agree, witnesses verified: {}; {:.2?}", r.agreed, r.total, r.witnesses_ok, r.elapsed),
            ),
            None => outcome(false, "panicked"),
        },
    ));
    results.push((
        3,
        "search-tree size bound",
        match &run {
            Some(r) => guarded(|| wide_layers(r)),
            None => outcome(false, "random layer run panicked"),
        },
    ));
    results.push((5, "positive cut chain", guarded(graphs)));
    results.push((6, "digraph chain", guarded(digraphs)));
    results.push((7, "hypergraph construction", guarded(hypergraphs)));
    results.push((8, "surjectivity and zero map", guarded(surjectivity_suite)));
    results.push((9, "zonotope containment", guarded(zonotopes)));
    results.push((10, "verification equivalence", guarded(verification)));

    let audit = helly_audit();
    results.push((
        4,
        "helly covers",
        outcome(audit.calls > 0 && audit.violations == 0, format!("{} calls, {} violations", audit.calls, audit.violations)),
    ));
    let violations = PROOF_VIOLATIONS.load(Ordering::Relaxed);
    if violations > 0 {
        let entry = results.iter_mut().find(|r| r.0 == 8).expect("criterion 8 ran");
        entry.2.ok = false;
        entry.2.detail.push_str(&format!("; {violations} zero-map proof violations"));
    }
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("criterion {id:>2} [{}] {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.ok) as usize;
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
