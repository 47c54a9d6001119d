use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::Rng;
use relu_cert::arrangement::{active_matrix, enumerate_cells, ReluLayer};
use relu_cert::exact::{dot, int, ratio, unit_vec, RMatrix, RVector, Rational};
use relu_cert::generate::{self, rational_layer, seeded, small_rational};
use relu_cert::injectivity::{injective_oracle, layer_injectivity, search_tree_bound, verify_noninjectivity_witness};
use relu_cert::lp::{Constraint, Polyhedron};
use relu_cert::range::{positivity, surjectivity, zero_map_check, RangeCertificate, TwoLayerScalarNet, ZeroMapVerdict};
use relu_cert::verification::{build_verification_instance, exact_max, inscribed_box, verify, MaxValue, VerificationCertificate};
use relu_cert::zonotope::{contains, contains_by_vertices, support, vertices, Zonotope};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn point(rng: &mut generate::InstanceRng, d: usize, bound: i64) -> RVector {
    (0..d).map(|_| small_rational(rng, bound)).collect()
}

fn verdicts(net: &TwoLayerScalarNet) -> (bool, bool, bool) {
    (
        positivity(net).unwrap().answer,
        surjectivity(net).unwrap().answer,
        zero_map_check(net).unwrap() == ZeroMapVerdict::Zero,
    )
}

fn check_range_certificate(net: &TwoLayerScalarNet, c: &RangeCertificate) -> bool {
    match c {
        RangeCertificate::PositiveRay(r) => net.eval_homogeneous(r).is_positive(),
        RangeCertificate::RayPair { positive, negative } => {
            net.eval_homogeneous(positive).is_positive() && net.eval_homogeneous(negative).is_negative()
        }
        _ => true,
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn injectivity_procedures_agree(seed in any::<u64>(), d in 1usize..=4, m in 1usize..=8) {
        let layer = rational_layer(&mut seeded(seed), d, m, 3);
        let fast = layer_injectivity(&layer).unwrap();
        prop_assert_eq!(fast.injective, injective_oracle(&layer).injective);
        prop_assert!(fast.examined as u128 <= search_tree_bound(d));
        if let Some(x) = fast.witness_point() {
            prop_assert!(verify_noninjectivity_witness(&layer, x).is_some());
            let c = fast.collision().unwrap();
            prop_assert!(c.first != c.second);
            prop_assert_eq!(layer.eval(&c.first), layer.eval(&c.second));
        }
    }

    #[test]
    fn injective_layers_survive_collision_probes(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=8) {
        let mut rng = seeded(seed);
        let layer = rational_layer(&mut rng, d, m, 3);
        if layer_injectivity(&layer).unwrap().injective {
            for _ in 0..1000 {
                let x = point(&mut rng, d, 4);
                let y = point(&mut rng, d, 4);
                if x != y {
                    prop_assert_ne!(layer.eval(&x), layer.eval(&y));
                }
            }
        }
    }

    #[test]
    fn adding_the_coordinate_cross_makes_layers_injective(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=5) {
        let layer = rational_layer(&mut seeded(seed), d, m, 3);
        let mut rows = layer.weights().to_rows();
        let mut bias = layer.bias().to_vec();
        for i in 0..d {
            rows.push(unit_vec(d, i));
            rows.push(unit_vec(d, i).iter().map(|v| -v).collect());
            bias.extend([int(0), int(0)]);
        }
        let bigger = ReluLayer::new(RMatrix::from_rows(rows, d).unwrap(), bias).unwrap();
        prop_assert!(layer_injectivity(&bigger).unwrap().injective);
    }

    #[test]
    fn biases_do_not_change_range_verdicts(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=5) {
        let net = generate::two_layer(&mut seeded(seed), d, m, 3, true);
        prop_assert_eq!(surjectivity(&net).unwrap().answer, surjectivity(&net.without_biases()).unwrap().answer);
    }

    #[test]
    fn positive_row_scaling_keeps_verdicts(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=5, num in 1i64..6, den in 1i64..6) {
        let mut rng = seeded(seed);
        let net = generate::two_layer(&mut rng, d, m, 3, false);
        let i = rng.gen_range(0..m);
        let c = ratio(num, den);
        let mut rows = net.w1.to_rows();
        rows[i] = rows[i].iter().map(|v| v * &c).collect();
        let mut w2 = net.w2.clone();
        w2[i] = &w2[i] / &c;
        let scaled = TwoLayerScalarNet::new(RMatrix::from_rows(rows, d).unwrap(), w2).unwrap();
        prop_assert_eq!(verdicts(&net), verdicts(&scaled));
    }

    #[test]
    fn range_certificates_are_sound(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=6) {
        let net = generate::two_layer(&mut seeded(seed), d, m, 2, false);
        let p = positivity(&net).unwrap();
        let s = surjectivity(&net).unwrap();
        prop_assert!(check_range_certificate(&net, &p.certificate));
        prop_assert!(check_range_certificate(&net, &s.certificate));
        prop_assert_eq!(p.answer, matches!(p.certificate, RangeCertificate::PositiveRay(_)));
        if let ZeroMapVerdict::Nonzero(x) = zero_map_check(&net).unwrap() {
            prop_assert!(!net.eval_homogeneous(&x).is_zero());
        }
    }

    #[test]
    fn zero_map_matches_regionwise_gradients(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=5) {
        let mut rng = seeded(seed);
        // Duplicate rows with opposite weights make zero maps common.
        let half = generate::int_matrix(&mut rng, m, d, 2);
        let mut rows = half.to_rows();
        let mut w2 = generate::int_vec(&mut rng, m, 2);
        if rng.gen_bool(0.5) {
            for i in 0..m {
                rows.push(rows[i].iter().map(|v| v * int(2)).collect());
                w2.push(-&w2[i] / int(2));
            }
        }
        let w1 = RMatrix::from_rows(rows, d).unwrap();
        let net = TwoLayerScalarNet::new(w1.clone(), w2.clone()).unwrap();
        let layer = ReluLayer::homogeneous(w1).unwrap();
        let zero_everywhere = enumerate_cells(&layer).iter().all(|cell| {
            let a = active_matrix(&layer, cell);
            (0..d).all(|j| (0..a.weights.rows()).map(|i| a.weights.get(i, j) * &w2[i]).sum::<Rational>().is_zero())
        });
        prop_assert_eq!(zero_map_check(&net).unwrap() == ZeroMapVerdict::Zero, zero_everywhere);
    }

    #[test]
    fn zonotope_routes_agree(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=6, k in 1usize..=4) {
        let mut rng = seeded(seed);
        let outer = generate::zonotope(&mut rng, d, n, 2);
        let inner = generate::zonotope(&mut rng, d, k, 2);
        let c = contains(&outer, &inner).unwrap();
        prop_assert_eq!(c.contained, contains_by_vertices(&outer, &inner).unwrap());
        if let Some(r) = &c.separating_direction {
            prop_assert!(support(&inner, r).unwrap() > support(&outer, r).unwrap());
        }
        prop_assert!(contains(&outer, &outer).unwrap().contained);
    }

    #[test]
    fn support_is_the_vertex_maximum(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=5) {
        let mut rng = seeded(seed);
        let z = generate::zonotope(&mut rng, d, n, 3);
        let vs = vertices(&z).unwrap();
        let mut rows = z.generators().to_rows();
        rows.reverse();
        rows.rotate_left(n / 2);
        let permuted = Zonotope::new(RMatrix::from_rows(rows, d).unwrap()).unwrap();
        for _ in 0..10 {
            let x = point(&mut rng, d, 3);
            let h = support(&z, &x).unwrap();
            prop_assert_eq!(&h, &vs.iter().map(|v| dot(&x, v)).max().unwrap());
            prop_assert_eq!(h, support(&permuted, &x).unwrap());
        }
    }

    #[test]
    fn containment_is_transitive(seed in any::<u64>(), d in 1usize..=2) {
        let mut rng = seeded(seed);
        let c = generate::zonotope(&mut rng, d, 2, 1);
        let mut b_rows = c.generators().to_rows();
        b_rows.extend(generate::int_matrix(&mut rng, 1, d, 1).to_rows());
        let b = Zonotope::new(RMatrix::from_rows(b_rows, d).unwrap()).unwrap();
        let a = generate::zonotope(&mut rng, d, 4, 2);
        if contains(&a, &b).unwrap().contained && contains(&b, &c).unwrap().contained {
            prop_assert!(contains(&a, &c).unwrap().contained);
        }
        // b adds a generator to c, so it contains c.
        prop_assert!(contains(&b, &c).unwrap().contained);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn verification_mirrors_positivity(seed in any::<u64>(), k in 1usize..=3, extra in 0usize..=2, m in 1usize..=4, t in -2i64..=2) {
        let mut rng = seeded(seed);
        let d = k + extra;
        let f = generate::two_layer(&mut rng, k, m, 2, false);
        let center = generate::int_vec(&mut rng, d, 2);
        let basis = generate::independent_basis(&mut rng, k, d, 2);
        let g = build_verification_instance(&f, &center, &basis, &int(t)).unwrap();
        let domain = inscribed_box(&center, &basis, &ratio(1, 3)).unwrap();
        let v = verify(&g, &domain, &int(t)).unwrap();
        prop_assert_eq!(v.answer, !positivity(&f).unwrap().answer);
        match &v.certificate {
            VerificationCertificate::Violation { point, value } => {
                prop_assert!(domain.contains(point));
                prop_assert_eq!(&g.eval(point), value);
                prop_assert!(*value > int(t));
            }
            VerificationCertificate::MaxCertified { value, point } => {
                prop_assert!(domain.contains(point));
                prop_assert_eq!(&g.eval(point), value);
            }
        }
    }

    #[test]
    fn exact_max_bounds_the_grid(seed in any::<u64>(), d in 1usize..=2, m in 1usize..=4) {
        let mut rng = seeded(seed);
        let f = generate::two_layer(&mut rng, d, m, 2, true);
        let square = Polyhedron::cube(d, &int(-1), &int(1));
        let MaxValue::Attained { value, point } = exact_max(&f, &square).unwrap().max else {
            return Err(TestCaseError::fail("bounded domain"));
        };
        prop_assert!(square.contains(&point));
        prop_assert_eq!(&f.eval(&point), &value);
        let steps: Vec<Rational> = (-8..=8).map(|i| ratio(i, 8)).collect();
        let grid: Vec<RVector> = if d == 1 {
            steps.iter().map(|s| vec![s.clone()]).collect()
        } else {
            steps.iter().flat_map(|a| steps.iter().map(move |b| vec![a.clone(), b.clone()])).collect()
        };
        for x in &grid {
            prop_assert!(f.eval(x) <= value);
        }
        let mut smaller = square.clone();
        smaller.push(Constraint::ge(point_normal(&mut rng, d), small_rational(&mut rng, 1)));
        if let Ok(r) = exact_max(&f, &smaller) {
            if let MaxValue::Attained { value: v2, .. } = r.max {
                prop_assert!(v2 <= value);
            }
        }
    }
}

fn point_normal(rng: &mut generate::InstanceRng, d: usize) -> RVector {
    point(rng, d, 3)
}
