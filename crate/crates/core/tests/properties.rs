use proptest::prelude::*;
use wopt_core::oracle::{w1_1d_quantile, w1_discrete_exact};
use wopt_core::path::{exact_covering_walk, squared_metric_closure};
use wopt_core::univariate::{
    build_gstar_1d, fixed_k_optimum_1d, k1_lower_bound, w1_closed_form_1d,
};
use wopt_core::{DiscreteMeasure, PiecewiseLinearGenerator, SampleCloud};

fn distinct_scalars(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..max)
}

fn measure_1d(max: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-10.0f64..10.0, 0.01f64..1.0), 1..max).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let atoms: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut masses: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
        let drift: f64 = 1.0 - masses.iter().sum::<f64>();
        masses[0] += drift;
        DiscreteMeasure::new(atoms, masses, 1).unwrap()
    })
}

fn measure_2d(max: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, 0.01f64..1.0), 1..max).prop_map(|triples| {
        let total: f64 = triples.iter().map(|p| p.2).sum();
        let atoms: Vec<f64> = triples.iter().flat_map(|p| [p.0, p.1]).collect();
        let mut masses: Vec<f64> = triples.iter().map(|p| p.2 / total).collect();
        let drift: f64 = 1.0 - masses.iter().sum::<f64>();
        masses[0] += drift;
        DiscreteMeasure::new(atoms, masses, 2).unwrap()
    })
}

fn generator() -> impl Strategy<Value = PiecewiseLinearGenerator> {
    (
        prop::collection::vec((0.001f64..1.0, -3.0f64..3.0), 1..12),
        -3.0f64..3.0,
    )
        .prop_map(|(pieces, start)| {
            let total: f64 = pieces.iter().map(|p| p.0).sum();
            let mut us = vec![0.0];
            let mut values = vec![start];
            let mut acc = 0.0;
            let mut k = 1e-9f64;
            for (w, v) in &pieces {
                acc += w / total;
                us.push(acc);
                k = k.max((v - values.last().unwrap()).abs() / (w / total));
                values.push(*v);
            }
            *us.last_mut().unwrap() = 1.0;
            PiecewiseLinearGenerator::new(k * 1.01, us, values, 1).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn breakpoints_evaluate_exactly(g in generator()) {
        for j in 0..g.num_breakpoints() {
            prop_assert_eq!(g.evaluate(g.breakpoints()[j]).unwrap(), g.value(j).to_vec());
        }
    }

    #[test]
    fn discretized_mass_is_one(g in generator(), m in 1usize..500) {
        let mu = g.pushforward_discretize(m).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn emitted_generators_are_certified(xs in distinct_scalars(20), factor in 1.0f64..5.0) {
        let cloud = SampleCloud::from_scalars(&xs).unwrap();
        let k = k1_lower_bound(&cloud).unwrap().max(1e-3) * factor;
        let opt = build_gstar_1d(&cloud, k).unwrap();
        prop_assert!(opt.generator.validate_lipschitz(k, 2000).unwrap().ok);
    }

    #[test]
    fn masses_and_transit_sum_to_one(xs in distinct_scalars(20), factor in 1.0f64..5.0) {
        let cloud = SampleCloud::from_scalars(&xs).unwrap();
        let k = k1_lower_bound(&cloud).unwrap().max(1e-3) * factor;
        let opt = build_gstar_1d(&cloud, k).unwrap();
        let total: f64 = opt.atom_masses.iter().sum::<f64>() + opt.transit_mass();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let gaps: f64 = opt.sorted_samples.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        prop_assert_eq!(opt.w1_value, gaps / (4.0 * k));
    }

    #[test]
    fn occupancy_is_one_over_n(xs in distinct_scalars(15), factor in 1.0f64..5.0) {
        let cloud = SampleCloud::from_scalars(&xs).unwrap();
        let k = k1_lower_bound(&cloud).unwrap().max(1e-3) * factor;
        let opt = build_gstar_1d(&cloud, k).unwrap();
        let sites = SampleCloud::from_scalars(&opt.sorted_samples).unwrap();
        let n = sites.len() as f64;
        for occ in opt.generator.voronoi_occupancy(&sites).unwrap() {
            prop_assert!((occ - 1.0 / n).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_and_translation(xs in distinct_scalars(15), s in 0.1f64..10.0, t in -50.0f64..50.0) {
        let cloud = SampleCloud::from_scalars(&xs).unwrap();
        let k = k1_lower_bound(&cloud).unwrap().max(1e-3) * 2.0;
        let scaled = cloud.map_points(|p| vec![s * p[0]]).unwrap();
        let shifted = cloud.map_points(|p| vec![p[0] + t]).unwrap();
        let k1 = k1_lower_bound(&cloud).unwrap();
        prop_assert!((k1_lower_bound(&scaled).unwrap() - s * k1).abs() <= 1e-9 * (1.0 + s * k1));
        prop_assert!((k1_lower_bound(&shifted).unwrap() - k1).abs() <= 1e-9 * (1.0 + k1));
        let w = w1_closed_form_1d(&cloud, k).unwrap();
        let ws = w1_closed_form_1d(&scaled, s * k).unwrap();
        prop_assert!((ws - s * w).abs() <= 1e-9 * (1.0 + s * w));
        let wt = w1_closed_form_1d(&shifted, k).unwrap();
        prop_assert!((wt - w).abs() <= 1e-9 * (1.0 + w));
    }

    #[test]
    fn closed_form_decreases_like_one_over_k(xs in distinct_scalars(15), f in 1.0f64..5.0, g in 1.01f64..3.0) {
        let cloud = SampleCloud::from_scalars(&xs).unwrap();
        prop_assume!(cloud.distinct().len() >= 2);
        let k = k1_lower_bound(&cloud).unwrap() * f;
        let a = w1_closed_form_1d(&cloud, k).unwrap();
        let b = w1_closed_form_1d(&cloud, g * k).unwrap();
        prop_assert!(b < a);
        prop_assert!((a / b - g).abs() < 1e-12 * g);
    }

    #[test]
    fn fixed_k_properties(mut q in prop::collection::vec(-5.0f64..5.0, 2..60), k1 in 0.0f64..20.0, dk in 0.0f64..20.0) {
        q.sort_by(f64::total_cmp);
        let m = q.len() as f64;
        let a = fixed_k_optimum_1d(&q, k1).unwrap().value;
        let b = fixed_k_optimum_1d(&q, k1 + dk).unwrap().value;
        prop_assert!(b <= a + 1e-12);
        let steepest = q.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max) * m;
        prop_assert!(fixed_k_optimum_1d(&q, steepest).unwrap().value < 1e-9);
    }

    #[test]
    fn oracles_agree_in_one_dimension(a in measure_1d(12), b in measure_1d(12)) {
        let flow = w1_discrete_exact(&a, &b).unwrap();
        let quantile = w1_1d_quantile(&a, &b).unwrap();
        prop_assert!((flow - quantile).abs() < 1e-9);
    }

    #[test]
    fn metric_axioms(a in measure_2d(8), b in measure_2d(8), c in measure_2d(8)) {
        let ab = w1_discrete_exact(&a, &b).unwrap();
        let ba = w1_discrete_exact(&b, &a).unwrap();
        let bc = w1_discrete_exact(&b, &c).unwrap();
        let ac = w1_discrete_exact(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab));
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(w1_discrete_exact(&a, &a).unwrap() < 1e-12);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn closure_is_symmetric_and_below_direct(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12)) {
        let coords: Vec<f64> = pts.iter().flat_map(|p| [p.0, p.1]).collect();
        let cloud = SampleCloud::new(coords, 2).unwrap().distinct().into_owned();
        let cl = squared_metric_closure(&cloud);
        for i in 0..cloud.len() {
            prop_assert_eq!(cl.cost(i, i), 0.0);
            for j in 0..cloud.len() {
                prop_assert!(cl.cost(i, j) <= wopt_core::geom::sq_dist(cloud.point(i), cloud.point(j)));
                prop_assert!((cl.cost(i, j) - cl.cost(j, i)).abs() < 1e-12);
            }
        }
        let walk = exact_covering_walk(&cloud).unwrap();
        prop_assert!(walk.validate(&cloud).is_ok());
    }
}
