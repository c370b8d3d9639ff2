//! Property tests over the public API.

use proptest::prelude::*;

use crate::explorer::{component_stats, explore, l0_trace};
use crate::graphgen::{sample_capacity_matrix, sample_fast, sample_reference, ModelVariant, SamplerOptions};
use crate::sbs::{
    check_conjectures, check_monotonicity, draw_clock, draw_sequential, enumerate_orders, ConjectureKind,
};
use crate::stats::{wilson_interval, Z_95};
use crate::theory::predict_with;
use crate::weights::{
    generate_constant, generate_pareto_iid, validate_conditions, MomentTargets, ToleranceProfile, WeightVector,
};

fn weights(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..5.0, 1..=max_n)
}

fn lenient() -> SamplerOptions {
    SamplerOptions {
        strict: false,
        ..Default::default()
    }
}

fn model() -> impl Strategy<Value = ModelVariant> {
    prop_oneof![
        Just(ModelVariant::Poisson),
        Just(ModelVariant::ChungLu),
        Just(ModelVariant::Bdml)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_vector_invariants(w in weights(200)) {
        let wv = WeightVector::new(w.clone()).unwrap();
        prop_assert!(wv.weights().windows(2).all(|p| p[0] >= p[1]));
        let again = WeightVector::new(wv.weights().to_vec()).unwrap();
        prop_assert_eq!(again.weights(), wv.weights());
        let (l, s2, s3): (f64, f64, f64) = w.iter().fold((0.0, 0.0, 0.0), |a, x| (a.0 + x, a.1 + x * x, a.2 + x * x * x));
        prop_assert!((wv.ell() - l).abs() <= 1e-9 * l);
        prop_assert!((wv.s2() - s2).abs() <= 1e-9 * s2);
        prop_assert!((wv.s3() - s3).abs() <= 1e-9 * s3);
        prop_assert!(wv.s2() * wv.s2() <= wv.ell() * wv.s3() * (1.0 + 1e-12));
    }

    #[test]
    fn constant_ones_satisfy_conditions(n in 2usize..5000) {
        let wv = generate_constant(n, 1.0).unwrap();
        let t = MomentTargets::constant(1.0);
        let r = validate_conditions(&wv, &t, &ToleranceProfile::default_for(&wv, &t)).unwrap();
        prop_assert!(r.all_pass());
        for item in r.items().iter().take(4) {
            prop_assert_eq!(item.residual, 0.0);
        }
    }

    #[test]
    fn pareto_regeneration_is_bitwise(n in 2usize..2000, seed: u64) {
        let a = generate_pareto_iid(n, 2.0 / 3.0, 4.0, seed).unwrap();
        let b = generate_pareto_iid(n, 2.0 / 3.0, 4.0, seed).unwrap();
        prop_assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn sampled_graphs_are_simple_and_symmetric(w in weights(60), scale in 0.0f64..3.0, m in model(), seed: u64, fast: bool) {
        let wv = WeightVector::new(w).unwrap();
        let p = scale / (wv.w_max() * wv.w_max());
        let g = if fast {
            sample_fast(&wv, p, m, seed, &lenient())
        } else {
            sample_reference(&wv, p, m, seed, &lenient())
        }.unwrap();
        let mut half = 0;
        for u in 0..g.n() {
            let nb = g.neighbors(u);
            prop_assert!(nb.windows(2).all(|x| x[0] < x[1]));
            for (&v, &k) in nb.iter().zip(g.keys(u)) {
                prop_assert!(v != u);
                prop_assert!(g.has_edge(v, u));
                prop_assert!((0.0..=p).contains(&k));
            }
            half += nb.len();
        }
        prop_assert_eq!(half, 2 * g.edge_count());
    }

    #[test]
    fn fast_sampler_ignores_thread_count(seed: u64, threads in 2usize..5) {
        let wv = generate_pareto_iid(1500, 2.0 / 3.0, 4.0, seed).unwrap();
        let p = 1.3 / wv.ell();
        let run = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap()
            .install(|| sample_fast(&wv, p, ModelVariant::Poisson, seed, &Default::default()).unwrap());
        prop_assert_eq!(run(1), run(threads));
    }

    #[test]
    fn capacity_thresholds_nest(w in weights(40), seed: u64, p1 in 0.0f64..1.0, dp in 0.0f64..1.0) {
        let wv = WeightVector::new(w).unwrap();
        let m = sample_capacity_matrix(&wv, seed, &Default::default()).unwrap();
        let (a, b) = (m.threshold(p1), m.threshold(p1 + dp));
        for (u, v, _) in a.edges() {
            prop_assert!(b.has_edge(u, v));
        }
    }

    #[test]
    fn exploration_invariants(w in weights(40), scale in 0.0f64..4.0, m in model(), seed: u64) {
        let wv = WeightVector::new(w).unwrap();
        let n = wv.n();
        let p = scale / (wv.w_max() * wv.w_max());
        let g = sample_fast(&wv, p, m, seed, &lenient()).unwrap();
        let t = explore(&g, &wv, seed).unwrap();

        let mut sorted = t.order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(t.lprime[0], 1);
        prop_assert_eq!(t.l[0], 1);
        let mut low = 1i64;
        for i in 1..=n {
            let step = t.children[i - 1] as i64 - 1;
            prop_assert_eq!(t.lprime[i], t.lprime[i - 1] + step);
            prop_assert_eq!(t.l[i], (t.l[i - 1] + step).max(1));
            low = low.min(t.lprime[i]);
            prop_assert_eq!(t.z[i], 1 - low);
            prop_assert!(t.z[i] >= t.z[i - 1]);
        }
        prop_assert_eq!(t.children.iter().sum::<usize>(), n - t.component_count());

        let mut next = 1;
        for &(s, e) in &t.component_bounds {
            prop_assert_eq!(s, next);
            prop_assert!(e >= s);
            next = e + 1;
        }
        prop_assert_eq!(next, n + 1);

        let stats = component_stats(&t, &g, &wv).unwrap();
        prop_assert_eq!(stats.iter().map(|c| c.size).sum::<usize>(), n);
        let weight: f64 = stats.iter().map(|c| c.weight).sum();
        prop_assert!((weight - wv.ell()).abs() <= 1e-9 * wv.ell());
        let surplus: usize = stats.iter().map(|c| c.surplus).sum();
        prop_assert_eq!(surplus + n, g.edge_count() + stats.len());

        let l0 = l0_trace(&t, &g);
        prop_assert!(l0.iter().zip(&t.lprime).all(|(a, b)| a >= b));
    }

    #[test]
    fn draws_are_permutations(w in weights(30), seed: u64) {
        let n = w.len();
        let full = |mut o: Vec<usize>| { o.sort_unstable(); o == (0..n).collect::<Vec<_>>() };
        prop_assert!(full(draw_sequential(&w, n, seed).unwrap().order));
        prop_assert!(full(draw_clock(&w, seed, &[]).unwrap().0.order));
    }

    #[test]
    fn clock_identity_is_exact(w in weights(50), seed: u64, grid in prop::collection::vec(0.0f64..5.0, 0..30)) {
        let (draw, trace) = draw_clock(&w, seed, &grid).unwrap();
        prop_assert!(trace.identity_holds(&w, &draw));
    }

    #[test]
    fn enumeration_normalises(w in weights(7)) {
        let total: f64 = enumerate_orders(&w).unwrap().iter().map(|x| x.1).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn capped_weights_get_smaller(w in prop::collection::vec(1u32..20, 1..=7), cap in 1u32..25) {
        let w: Vec<f64> = w.into_iter().map(f64::from).collect();
        prop_assert!(check_monotonicity(&w, f64::from(cap) / 2.0).unwrap().holds);
        prop_assert!(check_monotonicity(&w, f64::INFINITY).unwrap().holds);
    }

    #[test]
    fn ordered_inequalities_hold_for_one_coordinate(w in prop::collection::vec(1u32..10, 2..=6)) {
        let w: Vec<f64> = w.into_iter().map(f64::from).collect();
        let r = check_conjectures(&w, 1).unwrap();
        prop_assert!(r.holds_up_to(ConjectureKind::OrderedShift, 1));
        prop_assert!(r.holds_up_to(ConjectureKind::OrderedReplacement, 1));
    }

    #[test]
    fn size_interval_width(ell in 1e3f64..1e8, c in 0.5f64..4.0, f in 0.5f64..50.0, e in 0.01f64..1.0) {
        let p = predict_with(ell, c, f, 0.5, e).unwrap();
        let l23 = ell.powf(2.0 / 3.0);
        let width = p.giant_size_interval.1 - p.giant_size_interval.0;
        prop_assert!((width - (2.0 * e * f * l23 / c + l23 / c)).abs() <= 1e-9 * width);
        prop_assert!(p.giant_size_interval.0 <= p.giant_center && p.giant_center <= p.giant_size_interval.1);
        prop_assert_eq!(p, predict_with(ell, c, f, 0.5, e).unwrap());
    }

    #[test]
    fn wilson_brackets_estimate(trials in 1usize..10_000, frac in 0.0f64..=1.0) {
        let s = ((trials as f64) * frac).round() as usize;
        let (lo, hi) = wilson_interval(s, trials, Z_95);
        let p = s as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }
}
