use greedy_sparse::bounds::{el1_bound, el2_bound, sigma_bruteforce};
use greedy_sparse::dictionary::{random_dictionary, TieBreakPolicy};
use greedy_sparse::experiment::{random_hull_element, read_csv, write_csv, TraceRow};
use greedy_sparse::greedy::{build_al1_approximant, run_oga, run_wcga, run_wgafr, A1Representation};
use greedy_sparse::projection::{project_hilbert, project_lq, projection_defect, DEFAULT_TOL};
use greedy_sparse::{Dictionary, LqSpace, SeqVector, WeaknessSequence};
use proptest::prelude::*;

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, dim)
}

fn nonzero_vector() -> impl Strategy<Value = Vec<f64>> {
    (1usize..12)
        .prop_flat_map(vector)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(2.0), 1.05..2.0f64]
}

/// Minimum of a convex function on `[0, hi]` by ternary search.
fn ternary_min(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

fn span_atoms(dict: &Dictionary, expansion: &[(f64, usize)]) -> Vec<SeqVector> {
    expansion.iter().map(|&(_, i)| dict.atom(i).clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norming_functional_is_a_unit_support(f in nonzero_vector(), q in exponent()) {
        let space = LqSpace::new(q, f.len()).unwrap();
        let f = SeqVector::new(f).unwrap();
        let functional = space.norming_functional(&f).unwrap();
        let norm = space.norm(&f).unwrap();
        prop_assert!((functional.norm(&space) - 1.0).abs() <= 1e-9);
        prop_assert!((functional.apply(&f) - norm).abs() <= 1e-9 * norm.max(1.0));
    }

    #[test]
    fn norm_is_homogeneous(v in nonzero_vector(), c in -100.0..100.0f64, q in exponent()) {
        let space = LqSpace::new(q, v.len()).unwrap();
        let v = SeqVector::new(v).unwrap();
        let lhs = space.norm(&v.scaled(c)).unwrap();
        let rhs = c.abs() * space.norm(&v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn hilbert_norming_functional_is_the_normalized_vector(f in nonzero_vector()) {
        let space = LqSpace::hilbert(f.len()).unwrap();
        let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        let functional = space.norming_functional(&SeqVector::new(f.clone()).unwrap()).unwrap();
        for (w, x) in functional.weights.as_slice().iter().zip(&f) {
            prop_assert!((w - x / norm).abs() <= 1e-12);
        }
    }

    #[test]
    fn default_gamma_dominates_the_sampled_modulus(q in exponent(), dim in 2usize..6, seed in any::<u64>()) {
        let space = LqSpace::new(q, dim).unwrap();
        for u in [0.1, 0.25, 0.5, 1.0] {
            let rho = space.estimate_modulus(u, 200, seed).unwrap();
            prop_assert!(rho <= space.gamma() * u.powf(q) + 1e-12, "u = {u}: {rho}");
        }
    }

    #[test]
    fn selection_meets_the_weak_threshold(
        seed in any::<u64>(),
        count in 1usize..30,
        f in vector(6),
        t in 0.0..=1.0f64,
        q in exponent(),
    ) {
        prop_assume!(f.iter().any(|x| x.abs() > 1e-3));
        let space = LqSpace::new(q, 6).unwrap();
        let dict = random_dictionary(&space, count, seed).unwrap();
        let functional = space.norming_functional(&SeqVector::new(f).unwrap()).unwrap();
        for policy in [TieBreakPolicy::LowestIndex, TieBreakPolicy::PreferGAscending, TieBreakPolicy::VMinimizing] {
            let sel = dict.greedy_select(&functional, t, policy);
            let value = functional.apply(&dict.atom(sel.index).scaled(sel.sign));
            prop_assert!(value >= t * dict.dual_norm(&functional) - 1e-10);
            prop_assert_eq!(sel, dict.greedy_select(&functional, t, policy));
        }
    }

    #[test]
    fn greedy_value_ignores_atom_signs(seed in any::<u64>(), flips in prop::collection::vec(any::<bool>(), 10), f in vector(5)) {
        prop_assume!(f.iter().any(|x| x.abs() > 1e-3));
        let space = LqSpace::hilbert(5).unwrap();
        let dict = random_dictionary(&space, 10, seed).unwrap();
        let flipped: Vec<SeqVector> = dict
            .atoms()
            .iter()
            .zip(&flips)
            .map(|(a, &flip)| if flip { a.scaled(-1.0) } else { a.clone() })
            .collect();
        let other = Dictionary::new(&space, flipped, None).unwrap();
        let functional = space.norming_functional(&SeqVector::new(f).unwrap()).unwrap();
        prop_assert!((dict.dual_norm(&functional) - other.dual_norm(&functional)).abs() <= 1e-15);
    }

    #[test]
    fn hilbert_residual_is_orthogonal_and_monotone(seed in any::<u64>(), f in vector(8), k in 1usize..7) {
        let space = LqSpace::hilbert(8).unwrap();
        let dict = random_dictionary(&space, k, seed).unwrap();
        let f = SeqVector::new(f).unwrap();
        let mut previous = space.norm(&f).unwrap();
        for j in 1..=k {
            let proj = project_hilbert(&f, &dict.atoms()[..j]).unwrap();
            for a in &dict.atoms()[..j] {
                prop_assert!(proj.residual.dot(a).abs() <= 1e-10 * previous.max(1.0));
            }
            prop_assert!(proj.residual_norm <= previous + 2.0 * DEFAULT_TOL);
            previous = proj.residual_norm;
        }
    }

    #[test]
    fn lq_residual_certificate_and_monotonicity(seed in any::<u64>(), q in 1.2..2.0f64, k in 1usize..5) {
        let space = LqSpace::new(q, 8).unwrap();
        let dict = random_dictionary(&space, k + 1, seed).unwrap();
        let f = random_hull_element(&dict, k + 1, seed).unwrap();
        let mut previous = space.norm(&f).unwrap();
        for j in 1..=k {
            let proj = project_lq(&f, &dict.atoms()[..j], &space, DEFAULT_TOL).unwrap();
            prop_assert!(proj.converged);
            if proj.residual_norm > 1e-8 {
                let functional = space.norming_functional(&proj.residual).unwrap();
                for a in &dict.atoms()[..j] {
                    prop_assert!(functional.apply(a).abs() <= 10.0 * DEFAULT_TOL);
                }
            }
            prop_assert!(proj.residual_norm <= previous + 2.0 * DEFAULT_TOL);
            previous = proj.residual_norm;
        }
    }

    #[test]
    fn defect_of_a_unit_atom_is_in_the_unit_interval(seed in any::<u64>(), q in exponent(), k in 0usize..5) {
        let space = LqSpace::new(q, 6).unwrap();
        let dict = random_dictionary(&space, k + 1, seed).unwrap();
        let v = projection_defect(dict.atom(k), &dict.atoms()[..k], &space).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
    }

    #[test]
    fn wcga_invariants(seed in any::<u64>(), q in exponent(), t in 0.3..=1.0f64) {
        let space = LqSpace::new(q, 10).unwrap();
        let dict = random_dictionary(&space, 25, seed).unwrap();
        let f = random_hull_element(&dict, 6, seed).unwrap();
        let tau = WeaknessSequence::constant(t).unwrap();
        let trace = run_wcga(&f, &dict, &tau, 8, &space, TieBreakPolicy::LowestIndex).unwrap();
        let norms = trace.residual_norms();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for s in &trace.steps {
            prop_assert!(s.selected_value >= s.weakness * s.greedy_value - 1e-10);
        }
        let residual = f.sub(&trace.approximant);
        if space.norm(&residual).unwrap() > 1e-8 {
            let functional = space.norming_functional(&residual).unwrap();
            for a in span_atoms(&dict, &trace.expansion) {
                prop_assert!(functional.apply(&a).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn wgafr_meets_the_weak_threshold(seed in any::<u64>(), q in exponent()) {
        let space = LqSpace::new(q, 8).unwrap();
        let dict = random_dictionary(&space, 20, seed).unwrap();
        let f = random_hull_element(&dict, 5, seed).unwrap();
        let tau = WeaknessSequence::constant(0.8).unwrap();
        let trace = run_wgafr(&f, &dict, &tau, 10, &space, TieBreakPolicy::LowestIndex).unwrap();
        for s in &trace.steps {
            prop_assert!(s.selected_value >= s.weakness * s.greedy_value - 1e-10);
        }
    }

    #[test]
    fn best_m_term_error_is_below_greedy(seed in any::<u64>(), m in 1usize..4) {
        let space = LqSpace::hilbert(6).unwrap();
        let dict = random_dictionary(&space, 10, seed).unwrap();
        let f = random_hull_element(&dict, 4, seed).unwrap();
        let trace = run_oga(&f, &dict, m, TieBreakPolicy::LowestIndex).unwrap();
        let sigma = sigma_bruteforce(&f, &dict, m, &space).unwrap();
        prop_assert!(sigma <= trace.final_residual_norm() + 1e-10);
    }

    #[test]
    fn two_stage_approximant_stays_in_the_hull(count in 4usize..30, m in 1usize..12, q in exponent()) {
        let space = LqSpace::new(q, count + 1).unwrap();
        let (dict, _) = if q == 2.0 {
            greedy_sparse::dictionary::build_bt1(count + 1).unwrap()
        } else {
            greedy_sparse::dictionary::build_btq(count + 1, q).unwrap()
        };
        let rep = A1Representation::geometric(count);
        let s = build_al1_approximant(&rep, &dict, m, &space).unwrap();
        let mass: f64 = s.expansion.iter().map(|(c, _)| c.abs()).sum();
        prop_assert!(mass <= 1.0 + 1e-12);
    }

    #[test]
    fn el1_majorizes_equality_sequences(a in 0.01..10.0f64, frac in 0.01..=1.0f64, r in prop::collection::vec(0.0..=1.0f64, 0..40)) {
        let mut x = a * frac;
        for rk in &r {
            x *= 1.0 - rk * x / a;
        }
        prop_assert!(x <= el1_bound(a, &r).unwrap() + 1e-12);
    }

    #[test]
    fn el2_majorizes_equality_sequences(
        b in 0.1..10.0f64,
        frac in 0.01..=1.0f64,
        q in 1.1..=2.0f64,
        gamma_scale in 1.0..4.0f64,
        r in prop::collection::vec(0.0..=2.0f64, 0..30),
    ) {
        let gamma = gamma_scale * 2f64.powf(-q);
        let mut x = b * frac;
        let mut used = Vec::new();
        for &rk in &r {
            let a = x;
            let step = ternary_min(|l| 1.0 - l * rk / b + 2.0 * gamma * (l / a).powf(q), 10.0 * b);
            if step <= 0.0 {
                break;
            }
            x = a * step;
            used.push(rk);
        }
        prop_assert!(x <= el2_bound(b, gamma, q, &used).unwrap() + 1e-9);
    }

    #[test]
    fn trace_csv_round_trips(rows in prop::collection::vec(
        (1usize..100, 0.0..10.0f64, any::<bool>(), prop::option::of(-1e6..1e6f64), prop::option::of(0.0..=1.0f64)),
        1..20,
    )) {
        let rows: Vec<TraceRow> = rows
            .into_iter()
            .map(|(m, r, neg, g, v)| TraceRow {
                m,
                residual_norm: r,
                atom_label: format!("g{m}"),
                sign: Some(if neg { -1.0 } else { 1.0 }),
                greedy_value: g,
                defect: v,
                apriori_bound: g.map(f64::abs),
                aposteriori_bound: None,
                exact_formula: v,
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(read_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), rows);
    }
}
