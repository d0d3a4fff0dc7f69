use momentlab_core::arith::{rat, rational_rank, Rational, Scalar, DEFAULT_CAP_BITS};
use momentlab_core::cantor::{
    build_embedding, lattice_spacing, verify_embedding, EmbeddingCertificate, Word,
    DEFAULT_DEPTH_CAP,
};
use momentlab_core::measure::{lebesgue_moments, Measure};
use momentlab_core::moment::{
    certify_interior, classify, extension_interval, membership, Classification, Membership,
};
use momentlab_core::pascal::{build_table, gicar_trace, verify_hom};
use momentlab_core::perturb::{check_result, perturb, perturb_prefix, PerturbationRequest, Source};
use momentlab_core::{MomentVector, SubgroupDescriptor, Surd};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..=24).prop_flat_map(|q| (0..=q).prop_map(move |p| rat(p, q)))
}

fn atomic_measure(max_atoms: usize) -> impl Strategy<Value = Measure> {
    prop::collection::btree_map(unit_rational(), 1i64..=9, 1..=max_atoms).prop_map(|atoms| {
        let total: i64 = atoms.values().sum();
        Measure::atomic(atoms.into_iter().map(|(x, w)| (x, rat(w, total))).collect()).unwrap()
    })
}

/// `(1 - θ) μ + θ λ` moments for `θ` in `(0, 1]`: always interior.
fn interior_vector(max_degree: usize) -> impl Strategy<Value = MomentVector<Rational>> {
    (atomic_measure(4), 1usize..=max_degree, 1i64..=16).prop_map(|(mu, n, k)| {
        let theta = rat(k, 16);
        let s = mu.moments(n);
        let l = lebesgue_moments(n);
        let entries = s
            .iter()
            .zip(l.iter())
            .map(|(a, b)| (Rational::one() - &theta) * a + &theta * b)
            .collect();
        MomentVector::new(entries).unwrap()
    })
}

fn float(x: &Rational) -> f64 {
    let n: f64 = x.numer().to_string().parse().unwrap();
    let d: f64 = x.denom().to_string().parse().unwrap();
    n / d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncations_of_interior_vectors_are_interior(t in interior_vector(8)) {
        prop_assert!(membership(&t).unwrap().is_interior());
        for n in 0..t.degree() {
            prop_assert!(membership(&t.truncated(n)).unwrap().is_interior());
        }
    }

    #[test]
    fn measures_are_never_outside(mu in atomic_measure(4), n in 1usize..=8) {
        prop_assert!(!membership(&mu.moments(n)).unwrap().is_outside());
    }

    #[test]
    fn extension_interval_is_exactly_the_interior_slice(t in interior_vector(6), k in 1i64..256) {
        let interval = extension_interval(&t).unwrap();
        prop_assert!(interval.lo < interval.hi);
        let width = &interval.hi - &interval.lo;
        let inside = &interval.lo + &width * rat(k, 256);
        prop_assert!(membership(&t.extended(inside)).unwrap().is_interior());
        prop_assert!(matches!(membership(&t.extended(interval.lo.clone())).unwrap(), Membership::Boundary));
        prop_assert!(matches!(membership(&t.extended(interval.hi.clone())).unwrap(), Membership::Boundary));
        let below = &interval.lo - &width * rat(k, 256);
        let above = &interval.hi + &width * rat(k, 256);
        prop_assert!(membership(&t.extended(below)).unwrap().is_outside());
        prop_assert!(membership(&t.extended(above)).unwrap().is_outside());
    }

    #[test]
    fn outside_witness_is_a_real_violation(entries in prop::collection::vec(unit_rational(), 1..=6)) {
        let mut all = vec![Rational::one()];
        all.extend(entries);
        let t = MomentVector::new(all).unwrap();
        if let Membership::Outside(w) = membership(&t).unwrap() {
            prop_assert!(w.violation > Rational::zero());
            prop_assert!(w.direction.value < Rational::zero());
        }
    }

    #[test]
    fn pascal_tables_of_measures(mu in atomic_measure(4), n in 0usize..=12) {
        let s = mu.moments(n);
        let table = build_table(&s, n).unwrap();
        prop_assert!(table.satisfies_recurrence());
        for level in 0..=n {
            prop_assert!(table.level_sum(level).is_one());
            prop_assert_eq!(table.row(level), &gicar_trace(&s, level).unwrap()[..]);
            for k in 0..=level {
                prop_assert_eq!(table.get(level, k), &mu.mixed_moment(level, k).unwrap());
            }
        }
        prop_assert!(verify_hom(&table).unwrap().positive);
    }

    #[test]
    fn tables_rebuild_from_their_diagonal(t in interior_vector(8)) {
        let table = build_table(&t, t.degree()).unwrap();
        prop_assert_eq!(build_table(&table.diagonal(), t.degree()).unwrap(), table);
    }

    #[test]
    fn faithfulness_agrees_with_non_triviality(mu in atomic_measure(4), n in 2usize..=8) {
        let s = mu.moments(n);
        let table = build_table(&s, n).unwrap();
        let strictly_decreasing = s[1] > s[2] && (&s[0] - &s[1]) > Rational::zero();
        if strictly_decreasing {
            let non_trivial = classify(&s).unwrap() == Classification::NonTrivial;
            prop_assert_eq!(verify_hom(&table).unwrap().faithful, non_trivial);
        }
    }

    #[test]
    fn interior_vectors_give_faithful_tables(t in interior_vector(8)) {
        let report = verify_hom(&build_table(&t, t.degree()).unwrap()).unwrap();
        prop_assert!(report.faithful && report.strictly_positive);
    }

    #[test]
    fn prime_power_rings_are_rings(a in -64i64..64, b in 0u32..6, c in -64i64..64, d in 0u32..6) {
        let g: SubgroupDescriptor = "Z[1/2,1/3]".parse().unwrap();
        let x = rat(a, 2i64.pow(b) * 3i64.pow(d));
        let y = rat(c, 3i64.pow(b) * 2i64.pow(d));
        prop_assert!(g.contains(&x) && g.contains(&y));
        prop_assert!(g.contains(&(&x + &y)) && g.contains(&(&x - &y)) && g.contains(&(&x * &y)));
        prop_assert!(!g.contains(&(&x + rat(1, 5))));
    }

    #[test]
    fn round_into_matches_brute_force(lo_num in 0i64..200, width in 1i64..40, target_num in 0i64..240) {
        let g: SubgroupDescriptor = "Z[1/2,1/3]".parse().unwrap();
        let lo = rat(lo_num, 199);
        let hi = rat(lo_num + width, 199);
        let target = rat(target_num, 199);
        let got = g.round_into(&target, &lo, &hi).unwrap();
        // smallest 2-3-smooth denominator with a point strictly inside
        let mut denominators: Vec<i64> = (0..16)
            .flat_map(|i| (0..10).map(move |j| 2i64.pow(i) * 3i64.pow(j)))
            .filter(|&d| d <= 1 << 20)
            .collect();
        denominators.sort_unstable();
        let d = denominators
            .into_iter()
            .find(|&d| {
                let k = (&lo * Rational::from_integer(d.into())).floor() + Rational::one();
                k / Rational::from_integer(d.into()) < hi
            })
            .unwrap();
        let step = rat(1, d);
        prop_assert!(got > lo && got < hi);
        prop_assert!((&got / &step).is_integer());
        // nothing on that grid is nearer the target, and ties go down
        for shift in [-1i64, 1] {
            let other = &got + &step * Rational::from_integer(shift.into());
            if other > lo && other < hi {
                let (dg, dother) = ((&got - &target).abs(), (&other - &target).abs());
                prop_assert!(dg < dother || (dg == dother && got < other));
            }
        }
    }

    #[test]
    fn surd_arithmetic_agrees_with_floats(
        a in -20i64..20, b in -20i64..20, c in -20i64..20, e in 1i64..20, f in -20i64..20,
    ) {
        let x = Surd::from_terms([(1, rat(a, 3)), (2, rat(b, 5)), (3, rat(c, 7))]).unwrap();
        let y = Surd::from_terms([(1, rat(e, 2)), (6, rat(f, 11))]).unwrap();
        let approx = |s: &Surd| float(s.enclosure(&rat(1, 1 << 40)).lo());
        let fx = float(&rat(a, 3)) + float(&rat(b, 5)) * 2f64.sqrt() + float(&rat(c, 7)) * 3f64.sqrt();
        let fy = float(&rat(e, 2)) + float(&rat(f, 11)) * 6f64.sqrt();
        prop_assert!((approx(&(x.clone() * y.clone())) - fx * fy).abs() < 1e-6);
        if !y.is_zero() {
            prop_assert_eq!((x.clone() * y.clone()) / y.clone(), x.clone());
        }
        let expected = if fx > 1e-9 { std::cmp::Ordering::Greater } else if fx < -1e-9 { std::cmp::Ordering::Less } else { std::cmp::Ordering::Equal };
        if fx.abs() > 1e-9 || x.is_zero() {
            prop_assert_eq!(x.sign(DEFAULT_CAP_BITS).unwrap(), expected);
        }
    }

    #[test]
    fn rank_counts_independent_radicands(coeffs in prop::collection::vec(1i64..9, 1..5)) {
        let radicands = [1u64, 2, 3, 5, 7];
        let xs: Vec<Surd> = coeffs
            .iter()
            .zip(radicands)
            .map(|(&c, d)| Surd::term(rat(c, 1), d).unwrap())
            .collect();
        prop_assert_eq!(rational_rank(&xs), xs.len());
        let mut doubled = xs.clone();
        doubled.push(xs[0].clone() + xs[xs.len() - 1].clone());
        prop_assert_eq!(rational_rank(&doubled), xs.len());
    }

    #[test]
    fn spacing_recurrence(bits in any::<u32>(), len in 0usize..=20) {
        let word: Word = (0..len).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect::<String>().parse().unwrap();
        let s = lattice_spacing(&word);
        prop_assert_eq!(lattice_spacing(&word.child(0)), &s / Rational::from_integer(BigInt::from(2)));
        prop_assert_eq!(lattice_spacing(&word.child(1)), &s / Rational::from_integer(BigInt::from(3)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn perturbation_contract(mu in atomic_measure(3), m in 1usize..=4, extra in 0usize..=6, e in 4u32..=10) {
        let group: SubgroupDescriptor = "Z[1/2]".parse().unwrap();
        let req = PerturbationRequest::uniform(
            Source::Measure(mu),
            m,
            momentlab_core::arith::pow2_inv(e),
            group,
            m + extra,
        );
        let result = perturb(&req).unwrap();
        prop_assert!(check_result(&req, &result).unwrap().is_empty());
        prop_assert_eq!(perturb(&req).unwrap(), result);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prefix_perturbation_never_runs_out(mu in atomic_measure(4), group in prop::sample::select(vec!["Z[1/2]", "Z[1/3]", "Q"])) {
        let g: SubgroupDescriptor = group.parse().unwrap();
        let req = PerturbationRequest::uniform(Source::Measure(mu.clone()), 4, rat(1, 256), g.clone(), 4);
        let t = perturb_prefix(&req).unwrap();
        let s = mu.moments(4);
        prop_assert!(membership(&t).unwrap().is_interior());
        for j in 1..=4 {
            prop_assert!(g.contains(&t[j]));
            prop_assert!((&t[j] - &s[j]).abs() < rat(1, 256));
        }
    }
}

#[test]
fn embedding_survives_refinement() {
    for n in 0..=5 {
        let cert = build_embedding(n, DEFAULT_DEPTH_CAP).unwrap();
        assert!(cert.verify());
        let deeper = cert.refined_to_depth(cert.depth() + 1).unwrap();
        assert!(deeper.verify());
    }
}

#[test]
fn embedding_cells_match_the_scalar_pipeline() {
    let cert = build_embedding(6, DEFAULT_DEPTH_CAP).unwrap();
    for cell in &cert.cells {
        let t = MomentVector::new(cell.sequence.clone()).unwrap();
        for n in 1..=6 {
            assert!(certify_interior(&t[..=n], DEFAULT_CAP_BITS)
                .unwrap()
                .is_some());
        }
        let report = verify_hom(&build_table(&t, 6).unwrap()).unwrap();
        assert!(report.faithful);
    }
}

#[test]
fn every_single_mutation_is_caught_on_a_small_embedding() {
    let cert = build_embedding(5, DEFAULT_DEPTH_CAP).unwrap();
    let kinds = |functions: Vec<_>| -> Vec<&'static str> {
        let mutated = EmbeddingCertificate::assemble(functions).unwrap();
        verify_embedding(&mutated)
            .iter()
            .map(|v| v.kind())
            .collect()
    };
    for n in 0..cert.functions.len() {
        for (word, x) in cert.functions[n].leaves() {
            let mut functions = cert.functions.clone();
            functions[n].set(word, x + rat(1, 7)).unwrap();
            assert!(kinds(functions).contains(&"lattice"), "g{n} at '{word}'");
        }
    }
    let partition: Vec<Word> = cert.cells.iter().map(|c| c.word).collect();
    for cell in &cert.cells {
        let mut functions = cert.functions.clone();
        functions[2] = functions[2].refined_onto(&partition).unwrap();
        functions[2]
            .set(&cell.word, cell.sequence[1].clone())
            .unwrap();
        assert!(kinds(functions).contains(&"non-trivial"), "'{}'", cell.word);
    }
}
