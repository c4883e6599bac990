use std::collections::BTreeMap;

use proptest::prelude::*;

use gv_core::bgg::{bgg, generic_cohomology, support_locus};
use gv_core::examples::{abelian, blowup_example, macdonald_symmetric_product, random_module};
use gv_core::groebner::{groebner, is_groebner_basis, krull_dim};
use gv_core::lincplx::{linear_part, JetComplex};
use gv_core::perversity::{complex_cohomology, dual_complex, support_profile, FreeGradedComplex};
use gv_core::polymatrix::RankMethod;
use gv_core::rational::q;
use gv_core::rng::{point, seeded};
use gv_core::tor::{free_module, minimal_resolution, tor_table, verify_resolution};
use gv_core::{Dim, ExteriorModule, Ideal, PolyMatrix, PolyRing};
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn module_from(seed: u64, m: usize, lo: i64, dims: &[usize]) -> ExteriorModule {
    let table: BTreeMap<i64, usize> = dims.iter().enumerate().map(|(k, &d)| (lo + k as i64, d)).collect();
    random_module(m, &table, seed).unwrap()
}

fn small_module() -> impl Strategy<Value = ExteriorModule> {
    (
        any::<u64>(),
        1usize..=3,
        -2i64..=1,
        prop::collection::vec(0usize..=3, 1..=4),
    )
        .prop_map(|(seed, m, lo, dims)| module_from(seed, m, lo, &dims))
}

/// Entries are random linear or quadratic forms in `n` variables.
fn random_matrix(ring: &PolyRing, rows: usize, cols: usize, seed: u64) -> PolyMatrix {
    let mut rng = seeded(seed);
    let mut m = PolyMatrix::zeros(ring, rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut p = ring.zero();
            for v in 0..ring.nvars() {
                p = p.add(&ring.var(v).scale(&q(rng.gen_range(-2..=2))));
            }
            if rng.gen_bool(0.3) {
                p = p.mul(&ring.var(rng.gen_range(0..ring.nvars())));
            }
            m.set(r, c, p);
        }
    }
    m
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_modules_validate_and_dualize(p in small_module()) {
        p.validate().unwrap();
        let d = p.dual();
        d.validate().unwrap();
        for (i, n) in p.dimension_table() {
            prop_assert_eq!(d.dim(-i), n);
        }
        prop_assert_eq!(d.dual(), p);
    }

    #[test]
    fn generic_euler_characteristic(p in small_module()) {
        let l = bgg(&p).unwrap();
        let h = generic_cohomology(&l, None, 0);
        let chi: i64 = h.dims.iter().map(|(c, &v)| if c % 2 == 0 { v as i64 } else { -(v as i64) }).sum();
        prop_assert_eq!(chi, l.euler_characteristic());
    }

    #[test]
    fn bgg_of_dual_mirrors_terms(p in small_module()) {
        let l = bgg(&p).unwrap();
        let ld = bgg(&p.dual()).unwrap();
        for c in l.positions() {
            prop_assert_eq!(ld.dim(-c), l.dim(c));
        }
    }

    #[test]
    fn resolutions_are_minimal_and_exact(p in small_module()) {
        prop_assume!(!p.is_zero());
        let steps = minimal_resolution(&p, 3);
        prop_assert!(verify_resolution(&p, &steps));
        let table = tor_table(&p, 3);
        for (i, step) in steps.iter().enumerate() {
            let mut count: BTreeMap<i64, usize> = BTreeMap::new();
            for &d in &step.generator_degrees {
                *count.entry(d).or_default() += 1;
            }
            prop_assert_eq!(table.row(i), count);
        }
        prop_assert_eq!(table.row(0), p.minimal_generators());
    }

    #[test]
    fn symbolic_rank_matches_evaluation(seed in any::<u64>(), rows in 1usize..=3, cols in 1usize..=3) {
        let ring = PolyRing::standard(2, "z");
        let m = random_matrix(&ring, rows, cols, seed);
        let symbolic = m.rank_with(Some(RankMethod::Symbolic), 0).rank;
        let mut rng = seeded(seed ^ 1);
        let sampled = (0..3).map(|_| m.evaluate(&point(&mut rng, 2, 1000)).rank()).max().unwrap();
        prop_assert_eq!(symbolic, sampled);
        let syz = m.syzygies();
        if syz.cols() > 0 {
            prop_assert!(m.mul(&syz).unwrap().is_zero());
        }
        if symbolic > 0 {
            let drop = krull_dim(&m.minors_ideal(symbolic).unwrap());
            prop_assert!(drop < Dim::Finite(2), "rank-drop locus is not proper: {:?}", drop);
        }
    }

    #[test]
    fn groebner_bases_pass_buchberger(seed in any::<u64>(), k in 1usize..=3) {
        let ring = PolyRing::standard(3, "x");
        let m = random_matrix(&ring, 1, k, seed);
        let ideal = Ideal::new(ring, m.entries().to_vec());
        prop_assert!(is_groebner_basis(&groebner(&ideal)));
    }
}

#[test]
fn builtin_modules_validate() {
    for g in 1..=3 {
        abelian(g).unwrap().validate().unwrap();
    }
    for (g, n) in [(2, 1), (3, 1), (3, 2)] {
        macdonald_symmetric_product(g, n).unwrap().module.validate().unwrap();
    }
    for g_c in 2..=4 {
        blowup_example(g_c, None, 0).unwrap().validate().unwrap();
    }
}

#[test]
fn free_modules_have_no_higher_tor() {
    for m in 1..=3 {
        for d in [-1, 0, 2] {
            let f = free_module(m, &[d]);
            assert_eq!(f.minimal_generators(), BTreeMap::from([(d, 1)]));
            let table = tor_table(&f, 4);
            assert!((1..=4).all(|i| table.row(i).is_empty()), "m = {m}, d = {d}");
        }
    }
    for g in 1..=2 {
        let table = tor_table(&abelian(g).unwrap(), 4);
        assert!((1..=4).all(|i| table.row(i).is_empty()));
    }
}

#[test]
fn socle_diagnostic() {
    // logged only: Tor_0 of the dual against negated socle degrees
    for g in 1..=2 {
        let p = abelian(g).unwrap();
        let row = tor_table(&p.dual(), 0).row(0);
        println!("abelian({g}): Tor_0(dual) = {row:?}");
    }
}

/// `S/I` for a homogeneous ideal, as the complex `S(−d_1) ⊕ … → S` in positions −1, 0.
fn cyclic(ring: &PolyRing, gens: &[&str]) -> FreeGradedComplex {
    let polys: Vec<_> = gens.iter().map(|g| ring.parse(g).unwrap()).collect();
    let degrees = vec![polys.iter().map(|p| p.degree().unwrap() as i64).collect(), vec![0]];
    let d = PolyMatrix::new(ring.clone(), 1, polys.len(), polys).unwrap();
    FreeGradedComplex::new(ring.clone(), -1, degrees, vec![d]).unwrap()
}

#[test]
fn fitting_support_matches_annihilator() {
    let ring = PolyRing::standard(3, "x");
    let cases: Vec<Vec<&str>> = vec![
        vec!["x1"],
        vec!["x1", "x2"],
        vec!["x1", "x2", "x3"],
        vec!["x1^2"],
        vec!["x1*x2"],
        vec!["x1^2", "x2^3"],
        vec!["x1*x2", "x1*x3"],
        vec!["x1^2 - x2*x3"],
        vec!["x1*x2", "x2*x3", "x1*x3"],
        vec!["x1^2", "x1*x2", "x2^2", "x3^2"],
    ];
    for gens in cases {
        let c = cyclic(&ring, &gens);
        let h = complex_cohomology(&c, 0);
        let ann = Ideal::new(ring.clone(), gens.iter().map(|g| ring.parse(g).unwrap()).collect());
        let expected = krull_dim(&ann);
        assert_eq!(h.support_dim(), expected, "{gens:?}");
        assert_eq!(h.module_dim(), expected, "{gens:?}");
    }
}

#[test]
fn complex_duality_is_an_involution() {
    let corpus = [
        abelian(1).unwrap(),
        abelian(2).unwrap(),
        macdonald_symmetric_product(3, 2).unwrap().module,
    ];
    for p in &corpus {
        let c = FreeGradedComplex::from_linear(&bgg(p).unwrap());
        let dd = dual_complex(&dual_complex(&c));
        assert_eq!(dd.to_json(), c.to_json());
        let d = dual_complex(&c);
        for i in c.positions() {
            assert_eq!(d.rank(-i), c.rank(i));
        }
    }
}

/// `⋃_{j ≥ c} Supp H^j(L) = ⋃_{j ≥ c} {h^j ≥ 1}`: the top nonvanishing cohomology of a
/// complex of free modules commutes with base change.
#[test]
fn support_profile_matches_jump_loci() {
    let corpus = [
        abelian(1).unwrap(),
        abelian(2).unwrap(),
        macdonald_symmetric_product(3, 2).unwrap().module,
    ];
    for p in &corpus {
        let l = bgg(p).unwrap();
        let profile = support_profile(&FreeGradedComplex::from_linear(&l));
        let positions: Vec<i64> = l.positions().collect();
        for &c in &positions {
            let sheaf = positions
                .iter()
                .filter(|&&j| j >= c)
                .fold(Dim::Empty, |acc, &j| acc.max(profile.entries[&j].dim));
            let pointwise = positions
                .iter()
                .filter(|&&j| j >= c)
                .fold(Dim::Empty, |acc, &j| acc.max(support_locus(&l, j, 1, 0).unwrap().dim));
            assert_eq!(sheaf, pointwise, "position {c}");
        }
    }
}

fn koszul_xy() -> JetComplex {
    let ring = PolyRing::new(vec!["x".into(), "y".into()], Default::default()).unwrap();
    let d0 = PolyMatrix::new(
        ring.clone(),
        2,
        1,
        vec![ring.parse("x").unwrap(), ring.parse("y").unwrap()],
    )
    .unwrap();
    let d1 = PolyMatrix::new(
        ring.clone(),
        1,
        2,
        vec![ring.parse("-y").unwrap(), ring.parse("x").unwrap()],
    )
    .unwrap();
    JetComplex::new(ring, -1, vec![1, 2, 1], vec![d0, d1]).unwrap()
}

fn perturbed(seed: u64) -> JetComplex {
    // x ↦ (x + a·y²), a nonlinear minimal complex R → R²
    let ring = PolyRing::new(vec!["x".into(), "y".into()], Default::default()).unwrap();
    let mut rng = seeded(seed);
    let a = rng.gen_range(-3..=3);
    let b = rng.gen_range(-3..=3);
    let e0 = ring.parse(&format!("x + {a}*y^2")).unwrap();
    let e1 = ring.parse(&format!("y + {b}*x*y")).unwrap();
    JetComplex::new(
        ring.clone(),
        0,
        vec![1, 2],
        vec![PolyMatrix::new(ring, 2, 1, vec![e0, e1]).unwrap()],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn linear_part_is_idempotent_and_additive(seed in any::<u64>()) {
        let k = perturbed(seed);
        let lin = linear_part(&k).unwrap();
        prop_assert!(lin.is_linear());
        prop_assert_eq!(linear_part(&lin).unwrap().to_json(), lin.to_json());
        let other = koszul_xy();
        let sum = k.direct_sum(&other).unwrap();
        let split = lin.direct_sum(&linear_part(&other).unwrap()).unwrap();
        prop_assert_eq!(linear_part(&sum).unwrap().to_json(), split.to_json());
    }
}
