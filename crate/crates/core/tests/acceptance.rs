//! One test per acceptance criterion. Each prints a single `criterion N: PASS|FAIL` line
//! (visible with `--nocapture`) before asserting.

use std::collections::BTreeMap;
use std::time::Instant;

use gv_core::bgg::{bgg, codim_bound_check, generic_cohomology, graded_cohomology, support_locus, LinearComplex};
use gv_core::examples::{abelian, blowup_example, macdonald_symmetric_product, random_module};
use gv_core::lincplx::{
    linear_part, linearize_summand, madic_pages, nonlinear_example, quasilinearity_diagnostics, HomotopyPair,
    JetComplex,
};
use gv_core::perversity::{classify, dual_complex, support_profile, FreeGradedComplex};
use gv_core::rational::q;
use gv_core::rng::{point, seeded};
use gv_core::tor::{eisenbud_crosscheck, regularity, regularity_violation, tor_table};
use gv_core::{ExteriorModule, PolyMatrix, PolyRing, RatMatrix, StrataSpec, Q};
use rand::Rng;

fn report(n: usize, start: Instant, failures: &[String]) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {n}: {status} ({:.2?})", start.elapsed());
    for f in failures {
        println!("  {f}");
    }
    assert!(failures.is_empty(), "criterion {n} failed: {failures:?}");
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl Into<String>) {
    if !ok {
        failures.push(what.into());
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimensions of `Σ_n`-invariants of `H^*(C)^{⊗n}` by averaging Koszul-signed traces,
/// indexed by cohomological degree.
fn symmetric_invariant_dims(g: usize, n: usize) -> Vec<usize> {
    let degs: Vec<usize> = std::iter::once(0)
        .chain(std::iter::repeat_n(1, 2 * g))
        .chain(std::iter::once(2))
        .collect();
    let b = degs.len();
    let perms = permutations(n);
    let mut traces = vec![0i64; 2 * n + 1];
    for t in 0..b.pow(n as u32) {
        let tuple: Vec<usize> = (0..n).map(|k| (t / b.pow(k as u32)) % b).collect();
        let deg: usize = tuple.iter().map(|&x| degs[x]).sum();
        for p in &perms {
            if (0..n).any(|i| tuple[p[i]] != tuple[i]) {
                continue;
            }
            let mut sign = 1;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] && degs[tuple[i]] % 2 == 1 && degs[tuple[j]] % 2 == 1 {
                        sign = -sign;
                    }
                }
            }
            traces[deg] += sign;
        }
    }
    traces.into_iter().map(|t| (t / perms.len() as i64) as usize).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Seeded module with `m ≤ 4` and total dimension at most 20.
fn small_random_module(seed: u64) -> ExteriorModule {
    let mut rng = seeded(1000 + seed);
    let m = rng.gen_range(1..=4);
    let lo: i64 = rng.gen_range(-2..=1);
    let len = rng.gen_range(1..=4);
    let mut dims = BTreeMap::new();
    let mut left = 20usize;
    for i in 0..len {
        let d = rng.gen_range(0..=left.min(6));
        left -= d;
        dims.insert(lo + i, d);
    }
    random_module(m, &dims, seed).unwrap()
}

fn builtins() -> Vec<(String, ExteriorModule)> {
    vec![
        ("abelian(1)".into(), abelian(1).unwrap()),
        ("abelian(2)".into(), abelian(2).unwrap()),
        (
            "macdonald(3,2)".into(),
            macdonald_symmetric_product(3, 2).unwrap().module,
        ),
        ("blowup(2)".into(), blowup_example(2, None, 0).unwrap()),
    ]
}

#[test]
fn criterion_1_blowup_regularity() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for seed in [0, 1, 2] {
        let p = blowup_example(2, None, seed).unwrap();
        let table = tor_table(&p, 8);
        let reg = regularity(&p, 8).unwrap();
        println!(
            "  seed {seed}: reg {} witness {:?} upper_bound {}",
            reg.reg_at_imax, reg.witness, reg.upper_bound
        );
        check(
            &mut failures,
            !table.upper_bound,
            format!("seed {seed}: Tor table not certified"),
        );
        check(
            &mut failures,
            reg.reg_at_imax == 5,
            format!("seed {seed}: reg {} ≠ 5", reg.reg_at_imax),
        );
        // not 4-regular: some Tor_{i, d_top − i − k} ≠ 0 with k > 4
        let w = regularity_violation(&table, 4);
        match w {
            Some((i, j)) => {
                check(
                    &mut failures,
                    table.get(i, j) > 0,
                    format!("seed {seed}: witness Tor_{i},{j} is zero"),
                );
                check(
                    &mut failures,
                    reg.d_top - i as i64 - j > 4,
                    format!("seed {seed}: witness ({i},{j}) does not violate 4-regularity"),
                );
            }
            None => failures.push(format!("seed {seed}: no 4-regularity witness")),
        }
        check(
            &mut failures,
            regularity_violation(&table, 5).is_none(),
            format!("seed {seed}: 5-regularity violated"),
        );
    }
    report(1, start, &failures);
}

#[test]
fn criterion_2_blowup_defect() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let spec = StrataSpec::new(4, vec![(0, 4), (1, 1), (2, 1)]).unwrap();
    let delta = spec.delta_defect().unwrap();
    check(&mut failures, delta == 1, format!("δ = {delta}"));
    let p = blowup_example(2, None, 0).unwrap();
    let reg = regularity(&p, 8).unwrap();
    check(
        &mut failures,
        4 + delta == reg.reg_at_imax,
        format!("n + δ = {} but reg = {}", 4 + delta, reg.reg_at_imax),
    );
    report(2, start, &failures);
}

#[test]
fn criterion_3_macdonald() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let built = macdonald_symmetric_product(3, 2).unwrap();
    check(&mut failures, built.warnings.is_empty(), "unexpected builder warnings");
    let p = built.module;
    p.validate().unwrap();
    // P_i = H^{2−i}
    let table: Vec<usize> = (0..=4).map(|k| p.dim(2 - k)).collect();
    let oracle = symmetric_invariant_dims(3, 2);
    check(
        &mut failures,
        table == oracle,
        format!("dims {table:?} ≠ oracle {oracle:?}"),
    );

    // generators 1 ∈ H^0 and η ∈ H^2; η^2 is not new since 2 > n/2
    let gens = p.minimal_generators();
    check(
        &mut failures,
        gens.keys().all(|d| (0..=2).contains(d)),
        format!("generators {gens:?} outside 0..=2"),
    );
    check(&mut failures, gens.get(&0) == Some(&1), "no degree-0 generator");
    check(
        &mut failures,
        gens == BTreeMap::from([(0, 1), (2, 1)]),
        format!("generators {gens:?}"),
    );

    let l = bgg(&p).unwrap();
    let generic = generic_cohomology(&l, None, 0);
    for (&c, &h) in generic.dims.range(..=-1) {
        check(&mut failures, h == 0, format!("H^{c} = {h} at a generic point"));
    }
    let mut rng = seeded(3);
    for _ in 0..3 {
        let tau = point(&mut rng, l.m(), 5);
        let h = l.evaluate(&tau).unwrap().cohomology_dims();
        check(
            &mut failures,
            h.range(..=-1).all(|(_, &v)| v == 0),
            format!("sampled H below 0: {h:?}"),
        );
    }
    let reg = regularity(&p, 8).unwrap();
    println!("  reg {} upper_bound {}", reg.reg_at_imax, reg.upper_bound);
    check(
        &mut failures,
        reg.reg_at_imax <= 2,
        format!("reg {} > 2", reg.reg_at_imax),
    );
    report(3, start, &failures);
}

/// Independent description of the Koszul complex `Λ^• W ⊗ S`: term dims are binomial and
/// each basis vector of `Λ^k` maps to `2g − k` terms, each `±z_j`.
fn koszul_shape(l: &LinearComplex, g: usize, failures: &mut Vec<String>) {
    let m = 2 * g;
    check(failures, l.m() == m, format!("{} variables", l.m()));
    for c in -(g as i64)..=g as i64 {
        let k = (c + g as i64) as usize;
        check(
            failures,
            l.dim(c) == binomial(m, k),
            format!("term {c} has dim {}", l.dim(c)),
        );
        if c == g as i64 {
            continue;
        }
        let d = l.differential(c);
        for col in 0..d.cols() {
            let nonzero: Vec<_> = (0..d.rows()).map(|r| d.get(r, col)).filter(|p| !p.is_zero()).collect();
            check(
                failures,
                nonzero.len() == m - k,
                format!("column {col} at {c} has {} entries", nonzero.len()),
            );
            for p in nonzero {
                let ok = p.terms().len() == 1 && p.degree() == Some(1) && {
                    let x = &p.terms()[0].1;
                    *x == q(1) || *x == q(-1)
                };
                check(failures, ok, format!("entry at {c} is not ±z_j"));
            }
        }
    }
}

#[test]
fn criterion_4_abelian_baseline() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for g in 1..=2usize {
        let l = bgg(&abelian(g).unwrap()).unwrap();
        koszul_shape(&l, g, &mut failures);
        let generic = generic_cohomology(&l, None, 0);
        check(
            &mut failures,
            generic.dims.values().all(|&h| h == 0),
            format!("g={g}: generic H {:?}", generic.dims),
        );
        let top = g as i64;
        let h = graded_cohomology(&l, top);
        check(
            &mut failures,
            h.hilbert == vec![1, 0, 0, 0, 0],
            format!("g={g}: Hilbert {:?}", h.hilbert),
        );
        check(
            &mut failures,
            h.consistent,
            format!("g={g}: presentation and degreewise disagree"),
        );
        let locus = support_locus(&l, top, 1, 0).unwrap();
        check(&mut failures, locus.exact, format!("g={g}: locus not exact"));
        check(
            &mut failures,
            locus.codim == Some(2 * g),
            format!("g={g}: codim {:?}", locus.codim),
        );
        let ring = l.ring();
        let irrelevant = locus.ideals.len() == 1
            && (0..ring.nvars()).all(|v| locus.ideals[0].contains(&ring.var(v)))
            && locus.ideals[0].vanishes_at(&vec![q(0); ring.nvars()]);
        check(
            &mut failures,
            irrelevant,
            format!("g={g}: locus ideal is not the irrelevant ideal"),
        );
        let c = FreeGradedComplex::from_linear(&l);
        let class = classify(&c, 0);
        check(
            &mut failures,
            class.m.pass,
            format!("g={g}: m-membership fails at {:?}", class.m.witnesses),
        );
        let profile = support_profile(&c);
        let codim = profile.codim(top);
        check(
            &mut failures,
            codim == Some(2 * g),
            format!("g={g}: profile codim {codim:?} ≠ 2g"),
        );
    }
    report(4, start, &failures);
}

#[test]
fn criterion_5_jump_loci_bound() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let cases = vec![
        ("abelian(1)", abelian(1).unwrap(), 0),
        ("abelian(2)", abelian(2).unwrap(), 0),
        ("macdonald(3,2)", macdonald_symmetric_product(3, 2).unwrap().module, 0),
        ("blowup(2)", blowup_example(2, None, 0).unwrap(), 1),
    ];
    for (name, p, delta) in cases {
        let l = bgg(&p).unwrap();
        let rep = codim_bound_check(&l, delta, 0).unwrap();
        for row in &rep.rows {
            check(
                &mut failures,
                row.exact,
                format!("{name}: position {} not exact", row.position),
            );
            let ok = row.codim.is_none_or(|c| c as i64 >= row.bound);
            check(
                &mut failures,
                ok == row.pass,
                format!("{name}: pass flag wrong at {}", row.position),
            );
            check(
                &mut failures,
                row.bound == 2 * (row.position.abs() - delta),
                format!("{name}: bound at {}", row.position),
            );
        }
        check(&mut failures, rep.pass, format!("{name}: fails with δ = {delta}"));
    }
    report(5, start, &failures);
}

#[test]
fn criterion_6_eisenbud_crosscheck() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut modules: Vec<(String, ExteriorModule)> = (0..25)
        .map(|s| (format!("random {s}"), small_random_module(s)))
        .collect();
    modules.extend(builtins());
    let mut checks = 0;
    for (name, p) in &modules {
        p.validate().unwrap();
        assert!(p.m() <= 4 || !name.starts_with("random"));
        assert!(p.total_dim() <= 20 || !name.starts_with("random"));
        for delta in 0..=2 {
            let rep = eisenbud_crosscheck(p, delta, 6).unwrap();
            checks += 1;
            check(
                &mut failures,
                rep.agree,
                format!(
                    "{name}, δ={delta}: exact_below {} ({:?}) vs Tor vanishing {} ({:?})",
                    rep.exact_below, rep.exact_witness, rep.tor_vanishes, rep.tor_witness
                ),
            );
        }
    }
    println!("  {checks} comparisons, {} disagreements", failures.len());
    report(6, start, &failures);
}

#[test]
fn criterion_7_spectral_sequence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut corpus: Vec<(String, JetComplex)> = (1..=2)
        .map(|g| {
            (
                format!("koszul({g})"),
                JetComplex::from_linear(&bgg(&abelian(g).unwrap()).unwrap()),
            )
        })
        .collect();
    for s in 0..3 {
        let dims = BTreeMap::from([(0, 1), (1, 2), (2, 1)]);
        let p = random_module(2, &dims, 70 + s).unwrap();
        corpus.push((format!("random {s}"), JetComplex::from_linear(&bgg(&p).unwrap())));
    }
    let counterexample = nonlinear_example();
    corpus.push(("counterexample".into(), counterexample.clone()));
    for (name, k) in &corpus {
        let pages = madic_pages(k, 4, 3).unwrap();
        check(
            &mut failures,
            pages.undetermined == 0,
            format!("{name}: undetermined cells"),
        );
        check(
            &mut failures,
            pages.e1_formula_holds,
            format!("{name}: E_1 formula fails"),
        );
        let higher: Vec<_> = pages
            .cells
            .iter()
            .filter(|c| (2..=3).contains(&c.r) && c.p <= 4)
            .collect();
        check(
            &mut failures,
            !higher.is_empty(),
            format!("{name}: no cells with r ≥ 2"),
        );
        check(
            &mut failures,
            higher.iter().all(|c| c.d_rank == Some(0)),
            format!("{name}: nonzero d_r for r ≥ 2"),
        );
        check(
            &mut failures,
            pages.degenerates_at_e2,
            format!("{name}: not degenerate at E_2"),
        );
    }
    let diag = quasilinearity_diagnostics(&counterexample, 4).unwrap();
    check(
        &mut failures,
        diag.differs,
        "diagnostics do not separate the counterexample from its linear part",
    );
    let lin = linear_part(&counterexample).unwrap();
    check(
        &mut failures,
        !quasilinearity_diagnostics(&lin, 4).unwrap().differs,
        "diagnostics separate a linear complex from itself",
    );
    report(7, start, &failures);
}

/// `id + N` with `N` strictly upper triangular with linear and quadratic entries, and its inverse.
fn unipotent(ring: &PolyRing, n: usize, seed: u64) -> (PolyMatrix, PolyMatrix) {
    let mut rng = seeded(seed);
    let mut nil = PolyMatrix::zeros(ring, n, n);
    for r in 0..n {
        for c in r + 1..n {
            let mut p = ring.zero();
            for v in 0..ring.nvars() {
                p = p.add(&ring.var(v).scale(&q(rng.gen_range(-2..=2))));
                p = p.add(&ring.var(v).pow(2).scale(&q(rng.gen_range(-1..=1))));
            }
            nil.set(r, c, p);
        }
    }
    let id = PolyMatrix::identity(ring, n);
    let mut inv = id.clone();
    let mut power = id.clone();
    for k in 1..n.max(1) {
        power = power.mul(&nil).unwrap();
        inv = if k % 2 == 1 {
            inv.sub(&power).unwrap()
        } else {
            inv.add(&power).unwrap()
        };
    }
    (id.add(&nil).unwrap(), inv)
}

/// `f` is a chain map `a → b` (both indexed from the same start).
fn chain_map(a: &JetComplex, b: &JetComplex, f: &[PolyMatrix]) -> bool {
    a.positions().enumerate().all(|(n, i)| {
        let lhs = match f.get(n + 1) {
            Some(next) => next.mul(&a.differential(i)).unwrap(),
            None => PolyMatrix::zeros(a.ring(), b.rank(i + 1), a.rank(i)),
        };
        lhs == b.differential(i).mul(&f[n]).unwrap()
    })
}

#[test]
fn criterion_8_summand_linearization() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let k = JetComplex::from_linear(&bgg(&abelian(1).unwrap()).unwrap());
    let ring = k.ring().clone();
    let positions: Vec<i64> = k.positions().collect();
    for seed in 0..5u64 {
        let gs: Vec<_> = positions
            .iter()
            .map(|&i| unipotent(&ring, k.rank(i), (100 * seed as i64 + i + 7) as u64))
            .collect();
        let diffs = (0..positions.len() - 1)
            .map(|n| {
                gs[n + 1]
                    .0
                    .mul(&k.differential(positions[n]))
                    .unwrap()
                    .mul(&gs[n].1)
                    .unwrap()
            })
            .collect();
        let l = JetComplex::new(ring.clone(), k.i_min(), k.ranks().into_values().collect(), diffs).unwrap();
        check(
            &mut failures,
            !l.is_linear(),
            format!("seed {seed}: conjugate is already linear"),
        );
        let hp = HomotopyPair {
            s: gs.iter().map(|g| g.1.clone()).collect(),
            p: gs.iter().map(|g| g.0.clone()).collect(),
            h: HomotopyPair::identity(&l).h,
        };
        let out = match linearize_summand(&k, &l, &hp) {
            Ok(out) => out,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        check(&mut failures, out.l0.is_linear(), format!("seed {seed}: L0 not linear"));
        check(
            &mut failures,
            chain_map(&out.l0, &k, &out.s0),
            format!("seed {seed}: s0 not a chain map"),
        );
        check(
            &mut failures,
            chain_map(&out.l0, &l, &out.iso),
            format!("seed {seed}: iso not a chain map"),
        );
        for (n, i) in positions.iter().enumerate() {
            check(
                &mut failures,
                out.iso[n].constant_part() == RatMatrix::identity(l.rank(*i)),
                format!("seed {seed}: iso not invertible at {i}"),
            );
        }
    }
    report(8, start, &failures);
}

#[test]
fn criterion_9_invariants() {
    let start = Instant::now();
    let mut failures = Vec::new();

    for s in 0..100 {
        let p = small_random_module(s);
        if let Err(e) = p.validate() {
            failures.push(format!("module {s}: {e}"));
        }
        let l = bgg(&p).unwrap();
        check(&mut failures, l.validate().is_ok(), format!("module {s}: d∘d ≠ 0"));
        check(
            &mut failures,
            p.dual().dual() == p,
            format!("module {s}: dual is not an involution"),
        );
        let ld = bgg(&p.dual()).unwrap();
        check(
            &mut failures,
            l.positions().all(|c| ld.dim(-c) == l.dim(c)),
            format!("module {s}: dual term dims not mirrored"),
        );
        let mut rng = seeded(s);
        let tau = point(&mut rng, l.m(), 3);
        let v = l.evaluate(&tau).unwrap();
        let chi: i64 = v
            .cohomology_dims()
            .iter()
            .map(|(c, &h)| if c % 2 == 0 { h as i64 } else { -(h as i64) })
            .sum();
        check(
            &mut failures,
            chi == l.euler_characteristic(),
            format!("module {s}: χ changes under evaluation"),
        );
    }

    for g in 1..=2 {
        let c = FreeGradedComplex::from_linear(&bgg(&abelian(g).unwrap()).unwrap());
        check(
            &mut failures,
            dual_complex(&dual_complex(&c)).to_json() == c.to_json(),
            format!("abelian({g}): dual complex is not an involution"),
        );
    }

    // semicontinuity: h^c(τ) ≥ generic, with h^c(τ) > generic exactly on S^c_{generic+1}
    for (name, p) in builtins() {
        let l = bgg(&p).unwrap();
        let m = l.m();
        let generic = generic_cohomology(&l, None, 0).dims;
        let mut points: Vec<Vec<Q>> = vec![vec![q(0); m]];
        for j in 0..m.min(4) {
            let mut e = vec![q(0); m];
            e[j] = q(1);
            points.push(e);
        }
        let mut rng = seeded(77);
        while points.len() < 20 {
            points.push(point(&mut rng, m, 2));
        }
        let loci: BTreeMap<i64, _> = l
            .positions()
            .map(|c| (c, support_locus(&l, c, generic[&c] + 1, 0).unwrap()))
            .collect();
        for tau in &points {
            let h = l.evaluate(tau).unwrap().cohomology_dims();
            for c in l.positions() {
                let (ht, hg) = (h[&c], generic[&c]);
                check(
                    &mut failures,
                    ht >= hg,
                    format!("{name}: h^{c}(τ) = {ht} < generic {hg}"),
                );
                check(
                    &mut failures,
                    (ht > hg) == loci[&c].contains(tau),
                    format!("{name}: jump at {c} disagrees with the locus (h = {ht}, generic {hg})"),
                );
            }
        }
    }

    // determinism
    let p = blowup_example(2, None, 0).unwrap();
    let run = || {
        let l = bgg(&p).unwrap();
        let a = serde_json::to_string(&codim_bound_check(&l, 1, 0).unwrap()).unwrap();
        let b = serde_json::to_string(&tor_table(&p, 4)).unwrap();
        let c = serde_json::to_string(&madic_pages(&nonlinear_example(), 4, 3).unwrap()).unwrap();
        let d = blowup_example(2, None, 0).unwrap().to_json();
        format!("{a}{b}{c}{d}")
    };
    check(&mut failures, run() == run(), "reports differ across runs");

    report(9, start, &failures);
}
