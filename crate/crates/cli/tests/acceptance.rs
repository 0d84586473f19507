//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. All checks are exact.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crjet::automorphisms::{
    compose_maps, default_out_degree, hol_jet_basis, is_real_on, multiply_by_invariant, truncated_flow,
};
use crjet::fields::FieldJet;
use crjet::fixtures;
use crjet::input::resolve_point;
use crjet::jets::{agreement_order, counterexample_pair, determination_test, working_degree, DeterminationConfig};
use crjet::linalg::{ExactMatrix, Sampler};
use crjet::manifold::{GenericManifold, MarkedPoint};
use crjet::nondegeneracy::{
    degeneracy_witness, k_nondegeneracy_at, levi_number, sample_point, LeviConfig, LeviVerdict,
};
use crjet::segre::{pairing_residuals, segre_chain};
use crjet::{Monomial, Poly, Qi, Q};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn origin(m: &GenericManifold, degree: u32) -> Result<MarkedPoint, String> {
    ok(m.mark_point(
        &vec![Qi::zero(); m.n()],
        &vec![Q::from_integer(0.into()); m.d()],
        degree,
    ))
}

fn st3_rigidity() -> Check {
    let m = fixtures::manifold("st3");
    let mut notes = Vec::new();
    for dc in [2u32, 4] {
        let outs: Vec<u32> = (default_out_degree(&m, dc)..=40).collect();
        let rep = ok(hol_jet_basis(&m, dc, &outs))?;
        ensure(rep.verified, "kernel element failed re-verification")?;
        ensure(
            rep.dims.windows(2).all(|w| w[1] <= w[0]),
            format!("dims not nonincreasing: {:?}", rep.dims),
        )?;
        let first_zero = rep
            .out_degrees
            .iter()
            .zip(&rep.dims)
            .find(|(_, d)| **d == 0)
            .map(|(o, _)| *o);
        let at = first_zero.ok_or_else(|| format!("D_coef {dc}: no zero dimension up to 40: {:?}", rep.dims))?;
        notes.push(format!("D_coef {dc}: dim 0 from D_out {at}"));
    }
    Ok(notes.join("; "))
}

fn st0_degeneracy() -> Check {
    let m = fixtures::manifold("st0");
    let zero = ok(m.point(&[Qi::zero()], &[Q::from_integer(0.into())]))?;
    let at0 = ok(k_nondegeneracy_at(&m, &zero, 12))?;
    ensure(at0.k.is_none(), "origin reported finitely nondegenerate")?;
    ensure(
        at0.span_dims.iter().all(|&d| d < 2),
        format!("span dims {:?}", at0.span_dims),
    )?;
    let f = fixtures::file("st0").ok_or("missing fixture")?;
    let (z, s) = ok(resolve_point(1, 1, &f.point("p1").ok_or("missing point")?.assignments))?;
    let p = ok(m.mark_point(&z, &s, 8))?;
    ensure(p.point.w0 == vec![Qi::from_int(2).mul_i()], "point is not (1, 2i)")?;
    let k = ok(k_nondegeneracy_at(&m, &p.point, 12))?.k;
    ensure(k == Some(1), format!("k at (1, 2i) = {k:?}"))?;
    let germ0 = ok(p.recentered.point(&[Qi::zero()], &[Q::from_integer(0.into())]))?;
    let kr = ok(k_nondegeneracy_at(&p.recentered, &germ0, 12))?.k;
    ensure(kr == Some(1), format!("k on recentered germ = {kr:?}"))?;
    let l = ok(levi_number(&m, &LeviConfig::default()))?;
    ensure(l.verdict == LeviVerdict::Finite(1), format!("levi {:?}", l.verdict))?;
    Ok(format!(
        "span dims at 0 stall at {} through kmax 12; k(1,2i) = 1; l = 1",
        at0.span_dims.iter().max().copied().unwrap_or(0)
    ))
}

fn heisenberg() -> Check {
    let m = fixtures::manifold("heis2");
    let p = origin(&m, working_degree(6))?;
    let k = ok(k_nondegeneracy_at(&m, &p.point, 12))?.k;
    ensure(k == Some(1), format!("k = {k:?}"))?;
    let ch = ok(segre_chain(&p, 3, 4, &mut Sampler::new(0, 8)))?;
    ensure(
        ch.dims == vec![1, 2] && ch.j0 == Some(2) && ch.minimal() == Some(true),
        format!("segre {:?}", ch.dims),
    )?;
    let rep = ok(hol_jet_basis(&m, 2, &[4, 6, 8]))?;
    ensure(
        rep.dims == vec![8, 8, 8] && rep.verified,
        format!("hol dims {:?}", rep.dims),
    )?;
    let det = ok(determination_test(&m, &p, &DeterminationConfig::default()))?;
    ensure(
        det.prerequisites_ok && det.unique && det.verified,
        format!("freedoms {:?}", det.freedoms),
    )?;
    ensure(det.k_norm == 2, format!("K_norm {}", det.k_norm))?;
    Ok("k = 1; d = [1, 2], j0 = 2; hol dims [8, 8, 8]; unique through 6 with K_norm 2".into())
}

fn nowhere_minimal() -> Check {
    let mut seen = Vec::new();
    // the first nonlinear term of ST3's solved form has degree 14
    for (name, degree) in [("prod3", 8), ("st3", 16)] {
        let m = fixtures::manifold(name);
        let mut points = vec![origin(&m, degree)?];
        let mut s = Sampler::new(7, 2);
        for _ in 0..3 {
            let q = ok(sample_point(&m, &mut s))?;
            points.push(ok(m.mark_point(&q.z0, &q.s0, degree))?);
        }
        for (i, p) in points.iter().enumerate() {
            let ch = ok(segre_chain(p, 4, degree, &mut Sampler::new(i as u64, 8)))?;
            let top = ch.j0.map(|j| ch.dims[j - 1]);
            ensure(
                top == Some(2) && ch.minimal() == Some(false),
                format!("{name} point {i}: dims {:?}", ch.dims),
            )?;
        }
        seen.push(format!("{name}: d_j0 = 2 at 4 points"));
    }
    let m = fixtures::manifold("prod3");
    let r = m.registry();
    let h = Poly::var(r, r.w(1));
    ensure(ok(is_real_on(&m, &h, None))?, "w2 not real on PROD3")?;
    let x = ok(FieldJet::new(vec![
        Poly::var(r, r.z(0)),
        Poly::var(r, r.w(0)).scale(&Qi::from_int(2)),
        Poly::zero(r),
    ]))?;
    let mut rows = Vec::new();
    let monos: Vec<Monomial> = Monomial::all_upto(r.len(), &[r.z(0), r.w(0), r.w(1)], 4);
    for k in 0..4 {
        let y = ok(multiply_by_invariant(&m, &h, k, &x))?;
        ensure(ok(y.is_tangent(&m, None))?, format!("h^{k} X not tangent"))?;
        rows.push(
            y.coeffs()
                .iter()
                .flat_map(|c| monos.iter().map(move |mm| c.coeff(mm)))
                .collect::<Vec<_>>(),
        );
    }
    let rank = ExactMatrix::from_rows(rows).rank();
    ensure(rank == 4, format!("rank {rank}"))?;
    seen.push("h^k X, k = 0..3, tangent with rank 4".into());
    Ok(seen.join("; "))
}

fn degenerate_non_uniqueness() -> Check {
    let m = fixtures::manifold("plane");
    let r = m.registry();
    let w = ok(degeneracy_witness(&m, 0, None))?;
    let dz = ok(FieldJet::new(vec![Poly::one(r), Poly::zero(r)]))?;
    ensure(
        w.fields.len() == 1 && w.exact == vec![true],
        "witness space is not one exact field",
    )?;
    let c = w.fields[0].coeff(0).constant_term();
    ensure(
        !c.is_zero() && w.fields[0].scale(&c.inv()) == dz,
        format!("witness {}", w.fields[0]),
    )?;
    let p = origin(&m, working_degree(6))?;
    for k in [2, 4, 6] {
        let pair = ok(counterexample_pair(&p, k))?.ok_or(format!("no pair at K = {k}"))?;
        ensure(
            agreement_order(&pair.f, &pair.g) == Some(k),
            format!("K = {k}: agreement"),
        )?;
        ensure(pair.f != pair.g && pair.verified, format!("K = {k}: pair invalid"))?;
    }
    let det = ok(determination_test(
        &m,
        &p,
        &DeterminationConfig {
            force: true,
            ..Default::default()
        },
    ))?;
    ensure(
        det.freedoms.iter().all(|(_, f)| *f > 0),
        format!("freedoms {:?}", det.freedoms),
    )?;
    Ok(format!(
        "witness d/dz at D = 0; pairs at K = 2, 4, 6; freedoms {:?}",
        det.freedoms
    ))
}

fn random_poly(rng: &mut ChaCha8Rng, r: &std::sync::Arc<crjet::Registry>) -> Poly {
    let terms = rng.gen_range(0..6);
    Poly::from_terms(
        r,
        (0..terms).map(|_| {
            let e: Vec<u32> = (0..r.len()).map(|_| rng.gen_range(0..3)).collect();
            let c = Qi::complex(
                rng.gen_range(-9..=9),
                rng.gen_range(1..=4),
                rng.gen_range(-9..=9),
                rng.gen_range(1..=4),
            );
            (Monomial::from_exps(e), c)
        }),
    )
}

fn invariants() -> Check {
    let r = crjet::Registry::base(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let (a, b, c) = (
            random_poly(&mut rng, &r),
            random_poly(&mut rng, &r),
            random_poly(&mut rng, &r),
        );
        ensure(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), "distributivity")?;
        ensure(&(&a * &b) * &c == &a * &(&b * &c), "associativity")?;
        ensure(&a * &b == &b * &a && &a + &b == &b + &a, "commutativity")?;
        let ab = ok(a.bar())?;
        ensure(ok(ab.bar())? == a, "bar involution")?;
        ensure(ok((&a * &b).bar())? == &ab * &ok(b.bar())?, "bar multiplicative")?;
    }
    for (name, _) in fixtures::ALL {
        let m = fixtures::manifold(name);
        let c = ok(m.complexify(12))?;
        ensure(
            ok(c.solved_residual())?.iter().all(Poly::is_zero),
            format!("{name}: solved form"),
        )?;
        let basis = c.cr_basis();
        for i in 0..m.n() {
            ensure(
                c.rho().iter().all(|rho| basis.apply(i, rho).is_zero()),
                format!("{name}: CR basis"),
            )?;
        }
        let p = origin(&m, 8)?;
        let ch = ok(segre_chain(&p, m.d() + 2, 8, &mut Sampler::new(1, 8)))?;
        for res in ok(pairing_residuals(&m, &ch))? {
            ensure(res.iter().all(Poly::is_zero), format!("{name}: Segre pairing"))?;
        }
        if name != "st0" && name != "st3" {
            let rep = ok(hol_jet_basis(&m, 2, &[]))?;
            ensure(rep.verified, format!("{name}: automorphism kernel re-verification"))?;
        }
        let w = ok(degeneracy_witness(&m, 1, None))?;
        for f in &w.fields {
            ensure(
                ok(f.holomorphic_residuals(&m, Some(w.out_degree)))?
                    .iter()
                    .all(Poly::is_zero),
                format!("{name}: witness"),
            )?;
        }
    }
    let m = fixtures::manifold("prod3");
    let r = m.registry();
    let v = |k| Poly::var(r, k);
    let fields = [
        vec![v(r.w(1)).pow(2), Poly::zero(r), Poly::zero(r)],
        vec![&v(r.z(0)) * &v(r.w(1)), v(r.z(0)).pow(2), Poly::zero(r)],
        vec![v(r.w(0)).scale(&Qi::i()), &v(r.w(1)) * &v(r.w(1)), v(r.z(0)).pow(3)],
    ];
    for f in fields {
        let x = ok(FieldJet::new(f))?;
        let (s, t) = (Qi::ratio(2, 3), Qi::ratio(-1, 5));
        let fs = ok(truncated_flow(&x, 6, &s))?;
        let ft = ok(truncated_flow(&x, 6, &t))?;
        let fst = ok(truncated_flow(&x, 6, &(&s + &t)))?;
        ensure(ok(compose_maps(&fs, &ft, 6))? == fst, format!("group law for {x}"))?;
        let back = ok(truncated_flow(&x, 6, &-&s))?;
        let id: Vec<Poly> = (0..3).map(|j| v(r.big_z(j))).collect();
        ensure(ok(compose_maps(&back, &fs, 6))? == id, format!("inverse flow for {x}"))?;
    }
    Ok("1000 random polynomials; residuals zero on 5 fixtures; flow group law on 3 fields".into())
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("1 ST3 rigidity", st3_rigidity),
        ("2 ST0 point degeneracy", st0_degeneracy),
        ("3 Heisenberg suite", heisenberg),
        ("4 nowhere-minimal behavior", nowhere_minimal),
        ("5 degenerate non-uniqueness", degenerate_non_uniqueness),
        ("6 invariant suites", invariants),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail}) [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail}) [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
