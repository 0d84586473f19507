//! Infinitesimal CR automorphisms with polynomial coefficients: truncated
//! tangency systems, the bracket criterion, multiplication by real
//! invariants, and time-`t` flows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::FieldJet;
use crate::linalg::ExactMatrix;
use crate::manifold::{ComplexifiedManifold, GenericManifold};
use crate::poly::{Monomial, Poly};
use crate::scalar::Qi;
use crate::system::MatchingSystem;

#[derive(Clone, Debug)]
pub struct HolJetReport {
    pub coef_degree: u32,
    /// Output degrees, ascending, with the kernel dimension at each.
    pub out_degrees: Vec<u32>,
    pub dims: Vec<usize>,
    /// Real basis of the kernel at the largest output degree.
    pub basis: Vec<FieldJet>,
    /// Every basis field passed the independent tangency re-check.
    pub verified: bool,
}

impl HolJetReport {
    pub fn dimension(&self) -> usize {
        *self.dims.last().expect("at least one output degree")
    }
}

pub fn default_out_degree(m: &GenericManifold, coef_degree: u32) -> u32 {
    let rho_deg = m.rho().iter().filter_map(Poly::total_degree).max().unwrap_or(1);
    coef_degree + rho_deg + 2
}

fn check_out_degree(m: &GenericManifold, d_out: u32) -> Result<()> {
    match m.truncated_at() {
        Some(t) if d_out > t => Err(Error::InvalidArgument(format!(
            "output degree {d_out} exceeds the recentered graph's degree {t}"
        ))),
        _ => Ok(()),
    }
}

/// Columns `(A + B, i(A - B))` per `(j, monomial)`, where
/// `A = m(Z) ∂ρ/∂Z_j` and `B = m(ζ) ∂ρ/∂ζ_j`, reduced by `τ = Q̄`.
fn tangency_columns(c: &ComplexifiedManifold, monos: &[Monomial], d_out: u32) -> Result<Vec<Vec<Poly>>> {
    let r = c.registry().clone();
    let big_n = r.big_n();
    let red = |p: &Poly| c.reduce(p, d_out);
    let s: Vec<Vec<Poly>> = (0..big_n)
        .map(|j| c.rho().iter().map(|p| red(&p.derivative(r.big_z(j)))).collect())
        .collect::<Result<_>>()?;
    let t: Vec<Vec<Poly>> = (0..big_n)
        .map(|j| c.rho().iter().map(|p| red(&p.derivative(r.zeta(j)))).collect())
        .collect::<Result<_>>()?;
    // m(ζ) reduced, i.e. m(χ, Q̄)
    let conj_monos: Vec<Poly> = monos
        .par_iter()
        .map(|m| red(&Poly::monomial(&r, m.clone(), Qi::one()).bar()?))
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> = (0..big_n).flat_map(|j| (0..monos.len()).map(move |k| (j, k))).collect();
    let cols: Vec<[Vec<Poly>; 2]> = tasks
        .par_iter()
        .map(|&(j, k)| {
            let mut x = Vec::with_capacity(c.rho().len());
            let mut y = Vec::with_capacity(c.rho().len());
            for e in 0..c.rho().len() {
                let a = s[j][e].mul_monomial(&monos[k], &Qi::one()).truncate(d_out);
                let b = conj_monos[k].mul_trunc(&t[j][e], d_out);
                x.push(&a + &b);
                y.push((&a - &b).scale(&Qi::i()));
            }
            [x, y]
        })
        .collect();
    Ok(cols.into_iter().flatten().collect())
}

/// Real vector space of fields `Y = Σ a_j ∂/∂Z_j`, `deg a_j <= coef_degree`,
/// with `(Y + Ȳ)ρ ≡ 0` on the complexification through each output degree.
/// `out_degrees` defaults to `[default_out_degree]`.
pub fn hol_jet_basis(m: &GenericManifold, coef_degree: u32, out_degrees: &[u32]) -> Result<HolJetReport> {
    let mut outs: Vec<u32> = if out_degrees.is_empty() {
        vec![default_out_degree(m, coef_degree)]
    } else {
        out_degrees.to_vec()
    };
    outs.sort_unstable();
    outs.dedup();
    if outs[0] < coef_degree {
        return Err(Error::InvalidArgument("output degree below coefficient degree".into()));
    }
    let top = *outs.last().expect("nonempty");
    check_out_degree(m, top)?;
    let c = m.complexify(top)?;
    let r = m.registry().clone();
    let big_n = r.big_n();
    let zvars: Vec<usize> = (0..big_n).map(|j| r.big_z(j)).collect();
    let monos = Monomial::all_upto(r.len(), &zvars, coef_degree);
    let columns = tangency_columns(&c, &monos, top)?;
    let system = MatchingSystem::from_columns(&columns, true);
    let mut kernel = Vec::new();
    let mut ranks = std::collections::BTreeMap::new();
    let e = system.eliminate(top, |d, e| {
        ranks.insert(d, e.rank());
    });
    let dims = outs
        .iter()
        .map(|&d| columns.len() - ranks.range(..=d).next_back().map_or(0, |(_, r)| *r))
        .collect();
    for v in e.kernel() {
        kernel.push(field_from_real_vector(&r, &monos, &v)?);
    }
    let mut verified = true;
    for f in &kernel {
        verified &= f.tangency_residuals(m, Some(top))?.iter().all(Poly::is_zero);
    }
    Ok(HolJetReport {
        coef_degree,
        out_degrees: outs,
        dims,
        basis: kernel,
        verified,
    })
}

/// Unknown `2(j·|monos| + k)` is `Re` and `+1` is `Im` of the coefficient of
/// `monos[k]` in `a_j`.
fn field_from_real_vector(r: &std::sync::Arc<crate::Registry>, monos: &[Monomial], v: &[Qi]) -> Result<FieldJet> {
    let big_n = r.big_n();
    let mut coeffs = vec![Poly::zero(r); big_n];
    for j in 0..big_n {
        for (k, mono) in monos.iter().enumerate() {
            let idx = 2 * (j * monos.len() + k);
            let c = &v[idx] + &v[idx + 1].mul_i();
            if !c.is_zero() {
                coeffs[j].add_term(mono.clone(), &c);
            }
        }
    }
    FieldJet::new(coeffs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomorphismCheck {
    /// `(Y + Ȳ)ρ ≡ 0` on the complexification.
    pub tangent: bool,
    /// `[L̃_i, X̃]` lies in the span of the `L̃_k` through the output degree.
    pub bracket: bool,
    pub out_degree: u32,
}

impl AutomorphismCheck {
    pub fn verdict(&self) -> bool {
        self.tangent && self.bracket
    }
}

/// Bracket criterion for the real field `X = Y + Ȳ`: with
/// `B = [L̃_i, X̃]`, which only has `ζ`-components, `B ∈ span{L̃_k}` reads
/// `scale·B_{τ_k} - Σ_l B_{χ_l} b_{lk} ≡ 0` modulo the complexification.
pub fn is_infinitesimal_automorphism(m: &GenericManifold, x: &FieldJet, out_degree: u32) -> Result<AutomorphismCheck> {
    check_out_degree(m, out_degree)?;
    let c = m.complexify(out_degree)?;
    let basis = c.cr_basis();
    let r = m.registry().clone();
    let (n, d, big_n) = (m.n(), m.d(), m.big_n());
    let abar: Vec<Poly> = x.coeffs().iter().map(|a| a.bar()).collect::<Result<_>>()?;
    let mut bracket = true;
    for i in 0..n {
        let field = basis.field(i);
        let coeff_of = |v: usize| -> Poly {
            field
                .iter()
                .find(|(u, _)| *u == v)
                .map_or_else(|| Poly::zero(&r), |(_, p)| p.clone())
        };
        // B_u = L̃(X̃_u) - X̃(L̃_u) for u = ζ_l
        let b: Vec<Poly> = (0..big_n)
            .map(|l| {
                let u = r.zeta(l);
                basis.apply(i, &abar[l]) - x.apply_real(&coeff_of(u))
            })
            .collect();
        let scale = basis.scale();
        for k in 0..d {
            let mut cond = scale * &b[n + k];
            for l in 0..n {
                let blk = basis
                    .field(l)
                    .iter()
                    .find(|(u, _)| *u == r.tau(k))
                    .map(|(_, p)| p.clone());
                if let Some(blk) = blk {
                    cond = cond - &b[l] * &blk;
                }
            }
            if !c.reduce(&cond, out_degree)?.is_zero() {
                bracket = false;
            }
        }
    }
    let degree = m.truncated_at().map(|_| out_degree);
    let tangent = x.is_tangent(m, degree)?;
    Ok(AutomorphismCheck {
        tangent,
        bracket,
        out_degree,
    })
}

/// True when `h|_M` is real: `h(Z) - h̄(ζ) ≡ 0` on the complexification.
pub fn is_real_on(m: &GenericManifold, h: &Poly, degree: Option<u32>) -> Result<bool> {
    let diff = h - &h.bar()?;
    Ok(m.graph_residual(&diff, degree)?.is_zero())
}

/// `h^k·Y` after checking that `h` is real on `M` and `Y` is tangent; the
/// product is re-verified.
pub fn multiply_by_invariant(m: &GenericManifold, h: &Poly, k: u32, y: &FieldJet) -> Result<FieldJet> {
    let degree = m.truncated_at();
    if !is_real_on(m, h, degree)? {
        return Err(Error::NotRealOnManifold(h.to_string()));
    }
    if !y.is_tangent(m, degree)? {
        return Err(Error::NotTangent);
    }
    let out = y.multiply(&h.pow(k));
    if !out.is_tangent(m, degree)? {
        return Err(Error::NotTangent);
    }
    Ok(out)
}

/// Holomorphic polynomials `h`, `h(0) = 0`, `deg h <= degree`, real on `M`
/// through `out_degree`; returned only if the identity holds exactly.
pub fn real_invariants(m: &GenericManifold, degree: u32, out_degree: u32) -> Result<Vec<Poly>> {
    check_out_degree(m, out_degree)?;
    let c = m.complexify(out_degree)?;
    let r = m.registry().clone();
    let zvars: Vec<usize> = (0..r.big_n()).map(|j| r.big_z(j)).collect();
    let monos: Vec<Monomial> = Monomial::all_upto(r.len(), &zvars, degree)
        .into_iter()
        .filter(|m| m.deg() > 0)
        .collect();
    let mut columns = Vec::with_capacity(2 * monos.len());
    for mono in &monos {
        let a = Poly::monomial(&r, mono.clone(), Qi::one());
        let b = c.reduce(&a.bar()?, out_degree)?;
        columns.push(vec![&a - &b]);
        columns.push(vec![(&a + &b).scale(&Qi::i())]);
    }
    let system = MatchingSystem::from_columns(&columns, true);
    let mut out = Vec::new();
    for v in system.kernel(out_degree) {
        let mut h = Poly::zero(&r);
        for (k, mono) in monos.iter().enumerate() {
            let coeff = &v[2 * k] + &v[2 * k + 1].mul_i();
            h.add_term(mono.clone(), &coeff);
        }
        if is_real_on(m, &h, m.truncated_at())? {
            out.push(h);
        }
    }
    Ok(out)
}

/// Linear part of `Y` at the origin: `L[j][l] = ∂a_j/∂Z_l (0)`.
fn linear_part(y: &FieldJet) -> ExactMatrix {
    let r = y.registry();
    let big_n = r.big_n();
    ExactMatrix::from_rows(
        (0..big_n)
            .map(|j| (0..big_n).map(|l| y.coeff(j).linear_coeff(r.big_z(l))).collect())
            .collect(),
    )
}

fn is_nilpotent(a: &ExactMatrix) -> bool {
    let n = a.rows();
    let mut p = a.clone();
    for _ in 1..n.max(1) {
        p = mat_mul(&p, a);
    }
    (0..n).all(|i| (0..n).all(|j| p.get(i, j).is_zero()))
}

fn mat_mul(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    let mut out = ExactMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = Qi::zero();
            for k in 0..a.cols() {
                acc += &(a.get(i, k) * b.get(k, j));
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Time-`t` map of `Y` through degree `degree`, by the Lie series
/// `F_j = Σ_k t^k Y^k(Z_j)/k!`. Requires `Y(0) = 0` and a nilpotent linear
/// part, so that the series has finitely many terms in each degree and
/// rational coefficients.
pub fn truncated_flow(y: &FieldJet, degree: u32, t: &Qi) -> Result<Vec<Poly>> {
    let r = y.registry().clone();
    if y.coeffs().iter().any(|a| !a.constant_term().is_zero()) {
        return Err(Error::FlowUnavailable("field does not vanish at the origin".into()));
    }
    if !is_nilpotent(&linear_part(y)) {
        return Err(Error::FlowUnavailable("linear part is not nilpotent".into()));
    }
    let big_n = r.big_n();
    let cap = (big_n as u32 + 1) * (degree + 1) + 1;
    let mut out = Vec::with_capacity(big_n);
    for j in 0..big_n {
        let mut term = Poly::var(&r, r.big_z(j)).truncate(degree);
        let mut acc = term.clone();
        let mut k = 0u32;
        loop {
            k += 1;
            if k > cap {
                return Err(Error::NoConvergence(cap as usize));
            }
            term = y
                .apply_holomorphic(&term)
                .truncate(degree)
                .scale(&(t * &Qi::ratio(1, k as i64)));
            if term.is_zero() {
                break;
            }
            acc = acc + &term;
        }
        out.push(acc);
    }
    Ok(out)
}

/// `F ∘ G` through `degree`, both given as `N` holomorphic components.
pub fn compose_maps(f: &[Poly], g: &[Poly], degree: u32) -> Result<Vec<Poly>> {
    let r = f[0].registry().clone();
    let rules: Vec<(usize, Poly)> = g.iter().enumerate().map(|(j, p)| (r.big_z(j), p.clone())).collect();
    f.iter().map(|p| p.substitute_trunc(&rules, degree)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn field(m: &GenericManifold, coeffs: &[&str]) -> FieldJet {
        let r = m.registry();
        let polys = coeffs
            .iter()
            .map(|s| {
                // coefficients in z1.. and w1.. written with the input grammar
                let e = crate::input::parse_expr(s).unwrap();
                expr_to_hol(&e, r)
            })
            .collect();
        FieldJet::new(polys).unwrap()
    }

    fn expr_to_hol(e: &crate::input::Expr, r: &std::sync::Arc<crate::Registry>) -> Poly {
        use crate::input::Expr;
        let rec = |x: &Expr| expr_to_hol(x, r);
        match e {
            Expr::Num(v) => Poly::constant(r, Qi::from_q(crate::Q::from_integer(v.clone()))),
            Expr::I => Poly::constant(r, Qi::i()),
            Expr::Var(s) => Poly::var(r, r.index_of(s).unwrap()),
            Expr::Neg(x) => -rec(x),
            Expr::Add(a, b) => rec(a) + rec(b),
            Expr::Sub(a, b) => rec(a) - rec(b),
            Expr::Mul(a, b) => rec(a) * rec(b),
            Expr::Div(a, b) => rec(a).scale(&rec(b).constant_term().inv()),
            Expr::Pow(a, k) => rec(a).pow(*k),
        }
    }

    #[test]
    fn heisenberg_real_fields() {
        let m = fixtures::manifold("heis2");
        let dil = field(&m, &["2*z1", "4*w1"]);
        let c = is_infinitesimal_automorphism(&m, &dil, 6).unwrap();
        assert!(c.tangent && c.bracket);
        let dz = field(&m, &["1", "0"]);
        let c = is_infinitesimal_automorphism(&m, &dz, 6).unwrap();
        assert!(!c.tangent && !c.bracket);
        let r = m.registry();
        let w = Poly::var(r, r.w(0));
        assert!(matches!(
            multiply_by_invariant(&m, &w, 1, &dil),
            Err(Error::NotRealOnManifold(_))
        ));
        let same = multiply_by_invariant(&m, &Poly::one(r), 5, &dil).unwrap();
        assert_eq!(same, dil);
    }

    #[test]
    fn prod3_real_direction() {
        let m = fixtures::manifold("prod3");
        let x = field(&m, &["0", "0", "w2"]);
        assert!(is_infinitesimal_automorphism(&m, &x, 6).unwrap().verdict());
        let inv = real_invariants(&m, 1, 4).unwrap();
        assert_eq!(inv.len(), 1);
        let r = m.registry();
        assert_eq!(inv[0].scale(&inv[0].linear_coeff(r.w(1)).inv()), Poly::var(r, r.w(1)));
    }

    #[test]
    fn heisenberg_jet_dimension() {
        let m = fixtures::manifold("heis2");
        let rep = hol_jet_basis(&m, 2, &[4, 6, 8]).unwrap();
        assert_eq!(rep.dims, vec![8, 8, 8]);
        assert!(rep.verified);
        // all eight are exactly tangent
        for f in &rep.basis {
            assert!(f.is_tangent(&m, None).unwrap());
        }
    }

    #[test]
    fn plane_jet_dimension_grows() {
        let m = fixtures::manifold("plane");
        let d1 = hol_jet_basis(&m, 1, &[]).unwrap().dimension();
        let d2 = hol_jet_basis(&m, 2, &[]).unwrap().dimension();
        assert!(d2 > d1);
    }

    #[test]
    fn flow_of_z_squared() {
        let m = fixtures::manifold("plane");
        let r = m.registry();
        let x = field(&m, &["z1^2", "0"]);
        let f = truncated_flow(&x, 4, &Qi::one()).unwrap();
        let z = Poly::var(r, 0);
        assert_eq!(f[0], &(&z + &z.pow(2)) + &(&z.pow(3) + &z.pow(4)));
        assert_eq!(f[1], Poly::var(r, r.w(0)));
        assert!(matches!(
            truncated_flow(&field(&m, &["z1", "0"]), 4, &Qi::one()),
            Err(Error::FlowUnavailable(_))
        ));
    }

    #[test]
    fn flow_group_law() {
        let m = fixtures::manifold("prod3");
        let x = field(&m, &["z1*w2^2", "2*w1*w2^2 + z1^2", "0"]);
        let (s, t) = (Qi::ratio(1, 3), Qi::ratio(-5, 2));
        let fs = truncated_flow(&x, 6, &s).unwrap();
        let ft = truncated_flow(&x, 6, &t).unwrap();
        let fst = truncated_flow(&x, 6, &(&s + &t)).unwrap();
        assert_eq!(compose_maps(&fs, &ft, 6).unwrap(), fst);
        let back = truncated_flow(&x, 6, &-&s).unwrap();
        let id: Vec<Poly> = (0..3).map(|j| Poly::var(m.registry(), j)).collect();
        assert_eq!(compose_maps(&back, &fs, 6).unwrap(), id);
    }
}
