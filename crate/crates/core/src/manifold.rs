//! Generic submanifolds in graph form `Im w = φ(z, z̄, Re w)`, their
//! complexification, CR vector fields and recentering at a point.
//!
//! Inside `φ` the conjugates `z̄` are the registry's `chi` variables and
//! `Re w` is `s`.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::poly::Poly;
use crate::registry::{same_registry, Registry, VarKind};
use crate::scalar::{Qi, Q};
use crate::series::{implicit_series_solve, Series};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericManifold {
    label: String,
    reg: Arc<Registry>,
    phi: Vec<Poly>,
    /// `Some(D)` when `phi` is only known through degree `D` (recentered
    /// manifolds whose graph had to be re-solved).
    truncated_at: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub label: String,
    pub n: usize,
    pub d: usize,
    pub max_degree: u32,
    pub truncated_at: Option<u32>,
}

fn inv_two_i() -> Qi {
    Qi::from_int(2).mul_i().inv()
}

impl GenericManifold {
    /// Builds and validates a manifold whose `phi` live in `Registry::base(n, d)`.
    pub fn new(label: impl Into<String>, phi: Vec<Poly>) -> Result<Self> {
        let reg = phi
            .first()
            .map(|p| p.registry().clone())
            .ok_or_else(|| Error::InvalidManifold("codimension must be at least 1".into()))?;
        let m = Self {
            label: label.into(),
            reg,
            phi,
            truncated_at: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.reg.n()
    }

    pub fn d(&self) -> usize {
        self.reg.d()
    }

    pub fn big_n(&self) -> usize {
        self.reg.big_n()
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.reg
    }

    pub fn phi(&self) -> &[Poly] {
        &self.phi
    }

    pub fn truncated_at(&self) -> Option<u32> {
        self.truncated_at
    }

    /// Largest total degree among the `φ_j`.
    pub fn max_degree(&self) -> u32 {
        self.phi.iter().filter_map(Poly::total_degree).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let (n, d) = (self.reg.n(), self.reg.d());
        if n == 0 || d == 0 {
            return Err(Error::InvalidManifold(format!(
                "need n >= 1 and d >= 1, got n = {n}, d = {d}"
            )));
        }
        if self.phi.len() != d || self.reg.num_params() != 0 {
            return Err(Error::InvalidManifold(format!(
                "expected {d} defining functions over the base registry"
            )));
        }
        for (j, p) in self.phi.iter().enumerate() {
            if !same_registry(p.registry(), &self.reg) {
                return Err(Error::RegistryMismatch);
            }
            for v in p.vars() {
                let kind = self.reg.var(v).kind;
                if !matches!(kind, VarKind::Z | VarKind::Chi | VarKind::S) {
                    return Err(Error::InvalidManifold(format!(
                        "phi{} uses {}; only z, zb and s may appear",
                        j + 1,
                        self.reg.name(v)
                    )));
                }
            }
            if p.bar()? != *p {
                return Err(Error::InvalidManifold(format!("phi{} is not real-valued", j + 1)));
            }
            if !p.constant_term().is_zero() {
                return Err(Error::InvalidManifold(format!("phi{} has a constant term", j + 1)));
            }
            if (0..self.reg.len()).any(|v| !p.linear_coeff(v).is_zero()) {
                return Err(Error::InvalidManifold(format!("phi{} has a linear part", j + 1)));
            }
        }
        Ok(ValidationReport {
            label: self.label.clone(),
            n,
            d,
            max_degree: self.max_degree(),
            truncated_at: self.truncated_at,
        })
    }

    /// `f(z, s + iφ, χ, s - iφ)`: the pullback of `f` along the real
    /// parametrization `(z, χ, s)` of the complexification. `f` vanishes on the
    /// complexification exactly when this is zero, and to order `D + 1` at the
    /// origin exactly when it is zero through degree `D`.
    pub fn graph_residual(&self, f: &Poly, degree: Option<u32>) -> Result<Poly> {
        let target = f.registry().clone();
        if !self.reg.is_prefix_of(&target) {
            return Err(Error::RegistryMismatch);
        }
        let mut rules = Vec::with_capacity(2 * self.d());
        for k in 0..self.d() {
            let s = Poly::var(&target, self.reg.s(k));
            let iphi = self.phi[k].lift(&target).scale(&Qi::i());
            rules.push((self.reg.w(k), &s + &iphi));
            rules.push((self.reg.tau(k), &s - &iphi));
        }
        match degree {
            Some(dd) => f.substitute_trunc(&rules, dd),
            None => f.substitute(&rules),
        }
    }

    pub fn cr_basis(&self) -> CRBasis {
        CRBasis::from_rho(&self.reg, &self.rho())
    }

    /// Complexified defining functions
    /// `ρ_j = (w_j - τ_j)/2i - φ_j(z, χ, (w + τ)/2)`.
    pub fn rho(&self) -> Vec<Poly> {
        let r = &self.reg;
        let half = Qi::ratio(1, 2);
        let s_rules: Vec<(usize, Poly)> = (0..self.d())
            .map(|k| {
                let wt = Poly::var(r, r.w(k)) + Poly::var(r, r.tau(k));
                (r.s(k), wt.scale(&half))
            })
            .collect();
        (0..self.d())
            .map(|k| {
                let lin = (Poly::var(r, r.w(k)) - Poly::var(r, r.tau(k))).scale(&inv_two_i());
                let phi = self.phi[k].substitute(&s_rules).expect("same registry");
                lin - phi
            })
            .collect()
    }

    pub fn complexify(&self, degree: u32) -> Result<ComplexifiedManifold> {
        let rho = self.rho();
        for p in &rho {
            if p.bar()? != *p {
                return Err(Error::InvalidManifold("complexification is not real".into()));
            }
        }
        let taus: Vec<usize> = (0..self.d()).map(|k| self.reg.tau(k)).collect();
        let qbar = implicit_series_solve(&rho, &taus, degree)?;
        let q = qbar
            .iter()
            .map(|s| Ok(Series::new(s.poly().bar()?, degree)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComplexifiedManifold {
            manifold: self.clone(),
            rho,
            qbar,
            q,
            degree,
        })
    }

    pub fn point(&self, z0: &[Qi], s0: &[Q]) -> Result<Point> {
        Ok(Point {
            z0: z0.to_vec(),
            s0: s0.to_vec(),
            w0: self.point_over(z0, s0)?,
        })
    }

    /// `w0 = s0 + iφ(z0, z̄0, s0)`.
    pub fn point_over(&self, z0: &[Qi], s0: &[Q]) -> Result<Vec<Qi>> {
        if z0.len() != self.n() || s0.len() != self.d() {
            return Err(Error::InvalidArgument(format!(
                "point needs {} z-coordinates and {} s-coordinates",
                self.n(),
                self.d()
            )));
        }
        let mut pt = vec![Qi::zero(); self.reg.len()];
        for (i, z) in z0.iter().enumerate() {
            pt[self.reg.z(i)] = z.clone();
            pt[self.reg.chi(i)] = z.conj();
        }
        for (k, s) in s0.iter().enumerate() {
            pt[self.reg.s(k)] = Qi::from_q(s.clone());
        }
        Ok((0..self.d())
            .map(|k| Qi::from_q(s0[k].clone()) + self.phi[k].eval(&pt).mul_i())
            .collect())
    }

    /// Marks the point over `(z0, s0)` and rewrites the germ there in graph
    /// form centered at the origin. `degree` bounds the re-solved graph when
    /// the restoration is not polynomial.
    pub fn mark_point(&self, z0: &[Qi], s0: &[Q], degree: u32) -> Result<MarkedPoint> {
        let w0 = self.point_over(z0, s0)?;
        let at_origin = z0.iter().all(Qi::is_zero) && s0.iter().all(|s| s.is_zero());
        let (recentered, to_original) = if at_origin {
            let r = &self.reg;
            (
                self.clone(),
                (0..self.big_n()).map(|j| Poly::var(r, r.big_z(j))).collect(),
            )
        } else {
            self.recenter(z0, s0, &w0, degree)?
        };
        recentered.validate()?;
        Ok(MarkedPoint {
            point: Point {
                z0: z0.to_vec(),
                s0: s0.to_vec(),
                w0,
            },
            recentered,
            to_original,
        })
    }

    fn recenter(&self, z0: &[Qi], s0: &[Q], w0: &[Qi], degree: u32) -> Result<(GenericManifold, Vec<Poly>)> {
        let r = &self.reg;
        let (n, d) = (self.n(), self.d());
        let mut center = vec![Qi::zero(); r.len()];
        for i in 0..n {
            center[r.z(i)] = z0[i].clone();
            center[r.chi(i)] = z0[i].conj();
        }
        for k in 0..d {
            center[r.s(k)] = Qi::from_q(s0[k].clone());
        }
        // ψ = φ(p + ·) - φ(p), split into linear part 2 Re(a z) + C s and the rest
        let mut a = vec![vec![Qi::zero(); n]; d];
        let mut c = ExactMatrix::zeros(d, d);
        let mut hot = Vec::with_capacity(d);
        for k in 0..d {
            let psi = self.phi[k].shift(&center);
            let mut h = psi.clone();
            h.add_term(crate::poly::Monomial::one(r.len()), &-psi.constant_term());
            for i in 0..n {
                a[k][i] = psi.linear_coeff(r.z(i));
                h = h - Poly::var(r, r.z(i)).scale(&a[k][i]);
                h = h - Poly::var(r, r.chi(i)).scale(&psi.linear_coeff(r.chi(i)));
            }
            for l in 0..d {
                let x = psi.linear_coeff(r.s(l));
                debug_assert!(x.is_real());
                c.set(k, l, -x.mul_i());
                h = h - Poly::var(r, r.s(l)).scale(&x);
            }
            hot.push(h);
        }
        // new coordinates w'' = (I - iC) w' - 2i a z'; express s' through
        // (z', z̄', s'', u'') with u'' = Im w'' as real unknowns
        for k in 0..d {
            let x = c.get(k, k) + &Qi::one();
            c.set(k, k, x);
        }
        let m_inv = c.inverse().ok_or(Error::NonInvertibleLinearPart)?;
        let two_i = Qi::from_int(2).mul_i();
        let mut to_original: Vec<Poly> = (0..n)
            .map(|i| Poly::var(r, r.z(i)) + Poly::constant(r, z0[i].clone()))
            .collect();
        for k in 0..d {
            let mut wk = Poly::constant(r, w0[k].clone());
            for l in 0..d {
                let mut inner = Poly::var(r, r.w(l));
                for i in 0..n {
                    inner = inner + Poly::var(r, r.z(i)).scale(&(&two_i * &a[l][i]));
                }
                wk = wk + inner.scale(m_inv.get(k, l));
            }
            to_original.push(wk);
        }
        let u_names: Vec<String> = (0..d).map(|k| format!("__u{}", k + 1)).collect();
        let e = r.with_params(&u_names, true);
        let mut s_rules = Vec::with_capacity(d);
        for k in 0..d {
            let mut ek = Poly::zero(&e);
            for l in 0..d {
                let mut inner = Poly::var(&e, e.s(l)) + Poly::var(&e, e.param(l)).scale(&Qi::i());
                for i in 0..n {
                    inner = inner + Poly::var(&e, e.z(i)).scale(&(&two_i * &a[l][i]));
                }
                ek = ek + inner.scale(m_inv.get(k, l));
            }
            let re = (&ek + &ek.bar()?).scale(&Qi::ratio(1, 2));
            s_rules.push((e.s(k), re));
        }
        let g: Vec<Poly> = hot
            .iter()
            .map(|h| h.lift(&e).substitute(&s_rules))
            .collect::<Result<_>>()?;
        let uses_u = g.iter().any(|p| p.vars().iter().any(|v| *v >= e.param_offset()));
        let label = format!("{}@recentered", self.label);
        if !uses_u {
            let phi = g.iter().map(|p| p.restrict(r)).collect::<Result<Vec<_>>>()?;
            let m = GenericManifold {
                label,
                reg: r.clone(),
                phi,
                truncated_at: None,
            };
            return Ok((m, to_original));
        }
        // u = G(z, z̄, s, u): fixed point, one degree per pass
        let mut u: Vec<Poly> = vec![Poly::zero(&e); d];
        for _ in 0..=degree + 1 {
            let rules: Vec<(usize, Poly)> = (0..d).map(|k| (e.param(k), u[k].clone())).collect();
            let next: Vec<Poly> = g
                .iter()
                .map(|p| p.substitute_trunc(&rules, degree))
                .collect::<Result<_>>()?;
            if next == u {
                let phi = u.iter().map(|p| p.restrict(r)).collect::<Result<Vec<_>>>()?;
                let m = GenericManifold {
                    label,
                    reg: r.clone(),
                    phi,
                    truncated_at: Some(degree),
                };
                return Ok((m, to_original));
            }
            u = next;
        }
        Err(Error::NoConvergence(degree as usize + 2))
    }
}

/// A point `(z0, w0)` of a manifold, `w0 = s0 + iφ(z0, z̄0, s0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub z0: Vec<Qi>,
    pub s0: Vec<Q>,
    pub w0: Vec<Qi>,
}

#[derive(Clone, Debug)]
pub struct MarkedPoint {
    pub point: Point,
    /// The same germ in coordinates vanishing at the point.
    pub recentered: GenericManifold,
    /// The affine holomorphic change of coordinates from the recentered
    /// coordinates back to the original ones, one polynomial per `Z_j`.
    pub to_original: Vec<Poly>,
}

impl Point {
    /// `(z0, w0)`.
    pub fn coordinates(&self) -> Vec<Qi> {
        self.z0.iter().chain(&self.w0).cloned().collect()
    }

    pub fn is_origin(&self) -> bool {
        self.coordinates().iter().all(Qi::is_zero)
    }

    /// Registry point `(p, p̄, s0, 0...)` for evaluating functions on the
    /// complexification at `(p, p̄)`.
    pub fn registry_point(&self, reg: &Registry) -> Vec<Qi> {
        let mut pt = vec![Qi::zero(); reg.len()];
        for (j, x) in self.coordinates().into_iter().enumerate() {
            pt[reg.zeta(j)] = x.conj();
            pt[reg.big_z(j)] = x;
        }
        for (k, s) in self.s0.iter().enumerate() {
            pt[reg.s(k)] = Qi::from_q(s.clone());
        }
        pt
    }
}

#[derive(Clone, Debug)]
pub struct ComplexifiedManifold {
    manifold: GenericManifold,
    rho: Vec<Poly>,
    qbar: Vec<Series>,
    q: Vec<Series>,
    degree: u32,
}

impl ComplexifiedManifold {
    pub fn manifold(&self) -> &GenericManifold {
        &self.manifold
    }

    pub fn registry(&self) -> &Arc<Registry> {
        self.manifold.registry()
    }

    pub fn rho(&self) -> &[Poly] {
        &self.rho
    }

    /// `τ = Q̄(χ, z, w)` on the complexification.
    pub fn qbar(&self) -> &[Series] {
        &self.qbar
    }

    /// `w = Q(z, χ, τ)`, the conjugate solved form.
    pub fn q(&self) -> &[Series] {
        &self.q
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Degree through which reductions are exact, accounting for a
    /// truncated graph.
    pub fn exact_through(&self) -> u32 {
        self.manifold.truncated_at.map_or(self.degree, |t| t.min(self.degree))
    }

    pub fn max_rho_degree(&self) -> u32 {
        self.rho.iter().filter_map(Poly::total_degree).max().unwrap_or(1)
    }

    /// Reduces `f` modulo the complexification by `τ := Q̄`, keeping terms of
    /// degree `<= degree`.
    pub fn reduce(&self, f: &Poly, degree: u32) -> Result<Poly> {
        if degree > self.degree {
            return Err(Error::InvalidArgument(format!(
                "reduction degree {degree} exceeds solved-form degree {}",
                self.degree
            )));
        }
        let target = f.registry();
        let rules: Vec<(usize, Poly)> = self
            .qbar
            .iter()
            .enumerate()
            .map(|(k, s)| (self.registry().tau(k), s.poly().lift(target)))
            .collect();
        f.substitute_trunc(&rules, degree)
    }

    /// `ρ_j(z, w, χ, Q̄)` through the solved-form degree; zero when the
    /// solve is correct.
    pub fn solved_residual(&self) -> Result<Vec<Poly>> {
        self.rho.iter().map(|p| self.reduce(p, self.degree)).collect()
    }

    pub fn cr_basis(&self) -> CRBasis {
        CRBasis::from_rho(self.registry(), &self.rho)
    }
}

impl CRBasis {
    pub fn from_rho(reg: &Arc<Registry>, rho: &[Poly]) -> CRBasis {
        let r = reg.clone();
        let (n, d) = (r.n(), r.d());
        let rho_tau: Vec<Vec<Poly>> = rho
            .iter()
            .map(|p| (0..d).map(|k| p.derivative(r.tau(k))).collect())
            .collect();
        let det = det_poly(&rho_tau);
        let det0 = det.constant_term();
        assert!(!det0.is_zero(), "rho_tau singular at the origin");
        let inv0 = det0.inv();
        let adj = adjugate(&rho_tau);
        let mut fields = Vec::with_capacity(n);
        for i in 0..n {
            let scale = det.scale(&inv0);
            let mut f = vec![(r.chi(i), scale)];
            for k in 0..d {
                let mut b = Poly::zero(&r);
                for (l, p) in rho.iter().enumerate() {
                    b = b + &adj[k][l] * &p.derivative(r.chi(i));
                }
                f.push((r.tau(k), -b.scale(&inv0)));
            }
            fields.push(f);
        }
        CRBasis {
            reg: r,
            scale: det.scale(&inv0),
            fields,
        }
    }
}

fn minor(m: &[Vec<Poly>], row: usize, col: usize) -> Vec<Vec<Poly>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion; the matrices here are `d × d` with
/// small `d`.
pub fn det_poly(m: &[Vec<Poly>]) -> Poly {
    match m.len() {
        0 => panic!("determinant of an empty matrix"),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Poly::zero(m[0][0].registry());
            for j in 0..m.len() {
                if m[0][j].is_zero() {
                    continue;
                }
                let t = &m[0][j] * &det_poly(&minor(m, 0, j));
                acc = if j % 2 == 0 { acc + t } else { acc - t };
            }
            acc
        }
    }
}

fn adjugate(m: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let d = m.len();
    let reg = m[0][0].registry();
    if d == 1 {
        return vec![vec![Poly::one(reg)]];
    }
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let c = det_poly(&minor(m, j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        -c
                    }
                })
                .collect()
        })
        .collect()
}

/// Denominator-cleared CR vector fields
/// `L̃_i = scale·∂/∂χ_i + Σ_k b_ik ∂/∂τ_k` on the complexification, with
/// `scale = det ρ_τ / det ρ_τ(0)`.
#[derive(Clone, Debug)]
pub struct CRBasis {
    reg: Arc<Registry>,
    scale: Poly,
    fields: Vec<Vec<(usize, Poly)>>,
}

impl CRBasis {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn scale(&self) -> &Poly {
        &self.scale
    }

    /// `(variable, coefficient)` pairs of `L̃_i`.
    pub fn field(&self, i: usize) -> &[(usize, Poly)] {
        &self.fields[i]
    }

    /// The basis with `L̃_i` multiplied by `g`.
    pub fn rescaled(&self, i: usize, g: &Poly) -> CRBasis {
        let mut out = self.clone();
        for (_, c) in &mut out.fields[i] {
            *c = &*c * g;
        }
        out
    }

    /// The basis with every coefficient re-expanded around `center`.
    pub fn shifted(&self, center: &[Qi]) -> CRBasis {
        CRBasis {
            reg: self.reg.clone(),
            scale: self.scale.shift(center),
            fields: self
                .fields
                .iter()
                .map(|f| f.iter().map(|(v, c)| (*v, c.shift(center))).collect())
                .collect(),
        }
    }

    pub fn apply(&self, i: usize, f: &Poly) -> Poly {
        self.apply_trunc(i, f, u32::MAX)
    }

    /// `L̃_i f` keeping terms of degree `<= max_deg`.
    pub fn apply_trunc(&self, i: usize, f: &Poly, max_deg: u32) -> Poly {
        let target = f.registry();
        let mut out = Poly::zero(target);
        for (v, c) in &self.fields[i] {
            let df = f.derivative(*v);
            if df.is_zero() {
                continue;
            }
            let c = c.lift(target);
            out = out
                + if max_deg == u32::MAX {
                    &c * &df
                } else {
                    c.mul_trunc(&df, max_deg)
                };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn heis2() -> GenericManifold {
        let r = Registry::base(1, 1);
        GenericManifold::new("heis2", vec![Poly::var(&r, r.z(0)) * Poly::var(&r, r.chi(0))]).unwrap()
    }

    fn plane() -> GenericManifold {
        let r = Registry::base(1, 1);
        GenericManifold::new("plane", vec![Poly::zero(&r)]).unwrap()
    }

    fn st0() -> GenericManifold {
        let r = Registry::base(1, 1);
        let (z, c, s) = (Poly::var(&r, 0), Poly::var(&r, r.chi(0)), Poly::var(&r, r.s(0)));
        let phi = z.pow(4) * c.pow(10) + z.pow(10) * c.pow(4) + s * (&z * &c).pow(4);
        GenericManifold::new("st0", vec![phi]).unwrap()
    }

    #[test]
    fn validation() {
        let m = heis2();
        let rep = m.validate().unwrap();
        assert_eq!((rep.n, rep.d), (1, 1));
        assert_eq!(st0().validate().unwrap().max_degree, 14);
        let r = Registry::base(1, 1);
        let zc = Poly::var(&r, 0) * Poly::var(&r, r.chi(0));
        assert!(matches!(
            GenericManifold::new("bad", vec![zc.scale(&Qi::i())]),
            Err(Error::InvalidManifold(_))
        ));
        let lin = Poly::var(&r, 0) + Poly::var(&r, r.chi(0));
        assert!(GenericManifold::new("lin", vec![lin]).is_err());
        let uses_w = Poly::var(&r, r.w(0)).pow(2);
        assert!(GenericManifold::new("w", vec![uses_w]).is_err());
    }

    #[test]
    fn heisenberg_complexification() {
        let m = heis2();
        let c = m.complexify(6).unwrap();
        let r = m.registry();
        let (z, w, chi, tau) = (
            Poly::var(r, r.z(0)),
            Poly::var(r, r.w(0)),
            Poly::var(r, r.chi(0)),
            Poly::var(r, r.tau(0)),
        );
        let expect = (&w - &tau).scale(&inv_two_i()) - &z * &chi;
        assert_eq!(c.rho()[0], expect);
        let two_i = Qi::from_int(2).mul_i();
        assert_eq!(c.qbar()[0].poly(), &(&w - &(&z * &chi).scale(&two_i)));
        assert_eq!(c.q()[0].poly(), &(&tau + &(&z * &chi).scale(&two_i)));
        // L̃ = ∂χ - 2iz ∂τ
        let b = c.cr_basis();
        assert_eq!(b.scale(), &Poly::one(r));
        assert_eq!(b.field(0)[1].1, -z.scale(&two_i));
        assert!(b.apply(0, &c.rho()[0]).is_zero());
    }

    #[test]
    fn plane_complexification() {
        let m = plane();
        let c = m.complexify(3).unwrap();
        let r = m.registry();
        let expect = (Poly::var(r, r.w(0)) - Poly::var(r, r.tau(0))).scale(&inv_two_i());
        assert_eq!(c.rho()[0], expect);
        let b = c.cr_basis();
        assert!(b.field(0)[1].1.is_zero());
    }

    #[test]
    fn heisenberg_recentered_at_one() {
        let m = heis2();
        let p = m.mark_point(&[Qi::one()], &[q(0, 1)], 8).unwrap();
        assert_eq!(p.point.w0, vec![Qi::i()]);
        let r = m.registry();
        assert_eq!(p.recentered.phi()[0], Poly::var(r, 0) * Poly::var(r, r.chi(0)));
        assert_eq!(p.recentered.truncated_at(), None);
        let rho = &m.rho()[0];
        assert!(rho.eval(&p.point.registry_point(r)).is_zero());
    }

    #[test]
    fn st0_point_and_recentering() {
        let m = st0();
        let p = m.mark_point(&[Qi::one()], &[q(0, 1)], 6).unwrap();
        assert_eq!(p.point.w0, vec![Qi::from_int(2).mul_i()]);
        assert_eq!(p.recentered.truncated_at(), Some(6));
        let rho = &m.rho()[0];
        assert!(rho.eval(&p.point.registry_point(m.registry())).is_zero());
    }

    /// The original defining functions pulled back along the affine change
    /// vanish on the recentered complexification through the recorded degree.
    fn check_same_germ(m: &GenericManifold, p: &MarkedPoint, degree: u32) {
        let r = m.registry();
        let mut rules = Vec::new();
        for (j, f) in p.to_original.iter().enumerate() {
            rules.push((r.big_z(j), f.clone()));
            rules.push((r.zeta(j), f.bar().unwrap()));
        }
        for rho in m.rho() {
            let pulled = rho.substitute(&rules).unwrap();
            let res = p.recentered.graph_residual(&pulled, Some(degree)).unwrap();
            assert!(res.is_zero(), "residual {res}");
        }
    }

    #[test]
    fn recentered_germs_match() {
        let m = st0();
        let p = m.mark_point(&[Qi::complex(1, 2, 1, 3)], &[q(-2, 3)], 7).unwrap();
        check_same_germ(&m, &p, 7);
        let h = heis2();
        let p = h.mark_point(&[Qi::complex(2, 1, -1, 1)], &[q(5, 1)], 4).unwrap();
        check_same_germ(&h, &p, 20);
    }

    #[test]
    fn origin_recentering_is_identity() {
        let m = st0();
        let p = m.mark_point(&[Qi::zero()], &[q(0, 1)], 3).unwrap();
        assert_eq!(p.recentered, m);
    }
}
