//! Finite nondegeneracy at a point, the Levi number, and holomorphic
//! degeneracy witnesses.

use crate::error::{Error, Result};
use crate::fields::FieldJet;
use crate::linalg::{Sampler, SparseEchelon};
use crate::manifold::{CRBasis, GenericManifold, Point};
use crate::poly::{Monomial, Poly};
use crate::scalar::Qi;
use crate::system::{combine, MatchingSystem};

pub const DEFAULT_KMAX: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NondegeneracyReport {
    pub point: Point,
    /// Least `m >= 1` with `span_dims[m] == N`, if reached within `kmax`.
    pub k: Option<usize>,
    /// Dimension of the span of `V_{jα}(p, p̄)` over `|α| <= m`, `m = 0..=kmax`.
    pub span_dims: Vec<usize>,
    pub kmax: usize,
}

/// `∂ρ_j/∂Z_l` for all `j, l`, flattened `j`-major.
fn rho_gradients(m: &GenericManifold) -> Vec<Poly> {
    let r = m.registry();
    m.rho()
        .iter()
        .flat_map(|rho| (0..r.big_n()).map(move |l| rho.derivative(r.big_z(l))))
        .collect()
}

/// `V_{jα}(p, p̄) = L̃^α ρ_{j,Z}` with `L̃^α = L̃_1^{α_1} ⋯ L̃_n^{α_n}`.
pub fn v_vector(
    m: &GenericManifold,
    basis: &CRBasis,
    j: usize,
    alpha: &[usize],
    p: &Point,
    cap: usize,
) -> Result<Vec<Qi>> {
    let order: usize = alpha.iter().sum();
    if order > cap {
        return Err(Error::OrderCap { order, cap });
    }
    if alpha.len() != m.n() || j >= m.d() {
        return Err(Error::InvalidArgument(
            "multi-index or equation index out of range".into(),
        ));
    }
    let r = m.registry();
    let center = p.registry_point(r);
    let budget = order as u32;
    let shifted = basis.shifted(&center);
    let big_n = m.big_n();
    let mut f: Vec<Poly> = rho_gradients(m)[j * big_n..(j + 1) * big_n]
        .iter()
        .map(|g| g.shift(&center).truncate(budget))
        .collect();
    let mut applied = 0u32;
    for i in (0..m.n()).rev() {
        for _ in 0..alpha[i] {
            applied += 1;
            f = f.iter().map(|g| shifted.apply_trunc(i, g, budget - applied)).collect();
        }
    }
    Ok(f.iter().map(Poly::constant_term).collect())
}

pub fn k_nondegeneracy_at(m: &GenericManifold, p: &Point, kmax: usize) -> Result<NondegeneracyReport> {
    k_nondegeneracy_with(m, &m.cr_basis(), p, kmax)
}

/// As [`k_nondegeneracy_at`] with an explicitly given CR basis.
pub fn k_nondegeneracy_with(
    m: &GenericManifold,
    basis: &CRBasis,
    p: &Point,
    kmax: usize,
) -> Result<NondegeneracyReport> {
    if kmax == 0 {
        return Err(Error::InvalidArgument("kmax must be at least 1".into()));
    }
    let r = m.registry();
    let (n, d, big_n) = (m.n(), m.d(), m.big_n());
    let center = p.registry_point(r);
    for i in 0..n {
        // every field must have a nonvanishing ∂/∂χ_i component at the point
        let lead = &basis.field(i)[0];
        if lead.0 != r.chi(i) || lead.1.eval(&center).is_zero() {
            return Err(Error::InvalidArgument("CR basis is degenerate at the point".into()));
        }
    }
    let budget = kmax as u32;
    let shifted = basis.shifted(&center);
    let grads: Vec<Poly> = rho_gradients(m)
        .iter()
        .map(|g| g.shift(&center).truncate(budget))
        .collect();
    let mut echelon = SparseEchelon::new(big_n);
    let mut span_dims = Vec::with_capacity(kmax + 1);
    let insert = |echelon: &mut SparseEchelon, f: &[Poly]| {
        for j in 0..d {
            let v: Vec<(usize, Qi)> = (0..big_n).map(|l| (l, f[j * big_n + l].constant_term())).collect();
            echelon.insert(v);
        }
    };
    // level m holds (α, first nonzero index of α, L̃^α ρ_Z)
    let mut level: Vec<(Vec<usize>, usize, Vec<Poly>)> = vec![(vec![0; n], n, grads)];
    insert(&mut echelon, &level[0].2);
    span_dims.push(echelon.rank());
    let mut k = None;
    for order in 1..=kmax {
        if echelon.rank() == big_n {
            span_dims.push(big_n);
            continue;
        }
        let keep = budget - order as u32;
        let mut next = Vec::new();
        for (alpha, first, f) in &level {
            for i in 0..=(*first).min(n - 1) {
                let mut a = alpha.clone();
                a[i] += 1;
                let g: Vec<Poly> = f.iter().map(|x| shifted.apply_trunc(i, x, keep)).collect();
                insert(&mut echelon, &g);
                next.push((a, i, g));
            }
        }
        level = next;
        span_dims.push(echelon.rank());
        if k.is_none() && echelon.rank() == big_n {
            k = Some(order);
        }
    }
    Ok(NondegeneracyReport {
        point: p.clone(),
        k,
        span_dims,
        kmax,
    })
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub degree: u32,
    pub out_degree: u32,
    /// Basis of polynomial holomorphic fields tangent through `out_degree`.
    pub fields: Vec<FieldJet>,
    /// Per field: tangency holds identically, not just through `out_degree`.
    pub exact: Vec<bool>,
}

impl WitnessReport {
    pub fn has_exact_witness(&self) -> bool {
        self.exact.iter().any(|e| *e)
    }
}

/// Holomorphic fields `Σ c_j(Z) ∂/∂Z_j` with `deg c_j <= degree` such that
/// `Σ c_j ∂ρ_k/∂Z_j` vanishes on the complexification through `out_degree`
/// (default `degree + max deg ρ`).
pub fn degeneracy_witness(m: &GenericManifold, degree: u32, out_degree: Option<u32>) -> Result<WitnessReport> {
    let rho = m.rho();
    let max_rho = rho.iter().filter_map(Poly::total_degree).max().unwrap_or(1);
    let d_out = out_degree.unwrap_or(degree + max_rho);
    if let Some(t) = m.truncated_at() {
        if d_out > t {
            return Err(Error::InvalidArgument(format!(
                "output degree {d_out} exceeds the recentered graph's degree {t}"
            )));
        }
    }
    let c = m.complexify(d_out)?;
    let r = m.registry().clone();
    let big_n = m.big_n();
    let zvars: Vec<usize> = (0..big_n).map(|j| r.big_z(j)).collect();
    let monos = Monomial::all_upto(r.len(), &zvars, degree);
    let s: Vec<Vec<Poly>> = (0..big_n)
        .map(|j| {
            rho.iter()
                .map(|p| c.reduce(&p.derivative(r.big_z(j)), d_out))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut columns = Vec::with_capacity(big_n * monos.len());
    let mut unknowns = Vec::with_capacity(big_n * monos.len());
    for j in 0..big_n {
        for mono in &monos {
            columns.push(
                s[j].iter()
                    .map(|p| p.mul_monomial(mono, &Qi::one()).truncate(d_out))
                    .collect::<Vec<_>>(),
            );
            unknowns.push((j, mono.clone()));
        }
    }
    let system = MatchingSystem::from_columns(&columns, false);
    let mut fields = Vec::new();
    let mut exact = Vec::new();
    for v in system.kernel(d_out) {
        let mut coeffs = vec![Poly::zero(&r); big_n];
        for ((j, mono), x) in unknowns.iter().zip(&v) {
            if !x.is_zero() {
                coeffs[*j].add_term(mono.clone(), x);
            }
        }
        let field = FieldJet::new(coeffs)?;
        debug_assert!(combine(&columns, &v).iter().all(|p| p.truncate(d_out).is_zero()));
        // independent re-check along the graph parametrization
        let res = field.holomorphic_residuals(m, Some(d_out))?;
        if !res.iter().all(Poly::is_zero) {
            return Err(Error::InvalidArgument("witness failed re-verification".into()));
        }
        let full = if m.truncated_at().is_none() {
            field.holomorphic_residuals(m, None)?.iter().all(Poly::is_zero)
        } else {
            false
        };
        fields.push(field);
        exact.push(full);
    }
    Ok(WitnessReport {
        degree,
        out_degree: d_out,
        fields,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeviVerdict {
    Finite(usize),
    HolomorphicallyDegenerate,
    /// No sampled point reached a finite `k` within `kmax`.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct LeviConfig {
    pub kmax: usize,
    pub samples: usize,
    pub height: i64,
    pub seed: u64,
    pub witness_degree: u32,
}

impl Default for LeviConfig {
    fn default() -> Self {
        Self {
            kmax: DEFAULT_KMAX,
            samples: 5,
            height: 8,
            seed: 0,
            witness_degree: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LeviNumberReport {
    pub verdict: LeviVerdict,
    pub samples: Vec<NondegeneracyReport>,
    pub witness: Option<FieldJet>,
    pub config: LeviConfig,
}

/// Random point of `m` with bounded-height coordinates.
pub fn sample_point(m: &GenericManifold, sampler: &mut Sampler) -> Result<Point> {
    let z0: Vec<Qi> = (0..m.n()).map(|_| sampler.gaussian()).collect();
    let s0 = (0..m.d()).map(|_| sampler.rational().re).collect::<Vec<_>>();
    m.point(&z0, &s0)
}

pub fn levi_number(m: &GenericManifold, cfg: &LeviConfig) -> Result<LeviNumberReport> {
    let w = degeneracy_witness(m, cfg.witness_degree, None)?;
    if let Some(pos) = w.exact.iter().position(|e| *e) {
        return Ok(LeviNumberReport {
            verdict: LeviVerdict::HolomorphicallyDegenerate,
            samples: Vec::new(),
            witness: Some(w.fields[pos].clone()),
            config: cfg.clone(),
        });
    }
    let mut sampler = Sampler::new(cfg.seed, cfg.height);
    let basis = m.cr_basis();
    let mut samples = Vec::with_capacity(cfg.samples);
    while samples.len() < cfg.samples {
        let p = sample_point(m, &mut sampler)?;
        let scale_ok = !basis.scale().eval(&p.registry_point(m.registry())).is_zero();
        if !scale_ok {
            continue;
        }
        samples.push(k_nondegeneracy_with(m, &basis, &p, cfg.kmax)?);
    }
    let verdict = samples
        .iter()
        .filter_map(|s| s.k)
        .min()
        .map_or(LeviVerdict::Inconclusive, LeviVerdict::Finite);
    Ok(LeviNumberReport {
        verdict,
        samples,
        witness: None,
        config: cfg.clone(),
    })
}
