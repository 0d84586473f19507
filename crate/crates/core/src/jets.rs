//! Self-map jets: degree-by-degree determination and explicit
//! non-uniqueness pairs.
//!
//! All maps live on the recentered germ. With the lower jet `H^{<k}` fixed,
//! the unknowns are the coefficients of degrees `k..=2k+1` and the
//! equations are `ρ(H, H̄)`, linearized at `H^{<k}`, modulo the
//! complexification through degree `2k + 1`. Through degree `2k - 1` this is
//! the exact system; the longer window is needed because `z`-components of
//! degree `k` first appear at degree `k + 1` and weighted-homogeneous
//! pieces starting at degree `k` reach degree `2k + 1`. The freedom at
//! degree `k` is the dimension of the projection of the solution space onto
//! the degree-`k` coefficients.

use std::sync::Arc;

use rayon::prelude::*;

use crate::automorphisms::{hol_jet_basis, real_invariants, truncated_flow};
use crate::error::{Error, Result};
use crate::fields::FieldJet;
use crate::linalg::{Sampler, SparseEchelon};
use crate::manifold::{ComplexifiedManifold, GenericManifold, MarkedPoint};
use crate::nondegeneracy::{degeneracy_witness, k_nondegeneracy_at, levi_number, LeviConfig, LeviVerdict};
use crate::poly::{Monomial, Poly};
use crate::registry::Registry;
use crate::scalar::Qi;
use crate::segre::{default_degree, segre_chain};
use crate::system::MatchingSystem;

pub const DEFAULT_KMAX: u32 = 6;

/// `ρ'(H(Z), H̄(ζ))`, `target` defining `ρ'`.
pub fn pullback_rho(target: &GenericManifold, h: &[Poly]) -> Result<Vec<Poly>> {
    let r = target.registry();
    let mut rules = Vec::with_capacity(2 * h.len());
    for (j, hj) in h.iter().enumerate() {
        rules.push((r.big_z(j), hj.clone()));
        rules.push((r.zeta(j), hj.bar()?));
    }
    target.rho().iter().map(|p| p.substitute(&rules)).collect()
}

/// True when `H` maps the source germ into `target` through `degree`,
/// checked along the real parametrization of the source.
pub fn maps_into(source: &GenericManifold, target: &GenericManifold, h: &[Poly], degree: u32) -> Result<bool> {
    for p in pullback_rho(target, h)? {
        if !source.graph_residual(&p, Some(degree))?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The affine system for the window `k..=k + window`: real unknowns
/// ordered by degree, then component, then monomial, as `(Re, Im)` pairs.
#[derive(Clone, Debug)]
pub struct SelfMapSystem {
    pub degree: u32,
    pub window: u32,
    /// `(component, monomial)` per complex unknown.
    pub unknowns: Vec<(usize, Monomial)>,
    /// Number of leading real unknowns of degree exactly `degree`.
    pub leading: usize,
    /// Real columns followed by the constant column `ρ'(H^{<k}, H̄^{<k})`.
    pub columns: Vec<Vec<Poly>>,
}

impl SelfMapSystem {
    pub fn real_unknowns(&self) -> usize {
        self.columns.len() - 1
    }

    fn system(&self, reverse: bool) -> (MatchingSystem, Vec<usize>) {
        let n = self.columns.len();
        let order: Vec<usize> = if reverse {
            (0..n - 1).rev().chain([n - 1]).collect()
        } else {
            (0..n).collect()
        };
        let cols: Vec<Vec<Poly>> = order.iter().map(|&c| self.columns[c].clone()).collect();
        (MatchingSystem::from_columns(&cols, true), order)
    }
}

/// Linearization of `ρ'(H^{<k} + U, bar(H^{<k} + U)) ≡ 0` modulo the source
/// complexification through degree `k + window`, where `U` collects the
/// coefficients of degrees `k..=k + window`; exact when `window < k`.
pub fn self_map_constraints(
    source: &ComplexifiedManifold,
    target: &GenericManifold,
    lower: &[Poly],
    k: u32,
    window: u32,
) -> Result<SelfMapSystem> {
    let r = source.registry().clone();
    let big_n = r.big_n();
    check_linear_part(&r, lower)?;
    let top = k + window;
    let tr = target.registry();
    let mut rules = Vec::with_capacity(2 * big_n);
    for (j, hj) in lower.iter().enumerate() {
        rules.push((tr.big_z(j), hj.clone()));
        rules.push((tr.zeta(j), hj.bar()?));
    }
    let rho = target.rho();
    let at = |p: &Poly| -> Result<Poly> { source.reduce(&p.substitute_trunc(&rules, top)?, top) };
    let constant: Vec<Poly> = rho.iter().map(at).collect::<Result<_>>()?;
    let s: Vec<Vec<Poly>> = (0..big_n)
        .map(|j| rho.iter().map(|p| at(&p.derivative(tr.big_z(j)))).collect())
        .collect::<Result<_>>()?;
    let t: Vec<Vec<Poly>> = (0..big_n)
        .map(|j| rho.iter().map(|p| at(&p.derivative(tr.zeta(j)))).collect())
        .collect::<Result<_>>()?;
    let zvars: Vec<usize> = (0..big_n).map(|j| r.big_z(j)).collect();
    let mut unknowns = Vec::new();
    let mut leading = 0;
    for deg in k..=top {
        for j in 0..big_n {
            for m in Monomial::all_upto(r.len(), &zvars, deg)
                .into_iter()
                .filter(|m| m.deg() == deg)
            {
                unknowns.push((j, m));
            }
        }
        if deg == k {
            leading = 2 * unknowns.len();
        }
    }
    let cols: Vec<[Vec<Poly>; 2]> = unknowns
        .par_iter()
        .map(|(j, m)| -> Result<[Vec<Poly>; 2]> {
            let mz = Poly::monomial(&r, m.clone(), Qi::one());
            let mzeta = source.reduce(&mz.bar()?, top)?;
            let mut x = Vec::with_capacity(rho.len());
            let mut y = Vec::with_capacity(rho.len());
            for e in 0..rho.len() {
                let a = s[*j][e].mul_monomial(m, &Qi::one()).truncate(top);
                let b = mzeta.mul_trunc(&t[*j][e], top);
                x.push(&a + &b);
                y.push((&a - &b).scale(&Qi::i()));
            }
            Ok([x, y])
        })
        .collect::<Result<_>>()?;
    let mut columns: Vec<Vec<Poly>> = cols.into_iter().flatten().collect();
    columns.push(constant);
    Ok(SelfMapSystem {
        degree: k,
        window,
        unknowns,
        leading,
        columns,
    })
}

fn check_linear_part(r: &Arc<Registry>, h: &[Poly]) -> Result<()> {
    let big_n = r.big_n();
    let rows: Vec<Vec<Qi>> = (0..big_n)
        .map(|j| (0..big_n).map(|l| h[j].linear_coeff(r.big_z(l))).collect())
        .collect();
    if crate::linalg::ExactMatrix::from_rows(rows).rank() < big_n {
        return Err(Error::NonInvertibleLinearPart);
    }
    Ok(())
}

/// Freedom at the system's leading degree and one solution, or
/// `Inconsistent` when no extension of the lower jet exists.
pub fn solve_degree(sys: &SelfMapSystem, reverse: bool) -> Result<(usize, Vec<Qi>)> {
    let (ms, order) = sys.system(reverse);
    let top = sys.degree + sys.window;
    let kernel = ms.kernel(top);
    let ncols = sys.columns.len();
    let constant_pos = ncols - 1;
    // back to the original column order
    let kernel: Vec<Vec<Qi>> = kernel
        .into_iter()
        .map(|v| {
            let mut out = vec![Qi::zero(); ncols];
            for (pos, x) in v.into_iter().enumerate() {
                out[order[pos]] = x;
            }
            out
        })
        .collect();
    let particular = kernel
        .iter()
        .find(|v| !v[constant_pos].is_zero())
        .ok_or(Error::Inconsistent(sys.degree))?;
    let scale = particular[constant_pos].inv();
    let solution: Vec<Qi> = particular[..constant_pos].iter().map(|x| x * &scale).collect();
    let mut proj = SparseEchelon::new(sys.leading);
    for v in kernel.iter().filter(|v| v[constant_pos].is_zero()) {
        proj.insert(
            v[..sys.leading]
                .iter()
                .cloned()
                .enumerate()
                .filter(|(_, x)| !x.is_zero()),
        );
    }
    Ok((proj.rank(), solution))
}

/// Degree-`k` part of the map encoded by `solution`.
fn leading_part(r: &Arc<Registry>, sys: &SelfMapSystem, solution: &[Qi]) -> Vec<Poly> {
    let mut out = vec![Poly::zero(r); r.big_n()];
    for (u, (j, m)) in sys.unknowns.iter().enumerate() {
        if 2 * u >= sys.leading {
            break;
        }
        let c = &solution[2 * u] + &solution[2 * u + 1].mul_i();
        if !c.is_zero() {
            out[*j].add_term(m.clone(), &c);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct DeterminationReport {
    pub levi: Option<usize>,
    pub k_at_point: Option<usize>,
    pub minimal: Option<bool>,
    pub prerequisites_ok: bool,
    pub k_norm: u32,
    pub k_max: u32,
    /// `(k, freedom)` for `k = k_norm + 1 ..= k_max`.
    pub freedoms: Vec<(u32, usize)>,
    pub unique: bool,
    /// The determined jet through `k_max` (identity when unique).
    pub jet: Vec<Poly>,
    /// `jet` maps the germ into itself through `k_max`, checked independently.
    pub verified: bool,
}

#[derive(Clone, Debug)]
pub struct DeterminationConfig {
    pub k_max: u32,
    pub levi: LeviConfig,
    pub segre_seed: u64,
    /// Run the solve even when the prerequisites fail.
    pub force: bool,
    /// Eliminate the unknowns in reverse order.
    pub reverse: bool,
}

impl Default for DeterminationConfig {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_KMAX,
            levi: LeviConfig::default(),
            segre_seed: 0,
            force: false,
            reverse: false,
        }
    }
}

/// Degree needed on the recentered germ for a determination run.
pub fn working_degree(k_max: u32) -> u32 {
    2 * k_max + 1
}

/// Lookahead used at degree `k`.
pub fn window(k: u32) -> u32 {
    k + 1
}

/// Normalizes `H = id + O(k_norm + 1)` with `k_norm = (d + 1)·l(M)` and
/// reports the freedom of each higher degree. When `l(M)` is not finite and
/// the run is forced, `l = 1` is used.
pub fn determination_test(
    m: &GenericManifold,
    p: &MarkedPoint,
    cfg: &DeterminationConfig,
) -> Result<DeterminationReport> {
    let levi = levi_number(m, &cfg.levi)?;
    let l = match levi.verdict {
        LeviVerdict::Finite(l) => Some(l),
        _ => None,
    };
    let k_at_point = k_nondegeneracy_at(m, &p.point, cfg.levi.kmax)?.k;
    let germ = &p.recentered;
    let chain = segre_chain(
        p,
        germ.d() + 2,
        default_degree(germ),
        &mut Sampler::new(cfg.segre_seed, cfg.levi.height),
    )?;
    let minimal = chain.minimal();
    let prerequisites_ok = l.is_some() && k_at_point == l && minimal == Some(true);
    if !prerequisites_ok && !cfg.force {
        return Err(Error::Prerequisites(format!(
            "l(M) = {}, k at point = {}, minimal = {}",
            opt(l),
            opt(k_at_point),
            minimal.map_or("unknown".into(), |b| b.to_string())
        )));
    }
    let k_norm = ((germ.d() + 1) * l.unwrap_or(1)) as u32;
    let (freedoms, jet) = solve_through(germ, k_norm, cfg.k_max, cfg.reverse)?;
    let verified = maps_into(germ, germ, &jet, cfg.k_max)?;
    let unique = freedoms.iter().all(|(_, f)| *f == 0);
    Ok(DeterminationReport {
        levi: l,
        k_at_point,
        minimal,
        prerequisites_ok,
        k_norm,
        k_max: cfg.k_max,
        freedoms,
        unique,
        jet,
        verified,
    })
}

fn opt(x: Option<usize>) -> String {
    x.map_or("none".into(), |v| v.to_string())
}

/// Starting from the identity through `k_norm`, solves degrees
/// `k_norm + 1 ..= k_max` in turn.
/// `(k, freedom)` per solved degree and the resulting jet.
pub type Solved = (Vec<(u32, usize)>, Vec<Poly>);

pub fn solve_through(germ: &GenericManifold, k_norm: u32, k_max: u32, reverse: bool) -> Result<Solved> {
    let r = germ.registry().clone();
    let mut jet: Vec<Poly> = (0..r.big_n()).map(|j| Poly::var(&r, r.big_z(j))).collect();
    let mut freedoms = Vec::new();
    if k_max <= k_norm {
        return Ok((freedoms, jet));
    }
    let need = working_degree(k_max);
    if germ.truncated_at().is_some_and(|t| t < need) {
        return Err(Error::InvalidArgument(format!(
            "germ must be known through degree {need}"
        )));
    }
    let c = germ.complexify(need)?;
    for k in k_norm + 1..=k_max {
        let sys = self_map_constraints(&c, germ, &jet, k, window(k))?;
        let (freedom, solution) = solve_degree(&sys, reverse)?;
        for (j, part) in leading_part(&r, &sys, &solution).into_iter().enumerate() {
            jet[j] = &jet[j] + &part;
        }
        freedoms.push((k, freedom));
    }
    Ok((freedoms, jet))
}

#[derive(Clone, Debug)]
pub struct CounterexamplePair {
    /// Time-one map of `Re Y`, `Y = g^e·X`.
    pub f: Vec<Poly>,
    pub g: Vec<Poly>,
    pub multiplier: Poly,
    pub exponent: u32,
    pub field: FieldJet,
    pub k: u32,
    /// Lowest order at which `f` and `g` differ.
    pub differs_at: u32,
    /// Both maps send the germ into itself through `working_degree`.
    pub verified: bool,
    pub working_degree: u32,
}

/// A map agreeing with the identity through order `k` but not beyond,
/// built as the flow of `Re(g^e X)`. Uses an exactly tangent holomorphic
/// degeneracy field `X` with `g = z_1`, or else a real invariant `g` and a
/// tangent field from the automorphism solver. `None` when neither exists.
pub fn counterexample_pair(p: &MarkedPoint, k: u32) -> Result<Option<CounterexamplePair>> {
    let germ = &p.recentered;
    let r = germ.registry().clone();
    let max_deg = germ.max_degree();
    let candidate = exact_witness(germ, max_deg)?.or(invariant_and_field(germ, max_deg)?);
    let Some((g, x)) = candidate else {
        return Ok(None);
    };
    let ord_g = g.order().expect("nonzero multiplier");
    let ord_x = x.order().expect("nonzero field");
    let exponent = (k + 1).saturating_sub(ord_x).div_ceil(ord_g).max(1);
    let y = x.multiply(&g.pow(exponent));
    let differs_at = y.order().expect("nonzero field");
    let working_degree = differs_at + 1;
    if germ.truncated_at().is_some_and(|t| t < working_degree) {
        return Err(Error::InvalidArgument(format!(
            "germ must be known through degree {working_degree}"
        )));
    }
    let f = truncated_flow(&y, working_degree, &Qi::one())?;
    let id: Vec<Poly> = (0..r.big_n()).map(|j| Poly::var(&r, r.big_z(j))).collect();
    let verified = maps_into(germ, germ, &f, working_degree)? && maps_into(germ, germ, &id, working_degree)?;
    Ok(Some(CounterexamplePair {
        f,
        g: id,
        multiplier: g,
        exponent,
        field: x,
        k,
        differs_at,
        verified,
        working_degree,
    }))
}

fn exact_witness(germ: &GenericManifold, max_deg: u32) -> Result<Option<(Poly, FieldJet)>> {
    let w = degeneracy_witness(germ, 0, germ.truncated_at().map(|t| t.min(max_deg)))?;
    let r = germ.registry();
    Ok(w.fields
        .into_iter()
        .zip(w.exact)
        .find(|(_, e)| *e)
        .map(|(f, _)| (Poly::var(r, r.z(0)), f)))
}

fn invariant_and_field(germ: &GenericManifold, max_deg: u32) -> Result<Option<(Poly, FieldJet)>> {
    let out = germ.truncated_at().map_or(max_deg + 2, |t| t.min(max_deg + 2));
    let Some(h) = real_invariants(germ, 1, out)?.into_iter().next() else {
        return Ok(None);
    };
    let basis = hol_jet_basis(germ, 1, &[]).map(|r| r.basis)?;
    let exact = basis
        .into_iter()
        .find(|f| f.is_tangent(germ, germ.truncated_at()).unwrap_or(false));
    Ok(exact.map(|x| (h, x)))
}

/// Agreement order of two maps: the largest `K` with equal `K`-jets.
pub fn agreement_order(f: &[Poly], g: &[Poly]) -> Option<u32> {
    f.iter()
        .zip(g)
        .filter_map(|(a, b)| (a - b).order())
        .min()
        .map(|o| o - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::q;

    fn origin(name: &str, degree: u32) -> (GenericManifold, MarkedPoint) {
        let m = fixtures::manifold(name);
        let p = m
            .mark_point(&vec![Qi::zero(); m.n()], &vec![q(0, 1); m.d()], degree)
            .unwrap();
        (m, p)
    }

    fn identity(r: &Arc<Registry>) -> Vec<Poly> {
        (0..r.big_n()).map(|j| Poly::var(r, r.big_z(j))).collect()
    }

    #[test]
    fn plane_second_degree_is_free() {
        let (m, _) = origin("plane", 4);
        let c = m.complexify(3).unwrap();
        let sys = self_map_constraints(&c, &m, &identity(m.registry()), 2, 1).unwrap();
        let (freedom, _) = solve_degree(&sys, false).unwrap();
        // z², zw, w² in the z-component are free; the w-component is real
        assert!(freedom >= 6);
    }

    #[test]
    fn heisenberg_two_jets_are_free_before_normalization() {
        let (m, _) = origin("heis2", 4);
        let c = m.complexify(3).unwrap();
        let sys = self_map_constraints(&c, &m, &identity(m.registry()), 2, 1).unwrap();
        assert!(solve_degree(&sys, false).unwrap().0 > 0);
        let (f, jet) = solve_through(&m, 2, 3, false).unwrap();
        assert_eq!(f, vec![(3, 0)]);
        assert_eq!(jet, identity(m.registry()));
    }

    #[test]
    fn degenerate_linear_part_is_rejected() {
        let (m, _) = origin("heis2", 4);
        let c = m.complexify(3).unwrap();
        let r = m.registry();
        let lower = vec![Poly::var(r, r.z(0)), Poly::zero(r)];
        assert!(matches!(
            self_map_constraints(&c, &m, &lower, 2, 1),
            Err(Error::NonInvertibleLinearPart)
        ));
    }

    #[test]
    fn heisenberg_is_determined_by_two_jets() {
        let (m, p) = origin("heis2", working_degree(6));
        let rep = determination_test(&m, &p, &DeterminationConfig::default()).unwrap();
        assert!(rep.prerequisites_ok);
        assert_eq!(rep.k_norm, 2);
        assert!(rep.unique, "{:?}", rep.freedoms);
        assert!(rep.verified);
        assert!(counterexample_pair(&p, 2).unwrap().is_none());
    }

    #[test]
    fn plane_fails_prerequisites() {
        let (m, p) = origin("plane", working_degree(4));
        assert!(matches!(
            determination_test(
                &m,
                &p,
                &DeterminationConfig {
                    k_max: 4,
                    ..Default::default()
                }
            ),
            Err(Error::Prerequisites(_))
        ));
        let rep = determination_test(
            &m,
            &p,
            &DeterminationConfig {
                k_max: 4,
                force: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rep.freedoms.iter().all(|(_, f)| *f > 0));
        assert!(!rep.unique);
    }

    #[test]
    fn plane_counterexample() {
        let (_, p) = origin("plane", 8);
        let pair = counterexample_pair(&p, 5).unwrap().unwrap();
        assert_eq!(agreement_order(&pair.f, &pair.g), Some(5));
        assert_eq!(pair.differs_at, 6);
        assert!(pair.verified);
    }

    #[test]
    fn prod3_counterexample() {
        let (_, p) = origin("prod3", 8);
        let pair = counterexample_pair(&p, 3).unwrap().unwrap();
        assert_eq!(agreement_order(&pair.f, &pair.g), Some(3));
        assert!(pair.verified);
    }
}
