//! Segre sets at a point: parametrizations, generic dimensions,
//! stabilization, minimality and CR orbit dimensions.
//!
//! All computations run on the recentered germ, so the point is the origin.
//! With `w = Q(z, χ, τ)` the solved form of the complexification,
//! `Z_1(t_1) = (t_1, Q(t_1, 0, 0))` and
//! `Z_{j+1}(t_1..t_{j+1}) = (t_{j+1}, Q(t_{j+1}, Z̄_j(t_1..t_j)))`.

use std::sync::Arc;

use crate::error::Result;
use crate::linalg::{generic_rank, jacobian, Sampler};
use crate::manifold::{GenericManifold, MarkedPoint, Point};
use crate::poly::Poly;
use crate::registry::Registry;

#[derive(Clone, Debug)]
pub struct SegreChain {
    pub point: Point,
    /// Registry extended by the parameter blocks `t{j}_{i}`.
    pub registry: Arc<Registry>,
    /// `params[j-1]` is `Z_j`, one polynomial per coordinate.
    pub params: Vec<Vec<Poly>>,
    pub dims: Vec<usize>,
    /// Index of the last strict increase, when the chain stabilized.
    pub j0: Option<usize>,
    pub stabilized: bool,
    pub degree: u32,
    pub seed: u64,
    pub n: usize,
    pub big_n: usize,
}

impl SegreChain {
    /// `d_{j0} = N`; `None` when the chain did not stabilize within `jmax`.
    pub fn minimal(&self) -> Option<bool> {
        self.j0.map(|j| self.dims[j - 1] == self.big_n)
    }

    /// Complex dimension of the intrinsic complexification of the CR orbit
    /// and real dimension of the orbit.
    pub fn orbit_dimension(&self) -> Option<(usize, usize)> {
        self.j0.map(|j| (self.dims[j - 1], self.dims[j - 1] + self.n))
    }
}

pub fn param_var(reg: &Registry, n: usize, j: usize, i: usize) -> usize {
    reg.param((j - 1) * n + i)
}

/// Default truncation degree: twice the largest defining degree.
pub fn default_degree(m: &GenericManifold) -> u32 {
    (2 * m.max_degree()).max(2)
}

pub fn segre_chain(p: &MarkedPoint, jmax: usize, degree: u32, sampler: &mut Sampler) -> Result<SegreChain> {
    let m = &p.recentered;
    let degree = m.truncated_at().map_or(degree, |t| t.min(degree));
    let c = m.complexify(degree)?;
    let base = m.registry();
    let (n, d, big_n) = (m.n(), m.d(), m.big_n());
    let names: Vec<String> = (1..=jmax.max(1))
        .flat_map(|j| (1..=n).map(move |i| format!("t{j}_{i}")))
        .collect();
    let reg = base.with_params(&names, true);
    let q: Vec<Poly> = c.q().iter().map(|s| s.poly().lift(&reg)).collect();
    let zero = Poly::zero(&reg);

    let mut params: Vec<Vec<Poly>> = Vec::new();
    let mut dims = Vec::new();
    let mut j0 = None;
    let mut prev_bar: Vec<Poly> = vec![zero.clone(); big_n];
    for j in 1..=jmax.max(1) {
        let mut rules: Vec<(usize, Poly)> = Vec::with_capacity(2 * big_n);
        for i in 0..n {
            rules.push((base.z(i), Poly::var(&reg, param_var(&reg, n, j, i))));
            rules.push((base.chi(i), prev_bar[i].clone()));
        }
        for k in 0..d {
            rules.push((base.tau(k), prev_bar[n + k].clone()));
        }
        let mut zj: Vec<Poly> = (0..n).map(|i| Poly::var(&reg, param_var(&reg, n, j, i))).collect();
        for qk in &q {
            zj.push(qk.substitute_trunc(&rules, degree)?);
        }
        let vars: Vec<usize> = (1..=j)
            .flat_map(|jj| (0..n).map(move |i| (jj, i)))
            .map(|(jj, i)| param_var(&reg, n, jj, i))
            .collect();
        let dj = generic_rank(&jacobian(&zj, &vars), &vars, sampler, 3);
        prev_bar = zj.iter().map(|p| p.bar()).collect::<Result<_>>()?;
        params.push(zj);
        dims.push(dj);
        if j > 1 && dims[j - 1] == dims[j - 2] {
            j0 = Some(j - 1);
            break;
        }
        if dj == big_n {
            j0 = Some(j);
            break;
        }
    }
    Ok(SegreChain {
        point: p.point.clone(),
        registry: reg,
        params,
        stabilized: j0.is_some(),
        j0,
        dims,
        degree,
        seed: sampler.seed(),
        n,
        big_n,
    })
}

/// `ρ(Z_{j+1}, Z̄_j)` through the chain's degree for every step, with
/// `Z̄_0 = 0`; all zero for a correct chain.
pub fn pairing_residuals(m: &GenericManifold, chain: &SegreChain) -> Result<Vec<Vec<Poly>>> {
    let reg = &chain.registry;
    let base = m.registry();
    let big_n = m.big_n();
    let rho: Vec<Poly> = m.rho().iter().map(|p| p.lift(reg)).collect();
    let mut prev_bar = vec![Poly::zero(reg); big_n];
    let mut out = Vec::new();
    for zj in &chain.params {
        let mut rules = Vec::with_capacity(2 * big_n);
        for l in 0..big_n {
            rules.push((base.big_z(l), zj[l].clone()));
            rules.push((base.zeta(l), prev_bar[l].clone()));
        }
        out.push(
            rho.iter()
                .map(|p| p.substitute_trunc(&rules, chain.degree))
                .collect::<Result<Vec<_>>>()?,
        );
        prev_bar = zj.iter().map(|p| p.bar()).collect::<Result<_>>()?;
    }
    Ok(out)
}

/// The conjugate chain built directly from `Q̄`:
/// `Z̄_1 = (t_1, Q̄(t_1, 0, 0))`, `Z̄_{j+1} = (t_{j+1}, Q̄(t_{j+1}, Z_j))`.
pub fn mirrored_chain(m: &GenericManifold, chain: &SegreChain) -> Result<Vec<Vec<Poly>>> {
    let reg = &chain.registry;
    let base = m.registry();
    let (n, d, big_n) = (m.n(), m.d(), m.big_n());
    let c = m.complexify(chain.degree)?;
    let qbar: Vec<Poly> = c.qbar().iter().map(|s| s.poly().lift(reg)).collect();
    let mut prev = vec![Poly::zero(reg); big_n];
    let mut out = Vec::new();
    for j in 1..=chain.params.len() {
        let mut rules = Vec::with_capacity(2 * big_n);
        for i in 0..n {
            rules.push((base.chi(i), Poly::var(reg, param_var(reg, n, j, i))));
            rules.push((base.z(i), prev[i].clone()));
        }
        for k in 0..d {
            rules.push((base.w(k), prev[n + k].clone()));
        }
        let mut zbar: Vec<Poly> = (0..n).map(|i| Poly::var(reg, param_var(reg, n, j, i))).collect();
        for qk in &qbar {
            zbar.push(qk.substitute_trunc(&rules, chain.degree)?);
        }
        prev = chain.params[j - 1].clone();
        out.push(zbar);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Qi};

    fn heis2() -> GenericManifold {
        let r = Registry::base(1, 1);
        GenericManifold::new("heis2", vec![Poly::var(&r, 0) * Poly::var(&r, r.chi(0))]).unwrap()
    }

    #[test]
    fn heisenberg_chain() {
        let m = heis2();
        let p = m.mark_point(&[Qi::zero()], &[q(0, 1)], 4).unwrap();
        let mut s = Sampler::new(3, 8);
        let ch = segre_chain(&p, 3, 4, &mut s).unwrap();
        assert_eq!(ch.dims, vec![1, 2]);
        assert_eq!(ch.j0, Some(2));
        assert_eq!(ch.minimal(), Some(true));
        assert_eq!(ch.orbit_dimension(), Some((2, 3)));
        let reg = &ch.registry;
        let (t1, t2) = (
            Poly::var(reg, param_var(reg, 1, 1, 0)),
            Poly::var(reg, param_var(reg, 1, 2, 0)),
        );
        // Z_1 = (t, 0), Z_2 = (t2, 2i t2 t1)
        assert_eq!(ch.params[0], vec![t1.clone(), Poly::zero(reg)]);
        assert_eq!(ch.params[1][1], (&t2 * &t1).scale(&Qi::from_int(2).mul_i()));
        for r in pairing_residuals(&m, &ch).unwrap() {
            assert!(r.iter().all(Poly::is_zero));
        }
        let mirror = mirrored_chain(&m, &ch).unwrap();
        for (a, b) in mirror.iter().zip(&ch.params) {
            let bb: Vec<Poly> = b.iter().map(|x| x.bar().unwrap()).collect();
            assert_eq!(a, &bb);
        }
    }

    #[test]
    fn plane_chain_is_not_minimal() {
        let r = Registry::base(1, 1);
        let m = GenericManifold::new("plane", vec![Poly::zero(&r)]).unwrap();
        let p = m.mark_point(&[Qi::zero()], &[q(0, 1)], 4).unwrap();
        let ch = segre_chain(&p, 3, 2, &mut Sampler::new(1, 8)).unwrap();
        assert_eq!(ch.dims, vec![1, 1]);
        assert_eq!(ch.j0, Some(1));
        assert_eq!(ch.minimal(), Some(false));
    }
}
