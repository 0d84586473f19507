//! Truncated power series and the implicit-function solver.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::poly::Poly;
use crate::registry::Registry;
use crate::scalar::Qi;

/// A polynomial known to be exact through total degree `degree`; terms
/// above it are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Series {
    poly: Poly,
    degree: u32,
}

impl Series {
    pub fn new(poly: Poly, degree: u32) -> Self {
        Self {
            poly: poly.truncate(degree),
            degree,
        }
    }

    pub fn zero(reg: &Arc<Registry>, degree: u32) -> Self {
        Self::new(Poly::zero(reg), degree)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, other: &Series) -> Series {
        let d = self.degree.min(other.degree);
        Series::new(&self.poly + &other.poly, d)
    }

    pub fn sub(&self, other: &Series) -> Series {
        let d = self.degree.min(other.degree);
        Series::new(&self.poly - &other.poly, d)
    }

    pub fn mul(&self, other: &Series) -> Series {
        let d = self.degree.min(other.degree);
        Series {
            poly: self.poly.mul_trunc(&other.poly, d),
            degree: d,
        }
    }

    pub fn scale(&self, c: &Qi) -> Series {
        Series {
            poly: self.poly.scale(c),
            degree: self.degree,
        }
    }

    /// Lowers the precision to `degree`.
    pub fn truncate(&self, degree: u32) -> Series {
        Series::new(self.poly.clone(), degree.min(self.degree))
    }

    /// `p` with `v -> series` substituted, exact through the smallest
    /// precision among the rules and `degree`.
    pub fn compose(p: &Poly, rules: &[(usize, Series)], degree: u32) -> Result<Series> {
        let d = rules.iter().map(|(_, s)| s.degree).fold(degree, u32::min);
        let polys: Vec<(usize, Poly)> = rules.iter().map(|(v, s)| (*v, s.poly.clone())).collect();
        Ok(Series::new(p.substitute_trunc(&polys, d)?, d))
    }
}

/// Solves `equations = 0` for the variables `solve_for` as power series in
/// the remaining variables, exact through total degree `degree`.
///
/// The equations must vanish at the origin and their linear part in
/// `solve_for` must be invertible. Each Newton-type pass
/// `x <- x - A^{-1} E(x)` raises the order of the residual by at least one,
/// so at most `degree + 1` passes are needed.
pub fn implicit_series_solve(equations: &[Poly], solve_for: &[usize], degree: u32) -> Result<Vec<Series>> {
    let d = solve_for.len();
    if equations.len() != d || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "{} equations for {} unknowns",
            equations.len(),
            d
        )));
    }
    let reg = equations[0].registry().clone();
    for e in equations {
        if !crate::registry::same_registry(e.registry(), &reg) {
            return Err(Error::RegistryMismatch);
        }
        if !e.constant_term().is_zero() {
            return Err(Error::SingularLinearPart);
        }
    }
    let a = ExactMatrix::from_rows(
        equations
            .iter()
            .map(|e| solve_for.iter().map(|&v| e.linear_coeff(v)).collect())
            .collect(),
    );
    let a_inv = a.inverse().ok_or(Error::SingularLinearPart)?;
    let mut sol: Vec<Poly> = vec![Poly::zero(&reg); d];
    let max_passes = degree as usize + 2;
    for _ in 0..max_passes {
        let rules: Vec<(usize, Poly)> = solve_for.iter().copied().zip(sol.iter().cloned()).collect();
        let residual: Vec<Poly> = equations
            .iter()
            .map(|e| e.substitute_trunc(&rules, degree))
            .collect::<Result<_>>()?;
        if residual.iter().all(Poly::is_zero) {
            return Ok(sol.into_iter().map(|p| Series::new(p, degree)).collect());
        }
        for (j, s) in sol.iter_mut().enumerate() {
            let mut corr = Poly::zero(&reg);
            for (k, r) in residual.iter().enumerate() {
                corr = &corr + &r.scale(a_inv.get(j, k));
            }
            *s = s.checked_sub(&corr)?.truncate(degree);
        }
    }
    Err(Error::NoConvergence(max_passes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(r: &Arc<Registry>) -> (Poly, Poly, Poly, Poly) {
        (
            Poly::var(r, r.z(0)),
            Poly::var(r, r.w(0)),
            Poly::var(r, r.chi(0)),
            Poly::var(r, r.tau(0)),
        )
    }

    fn inv_two_i() -> Qi {
        Qi::from_int(2).mul_i().inv()
    }

    #[test]
    fn heisenberg_solved_form() {
        let r = Registry::base(1, 1);
        let (z, w, chi, tau) = vars(&r);
        let rho = (&w - &tau).scale(&inv_two_i()) - &z * &chi;
        let q = implicit_series_solve(std::slice::from_ref(&rho), &[r.tau(0)], 5).unwrap();
        let expect = &w - &(&z * &chi).scale(&Qi::from_int(2).mul_i());
        assert_eq!(q[0].poly(), &expect);
        let back = rho.substitute_trunc(&[(r.tau(0), q[0].poly().clone())], 5).unwrap();
        assert!(back.is_zero());
    }

    #[test]
    fn flat_plane_solved_form() {
        let r = Registry::base(1, 1);
        let (_, w, _, tau) = vars(&r);
        let rho = (&w - &tau).scale(&inv_two_i());
        let q = implicit_series_solve(&[rho], &[r.tau(0)], 3).unwrap();
        assert_eq!(q[0].poly(), &w);
    }

    #[test]
    fn nonlinear_solve_has_zero_residual() {
        // tau - w + tau^2 z + chi^3 tau = 0
        let r = Registry::base(1, 1);
        let (z, w, chi, tau) = vars(&r);
        let e = &tau - &w + tau.pow(2) * &z + chi.pow(3) * &tau;
        for d in [1, 4, 9] {
            let q = implicit_series_solve(std::slice::from_ref(&e), &[r.tau(0)], d).unwrap();
            let back = e.substitute_trunc(&[(r.tau(0), q[0].poly().clone())], d).unwrap();
            assert!(back.is_zero(), "residual at degree {d}: {back}");
        }
    }

    #[test]
    fn singular_linear_part_is_rejected() {
        let r = Registry::base(1, 1);
        let (z, w, chi, tau) = vars(&r);
        let e = &w + &(tau.pow(2) * &z) + &chi;
        assert_eq!(
            implicit_series_solve(&[e], &[r.tau(0)], 3),
            Err(Error::SingularLinearPart)
        );
    }
}
