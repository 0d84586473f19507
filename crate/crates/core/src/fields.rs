//! Holomorphic vector fields with polynomial coefficients.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::GenericManifold;
use crate::poly::Poly;
use crate::registry::{same_registry, Registry, VarKind};

/// `Y = Σ a_j(Z) ∂/∂Z_j`. As a real field it stands for `Y + Ȳ`, whose
/// action on the complexification is `Σ a_j(Z) ∂/∂Z_j + ā_j(ζ) ∂/∂ζ_j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FieldJet {
    reg: Arc<Registry>,
    coeffs: Vec<Poly>,
}

impl FieldJet {
    pub fn new(coeffs: Vec<Poly>) -> Result<Self> {
        let reg = coeffs
            .first()
            .map(|p| p.registry().clone())
            .ok_or_else(|| Error::InvalidArgument("empty vector field".into()))?;
        if coeffs.len() != reg.big_n() {
            return Err(Error::InvalidArgument(format!(
                "vector field needs {} coefficients",
                reg.big_n()
            )));
        }
        for a in &coeffs {
            if !same_registry(a.registry(), &reg) {
                return Err(Error::RegistryMismatch);
            }
            if let Some(v) = a
                .vars()
                .into_iter()
                .find(|v| !matches!(reg.var(*v).kind, VarKind::Z | VarKind::W))
            {
                return Err(Error::InvalidArgument(format!(
                    "coefficient depends on non-holomorphic variable {}",
                    reg.name(v)
                )));
            }
        }
        Ok(Self { reg, coeffs })
    }

    pub fn zero(reg: &Arc<Registry>) -> Self {
        Self {
            reg: reg.clone(),
            coeffs: vec![Poly::zero(reg); reg.big_n()],
        }
    }

    /// `∂/∂Z_j`.
    pub fn coordinate(reg: &Arc<Registry>, j: usize) -> Self {
        let mut f = Self::zero(reg);
        f.coeffs[j] = Poly::one(reg);
        f
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.reg
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &Poly {
        &self.coeffs[j]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    pub fn max_degree(&self) -> u32 {
        self.coeffs.iter().filter_map(Poly::total_degree).max().unwrap_or(0)
    }

    /// Lowest order among the coefficients; `None` for the zero field.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.iter().filter_map(Poly::order).min()
    }

    /// `h·Y` for a holomorphic `h`.
    pub fn multiply(&self, h: &Poly) -> FieldJet {
        FieldJet {
            reg: self.reg.clone(),
            coeffs: self.coeffs.iter().map(|a| a * h).collect(),
        }
    }

    pub fn add(&self, other: &FieldJet) -> FieldJet {
        FieldJet {
            reg: self.reg.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: &crate::scalar::Qi) -> FieldJet {
        FieldJet {
            reg: self.reg.clone(),
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// `Y f = Σ a_j ∂f/∂Z_j`.
    pub fn apply_holomorphic(&self, f: &Poly) -> Poly {
        let target = f.registry();
        let mut out = Poly::zero(target);
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let df = f.derivative(self.reg.big_z(j));
            if !df.is_zero() {
                out = out + &a.lift(target) * &df;
            }
        }
        out
    }

    /// `(Y + Ȳ) f` on the complexification.
    pub fn apply_real(&self, f: &Poly) -> Poly {
        let target = f.registry();
        let mut out = self.apply_holomorphic(f);
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let df = f.derivative(self.reg.zeta(j));
            if !df.is_zero() {
                let abar = a.bar().expect("base registry is fully paired");
                out = out + &abar.lift(target) * &df;
            }
        }
        out
    }

    /// `(Y + Ȳ) ρ_k` pulled back to the graph parametrization of `m`,
    /// optionally truncated. All zero exactly when the real field is tangent.
    pub fn tangency_residuals(&self, m: &GenericManifold, degree: Option<u32>) -> Result<Vec<Poly>> {
        m.rho()
            .iter()
            .map(|rho| m.graph_residual(&self.apply_real(rho), degree))
            .collect()
    }

    /// `Y ρ_k` pulled back to the graph parametrization: zero when the
    /// holomorphic field itself is tangent.
    pub fn holomorphic_residuals(&self, m: &GenericManifold, degree: Option<u32>) -> Result<Vec<Poly>> {
        m.rho()
            .iter()
            .map(|rho| m.graph_residual(&self.apply_holomorphic(rho), degree))
            .collect()
    }

    pub fn is_tangent(&self, m: &GenericManifold, degree: Option<u32>) -> Result<bool> {
        Ok(self.tangency_residuals(m, degree)?.iter().all(Poly::is_zero))
    }
}

impl fmt::Display for FieldJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({a})*d/d{}", self.reg.name(j))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Qi;

    fn heis2() -> GenericManifold {
        let r = Registry::base(1, 1);
        GenericManifold::new("heis2", vec![Poly::var(&r, 0) * Poly::var(&r, r.chi(0))]).unwrap()
    }

    #[test]
    fn heisenberg_translation_is_tangent() {
        // Y = ∂z + 2iz ∂w
        let m = heis2();
        let r = m.registry();
        let y = FieldJet::new(vec![Poly::one(r), Poly::var(r, 0).scale(&Qi::from_int(2).mul_i())]).unwrap();
        assert!(y.is_tangent(&m, None).unwrap());
        assert!(!FieldJet::coordinate(r, 0).is_tangent(&m, None).unwrap());
        // ∂/∂w is tangent as a real field
        assert!(FieldJet::coordinate(r, 1).is_tangent(&m, None).unwrap());
    }

    #[test]
    fn non_holomorphic_coefficients_are_rejected() {
        let r = Registry::base(1, 1);
        assert!(FieldJet::new(vec![Poly::var(&r, r.chi(0)), Poly::zero(&r)]).is_err());
    }
}
