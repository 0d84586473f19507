//! Variable registries.
//!
//! Every manifold owns one registry laid out as
//! `z1..zn, w1..wd, chi1..chin, tau1..taud, s1..sd`, optionally followed by
//! parameter variables. `chi` and `tau` are the conjugate coordinates `ζ` on
//! the complexification, `s` stands for `Re w` inside defining functions.

use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Z,
    W,
    Chi,
    Tau,
    S,
    Param,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// `Some(self)` for real variables, `None` if conjugation is undefined.
    pub partner: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Registry {
    n: usize,
    d: usize,
    vars: Vec<Variable>,
}

impl Registry {
    pub fn base(n: usize, d: usize) -> Arc<Registry> {
        let big_n = n + d;
        let mut vars = Vec::with_capacity(2 * big_n + d);
        let push = |vars: &mut Vec<Variable>, name: String, kind, partner| {
            vars.push(Variable {
                name,
                kind,
                partner: Some(partner),
            })
        };
        for i in 0..n {
            push(&mut vars, format!("z{}", i + 1), VarKind::Z, big_n + i);
        }
        for k in 0..d {
            push(&mut vars, format!("w{}", k + 1), VarKind::W, big_n + n + k);
        }
        for i in 0..n {
            push(&mut vars, format!("chi{}", i + 1), VarKind::Chi, i);
        }
        for k in 0..d {
            push(&mut vars, format!("tau{}", k + 1), VarKind::Tau, n + k);
        }
        for k in 0..d {
            let idx = 2 * big_n + k;
            push(&mut vars, format!("s{}", k + 1), VarKind::S, idx);
        }
        Arc::new(Registry { n, d, vars })
    }

    /// A new registry with `names` appended as parameters. Real parameters
    /// are their own conjugation partner.
    pub fn with_params(&self, names: &[String], real: bool) -> Arc<Registry> {
        let mut vars = self.vars.clone();
        for name in names {
            assert!(self.index_of(name).is_none(), "duplicate variable name {name}");
            let idx = vars.len();
            vars.push(Variable {
                name: name.clone(),
                kind: VarKind::Param,
                partner: real.then_some(idx),
            });
        }
        Arc::new(Registry {
            n: self.n,
            d: self.d,
            vars,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `N = n + d`
    pub fn big_n(&self) -> usize {
        self.n + self.d
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, idx: usize) -> &Variable {
        &self.vars[idx]
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.vars[idx].name
    }

    pub fn partner(&self, idx: usize) -> Option<usize> {
        self.vars[idx].partner
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn z(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        i
    }

    pub fn w(&self, k: usize) -> usize {
        debug_assert!(k < self.d);
        self.n + k
    }

    pub fn chi(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        self.big_n() + i
    }

    pub fn tau(&self, k: usize) -> usize {
        debug_assert!(k < self.d);
        self.big_n() + self.n + k
    }

    pub fn s(&self, k: usize) -> usize {
        debug_assert!(k < self.d);
        2 * self.big_n() + k
    }

    /// Holomorphic coordinate `Z_j`, `j < N`: `z` then `w`.
    pub fn big_z(&self, j: usize) -> usize {
        debug_assert!(j < self.big_n());
        j
    }

    /// Conjugate coordinate `ζ_j`, `j < N`: `chi` then `tau`.
    pub fn zeta(&self, j: usize) -> usize {
        debug_assert!(j < self.big_n());
        self.big_n() + j
    }

    /// First parameter index.
    pub fn param_offset(&self) -> usize {
        2 * self.big_n() + self.d
    }

    pub fn param(&self, j: usize) -> usize {
        self.param_offset() + j
    }

    pub fn num_params(&self) -> usize {
        self.vars.len() - self.param_offset()
    }

    /// True when `self`'s variables are a prefix of `other`'s.
    pub fn is_prefix_of(&self, other: &Registry) -> bool {
        self.n == other.n
            && self.d == other.d
            && self.vars.len() <= other.vars.len()
            && self.vars.iter().zip(&other.vars).all(|(a, b)| a == b)
    }
}

pub fn same_registry(a: &Arc<Registry>, b: &Arc<Registry>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
