//! Sparse multivariate polynomials over `Q(i)`.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors ordered graded
//! lexicographically in registry order; zero coefficients are never stored.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::registry::{same_registry, Registry};
use crate::scalar::Qi;

/// Exponent vector. The derived order compares total degree first, then the
/// exponents lexicographically, which is graded lex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    deg: u32,
    exps: Box<[u32]>,
}

impl Monomial {
    pub fn one(len: usize) -> Self {
        Self {
            deg: 0,
            exps: vec![0; len].into_boxed_slice(),
        }
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        Self {
            deg: exps.iter().sum(),
            exps: exps.into_boxed_slice(),
        }
    }

    /// All monomials in `vars` of total degree `<= max_deg`, ascending.
    pub fn all_upto(len: usize, vars: &[usize], max_deg: u32) -> Vec<Monomial> {
        let mut out = vec![Monomial::one(len)];
        let mut frontier = vec![(Monomial::one(len), 0usize)];
        for _ in 0..max_deg {
            let mut next = Vec::new();
            for (m, first) in &frontier {
                for (k, &v) in vars.iter().enumerate().skip(*first) {
                    next.push((m.mul(&Monomial::var(len, v, 1)), k));
                }
            }
            out.extend(next.iter().map(|(m, _)| m.clone()));
            frontier = next;
        }
        out.sort();
        out
    }

    pub fn var(len: usize, v: usize, e: u32) -> Self {
        let mut exps = vec![0; len];
        exps[v] = e;
        Self::from_exps(exps)
    }

    pub fn deg(&self) -> u32 {
        self.deg
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn exp(&self, v: usize) -> u32 {
        self.exps[v]
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            deg: self.deg + other.deg,
            exps: self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect(),
        }
    }

    fn padded(&self, len: usize) -> Monomial {
        let mut exps = self.exps.to_vec();
        exps.resize(len, 0);
        Monomial {
            deg: self.deg,
            exps: exps.into_boxed_slice(),
        }
    }

    /// Degree counted only over the variables in `mask`.
    pub fn partial_deg(&self, mask: &[bool]) -> u32 {
        self.exps.iter().zip(mask).filter(|(_, m)| **m).map(|(e, _)| *e).sum()
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

#[derive(Clone)]
pub struct Poly {
    reg: Arc<Registry>,
    terms: BTreeMap<Monomial, Qi>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_registry(&self.reg, &other.reg) && self.terms == other.terms
    }
}

impl Eq for Poly {}

impl Poly {
    pub fn zero(reg: &Arc<Registry>) -> Self {
        Self {
            reg: reg.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(reg: &Arc<Registry>, c: Qi) -> Self {
        let mut p = Self::zero(reg);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(reg.len()), c);
        }
        p
    }

    pub fn one(reg: &Arc<Registry>) -> Self {
        Self::constant(reg, Qi::one())
    }

    pub fn var(reg: &Arc<Registry>, v: usize) -> Self {
        Self::monomial(reg, Monomial::var(reg.len(), v, 1), Qi::one())
    }

    pub fn monomial(reg: &Arc<Registry>, m: Monomial, c: Qi) -> Self {
        assert_eq!(m.len(), reg.len(), "monomial length mismatch");
        let mut p = Self::zero(reg);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(reg: &Arc<Registry>, terms: impl IntoIterator<Item = (Monomial, Qi)>) -> Self {
        let mut p = Self::zero(reg);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.reg
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Qi)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Qi> {
        self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Qi {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Qi {
        self.coeff(&Monomial::one(self.reg.len()))
    }

    /// Coefficient of the degree-one monomial in `v`.
    pub fn linear_coeff(&self, v: usize) -> Qi {
        self.coeff(&Monomial::var(self.reg.len(), v, 1))
    }

    /// Adds `c * m` in place.
    pub fn add_term(&mut self, m: Monomial, c: &Qi) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.deg())
    }

    /// Lowest total degree of a term (the order of vanishing at 0).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.deg())
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.total_degree().unwrap_or(0) == 0
    }

    /// Variables that occur with a positive exponent.
    pub fn vars(&self) -> Vec<usize> {
        let mut seen = vec![false; self.reg.len()];
        for m in self.terms.keys() {
            for (v, e) in m.exps().iter().enumerate() {
                if *e > 0 {
                    seen[v] = true;
                }
            }
        }
        (0..seen.len()).filter(|v| seen[*v]).collect()
    }

    pub fn truncate(&self, max_deg: u32) -> Poly {
        Self {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .take_while(|(m, _)| m.deg() <= max_deg)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_part(&self, k: u32) -> Poly {
        Self {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.deg() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Qi) -> Qi) -> Poly {
        let mut out = Poly::zero(&self.reg);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    pub fn scale(&self, c: &Qi) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.reg);
        }
        self.map_coeffs(|x| x * c)
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Qi) -> Poly {
        let mut out = Poly::zero(&self.reg);
        if c.is_zero() {
            return out;
        }
        for (k, x) in &self.terms {
            out.terms.insert(k.mul(m), x * c);
        }
        out
    }

    fn check(&self, other: &Poly) -> Result<()> {
        if same_registry(&self.reg, &other.reg) {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        Ok(self.mul_trunc(other, u32::MAX))
    }

    /// Product with every term of degree above `max_deg` discarded.
    pub fn mul_trunc(&self, other: &Poly, max_deg: u32) -> Poly {
        assert!(same_registry(&self.reg, &other.reg), "{}", Error::RegistryMismatch);
        let mut out = Poly::zero(&self.reg);
        for (ma, ca) in &self.terms {
            if ma.deg() > max_deg {
                break;
            }
            let budget = max_deg - ma.deg();
            for (mb, cb) in &other.terms {
                if mb.deg() > budget {
                    break;
                }
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        self.pow_trunc(e, u32::MAX)
    }

    pub fn pow_trunc(&self, e: u32, max_deg: u32) -> Poly {
        let mut acc = Poly::one(&self.reg).truncate(max_deg);
        for _ in 0..e {
            acc = acc.mul_trunc(self, max_deg);
        }
        acc
    }

    /// `∂/∂v`
    pub fn derivative(&self, v: usize) -> Poly {
        let mut out = Poly::zero(&self.reg);
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[v] -= 1;
            out.terms.insert(Monomial::from_exps(exps), c * &Qi::from_int(e as i64));
        }
        out
    }

    /// Conjugates coefficients and replaces every variable by its partner:
    /// `bar(h)(Z) = conj(h(conj Z))` in the notation of the complexification.
    pub fn bar(&self) -> Result<Poly> {
        let len = self.reg.len();
        let mut out = Poly::zero(&self.reg);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; len];
            for (v, e) in m.exps().iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let p = self
                    .reg
                    .partner(v)
                    .ok_or_else(|| Error::UnpairedVariable(self.reg.name(v).to_string()))?;
                exps[p] += e;
            }
            out.terms.insert(Monomial::from_exps(exps), c.conj());
        }
        Ok(out)
    }

    /// Re-expresses `self` in a registry that extends its own.
    pub fn lift(&self, reg: &Arc<Registry>) -> Poly {
        if same_registry(&self.reg, reg) {
            return self.clone();
        }
        assert!(self.reg.is_prefix_of(reg), "target registry does not extend the source");
        Poly {
            reg: reg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.padded(reg.len()), c.clone()))
                .collect(),
        }
    }

    /// Inverse of [`Poly::lift`]: moves `self` into a prefix registry. Fails
    /// if a variable outside `reg` occurs.
    pub fn restrict(&self, reg: &Arc<Registry>) -> Result<Poly> {
        if same_registry(&self.reg, reg) {
            return Ok(self.clone());
        }
        if !reg.is_prefix_of(&self.reg) {
            return Err(Error::RegistryMismatch);
        }
        let len = reg.len();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.exps()[len..].iter().any(|e| *e != 0) {
                return Err(Error::RegistryMismatch);
            }
            terms.insert(Monomial::from_exps(m.exps()[..len].to_vec()), c.clone());
        }
        Ok(Poly {
            reg: reg.clone(),
            terms,
        })
    }

    /// Simultaneous substitution `v -> rule` for every `(v, rule)`.
    ///
    /// The rules may live in an extension of `self`'s registry; the result
    /// lives there too.
    pub fn substitute(&self, rules: &[(usize, Poly)]) -> Result<Poly> {
        self.substitute_impl(rules, None)
    }

    /// Substitution keeping only terms of total degree `<= max_deg`. Exact on
    /// those terms whenever every rule is itself exact through `max_deg`.
    pub fn substitute_trunc(&self, rules: &[(usize, Poly)], max_deg: u32) -> Result<Poly> {
        self.substitute_impl(rules, Some(max_deg))
    }

    fn substitute_impl(&self, rules: &[(usize, Poly)], trunc: Option<u32>) -> Result<Poly> {
        let target = rules
            .first()
            .map(|(_, p)| p.reg.clone())
            .unwrap_or_else(|| self.reg.clone());
        for (v, p) in rules {
            if !same_registry(&p.reg, &target) || *v >= self.reg.len() {
                return Err(Error::RegistryMismatch);
            }
        }
        if !same_registry(&self.reg, &target) && !self.reg.is_prefix_of(&target) {
            return Err(Error::RegistryMismatch);
        }
        let mut rule_of: Vec<Option<&Poly>> = vec![None; self.reg.len()];
        for (v, p) in rules {
            rule_of[*v] = Some(p);
        }
        let order: Vec<Option<u32>> = rule_of.iter().map(|r| r.map_or(Some(1), |p| p.order())).collect();
        let max_deg = trunc.unwrap_or(u32::MAX);
        let mut cache: HashMap<(usize, u32), Poly> = HashMap::new();
        let mut out = Poly::zero(&target);
        'terms: for (m, c) in &self.terms {
            let mut lower = 0u32;
            for (v, e) in m.exps().iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                match order[v] {
                    None => continue 'terms,
                    Some(o) => lower = lower.saturating_add(o.saturating_mul(*e)),
                }
            }
            if lower > max_deg {
                continue;
            }
            let mut kept = vec![0u32; target.len()];
            for (v, e) in m.exps().iter().enumerate() {
                if rule_of[v].is_none() {
                    kept[v] = *e;
                }
            }
            let mut acc = Poly::monomial(&target, Monomial::from_exps(kept), c.clone());
            for (v, e) in m.exps().iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                if let Some(rule) = rule_of[v] {
                    let pw = power_cached(&mut cache, v, *e, rule, max_deg);
                    acc = acc.mul_trunc(pw, max_deg);
                    if acc.is_zero() {
                        continue 'terms;
                    }
                }
            }
            for (k, x) in acc.terms {
                out.add_term(k, &x);
            }
        }
        Ok(out)
    }

    /// Applies the rules repeatedly until no ruled variable remains.
    /// Fails if a rule depends, directly or transitively, on itself.
    pub fn substitute_chain(&self, rules: &[(usize, Poly)]) -> Result<Poly> {
        let mut resolved: HashMap<usize, Poly> = HashMap::new();
        let ruled: HashMap<usize, &Poly> = rules.iter().map(|(v, p)| (*v, p)).collect();
        fn resolve(
            v: usize,
            ruled: &HashMap<usize, &Poly>,
            resolved: &mut HashMap<usize, Poly>,
            stack: &mut HashSet<usize>,
        ) -> Result<Poly> {
            if let Some(p) = resolved.get(&v) {
                return Ok(p.clone());
            }
            let rule = ruled[&v];
            if !stack.insert(v) {
                return Err(Error::SubstitutionCycle(rule.reg.name(v).to_string()));
            }
            let deps: Vec<usize> = rule.vars().into_iter().filter(|u| ruled.contains_key(u)).collect();
            let mut sub = Vec::new();
            for u in deps {
                sub.push((u, resolve(u, ruled, resolved, stack)?));
            }
            let p = if sub.is_empty() {
                rule.clone()
            } else {
                rule.substitute(&sub)?
            };
            stack.remove(&v);
            resolved.insert(v, p.clone());
            Ok(p)
        }
        let mut sub = Vec::new();
        for v in self.vars() {
            if ruled.contains_key(&v) {
                let mut stack = HashSet::new();
                sub.push((v, resolve(v, &ruled, &mut resolved, &mut stack)?));
            }
        }
        // surface cycles even among rules the polynomial does not touch directly
        for v in ruled.keys() {
            let mut stack = HashSet::new();
            resolve(*v, &ruled, &mut resolved, &mut stack)?;
        }
        if sub.is_empty() {
            return Ok(self.clone());
        }
        self.substitute(&sub)
    }

    /// Substitutes constants for the listed variables.
    pub fn eval_vars(&self, values: &[(usize, Qi)]) -> Poly {
        let rules: Vec<(usize, Poly)> = values
            .iter()
            .map(|(v, c)| (*v, Poly::constant(&self.reg, c.clone())))
            .collect();
        self.substitute(&rules).expect("same registry")
    }

    /// Value at a point given for every registry variable.
    pub fn eval(&self, point: &[Qi]) -> Qi {
        assert!(point.len() >= self.reg.len(), "point too short");
        let mut powers: Vec<Vec<Qi>> = vec![vec![Qi::one()]; self.reg.len()];
        let mut acc = Qi::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.exps().iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let pv = &mut powers[v];
                while pv.len() <= *e as usize {
                    let next = pv.last().unwrap() * &point[v];
                    pv.push(next);
                }
                t = &t * &pv[*e as usize];
            }
            acc += &t;
        }
        acc
    }

    /// `p(x + center)`, re-expanded around the origin.
    pub fn shift(&self, center: &[Qi]) -> Poly {
        let rules: Vec<(usize, Poly)> = center
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| (v, Poly::var(&self.reg, v) + Poly::constant(&self.reg, c.clone())))
            .collect();
        if rules.is_empty() {
            return self.clone();
        }
        self.substitute(&rules).expect("same registry")
    }
}

fn power_cached<'a>(
    cache: &'a mut HashMap<(usize, u32), Poly>,
    v: usize,
    e: u32,
    rule: &Poly,
    max_deg: u32,
) -> &'a Poly {
    cache.entry((v, 1)).or_insert_with(|| rule.truncate(max_deg));
    let mut k = 1;
    while k < e && cache.contains_key(&(v, k + 1)) {
        k += 1;
    }
    for j in k + 1..=e {
        let next = cache[&(v, j - 1)].mul_trunc(&cache[&(v, 1)], max_deg);
        cache.insert((v, j), next);
    }
    &cache[&(v, e)]
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        self.checked_add(o).expect("registry mismatch")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self.checked_sub(o).expect("registry mismatch")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.checked_mul(o).expect("registry mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.map_coeffs(|c| -c)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

macro_rules! forward_poly {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: &Poly) -> Poly {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Poly> for &'a Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                self.$m(&o)
            }
        }
    };
}
forward_poly!(Add, add);
forward_poly!(Sub, sub);
forward_poly!(Mul, mul);

fn fmt_coeff(c: &Qi) -> (bool, String) {
    use num_traits::{Signed, Zero};
    if c.is_real() {
        let neg = c.re.is_negative();
        let a = Qi::from_q(c.re.abs());
        return (neg, if a.is_one() { String::new() } else { a.to_string() });
    }
    if c.re.is_zero() {
        let neg = c.im.is_negative();
        let a = Qi::from_q(c.im.abs());
        return (neg, if a.is_one() { "i".into() } else { format!("{a}*i") });
    }
    (false, format!("({c})"))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, cs) = fmt_coeff(c);
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            if !cs.is_empty() {
                factors.push(cs);
            }
            for (v, e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.reg.name(v).to_string()),
                    _ => factors.push(format!("{}^{}", self.reg.name(v), e)),
                }
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}
