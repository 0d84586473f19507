//! Exact linear algebra over `Q(i)`.
//!
//! Dense matrices use fraction-free (Bareiss) forward elimination; the large
//! coefficient-matching systems are fed row by row into [`SparseEchelon`].

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::Poly;
use crate::scalar::{q, Qi};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Qi>,
}

/// Row-echelon data produced by fraction-free elimination.
struct Echelon {
    m: ExactMatrix,
    pivots: Vec<usize>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Qi::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Qi::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Qi>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Qi {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Qi) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Qi] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Qi]) -> Vec<Qi> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Qi::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn bareiss(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut prev = Qi::one();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let piv = m.get(r, c).clone();
            for i in r + 1..m.rows {
                let f = m.get(i, c).clone();
                for j in c + 1..m.cols {
                    let x = &(&piv * m.get(i, j)) - &(&f * m.get(r, j));
                    m.set(i, j, &x / &prev);
                }
                m.set(i, c, Qi::zero());
            }
            prev = piv;
            pivots.push(c);
            r += 1;
        }
        Echelon { m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.bareiss().pivots.len()
    }

    /// Basis of `{v : A v = 0}`; its length is `cols - rank`.
    pub fn kernel(&self) -> Vec<Vec<Qi>> {
        let Echelon { m, pivots } = self.bareiss();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.cols).filter(|c| !is_pivot[*c]) {
            let mut v = vec![Qi::zero(); self.cols];
            v[f] = Qi::one();
            for (r, &c) in pivots.iter().enumerate().rev() {
                let mut acc = Qi::zero();
                for j in c + 1..self.cols {
                    if !v[j].is_zero() && !m.get(r, j).is_zero() {
                        acc += &(m.get(r, j) * &v[j]);
                    }
                }
                v[c] = -(&acc / m.get(r, c));
            }
            basis.push(v);
        }
        basis
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn inverse(&self) -> Option<ExactMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = ExactMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Qi::one());
        }
        for c in 0..n {
            let p = (c..n).find(|&i| !aug.get(i, c).is_zero())?;
            aug.swap_rows(c, p);
            let inv = aug.get(c, c).inv();
            for j in 0..2 * n {
                let x = aug.get(c, j) * &inv;
                aug.set(c, j, x);
            }
            for i in 0..n {
                if i == c || aug.get(i, c).is_zero() {
                    continue;
                }
                let f = aug.get(i, c).clone();
                for j in 0..2 * n {
                    let x = aug.get(i, j) - &(&f * aug.get(c, j));
                    aug.set(i, j, x);
                }
            }
        }
        let mut out = ExactMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(out)
    }
}

/// Incrementally maintained row-echelon form of a sparse system with a fixed
/// number of columns. Stored rows are normalized to a leading 1.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon {
    cols: usize,
    rows: BTreeMap<usize, Vec<(usize, Qi)>>,
}

fn axpy(row: &[(usize, Qi)], f: &Qi, pivot_row: &[(usize, Qi)]) -> Vec<(usize, Qi)> {
    // row - f * pivot_row, both sorted by column
    let mut out = Vec::with_capacity(row.len() + pivot_row.len());
    let (mut a, mut b) = (0, 0);
    while a < row.len() || b < pivot_row.len() {
        let ca = row.get(a).map_or(usize::MAX, |x| x.0);
        let cb = pivot_row.get(b).map_or(usize::MAX, |x| x.0);
        if ca < cb {
            out.push(row[a].clone());
            a += 1;
        } else if cb < ca {
            out.push((cb, -(f * &pivot_row[b].1)));
            b += 1;
        } else {
            let x = &row[a].1 - &(f * &pivot_row[b].1);
            if !x.is_zero() {
                out.push((ca, x));
            }
            a += 1;
            b += 1;
        }
    }
    out
}

impl SparseEchelon {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: BTreeMap::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.cols
    }

    /// Reduces `row` against the stored pivots; returns the remainder.
    pub fn reduce(&self, row: impl IntoIterator<Item = (usize, Qi)>) -> Vec<(usize, Qi)> {
        let mut r: Vec<(usize, Qi)> = row.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        r.sort_by_key(|x| x.0);
        // merge duplicate columns
        let mut merged: Vec<(usize, Qi)> = Vec::with_capacity(r.len());
        for (c, x) in r {
            assert!(c < self.cols, "column {c} out of range");
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += &x,
                _ => merged.push((c, x)),
            }
        }
        merged.retain(|(_, x)| !x.is_zero());
        let mut r = merged;
        let mut start = 0;
        while start < r.len() {
            let (c, f) = (r[start].0, r[start].1.clone());
            match self.rows.get(&c) {
                Some(p) => {
                    let tail = axpy(&r[start..], &f, p);
                    r.truncate(start);
                    r.extend(tail);
                }
                None => start += 1,
            }
        }
        r
    }

    /// Adds a row; returns true when the rank grew.
    pub fn insert(&mut self, row: impl IntoIterator<Item = (usize, Qi)>) -> bool {
        if self.is_full() {
            return false;
        }
        let r = self.reduce(row);
        let Some((c, lead)) = r.first().cloned() else {
            return false;
        };
        let inv = lead.inv();
        let normalized = r.into_iter().map(|(j, x)| (j, &x * &inv)).collect();
        self.rows.insert(c, normalized);
        true
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rows.keys().copied().collect()
    }

    /// Dense basis of the right kernel.
    pub fn kernel(&self) -> Vec<Vec<Qi>> {
        // back-substitute into reduced echelon form
        let mut reduced: BTreeMap<usize, Vec<(usize, Qi)>> = BTreeMap::new();
        for (&c, row) in self.rows.iter().rev() {
            let mut r = row.clone();
            let mut k = 1;
            while k < r.len() {
                let (j, f) = (r[k].0, r[k].1.clone());
                if let Some(p) = reduced.get(&j) {
                    let head: Vec<_> = r[..k].to_vec();
                    let tail = axpy(&r[k..], &f, p);
                    r = head;
                    r.extend(tail);
                } else {
                    k += 1;
                }
            }
            reduced.insert(c, r);
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !self.rows.contains_key(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Qi::zero(); self.cols];
            v[f] = Qi::one();
            for (&c, row) in &reduced {
                if let Some((_, x)) = row.iter().find(|(j, _)| *j == f) {
                    v[c] = -x;
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Seeded source of bounded-height rational points.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
    seed: u64,
    height: i64,
}

impl Sampler {
    pub fn new(seed: u64, height: i64) -> Self {
        assert!(height >= 1);
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            height,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn height(&self) -> i64 {
        self.height
    }

    pub fn rational(&mut self) -> Qi {
        let h = self.height;
        let n = self.rng.gen_range(-h..=h);
        let d = self.rng.gen_range(1..=h);
        Qi::from_q(q(n, d))
    }

    /// A nonzero rational.
    pub fn nonzero_rational(&mut self) -> Qi {
        loop {
            let x = self.rational();
            if !x.is_zero() {
                return x;
            }
        }
    }

    pub fn gaussian(&mut self) -> Qi {
        let re = self.rational();
        let im = self.rational();
        Qi::new(re.re, im.re)
    }
}

/// Evaluates a polynomial matrix at a full registry point.
pub fn eval_matrix(m: &[Vec<Poly>], point: &[Qi]) -> ExactMatrix {
    ExactMatrix::from_rows(
        m.iter()
            .map(|row| row.iter().map(|p| p.eval(point)).collect())
            .collect(),
    )
}

/// Rank of a polynomial matrix over its function field, estimated as the
/// maximum exact rank over `trials` random points for the variables in
/// `vars`; all other variables are set to zero.
pub fn generic_rank(m: &[Vec<Poly>], vars: &[usize], sampler: &mut Sampler, trials: usize) -> usize {
    assert!(trials >= 1);
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let Some(reg) = m.iter().flatten().next().map(|p| p.registry().clone()) else {
        return 0;
    };
    let cap = rows.min(cols);
    let mut best = 0;
    for _ in 0..trials {
        let mut point = vec![Qi::zero(); reg.len()];
        for &v in vars {
            point[v] = sampler.gaussian();
        }
        best = best.max(eval_matrix(m, &point).rank());
        if best == cap {
            break;
        }
    }
    best
}

/// Jacobian `∂f_i/∂v_j`.
pub fn jacobian(f: &[Poly], vars: &[usize]) -> Vec<Vec<Poly>> {
    f.iter()
        .map(|p| vars.iter().map(|&v| p.derivative(v)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::Registry;

    fn qi(n: i64) -> Qi {
        Qi::from_int(n)
    }

    #[test]
    fn identity_has_empty_kernel() {
        assert!(ExactMatrix::identity(3).kernel().is_empty());
        assert_eq!(ExactMatrix::identity(3).rank(), 3);
    }

    #[test]
    fn one_by_two_kernel() {
        let a = ExactMatrix::from_rows(vec![vec![qi(1), Qi::i()]]);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        // spanned by (-i, 1)
        assert_eq!(k[0], vec![-Qi::i(), qi(1)]);
    }

    #[test]
    fn sparse_echelon_agrees_with_bareiss() {
        let mut s = Sampler::new(7, 5);
        for _ in 0..20 {
            let rows: Vec<Vec<Qi>> = (0..6)
                .map(|_| {
                    (0..8)
                        .map(|_| {
                            if s.rational().re > q(0, 1) {
                                s.gaussian()
                            } else {
                                Qi::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            let a = ExactMatrix::from_rows(rows.clone());
            let mut e = SparseEchelon::new(8);
            for r in &rows {
                e.insert(r.iter().cloned().enumerate());
            }
            assert_eq!(e.rank(), a.rank());
            let k = e.kernel();
            assert_eq!(k.len() + e.rank(), 8);
            for v in &k {
                assert!(a.mul_vec(v).iter().all(Qi::is_zero));
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let a = ExactMatrix::from_rows(vec![vec![qi(2), Qi::i()], vec![qi(1), qi(3)]]);
        let inv = a.inverse().unwrap();
        for j in 0..2 {
            let col: Vec<Qi> = (0..2).map(|i| inv.get(i, j).clone()).collect();
            let e = a.mul_vec(&col);
            for (i, x) in e.iter().enumerate() {
                assert_eq!(*x, if i == j { qi(1) } else { qi(0) });
            }
        }
        let sing = ExactMatrix::from_rows(vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]]);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn generic_rank_examples() {
        let r = Registry::base(1, 1).with_params(&["t".into(), "u".into()], true);
        let z = Poly::var(&r, r.z(0));
        let zero = Poly::zero(&r);
        let mut s = Sampler::new(1, 8);
        assert_eq!(
            generic_rank(&[vec![z.clone()], vec![zero.clone()]], &[r.z(0)], &mut s, 3),
            1
        );
        assert_eq!(
            generic_rank(&[vec![zero.clone(), zero.clone()]], &[r.z(0)], &mut s, 3),
            0
        );
        // Jacobian of (t, 2itu) has generic rank 2
        let (t, u) = (Poly::var(&r, r.param(0)), Poly::var(&r, r.param(1)));
        let f = vec![t.clone(), (&t * &u).scale(&Qi::from_int(2).mul_i())];
        let vars = [r.param(0), r.param(1)];
        assert_eq!(generic_rank(&jacobian(&f, &vars), &vars, &mut s, 3), 2);
    }
}
