//! Linear systems obtained by matching coefficients of polynomial
//! identities. Column `c` contributes `x_c · eqs[k]` to equation `k`; a row
//! is one `(monomial, k)` coefficient. With `real` unknowns each complex row
//! splits into its real and imaginary parts.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::linalg::SparseEchelon;
use crate::poly::{Monomial, Poly};
use crate::scalar::Qi;

#[derive(Clone, Debug)]
pub struct MatchingSystem {
    cols: usize,
    real: bool,
    rows: BTreeMap<(Monomial, usize), Vec<(usize, Qi)>>,
}

impl MatchingSystem {
    pub fn new(cols: usize, real: bool) -> Self {
        Self {
            cols,
            real,
            rows: BTreeMap::new(),
        }
    }

    pub fn from_columns(columns: &[Vec<Poly>], real: bool) -> Self {
        let mut s = Self::new(columns.len(), real);
        for (c, eqs) in columns.iter().enumerate() {
            s.add_column(c, eqs);
        }
        s
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len() * if self.real { 2 } else { 1 }
    }

    pub fn add_column(&mut self, col: usize, eqs: &[Poly]) {
        assert!(col < self.cols);
        for (k, p) in eqs.iter().enumerate() {
            for (m, c) in p.terms() {
                self.rows.entry((m.clone(), k)).or_default().push((col, c.clone()));
            }
        }
    }

    fn real_rows(&self, entries: &[(usize, Qi)]) -> [Vec<(usize, Qi)>; 2] {
        let re = entries
            .iter()
            .filter(|(_, x)| !x.re.is_zero())
            .map(|(c, x)| (*c, Qi::from_q(x.re.clone())))
            .collect();
        let im = entries
            .iter()
            .filter(|(_, x)| !x.im.is_zero())
            .map(|(c, x)| (*c, Qi::from_q(x.im.clone())))
            .collect();
        [re, im]
    }

    /// Echelon form of all rows whose monomial degree is `<= max_deg`,
    /// calling `checkpoint(deg, &echelon)` after the last row of each degree.
    pub fn eliminate(&self, max_deg: u32, mut checkpoint: impl FnMut(u32, &SparseEchelon)) -> SparseEchelon {
        let mut e = SparseEchelon::new(self.cols);
        let mut current: Option<u32> = None;
        for ((m, _), entries) in &self.rows {
            let deg = m.deg();
            if deg > max_deg {
                break;
            }
            if let Some(c) = current {
                if c != deg {
                    checkpoint(c, &e);
                }
            }
            current = Some(deg);
            if e.is_full() {
                continue;
            }
            if self.real {
                for r in self.real_rows(entries) {
                    e.insert(r);
                }
            } else {
                e.insert(entries.iter().cloned());
            }
        }
        if let Some(c) = current {
            checkpoint(c, &e);
        }
        e
    }

    /// Kernel dimension when matching through each degree in `degrees`.
    pub fn kernel_dims(&self, degrees: &[u32]) -> Vec<usize> {
        let top = degrees.iter().copied().max().unwrap_or(0);
        let mut rank_at: BTreeMap<u32, usize> = BTreeMap::new();
        self.eliminate(top, |d, e| {
            rank_at.insert(d, e.rank());
        });
        degrees
            .iter()
            .map(|&d| {
                let rank = rank_at.range(..=d).next_back().map_or(0, |(_, r)| *r);
                self.cols - rank
            })
            .collect()
    }

    pub fn kernel(&self, max_deg: u32) -> Vec<Vec<Qi>> {
        self.eliminate(max_deg, |_, _| {}).kernel()
    }
}

/// `Σ_c v_c · columns[c]`.
pub fn combine(columns: &[Vec<Poly>], v: &[Qi]) -> Vec<Poly> {
    let k = columns.first().map_or(0, Vec::len);
    let mut out: Vec<Option<Poly>> = vec![None; k];
    for (col, x) in columns.iter().zip(v) {
        if x.is_zero() {
            continue;
        }
        for (o, p) in out.iter_mut().zip(col) {
            let t = p.scale(x);
            *o = Some(match o.take() {
                Some(acc) => acc + t,
                None => t,
            });
        }
    }
    out.into_iter()
        .zip(columns.first().into_iter().flatten().cycle())
        .map(|(o, p)| o.unwrap_or_else(|| Poly::zero(p.registry())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::Registry;

    #[test]
    fn real_unknowns_split_rows() {
        // x·1 + y·i = 0 over the reals forces x = y = 0, over C it does not
        let r = Registry::base(1, 1);
        let cols = vec![vec![Poly::one(&r)], vec![Poly::constant(&r, Qi::i())]];
        assert_eq!(MatchingSystem::from_columns(&cols, true).kernel_dims(&[0]), vec![0]);
        assert_eq!(MatchingSystem::from_columns(&cols, false).kernel_dims(&[0]), vec![1]);
    }

    #[test]
    fn dims_by_degree_are_nonincreasing() {
        let r = Registry::base(1, 1);
        let z = Poly::var(&r, 0);
        // columns z, z^2, z + z^3
        let cols = vec![vec![z.clone()], vec![z.pow(2)], vec![&z + &z.pow(3)]];
        let s = MatchingSystem::from_columns(&cols, false);
        assert_eq!(s.kernel_dims(&[0, 1, 2, 3]), vec![3, 2, 1, 0]);
        let k = s.kernel(2);
        assert_eq!(k.len(), 1);
        let c = combine(&cols, &k[0]);
        assert!(c[0].truncate(2).is_zero());
    }
}
