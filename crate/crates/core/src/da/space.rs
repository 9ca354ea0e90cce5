//! Monomial basis shared by every polynomial of a given `(num_vars, order)`.
//!
//! Monomials are enumerated in graded order: all degree-0 terms, then degree 1,
//! and so on; within a degree, exponent tuples are sorted in descending
//! lexicographic order (`x0` before `x1`). The enumeration is fixed for a given
//! `(v, k)`, so a coefficient vector indexed by it is a canonical form.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// An exponent multi-index, one entry per variable.
pub type Exponents = Vec<u8>;

/// Precomputed tables for a `(num_vars, order)` pair.
pub struct Basis {
    num_vars: usize,
    order: usize,
    monomials: Vec<Exponents>,
    degrees: Vec<usize>,
    lookup: HashMap<Exponents, usize>,
    /// `degree_start[d]` is the index of the first monomial of degree `d`;
    /// `degree_start[order + 1] == len`.
    degree_start: Vec<usize>,
    /// For each monomial `m > 0`: `(parent, var)` with `m = parent * x_var`.
    factor: Vec<(usize, usize)>,
    /// Row `i`: pairs `(j, target)` with `deg(i) + deg(j) <= order`.
    products: Vec<Vec<(u32, u32)>>,
    /// Entry `[m * num_vars + i]`: index of `m / x_i` if `x_i | m`.
    quotient: Vec<Option<usize>>,
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Basis")
            .field("num_vars", &self.num_vars)
            .field("order", &self.order)
            .field("len", &self.monomials.len())
            .finish()
    }
}

fn enumerate_degree(num_vars: usize, degree: usize) -> Vec<Exponents> {
    // descending lexicographic: put as much as possible on x0 first
    fn rec(var: usize, remaining: usize, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        let n = cur.len();
        if var == n - 1 {
            cur[var] = remaining as u8;
            out.push(cur.clone());
            cur[var] = 0;
            return;
        }
        for e in (0..=remaining).rev() {
            cur[var] = e as u8;
            rec(var + 1, remaining - e, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u8; num_vars];
    rec(0, degree, &mut cur, &mut out);
    out
}

impl Basis {
    fn build(num_vars: usize, order: usize) -> Basis {
        assert!(num_vars > 0 && order > 0 && order < 64);
        let mut monomials = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(monomials.len());
            monomials.extend(enumerate_degree(num_vars, d));
        }
        degree_start.push(monomials.len());
        let degrees: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .collect();
        let lookup: HashMap<Exponents, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let n = monomials.len();
        let mut factor = vec![(0usize, 0usize); n];
        let mut quotient = vec![None; n * num_vars];
        for (idx, m) in monomials.iter().enumerate() {
            for var in 0..num_vars {
                if m[var] > 0 {
                    let mut q = m.clone();
                    q[var] -= 1;
                    quotient[idx * num_vars + var] = Some(lookup[&q]);
                }
            }
            if idx > 0 {
                let var = m.iter().rposition(|&e| e > 0).unwrap();
                factor[idx] = (quotient[idx * num_vars + var].unwrap(), var);
            }
        }

        let mut products = Vec::with_capacity(n);
        let mut sum = vec![0u8; num_vars];
        for i in 0..n {
            let room = order - degrees[i];
            let end = degree_start[room + 1];
            let mut row = Vec::with_capacity(end);
            for j in 0..end {
                for v in 0..num_vars {
                    sum[v] = monomials[i][v] + monomials[j][v];
                }
                row.push((j as u32, lookup[&sum] as u32));
            }
            products.push(row);
        }

        Basis {
            num_vars,
            order,
            monomials,
            degrees,
            lookup,
            degree_start,
            factor,
            products,
            quotient,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of monomials of degree `<= order`.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.monomials[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.degrees[idx]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.lookup.get(exps).copied()
    }

    /// Range of indices holding the monomials of exactly degree `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        self.degree_start[d]..self.degree_start[d + 1]
    }

    /// Index of the monomial `x_var`.
    pub fn var_index(&self, var: usize) -> usize {
        1 + var
    }

    pub(crate) fn factor(&self, idx: usize) -> (usize, usize) {
        self.factor[idx]
    }

    pub(crate) fn product_row(&self, i: usize) -> &[(u32, u32)] {
        &self.products[i]
    }

    pub(crate) fn quotient(&self, idx: usize, var: usize) -> Option<usize> {
        self.quotient[idx * self.num_vars + var]
    }

    /// Evaluates every monomial at `point`, in basis order.
    pub(crate) fn monomial_values(&self, point: &[f64]) -> Vec<f64> {
        let mut vals = vec![0.0; self.len()];
        vals[0] = 1.0;
        for idx in 1..self.len() {
            let (parent, var) = self.factor[idx];
            vals[idx] = vals[parent] * point[var];
        }
        vals
    }
}

type BasisCache = Mutex<HashMap<(usize, usize), Arc<Basis>>>;
static CACHE: OnceLock<BasisCache> = OnceLock::new();

/// Handle on the (immutable, shared) basis for `(num_vars, order)`.
///
/// Tables are built once per pair and memoized; nothing about them can change
/// after construction, so every polynomial simply carries its own `Arc`.
pub fn basis(num_vars: usize, order: usize) -> Arc<Basis> {
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((num_vars, order))
        .or_insert_with(|| Arc::new(Basis::build(num_vars, order)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sizes_match_binomials() {
        for (v, k) in [(1, 3), (2, 4), (6, 4), (8, 4), (3, 7)] {
            let b = basis(v, k);
            assert_eq!(b.len(), binom(v + k, k));
            let pairs: usize = (0..b.len()).map(|i| b.product_row(i).len()).sum();
            assert_eq!(pairs, binom(2 * v + k, k));
        }
    }

    #[test]
    fn graded_order_and_variables() {
        let b = basis(3, 2);
        assert_eq!(b.exponents(0), &[0, 0, 0]);
        assert_eq!(b.exponents(1), &[1, 0, 0]);
        assert_eq!(b.exponents(2), &[0, 1, 0]);
        assert_eq!(b.exponents(3), &[0, 0, 1]);
        assert_eq!(b.exponents(4), &[2, 0, 0]);
        assert_eq!(b.degree_range(2), 4..10);
        for i in 0..b.len() {
            assert_eq!(b.index_of(b.exponents(i)), Some(i));
        }
    }

    #[test]
    fn monomial_values_are_products() {
        let b = basis(2, 3);
        let vals = b.monomial_values(&[2.0, 3.0]);
        for i in 0..b.len() {
            let e = b.exponents(i);
            let expect = 2f64.powi(e[0] as i32) * 3f64.powi(e[1] as i32);
            assert_eq!(vals[i], expect);
        }
    }
}
