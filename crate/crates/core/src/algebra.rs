//! The finite-dimensional algebra S/(f, n^{N+1}) over F_p with a fixed monomial basis, and
//! matrices over it.
//!
//! Monomials of degree <= N are indexed by degree ascending. The ideal generated by `f` is
//! put in semi-echelon form with pivots at the lowest index, so every monomial has a normal
//! form supported on the non-pivot ("standard") monomials, and normal forms never lower the
//! m-adic order.

use std::collections::HashMap;
use std::sync::Arc;

use crate::linalg::{self, Echelon, SVec};
use crate::series::{degree, Monomial};

const NONE: u32 = u32::MAX;

#[derive(Debug)]
enum CodeIndex {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

#[derive(Debug)]
pub struct TruncAlgebra {
    p: u64,
    nvars: usize,
    trunc: usize,
    monos: Vec<Monomial>,
    mono_deg: Vec<u32>,
    codes: Vec<u64>,
    index: CodeIndex,
    nf: Vec<SVec>,
    std: Vec<u32>,
    std_deg: Vec<u32>,
    std_of_mono: Vec<u32>,
    f_ord: Option<usize>,
    has_relation: bool,
}

/// All exponent vectors in `n` variables of total degree exactly `d`, in descending order of
/// the reversed exponent vector (so powers of the last variable come first).
pub(crate) fn monomials_of_degree(n: usize, d: usize) -> Vec<Monomial> {
    fn rec(n: usize, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if n == 1 {
            let mut m = prefix.clone();
            m.push(d as u32);
            out.push(m);
            return;
        }
        for e in 0..=d {
            prefix.push(e as u32);
            rec(n - 1, d - e, prefix, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| {
        let ra: Vec<u32> = a.iter().rev().copied().collect();
        let rb: Vec<u32> = b.iter().rev().copied().collect();
        rb.cmp(&ra)
    });
    out
}

impl TruncAlgebra {
    /// Builds S^{(N)} / (f). `f` is given as (exponents, residue) pairs; `None` gives the
    /// plain truncated polynomial algebra.
    pub fn new(p: u64, nvars: usize, trunc: usize, f: Option<&[(Monomial, u64)]>) -> Arc<Self> {
        let mut monos = Vec::new();
        for d in 0..=trunc {
            monos.extend(monomials_of_degree(nvars, d));
        }
        let radix = trunc as u64 + 1;
        let code_of = |m: &Monomial| -> u64 { m.iter().rev().fold(0u64, |acc, &e| acc * radix + e as u64) };
        let codes: Vec<u64> = monos.iter().map(code_of).collect();
        let space = radix.checked_pow(nvars as u32).unwrap_or(u64::MAX);
        let index = if space <= 1 << 24 {
            let mut v = vec![NONE; space as usize];
            for (i, &c) in codes.iter().enumerate() {
                v[c as usize] = i as u32;
            }
            CodeIndex::Dense(v)
        } else {
            CodeIndex::Sparse(codes.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect())
        };
        let mono_deg: Vec<u32> = monos.iter().map(|m| degree(m) as u32).collect();
        let nm = monos.len();
        let mut alg = TruncAlgebra {
            p,
            nvars,
            trunc,
            monos,
            mono_deg,
            codes,
            index,
            nf: Vec::new(),
            std: Vec::new(),
            std_deg: Vec::new(),
            std_of_mono: vec![NONE; nm],
            f_ord: None,
            has_relation: false,
        };
        let fvec: Option<SVec> = f.map(|terms| {
            linalg::from_pairs(
                terms
                    .iter()
                    .filter(|(m, _)| degree(m) <= trunc)
                    .map(|(m, c)| (alg.mono_index(m).unwrap(), *c)),
                p,
            )
        });
        let mut ech = Echelon::new(p, nm, false);
        if let Some(fv) = &fvec {
            if let Some(&(lead, _)) = fv.first() {
                let ord = alg.mono_deg[lead as usize] as usize;
                alg.f_ord = Some(ord);
                alg.has_relation = true;
                for m in 0..nm {
                    if alg.mono_deg[m] as usize + ord > trunc {
                        break;
                    }
                    let row: SVec = fv
                        .iter()
                        .filter_map(|&(t, c)| alg.mono_mul(m as u32, t).map(|k| (k, c)))
                        .collect();
                    let row = linalg::from_pairs(row.into_iter().map(|(k, c)| (k, c as u64)), p);
                    ech.push(&row);
                }
            }
        }
        for m in 0..nm {
            if !ech.is_pivot(m as u32) {
                alg.std_of_mono[m] = alg.std.len() as u32;
                alg.std.push(m as u32);
                alg.std_deg.push(alg.mono_deg[m]);
            }
        }
        alg.nf = (0..nm)
            .map(|m| {
                let res = ech.reduce(&vec![(m as u32, 1)]);
                res.into_iter().map(|(k, c)| (alg.std_of_mono[k as usize], c)).collect()
            })
            .collect();
        Arc::new(alg)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Order of the defining relation, if any.
    pub fn relation_order(&self) -> Option<usize> {
        self.f_ord
    }

    pub fn has_relation(&self) -> bool {
        self.has_relation
    }

    /// Dimension over F_p.
    pub fn dim(&self) -> usize {
        self.std.len()
    }

    pub fn mono_index(&self, m: &[u32]) -> Option<u32> {
        if degree(m) > self.trunc {
            return None;
        }
        let radix = self.trunc as u64 + 1;
        let c = m.iter().rev().fold(0u64, |acc, &e| acc * radix + e as u64);
        self.code_lookup(c)
    }

    fn code_lookup(&self, c: u64) -> Option<u32> {
        let i = match &self.index {
            CodeIndex::Dense(v) => *v.get(c as usize)?,
            CodeIndex::Sparse(h) => *h.get(&c)?,
        };
        (i != NONE).then_some(i)
    }

    /// Index of the product of two monomials, `None` past the truncation.
    fn mono_mul(&self, a: u32, b: u32) -> Option<u32> {
        if (self.mono_deg[a as usize] + self.mono_deg[b as usize]) as usize > self.trunc {
            return None;
        }
        self.code_lookup(self.codes[a as usize] + self.codes[b as usize])
    }

    pub fn std_monomial(&self, s: u32) -> &Monomial {
        &self.monos[self.std[s as usize] as usize]
    }

    pub fn std_degree(&self, s: u32) -> usize {
        self.std_deg[s as usize] as usize
    }

    pub fn std_degrees(&self) -> &[u32] {
        &self.std_deg
    }

    /// Number of basis monomials of degree <= j.
    pub fn count_up_to(&self, j: usize) -> usize {
        self.std_deg.partition_point(|&d| d as usize <= j)
    }

    /// Normal form of an arbitrary monomial.
    pub fn nf_monomial(&self, m: &[u32]) -> SVec {
        match self.mono_index(m) {
            Some(i) => self.nf[i as usize].clone(),
            None => Vec::new(),
        }
    }

    /// Element from (exponents, residue) terms.
    pub fn from_terms<'a>(&self, terms: impl IntoIterator<Item = (&'a Monomial, u64)>) -> SVec {
        let mut pairs = Vec::new();
        for (m, c) in terms {
            for &(s, v) in &self.nf_monomial(m) {
                pairs.push((s, v as u64 * (c % self.p) % self.p));
            }
        }
        linalg::from_pairs(pairs, self.p)
    }

    pub fn one(&self) -> SVec {
        self.nf[0].clone()
    }

    pub fn constant(&self, c: u64) -> SVec {
        linalg::scale(&self.one(), c, self.p)
    }

    pub fn var(&self, i: usize) -> SVec {
        let mut m = vec![0; self.nvars];
        m[i] = 1;
        self.nf_monomial(&m)
    }

    /// Minimal degree in the support; `None` for zero.
    pub fn order(&self, a: &SVec) -> Option<usize> {
        a.first().map(|&(s, _)| self.std_degree(s))
    }

    pub fn constant_coeff(&self, a: &SVec) -> u64 {
        match a.first() {
            Some(&(0, c)) => c as u64,
            _ => 0,
        }
    }

    /// Product of a basis monomial with an element.
    pub fn mul_std(&self, s: u32, a: &SVec) -> SVec {
        let ms = self.std[s as usize];
        let mut pairs = Vec::new();
        for &(t, c) in a {
            if let Some(m) = self.mono_mul(ms, self.std[t as usize]) {
                for &(u, v) in &self.nf[m as usize] {
                    pairs.push((u, c as u64 * v as u64 % self.p));
                }
            }
        }
        linalg::from_pairs(pairs, self.p)
    }

    pub fn mul(&self, a: &SVec, b: &SVec) -> SVec {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p = self.p;
        let mut acc = vec![0u64; self.dim()];
        let mut touched = Vec::new();
        for &(s, x) in a {
            let ms = self.std[s as usize];
            let ds = self.std_deg[s as usize];
            for &(t, y) in b {
                if (ds + self.std_deg[t as usize]) as usize > self.trunc {
                    // b is sorted by degree
                    break;
                }
                let Some(m) = self.mono_mul(ms, self.std[t as usize]) else {
                    continue;
                };
                let xy = x as u64 * y as u64 % p;
                for &(u, v) in &self.nf[m as usize] {
                    let k = u as usize;
                    if acc[k] == 0 {
                        touched.push(u);
                    }
                    acc[k] = (acc[k] + xy * v as u64) % p;
                    if acc[k] == 0 {
                        acc[k] = p; // keep the slot marked as touched
                    }
                }
            }
        }
        touched.sort_unstable();
        touched
            .into_iter()
            .filter_map(|u| {
                let v = acc[u as usize] % p;
                (v != 0).then_some((u, v as u32))
            })
            .collect()
    }

    pub fn add(&self, a: &SVec, b: &SVec) -> SVec {
        linalg::axpy(a, 1, b, self.p)
    }

    pub fn sub(&self, a: &SVec, b: &SVec) -> SVec {
        linalg::axpy(a, self.p - 1, b, self.p)
    }

    pub fn neg(&self, a: &SVec) -> SVec {
        linalg::scale(a, self.p - 1, self.p)
    }

    pub fn scale(&self, a: &SVec, c: u64) -> SVec {
        linalg::scale(a, c, self.p)
    }

    pub fn pow(&self, a: &SVec, e: u32) -> SVec {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    /// Inverse of a unit via the geometric series.
    pub fn inv(&self, a: &SVec) -> Option<SVec> {
        let c0 = self.constant_coeff(a);
        if c0 == 0 {
            return None;
        }
        let ci = linalg::inv_mod(c0, self.p);
        let r = self.sub(&self.one(), &self.scale(a, ci));
        let mut sum = self.one();
        let mut pw = self.one();
        for _ in 0..self.trunc {
            pw = self.mul(&pw, &r);
            if pw.is_empty() {
                break;
            }
            sum = self.add(&sum, &pw);
        }
        Some(self.scale(&sum, ci))
    }

    /// Drops basis monomials of degree >= `t`.
    pub fn cut(&self, a: &SVec, t: usize) -> SVec {
        a.iter().copied().take_while(|&(s, _)| self.std_degree(s) < t).collect()
    }

    /// Basis monomials of degree >= 1 and < `limit`.
    pub fn maximal_ideal_basis(&self, limit: usize) -> impl Iterator<Item = u32> + '_ {
        (1..self.dim() as u32).take_while(move |&s| self.std_degree(s) < limit)
    }

    /// Exponents and residues of an element in the standard basis.
    pub fn terms<'a>(&'a self, a: &'a SVec) -> impl Iterator<Item = (&'a Monomial, u64)> + 'a {
        a.iter().map(|&(s, c)| (self.std_monomial(s), c as u64))
    }
}

/// Matrix over a `TruncAlgebra`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<SVec>,
}

impl AMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        AMatrix {
            rows,
            cols,
            data: vec![Vec::new(); rows * cols],
        }
    }

    pub fn identity(alg: &TruncAlgebra, n: usize) -> Self {
        Self::scalar(alg, n, &alg.one())
    }

    pub fn scalar(_alg: &TruncAlgebra, n: usize, a: &SVec) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = a.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<SVec>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        AMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &SVec {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: SVec) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_empty())
    }

    pub fn mul(&self, alg: &TruncAlgebra, other: &AMatrix) -> AMatrix {
        assert_eq!(self.cols, other.rows, "matrix shapes");
        let mut out = AMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_empty() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_empty() {
                        continue;
                    }
                    let prod = alg.mul(a, b);
                    let idx = i * out.cols + j;
                    out.data[idx] = alg.add(&out.data[idx], &prod);
                }
            }
        }
        out
    }

    pub fn add(&self, alg: &TruncAlgebra, other: &AMatrix) -> AMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        AMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| alg.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, alg: &TruncAlgebra, other: &AMatrix) -> AMatrix {
        self.add(alg, &other.neg(alg))
    }

    pub fn neg(&self, alg: &TruncAlgebra) -> AMatrix {
        self.map(|a| alg.neg(a))
    }

    pub fn scale(&self, alg: &TruncAlgebra, c: &SVec) -> AMatrix {
        self.map(|a| alg.mul(a, c))
    }

    pub fn map(&self, f: impl Fn(&SVec) -> SVec) -> AMatrix {
        AMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> AMatrix {
        let mut out = AMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Block diagonal sum.
    pub fn direct_sum(&self, other: &AMatrix) -> AMatrix {
        let mut out = AMatrix::zero(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &AMatrix) -> AMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = AMatrix::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> AMatrix {
        let mut out = AMatrix::zero(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<SVec> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<SVec>]) -> AMatrix {
        let mut out = AMatrix::zero(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, e) in c.iter().enumerate() {
                out.set(i, j, e.clone());
            }
        }
        out
    }

    /// Matrix of constant coefficients.
    pub fn constant_part(&self, alg: &TruncAlgebra) -> linalg::dense::Mat {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| alg.constant_coeff(self.get(i, j))).collect())
            .collect()
    }

    /// Largest entry order among nonzero entries (0 for the zero matrix).
    pub fn max_order(&self, alg: &TruncAlgebra) -> usize {
        self.data.iter().filter_map(|e| alg.order(e)).max().unwrap_or(0)
    }

    /// Smallest entry order, `None` for the zero matrix.
    pub fn min_order(&self, alg: &TruncAlgebra) -> Option<usize> {
        self.data.iter().filter_map(|e| alg.order(e)).min()
    }

    /// All entries in the maximal ideal.
    pub fn is_minimal(&self, alg: &TruncAlgebra) -> bool {
        self.data.iter().all(|e| alg.constant_coeff(e) == 0)
    }

    /// Re-expresses the entries in another algebra with the same variables (normal forms are
    /// recomputed from the standard monomials).
    pub fn transfer(&self, from: &TruncAlgebra, to: &TruncAlgebra) -> AMatrix {
        self.map(|e| to.from_terms(from.terms(e)))
    }
}

/// Flat index of the free-module coordinate `(monomial s, component i)` in rank `r`.
#[inline]
pub fn flat(s: u32, i: usize, r: usize) -> u32 {
    s * r as u32 + i as u32
}

/// Column vector of algebra elements to flat free-module coordinates.
pub fn flatten(col: &[SVec], p: u64) -> SVec {
    let r = col.len();
    let mut v: SVec = Vec::new();
    for (i, e) in col.iter().enumerate() {
        for &(s, c) in e {
            v.push((flat(s, i, r), c));
        }
    }
    v.sort_unstable();
    debug_assert!(v.iter().all(|&(_, c)| (c as u64) < p));
    v
}

pub fn unflatten(v: &SVec, r: usize) -> Vec<SVec> {
    let mut col = vec![Vec::new(); r];
    for &(k, c) in v {
        col[k as usize % r].push(((k as usize / r) as u32, c));
    }
    col
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy_poly(terms: &[([u32; 2], i64)], p: u64) -> Vec<(Monomial, u64)> {
        terms
            .iter()
            .map(|(m, c)| (m.to_vec(), c.rem_euclid(p as i64) as u64))
            .collect()
    }

    #[test]
    fn normal_form_of_cusp_relation() {
        let p = 101;
        let f = xy_poly(&[([7, 0], 1), ([0, 3], -1)], p);
        let a = TruncAlgebra::new(p, 2, 12, Some(&f));
        // y^3 reduces to x^7
        let y3 = a.nf_monomial(&[0, 3]);
        assert_eq!(y3, a.nf_monomial(&[7, 0]));
        assert!(a.from_terms(f.iter().map(|(m, c)| (m, *c))).is_empty());
        // standard monomials are x^i y^j with j < 3
        assert_eq!(a.dim(), (0..=12).map(|d| (d + 1).min(3)).sum::<usize>());
    }

    #[test]
    fn cover_relation_rewrites_u_squared() {
        let p = 7;
        let f: Vec<(Monomial, u64)> = vec![(vec![3, 0], 1), (vec![0, 2], 1)];
        let a = TruncAlgebra::new(p, 2, 8, Some(&f));
        assert_eq!(a.nf_monomial(&[0, 2]), a.scale(&a.nf_monomial(&[3, 0]), p - 1));
    }

    #[test]
    fn multiplication_is_associative_and_commutative() {
        let p = 7;
        let f: Vec<(Monomial, u64)> = vec![(vec![3, 0, 0], 1), (vec![0, 3, 0], 1), (vec![0, 0, 3], 1)];
        let a = TruncAlgebra::new(p, 3, 7, Some(&f));
        let x = a.add(&a.var(0), &a.one());
        let y = a.add(&a.var(1), &a.var(2));
        let z = a.mul(&a.var(2), &a.var(2));
        assert_eq!(a.mul(&x, &y), a.mul(&y, &x));
        assert_eq!(a.mul(&a.mul(&x, &y), &z), a.mul(&x, &a.mul(&y, &z)));
        let inv = a.inv(&x).unwrap();
        assert_eq!(a.mul(&inv, &x), a.one());
    }

    #[test]
    fn plain_truncation_has_all_monomials() {
        let a = TruncAlgebra::new(7, 3, 4, None);
        assert_eq!(a.dim(), 35);
        assert_eq!(a.count_up_to(1), 4);
        assert!(a.mul(&a.pow(&a.var(0), 3), &a.pow(&a.var(1), 2)).is_empty());
    }
}
