//! Linear algebra over F_p: sparse semi-echelon forms with combination tracking, and
//! small dense helpers.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::field::pow_mod;

/// Sparse vector: strictly increasing indices, values in `1..p`.
pub type SVec = Vec<(u32, u32)>;

pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a % p, p - 2, p)
}

/// `a + c*b` for sparse vectors.
pub fn axpy(a: &SVec, c: u64, b: &SVec, p: u64) -> SVec {
    let c = c % p;
    if c == 0 {
        return a.clone();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ia = a.get(i).map(|x| x.0).unwrap_or(u32::MAX);
        let jb = b.get(j).map(|x| x.0).unwrap_or(u32::MAX);
        if ia < jb {
            out.push(a[i]);
            i += 1;
        } else if jb < ia {
            out.push((jb, ((b[j].1 as u64 * c) % p) as u32));
            j += 1;
        } else {
            let v = (a[i].1 as u64 + b[j].1 as u64 * c) % p;
            if v != 0 {
                out.push((ia, v as u32));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale(a: &SVec, c: u64, p: u64) -> SVec {
    let c = c % p;
    if c == 0 {
        return Vec::new();
    }
    a.iter().map(|&(i, v)| (i, ((v as u64 * c) % p) as u32)).collect()
}

/// Builds a normalized sparse vector from unsorted (index, value) pairs, summing duplicates.
pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u64)>, p: u64) -> SVec {
    let mut m: HashMap<u32, u64> = HashMap::new();
    for (i, v) in pairs {
        let e = m.entry(i).or_insert(0);
        *e = (*e + v % p) % p;
    }
    let mut out: SVec = m
        .into_iter()
        .filter(|&(_, v)| v != 0)
        .map(|(i, v)| (i, v as u32))
        .collect();
    out.sort_unstable();
    out
}

/// Result of inserting a vector into an echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inserted {
    /// The vector was independent and now owns this pivot column.
    Pivot(u32),
    /// The vector was dependent; the tag combination sums to zero (only when tags are tracked).
    Dependent(SVec),
}

/// Semi-echelon basis of a subspace of F_p^ncols. Pivots are the smallest index in each row,
/// so with degree-ascending column orders this is elimination in a local order.
#[derive(Clone, Debug)]
pub struct Echelon {
    p: u64,
    ncols: usize,
    rows: Vec<SVec>,
    tags: Vec<SVec>,
    track: bool,
    pivot_row: Vec<u32>,
}

const NONE: u32 = u32::MAX;

struct Accum {
    dense: Vec<u64>,
    touched: Vec<u32>,
    heap: BinaryHeap<Reverse<u32>>,
    queued: Vec<bool>,
}

impl Accum {
    fn new(n: usize) -> Self {
        Accum {
            dense: vec![0; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
            queued: vec![false; n],
        }
    }

    fn add(&mut self, i: u32, v: u64, p: u64) {
        let k = i as usize;
        if !self.queued[k] {
            self.queued[k] = true;
            self.touched.push(i);
            self.heap.push(Reverse(i));
        }
        self.dense[k] = (self.dense[k] + v) % p;
    }
}

impl Echelon {
    pub fn new(p: u64, ncols: usize, track_tags: bool) -> Self {
        Echelon {
            p,
            ncols,
            rows: Vec::new(),
            tags: Vec::new(),
            track: track_tags,
            pivot_row: vec![NONE; ncols],
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SVec] {
        &self.rows
    }

    pub fn row_tags(&self) -> &[SVec] {
        &self.tags
    }

    pub fn is_pivot(&self, col: u32) -> bool {
        self.pivot_row[col as usize] != NONE
    }

    pub fn pivot(row: &SVec) -> u32 {
        row[0].0
    }

    pub fn pivots(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.iter().map(Self::pivot)
    }

    /// Fully reduces `v`, returning the residue (supported on non-pivot columns) and the
    /// combination `c` of row tags with `v = residue + sum_r c_r * tag_r` in terms of inputs.
    fn reduce_inner(&self, v: &SVec, want_tags: bool) -> (SVec, HashMap<u32, u64>) {
        let p = self.p;
        let mut acc = Accum::new(self.ncols);
        for &(i, x) in v {
            acc.add(i, x as u64, p);
        }
        let mut comb: HashMap<u32, u64> = HashMap::new();
        let mut residue = Vec::new();
        while let Some(Reverse(i)) = acc.heap.pop() {
            let k = i as usize;
            let c = acc.dense[k];
            if c == 0 {
                continue;
            }
            let r = self.pivot_row[k];
            if r == NONE {
                residue.push((i, c as u32));
                continue;
            }
            let row = &self.rows[r as usize];
            let neg = p - c;
            for &(j, y) in row {
                acc.add(j, (y as u64 * neg) % p, p);
            }
            if want_tags && self.track {
                for &(t, y) in &self.tags[r as usize] {
                    let e = comb.entry(t).or_insert(0);
                    *e = (*e + y as u64 * c) % p;
                }
            }
        }
        (residue, comb)
    }

    pub fn reduce(&self, v: &SVec) -> SVec {
        self.reduce_inner(v, false).0
    }

    pub fn contains(&self, v: &SVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Residue and the input combination: `v = residue + sum_j x_j * input_j`.
    pub fn reduce_with_combination(&self, v: &SVec) -> (SVec, SVec) {
        assert!(self.track, "tags not tracked");
        let (res, comb) = self.reduce_inner(v, true);
        (res, from_pairs(comb, self.p))
    }

    /// Expresses `v` as a combination of inserted inputs if it lies in their span.
    pub fn solve(&self, v: &SVec) -> Option<SVec> {
        let (res, comb) = self.reduce_with_combination(v);
        if res.is_empty() {
            Some(comb)
        } else {
            None
        }
    }

    /// Inserts `v` carrying the tag `e_tag`.
    pub fn insert(&mut self, v: &SVec, tag: u32) -> Inserted {
        let p = self.p;
        let (res, comb) = self.reduce_inner(v, self.track);
        if res.is_empty() {
            if !self.track {
                return Inserted::Dependent(Vec::new());
            }
            // v - sum comb = 0
            let pairs = comb
                .into_iter()
                .map(|(t, x)| (t, (p - x) % p))
                .chain(std::iter::once((tag, 1)));
            return Inserted::Dependent(from_pairs(pairs, p));
        }
        let lead = res[0].1 as u64;
        let inv = inv_mod(lead, p);
        let row = scale(&res, inv, p);
        let piv = row[0].0;
        self.pivot_row[piv as usize] = self.rows.len() as u32;
        self.rows.push(row);
        if self.track {
            let pairs = comb
                .into_iter()
                .map(|(t, x)| (t, ((p - x) % p) * inv % p))
                .chain(std::iter::once((tag, inv)));
            self.tags.push(from_pairs(pairs, p));
        }
        Inserted::Pivot(piv)
    }

    /// Inserts without a tag; returns whether the rank grew.
    pub fn push(&mut self, v: &SVec) -> bool {
        let tag = self.rows.len() as u32;
        matches!(self.insert(v, tag), Inserted::Pivot(_))
    }
}

/// Kernel of the map sending input `j` to `images[j]`. Inputs are inserted from the highest
/// index down, so each kernel vector's smallest index is distinct and every other index in it
/// is larger.
pub fn kernel(images: &[SVec], ncols: usize, p: u64) -> Vec<SVec> {
    let mut ech = Echelon::new(p, ncols, true);
    let mut ker = Vec::new();
    for j in (0..images.len()).rev() {
        if let Inserted::Dependent(k) = ech.insert(&images[j], j as u32) {
            ker.push(k);
        }
    }
    ker.reverse();
    ker
}

/// Rank of a list of vectors.
pub fn rank(vs: &[SVec], ncols: usize, p: u64) -> usize {
    let mut ech = Echelon::new(p, ncols, false);
    for v in vs {
        ech.push(v);
    }
    ech.rank()
}

/// Dense helpers for small matrices over F_p.
pub mod dense {
    use super::inv_mod;

    pub type Mat = Vec<Vec<u64>>;

    pub fn identity(n: usize) -> Mat {
        (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect()
    }

    pub fn mul(a: &Mat, b: &Mat, p: u64) -> Mat {
        let m = b.first().map(|r| r.len()).unwrap_or(0);
        a.iter()
            .map(|row| {
                (0..m)
                    .map(|j| {
                        row.iter()
                            .zip(b.iter())
                            .fold(0u64, |s, (&x, brow)| (s + x * brow[j]) % p)
                    })
                    .collect()
            })
            .collect()
    }

    /// Row-reduces in place and returns the pivot columns.
    pub fn rref(a: &mut Mat, p: u64) -> Vec<usize> {
        let rows = a.len();
        let cols = a.first().map(|r| r.len()).unwrap_or(0);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(k) = (r..rows).find(|&k| !a[k][c].is_multiple_of(p)) else {
                continue;
            };
            a.swap(r, k);
            let inv = inv_mod(a[r][c], p);
            for x in a[r].iter_mut() {
                *x = *x * inv % p;
            }
            for k in 0..rows {
                if k != r && a[k][c] != 0 {
                    let f = a[k][c];
                    for j in 0..cols {
                        a[k][j] = (a[k][j] + (p - f) * a[r][j]) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(a: &Mat, p: u64) -> usize {
        let mut b = a.clone();
        rref(&mut b, p).len()
    }

    pub fn is_invertible(a: &Mat, p: u64) -> bool {
        a.len() == a.first().map(|r| r.len()).unwrap_or(0) && rank(a, p) == a.len()
    }

    pub fn inverse(a: &Mat, p: u64) -> Option<Mat> {
        let n = a.len();
        let mut aug: Mat = a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| u64::from(i == j)));
                r
            })
            .collect();
        let piv = rref(&mut aug, p);
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Basis of the right null space `{x : a x = 0}`.
    pub fn nullspace(a: &Mat, ncols: usize, p: u64) -> Vec<Vec<u64>> {
        let mut b = a.clone();
        let piv = rref(&mut b, p);
        let free: Vec<usize> = (0..ncols).filter(|c| !piv.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![0u64; ncols];
                x[f] = 1;
                for (r, &pc) in piv.iter().enumerate() {
                    x[pc] = (p - b[r][f] % p) % p;
                }
                x
            })
            .collect()
    }

    /// Solves `a x = b` for one solution.
    pub fn solve(a: &Mat, b: &[u64], p: u64) -> Option<Vec<u64>> {
        let ncols = a.first().map(|r| r.len()).unwrap_or(0);
        let mut aug: Mat = a
            .iter()
            .zip(b)
            .map(|(r, &v)| {
                let mut r = r.clone();
                r.push(v % p);
                r
            })
            .collect();
        let piv = rref(&mut aug, p);
        if piv.last() == Some(&ncols) {
            return None;
        }
        let mut x = vec![0; ncols];
        for (r, &c) in piv.iter().enumerate() {
            x[c] = aug[r][ncols];
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u64 = 101;

    fn dense_to_sparse(v: &[u64]) -> SVec {
        v.iter()
            .enumerate()
            .filter(|(_, &x)| x % P != 0)
            .map(|(i, &x)| (i as u32, (x % P) as u32))
            .collect()
    }

    #[test]
    fn echelon_basic() {
        let mut e = Echelon::new(P, 3, true);
        assert_eq!(e.insert(&vec![(0, 1), (1, 2)], 0), Inserted::Pivot(0));
        assert_eq!(e.insert(&vec![(1, 1)], 1), Inserted::Pivot(1));
        match e.insert(&vec![(0, 2), (1, 7)], 2) {
            Inserted::Dependent(k) => assert_eq!(k, vec![(0, 99), (1, 98), (2, 1)]),
            other => panic!("{other:?}"),
        }
        assert_eq!(e.reduce(&vec![(0, 1), (2, 5)]), vec![(2, 5)]);
        assert_eq!(e.solve(&vec![(0, 3), (1, 9)]), Some(vec![(0, 3), (1, 3)]));
    }

    #[test]
    fn dense_inverse() {
        let a = vec![vec![1, 2], vec![3, 4]];
        let inv = dense::inverse(&a, P).unwrap();
        assert_eq!(dense::mul(&a, &inv, P), dense::identity(2));
        assert!(dense::inverse(&vec![vec![1, 2], vec![2, 4]], P).is_none());
    }

    proptest! {
        #[test]
        fn kernel_vectors_vanish(m in prop::collection::vec(prop::collection::vec(0u64..4, 5), 1..8)) {
            let images: Vec<SVec> = m.iter().map(|r| dense_to_sparse(r)).collect();
            let ker = kernel(&images, 5, P);
            prop_assert_eq!(ker.len() + rank(&images, 5, P), images.len());
            let mut leads = Vec::new();
            for k in &ker {
                let mut s: SVec = Vec::new();
                for &(j, c) in k {
                    s = axpy(&s, c as u64, &images[j as usize], P);
                }
                prop_assert!(s.is_empty());
                leads.push(k[0].0);
            }
            leads.dedup();
            prop_assert_eq!(leads.len(), ker.len());
        }

        #[test]
        fn solve_roundtrip(m in prop::collection::vec(prop::collection::vec(0u64..5, 6), 1..6),
                           x in prop::collection::vec(0u64..5, 6)) {
            let images: Vec<SVec> = m.iter().map(|r| dense_to_sparse(r)).collect();
            let mut e = Echelon::new(P, 6, true);
            for (j, v) in images.iter().enumerate() {
                e.insert(v, j as u32);
            }
            let mut target: SVec = Vec::new();
            for (j, v) in images.iter().enumerate() {
                target = axpy(&target, x[j % x.len()], v, P);
            }
            let sol = e.solve(&target).expect("in span");
            let mut back: SVec = Vec::new();
            for &(j, c) in &sol {
                back = axpy(&back, c as u64, &images[j as usize], P);
            }
            prop_assert_eq!(back, target);
        }
    }
}
