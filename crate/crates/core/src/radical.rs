//! Finite-dimensional algebras over F_p given by structure constants: Jacobson radical,
//! locality, number of indecomposable summands and idempotents.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::dense::{self, Mat};
use crate::poly::{self, Poly};

/// Algebra with basis e_0..e_{n-1}; `table[a][b]` holds the coordinates of e_a * e_b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FdAlgebra {
    p: u64,
    table: Vec<Vec<Vec<u64>>>,
    one: Vec<u64>,
}

pub type Elem = Vec<u64>;

/// Subspace in reduced row echelon form.
#[derive(Clone, Debug)]
struct Subspace {
    rows: Mat,
    pivots: Vec<usize>,
    p: u64,
}

impl Subspace {
    fn new(mut rows: Mat, n: usize, p: u64) -> Self {
        rows.retain(|r| r.iter().any(|&c| c != 0));
        if rows.is_empty() {
            return Subspace {
                rows,
                pivots: Vec::new(),
                p,
            };
        }
        let pivots = dense::rref(&mut rows, p);
        rows.truncate(pivots.len());
        debug_assert!(rows.iter().all(|r| r.len() == n));
        Subspace { rows, pivots, p }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[u64]) -> Elem {
        let p = self.p;
        let mut v = v.to_vec();
        for (r, &c) in self.rows.iter().zip(&self.pivots) {
            let f = v[c];
            if f != 0 {
                for (x, y) in v.iter_mut().zip(r) {
                    *x = (*x + p - f * y % p) % p;
                }
            }
        }
        v
    }

    fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&c| c == 0)
    }
}

/// Verdict of the indecomposability test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Decomposition {
    /// The algebra is local.
    Yes {
        radical_dim: usize,
    },
    /// A nontrivial idempotent (coordinates in the algebra basis).
    No {
        idempotent: Elem,
        summands: usize,
    },
    Inconclusive {
        reason: String,
    },
}

impl FdAlgebra {
    pub fn new(p: u64, table: Vec<Vec<Vec<u64>>>, one: Elem) -> Self {
        FdAlgebra { p, table, one }
    }

    pub fn dim(&self) -> usize {
        self.one.len()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn one(&self) -> &Elem {
        &self.one
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.dim()]
    }

    pub fn basis(&self, a: usize) -> Elem {
        let mut e = self.zero();
        e[a] = 1;
        e
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Elem {
        x.iter().zip(y).map(|(a, b)| (a + b) % self.p).collect()
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Elem {
        x.iter().zip(y).map(|(a, b)| (a + self.p - b) % self.p).collect()
    }

    pub fn scale(&self, x: &[u64], c: u64) -> Elem {
        x.iter().map(|a| a * c % self.p).collect()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Elem {
        let p = self.p;
        let mut out = self.zero();
        for (a, &xa) in x.iter().enumerate() {
            if xa == 0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate() {
                if yb == 0 {
                    continue;
                }
                let c = xa * yb % p;
                for (o, t) in out.iter_mut().zip(&self.table[a][b]) {
                    *o = (*o + c * t) % p;
                }
            }
        }
        out
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> Elem {
        let mut result = self.one.clone();
        let mut b = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        result
    }

    pub fn is_idempotent(&self, e: &[u64]) -> bool {
        self.mul(e, e) == e
    }

    /// Checks associativity and the unit on basis elements.
    pub fn is_consistent(&self) -> bool {
        let n = self.dim();
        (0..n).all(|a| {
            self.mul(&self.one, &self.basis(a)) == self.basis(a) && self.mul(&self.basis(a), &self.one) == self.basis(a)
        }) && (0..n).all(|a| {
            (0..n).all(|b| {
                (0..n).all(|c| {
                    let (x, y, z) = (self.basis(a), self.basis(b), self.basis(c));
                    self.mul(&self.mul(&x, &y), &z) == self.mul(&x, &self.mul(&y, &z))
                })
            })
        })
    }

    /// Matrix of left multiplication (column b = x * e_b).
    fn left_matrix(&self, x: &[u64]) -> Mat {
        let n = self.dim();
        let cols: Vec<Elem> = (0..n).map(|b| self.mul(x, &self.basis(b))).collect();
        (0..n).map(|i| (0..n).map(|b| cols[b][i]).collect()).collect()
    }

    /// g_i(x) = Tr(L^{p^i}) / p^i mod p, with L the integer lift of left multiplication.
    /// Only called with p^i <= dim, which keeps every intermediate inside u64.
    fn trace_form(&self, x: &[u64], i: u32) -> u64 {
        let p = self.p;
        let modulus = p.pow(i + 1);
        let n = self.dim();
        let mul = |a: &Mat, b: &Mat| -> Mat {
            let mut out = vec![vec![0u64; n]; n];
            for (r, row) in a.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    if v == 0 {
                        continue;
                    }
                    for (o, &w) in out[r].iter_mut().zip(&b[k]) {
                        *o = (*o + v * w) % modulus;
                    }
                }
            }
            out
        };
        let mut e = p.pow(i);
        let mut result = dense::identity(n);
        let mut b = self.left_matrix(x);
        while e > 0 {
            if e & 1 == 1 {
                result = mul(&result, &b);
            }
            e >>= 1;
            if e > 0 {
                b = mul(&b, &b);
            }
        }
        let tr = (0..n).fold(0u64, |acc, k| (acc + result[k][k]) % modulus);
        (tr / p.pow(i)) % p
    }

    /// Basis of the Jacobson radical (trace-form filtration in characteristic p).
    pub fn radical(&self) -> Vec<Elem> {
        let n = self.dim();
        let p = self.p;
        if n == 0 {
            return Vec::new();
        }
        let mut levels = 0u32;
        while (p as u128).pow(levels + 1) <= n as u128 {
            levels += 1;
        }
        // g_0 is linear: the trace of left multiplication by each basis element
        let traces: Vec<u64> = (0..n)
            .map(|c| (0..n).fold(0, |acc, k| (acc + self.table[c][k][k]) % p))
            .collect();
        let g0 = |y: &Elem| y.iter().zip(&traces).fold(0, |acc, (a, t)| (acc + a * t) % p);
        let mut current: Vec<Elem> = (0..n).map(|a| self.basis(a)).collect();
        for i in 0..=levels {
            if current.is_empty() {
                break;
            }
            // G[b][a] = g_i(x_a * e_b)
            let g: Mat = (0..n)
                .map(|b| {
                    let y = self.basis(b);
                    current
                        .iter()
                        .map(|x| {
                            let xy = self.mul(x, &y);
                            if i == 0 {
                                g0(&xy)
                            } else {
                                self.trace_form(&xy, i)
                            }
                        })
                        .collect()
                })
                .collect();
            let null = dense::nullspace(&g, current.len(), p);
            current = null
                .iter()
                .map(|c| {
                    let mut v = self.zero();
                    for (coef, x) in c.iter().zip(&current) {
                        v = self.add(&v, &self.scale(x, *coef));
                    }
                    v
                })
                .collect();
        }
        current
    }

    /// Basis (modulo `rad`) of the centre of A/rad.
    fn center_mod(&self, rad: &Subspace) -> Vec<Elem> {
        let n = self.dim();
        let p = self.p;
        // rows: for each basis y_b and each coordinate, reduced commutator coefficient
        let mut rows: Mat = Vec::new();
        let comms: Vec<Vec<Elem>> = (0..n)
            .map(|a| {
                let x = self.basis(a);
                (0..n)
                    .map(|b| {
                        let y = self.basis(b);
                        rad.reduce(&self.sub(&self.mul(&x, &y), &self.mul(&y, &x)))
                    })
                    .collect()
            })
            .collect();
        for b in 0..n {
            for k in 0..n {
                rows.push((0..n).map(|a| comms[a][b][k]).collect());
            }
        }
        let null = dense::nullspace(&rows, n, p);
        let mut span = rad.rows.clone();
        let base = Subspace::new(span.clone(), n, p).dim();
        let mut out = Vec::new();
        for v in null {
            span.push(v.clone());
            if Subspace::new(span.clone(), n, p).dim() > base + out.len() {
                out.push(rad.reduce(&v));
            } else {
                span.pop();
            }
        }
        out
    }

    /// Fixed points of Frobenius on a commutative subalgebra spanned (mod rad) by `basis`.
    fn frobenius_fixed(&self, basis: &[Elem], rad: &Subspace) -> Vec<Elem> {
        let n = self.dim();
        let p = self.p;
        if basis.is_empty() {
            return Vec::new();
        }
        let images: Vec<Elem> = basis
            .iter()
            .map(|z| rad.reduce(&self.sub(&self.pow(z, p), z)))
            .collect();
        let m: Mat = (0..n).map(|k| images.iter().map(|v| v[k]).collect()).collect();
        let reps: Mat = dense::nullspace(&m, basis.len(), p)
            .into_iter()
            .map(|c| {
                let mut v = self.zero();
                for (coef, z) in c.iter().zip(basis) {
                    v = self.add(&v, &self.scale(z, *coef));
                }
                rad.reduce(&v)
            })
            .collect();
        // reduced representatives are canonical modulo rad, so rref gives a basis of the image
        Subspace::new(reps, n, p).rows
    }

    /// Whether the algebra is local (A/rad is a field).
    pub fn is_local(&self) -> bool {
        if self.dim() == 0 {
            return false;
        }
        let rad = Subspace::new(self.radical(), self.dim(), self.p);
        self.is_local_with(&rad)
    }

    fn is_local_with(&self, rad: &Subspace) -> bool {
        let n = self.dim();
        if rad.dim() == n {
            return false;
        }
        let commutative = (0..n).all(|a| {
            (a + 1..n).all(|b| {
                let (x, y) = (self.basis(a), self.basis(b));
                rad.contains(&self.sub(&self.mul(&x, &y), &self.mul(&y, &x)))
            })
        });
        if !commutative {
            return false;
        }
        let quotient: Vec<Elem> = (0..n).map(|a| self.basis(a)).collect();
        self.frobenius_fixed(&quotient, rad).len() == 1
    }

    /// Number of indecomposable summands of a module whose endomorphism algebra this is:
    /// the sum over simple blocks Mat_k(F_q) of A/rad of k.
    pub fn summand_count(&self, rng: &mut impl Rng) -> usize {
        let n = self.dim();
        if n == 0 {
            return 0;
        }
        let rad = Subspace::new(self.radical(), n, self.p);
        let center = self.center_mod(&rad);
        let blocks = self.central_idempotents(&center, &rad, rng);
        blocks
            .iter()
            .map(|e| {
                let eq = Subspace::new(
                    (0..n).map(|a| rad.reduce(&self.mul(e, &self.basis(a)))).collect(),
                    n,
                    self.p,
                )
                .dim();
                let ez = Subspace::new(center.iter().map(|z| rad.reduce(&self.mul(e, z))).collect(), n, self.p).dim();
                let ratio = eq / ez.max(1);
                (ratio as f64).sqrt().round() as usize
            })
            .sum()
    }

    /// Primitive idempotents of the centre of A/rad (as representatives modulo rad).
    fn central_idempotents(&self, center: &[Elem], rad: &Subspace, rng: &mut impl Rng) -> Vec<Elem> {
        let p = self.p;
        let fixed = self.frobenius_fixed(center, rad);
        let total = fixed.len();
        let fixed_space = Subspace::new(fixed.clone(), self.dim(), p);
        let component_dim = |e: &Elem| -> usize {
            Subspace::new(
                fixed.iter().map(|z| rad.reduce(&self.mul(e, z))).collect(),
                self.dim(),
                p,
            )
            .dim()
        };
        let mut done: Vec<Elem> = Vec::new();
        let mut todo = vec![rad.reduce(&self.one)];
        let mut budget = 64 * (total + 1);
        while let Some(e) = todo.pop() {
            if component_dim(&e) <= 1 || budget == 0 {
                done.push(e);
                continue;
            }
            budget -= 1;
            let mut z = self.zero();
            for b in &fixed_space.rows {
                z = self.add(&z, &self.scale(b, rng.gen_range(0..p)));
            }
            let z = rad.reduce(&self.mul(&e, &z));
            let w = rad.reduce(&self.pow(&z, (p - 1) / 2));
            let w2 = rad.reduce(&self.mul(&w, &w));
            let half = crate::linalg::inv_mod(2, p);
            let plus = rad.reduce(&self.scale(&self.add(&w2, &w), half));
            let minus = rad.reduce(&self.sub(&w2, &plus));
            let zero_part = rad.reduce(&self.sub(&e, &w2));
            let parts: Vec<Elem> = [plus, minus, zero_part]
                .into_iter()
                .filter(|v| v.iter().any(|&c| c != 0))
                .collect();
            if parts.len() > 1 {
                todo.extend(parts);
            } else {
                todo.push(e);
            }
        }
        done
    }

    /// Minimal polynomial of x.
    pub fn minimal_polynomial(&self, x: &[u64]) -> Poly {
        let n = self.dim();
        let p = self.p;
        // rows hold [power coordinates | combination coefficients]
        let mut basis: Vec<(Elem, Vec<u64>, usize)> = Vec::new();
        let mut power = self.one.clone();
        for k in 0..=n {
            let mut v = power.clone();
            let mut comb = vec![0u64; n + 2];
            comb[k] = 1;
            for (row, rc, piv) in &basis {
                let f = v[*piv];
                if f != 0 {
                    for (a, b) in v.iter_mut().zip(row) {
                        *a = (*a + p - f * b % p) % p;
                    }
                    for (a, b) in comb.iter_mut().zip(rc) {
                        *a = (*a + p - f * b % p) % p;
                    }
                }
            }
            match v.iter().position(|&c| c != 0) {
                None => return poly::monic(&poly::trim(comb), p),
                Some(piv) => {
                    let inv = crate::linalg::inv_mod(v[piv], p);
                    let v: Elem = v.iter().map(|c| c * inv % p).collect();
                    let comb: Vec<u64> = comb.iter().map(|c| c * inv % p).collect();
                    basis.push((v, comb, piv));
                }
            }
            power = self.mul(&power, x);
        }
        unreachable!("minimal polynomial has degree at most dim")
    }

    fn eval_poly(&self, f: &Poly, x: &[u64]) -> Elem {
        let mut acc = self.zero();
        for &c in f.iter().rev() {
            acc = self.add(&self.mul(&acc, x), &self.scale(&self.one, c));
        }
        acc
    }

    /// A nontrivial idempotent found from the minimal polynomial of random elements.
    pub fn find_idempotent(&self, rng: &mut impl Rng, tries: usize) -> Option<Elem> {
        let p = self.p;
        let n = self.dim();
        for _ in 0..tries {
            let x: Elem = (0..n).map(|_| rng.gen_range(0..p)).collect();
            let m = self.minimal_polynomial(&x);
            if let Some((a, b)) = poly::coprime_split(&m, p, rng) {
                // e = t*b with s*a + t*b = 1: e = 1 mod a, 0 mod b
                let (_, _, t) = poly::ext_gcd(&a, &b, p);
                let e = self.eval_poly(&poly::mul(&t, &b, p), &x);
                if self.is_idempotent(&e) && e != self.zero() && e != self.one {
                    return Some(e);
                }
            }
        }
        None
    }

    /// Local, or a splitting idempotent witness.
    pub fn decompose(&self, rng: &mut impl Rng) -> Decomposition {
        let n = self.dim();
        if n == 0 {
            return Decomposition::Inconclusive {
                reason: "zero algebra".into(),
            };
        }
        let rad_basis = self.radical();
        let rad = Subspace::new(rad_basis, n, self.p);
        if self.is_local_with(&rad) {
            return Decomposition::Yes { radical_dim: rad.dim() };
        }
        let summands = self.summand_count(rng);
        match self.find_idempotent(rng, 64) {
            Some(e) => Decomposition::No {
                idempotent: e,
                summands,
            },
            None => Decomposition::Inconclusive {
                reason: "not local, but no idempotent found by random search".into(),
            },
        }
    }
}

/// Lifts an idempotent modulo a nilpotent ideal: e <- 3e^2 - 2e^3 until stable.
pub fn lift_idempotent(alg: &FdAlgebra, e: &[u64]) -> Elem {
    let mut cur = e.to_vec();
    for _ in 0..64 {
        let e2 = alg.mul(&cur, &cur);
        let e3 = alg.mul(&e2, &cur);
        let next = alg.sub(&alg.scale(&e2, 3), &alg.scale(&e3, 2));
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// k[t]/(t^n) with basis 1, t, ..., t^{n-1}.
    fn truncated_poly(n: usize, p: u64) -> FdAlgebra {
        let table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut v = vec![0; n];
                        if a + b < n {
                            v[a + b] = 1;
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let mut one = vec![0; n];
        one[0] = 1;
        FdAlgebra::new(p, table, one)
    }

    /// Mat_2(F_p) with basis E11, E12, E21, E22.
    fn matrices(p: u64) -> FdAlgebra {
        let idx = |i: usize, j: usize| 2 * i + j;
        let mut table = vec![vec![vec![0; 4]; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        if j == k {
                            table[idx(i, j)][idx(k, l)][idx(i, l)] = 1;
                        }
                    }
                }
            }
        }
        FdAlgebra::new(p, table, vec![1, 0, 0, 1])
    }

    /// Direct product of two algebras.
    fn product(a: &FdAlgebra, b: &FdAlgebra) -> FdAlgebra {
        let (n, m) = (a.dim(), b.dim());
        let mut table = vec![vec![vec![0; n + m]; n + m]; n + m];
        for x in 0..n {
            for y in 0..n {
                table[x][y][..n].copy_from_slice(&a.table[x][y]);
            }
        }
        for x in 0..m {
            for y in 0..m {
                table[n + x][n + y][n..].copy_from_slice(&b.table[x][y]);
            }
        }
        let mut one = a.one.clone();
        one.extend(b.one.iter());
        FdAlgebra::new(a.p, table, one)
    }

    #[test]
    fn radical_of_truncated_polynomials() {
        for p in [3u64, 7] {
            let a = truncated_poly(9, p);
            assert!(a.is_consistent());
            let rad = a.radical();
            assert_eq!(rad.len(), 8, "p = {p}");
            assert!(a.is_local());
        }
    }

    #[test]
    fn matrix_algebra_is_not_local() {
        let a = matrices(7);
        assert!(a.radical().is_empty());
        assert!(!a.is_local());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        assert_eq!(a.summand_count(&mut rng), 2);
        match a.decompose(&mut rng) {
            Decomposition::No { idempotent, summands } => {
                assert!(a.is_idempotent(&idempotent));
                assert_eq!(summands, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn product_has_two_blocks() {
        let a = product(&truncated_poly(3, 7), &truncated_poly(2, 7));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        assert_eq!(a.radical().len(), 3);
        assert_eq!(a.summand_count(&mut rng), 2);
        assert!(!a.is_local());
        let e = a.find_idempotent(&mut rng, 32).unwrap();
        assert!(a.is_idempotent(&e));
    }

    #[test]
    fn lifting_is_stable_on_idempotents() {
        let a = matrices(7);
        let e = vec![1, 0, 0, 0];
        assert_eq!(lift_idempotent(&a, &e), e);
    }
}
