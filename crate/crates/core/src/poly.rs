//! Dense univariate polynomials over F_p (coefficients low to high, no trailing zeros).

use num_bigint::BigUint;
use rand::Rng;

use crate::linalg::inv_mod;

pub type Poly = Vec<u64>;

pub fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn deg(a: &Poly) -> Option<usize> {
    a.len().checked_sub(1)
}

#[cfg(test)]
pub fn add(a: &Poly, b: &Poly, p: u64) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

pub fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

pub fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(a: &Poly, b: &Poly, p: u64) -> (Poly, Poly) {
    let db = deg(b).expect("division by zero polynomial");
    let inv = inv_mod(b[db], p);
    let mut r = a.clone();
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - db];
    for k in (db..r.len()).rev() {
        let c = r[k] * inv % p;
        if c == 0 {
            continue;
        }
        q[k - db] = c;
        for (j, &y) in b.iter().enumerate() {
            let idx = k - db + j;
            r[idx] = (r[idx] + p - c * y % p) % p;
        }
    }
    (trim(q), trim(r))
}

pub fn rem(a: &Poly, b: &Poly, p: u64) -> Poly {
    divrem(a, b, p).1
}

pub fn monic(a: &Poly, p: u64) -> Poly {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => {
            let inv = inv_mod(lc, p);
            a.iter().map(|&c| c * inv % p).collect()
        }
    }
}

pub fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    monic(&a, p)
}

/// (g, s, t) with s*a + t*b = g monic.
pub fn ext_gcd(a: &Poly, b: &Poly, p: u64) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let inv = r0.last().map(|&c| inv_mod(c, p)).unwrap_or(1);
    let sc = |v: &Poly| trim(v.iter().map(|&c| c * inv % p).collect());
    (sc(&r0), sc(&s0), sc(&t0))
}

pub fn powmod(base: &Poly, e: &BigUint, m: &Poly, p: u64) -> Poly {
    let mut result = rem(&vec![1], m, p);
    let b = rem(base, m, p);
    for i in (0..e.bits()).rev() {
        result = rem(&mul(&result, &result, p), m, p);
        if e.bit(i) {
            result = rem(&mul(&result, &b, p), m, p);
        }
    }
    result
}

pub fn derivative(a: &Poly, p: u64) -> Poly {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| (i as u64 % p) * c % p)
            .collect(),
    )
}

/// Product of the distinct monic irreducible factors.
pub fn squarefree_part(a: &Poly, p: u64) -> Poly {
    let a = monic(a, p);
    if deg(&a).unwrap_or(0) == 0 {
        return vec![1];
    }
    let d = derivative(&a, p);
    if d.is_empty() {
        // a = b(t^p) = b(t)^p over F_p
        let root: Poly = a.iter().step_by(p as usize).copied().collect();
        return squarefree_part(&root, p);
    }
    let g = gcd(&a, &d, p);
    let r = divrem(&a, &g, p).0;
    if deg(&g).unwrap_or(0) == 0 {
        return monic(&r, p);
    }
    let rg = squarefree_part(&g, p);
    let common = gcd(&r, &rg, p);
    monic(&divrem(&mul(&r, &rg, p), &common, p).0, p)
}

/// A nontrivial monic factor of a squarefree polynomial with at least two irreducible
/// factors, by distinct- then equal-degree splitting.
pub fn proper_factor(s: &Poly, p: u64, rng: &mut impl Rng) -> Option<Poly> {
    let n = deg(s)?;
    let x = vec![0, 1];
    let mut h = x.clone();
    let pb = BigUint::from(p);
    for d in 1..=n {
        h = powmod(&h, &pb, s, p);
        let g = gcd(s, &sub(&h, &x, p), p);
        let dg = deg(&g).unwrap_or(0);
        if dg == 0 {
            continue;
        }
        if dg < n {
            return Some(g);
        }
        // every irreducible factor has degree d
        if n == d {
            return None;
        }
        let q = pb.pow(d as u32);
        let e = (q - 1u32) / 2u32;
        for _ in 0..64 {
            let r: Poly = trim((0..n).map(|_| rng.gen_range(0..p)).collect());
            if r.is_empty() {
                continue;
            }
            let w = powmod(&r, &e, s, p);
            let g = gcd(s, &sub(&w, &vec![1], p), p);
            let dg = deg(&g).unwrap_or(0);
            if dg > 0 && dg < n {
                return Some(g);
            }
        }
        return None;
    }
    None
}

/// Splits `m` as a*b with a, b coprime and non-constant, when possible.
pub fn coprime_split(m: &Poly, p: u64, rng: &mut impl Rng) -> Option<(Poly, Poly)> {
    let m = monic(m, p);
    let s = squarefree_part(&m, p);
    let g = proper_factor(&s, p, rng)?;
    // a collects the full powers in m of the irreducibles dividing g
    let mut a = vec![1u64];
    let mut rest = m.clone();
    loop {
        let c = gcd(&rest, &g, p);
        if deg(&c).unwrap_or(0) == 0 {
            break;
        }
        rest = divrem(&rest, &c, p).0;
        a = mul(&a, &c, p);
    }
    Some((monic(&a, p), monic(&rest, p)))
}
