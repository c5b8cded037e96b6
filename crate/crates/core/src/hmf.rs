//! Morphisms of matrix factorizations up to homotopy, computed over S/n^{N+1}.
//!
//! A morphism (phi, psi) -> (phi', psi') is a pair (a0, a1) with a0*phi = phi'*a1 and
//! a1*psi = psi'*a0. It is null-homotopic when a0 = phi'*s + t*psi and a1 = s*phi + psi'*t.
//! Homotopy classes are the stable homomorphisms between the cokernels. Spaces are compared
//! after dropping coordinates of degree >= cutoff, which removes truncation artifacts.

use std::sync::Arc;

use rand::Rng;

use crate::algebra::{AMatrix, TruncAlgebra};
use crate::context::{Context, Precision};
use crate::error::{MflabError, Result};
use crate::linalg::{self, dense, Echelon, Inserted, SVec};
use crate::matfac::MatrixFactorization;

/// A factorization with entries in a truncated ambient algebra.
#[derive(Clone, Debug)]
pub struct MfMats {
    pub phi: AMatrix,
    pub psi: AMatrix,
}

impl MfMats {
    pub fn new(mf: &MatrixFactorization, alg: &TruncAlgebra) -> Self {
        MfMats {
            phi: mf.phi().to_algebra(alg),
            psi: mf.psi().to_algebra(alg),
        }
    }

    pub fn size(&self) -> usize {
        self.phi.rows
    }
}

/// A morphism pair (a0, a1).
pub type MfMap = (AMatrix, AMatrix);

/// Coordinates of m x n morphism pairs: slot = which*m*n + row*n + col, flat = s*2mn + slot.
#[derive(Clone, Copy, Debug)]
struct Layout {
    m: usize,
    n: usize,
}

impl Layout {
    fn width(&self) -> usize {
        2 * self.m * self.n
    }

    fn slot(&self, which: usize, i: usize, j: usize) -> usize {
        which * self.m * self.n + i * self.n + j
    }

    fn push(&self, out: &mut Vec<(u32, u64)>, which: usize, i: usize, j: usize, e: &SVec, sign: u64, p: u64) {
        let w = self.width() as u32;
        let slot = self.slot(which, i, j) as u32;
        for &(t, c) in e {
            out.push((t * w + slot, c as u64 * sign % p));
        }
    }

    fn to_pair(&self, v: &SVec) -> MfMap {
        let w = self.width() as u32;
        let mut a0 = AMatrix::zero(self.m, self.n);
        let mut a1 = AMatrix::zero(self.m, self.n);
        for &(idx, c) in v {
            let s = idx / w;
            let slot = (idx % w) as usize;
            let which = slot / (self.m * self.n);
            let r = slot % (self.m * self.n);
            let target = if which == 0 { &mut a0 } else { &mut a1 };
            target.data[r].push((s, c));
        }
        (a0, a1)
    }

    fn from_pair(&self, pair: &MfMap) -> SVec {
        let w = self.width() as u32;
        let mut v = Vec::new();
        for (which, m) in [&pair.0, &pair.1].into_iter().enumerate() {
            for i in 0..self.m {
                for j in 0..self.n {
                    let slot = self.slot(which, i, j) as u32;
                    for &(s, c) in m.get(i, j) {
                        v.push((s * w + slot, c));
                    }
                }
            }
        }
        v.sort_unstable();
        v
    }
}

/// Drops coordinates of basis degree >= `cutoff` from a flat vector.
fn project(alg: &TruncAlgebra, v: &SVec, width: usize, cutoff: usize) -> SVec {
    v.iter()
        .copied()
        .take_while(|&(idx, _)| alg.std_degree(idx / width as u32) < cutoff)
        .collect()
}

fn unknown_count(alg: &TruncAlgebra, lay: Layout) -> usize {
    alg.dim() * lay.width()
}

/// Images of all coordinate unknowns under (a0, a1) -> (a0*phi - phi'*a1, a1*psi - psi'*a0).
fn closedness_images(alg: &TruncAlgebra, src: &MfMats, tgt: &MfMats, lay: Layout, ctx: &Context) -> Result<Vec<SVec>> {
    let p = alg.p();
    let (m, n) = (lay.m, lay.n);
    let w = lay.width();
    let mut images = vec![Vec::new(); unknown_count(alg, lay)];
    for s in 0..alg.dim() as u32 {
        ctx.check()?;
        for which in 0..2 {
            for i in 0..m {
                for j in 0..n {
                    let mut pairs = Vec::new();
                    if which == 0 {
                        for l in 0..n {
                            lay.push(&mut pairs, 0, i, l, &alg.mul_std(s, src.phi.get(j, l)), 1, p);
                        }
                        for k in 0..m {
                            lay.push(&mut pairs, 1, k, j, &alg.mul_std(s, tgt.psi.get(k, i)), p - 1, p);
                        }
                    } else {
                        for k in 0..m {
                            lay.push(&mut pairs, 0, k, j, &alg.mul_std(s, tgt.phi.get(k, i)), p - 1, p);
                        }
                        for l in 0..n {
                            lay.push(&mut pairs, 1, i, l, &alg.mul_std(s, src.psi.get(j, l)), 1, p);
                        }
                    }
                    images[s as usize * w + lay.slot(which, i, j)] = linalg::from_pairs(pairs, p);
                }
            }
        }
    }
    Ok(images)
}

/// Null-homotopic pairs generated by homotopies of degree < cutoff, projected below cutoff.
fn homotopy_images(alg: &TruncAlgebra, src: &MfMats, tgt: &MfMats, lay: Layout, cutoff: usize) -> Vec<SVec> {
    let p = alg.p();
    let (m, n) = (lay.m, lay.n);
    let w = lay.width();
    let mut out = Vec::new();
    for s in 0..alg.dim() as u32 {
        if alg.std_degree(s) >= cutoff {
            break;
        }
        for which in 0..2 {
            for i in 0..m {
                for j in 0..n {
                    let mut pairs = Vec::new();
                    if which == 0 {
                        // s = h E_ij : F0 -> F1'
                        for k in 0..m {
                            lay.push(&mut pairs, 0, k, j, &alg.mul_std(s, tgt.phi.get(k, i)), 1, p);
                        }
                        for l in 0..n {
                            lay.push(&mut pairs, 1, i, l, &alg.mul_std(s, src.phi.get(j, l)), 1, p);
                        }
                    } else {
                        // t = h E_ij : F1 -> F0'
                        for l in 0..n {
                            lay.push(&mut pairs, 0, i, l, &alg.mul_std(s, src.psi.get(j, l)), 1, p);
                        }
                        for k in 0..m {
                            lay.push(&mut pairs, 1, k, j, &alg.mul_std(s, tgt.psi.get(k, i)), 1, p);
                        }
                    }
                    let v = linalg::from_pairs(pairs, p);
                    out.push(project(alg, &v, w, cutoff));
                }
            }
        }
    }
    out
}

/// Basis of closed pairs (kernel vectors with pairwise distinct lowest coordinates).
struct Closed {
    lay: Layout,
    basis: Vec<SVec>,
}

fn closed_maps(alg: &TruncAlgebra, src: &MfMats, tgt: &MfMats, ctx: &Context) -> Result<Closed> {
    let lay = Layout {
        m: tgt.size(),
        n: src.size(),
    };
    let images = closedness_images(alg, src, tgt, lay, ctx)?;
    let mut ech = Echelon::new(alg.p(), unknown_count(alg, lay), true);
    let mut basis = Vec::new();
    for j in (0..images.len()).rev() {
        if j % 256 == 0 {
            ctx.check()?;
        }
        if let Inserted::Dependent(k) = ech.insert(&images[j], j as u32) {
            basis.push(k);
        }
    }
    basis.reverse();
    Ok(Closed { lay, basis })
}

/// All closed pairs as matrices (a basis of the truncated solution space).
pub fn closed_pairs(alg: &TruncAlgebra, src: &MfMats, tgt: &MfMats, ctx: &Context) -> Result<Vec<MfMap>> {
    let closed = closed_maps(alg, src, tgt, ctx)?;
    Ok(closed.basis.iter().map(|z| closed.lay.to_pair(z)).collect())
}

const B_TAG: u32 = 1 << 31;

/// Stable homomorphisms between two factorizations at one precision.
pub struct StableHom {
    pub dim: usize,
    pub precision: Precision,
    alg: Arc<TruncAlgebra>,
    lay: Layout,
    basis: Vec<MfMap>,
    quotient: Echelon,
    null: Echelon,
}

impl StableHom {
    pub fn compute(src: &MatrixFactorization, tgt: &MatrixFactorization, ctx: &Context) -> Result<StableHom> {
        if !src.ring().compatible(tgt.ring()) {
            return Err(MflabError::MismatchedRing(format!("{} vs {}", src.ring(), tgt.ring())));
        }
        let prec = ctx.precision;
        let alg = src.ring().ambient_algebra(prec.trunc)?;
        let a = MfMats::new(src, &alg);
        let b = MfMats::new(tgt, &alg);
        let closed = closed_maps(&alg, &a, &b, ctx)?;
        let lay = closed.lay;
        let w = lay.width();
        let mut null = Echelon::new(alg.p(), unknown_count(&alg, lay), false);
        let mut quotient = Echelon::new(alg.p(), unknown_count(&alg, lay), true);
        for (k, v) in homotopy_images(&alg, &a, &b, lay, prec.cutoff).iter().enumerate() {
            null.push(v);
            quotient.insert(v, B_TAG + k as u32);
        }
        let mut basis = Vec::new();
        for z in &closed.basis {
            let lead = z[0].0 / w as u32;
            if alg.std_degree(lead) >= prec.cutoff {
                continue;
            }
            let pz = project(&alg, z, w, prec.cutoff);
            if let Inserted::Pivot(_) = quotient.insert(&pz, basis.len() as u32) {
                basis.push(lay.to_pair(z));
            }
        }
        Ok(StableHom {
            dim: basis.len(),
            precision: prec,
            alg,
            lay,
            basis,
            quotient,
            null,
        })
    }

    pub fn algebra(&self) -> &Arc<TruncAlgebra> {
        &self.alg
    }

    pub fn basis(&self) -> &[MfMap] {
        &self.basis
    }

    fn projected(&self, pair: &MfMap) -> SVec {
        project(
            &self.alg,
            &self.lay.from_pair(pair),
            self.lay.width(),
            self.precision.cutoff,
        )
    }

    /// Whether a closed pair is null-homotopic (below the cutoff).
    pub fn is_null(&self, pair: &MfMap) -> bool {
        self.null.contains(&self.projected(pair))
    }

    /// Coordinates of a closed pair in the basis; `None` if it is not in the computed span.
    pub fn coords(&self, pair: &MfMap) -> Option<Vec<u64>> {
        let (res, comb) = self.quotient.reduce_with_combination(&self.projected(pair));
        if !res.is_empty() {
            return None;
        }
        let mut out = vec![0u64; self.dim];
        for (t, c) in comb {
            if t < B_TAG {
                out[t as usize] = c as u64;
            }
        }
        Some(out)
    }
}

/// Composition g∘f of pairs (f: A -> B, g: B -> C).
pub fn compose(alg: &TruncAlgebra, g: &MfMap, f: &MfMap) -> MfMap {
    (g.0.mul(alg, &f.0), g.1.mul(alg, &f.1))
}

/// A dimension together with the value at the next precision level.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Certified {
    pub value: usize,
    pub trunc: usize,
    pub cutoff: usize,
    pub value_next: usize,
    pub trunc_next: usize,
}

/// Checks `value` against the recomputation at the next precision.
pub fn certify(ctx: &Context, f: impl Fn(&Context) -> Result<usize>) -> Result<Certified> {
    let low = f(ctx)?;
    let next = ctx.with_precision(ctx.precision.next());
    let high = f(&next)?;
    if low != high {
        return Err(MflabError::NotStabilized {
            trunc: ctx.trunc(),
            value_low: low,
            value_high: high,
            suggested: ctx.trunc() + 4,
        });
    }
    Ok(Certified {
        value: low,
        trunc: ctx.trunc(),
        cutoff: ctx.precision.cutoff,
        value_next: high,
        trunc_next: next.trunc(),
    })
}

/// Largest degree of an entry of phi or psi.
pub fn max_entry_degree(mf: &MatrixFactorization) -> usize {
    mf.phi()
        .entries()
        .chain(mf.psi().entries())
        .filter_map(|e| e.max_degree())
        .max()
        .unwrap_or(0)
}

/// Over a ring of positive dimension, entries at or above the cutoff are invisible to the
/// comparison between two levels.
fn require_cutoff(ctx: &Context, ring_dim: usize, max_degree: usize) -> Result<()> {
    if ring_dim >= 1 && ctx.precision.cutoff <= max_degree {
        return Err(MflabError::PrecisionTooLow {
            trunc: ctx.trunc(),
            max_degree,
            suggested: 2 * max_degree,
        });
    }
    Ok(())
}

/// dim_k of stable Hom(Coker phi_a, Coker phi_b), certified across two truncations.
pub fn stable_hom_dim(a: &MatrixFactorization, b: &MatrixFactorization, ctx: &Context) -> Result<Certified> {
    require_cutoff(ctx, a.ring().dim(), max_entry_degree(a).max(max_entry_degree(b)))?;
    certify(ctx, |c| Ok(StableHom::compute(a, b, c)?.dim))
}

/// Structure constants of the stable endomorphism algebra: `table[a][b]` holds the
/// coordinates of basis[a] ∘ basis[b].
pub struct EndAlgebra {
    pub hom: StableHom,
    pub table: Vec<Vec<Vec<u64>>>,
}

pub fn stable_end_algebra(mf: &MatrixFactorization, ctx: &Context) -> Result<EndAlgebra> {
    let hom = StableHom::compute(mf, mf, ctx)?;
    let alg = hom.alg.clone();
    let mut table = Vec::with_capacity(hom.dim);
    for a in &hom.basis {
        ctx.check()?;
        let mut row = Vec::with_capacity(hom.dim);
        for b in &hom.basis {
            let c = hom.coords(&compose(&alg, a, b)).ok_or_else(|| {
                MflabError::Inconclusive("composition left the computed Hom space; raise --trunc".into())
            })?;
            row.push(c);
        }
        table.push(row);
    }
    Ok(EndAlgebra { hom, table })
}

/// Whether x·id is null-homotopic, i.e. multiplication by x factors through a free module.
pub fn multiplication_is_null(mf: &MatrixFactorization, x: &SVec, hom: &StableHom) -> bool {
    let alg = &hom.alg;
    let n = mf.size();
    let xi = AMatrix::scalar(alg, n, x);
    hom.is_null(&(xi.clone(), xi))
}

/// Outcome of the isomorphism search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoOutcome {
    /// Constant parts of an isomorphism (a0(0), a1(0)).
    Isomorphic {
        a0: dense::Mat,
        a1: dense::Mat,
        exhaustive: bool,
    },
    /// Rigorous: no closed pair has invertible constant terms.
    NotIsomorphic {
        constant_dim: usize,
    },
    Inconclusive {
        constant_dim: usize,
        tries: usize,
    },
}

impl IsoOutcome {
    pub fn as_bool(&self) -> Result<bool> {
        match self {
            IsoOutcome::Isomorphic { .. } => Ok(true),
            IsoOutcome::NotIsomorphic { .. } => Ok(false),
            IsoOutcome::Inconclusive { constant_dim, tries } => Err(MflabError::Inconclusive(format!(
                "no invertible constant term in {tries} random draws from a {constant_dim}-dimensional space"
            ))),
        }
    }
}

pub const RANDOM_TRIES: usize = 64;
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 20;

/// Searches closed pairs for one with invertible constant terms; the inputs must be reduced
/// and of equal size.
pub fn iso_search(a: &MatrixFactorization, b: &MatrixFactorization, ctx: &Context) -> Result<IsoOutcome> {
    let alg = a.ring().ambient_algebra(ctx.trunc())?;
    let p = alg.p();
    let n = a.size();
    let ma = MfMats::new(a, &alg);
    let mb = MfMats::new(b, &alg);
    let closed = closed_maps(&alg, &ma, &mb, ctx)?;
    let w = closed.lay.width();
    let consts: Vec<Vec<u64>> = closed
        .basis
        .iter()
        .filter(|z| (z[0].0 as usize) < w)
        .map(|z| {
            let mut d = vec![0u64; w];
            for &(idx, c) in z.iter().take_while(|&&(idx, _)| (idx as usize) < w) {
                d[idx as usize] = c as u64;
            }
            d
        })
        .collect();
    let dimc = consts.len();
    let split = |v: &[u64]| -> (dense::Mat, dense::Mat) {
        let a0 = (0..n).map(|i| v[i * n..(i + 1) * n].to_vec()).collect();
        let a1 = (0..n).map(|i| v[n * n + i * n..n * n + (i + 1) * n].to_vec()).collect();
        (a0, a1)
    };
    let combine = |coef: &[u64]| -> Vec<u64> {
        let mut v = vec![0u64; w];
        for (c, d) in coef.iter().zip(&consts) {
            for (x, y) in v.iter_mut().zip(d) {
                *x = (*x + c * y) % p;
            }
        }
        v
    };
    let good = |v: &[u64]| {
        let (a0, a1) = split(v);
        dense::is_invertible(&a0, p) && dense::is_invertible(&a1, p)
    };
    if dimc == 0 {
        return Ok(IsoOutcome::NotIsomorphic { constant_dim: 0 });
    }
    let mut rng = ctx.rng(0x1505);
    for _ in 0..RANDOM_TRIES {
        ctx.check()?;
        let coef: Vec<u64> = (0..dimc).map(|_| rng.gen_range(0..p)).collect();
        let v = combine(&coef);
        if good(&v) {
            let (a0, a1) = split(&v);
            return Ok(IsoOutcome::Isomorphic {
                a0,
                a1,
                exhaustive: false,
            });
        }
    }
    let total = (p as u128).checked_pow(dimc as u32).unwrap_or(u128::MAX);
    if total > EXHAUSTIVE_LIMIT as u128 {
        return Ok(IsoOutcome::Inconclusive {
            constant_dim: dimc,
            tries: RANDOM_TRIES,
        });
    }
    let mut coef = vec![0u64; dimc];
    for _ in 0..total {
        // odometer over F_p^dimc
        for c in coef.iter_mut() {
            *c += 1;
            if *c < p {
                break;
            }
            *c = 0;
        }
        let v = combine(&coef);
        if good(&v) {
            let (a0, a1) = split(&v);
            return Ok(IsoOutcome::Isomorphic {
                a0,
                a1,
                exhaustive: true,
            });
        }
    }
    Ok(IsoOutcome::NotIsomorphic { constant_dim: dimc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::rings::HypersurfaceRing;

    fn ring(vars: &[&str], f: &str) -> HypersurfaceRing {
        HypersurfaceRing::new(Field::fp(7).unwrap(), vars, f, 12).unwrap()
    }

    #[test]
    fn stable_end_of_simple_over_a2() {
        let r = ring(&["y"], "y^3");
        let m = MatrixFactorization::rank_one(&r, "y", "y^2").unwrap();
        let ctx = Context::default();
        assert_eq!(stable_hom_dim(&m, &m, &ctx).unwrap().value, 1);
        let n = m.shift();
        assert_eq!(stable_hom_dim(&n, &n, &ctx).unwrap().value, 1);
        assert_eq!(stable_hom_dim(&m, &n, &ctx).unwrap().value, 1);
    }

    #[test]
    fn trivial_factorization_is_stably_zero() {
        let r = ring(&["x", "y"], "x*y");
        let t = MatrixFactorization::trivial(&r);
        let m = MatrixFactorization::rank_one(&r, "x", "y").unwrap();
        let ctx = Context::default();
        assert_eq!(stable_hom_dim(&t, &m, &ctx).unwrap().value, 0);
        assert_eq!(stable_hom_dim(&m, &t, &ctx).unwrap().value, 0);
    }

    #[test]
    fn high_degree_entries_need_a_larger_truncation() {
        let r = HypersurfaceRing::new(Field::fp(7).unwrap(), &["x", "y"], "x^2 - y^8", 12).unwrap();
        let m = MatrixFactorization::rank_one(&r, "x + y^4", "x - y^4").unwrap();
        let a = m.direct_sum(&m.shift()).unwrap();
        for t in [4, 6] {
            let err = stable_hom_dim(&a, &a, &Context::new(t, 42)).unwrap_err();
            assert!(matches!(err, MflabError::PrecisionTooLow { suggested: 8, .. }));
        }
        let low = stable_hom_dim(&a, &a, &Context::new(8, 42)).unwrap().value;
        assert_eq!(low, stable_hom_dim(&a, &a, &Context::new(16, 42)).unwrap().value);
    }

    #[test]
    fn node_homs() {
        let r = ring(&["x", "y"], "x*y");
        let a = MatrixFactorization::rank_one(&r, "x", "y").unwrap();
        let b = a.shift();
        let ctx = Context::default();
        assert_eq!(stable_hom_dim(&a, &a, &ctx).unwrap().value, 1);
        assert_eq!(stable_hom_dim(&a, &b, &ctx).unwrap().value, 0);
    }

    #[test]
    fn iso_search_examples() {
        let r = ring(&["y"], "y^3");
        let a = MatrixFactorization::rank_one(&r, "y", "y^2").unwrap();
        let ctx = Context::default();
        assert!(iso_search(&a, &a, &ctx).unwrap().as_bool().unwrap());
        assert!(!iso_search(&a, &a.shift(), &ctx).unwrap().as_bool().unwrap());
    }
}
