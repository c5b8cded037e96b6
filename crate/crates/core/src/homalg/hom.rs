use std::sync::Arc;

use crate::algebra::{flatten, AMatrix, TruncAlgebra};
use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::hmf::{certify, Certified};
use crate::linalg::{self, Echelon, Inserted, SVec};

use super::resolution::{kernel_ctx, minimal_resolution};
use super::ModulePresentation;

/// Coordinates of r x n matrices: flat = s * (r*n) + row*n + col.
#[derive(Clone, Copy, Debug)]
struct MatLayout {
    r: usize,
    n: usize,
}

impl MatLayout {
    fn width(&self) -> usize {
        self.r * self.n
    }

    fn to_matrix(&self, v: &SVec) -> AMatrix {
        let w = self.width() as u32;
        let mut m = AMatrix::zero(self.r, self.n);
        for &(idx, c) in v {
            let s = idx / w;
            let slot = (idx % w) as usize;
            m.data[slot].push((s, c));
        }
        m
    }
}

fn project(alg: &TruncAlgebra, v: &SVec, width: usize, cutoff: usize) -> SVec {
    v.iter()
        .copied()
        .take_while(|&(idx, _)| alg.std_degree(idx / width as u32) < cutoff)
        .collect()
}

/// Image of the column vector `col` scaled by basis monomial s, reduced modulo Im(A_N).
fn reduced_image(alg: &TruncAlgebra, col: &[SVec], s: u32, image: &Echelon) -> SVec {
    let moved: Vec<SVec> = col.iter().map(|e| alg.mul_std(s, e)).collect();
    image.reduce(&flatten(&moved, alg.p()))
}

/// Echelon of Im(A) inside the free module of rank A.rows.
pub(crate) fn image_echelon(alg: &TruncAlgebra, a: &AMatrix) -> Echelon {
    let mut ech = Echelon::new(alg.p(), alg.dim() * a.rows.max(1), false);
    for j in 0..a.cols {
        let col = a.column(j);
        for s in 0..alg.dim() as u32 {
            let moved: Vec<SVec> = col.iter().map(|e| alg.mul_std(s, e)).collect();
            ech.push(&flatten(&moved, alg.p()));
        }
    }
    ech
}

/// Maps X: R^n -> N (as r_N x n matrices) with X*D = 0 in N, for D: R^c -> R^n.
fn cocycles(alg: &TruncAlgebra, d: &AMatrix, tgt: &AMatrix, ctx: &Context) -> Result<(MatLayout, Vec<SVec>)> {
    let lay = MatLayout { r: tgt.rows, n: d.rows };
    let image = image_echelon(alg, tgt);
    let block = alg.dim() * tgt.rows;
    let mut images = Vec::with_capacity(alg.dim() * lay.width());
    for s in 0..alg.dim() as u32 {
        for a in 0..lay.r {
            for b in 0..lay.n {
                // X = s E_ab; column l of X*D is s * D[b][l] placed in row a
                let mut pairs = Vec::new();
                for l in 0..d.cols {
                    let mut col = vec![Vec::new(); lay.r];
                    col[a] = d.get(b, l).clone();
                    for &(idx, c) in &reduced_image(alg, &col, s, &image) {
                        pairs.push(((l * block) as u32 + idx, c as u64));
                    }
                }
                images.push(linalg::from_pairs(pairs, alg.p()));
            }
        }
    }
    let ker = kernel_ctx(&images, (block * d.cols).max(1), alg.p(), ctx)?;
    Ok((lay, ker))
}

/// Maps X = A_N * Y (landing in Im A_N), projected below the cutoff.
fn through_relations(alg: &TruncAlgebra, lay: MatLayout, tgt: &AMatrix, cutoff: usize) -> Vec<SVec> {
    let w = lay.width();
    let mut out = Vec::new();
    for s in 0..alg.dim() as u32 {
        if alg.std_degree(s) >= cutoff {
            break;
        }
        for k in 0..tgt.cols {
            for b in 0..lay.n {
                let mut pairs = Vec::new();
                for a in 0..lay.r {
                    for &(t, c) in &alg.mul_std(s, tgt.get(a, k)) {
                        pairs.push((t * w as u32 + (a * lay.n + b) as u32, c as u64));
                    }
                }
                out.push(project(alg, &linalg::from_pairs(pairs, alg.p()), w, cutoff));
            }
        }
    }
    out
}

/// Maps X = Y * D_prev with Y: R^m -> R^{r_N}, projected below the cutoff.
fn coboundaries(alg: &TruncAlgebra, lay: MatLayout, prev: &AMatrix, cutoff: usize) -> Vec<SVec> {
    let w = lay.width();
    let mut out = Vec::new();
    for s in 0..alg.dim() as u32 {
        if alg.std_degree(s) >= cutoff {
            break;
        }
        for a in 0..lay.r {
            for k in 0..prev.rows {
                // Y = s E_ak: row a of X is s * row k of prev
                let mut pairs = Vec::new();
                for b in 0..lay.n {
                    for &(t, c) in &alg.mul_std(s, prev.get(k, b)) {
                        pairs.push((t * w as u32 + (a * lay.n + b) as u32, c as u64));
                    }
                }
                out.push(project(alg, &linalg::from_pairs(pairs, alg.p()), w, cutoff));
            }
        }
    }
    out
}

const RELATION_TAG: u32 = 1 << 31;

/// Cocycles with lead degree below the cutoff, taken modulo the projected coboundaries.
#[derive(Clone, Debug)]
pub(crate) struct QuotientSpace {
    alg: Arc<TruncAlgebra>,
    lay: MatLayout,
    cutoff: usize,
    ech: Echelon,
    reps: Vec<SVec>,
}

impl QuotientSpace {
    fn build(alg: &Arc<TruncAlgebra>, lay: MatLayout, z: &[SVec], b: &[SVec], cutoff: usize) -> Self {
        let w = lay.width();
        let mut ech = Echelon::new(alg.p(), alg.dim() * w.max(1), true);
        for (i, v) in b.iter().enumerate() {
            ech.insert(v, RELATION_TAG + i as u32);
        }
        let mut reps = Vec::new();
        for v in z {
            let lead = v[0].0 / w as u32;
            if alg.std_degree(lead) >= cutoff {
                continue;
            }
            if let Inserted::Pivot(_) = ech.insert(&project(alg, v, w, cutoff), reps.len() as u32) {
                reps.push(v.clone());
            }
        }
        QuotientSpace {
            alg: alg.clone(),
            lay,
            cutoff,
            ech,
            reps,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.reps.len()
    }

    pub(crate) fn algebra(&self) -> &Arc<TruncAlgebra> {
        &self.alg
    }

    pub(crate) fn basis(&self) -> Vec<AMatrix> {
        self.reps.iter().map(|v| self.lay.to_matrix(v)).collect()
    }

    fn flat(&self, m: &AMatrix) -> SVec {
        let w = self.lay.width() as u32;
        let pairs = m
            .data
            .iter()
            .enumerate()
            .flat_map(|(slot, e)| e.iter().map(move |&(s, c)| (s * w + slot as u32, c as u64)));
        project(
            &self.alg,
            &linalg::from_pairs(pairs, self.alg.p()),
            w as usize,
            self.cutoff,
        )
    }

    /// Coordinates of a cocycle in the quotient basis.
    pub(crate) fn coords(&self, m: &AMatrix) -> Option<Vec<u64>> {
        let (res, comb) = self.ech.reduce_with_combination(&self.flat(m));
        if !res.is_empty() {
            return None;
        }
        let mut out = vec![0; self.dim()];
        for (t, c) in comb {
            if t < RELATION_TAG {
                out[t as usize] = c as u64;
            }
        }
        Some(out)
    }

    /// The class of `m` vanishes.
    pub(crate) fn is_null(&self, m: &AMatrix) -> bool {
        self.coords(m).is_some_and(|c| c.iter().all(|&x| x == 0))
    }
}

/// Homomorphisms M -> N: each basis element alpha comes with beta such that
/// alpha * A_M = A_N * beta.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub basis: Vec<AMatrix>,
    pub lifts: Vec<AMatrix>,
    pub trunc: usize,
    pub cutoff: usize,
    space: QuotientSpace,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn algebra(&self) -> &Arc<TruncAlgebra> {
        self.space.algebra()
    }

    /// Coordinates of a homomorphism (given by its matrix) in `basis`.
    pub fn coords(&self, alpha: &AMatrix) -> Option<Vec<u64>> {
        self.space.coords(alpha)
    }

    pub fn is_zero(&self, alpha: &AMatrix) -> bool {
        self.space.is_null(alpha)
    }
}

fn check_same(m: &ModulePresentation, n: &ModulePresentation) -> Result<()> {
    if !m.ring().compatible(n.ring()) {
        return Err(MflabError::MismatchedRing(format!("{} vs {}", m.ring(), n.ring())));
    }
    Ok(())
}

/// Hom(M, N) modulo maps that vanish on cokernels, below the cutoff of `ctx`.
pub fn hom_space_at(m: &ModulePresentation, n: &ModulePresentation, ctx: &Context) -> Result<HomSpace> {
    check_same(m, n)?;
    let trunc = ctx.trunc();
    let (m, n) = (m.with_trunc(trunc)?, n.with_trunc(trunc)?);
    let alg = m.algebra().clone();
    let cutoff = ctx.precision.cutoff;
    let (lay, z) = cocycles(&alg, m.matrix(), n.matrix(), ctx)?;
    let b = through_relations(&alg, lay, n.matrix(), cutoff);
    let space = QuotientSpace::build(&alg, lay, &z, &b, cutoff);
    let basis = space.basis();
    let lifts = basis
        .iter()
        .map(|alpha| lift_witness(&alg, alpha, m.matrix(), n.matrix()))
        .collect::<Result<Vec<_>>>()?;
    Ok(HomSpace {
        basis,
        lifts,
        trunc,
        cutoff,
        space,
    })
}

/// Solves alpha * A_M = A_N * beta for beta.
fn lift_witness(alg: &TruncAlgebra, alpha: &AMatrix, am: &AMatrix, an: &AMatrix) -> Result<AMatrix> {
    solve_right(alg, an, &alpha.mul(alg, am)).ok_or_else(|| MflabError::Failed("homomorphism does not lift".into()))
}

/// Some X with a * X = rhs, if one exists.
pub(crate) fn solve_right(alg: &TruncAlgebra, a: &AMatrix, rhs: &AMatrix) -> Option<AMatrix> {
    let p = alg.p();
    let mut ech = Echelon::new(p, alg.dim() * a.rows.max(1), true);
    let mut tags = Vec::new();
    for k in 0..a.cols {
        let col = a.column(k);
        for s in 0..alg.dim() as u32 {
            let moved: Vec<SVec> = col.iter().map(|e| alg.mul_std(s, e)).collect();
            ech.insert(&flatten(&moved, p), tags.len() as u32);
            tags.push((k, s));
        }
    }
    let mut x = AMatrix::zero(a.cols, rhs.cols);
    for l in 0..rhs.cols {
        let comb = ech.solve(&flatten(&rhs.column(l), p))?;
        for (t, c) in comb {
            let (k, s) = tags[t as usize];
            let cur = x.get(k, l).clone();
            x.set(k, l, alg.add(&cur, &vec![(s, c)]));
        }
    }
    Some(x)
}

/// dim_k Hom(M, N), certified across two truncations.
pub fn hom_dim(m: &ModulePresentation, n: &ModulePresentation, ctx: &Context) -> Result<Certified> {
    certify(ctx, |c| Ok(hom_space_at(m, n, c)?.dim()))
}

/// dim_k of Hom(M, N) modulo maps factoring through a free module.
pub fn stable_hom_dim_at(m: &ModulePresentation, n: &ModulePresentation, ctx: &Context) -> Result<usize> {
    Ok(stable_space_at(m, n, ctx)?.dim())
}

/// Hom(M, N) modulo maps factoring through a free module, below the cutoff.
pub(crate) fn stable_space_at(m: &ModulePresentation, n: &ModulePresentation, ctx: &Context) -> Result<QuotientSpace> {
    check_same(m, n)?;
    let trunc = ctx.trunc();
    let (m, n) = (m.with_trunc(trunc)?, n.with_trunc(trunc)?);
    let alg = m.algebra().clone();
    let cutoff = ctx.precision.cutoff;
    let (lay, z) = cocycles(&alg, m.matrix(), n.matrix(), ctx)?;
    let mut b = through_relations(&alg, lay, n.matrix(), cutoff);
    // maps into the free cover: lambda * A_M = 0 with no relations on the target
    let free = AMatrix::zero(n.rows(), 0);
    let (_, lambdas) = cocycles(&alg, m.matrix(), &free, ctx)?;
    b.extend(lambdas.iter().map(|v| project(&alg, v, lay.width(), cutoff)));
    Ok(QuotientSpace::build(&alg, lay, &z, &b, cutoff))
}

pub fn stable_hom_dim(m: &ModulePresentation, n: &ModulePresentation, ctx: &Context) -> Result<Certified> {
    certify(ctx, |c| stable_hom_dim_at(m, n, c))
}

/// dim_k Ext^i(M, N) at one precision, from a minimal resolution of M.
pub fn ext_dim_at(m: &ModulePresentation, n: &ModulePresentation, i: usize, ctx: &Context) -> Result<usize> {
    check_same(m, n)?;
    let trunc = ctx.trunc();
    let (m, n) = (m.with_trunc(trunc)?, n.with_trunc(trunc)?);
    let alg = m.algebra().clone();
    let cutoff = ctx.precision.cutoff;
    let res = minimal_resolution(&m, i + 1, ctx)?;
    let beta_i = res.betti.get(i).copied().unwrap_or(0);
    if beta_i == 0 {
        return Ok(0);
    }
    let next = res
        .differentials
        .get(i)
        .cloned()
        .unwrap_or_else(|| AMatrix::zero(beta_i, 0));
    let (lay, z) = cocycles(&alg, &next, n.matrix(), ctx)?;
    let mut b = through_relations(&alg, lay, n.matrix(), cutoff);
    if i > 0 {
        b.extend(coboundaries(&alg, lay, &res.differentials[i - 1], cutoff));
    }
    Ok(QuotientSpace::build(&alg, lay, &z, &b, cutoff).dim())
}

pub fn ext_dim(m: &ModulePresentation, n: &ModulePresentation, i: usize, ctx: &Context) -> Result<Certified> {
    certify(ctx, |c| ext_dim_at(m, n, i, c))
}
