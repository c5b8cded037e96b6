use serde::{Deserialize, Serialize};

use crate::algebra::{flat, flatten, unflatten, AMatrix, TruncAlgebra};
use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::linalg::{Echelon, Inserted, SVec};

use super::ModulePresentation;

/// Minimal free resolution F_t -> ... -> F_0 -> M.
#[derive(Clone, Debug)]
pub struct Resolution {
    /// d_1, ..., d_t with d_i: F_i -> F_{i-1}.
    pub differentials: Vec<AMatrix>,
    /// beta_0, ..., beta_t.
    pub betti: Vec<usize>,
    /// Degree below which d_i is certified.
    pub windows: Vec<usize>,
    pub trunc: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub betti: Vec<usize>,
    pub differentials: Vec<Vec<Vec<String>>>,
    pub windows: Vec<usize>,
    pub trunc: usize,
}

/// Kernel of the map sending input `j` to `images[j]`, with a cancellation check.
pub(crate) fn kernel_ctx(images: &[SVec], ncols: usize, p: u64, ctx: &Context) -> Result<Vec<SVec>> {
    let mut ech = Echelon::new(p, ncols, true);
    let mut ker = Vec::new();
    for j in (0..images.len()).rev() {
        if j % 512 == 0 {
            ctx.check()?;
        }
        if let Inserted::Dependent(k) = ech.insert(&images[j], j as u32) {
            ker.push(k);
        }
    }
    ker.reverse();
    Ok(ker)
}

/// Minimal generators of K/(mK + K ∩ m^W) for a kernel K ⊆ alg^c given by vectors with
/// distinct lowest coordinates (flat index s*c + j). Generators are cut below degree W.
pub(crate) fn minimal_generators(alg: &TruncAlgebra, kernel: &[SVec], c: usize, window: usize) -> Vec<SVec> {
    let p = alg.p();
    let limit = alg.count_up_to(window.saturating_sub(1)) * c;
    let cut = |v: &SVec| -> SVec { v.iter().copied().take_while(|&(i, _)| (i as usize) < limit).collect() };
    let reliable: Vec<&SVec> = kernel
        .iter()
        .filter(|v| v.first().map(|&(i, _)| (i as usize) < limit).unwrap_or(false))
        .collect();
    let mut ech = Echelon::new(p, limit.max(1), false);
    let vars: Vec<u32> = (0..alg.nvars())
        .filter_map(|k| alg.var(k).first().map(|&(s, _)| s))
        .collect();
    for v in &reliable {
        let col = unflatten(v, c);
        for &x in &vars {
            let moved: Vec<SVec> = col.iter().map(|e| alg.mul_std(x, e)).collect();
            let w = cut(&flatten(&moved, p));
            if !w.is_empty() {
                ech.push(&w);
            }
        }
    }
    let mut gens = Vec::new();
    for v in reliable {
        let w = cut(v);
        if ech.push(&w) {
            gens.push(w);
        }
    }
    gens
}

/// Minimal generators of the kernel of d (over coordinates of degree < w_in) that are
/// reliable below w_out.
fn kernel_step(alg: &TruncAlgebra, d: &AMatrix, w_in: usize, w_out: usize, ctx: &Context) -> Result<AMatrix> {
    let p = alg.p();
    let (r, c) = (d.rows, d.cols);
    let nsrc = alg.count_up_to(w_in.saturating_sub(1));
    let tgt_limit = (nsrc * r) as u32;
    let mut images = Vec::with_capacity(nsrc * c);
    for s in 0..nsrc as u32 {
        for j in 0..c {
            let col: Vec<SVec> = d.column(j).iter().map(|e| alg.mul_std(s, e)).collect();
            let v: SVec = flatten(&col, p)
                .into_iter()
                .take_while(|&(i, _)| i < tgt_limit)
                .collect();
            images.push(v);
        }
    }
    debug_assert_eq!(flat(nsrc as u32, 0, c) as usize, images.len());
    let ker = kernel_ctx(&images, (nsrc * r).max(1), p, ctx)?;
    let gens = minimal_generators(alg, &ker, c, w_out);
    let cols: Vec<Vec<SVec>> = gens.iter().map(|g| unflatten(g, c)).collect();
    Ok(AMatrix::from_columns(c, &cols))
}

/// Minimal resolution with `steps` differentials. Each differential is certified below a
/// window that shrinks by the largest entry order of the previous one.
pub fn minimal_resolution(m: &ModulePresentation, steps: usize, ctx: &Context) -> Result<Resolution> {
    if steps == 0 {
        return Err(MflabError::InvalidInput("steps must be at least 1".into()));
    }
    let pres = m.minimize();
    let alg = pres.algebra().clone();
    let mut differentials = Vec::new();
    let mut betti = vec![pres.rows()];
    let mut windows = Vec::new();
    let mut window = alg.trunc() + 1;
    let mut d = pres.matrix().clone();
    for step in 1..=steps {
        ctx.check()?;
        if d.cols == 0 || d.rows == 0 {
            break;
        }
        if step > 1 {
            let w_out = window.saturating_sub(d.max_order(&alg));
            if w_out <= 1 {
                return Err(MflabError::WindowExceeded {
                    requested: steps,
                    safe: step - 1,
                });
            }
            let next = kernel_step(&alg, &d, window, w_out, ctx)?;
            window = w_out;
            d = next;
            if d.cols == 0 {
                break;
            }
        }
        betti.push(d.cols);
        windows.push(window);
        differentials.push(d.clone());
    }
    Ok(Resolution {
        differentials,
        betti,
        windows,
        trunc: alg.trunc(),
    })
}

impl Resolution {
    pub fn report(&self, m: &ModulePresentation) -> ResolutionReport {
        let ring = m.ring();
        let alg = m.algebra();
        ResolutionReport {
            betti: self.betti.clone(),
            differentials: self
                .differentials
                .iter()
                .map(|d| crate::smatrix::SeriesMatrix::from_algebra(ring.series_ring(), alg, d).to_strings())
                .collect(),
            windows: self.windows.clone(),
            trunc: self.trunc,
        }
    }
}
