use serde::{Deserialize, Serialize};

use crate::algebra::{flatten, AMatrix, TruncAlgebra};
use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::hmf::{certify, Certified};
use crate::linalg::{dense, Echelon, Inserted, SVec};
use crate::matfac::MatrixFactorization;
use crate::rings::{HypersurfaceRing, MonomialCurveRing};
use crate::smatrix::SeriesMatrix;

use super::hom::{ext_dim, solve_right, stable_hom_dim_at};
use super::resolution::{minimal_resolution, Resolution};
use super::ModulePresentation;

/// Lifts one square minimal presentation to S^{(n)}; returns (phi, psi, valid) where the pair
/// is a factorization modulo m^{valid+1}.
fn lift_once(
    ring: &HypersurfaceRing,
    a: &AMatrix,
    from: &TruncAlgebra,
    n: usize,
) -> Result<(AMatrix, AMatrix, usize, std::sync::Arc<TruncAlgebra>)> {
    let s_alg = ring.ambient_algebra(n)?;
    let p = s_alg.p();
    let phi = a.transfer(from, &s_alg);
    let k = phi.rows;
    let f = s_alg.from_terms(ring.f().terms().map(|(m, c)| (m, ring.field().residue(c))));
    let total = s_alg.dim() * k;
    let mut ech = Echelon::new(p, total, true);
    let mut kappa = n + 1;
    for j in (0..total).rev() {
        let (s, i) = ((j / k) as u32, j % k);
        let col: Vec<SVec> = phi.column(i).iter().map(|e| s_alg.mul_std(s, e)).collect();
        if let Inserted::Dependent(_) = ech.insert(&flatten(&col, p), j as u32) {
            kappa = kappa.min(s_alg.std_degree(s));
        }
    }
    let mut psi = AMatrix::zero(k, k);
    for l in 0..k {
        let mut rhs = vec![Vec::new(); k];
        rhs[l] = f.clone();
        let comb = ech
            .solve(&flatten(&rhs, p))
            .ok_or_else(|| MflabError::InvalidInput("presentation does not come from a matrix factorization".into()))?;
        for (t, c) in comb {
            let (s, i) = (t / k as u32, t as usize % k);
            if s_alg.std_degree(s) < kappa {
                let cur = psi.get(i, l).clone();
                psi.set(i, l, s_alg.add(&cur, &vec![(s, c)]));
            }
        }
    }
    Ok((phi, psi, kappa.min(n), s_alg))
}

/// Matrix factorization (phi, psi) with Coker(phi) = M for a module M without free summands
/// whose minimal presentation is square. The factorization is exact up to a truncation of at
/// least ctx.trunc() + 4.
pub fn mf_from_presentation(m: &ModulePresentation, ctx: &Context) -> Result<MatrixFactorization> {
    let min = m.minimize();
    let ring = min.ring();
    if min.rows() == 0 {
        return Ok(MatrixFactorization::empty(ring));
    }
    if min.rows() != min.cols() {
        return Err(MflabError::InvalidInput(format!(
            "minimal presentation is {}x{}, not square (module is not a lattice without free summands)",
            min.rows(),
            min.cols()
        )));
    }
    let need = ctx.trunc() + 4;
    let mut n = need + 2;
    for _ in 0..4 {
        ctx.check()?;
        let (phi, psi, valid, s_alg) = lift_once(ring, min.matrix(), min.algebra(), n)?;
        if valid >= need {
            let r = ring.with_trunc(valid);
            let sr = r.series_ring();
            let phi = SeriesMatrix::from_algebra(sr, &s_alg, &phi);
            let psi = SeriesMatrix::from_algebra(sr, &s_alg, &psi);
            return MatrixFactorization::checked(&r, phi, psi);
        }
        n += need - valid + 2;
    }
    Err(MflabError::Failed(
        "could not lift the presentation to a factorization".into(),
    ))
}

/// Minimal lattice approximation 0 -> Y -> G -> k -> 0.
#[derive(Clone, Debug)]
pub struct ApproximationResult {
    pub dim: usize,
    pub g: ModulePresentation,
    pub g_mf: MatrixFactorization,
    /// Y as a submodule of G: the images of its generators in G's coordinates.
    pub inclusion: AMatrix,
    pub kernel: ModulePresentation,
    /// G/mG -> k as a row of constants.
    pub map: Vec<u64>,
    pub kernel_resolution: Resolution,
    /// dim Ext^i(k, R) for i = 0..=d.
    pub ext_dims: Vec<Certified>,
    /// l(G/Y); 1 when the map onto k has kernel exactly Y.
    pub quotient_length: usize,
    pub caveat: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub dim: usize,
    pub g: Vec<Vec<String>>,
    pub g_psi: Vec<Vec<String>>,
    pub beta_g: usize,
    pub kernel: Vec<Vec<String>>,
    pub kernel_rows: usize,
    pub kernel_betti: Vec<usize>,
    pub map: Vec<u64>,
    pub ext_dims: Vec<usize>,
    pub quotient_length: usize,
    pub surjective: bool,
    pub kernel_pd_ok: bool,
    pub reduced: bool,
    pub caveat: Option<String>,
    pub trunc: usize,
}

impl ApproximationResult {
    /// Every machine-checked postcondition holds.
    pub fn verified(&self) -> bool {
        self.surjective() && self.kernel_pd_ok() && self.g_mf.is_reduced() && self.ext_ok()
    }

    pub fn surjective(&self) -> bool {
        self.quotient_length == 1 && self.map.iter().any(|&c| c != 0)
    }

    /// The kernel's resolution stops after d - 1 steps.
    pub fn kernel_pd_ok(&self) -> bool {
        self.kernel_resolution.differentials.len() < self.dim.max(1)
    }

    fn ext_ok(&self) -> bool {
        let d = self.dim;
        self.ext_dims
            .iter()
            .enumerate()
            .all(|(i, c)| c.value == usize::from(i == d))
    }

    pub fn report(&self) -> ApproximationReport {
        ApproximationReport {
            dim: self.dim,
            g: self.g_mf.phi().to_strings(),
            g_psi: self.g_mf.psi().to_strings(),
            beta_g: self.g.betti(),
            kernel: self.kernel.to_strings(),
            kernel_rows: self.kernel.rows(),
            kernel_betti: self.kernel_resolution.betti.clone(),
            map: self.map.clone(),
            ext_dims: self.ext_dims.iter().map(|c| c.value).collect(),
            quotient_length: self.quotient_length,
            surjective: self.surjective(),
            kernel_pd_ok: self.kernel_pd_ok(),
            reduced: self.g_mf.is_reduced(),
            caveat: self.caveat.clone(),
            trunc: self.g.trunc(),
        }
    }
}

fn cut_matrix(alg: &TruncAlgebra, a: &AMatrix, below: usize) -> AMatrix {
    a.map(|e| alg.cut(e, below))
}

/// Left kernel of the constant part of `b` (n x c), as one nonzero row.
fn constant_left_kernel(alg: &TruncAlgebra, b: &AMatrix) -> Vec<u64> {
    let p = alg.p();
    let n = b.rows;
    if b.cols == 0 {
        let mut v = vec![0; n];
        if n > 0 {
            v[0] = 1;
        }
        return v;
    }
    let bt = b.transpose().constant_part(alg);
    dense::nullspace(&bt, n, p)
        .into_iter()
        .next()
        .unwrap_or_else(|| vec![0; n])
}

/// G = Hom(Omega^d k, R) with the map G -> Ext^d(k, R) = k, for d = dim R <= 2.
pub fn lat_approximation_of_simple(ring: &HypersurfaceRing, ctx: &Context) -> Result<ApproximationResult> {
    let d = ring.dim();
    if d > 2 {
        return Err(MflabError::DimensionUnsupported(d));
    }
    let k = ModulePresentation::residue_field(ring, ctx.trunc())?;
    let alg = k.algebra().clone();
    let res = minimal_resolution(&k, d + 1, ctx)?;
    if res.differentials.len() < d + 1 {
        return Err(MflabError::Failed(
            "resolution of k terminated early (regular ring?)".into(),
        ));
    }
    let top = cut_matrix(&alg, &res.differentials[d], res.windows[d]);
    let omega = ModulePresentation::from_matrix(ring, &alg, top);
    let g_mf = mf_from_presentation(&omega, ctx)?.dual();
    let g = ModulePresentation::from_mf(&g_mf, ctx.trunc())?;
    let n = g.rows();

    // Y = Im(d_d^t) inside Ker(d_{d+1}^t) = Im(psi^t) = G
    let inclusion = if d == 0 {
        AMatrix::zero(n, 0)
    } else {
        let dd = cut_matrix(&alg, &res.differentials[d - 1], res.windows[d - 1]).transpose();
        let psi_t = g_mf.psi().to_algebra(&alg);
        solve_right(&alg, &psi_t, &dd)
            .ok_or_else(|| MflabError::Failed("image of the previous differential is not in G".into()))?
    };
    let kernel = match d {
        0 => ModulePresentation::free(ring, 0, ctx.trunc())?,
        1 => ModulePresentation::free(ring, res.betti[0], ctx.trunc())?,
        _ => ModulePresentation::from_matrix(
            ring,
            &alg,
            cut_matrix(&alg, &res.differentials[d - 2], res.windows[d - 2]).transpose(),
        ),
    };
    let kernel_resolution = minimal_resolution(&kernel, d.max(1), ctx)?;
    let quotient = ModulePresentation::from_matrix(ring, &alg, g.matrix().hcat(&inclusion));
    let quotient_length = quotient.hilbert_lengths().last().copied().unwrap_or(0);
    let map = constant_left_kernel(&alg, &inclusion);
    let free = ModulePresentation::free(ring, 1, ctx.trunc())?;
    let ext_dims = (0..=d)
        .map(|i| ext_dim(&k, &free, i, ctx))
        .collect::<Result<Vec<_>>>()?;
    let caveat =
        (d == 0).then(|| "dimension 0: every module is a lattice, so G = k and the kernel is zero".to_string());
    Ok(ApproximationResult {
        dim: d,
        g,
        g_mf,
        inclusion,
        kernel,
        map,
        kernel_resolution,
        ext_dims,
        quotient_length,
        caveat,
    })
}

/// Same construction for a Gorenstein monomial curve with a plane model.
pub fn lat_approximation_for_curve(curve: &MonomialCurveRing, ctx: &Context) -> Result<ApproximationResult> {
    if !curve.is_gorenstein() {
        return Err(MflabError::NotGorenstein(format!(
            "semigroup {:?} is not symmetric",
            curve.semigroup
        )));
    }
    let ring = curve.plane_model(ctx.trunc())?;
    lat_approximation_of_simple(&ring, ctx)
}

/// l_R of stable Hom(M, M + G); lengths equal k-dimensions since R/m = k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HLength {
    pub length: usize,
    pub trunc: usize,
    pub certificate: Certified,
}

pub fn hlength(m: &ModulePresentation, g: &ModulePresentation, ctx: &Context) -> Result<HLength> {
    let target = m.direct_sum(&g.with_trunc(m.trunc())?)?;
    let f = |c: &Context| stable_hom_dim_at(m, &target, c);
    let certificate = certify_or_grow(ctx, f)?;
    Ok(HLength {
        length: certificate.value,
        trunc: certificate.trunc,
        certificate,
    })
}

/// `certify`, but a value that keeps increasing over three levels is reported as
/// InfiniteLength.
pub(crate) fn certify_or_grow(ctx: &Context, f: impl Fn(&Context) -> Result<usize>) -> Result<Certified> {
    match certify(ctx, &f) {
        Err(MflabError::NotStabilized {
            value_low, value_high, ..
        }) => {
            let third = ctx.precision.next().next();
            let v = f(&ctx.with_precision(third))?;
            if value_low < value_high && value_high < v {
                Err(MflabError::InfiniteLength(vec![value_low, value_high, v]))
            } else {
                Err(MflabError::NotStabilized {
                    trunc: ctx.trunc(),
                    value_low,
                    value_high,
                    suggested: ctx.trunc() + 4,
                })
            }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn ring(vars: &[&str], f: &str) -> HypersurfaceRing {
        HypersurfaceRing::new(Field::fp(7).unwrap(), vars, f, 12).unwrap()
    }

    fn module(r: &HypersurfaceRing, rows: &[&[&str]]) -> ModulePresentation {
        let e: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        ModulePresentation::parse(r, e.len(), &e, 12).unwrap()
    }

    #[test]
    fn lifts_presentation_to_factorization() {
        let r = ring(&["x", "y"], "x*y + y^3");
        let m = module(&r, &[&["x + y^2"]]);
        let mf = mf_from_presentation(&m, &Context::default()).unwrap();
        assert_eq!(mf.size(), 1);
        assert!(mf.validate().is_ok());
        assert_eq!(mf.psi().get(0, 0).to_string(), "y");
    }

    #[test]
    fn non_square_presentation_is_rejected() {
        let r = ring(&["x", "y"], "x*y");
        let k = ModulePresentation::residue_field(&r, 12).unwrap();
        assert!(matches!(
            mf_from_presentation(&k, &Context::default()),
            Err(MflabError::InvalidInput(_))
        ));
    }

    #[test]
    fn approximation_over_node() {
        let r = ring(&["x", "y"], "x*y");
        let ctx = Context::default();
        let a = lat_approximation_of_simple(&r, &ctx).unwrap();
        assert!(a.verified(), "{:?}", a.report());
        assert_eq!(a.g.betti(), 2);
        assert_eq!(a.kernel.rows(), 1);
        assert!(a.caveat.is_none());
    }

    #[test]
    fn approximation_in_dimension_zero_is_flagged() {
        let r = ring(&["y"], "y^3");
        let a = lat_approximation_of_simple(&r, &Context::default()).unwrap();
        assert!(a.caveat.is_some());
        assert_eq!(a.g.betti(), 1);
        assert_eq!(a.kernel.rows(), 0);
        assert!(a.surjective());
    }

    #[test]
    fn hlength_is_symmetric_over_node() {
        let r = ring(&["x", "y"], "x*y");
        let ctx = Context::default();
        let g = lat_approximation_of_simple(&r, &ctx).unwrap().g;
        let hx = hlength(&module(&r, &[&["x"]]), &g, &ctx).unwrap();
        let hy = hlength(&module(&r, &[&["y"]]), &g, &ctx).unwrap();
        assert_eq!(hx.length, hy.length);
        let free = ModulePresentation::free(&r, 1, 12).unwrap();
        assert_eq!(hlength(&free, &g, &ctx).unwrap().length, 0);
        // stable Hom(M, G) = Hom(M, k) for lattices without free summands
        let m = module(&r, &[&["x"]]);
        assert_eq!(stable_hom_dim_at(&m, &g, &ctx).unwrap(), m.betti());
    }

    #[test]
    fn approximation_in_dimension_two() {
        let r = HypersurfaceRing::new(Field::fp(7).unwrap(), &["x", "y", "z"], "x*y - z^2", 8).unwrap();
        let ctx = Context::new(8, 42);
        let a = lat_approximation_of_simple(&r, &ctx).unwrap();
        assert!(a.verified(), "{:?}", a.report());
        assert_eq!(a.g.betti(), 4);
    }
}
