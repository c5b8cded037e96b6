use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::unflatten;
use crate::algebra::AMatrix;
use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::field::FieldElem;
use crate::homalg::{
    hlength, is_indecomposable, lat_approximation_of_simple, mf_from_presentation, ModulePresentation,
};
use crate::homalg::{kernel_ctx, minimal_generators};
use crate::linalg::{from_pairs, Echelon, SVec};
use crate::matfac::MatrixFactorization;
use crate::report::Status;
use crate::rings::MonomialCurveRing;
use crate::series::{SeriesRing, TruncSeries};

use super::ExperimentReport;

/// A rank-one module R<g_1, ..., g_m> inside k[[t]].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalModule {
    pub curve: MonomialCurveRing,
    pub tau: FieldElem,
    pub generators: Vec<TruncSeries>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalModuleFile {
    pub semigroup: Vec<u32>,
    pub tau: String,
    pub generators: Vec<String>,
}

impl FractionalModule {
    pub fn new(curve: &MonomialCurveRing, tau: FieldElem, generators: Vec<TruncSeries>) -> Result<Self> {
        if generators.is_empty() || generators.iter().any(|g| g.is_zero()) {
            return Err(MflabError::InvalidInput("generators must be nonzero".into()));
        }
        Ok(FractionalModule {
            curve: curve.clone(),
            tau,
            generators,
        })
    }

    pub fn to_file(&self) -> FractionalModuleFile {
        FractionalModuleFile {
            semigroup: self.curve.semigroup.clone(),
            tau: self.curve.field.residue(&self.tau).to_string(),
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
        }
    }

    /// Whether t^c k[[t]] lies in the module, c the conductor of the curve. By Nakayama it is
    /// enough that t^{c+j}, j < a_1, lie in the k-span of the t^s g_i modulo t^{c+a_1}.
    pub fn contains_conductor(&self) -> bool {
        let c = self.curve.conductor() as usize;
        let a1 = self.curve.multiplicity() as usize;
        let top = c + a1;
        let k = &self.curve.field;
        let p = match k.prime() {
            Some(p) => p,
            None => return self.contains_conductor_generators(),
        };
        let mut ech = Echelon::new(p, top, false);
        for g in &self.generators {
            for s in (0..top as u32).filter(|&s| self.curve.contains_exponent(s)) {
                let v = from_pairs(
                    g.terms()
                        .map(|(m, e)| (m[0] + s, k.residue(e)))
                        .filter(|&(i, _)| (i as usize) < top),
                    p,
                );
                ech.push(&v);
            }
        }
        (c..top).all(|j| ech.contains(&vec![(j as u32, 1)]))
    }

    fn contains_conductor_generators(&self) -> bool {
        let c = self.curve.conductor();
        (c..c + self.curve.multiplicity()).all(|j| {
            self.generators
                .iter()
                .any(|g| g.num_terms() == 1 && g.order() == Some(j as usize))
        })
    }
}

/// dim_k of D = k[[t]]/(m k[[t]] + t^c k[[t]]).
fn dim_d(curve: &MonomialCurveRing) -> usize {
    curve.multiplicity().min(curve.conductor()) as usize
}

/// The modules M_tau = R<1, t + tau t^2, t^c, ..., t^{c+a_1-1}>, one per distinct tau.
pub fn pullback_family(curve: &MonomialCurveRing, taus: &[i64]) -> Result<Vec<FractionalModule>> {
    let d = dim_d(curve);
    if d < 3 {
        return Err(MflabError::DTooSmall(d));
    }
    let k = &curve.field;
    let ring = curve.t_ring();
    let c = curve.conductor();
    let mut seen: Vec<FieldElem> = Vec::new();
    let mut out = Vec::new();
    for &tau in taus {
        let tau = k.from_i64(tau);
        if seen.contains(&tau) {
            continue;
        }
        seen.push(tau.clone());
        let t = TruncSeries::var(&ring, 0);
        let alpha_gamma = t.try_add(&t.pow(2).scale(&tau))?;
        let mut gens = vec![TruncSeries::one(&ring), alpha_gamma];
        gens.extend((c..c + curve.multiplicity()).map(|j| t.pow(j)));
        out.push(FractionalModule::new(curve, tau, gens)?);
    }
    Ok(out)
}

/// Presentation over the plane model R^{(N)}, N = ctx.trunc(). Syzygies of the generators
/// are computed at a larger truncation N' where the map R^{(N')} -> k[t]/t^L, L = a(N'+1),
/// is well defined and its kernel agrees with the true syzygies below degree N + 1.
pub fn module_presentation(m: &FractionalModule, ctx: &Context) -> Result<ModulePresentation> {
    let curve = &m.curve;
    if curve.semigroup.len() != 2 {
        return Err(MflabError::InvalidRing(format!(
            "plane model needs two generators, got {:?}",
            curve.semigroup
        )));
    }
    let p = curve.field.prime().ok_or(MflabError::RequiresFiniteField)?;
    let (a, b) = (curve.semigroup[0] as usize, curve.semigroup[1] as usize);
    let n = ctx.trunc();
    let c = curve.conductor() as usize;
    let max_ord = m.generators.iter().filter_map(|g| g.order()).max().unwrap_or(0);
    // t^L k[[t]] lies in m^W M once L >= c + bW + ord(1 in M) and every generator order < L.
    let need_l = (c + b * (n + 1)).max(max_ord + 1);
    let big = need_l.div_ceil(a).saturating_sub(1).max(n);
    let l = a * (big + 1);
    let window = (l - c) / b;

    let ring = curve.plane_model(big)?;
    let alg = ring.quotient_algebra(big)?;
    let k = &curve.field;
    let t_ring = SeriesRing::new(k.clone(), vec!["t".into()], l)?;
    let gens: Vec<Vec<(u32, u64)>> = m
        .generators
        .iter()
        .map(|g| {
            let g = g.embed(&t_ring)?;
            Ok(g.terms().map(|(e, c)| (e[0], k.residue(c))).collect())
        })
        .collect::<Result<_>>()?;
    let ngen = gens.len();
    let mut images: Vec<SVec> = Vec::with_capacity(alg.dim() * ngen);
    for s in 0..alg.dim() as u32 {
        let mono = alg.std_monomial(s);
        let shift = a as u32 * mono[0] + b as u32 * mono[1];
        for g in &gens {
            images.push(from_pairs(
                g.iter()
                    .map(|&(e, c)| (e + shift, c))
                    .filter(|&(e, _)| (e as usize) < l),
                p,
            ));
        }
    }
    let ker = kernel_ctx(&images, l, p, ctx)?;
    let syz = minimal_generators(&alg, &ker, ngen, window);
    let cols: Vec<Vec<SVec>> = syz.iter().map(|v| unflatten(v, ngen)).collect();
    let pres = ModulePresentation::from_matrix(&ring, &alg, AMatrix::from_columns(ngen, &cols));
    pres.minimize().with_trunc(n)
}

struct Member {
    tau: FieldElem,
    module: FractionalModule,
    betti: usize,
    mf: Option<MatrixFactorization>,
    indecomposable: Status,
    hlength: Option<usize>,
    errors: Vec<String>,
}

fn status_of(e: MflabError, errors: &mut Vec<String>) -> Result<Status> {
    let s = Status::from_error(&e).ok_or_else(|| e.clone())?;
    errors.push(e.to_string());
    Ok(s)
}

fn process(module: FractionalModule, g: &ModulePresentation, ctx: &Context) -> Result<Member> {
    let pres = module_presentation(&module, ctx)?;
    let mut errors = Vec::new();
    let mf = match mf_from_presentation(&pres, ctx) {
        Ok(mf) => Some(mf),
        Err(e @ MflabError::InvalidInput(_)) | Err(e @ MflabError::Failed(_)) => {
            errors.push(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let indecomposable = match is_indecomposable(&pres, ctx) {
        Ok(r) => match r.is_indecomposable() {
            Some(v) => Status::from_bool(v),
            None => Status::Inconclusive,
        },
        Err(e) => status_of(e, &mut errors)?,
    };
    let hlength = match hlength(&pres, g, ctx) {
        Ok(h) => Some(h.length),
        Err(e) => {
            status_of(e, &mut errors)?;
            None
        }
    };
    Ok(Member {
        tau: module.tau.clone(),
        betti: pres.rows(),
        module,
        mf,
        indecomposable,
        hlength,
        errors,
    })
}

fn all_equal<T: PartialEq>(xs: impl IntoIterator<Item = T>) -> bool {
    let mut it = xs.into_iter();
    match it.next() {
        Some(first) => it.all(|x| x == first),
        None => true,
    }
}

/// Indecomposability, pairwise non-isomorphism, equal betti numbers and equal ĥ-lengths of
/// the family M_tau.
pub fn bt_family_report(curve: &MonomialCurveRing, taus: &[i64], ctx: &Context) -> Result<ExperimentReport> {
    if !curve.is_gorenstein() {
        return Err(MflabError::NotGorenstein(format!(
            "semigroup {:?} is not symmetric",
            curve.semigroup
        )));
    }
    curve.field.prime().ok_or(MflabError::RequiresFiniteField)?;
    let family = pullback_family(curve, taus)?;
    let mut rep = ExperimentReport::new(
        "bt-family",
        serde_json::json!({
            "semigroup": curve.semigroup,
            "field": curve.field.to_string(),
            "taus": taus,
        }),
        ctx,
    );
    if family.len() < taus.len() {
        rep.notes
            .push(format!("{} repeated tau values removed", taus.len() - family.len()));
    }
    let plane = curve.plane_model(ctx.trunc())?;
    let approx = lat_approximation_of_simple(&plane, ctx)?;
    let g = Arc::new(approx.g);
    let members: Vec<Member> = family
        .into_par_iter()
        .map(|m| process(m, &g, ctx))
        .collect::<Result<_>>()?;

    let n = members.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let iso: Vec<Status> = pairs
        .par_iter()
        .map(|&(i, j)| match (&members[i].mf, &members[j].mf) {
            (Some(a), Some(b)) => match a.is_isomorphic(b, ctx) {
                Ok(v) => Ok(Status::from_bool(!v)),
                Err(e) => Status::from_error(&e).ok_or(e),
            },
            _ => Ok(Status::Inconclusive),
        })
        .collect::<Result<_>>()?;
    let mut distinct = vec![Status::Pass; n];
    for (&(i, j), &s) in pairs.iter().zip(&iso) {
        distinct[i] = distinct[i].and(s);
        distinct[j] = distinct[j].and(s);
    }

    let k = &curve.field;
    for (m, d) in members.iter().zip(&distinct) {
        let status = m.indecomposable.and(*d);
        rep.push(
            format!("tau={}", k.residue(&m.tau)),
            status,
            serde_json::json!({
                "tau": k.residue(&m.tau).to_string(),
                "generators": m.module.to_file().generators,
                "betti": m.betti,
                "hlength": m.hlength,
                "indecomposable": m.indecomposable,
                "distinct": d,
                "contains_conductor": m.module.contains_conductor(),
                "errors": m.errors,
            }),
        );
    }
    let pairwise = Status::all(iso.iter().copied());
    let equal_betti = Status::from_bool(all_equal(members.iter().map(|m| m.betti)));
    let equal_h = if members.iter().any(|m| m.hlength.is_none()) {
        Status::Inconclusive
    } else {
        Status::from_bool(all_equal(members.iter().map(|m| m.hlength)))
    };
    let indec = Status::all(members.iter().map(|m| m.indecomposable));
    let iso_pairs: Vec<String> = pairs
        .iter()
        .zip(&iso)
        .filter(|(_, s)| **s == Status::Fail)
        .map(|(&(i, j), _)| format!("{} ~ {}", k.residue(&members[i].tau), k.residue(&members[j].tau)))
        .collect();
    rep.summary = serde_json::json!({
        "members": n,
        "indecomposable": indec,
        "pairwise_non_isomorphic": pairwise,
        "equal_betti": equal_betti,
        "betti": members.first().map(|m| m.betti),
        "equal_hlength": equal_h,
        "hlength": members.first().and_then(|m| m.hlength),
        "isomorphic_pairs": iso_pairs.len(),
    });
    if !iso_pairs.is_empty() {
        let shown: Vec<&String> = iso_pairs.iter().take(5).collect();
        rep.notes
            .push(format!("isomorphic pairs (first {}): {:?}", shown.len(), shown));
    }
    Ok(rep.finish([indec, pairwise, equal_betti, equal_h]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn curve(a: u32, b: u32, p: u64) -> MonomialCurveRing {
        MonomialCurveRing::new(Field::fp(p).unwrap(), &[a, b], 40).unwrap()
    }

    #[test]
    fn family_generators() {
        let c = curve(3, 7, 101);
        assert_eq!(c.conductor(), 12);
        let fam = pullback_family(&c, &[0, 5]).unwrap();
        let gens: Vec<String> = fam[0].generators.iter().map(|g| g.to_string()).collect();
        assert_eq!(gens, ["1", "t", "t^12", "t^13", "t^14"]);
        assert_eq!(fam[1].generators[1].to_string(), "t + 5*t^2");
        assert!(fam.iter().all(|m| m.contains_conductor()));
    }

    #[test]
    fn small_d_rejected() {
        assert_eq!(pullback_family(&curve(2, 3, 101), &[1]), Err(MflabError::DTooSmall(2)));
    }

    #[test]
    fn repeated_taus_deduplicated() {
        let fam = pullback_family(&curve(3, 7, 101), &[1, 1, 102, 2]).unwrap();
        assert_eq!(fam.len(), 2);
    }

    #[test]
    fn conductor_check_detects_missing_part() {
        let c = curve(3, 7, 101);
        let r = c.t_ring();
        let m = FractionalModule::new(&c, c.field.one(), vec![TruncSeries::one(&r)]).unwrap();
        // R itself contains its conductor ideal.
        assert!(m.contains_conductor());
        let t = TruncSeries::var(&r, 0);
        let m = FractionalModule::new(&c, c.field.one(), vec![t.pow(13)]).unwrap();
        assert!(!m.contains_conductor());
    }

    #[test]
    fn presentation_of_the_ring_is_free() {
        let c = curve(3, 7, 101);
        let r = c.t_ring();
        let m = FractionalModule::new(
            &c,
            c.field.one(),
            vec![TruncSeries::one(&r), TruncSeries::var(&r, 0).pow(12)],
        )
        .unwrap();
        let pres = module_presentation(&m, &Context::new(8, 42)).unwrap();
        assert_eq!((pres.rows(), pres.cols()), (1, 0));
    }

    #[test]
    fn members_have_two_generators() {
        let c = curve(3, 7, 101);
        let ctx = Context::new(8, 42);
        for m in pullback_family(&c, &[0, 3]).unwrap() {
            let pres = module_presentation(&m, &ctx).unwrap();
            assert_eq!((pres.rows(), pres.cols()), (2, 2));
            let mf = mf_from_presentation(&pres, &ctx).unwrap();
            assert!(mf.validate().is_ok());
        }
    }

    #[test]
    fn single_member_report() {
        let rep = bt_family_report(&curve(3, 7, 101), &[4], &Context::new(8, 42)).unwrap();
        assert_eq!(rep.items.len(), 1);
        assert_eq!(rep.summary["betti"], 2);
        assert_eq!(rep.summary["pairwise_non_isomorphic"], "pass");
    }
}
