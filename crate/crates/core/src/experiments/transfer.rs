use rayon::prelude::*;

use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::homalg::{hlength, is_indecomposable, lat_approximation_of_simple, ModulePresentation};
use crate::knoerrer::sharp_into;
use crate::matfac::MatrixFactorization;
use crate::radical::Decomposition;
use crate::report::Status;
use crate::rings::HypersurfaceRing;

use super::catalog::an_curve_items;
use super::ExperimentReport;

/// n with f = c y^{n+1} in one variable.
fn one_variable_an(ring: &HypersurfaceRing) -> Option<usize> {
    if ring.vars().len() != 1 || ring.f().num_terms() != 1 {
        return None;
    }
    ring.f().order().map(|o| o - 1)
}

struct Image {
    mf: MatrixFactorization,
    summands: Result<usize>,
    catalog_match: Option<String>,
    hlength: Option<usize>,
    errors: Vec<String>,
}

fn summands_of(mf: &MatrixFactorization, ctx: &Context) -> Result<usize> {
    let pres = ModulePresentation::from_mf(mf, ctx.trunc())?;
    match is_indecomposable(&pres, ctx)?.verdict {
        Decomposition::Yes { .. } => Ok(1),
        Decomposition::No { summands, .. } => Ok(summands.max(2)),
        Decomposition::Inconclusive { reason } => Err(MflabError::Inconclusive(reason)),
    }
}

/// Sharp images of a family over R: each has at most two indecomposable summands, and the
/// images do not collapse onto fewer than ceil(|family| / 2) isomorphism classes.
pub fn knoerrer_transfer_report(
    ring: &HypersurfaceRing,
    family: &[MatrixFactorization],
    ctx: &Context,
) -> Result<ExperimentReport> {
    if family.is_empty() {
        return Err(MflabError::InvalidInput("empty family".into()));
    }
    let trunc = ctx.trunc();
    let ring = ring.with_trunc(trunc);
    let family: Vec<MatrixFactorization> = family.iter().map(|m| m.with_trunc(trunc)).collect();
    for (i, m) in family.iter().enumerate() {
        if !m.ring().compatible(&ring) {
            return Err(MflabError::MismatchedRing(format!(
                "member {i} lives over {}",
                m.ring()
            )));
        }
        m.validate()?;
        if m.reduce()?.is_empty() {
            return Err(MflabError::InvalidInput(format!(
                "member {i} is free, not a non-free indecomposable"
            )));
        }
        if !m.is_reduced() {
            return Err(MflabError::InvalidInput(format!("member {i} is not reduced")));
        }
        let pres = ModulePresentation::from_mf(m, trunc)?;
        if is_indecomposable(&pres, ctx)?.is_indecomposable() == Some(false) {
            return Err(MflabError::InvalidInput(format!("member {i} is decomposable")));
        }
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if family[i].is_isomorphic(&family[j], ctx)? {
                return Err(MflabError::InvalidInput(format!("members {i} and {j} are isomorphic")));
            }
        }
    }

    let cover = ring.double_branched_cover()?;
    let catalog = match one_variable_an(&ring) {
        Some(n) if n >= 1 => an_curve_items(&cover.ring, n, &cover.var, &ring.vars()[0])?,
        _ => Vec::new(),
    };
    let g_cover = match lat_approximation_of_simple(&cover.ring, ctx) {
        Ok(a) => Some(a.g),
        Err(MflabError::DimensionUnsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let g_base = lat_approximation_of_simple(&ring, ctx)?.g;

    let images: Vec<Image> = family
        .par_iter()
        .map(|m| -> Result<Image> {
            let mf = sharp_into(m, &cover.ring)?;
            let mut errors = Vec::new();
            let summands = summands_of(&mf, ctx);
            let mut catalog_match = None;
            for (label, c) in &catalog {
                if mf.is_isomorphic(c, ctx)? {
                    catalog_match = Some(label.clone());
                    break;
                }
            }
            let hlength = match &g_cover {
                Some(g) => match hlength(&ModulePresentation::from_mf(&mf, trunc)?, g, ctx) {
                    Ok(h) => Some(h.length),
                    Err(e) => {
                        Status::from_error(&e).ok_or_else(|| e.clone())?;
                        errors.push(e.to_string());
                        None
                    }
                },
                None => None,
            };
            Ok(Image {
                mf,
                summands,
                catalog_match,
                hlength,
                errors,
            })
        })
        .collect::<Result<_>>()?;
    let base_h: Vec<Option<usize>> = family
        .iter()
        .map(|m| {
            let pres = ModulePresentation::from_mf(m, trunc)?;
            match hlength(&pres, &g_base, ctx) {
                Ok(h) => Ok(Some(h.length)),
                Err(e) => Status::from_error(&e).map(|_| None).ok_or(e),
            }
        })
        .collect::<Result<_>>()?;

    // iso classes of images: a new class for each image not isomorphic to an earlier one,
    // weighted by its summand count
    let mut reps: Vec<usize> = Vec::new();
    let mut classes = 0usize;
    let mut collapse_unknown = false;
    for (i, img) in images.iter().enumerate() {
        let mut seen = false;
        for &r in &reps {
            if img.mf.is_isomorphic(&images[r].mf, ctx)? {
                seen = true;
                break;
            }
        }
        if !seen {
            reps.push(i);
            match &img.summands {
                Ok(s) => classes += s,
                Err(_) => collapse_unknown = true,
            }
        }
    }

    let mut rep = ExperimentReport::new(
        "knoerrer-transfer",
        serde_json::json!({ "ring": ring.to_string(), "cover": cover.ring.to_string(), "family": family.len() }),
        ctx,
    );
    let mut statuses = Vec::new();
    for (i, (img, h)) in images.iter().zip(&base_h).enumerate() {
        let summand_status = match &img.summands {
            Ok(s) => Status::from_bool(*s <= 2),
            Err(e) => Status::from_error(e).ok_or_else(|| e.clone())?,
        };
        let catalog_status = if catalog.is_empty() {
            Status::Pass
        } else {
            Status::from_bool(img.catalog_match.is_some())
        };
        let status = summand_status.and(catalog_status);
        statuses.push(status);
        rep.push(
            format!("member {i}"),
            status,
            serde_json::json!({
                "size": family[i].size(),
                "sharp_size": img.mf.size(),
                "summands": img.summands.as_ref().ok(),
                "catalog_match": img.catalog_match,
                "hlength_base": h,
                "hlength_cover": img.hlength,
                "errors": img.errors,
            }),
        );
    }
    let needed = family.len().div_ceil(2);
    let non_collapse = if collapse_unknown {
        Status::Inconclusive
    } else {
        Status::from_bool(classes >= needed)
    };
    let equal_base_h = base_h.iter().all(|h| h.is_some()) && base_h.windows(2).all(|w| w[0] == w[1]);
    rep.summary = serde_json::json!({
        "image_classes": classes,
        "needed": needed,
        "non_collapse": non_collapse,
        "equal_hlength_base": equal_base_h,
    });
    if !equal_base_h {
        rep.notes.push("family members do not share one ĥ-length over R".into());
    }
    if g_cover.is_none() {
        rep.notes
            .push("ĥ over the cover skipped: cover dimension above 2".into());
    }
    Ok(rep.finish(std::iter::once(non_collapse)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{catalog_entry, Family};
    use crate::field::Field;

    fn f7() -> Field {
        Field::fp(7).unwrap()
    }

    #[test]
    fn an_family_matches_curve_catalog() {
        let ctx = Context::new(12, 42);
        let e = catalog_entry(Family::AnOneVariable, 4, &f7(), 12).unwrap();
        let rep = knoerrer_transfer_report(&e.ring, &e.mfs, &ctx).unwrap();
        assert!(rep.passed(), "{rep:?}");
        for item in &rep.items {
            assert!(item.data["catalog_match"].is_string());
            assert_eq!(item.data["summands"], 1);
        }
    }

    #[test]
    fn single_member() {
        let ctx = Context::new(12, 42);
        let e = catalog_entry(Family::AnOneVariable, 2, &f7(), 12).unwrap();
        let rep = knoerrer_transfer_report(&e.ring, &e.mfs[..1], &ctx).unwrap();
        assert_eq!(rep.items.len(), 1);
    }

    #[test]
    fn free_member_rejected() {
        let ctx = Context::new(12, 42);
        let e = catalog_entry(Family::AnOneVariable, 2, &f7(), 12).unwrap();
        let free = MatrixFactorization::rank_one(&e.ring, "y^3", "1").unwrap();
        let fam = vec![e.mfs[0].clone(), free];
        assert!(matches!(
            knoerrer_transfer_report(&e.ring, &fam, &ctx),
            Err(MflabError::InvalidInput(_))
        ));
    }

    #[test]
    fn isomorphic_members_rejected() {
        let ctx = Context::new(12, 42);
        let e = catalog_entry(Family::AnOneVariable, 3, &f7(), 12).unwrap();
        let fam = vec![e.mfs[0].clone(), e.mfs[0].clone()];
        assert!(knoerrer_transfer_report(&e.ring, &fam, &ctx).is_err());
    }
}
