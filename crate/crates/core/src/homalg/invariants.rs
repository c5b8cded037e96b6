use serde::{Deserialize, Serialize};

use crate::algebra::{monomials_of_degree, AMatrix, TruncAlgebra};
use crate::context::{Context, Precision};
use crate::error::{MflabError, Result};
use crate::linalg::{self, Echelon, SVec};
use crate::radical::{Decomposition, FdAlgebra};
use crate::series::TruncSeries;
use crate::smatrix::SeriesMatrix;

use super::hom::{hom_space_at, stable_space_at};
use super::ModulePresentation;

const DECOMPOSE_STREAM: u64 = 0xdec0;

/// e(M) as the d-th difference of l(M/m^{j+1}M).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplicity {
    pub value: usize,
    pub trunc: usize,
    pub lengths: Vec<usize>,
    pub differences: Vec<i64>,
}

pub fn multiplicity_module(m: &ModulePresentation, ctx: &Context) -> Result<Multiplicity> {
    let d = m.ring().dim();
    if d == 0 {
        return Err(MflabError::InvalidInput(
            "multiplicity needs a ring of dimension at least 1".into(),
        ));
    }
    let m = m.with_trunc(ctx.trunc())?;
    let lengths = m.hilbert_lengths();
    let mut diff: Vec<i64> = lengths.iter().map(|&l| l as i64).collect();
    for _ in 0..d {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
    }
    if diff.len() < 3 {
        return Err(MflabError::NotStabilized {
            trunc: ctx.trunc(),
            value_low: 0,
            value_high: 0,
            suggested: ctx.trunc() + 4,
        });
    }
    let tail = &diff[diff.len() - 3..];
    if tail[0] != tail[1] || tail[1] != tail[2] || tail[2] < 0 {
        return Err(MflabError::NotStabilized {
            trunc: ctx.trunc(),
            value_low: tail[0].max(0) as usize,
            value_high: tail[2].max(0) as usize,
            suggested: ctx.trunc() + 4,
        });
    }
    Ok(Multiplicity {
        value: tail[2] as usize,
        trunc: ctx.trunc(),
        lengths,
        differences: diff,
    })
}

/// Outcome of the two independent faithfulness tests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaithfulCheck {
    pub value: bool,
    /// x·id vanishes in stable End(M) below the cutoff.
    pub stably_null: bool,
    /// A δ A = x A is solvable, i.e. x·id factors through the free cover.
    pub lift_solvable: bool,
    pub trunc: usize,
}

fn element_in(alg: &TruncAlgebra, x: &TruncSeries, field: &crate::field::Field) -> SVec {
    alg.from_terms(x.terms().map(|(m, c)| (m, field.residue(c))))
}

/// Solves A δ A = x A over R^{(N)}.
fn factors_through_cover(alg: &TruncAlgebra, a: &AMatrix, x: &SVec) -> bool {
    let p = alg.p();
    let (r, c) = (a.rows, a.cols);
    if c == 0 {
        return true;
    }
    let w = (r * c) as u32;
    let flat = |m: &AMatrix| -> SVec {
        let pairs = m
            .data
            .iter()
            .enumerate()
            .flat_map(|(slot, e)| e.iter().map(move |&(s, v)| (s * w + slot as u32, v as u64)));
        linalg::from_pairs(pairs, p)
    };
    let mut ech = Echelon::new(p, alg.dim() * r * c, false);
    for s in 0..alg.dim() as u32 {
        for k in 0..c {
            for l in 0..r {
                let mut delta = AMatrix::zero(c, r);
                delta.set(k, l, vec![(s, 1)]);
                ech.push(&flat(&a.mul(alg, &delta).mul(alg, a)));
            }
        }
    }
    ech.contains(&flat(&a.scale(alg, x)))
}

fn faithful_at(m: &ModulePresentation, x: &TruncSeries, ctx: &Context) -> Result<(bool, bool)> {
    let m = m.with_trunc(ctx.trunc())?.minimize();
    let alg = m.algebra().clone();
    let xa = element_in(&alg, x, m.ring().field());
    let space = stable_space_at(&m, &m, ctx)?;
    let xi = AMatrix::scalar(&alg, m.rows(), &xa);
    Ok((space.is_null(&xi), factors_through_cover(&alg, m.matrix(), &xa)))
}

/// Whether multiplication by x on M factors through a free module.
pub fn check_faithful_element(m: &ModulePresentation, x: &TruncSeries, ctx: &Context) -> Result<FaithfulCheck> {
    if x.is_unit() {
        return Err(MflabError::InvalidInput("element must lie in the maximal ideal".into()));
    }
    let (null_lo, lift_lo) = faithful_at(m, x, ctx)?;
    let (null_hi, lift_hi) = faithful_at(m, x, &ctx.with_precision(ctx.precision.next()))?;
    if null_lo != null_hi || lift_lo != lift_hi {
        return Err(MflabError::NotStabilized {
            trunc: ctx.trunc(),
            value_low: usize::from(lift_lo),
            value_high: usize::from(lift_hi),
            suggested: ctx.trunc() + 4,
        });
    }
    if null_lo != lift_lo {
        return Err(MflabError::Inconclusive(format!(
            "stable End test says {null_lo}, lifting test says {lift_lo}"
        )));
    }
    Ok(FaithfulCheck {
        value: lift_lo,
        stably_null: null_lo,
        lift_solvable: lift_lo,
        trunc: ctx.trunc(),
    })
}

/// Minimal c with m^c · stable End(M) = 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnihilatorExponent {
    pub value: usize,
    pub trunc: usize,
    pub value_next: usize,
    pub trunc_next: usize,
}

fn annexp_at(m: &ModulePresentation, ctx: &Context) -> Result<Option<usize>> {
    let m = m.with_trunc(ctx.trunc())?.minimize();
    let alg = m.algebra().clone();
    let space = stable_space_at(&m, &m, ctx)?;
    if space.dim() == 0 {
        return Ok(Some(0));
    }
    for c in 1..ctx.precision.cutoff {
        ctx.check()?;
        let killed = monomials_of_degree(alg.nvars(), c).iter().all(|mono| {
            let mu = alg.nf_monomial(mono);
            space.is_null(&AMatrix::scalar(&alg, m.rows(), &mu))
        });
        if killed {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

pub fn annihilator_exponent(m: &ModulePresentation, ctx: &Context) -> Result<AnnihilatorExponent> {
    let next = ctx.with_precision(ctx.precision.next());
    let lo = annexp_at(m, ctx)?;
    let hi = annexp_at(m, &next)?;
    match (lo, hi) {
        (Some(a), Some(b)) if a == b => Ok(AnnihilatorExponent {
            value: a,
            trunc: ctx.trunc(),
            value_next: b,
            trunc_next: next.trunc(),
        }),
        (None, None) => Err(MflabError::InfiniteLength(vec![
            ctx.precision.cutoff,
            next.precision.cutoff,
        ])),
        (a, b) => Err(MflabError::NotStabilized {
            trunc: ctx.trunc(),
            value_low: a.unwrap_or(ctx.precision.cutoff),
            value_high: b.unwrap_or(next.precision.cutoff),
            suggested: ctx.trunc() + 4,
        }),
    }
}

/// Indecomposability verdict from End(M) modulo maps into m^T M.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indecomposability {
    pub verdict: Decomposition,
    pub end_dim: usize,
    pub trunc: usize,
    pub cutoff: usize,
    /// The splitting idempotent as a matrix on the generators, when one was found.
    pub splitting: Option<Vec<Vec<String>>>,
}

impl Indecomposability {
    pub fn is_indecomposable(&self) -> Option<bool> {
        match self.verdict {
            Decomposition::Yes { .. } => Some(true),
            Decomposition::No { .. } => Some(false),
            Decomposition::Inconclusive { .. } => None,
        }
    }
}

pub fn is_indecomposable(m: &ModulePresentation, ctx: &Context) -> Result<Indecomposability> {
    let cutoff = ctx.precision.cutoff;
    let min = m.minimize();
    if min.rows() == 0 {
        return Ok(Indecomposability {
            verdict: Decomposition::Inconclusive {
                reason: "zero module".into(),
            },
            end_dim: 0,
            trunc: ctx.trunc(),
            cutoff,
            splitting: None,
        });
    }
    let hom = hom_space_at(&min, &min, ctx)?;
    let check = ctx.with_precision(Precision {
        trunc: ctx.trunc() + 2,
        cutoff,
    });
    let dim_hi = hom_space_at(&min, &min, &check)?.dim();
    if dim_hi != hom.dim() {
        return Err(MflabError::NotStabilized {
            trunc: ctx.trunc(),
            value_low: hom.dim(),
            value_high: dim_hi,
            suggested: ctx.trunc() + 4,
        });
    }
    let alg = hom.algebra().clone();
    let lost = || MflabError::Inconclusive("composition left the computed End space; raise --trunc".into());
    let mut table = Vec::with_capacity(hom.dim());
    for a in &hom.basis {
        ctx.check()?;
        let row = hom
            .basis
            .iter()
            .map(|b| hom.coords(&a.mul(&alg, b)).ok_or_else(lost))
            .collect::<Result<Vec<_>>>()?;
        table.push(row);
    }
    let one = hom.coords(&AMatrix::identity(&alg, min.rows())).ok_or_else(lost)?;
    let end = FdAlgebra::new(alg.p(), table, one);
    let verdict = end.decompose(&mut ctx.rng(DECOMPOSE_STREAM));
    let splitting = match &verdict {
        Decomposition::No { idempotent, .. } => {
            let mut e = AMatrix::zero(min.rows(), min.rows());
            for (c, b) in idempotent.iter().zip(&hom.basis) {
                if *c != 0 {
                    e = e.add(&alg, &b.scale(&alg, &alg.constant(*c)));
                }
            }
            Some(SeriesMatrix::from_algebra(min.ring().series_ring(), &alg, &e).to_strings())
        }
        _ => None,
    };
    Ok(Indecomposability {
        verdict,
        end_dim: hom.dim(),
        trunc: ctx.trunc(),
        cutoff,
        splitting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::rings::HypersurfaceRing;

    fn ring(vars: &[&str], f: &str) -> HypersurfaceRing {
        HypersurfaceRing::new(Field::fp(7).unwrap(), vars, f, 12).unwrap()
    }

    fn module(r: &HypersurfaceRing, rows: &[&[&str]]) -> ModulePresentation {
        let e: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        ModulePresentation::parse(r, e.len(), &e, 12).unwrap()
    }

    #[test]
    fn multiplicities() {
        let ctx = Context::default();
        let r = ring(&["x", "y"], "x^7 - y^3");
        let free = ModulePresentation::free(&r, 1, 12).unwrap();
        assert_eq!(multiplicity_module(&free, &ctx).unwrap().value, 3);
        let free3 = ModulePresentation::free(&r, 3, 12).unwrap();
        assert_eq!(multiplicity_module(&free3, &ctx).unwrap().value, 9);
        let node = ring(&["x", "y"], "x*y");
        assert_eq!(multiplicity_module(&module(&node, &[&["x"]]), &ctx).unwrap().value, 1);
    }

    #[test]
    fn faithful_elements() {
        let ctx = Context::default();
        let node = ring(&["x", "y"], "x*y");
        let m = module(&node, &[&["x"]]);
        let x = node.parse("x + y").unwrap();
        assert!(check_faithful_element(&m, &x, &ctx).unwrap().value);
        let zero = node.parse("0").unwrap();
        assert!(check_faithful_element(&m, &zero, &ctx).unwrap().value);
        let y = node.parse("y").unwrap();
        assert!(check_faithful_element(&m, &y, &ctx).unwrap().value);

        let a2 = ring(&["y"], "y^3");
        let k = module(&a2, &[&["y"]]);
        let y = a2.parse("y").unwrap();
        // y kills k, so y·id_k = 0 factors through anything
        assert!(check_faithful_element(&k, &y, &ctx).unwrap().value);
        // over y^3, 1 -> y -> 1 factors y·id through R
        assert!(
            check_faithful_element(&module(&a2, &[&["y^2"]]), &y, &ctx)
                .unwrap()
                .value
        );
        let a4 = ring(&["y"], "y^5");
        let m2 = module(&a4, &[&["y^2"]]);
        let y = a4.parse("y").unwrap();
        let chk = check_faithful_element(&m2, &y, &ctx).unwrap();
        assert!(!chk.value && !chk.stably_null && !chk.lift_solvable);
        assert!(
            check_faithful_element(&m2, &a4.parse("y^2").unwrap(), &ctx)
                .unwrap()
                .value
        );
    }

    #[test]
    fn annihilator_exponents() {
        let ctx = Context::default();
        let a2 = ring(&["y"], "y^3");
        assert_eq!(annihilator_exponent(&module(&a2, &[&["y"]]), &ctx).unwrap().value, 1);
        assert_eq!(annihilator_exponent(&module(&a2, &[&["y^2"]]), &ctx).unwrap().value, 1);
        let free = ModulePresentation::free(&a2, 2, 12).unwrap();
        assert_eq!(annihilator_exponent(&free, &ctx).unwrap().value, 0);
        let a4 = ring(&["y"], "y^5");
        assert_eq!(annihilator_exponent(&module(&a4, &[&["y^2"]]), &ctx).unwrap().value, 2);
    }

    #[test]
    fn decomposability() {
        let ctx = Context::default();
        let a2 = ring(&["y"], "y^3");
        let k = module(&a2, &[&["y"]]);
        assert_eq!(is_indecomposable(&k, &ctx).unwrap().is_indecomposable(), Some(true));
        let kk = k.direct_sum(&k).unwrap();
        let out = is_indecomposable(&kk, &ctx).unwrap();
        assert_eq!(out.is_indecomposable(), Some(false));
        assert!(out.splitting.is_some());
        let node = ring(&["x", "y"], "x*y");
        let m = module(&node, &[&["x"]]);
        assert_eq!(is_indecomposable(&m, &ctx).unwrap().is_indecomposable(), Some(true));
        let mixed = m.direct_sum(&ModulePresentation::free(&node, 1, 12).unwrap()).unwrap();
        assert_eq!(
            is_indecomposable(&mixed, &ctx).unwrap().is_indecomposable(),
            Some(false)
        );
    }
}
