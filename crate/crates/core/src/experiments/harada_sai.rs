use serde::{Deserialize, Serialize};

use crate::algebra::flatten;
use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::hmf::certify;
use crate::homalg::{check_faithful_element, image_echelon, ModulePresentation};
use crate::linalg::dense;
use crate::linalg::Echelon;
use crate::matfac::{MatrixFactorization, MfFile};
use crate::report::Status;
use crate::rings::{HypersurfaceRing, RingDescriptor};
use crate::series::TruncSeries;
use crate::smatrix::SeriesMatrix;

use super::ExperimentReport;

/// A morphism of matrix factorizations: a0 φ = φ' a1 and a1 ψ = ψ' a0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MfMorphism {
    source: MatrixFactorization,
    target: MatrixFactorization,
    a0: SeriesMatrix,
    a1: SeriesMatrix,
}

impl MfMorphism {
    pub fn new(
        source: &MatrixFactorization,
        target: &MatrixFactorization,
        a0: SeriesMatrix,
        a1: SeriesMatrix,
    ) -> Result<Self> {
        if !source.ring().compatible(target.ring()) {
            return Err(MflabError::MismatchedRing(format!(
                "{} vs {}",
                source.ring(),
                target.ring()
            )));
        }
        let (n, m) = (source.size(), target.size());
        for (name, a) in [("a0", &a0), ("a1", &a1)] {
            if (a.rows, a.cols) != (m, n) {
                return Err(MflabError::SizeMismatch(format!(
                    "{name} is {}x{}, expected {m}x{n}",
                    a.rows, a.cols
                )));
            }
        }
        let closed =
            a0.mul(source.phi())? == target.phi().mul(&a1)? && a1.mul(source.psi())? == target.psi().mul(&a0)?;
        if !closed {
            return Err(MflabError::InvalidInput(
                "pair (a0, a1) does not commute with the factorizations".into(),
            ));
        }
        Ok(MfMorphism {
            source: source.clone(),
            target: target.clone(),
            a0,
            a1,
        })
    }

    pub fn source(&self) -> &MatrixFactorization {
        &self.source
    }

    pub fn target(&self) -> &MatrixFactorization {
        &self.target
    }

    pub fn a0(&self) -> &SeriesMatrix {
        &self.a0
    }

    pub fn a1(&self) -> &SeriesMatrix {
        &self.a1
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &MfMorphism) -> Result<MfMorphism> {
        if next.source != self.target {
            return Err(MflabError::SizeMismatch("maps are not composable".into()));
        }
        Ok(MfMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            a0: next.a0.mul(&self.a0)?,
            a1: next.a1.mul(&self.a1)?,
        })
    }

    /// Whether the induced map of cokernels is an isomorphism. Both factorizations are
    /// assumed reduced, so this happens exactly when a0(0) is invertible.
    pub fn is_isomorphism(&self, ctx: &Context) -> Result<bool> {
        if self.source.size() != self.target.size() || !self.source.is_isomorphic(&self.target, ctx)? {
            return Ok(false);
        }
        let ring = self.source.ring();
        let alg = ring.ambient_algebra(0)?;
        let c = self.a0.to_algebra(&alg).constant_part(&alg);
        Ok(dense::rank(&c, alg.p()) == self.source.size())
    }
}

/// Target module modulo x^2, as an echelon of Im φ' + x^2 F over R^{(N)}.
struct Reduction {
    alg: std::sync::Arc<crate::algebra::TruncAlgebra>,
    ech: Echelon,
}

impl Reduction {
    fn new(mf: &MatrixFactorization, x2: &TruncSeries, trunc: usize) -> Result<Self> {
        let ring = mf.ring();
        let alg = ring.quotient_algebra(trunc)?;
        let r = mf.size();
        let x2 = SeriesMatrix::scalar(ring.series_ring(), r, x2);
        let gens = mf.phi().to_algebra(&alg).hcat(&x2.to_algebra(&alg));
        let ech = image_echelon(&alg, &gens);
        Ok(Reduction { alg, ech })
    }

    fn length(&self, r: usize) -> usize {
        self.alg.dim() * r - self.ech.rank()
    }

    fn kills(&self, a0: &SeriesMatrix) -> bool {
        let a = a0.to_algebra(&self.alg);
        (0..a.cols).all(|j| self.ech.contains(&flatten(&a.column(j), self.alg.p())))
    }
}

/// l(M / x^2 M), certified across two truncations.
fn length_mod_x2(mf: &MatrixFactorization, x2: &TruncSeries, ctx: &Context) -> Result<usize> {
    let c = certify(ctx, |c| Ok(Reduction::new(mf, x2, c.trunc())?.length(mf.size())))?;
    Ok(c.value)
}

/// Least prefix of `maps` whose composite vanishes after tensoring with R/(x^2), against the
/// classical bound 2^b - 1 with b the largest length of a member modulo x^2.
pub fn harada_sai_chain(maps: &[MfMorphism], x: &TruncSeries, ctx: &Context) -> Result<ExperimentReport> {
    if maps.is_empty() {
        return Err(MflabError::InvalidInput("empty chain".into()));
    }
    for w in maps.windows(2) {
        if w[0].target != w[1].source {
            return Err(MflabError::InvalidInput("consecutive maps are not composable".into()));
        }
    }
    for (i, f) in maps.iter().enumerate() {
        if f.is_isomorphism(ctx)? {
            return Err(MflabError::InvalidInput(format!("map {i} is an isomorphism")));
        }
    }
    let trunc = ctx.trunc();
    let ring = maps[0].source.ring().with_trunc(trunc);
    let x = x.embed(ring.series_ring())?;
    let x2 = x.pow(2);

    let mut members: Vec<&MatrixFactorization> = vec![&maps[0].source];
    members.extend(maps.iter().map(|f| &f.target));
    let mut lengths = Vec::with_capacity(members.len());
    for (i, mf) in members.iter().enumerate() {
        let pres = ModulePresentation::from_mf(mf, trunc)?;
        if !check_faithful_element(&pres, &x, ctx)?.value {
            return Err(MflabError::NotFaithful(format!("chain member {i}: {}", mf_label(mf))));
        }
        lengths.push(length_mod_x2(mf, &x2, ctx)?);
    }
    let b = lengths.iter().copied().max().unwrap_or(0);
    let bound = (1usize << b.min(62)) - 1;

    let mut rep = ExperimentReport::new(
        "harada-sai",
        serde_json::json!({ "ring": ring.to_string(), "x": x.to_string(), "maps": maps.len() }),
        ctx,
    );
    let mut composite = maps[0].clone();
    let mut vanishing = None;
    for (j, f) in maps.iter().enumerate() {
        if j > 0 {
            composite = composite.then(f)?;
        }
        let red = Reduction::new(&composite.target, &x2, trunc)?;
        let zero = red.kills(&composite.a0);
        rep.push(
            format!("prefix {}", j + 1),
            Status::Pass,
            serde_json::json!({ "zero_mod_x2": zero, "a0": composite.a0.to_strings() }),
        );
        if zero {
            vanishing = Some(j + 1);
            break;
        }
    }
    let status = match vanishing {
        Some(v) => Status::from_bool(v <= bound),
        None if maps.len() >= bound => Status::Fail,
        None => Status::Inconclusive,
    };
    if vanishing.is_none() {
        rep.notes.push(format!("no vanishing within {} maps", maps.len()));
    }
    rep.summary = serde_json::json!({
        "vanishing_length": vanishing,
        "lengths_mod_x2": lengths,
        "b": b,
        "bound": bound,
    });
    Ok(rep.finish([status]))
}

fn mf_label(mf: &MatrixFactorization) -> String {
    format!("Coker {:?}", mf.phi().to_strings())
}

/// One chain member as stored in a chain file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainModule {
    pub phi: Vec<Vec<String>>,
    pub psi: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismFile {
    pub source: usize,
    pub target: usize,
    pub a0: Vec<Vec<String>>,
    pub a1: Vec<Vec<String>>,
}

/// JSON layout of a chain: modules by index, maps between them, and the element x.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFile {
    pub ring: RingDescriptor,
    pub modules: Vec<ChainModule>,
    pub maps: Vec<MorphismFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
}

impl ChainFile {
    pub fn ring(&self) -> Result<HypersurfaceRing> {
        HypersurfaceRing::from_descriptor(&self.ring)
    }

    pub fn morphisms(&self) -> Result<Vec<MfMorphism>> {
        let ring = self.ring()?;
        let mfs = self
            .modules
            .iter()
            .map(|m| {
                MatrixFactorization::from_file(&MfFile {
                    ring: self.ring.clone(),
                    phi: m.phi.clone(),
                    psi: m.psi.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let get = |i: usize| {
            mfs.get(i)
                .ok_or_else(|| MflabError::InvalidInput(format!("module index {i} out of range")))
        };
        self.maps
            .iter()
            .map(|f| {
                let s = ring.series_ring();
                MfMorphism::new(
                    get(f.source)?,
                    get(f.target)?,
                    SeriesMatrix::parse(s, &f.a0)?,
                    SeriesMatrix::parse(s, &f.a1)?,
                )
            })
            .collect()
    }
}

/// Over F_7[y]/(y^6): alternating R/y^5 -> R/y (projection) -> R/y^5 (multiplication by y^4),
/// with x = y.
pub fn standard_chain(len: usize, trunc: usize) -> Result<ChainFile> {
    let ring = HypersurfaceRing::new(crate::field::Field::fp(7)?, &["y"], "y^6", trunc)?;
    let one = |s: &str| vec![vec![s.to_string()]];
    let modules = vec![
        ChainModule {
            phi: one("y^5"),
            psi: one("y"),
        },
        ChainModule {
            phi: one("y"),
            psi: one("y^5"),
        },
    ];
    let maps = (0..len)
        .map(|i| {
            if i % 2 == 0 {
                MorphismFile {
                    source: 0,
                    target: 1,
                    a0: one("1"),
                    a1: one("y^4"),
                }
            } else {
                MorphismFile {
                    source: 1,
                    target: 0,
                    a0: one("y^4"),
                    a1: one("1"),
                }
            }
        })
        .collect();
    Ok(ChainFile {
        ring: ring.descriptor(),
        modules,
        maps,
        x: Some("y".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn ctx() -> Context {
        Context::new(12, 42)
    }

    #[test]
    fn standard_chain_vanishes_at_two() {
        let file = standard_chain(5, 12).unwrap();
        let maps = file.morphisms().unwrap();
        let x = file.ring().unwrap().parse("y").unwrap();
        let rep = harada_sai_chain(&maps, &x, &ctx()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.summary["vanishing_length"], 2);
        assert_eq!(rep.summary["b"], 2);
        assert_eq!(rep.summary["bound"], 3);
    }

    #[test]
    fn composite_oracle() {
        // y^4 after the projection is y^4 on R/y^5, which lies in y^2 (R/y^5).
        let maps = standard_chain(2, 12).unwrap().morphisms().unwrap();
        let c = maps[0].then(&maps[1]).unwrap();
        assert_eq!(c.a0().to_strings(), vec![vec!["y^4".to_string()]]);
        assert_eq!(c.a1().to_strings(), vec![vec!["y^4".to_string()]]);
    }

    #[test]
    fn single_map_does_not_vanish() {
        let file = standard_chain(1, 12).unwrap();
        let maps = file.morphisms().unwrap();
        let x = file.ring().unwrap().parse("y").unwrap();
        let rep = harada_sai_chain(&maps, &x, &ctx()).unwrap();
        assert_eq!(rep.status, Status::Inconclusive);
        assert_eq!(rep.summary["vanishing_length"], serde_json::Value::Null);
    }

    #[test]
    fn isomorphism_rejected() {
        let mut file = standard_chain(1, 12).unwrap();
        file.maps = vec![MorphismFile {
            source: 0,
            target: 0,
            a0: vec![vec!["3".into()]],
            a1: vec![vec!["3".into()]],
        }];
        let maps = file.morphisms().unwrap();
        let x = file.ring().unwrap().parse("y").unwrap();
        assert!(matches!(
            harada_sai_chain(&maps, &x, &ctx()),
            Err(MflabError::InvalidInput(_))
        ));
    }

    #[test]
    fn non_commuting_pair_rejected() {
        let mut file = standard_chain(1, 12).unwrap();
        file.maps[0].a1 = vec![vec!["y^3".into()]];
        assert!(file.morphisms().is_err());
    }

    #[test]
    fn unfaithful_element_reported() {
        // Over y^6, y is not faithful for R/y^3: stable End(R/y^3) = k[y]/y^3.
        let ring = HypersurfaceRing::new(Field::fp(7).unwrap(), &["y"], "y^6", 12).unwrap();
        let a = MatrixFactorization::rank_one(&ring, "y^3", "y^3").unwrap();
        let b = MatrixFactorization::rank_one(&ring, "y", "y^5").unwrap();
        let s = ring.series_ring();
        let f = MfMorphism::new(
            &a,
            &b,
            SeriesMatrix::parse(s, &[vec!["1".into()]]).unwrap(),
            SeriesMatrix::parse(s, &[vec!["y^2".into()]]).unwrap(),
        )
        .unwrap();
        let x = ring.parse("y").unwrap();
        assert!(matches!(
            harada_sai_chain(&[f], &x, &ctx()),
            Err(MflabError::NotFaithful(_))
        ));
    }

    #[test]
    fn chain_file_round_trips() {
        let file = standard_chain(3, 12).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back: ChainFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
    }
}
