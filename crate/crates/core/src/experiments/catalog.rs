use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::field::Field;
use crate::matfac::{MatrixFactorization, MfFile};
use crate::report::Status;
use crate::rings::HypersurfaceRing;

use super::ExperimentReport;

pub const MAX_N: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// y^{n+1}
    #[serde(rename = "An")]
    AnOneVariable,
    /// x^2 + y^{n+1}
    #[serde(rename = "An-curve")]
    AnCurve,
    /// x^2 y + y^{n-1}
    #[serde(rename = "Dn")]
    Dn,
    E6,
    E7,
    E8,
    /// xy
    #[serde(rename = "node")]
    Node,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::AnOneVariable,
        Family::AnCurve,
        Family::Dn,
        Family::E6,
        Family::E7,
        Family::E8,
        Family::Node,
    ];

    /// Whether the family is indexed by n.
    pub fn takes_n(self) -> bool {
        matches!(self, Family::AnOneVariable | Family::AnCurve | Family::Dn)
    }

    /// Smallest valid n for families indexed by n.
    pub fn min_n(self) -> usize {
        match self {
            Family::Dn => 4,
            _ => 1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::AnOneVariable => "An",
            Family::AnCurve => "An-curve",
            Family::Dn => "Dn",
            Family::E6 => "E6",
            Family::E7 => "E7",
            Family::E8 => "E8",
            Family::Node => "node",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = MflabError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| MflabError::InvalidInput(format!("unknown family `{s}`")))
    }
}

/// One ring of the catalog with its standard reduced factorizations.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub family: Family,
    pub n: usize,
    pub ring: HypersurfaceRing,
    pub labels: Vec<String>,
    pub mfs: Vec<MatrixFactorization>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntryFile {
    pub family: Family,
    pub n: usize,
    pub labels: Vec<String>,
    pub mfs: Vec<MfFile>,
}

impl CatalogEntry {
    pub fn to_file(&self) -> CatalogEntryFile {
        CatalogEntryFile {
            family: self.family,
            n: self.n,
            labels: self.labels.clone(),
            mfs: self.mfs.iter().map(|m| m.to_file()).collect(),
        }
    }

    pub fn name(&self) -> String {
        if self.family.takes_n() {
            format!("{}[n={}]", self.family, self.n)
        } else {
            self.family.to_string()
        }
    }

    /// Validation, reducedness and pairwise non-isomorphism of the listed factorizations.
    pub fn check(&self, ctx: &Context) -> Result<ExperimentReport> {
        let mut rep = ExperimentReport::new(
            "catalog",
            serde_json::json!({ "family": self.family, "n": self.n, "ring": self.ring.to_string() }),
            ctx,
        );
        for (label, mf) in self.labels.iter().zip(&self.mfs) {
            let valid = mf.validate().is_ok();
            let reduced = mf.is_reduced();
            let involution = mf.shift().shift() == *mf;
            rep.push(
                label.clone(),
                Status::from_bool(valid && reduced && involution),
                serde_json::json!({
                    "size": mf.size(), "valid": valid, "reduced": reduced, "shift_involution": involution
                }),
            );
        }
        let mut pairs = Vec::new();
        for i in 0..self.mfs.len() {
            for j in i + 1..self.mfs.len() {
                let status = match self.mfs[i].is_isomorphic(&self.mfs[j], ctx) {
                    Ok(iso) => Status::from_bool(!iso),
                    Err(e) => Status::from_error(&e).ok_or(e)?,
                };
                pairs.push(status);
                rep.push(
                    format!("{} vs {}", self.labels[i], self.labels[j]),
                    status,
                    serde_json::json!({ "non_isomorphic": status == Status::Pass }),
                );
            }
        }
        Ok(rep.finish(pairs))
    }
}

fn mf(ring: &HypersurfaceRing, phi: &[&[&str]], psi: &[&[&str]]) -> Result<MatrixFactorization> {
    MatrixFactorization::parse(ring, phi, psi)
}

fn entry(family: Family, n: usize, ring: HypersurfaceRing, items: Vec<(String, MatrixFactorization)>) -> CatalogEntry {
    let (labels, mfs) = items.into_iter().unzip();
    CatalogEntry {
        family,
        n,
        ring,
        labels,
        mfs,
    }
}

/// [[x, y^j], [-y^{n+1-j}, x]] for j = 1..(n+1)/2 over a ring with equation x^2 + y^{n+1}.
pub(crate) fn an_curve_items(
    r: &HypersurfaceRing,
    n: usize,
    x: &str,
    y: &str,
) -> Result<Vec<(String, MatrixFactorization)>> {
    (1..=n.div_ceil(2))
        .map(|j| {
            let (a, b) = (format!("{y}^{j}"), format!("{y}^{}", n + 1 - j));
            let (ma, mb) = (format!("-{a}"), format!("-{b}"));
            let m = mf(r, &[&[x, &a], &[&mb, x]], &[&[x, &ma], &[&b, x]])?;
            Ok((format!("M_{j}"), m))
        })
        .collect()
}

/// The standard factorizations for one member of a family. `n` is ignored for E6, E7, E8 and
/// the node.
pub fn catalog_entry(family: Family, n: usize, field: &Field, trunc: usize) -> Result<CatalogEntry> {
    if family.takes_n() && !(family.min_n()..=MAX_N).contains(&n) {
        return Err(MflabError::InvalidInput(format!(
            "{family} needs {} <= n <= {MAX_N}, got {n}",
            family.min_n()
        )));
    }
    let n = if family.takes_n() { n } else { 0 };
    let ring = |vars: &[&str], f: &str| HypersurfaceRing::new(field.clone(), vars, f, trunc);
    Ok(match family {
        Family::AnOneVariable => {
            let r = ring(&["y"], &format!("y^{}", n + 1))?;
            let items = (1..=n)
                .map(|j| {
                    let (a, b) = (format!("y^{j}"), format!("y^{}", n + 1 - j));
                    Ok((
                        format!("(y^{j}, y^{})", n + 1 - j),
                        MatrixFactorization::rank_one(&r, &a, &b)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            entry(family, n, r, items)
        }
        Family::AnCurve => {
            let r = ring(&["x", "y"], &format!("x^2 + y^{}", n + 1))?;
            let items = an_curve_items(&r, n, "x", "y")?;
            entry(family, n, r, items)
        }
        Family::Dn => {
            let r = ring(&["x", "y"], &format!("x^2*y + y^{}", n - 1))?;
            let other = format!("x^2 + y^{}", n - 2);
            let mut items = vec![
                ("A".to_string(), MatrixFactorization::rank_one(&r, "y", &other)?),
                ("B".to_string(), MatrixFactorization::rank_one(&r, &other, "y")?),
            ];
            // X_k and X_{n-2-k} are isomorphic.
            for k in 1..=(n - 2) / 2 {
                let (a, b) = (format!("y^{k}"), format!("y^{}", n - 2 - k));
                let (c, d) = (format!("y^{}", k + 1), format!("y^{}", n - 1 - k));
                let m = mf(&r, &[&["x", &a], &[&b, "-x"]], &[&["x*y", &c], &[&d, "-x*y"]])?;
                items.push((format!("X_{k}"), m));
            }
            entry(family, n, r, items)
        }
        Family::E6 => {
            let r = ring(&["x", "y"], "x^3 + y^4")?;
            let items = vec![
                (
                    "M_1".into(),
                    mf(&r, &[&["x", "y"], &["-y^3", "x^2"]], &[&["x^2", "-y"], &["y^3", "x"]])?,
                ),
                (
                    "M_2".into(),
                    mf(
                        &r,
                        &[&["x", "y^2"], &["-y^2", "x^2"]],
                        &[&["x^2", "-y^2"], &["y^2", "x"]],
                    )?,
                ),
            ];
            entry(family, n, r, items)
        }
        Family::E7 => {
            let r = ring(&["x", "y"], "x^3 + x*y^3")?;
            let items = vec![
                ("A".into(), MatrixFactorization::rank_one(&r, "x", "x^2 + y^3")?),
                (
                    "M_1".into(),
                    mf(
                        &r,
                        &[&["x", "y"], &["-x*y^2", "x^2"]],
                        &[&["x^2", "-y"], &["x*y^2", "x"]],
                    )?,
                ),
            ];
            entry(family, n, r, items)
        }
        Family::E8 => {
            let r = ring(&["x", "y"], "x^3 + y^5")?;
            let items = vec![
                (
                    "M_1".into(),
                    mf(&r, &[&["x", "y"], &["-y^4", "x^2"]], &[&["x^2", "-y"], &["y^4", "x"]])?,
                ),
                (
                    "M_2".into(),
                    mf(
                        &r,
                        &[&["x", "y^2"], &["-y^3", "x^2"]],
                        &[&["x^2", "-y^2"], &["y^3", "x"]],
                    )?,
                ),
            ];
            entry(family, n, r, items)
        }
        Family::Node => {
            let r = ring(&["x", "y"], "x*y")?;
            let items = vec![
                ("(x, y)".into(), MatrixFactorization::rank_one(&r, "x", "y")?),
                ("(y, x)".into(), MatrixFactorization::rank_one(&r, "y", "x")?),
            ];
            entry(family, n, r, items)
        }
    })
}

/// Entries for every n in `ns` (a single entry for the unindexed families).
pub fn ade_catalog(
    family: Family,
    ns: impl IntoIterator<Item = usize>,
    field: &Field,
    trunc: usize,
) -> Result<Vec<CatalogEntry>> {
    if !family.takes_n() {
        return Ok(vec![catalog_entry(family, 0, field, trunc)?]);
    }
    ns.into_iter().map(|n| catalog_entry(family, n, field, trunc)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> Field {
        Field::fp(7).unwrap()
    }

    #[test]
    fn a2_one_variable() {
        let e = catalog_entry(Family::AnOneVariable, 2, &f7(), 12).unwrap();
        let pairs: Vec<(String, String)> = e
            .mfs
            .iter()
            .map(|m| (m.phi().get(0, 0).to_string(), m.psi().get(0, 0).to_string()))
            .collect();
        assert_eq!(pairs, vec![("y".into(), "y^2".into()), ("y^2".into(), "y".into())]);
    }

    #[test]
    fn every_entry_validates() {
        let ctx = Context::default();
        for fam in Family::ALL {
            let ns: Vec<usize> = if fam.takes_n() {
                (fam.min_n()..fam.min_n() + 4).collect()
            } else {
                vec![0]
            };
            for e in ade_catalog(fam, ns, &f7(), 12).unwrap() {
                assert!(!e.mfs.is_empty());
                let rep = e.check(&ctx).unwrap();
                assert!(rep.passed(), "{}: {:?}", e.name(), rep);
            }
        }
    }

    #[test]
    fn shift_permutes_one_variable_entries() {
        let e = catalog_entry(Family::AnOneVariable, 5, &f7(), 12).unwrap();
        for m in &e.mfs {
            let s = m.shift();
            assert!(e.mfs.contains(&s));
        }
    }

    #[test]
    fn family_names_round_trip() {
        for fam in Family::ALL {
            assert_eq!(fam.to_string().parse::<Family>().unwrap(), fam);
        }
        assert!("Q7".parse::<Family>().is_err());
    }

    #[test]
    fn out_of_range_n_is_rejected() {
        assert!(catalog_entry(Family::Dn, 3, &f7(), 12).is_err());
    }
}
