//! Matrix factorizations (phi, psi) with phi*psi = psi*phi = f*I over S.

use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::hmf;
use crate::rings::{HypersurfaceRing, RingDescriptor};
use crate::series::TruncSeries;
use crate::smatrix::SeriesMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFactorization {
    ring: HypersurfaceRing,
    phi: SeriesMatrix,
    psi: SeriesMatrix,
}

/// JSON file layout of a matrix factorization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MfFile {
    pub ring: RingDescriptor,
    pub phi: Vec<Vec<String>>,
    pub psi: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub size: usize,
    /// Nonzero entries of phi*psi - f*I and psi*phi - f*I.
    pub phi_psi_deviation: usize,
    pub psi_phi_deviation: usize,
    pub reduced: bool,
    pub trunc: usize,
}

impl MatrixFactorization {
    /// Pairs two square matrices of equal size over the ring's ambient series ring. Does not
    /// check the factorization identity; see [`validate`](Self::validate).
    pub fn new(ring: &HypersurfaceRing, phi: SeriesMatrix, psi: SeriesMatrix) -> Result<Self> {
        if !phi.is_square() || !psi.is_square() || phi.rows != psi.rows {
            return Err(MflabError::SizeMismatch(format!(
                "phi is {}x{}, psi is {}x{}",
                phi.rows, phi.cols, psi.rows, psi.cols
            )));
        }
        if phi.ring() != ring.series_ring() || psi.ring() != ring.series_ring() {
            return Err(MflabError::MismatchedRing(
                "matrix entries are not over the ring's variables".into(),
            ));
        }
        Ok(MatrixFactorization {
            ring: ring.clone(),
            phi,
            psi,
        })
    }

    /// `new` followed by `validate`.
    pub fn checked(ring: &HypersurfaceRing, phi: SeriesMatrix, psi: SeriesMatrix) -> Result<Self> {
        let mf = Self::new(ring, phi, psi)?;
        mf.validate()?;
        Ok(mf)
    }

    pub fn parse(ring: &HypersurfaceRing, phi: &[&[&str]], psi: &[&[&str]]) -> Result<Self> {
        let conv = |m: &[&[&str]]| -> Vec<Vec<String>> {
            m.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
        };
        let phi = SeriesMatrix::parse(ring.series_ring(), &conv(phi))?;
        let psi = SeriesMatrix::parse(ring.series_ring(), &conv(psi))?;
        Self::checked(ring, phi, psi)
    }

    /// The 1x1 factorization (a, b) with a*b = f.
    pub fn rank_one(ring: &HypersurfaceRing, a: &str, b: &str) -> Result<Self> {
        Self::parse(ring, &[&[a]], &[&[b]])
    }

    /// The trivial factorization (1, f), whose cokernel is zero.
    pub fn trivial(ring: &HypersurfaceRing) -> Self {
        let s = ring.series_ring();
        MatrixFactorization {
            ring: ring.clone(),
            phi: SeriesMatrix::identity(s, 1),
            psi: SeriesMatrix::scalar(s, 1, ring.f()),
        }
    }

    pub fn empty(ring: &HypersurfaceRing) -> Self {
        let s = ring.series_ring();
        MatrixFactorization {
            ring: ring.clone(),
            phi: SeriesMatrix::zero(s, 0, 0),
            psi: SeriesMatrix::zero(s, 0, 0),
        }
    }

    pub fn from_file(file: &MfFile) -> Result<Self> {
        let ring = HypersurfaceRing::from_descriptor(&file.ring)?;
        let phi = SeriesMatrix::parse(ring.series_ring(), &file.phi)?;
        let psi = SeriesMatrix::parse(ring.series_ring(), &file.psi)?;
        Self::new(&ring, phi, psi)
    }

    pub fn to_file(&self) -> MfFile {
        MfFile {
            ring: self.ring.descriptor(),
            phi: self.phi.to_strings(),
            psi: self.psi.to_strings(),
        }
    }

    pub fn ring(&self) -> &HypersurfaceRing {
        &self.ring
    }

    pub fn phi(&self) -> &SeriesMatrix {
        &self.phi
    }

    pub fn psi(&self) -> &SeriesMatrix {
        &self.psi
    }

    pub fn size(&self) -> usize {
        self.phi.rows
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Every entry of phi and psi lies in the maximal ideal.
    pub fn is_reduced(&self) -> bool {
        self.phi.all_in_maximal_ideal() && self.psi.all_in_maximal_ideal()
    }

    fn deviation(&self, a: &SeriesMatrix, b: &SeriesMatrix) -> Result<Vec<(usize, usize)>> {
        let prod = a.mul(b)?;
        let fi = SeriesMatrix::scalar(self.ring.series_ring(), self.size(), self.ring.f());
        let d = prod.sub(&fi)?;
        let mut bad = Vec::new();
        for i in 0..d.rows {
            for j in 0..d.cols {
                if !d.get(i, j).is_zero() {
                    bad.push((i, j));
                }
            }
        }
        Ok(bad)
    }

    /// Checks phi*psi = psi*phi = f*I exactly at the ring's truncation.
    pub fn validate(&self) -> Result<ValidationReport> {
        let a = self.deviation(&self.phi, &self.psi)?;
        if let Some(&(row, col)) = a.first() {
            return Err(MflabError::NotAFactorization {
                which: "phi*psi".into(),
                row,
                col,
            });
        }
        let b = self.deviation(&self.psi, &self.phi)?;
        if let Some(&(row, col)) = b.first() {
            return Err(MflabError::NotAFactorization {
                which: "psi*phi".into(),
                row,
                col,
            });
        }
        Ok(ValidationReport {
            size: self.size(),
            phi_psi_deviation: a.len(),
            psi_phi_deviation: b.len(),
            reduced: self.is_reduced(),
            trunc: self.ring.trunc(),
        })
    }

    /// (psi, phi): the first syzygy of Coker(phi).
    pub fn shift(&self) -> Self {
        MatrixFactorization {
            ring: self.ring.clone(),
            phi: self.psi.clone(),
            psi: self.phi.clone(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.ring != other.ring {
            return Err(MflabError::MismatchedRing(format!("{} vs {}", self.ring, other.ring)));
        }
        Ok(MatrixFactorization {
            ring: self.ring.clone(),
            phi: self.phi.direct_sum(&other.phi),
            psi: self.psi.direct_sum(&other.psi),
        })
    }

    /// Splits off trivial blocks (1, f) and (f, 1) by unit pivoting until every entry is in
    /// the maximal ideal. Row operations on phi are mirrored by the inverse column operations
    /// on psi (and vice versa), so phi*psi = f*I is preserved throughout.
    pub fn reduce(&self) -> Result<Self> {
        let mut phi = self.phi.clone();
        let mut psi = self.psi.clone();
        loop {
            if let Some((i, j)) = phi.find_unit() {
                (phi, psi) = strip(&phi, &psi, i, j)?;
            } else if let Some((i, j)) = psi.find_unit() {
                (psi, phi) = strip(&psi, &phi, i, j)?;
            } else {
                break;
            }
        }
        Ok(MatrixFactorization {
            ring: self.ring.clone(),
            phi,
            psi,
        })
    }

    /// (psi^t, phi^t), the cokernel convention Tr(Coker phi) = Coker(psi^t).
    pub fn transpose(&self) -> Result<Self> {
        if !self.is_reduced() {
            return Err(MflabError::NotReduced);
        }
        Ok(MatrixFactorization {
            ring: self.ring.clone(),
            phi: self.psi.transpose(),
            psi: self.phi.transpose(),
        })
    }

    /// tau = Tr, then d shifts, then the dual (again a transpose).
    pub fn ar_translate(&self, d: usize) -> Result<Self> {
        let mut m = self.transpose()?;
        for _ in 0..d {
            m = m.shift();
        }
        let out = m.transpose()?;
        out.validate()?;
        Ok(out)
    }

    /// R-dual Hom(Coker phi, R) = Coker(phi^t), presented by (phi^t, psi^t).
    pub fn dual(&self) -> Self {
        MatrixFactorization {
            ring: self.ring.clone(),
            phi: self.phi.transpose(),
            psi: self.psi.transpose(),
        }
    }

    /// Isomorphism of the cokernels, decided after reduction: sizes that differ are never
    /// isomorphic, otherwise the constant-term search of [`crate::hmf::iso_search`] decides.
    pub fn is_isomorphic(&self, other: &Self, ctx: &Context) -> Result<bool> {
        if !self.ring.compatible(&other.ring) {
            return Err(MflabError::MismatchedRing(format!("{} vs {}", self.ring, other.ring)));
        }
        let a = self.reduce()?;
        let b = other.reduce()?;
        if a.size() != b.size() {
            return Ok(false);
        }
        if a.is_empty() {
            return Ok(true);
        }
        hmf::iso_search(&a, &b, ctx)?.as_bool()
    }

    /// Same matrices over the ring at another truncation.
    pub fn with_trunc(&self, trunc: usize) -> Self {
        let ring = self.ring.with_trunc(trunc);
        let s = ring.series_ring().clone();
        let conv = |m: &SeriesMatrix| m.map_to(&s, |e| Ok(e.retrunc(trunc))).expect("retruncation");
        MatrixFactorization {
            phi: conv(&self.phi),
            psi: conv(&self.psi),
            ring,
        }
    }
}

/// Clears row i and column j of `a` using the unit a[i][j], mirrors the inverse operations on
/// `b`, and deletes the split-off block from both.
fn strip(a: &SeriesMatrix, b: &SeriesMatrix, i: usize, j: usize) -> Result<(SeriesMatrix, SeriesMatrix)> {
    let n = a.rows;
    let mut a = a.clone();
    let mut b = b.clone();
    let inv = a.get(i, j).invert()?;
    for k in (0..n).filter(|&k| k != i) {
        // row_k(a) -= c * row_i(a); then col_i(b) += c * col_k(b)
        let c = a.get(k, j).try_mul(&inv)?;
        if c.is_zero() {
            continue;
        }
        for l in 0..n {
            let v = a.get(k, l).try_sub(&c.try_mul(a.get(i, l))?)?;
            a.set(k, l, v);
        }
        for r in 0..n {
            let v = b.get(r, i).try_add(&c.try_mul(b.get(r, k))?)?;
            b.set(r, i, v);
        }
    }
    for l in (0..n).filter(|&l| l != j) {
        // col_l(a) -= d * col_j(a); then row_j(b) += d * row_l(b)
        let d = a.get(i, l).try_mul(&inv)?;
        if d.is_zero() {
            continue;
        }
        for r in 0..n {
            let v = a.get(r, l).try_sub(&d.try_mul(a.get(r, j))?)?;
            a.set(r, l, v);
        }
        for c in 0..n {
            let v = b.get(j, c).try_add(&d.try_mul(b.get(l, c))?)?;
            b.set(j, c, v);
        }
    }
    Ok((a.remove(i, j), b.remove(j, i)))
}

/// Entrywise image of a series under `f` for both matrices, landing over `ring`.
pub(crate) fn map_mf(
    mf: &MatrixFactorization,
    ring: &HypersurfaceRing,
    f: impl Fn(&TruncSeries) -> Result<TruncSeries> + Copy,
) -> Result<MatrixFactorization> {
    let s = ring.series_ring();
    MatrixFactorization::new(ring, mf.phi.map_to(s, f)?, mf.psi.map_to(s, f)?)
}
