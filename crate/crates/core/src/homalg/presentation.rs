use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{flatten, monomials_of_degree, AMatrix, TruncAlgebra};
use crate::error::{MflabError, Result};
use crate::linalg::{dense, Echelon};
use crate::matfac::MatrixFactorization;
use crate::rings::{HypersurfaceRing, RingDescriptor};
use crate::smatrix::SeriesMatrix;

/// M = Coker(A: R^c -> R^r) with A over R/m^{N+1}.
#[derive(Clone, Debug)]
pub struct ModulePresentation {
    ring: HypersurfaceRing,
    alg: Arc<TruncAlgebra>,
    matrix: AMatrix,
}

/// On-disk form: `rows` is needed when there are no columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleFile {
    pub ring: RingDescriptor,
    pub rows: usize,
    pub matrix: Vec<Vec<String>>,
}

impl ModulePresentation {
    pub fn from_matrix(ring: &HypersurfaceRing, alg: &Arc<TruncAlgebra>, matrix: AMatrix) -> Self {
        ModulePresentation {
            ring: ring.clone(),
            alg: alg.clone(),
            matrix,
        }
    }

    pub fn from_series(ring: &HypersurfaceRing, m: &SeriesMatrix, trunc: usize) -> Result<Self> {
        let alg = ring.quotient_algebra(trunc)?;
        let matrix = m.to_algebra(&alg);
        Ok(Self::from_matrix(ring, &alg, matrix))
    }

    pub fn parse(ring: &HypersurfaceRing, rows: usize, entries: &[Vec<String>], trunc: usize) -> Result<Self> {
        if entries.len() != rows {
            return Err(MflabError::SizeMismatch(format!(
                "{} rows given, {rows} declared",
                entries.len()
            )));
        }
        let alg = ring.quotient_algebra(trunc)?;
        let cols = entries.first().map(|r| r.len()).unwrap_or(0);
        let mut m = AMatrix::zero(rows, cols);
        for (i, row) in entries.iter().enumerate() {
            if row.len() != cols {
                return Err(MflabError::SizeMismatch("ragged matrix".into()));
            }
            for (j, t) in row.iter().enumerate() {
                let s = ring.parse(t)?;
                m.set(
                    i,
                    j,
                    alg.from_terms(s.terms().map(|(mo, c)| (mo, ring.field().residue(c)))),
                );
            }
        }
        Ok(Self::from_matrix(ring, &alg, m))
    }

    pub fn from_file(file: &ModuleFile, trunc: Option<usize>) -> Result<Self> {
        let ring = HypersurfaceRing::from_descriptor(&file.ring)?;
        let t = trunc.unwrap_or(ring.trunc());
        Self::parse(&ring, file.rows, &file.matrix, t)
    }

    pub fn to_file(&self) -> ModuleFile {
        ModuleFile {
            ring: self.ring.descriptor(),
            rows: self.rows(),
            matrix: self.to_strings(),
        }
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        SeriesMatrix::from_algebra(self.ring.series_ring(), &self.alg, &self.matrix).to_strings()
    }

    /// Coker(phi) presented by phi over R/m^{N+1}.
    pub fn from_mf(mf: &MatrixFactorization, trunc: usize) -> Result<Self> {
        Self::from_series(mf.ring(), mf.phi(), trunc)
    }

    /// The free module R^r.
    pub fn free(ring: &HypersurfaceRing, r: usize, trunc: usize) -> Result<Self> {
        let alg = ring.quotient_algebra(trunc)?;
        Ok(Self::from_matrix(ring, &alg, AMatrix::zero(r, 0)))
    }

    /// k = R/m, presented by the variables.
    pub fn residue_field(ring: &HypersurfaceRing, trunc: usize) -> Result<Self> {
        Self::power_of_maximal_ideal(ring, 1, trunc)
    }

    /// R/m^n, presented by the monomials of degree n.
    pub fn power_of_maximal_ideal(ring: &HypersurfaceRing, n: usize, trunc: usize) -> Result<Self> {
        if n == 0 || n > trunc {
            return Err(MflabError::InvalidInput(format!("need 1 <= n <= trunc, got n = {n}")));
        }
        let alg = ring.quotient_algebra(trunc)?;
        let cols: Vec<Vec<_>> = monomials_of_degree(alg.nvars(), n)
            .iter()
            .map(|m| vec![alg.nf_monomial(m)])
            .filter(|c| !c[0].is_empty())
            .collect();
        Ok(Self::from_matrix(ring, &alg, AMatrix::from_columns(1, &cols)))
    }

    pub fn ring(&self) -> &HypersurfaceRing {
        &self.ring
    }

    pub fn algebra(&self) -> &Arc<TruncAlgebra> {
        &self.alg
    }

    pub fn matrix(&self) -> &AMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols
    }

    pub fn trunc(&self) -> usize {
        self.alg.trunc()
    }

    /// All entries lie in the maximal ideal.
    pub fn is_minimal(&self) -> bool {
        self.matrix.is_minimal(&self.alg)
    }

    /// beta(M) = dim_k M/mM.
    pub fn betti(&self) -> usize {
        self.rows() - dense::rank(&self.matrix.constant_part(&self.alg), self.alg.p())
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.alg, &other.alg) && self.alg.trunc() != other.alg.trunc() {
            return Err(MflabError::MismatchedRing(
                "presentations at different truncations".into(),
            ));
        }
        let m = other.matrix.transfer(&other.alg, &self.alg);
        Ok(Self::from_matrix(&self.ring, &self.alg, self.matrix.direct_sum(&m)))
    }

    /// Removes unit entries by eliminating generators, then drops columns that are redundant
    /// modulo m * Im(A).
    pub fn minimize(&self) -> Self {
        let alg = &self.alg;
        let mut a = self.matrix.clone();
        while let Some((i, j)) = find_unit(alg, &a) {
            let inv = alg.inv(a.get(i, j)).expect("unit entry");
            let mut next = AMatrix::zero(a.rows - 1, a.cols - 1);
            let rows: Vec<usize> = (0..a.rows).filter(|&k| k != i).collect();
            let cols: Vec<usize> = (0..a.cols).filter(|&l| l != j).collect();
            for (ki, &k) in rows.iter().enumerate() {
                let factor = alg.mul(a.get(k, j), &inv);
                for (li, &l) in cols.iter().enumerate() {
                    let v = alg.sub(a.get(k, l), &alg.mul(&factor, a.get(i, l)));
                    next.set(ki, li, v);
                }
            }
            a = next;
        }
        let keep = independent_columns(alg, &a);
        let a = a.select(&(0..a.rows).collect::<Vec<_>>(), &keep);
        Self::from_matrix(&self.ring, alg, a)
    }

    /// Tr M = Coker(A^t), taken from the minimal presentation.
    pub fn transpose(&self) -> Self {
        let m = self.minimize();
        Self::from_matrix(&self.ring, &self.alg, m.matrix.transpose())
    }

    pub fn is_zero_module(&self) -> bool {
        self.minimize().rows() == 0
    }

    /// l(M/m^{j+1}M) for j = 0..=N.
    pub fn hilbert_lengths(&self) -> Vec<usize> {
        let alg = &self.alg;
        let (p, r) = (alg.p(), self.rows());
        let mut ech = Echelon::new(p, (alg.dim() * r).max(1), false);
        for j in 0..self.cols() {
            let col = self.matrix.column(j);
            for s in 0..alg.dim() as u32 {
                let v: Vec<_> = col.iter().map(|e| alg.mul_std(s, e)).collect();
                ech.push(&flatten(&v, p));
            }
        }
        let mut pivots_by_degree = vec![0usize; alg.trunc() + 1];
        for piv in ech.pivots() {
            pivots_by_degree[alg.std_degree(piv / r as u32)] += 1;
        }
        let mut out = Vec::with_capacity(alg.trunc() + 1);
        let mut pivots = 0;
        for (j, n) in pivots_by_degree.iter().enumerate() {
            pivots += n;
            out.push(alg.count_up_to(j) * r - pivots);
        }
        out
    }

    /// Same presentation re-expressed at another truncation (entries are read as
    /// polynomials).
    pub fn with_trunc(&self, trunc: usize) -> Result<Self> {
        let alg = self.ring.quotient_algebra(trunc)?;
        let m = self.matrix.transfer(&self.alg, &alg);
        Ok(Self::from_matrix(&self.ring, &alg, m))
    }
}

fn find_unit(alg: &TruncAlgebra, a: &AMatrix) -> Option<(usize, usize)> {
    (0..a.rows)
        .flat_map(|i| (0..a.cols).map(move |j| (i, j)))
        .find(|&(i, j)| alg.constant_coeff(a.get(i, j)) != 0)
}

/// Indices of columns forming a minimal generating set of the column span.
pub(crate) fn independent_columns(alg: &TruncAlgebra, a: &AMatrix) -> Vec<usize> {
    let p = alg.p();
    let r = a.rows;
    let mut ech = Echelon::new(p, alg.dim() * r.max(1), false);
    for j in 0..a.cols {
        let col = a.column(j);
        for s in 1..alg.dim() as u32 {
            let v: Vec<_> = col.iter().map(|e| alg.mul_std(s, e)).collect();
            ech.push(&flatten(&v, p));
        }
    }
    let mut keep = Vec::new();
    for j in 0..a.cols {
        if ech.push(&flatten(&a.column(j), p)) {
            keep.push(j);
        }
    }
    keep
}
