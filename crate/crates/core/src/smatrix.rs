//! Dense matrices of truncated series.

use std::sync::Arc;

use crate::algebra::{AMatrix, TruncAlgebra};
use crate::error::{MflabError, Result};
use crate::series::{SeriesRing, TruncSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    pub rows: usize,
    pub cols: usize,
    ring: Arc<SeriesRing>,
    data: Vec<TruncSeries>,
}

impl SeriesMatrix {
    pub fn zero(ring: &Arc<SeriesRing>, rows: usize, cols: usize) -> Self {
        SeriesMatrix {
            rows,
            cols,
            ring: ring.clone(),
            data: vec![TruncSeries::zero(ring); rows * cols],
        }
    }

    pub fn scalar(ring: &Arc<SeriesRing>, n: usize, a: &TruncSeries) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, a.clone());
        }
        m
    }

    pub fn identity(ring: &Arc<SeriesRing>, n: usize) -> Self {
        Self::scalar(ring, n, &TruncSeries::one(ring))
    }

    pub fn from_rows(ring: &Arc<SeriesRing>, rows: Vec<Vec<TruncSeries>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(MflabError::SizeMismatch("ragged matrix rows".into()));
        }
        if rows.iter().flatten().any(|e| e.ring() != ring) {
            return Err(MflabError::MismatchedRing("matrix entry over another ring".into()));
        }
        Ok(SeriesMatrix {
            rows: r,
            cols: c,
            ring: ring.clone(),
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn parse(ring: &Arc<SeriesRing>, rows: &[Vec<String>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| TruncSeries::parse(s, ring))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(ring, parsed)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncSeries {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TruncSeries) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &TruncSeries> {
        self.data.iter()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        if self.cols != other.rows {
            return Err(MflabError::SizeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = SeriesMatrix::zero(&self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = TruncSeries::zero(&self.ring);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.try_add(&a.try_mul(b)?)?;
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MflabError::SizeMismatch("matrix difference".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMatrix { data, ..self.clone() })
    }

    pub fn map(&self, f: impl Fn(&TruncSeries) -> Result<TruncSeries>) -> Result<SeriesMatrix> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        let ring = data
            .first()
            .map(|e| e.ring().clone())
            .unwrap_or_else(|| self.ring.clone());
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            ring,
            data,
        })
    }

    /// Re-homes an empty or nonempty matrix onto another ring via `f`.
    pub fn map_to(
        &self,
        ring: &Arc<SeriesRing>,
        f: impl Fn(&TruncSeries) -> Result<TruncSeries>,
    ) -> Result<SeriesMatrix> {
        let mut m = self.map(f)?;
        m.ring = ring.clone();
        Ok(m)
    }

    pub fn transpose(&self) -> SeriesMatrix {
        let mut out = SeriesMatrix::zero(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn direct_sum(&self, other: &SeriesMatrix) -> SeriesMatrix {
        let mut out = SeriesMatrix::zero(&self.ring, self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// 2x2 block matrix from equally shaped blocks.
    pub fn blocks(a: &SeriesMatrix, b: &SeriesMatrix, c: &SeriesMatrix, d: &SeriesMatrix) -> Self {
        let (r, k) = (a.rows, a.cols);
        let mut out = SeriesMatrix::zero(&a.ring, 2 * r, 2 * k);
        for i in 0..r {
            for j in 0..k {
                out.set(i, j, a.get(i, j).clone());
                out.set(i, k + j, b.get(i, j).clone());
                out.set(r + i, j, c.get(i, j).clone());
                out.set(r + i, k + j, d.get(i, j).clone());
            }
        }
        out
    }

    pub fn remove(&self, row: usize, col: usize) -> SeriesMatrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&i| i != row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != col).collect();
        let mut out = SeriesMatrix::zero(&self.ring, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Position of the first entry with nonzero constant term.
    pub fn find_unit(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .find(|&(i, j)| self.get(i, j).is_unit())
    }

    pub fn all_in_maximal_ideal(&self) -> bool {
        self.find_unit().is_none()
    }

    /// Entries as elements of a truncated F_p algebra with the same variables.
    pub fn to_algebra(&self, alg: &TruncAlgebra) -> AMatrix {
        let k = &self.ring.field;
        AMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|e| alg.from_terms(e.terms().map(|(m, c)| (m, k.residue(c)))))
                .collect(),
        }
    }

    /// Inverse of `to_algebra`, reading standard monomials back as series terms.
    pub fn from_algebra(ring: &Arc<SeriesRing>, alg: &TruncAlgebra, m: &AMatrix) -> SeriesMatrix {
        let k = &ring.field;
        SeriesMatrix {
            rows: m.rows,
            cols: m.cols,
            ring: ring.clone(),
            data: m
                .data
                .iter()
                .map(|e| {
                    TruncSeries::from_terms(ring, alg.terms(e).map(|(mono, c)| (mono.clone(), k.from_i64(c as i64))))
                })
                .collect(),
        }
    }
}
