//! Double branched cover functors: sharp M -> M^# over f + u^2 and flat N -> N/uN.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{MflabError, Result};
use crate::field::Field;
use crate::hmf::{self, IsoOutcome, MfMats};
use crate::linalg::{dense, Echelon};
use crate::matfac::{map_mf, MatrixFactorization};
use crate::report::Status;
use crate::rings::HypersurfaceRing;
use crate::series::{SeriesRing, TruncSeries};
use crate::smatrix::SeriesMatrix;

/// M^# = (Phi, Psi) with Phi = [psi u; -u phi], Psi = [phi -u; u psi] over f + u^2.
pub fn sharp_mf(mf: &MatrixFactorization) -> Result<MatrixFactorization> {
    if mf.ring().field().characteristic() == 2 {
        return Err(MflabError::CharTwo);
    }
    if !mf.is_reduced() {
        return Err(MflabError::NotReduced);
    }
    let cover = mf.ring().double_branched_cover()?;
    sharp_into(mf, &cover.ring)
}

/// Sharp landing in a given cover ring of `mf`'s ring.
pub fn sharp_into(mf: &MatrixFactorization, cover: &HypersurfaceRing) -> Result<MatrixFactorization> {
    let s = cover.series_ring();
    let n = mf.size();
    let phi = mf.phi().map_to(s, |e| e.embed(s))?;
    let psi = mf.psi().map_to(s, |e| e.embed(s))?;
    let u = TruncSeries::var(s, s.nvars() - 1);
    let ui = SeriesMatrix::scalar(s, n, &u);
    let mui = SeriesMatrix::scalar(s, n, &u.neg());
    let big_phi = SeriesMatrix::blocks(&psi, &ui, &mui, &phi);
    let big_psi = SeriesMatrix::blocks(&phi, &mui, &ui, &psi);
    MatrixFactorization::checked(cover, big_phi, big_psi)
}

/// N-bar: set the cover variable to zero, validate over the base ring, then reduce.
pub fn flat_mf(mf: &MatrixFactorization) -> Result<MatrixFactorization> {
    let cover = mf.ring();
    let u = cover
        .cover_variable()
        .ok_or_else(|| MflabError::NotACover(cover.to_string()))?;
    let base = cover.cover_base()?;
    let out = map_mf(mf, &base, |e| e.substitute_zero(&u))?;
    out.validate()?;
    out.reduce()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    SharpThenFlat,
    FlatThenSharp,
}

/// Result of comparing two sides of an identity of modules or dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub lhs_dim: usize,
    pub rhs_dim: usize,
    pub trunc: usize,
    pub status: Status,
    /// Constant parts (a0(0), a1(0)) of an isomorphism, when one was found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(dense::Mat, dense::Mat)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Isomorphism test after reducing both sides; sizes that differ after reduction are
/// non-isomorphic.
pub fn iso_report(
    identity: &str,
    lhs: &MatrixFactorization,
    rhs: &MatrixFactorization,
    ctx: &Context,
) -> Result<IdentityReport> {
    let a = lhs.reduce()?;
    let b = rhs.reduce()?;
    let mut rep = IdentityReport {
        identity: identity.to_string(),
        lhs_dim: a.size(),
        rhs_dim: b.size(),
        trunc: ctx.trunc(),
        status: Status::Fail,
        witness: None,
        note: None,
    };
    if a.size() != b.size() {
        rep.note = Some("sizes differ after reduction".into());
        return Ok(rep);
    }
    if a.is_empty() {
        rep.status = Status::Pass;
        return Ok(rep);
    }
    match hmf::iso_search(&a, &b, ctx)? {
        IsoOutcome::Isomorphic { a0, a1, exhaustive } => {
            rep.status = Status::Pass;
            rep.witness = Some((a0, a1));
            rep.note = exhaustive.then(|| "found by exhaustive search".into());
        }
        IsoOutcome::NotIsomorphic { constant_dim } => {
            rep.note = Some(format!(
                "no invertible constant term in a {constant_dim}-dimensional space"
            ));
        }
        IsoOutcome::Inconclusive { constant_dim, tries } => {
            rep.status = Status::Inconclusive;
            rep.note = Some(format!("{tries} random draws from a {constant_dim}-dimensional space"));
        }
    }
    Ok(rep)
}

/// flat(sharp(M)) ≅ M ⊕ ΩM, or sharp(flat(N)) ≅ N ⊕ ΩN.
pub fn verify_knoerrer_roundtrip(
    mf: &MatrixFactorization,
    direction: Direction,
    ctx: &Context,
) -> Result<IdentityReport> {
    let m = mf.reduce()?;
    let rhs = m.direct_sum(&m.shift())?;
    match direction {
        Direction::SharpThenFlat => {
            let lhs = flat_mf(&sharp_mf(&m)?)?;
            iso_report("flat(sharp(M)) = M + Omega M", &lhs, &rhs, ctx)
        }
        Direction::FlatThenSharp => {
            let lhs = sharp_into(&flat_mf(&m)?, m.ring())?;
            iso_report("sharp(flat(N)) = N + Omega N", &lhs, &rhs, ctx)
        }
    }
}

/// dim stableHom(M^#, C^#) against dim stableHom(M ⊕ ΩM, C), both certified.
pub fn verify_sharp_hom_compat(
    m: &MatrixFactorization,
    c: &MatrixFactorization,
    ctx: &Context,
) -> Result<IdentityReport> {
    let m = m.reduce()?;
    let c = c.reduce()?;
    let cover = m.ring().double_branched_cover()?.ring;
    let lhs = hmf::stable_hom_dim(&sharp_into(&m, &cover)?, &sharp_into(&c, &cover)?, ctx)?;
    let rhs = hmf::stable_hom_dim(&m.direct_sum(&m.shift())?, &c, ctx)?;
    Ok(IdentityReport {
        identity: "stableHom(M#, C#) = stableHom(M + Omega M, C)".into(),
        lhs_dim: lhs.value,
        rhs_dim: rhs.value,
        trunc: ctx.trunc(),
        status: Status::from_bool(lhs.value == rhs.value),
        witness: None,
        note: Some(format!("certified at trunc {} and {}", lhs.trunc, lhs.trunc_next)),
    })
}

/// Rewrites a polynomial in (u, p, F) using p^2 = -F.
fn rewrite_phi_squared(s: &TruncSeries) -> TruncSeries {
    let k = s.field().clone();
    TruncSeries::from_terms(
        s.ring(),
        s.terms().map(|(m, c)| {
            let (a, b, e) = (m[0], m[1], m[2]);
            let c = if (b / 2) % 2 == 1 { k.neg(c) } else { c.clone() };
            (vec![a, b % 2, e + b / 2], c)
        }),
    )
}

fn sym_mul(a: &SeriesMatrix, b: &SeriesMatrix) -> Result<SeriesMatrix> {
    a.mul(b)?.map(|e| Ok(rewrite_phi_squared(e)))
}

/// Symbolic check of the splitting homotopy. With Phi = u + p, Psi = u - p and p^2 = -f,
/// the cone differentials D1 = [-Phi 0; u Psi], D2 = [-Psi 0; u Phi] and H = 1/2[-1 0; 1 1]
/// satisfy D1 D2 = D2 D1 = (f + u^2) I and D1 H + H D2 = D2 H + H D1 = u I.
pub fn verify_generic_homotopy(field: &Field) -> Result<IdentityReport> {
    if field.characteristic() == 2 {
        return Err(MflabError::CharTwo);
    }
    let ring = SeriesRing::new(field.clone(), vec!["u".into(), "p".into(), "F".into()], 8)?;
    let e = |t: &str| TruncSeries::parse(t, &ring);
    let m = |rows: [[&str; 2]; 2]| -> Result<SeriesMatrix> {
        SeriesMatrix::from_rows(
            &ring,
            rows.iter()
                .map(|r| r.iter().map(|t| e(t)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let big_phi = e("u + p")?;
    let big_psi = e("u - p")?;
    let f_plus = e("F + u^2")?;
    let d1 = m([["-u - p", "0"], ["u", "u - p"]])?;
    let d2 = m([["-u + p", "0"], ["u", "u + p"]])?;
    let h = m([["-1/2", "0"], ["1/2", "1/2"]])?;
    let ui = SeriesMatrix::scalar(&ring, 2, &e("u")?);
    let fi = SeriesMatrix::scalar(&ring, 2, &f_plus);
    let sum = |a: SeriesMatrix, b: SeriesMatrix| -> Result<SeriesMatrix> { a.sub(&b.map(|x| Ok(x.neg()))?) };
    let checks = [
        rewrite_phi_squared(&big_phi.try_mul(&big_psi)?) == f_plus,
        sym_mul(&d1, &d2)? == fi,
        sym_mul(&d2, &d1)? == fi,
        sum(sym_mul(&d1, &h)?, sym_mul(&h, &d2)?)? == ui,
        sum(sym_mul(&d2, &h)?, sym_mul(&h, &d1)?)? == ui,
    ];
    let passed = checks.iter().filter(|&&b| b).count();
    Ok(IdentityReport {
        identity: "D1 H + H D2 = u I for the normal form u +/- phi".into(),
        lhs_dim: passed,
        rhs_dim: checks.len(),
        trunc: 8,
        status: Status::from_bool(passed == checks.len()),
        witness: None,
        note: None,
    })
}

/// Brings a factorization of shape ([psi u; -u phi], [phi -u; u psi]) to u ± Theta by the
/// block permutation J = [0 -I; I 0], returning Theta.
pub fn normal_form(mf: &MatrixFactorization) -> Result<SeriesMatrix> {
    let ring = mf.ring();
    let u = ring.cover_variable().ok_or(MflabError::NoNormalForm)?;
    let s = ring.series_ring();
    let n2 = mf.size();
    if n2 % 2 == 1 {
        return Err(MflabError::NoNormalForm);
    }
    let n = n2 / 2;
    let uvar = TruncSeries::var(s, s.var_index(&u)?);
    let mut j = SeriesMatrix::zero(s, n2, n2);
    let mut jinv = SeriesMatrix::zero(s, n2, n2);
    let one = TruncSeries::one(s);
    for i in 0..n {
        j.set(i, n + i, one.neg());
        j.set(n + i, i, one.clone());
        jinv.set(i, n + i, one.clone());
        jinv.set(n + i, i, one.neg());
    }
    let ui = SeriesMatrix::scalar(s, n2, &uvar);
    let theta = mf.phi().mul(&j)?.sub(&ui)?;
    let minus = ui.sub(&jinv.mul(mf.psi())?)?;
    let free_of_u = theta
        .entries()
        .all(|e| e.substitute_zero(&u).and_then(|z| z.embed(s)).ok().as_ref() == Some(e));
    if theta != minus || !free_of_u {
        return Err(MflabError::NoNormalForm);
    }
    Ok(theta)
}

/// Checks the concrete homotopy identity for a factorization in normal form.
pub fn verify_concrete_homotopy(mf: &MatrixFactorization) -> Result<bool> {
    let theta = normal_form(mf)?;
    let ring = mf.ring();
    let s = ring.series_ring();
    let k = ring.field();
    let n = theta.rows;
    let u = TruncSeries::var(s, s.nvars() - 1);
    let ui = SeriesMatrix::scalar(s, n, &u);
    let zero = SeriesMatrix::zero(s, n, n);
    let big_phi = ui.sub(&theta.map(|e| Ok(e.neg()))?)?;
    let big_psi = ui.sub(&theta)?;
    let neg = |m: &SeriesMatrix| m.map(|e| Ok(e.neg()));
    let d1 = SeriesMatrix::blocks(&neg(&big_phi)?, &zero, &ui, &big_psi);
    let d2 = SeriesMatrix::blocks(&neg(&big_psi)?, &zero, &ui, &big_phi);
    let half = TruncSeries::constant(s, k.inv(&k.from_i64(2))?);
    let hi = SeriesMatrix::scalar(s, n, &half);
    let h = SeriesMatrix::blocks(&neg(&hi)?, &zero, &hi, &hi);
    let u2 = SeriesMatrix::scalar(s, 2 * n, &u);
    let lhs1 = d1.mul(&h)?.sub(&neg(&h.mul(&d2)?)?)?;
    let lhs2 = d2.mul(&h)?.sub(&neg(&h.mul(&d1)?)?)?;
    Ok(lhs1 == u2 && lhs2 == u2)
}

/// Finds s: N -> (N-bar)^# and q: (N-bar)^# -> N with q∘s invertible in constant terms,
/// which exhibits N as a direct summand of (N-bar)^#. Polynomial maps of low degree are tried
/// first; their closedness is exact. The full truncated morphism spaces are the fallback.
pub fn find_section(n: &MatrixFactorization, ctx: &Context) -> Result<IdentityReport> {
    let n = n.reduce()?;
    let big = sharp_into(&flat_mf(&n)?, n.ring())?;
    let mut rep = IdentityReport {
        identity: "N is a direct summand of (N-bar)#".into(),
        lhs_dim: n.size(),
        rhs_dim: big.size(),
        trunc: ctx.trunc(),
        status: Status::Fail,
        witness: None,
        note: None,
    };
    if n.is_empty() {
        rep.status = Status::Pass;
        return Ok(rep);
    }
    for degree in [1, 2] {
        let q_space = polynomial_constant_maps(&big, &n, degree, ctx)?;
        let s_space = polynomial_constant_maps(&n, &big, degree, ctx)?;
        if let Some(w) = search_section(&q_space, &s_space, n.size(), n.ring().prime()?, ctx)? {
            rep.status = Status::Pass;
            rep.witness = Some(w);
            rep.note = Some(format!("polynomial maps of degree <= {degree}"));
            return Ok(rep);
        }
    }
    let alg = n.ring().ambient_algebra(ctx.trunc())?;
    let mn = MfMats::new(&n, &alg);
    let mb = MfMats::new(&big, &alg);
    let q_space = closed_constant_maps(&alg, &mb, &mn, ctx)?;
    let s_space = closed_constant_maps(&alg, &mn, &mb, ctx)?;
    match search_section(&q_space, &s_space, n.size(), alg.p(), ctx)? {
        Some(w) => {
            rep.status = Status::Pass;
            rep.witness = Some(w);
        }
        None => {
            rep.status = Status::Inconclusive;
            rep.note = Some("no section found by random search".into());
        }
    }
    Ok(rep)
}

/// Random q from `q_space`, then s from `s_space` with q0 s0 = I; returns (q0 s0, q1 s1).
fn search_section(
    q_space: &[ConstPair],
    s_space: &[ConstPair],
    ns: usize,
    p: u64,
    ctx: &Context,
) -> Result<Option<ConstPair>> {
    use rand::Rng;
    if s_space.is_empty() || q_space.is_empty() {
        return Ok(None);
    }
    let mut rng = ctx.rng(0x5ec7);
    for _ in 0..hmf::RANDOM_TRIES {
        ctx.check()?;
        let coef: Vec<u64> = (0..q_space.len()).map(|_| rng.gen_range(0..p)).collect();
        let q = combine_pairs(q_space, &coef, p);
        let cols: Vec<Vec<u64>> = s_space
            .iter()
            .map(|(s0, _)| dense::mul(&q.0, s0, p).into_iter().flatten().collect())
            .collect();
        let a: dense::Mat = (0..ns * ns).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let target: Vec<u64> = dense::identity(ns).into_iter().flatten().collect();
        if let Some(x) = dense::solve(&a, &target, p) {
            let s = combine_pairs(s_space, &x, p);
            let c0 = dense::mul(&q.0, &s.0, p);
            let c1 = dense::mul(&q.1, &s.1, p);
            if dense::is_invertible(&c0, p) && dense::is_invertible(&c1, p) {
                return Ok(Some((c0, c1)));
            }
        }
    }
    Ok(None)
}

/// Constant parts of the closed pairs src -> tgt whose entries are polynomials of degree at
/// most `degree`. The products are computed at a truncation above every degree involved.
fn polynomial_constant_maps(
    src: &MatrixFactorization,
    tgt: &MatrixFactorization,
    degree: usize,
    ctx: &Context,
) -> Result<Vec<ConstPair>> {
    let entries_deg = |m: &MatrixFactorization| {
        m.phi()
            .entries()
            .chain(m.psi().entries())
            .filter_map(|e| e.max_degree())
            .max()
            .unwrap_or(0)
    };
    let top = degree + entries_deg(src).max(entries_deg(tgt));
    if top > ctx.trunc() {
        return Ok(Vec::new());
    }
    let alg = src.ring().ambient_algebra(top)?;
    let p = alg.p();
    let (a, b) = (MfMats::new(src, &alg), MfMats::new(tgt, &alg));
    let (m, n) = (b.size(), a.size());
    let width = 2 * m * n;
    let eq = |which: usize, r: usize, c: usize| which * m * n + r * n + c;
    let nsrc = alg.count_up_to(degree);
    let mut images = Vec::with_capacity(nsrc * width);
    for s in 0..nsrc as u32 {
        for which in 0..2 {
            for i in 0..m {
                for j in 0..n {
                    // eq 0: a0 phi - phi' a1, eq 1: a1 psi - psi' a0
                    let mut terms: Vec<(usize, crate::linalg::SVec)> = Vec::new();
                    if which == 0 {
                        for l in 0..n {
                            terms.push((eq(0, i, l), alg.mul_std(s, a.phi.get(j, l))));
                        }
                        for k in 0..m {
                            terms.push((eq(1, k, j), alg.neg(&alg.mul_std(s, b.psi.get(k, i)))));
                        }
                    } else {
                        for k in 0..m {
                            terms.push((eq(0, k, j), alg.neg(&alg.mul_std(s, b.phi.get(k, i)))));
                        }
                        for l in 0..n {
                            terms.push((eq(1, i, l), alg.mul_std(s, a.psi.get(j, l))));
                        }
                    }
                    let pairs = terms
                        .iter()
                        .flat_map(|(slot, v)| v.iter().map(move |&(t, c)| (t * width as u32 + *slot as u32, c as u64)));
                    images.push(crate::linalg::from_pairs(pairs, p));
                }
            }
        }
    }
    let kernel = crate::homalg::kernel_ctx(&images, alg.dim() * width, p, ctx)?;
    let mut ech = Echelon::new(p, width, false);
    let mut out = Vec::new();
    for v in kernel {
        let constant: crate::linalg::SVec = v.iter().copied().take_while(|&(k, _)| (k as usize) < width).collect();
        if constant.is_empty() || !ech.push(&constant) {
            continue;
        }
        let mut c0 = vec![vec![0u64; n]; m];
        let mut c1 = vec![vec![0u64; n]; m];
        for &(k, c) in &constant {
            let k = k as usize;
            let (which, r, col) = (k / (m * n), (k % (m * n)) / n, k % n);
            if which == 0 {
                c0[r][col] = c as u64;
            } else {
                c1[r][col] = c as u64;
            }
        }
        out.push((c0, c1));
    }
    Ok(out)
}

type ConstPair = (dense::Mat, dense::Mat);

fn combine_pairs(space: &[ConstPair], coef: &[u64], p: u64) -> ConstPair {
    let (r, c) = space
        .first()
        .map(|(a, _)| (a.len(), a.first().map(|x| x.len()).unwrap_or(0)))
        .unwrap_or((0, 0));
    let mut a0 = vec![vec![0u64; c]; r];
    let mut a1 = vec![vec![0u64; c]; r];
    for ((m0, m1), &x) in space.iter().zip(coef) {
        for i in 0..r {
            for j in 0..c {
                a0[i][j] = (a0[i][j] + x * m0[i][j]) % p;
                a1[i][j] = (a1[i][j] + x * m1[i][j]) % p;
            }
        }
    }
    (a0, a1)
}

/// Constant parts of a basis of closed maps src -> tgt.
fn closed_constant_maps(
    alg: &Arc<crate::algebra::TruncAlgebra>,
    src: &MfMats,
    tgt: &MfMats,
    ctx: &Context,
) -> Result<Vec<ConstPair>> {
    let (m, n) = (tgt.size(), src.size());
    let pairs = hmf::closed_pairs(alg, src, tgt, ctx)?;
    let mut ech = Echelon::new(alg.p(), 2 * m * n, false);
    let mut out = Vec::new();
    for (a0, a1) in pairs {
        let c0 = a0.constant_part(alg);
        let c1 = a1.constant_part(alg);
        let flat: Vec<(u32, u32)> = c0
            .iter()
            .chain(c1.iter())
            .flatten()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (i as u32, v as u32))
            .collect();
        if !flat.is_empty() && ech.push(&flat) {
            out.push((c0, c1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> Field {
        Field::fp(7).unwrap()
    }

    #[test]
    fn sharp_examples() {
        let r = HypersurfaceRing::new(f7(), &["y"], "y^3", 12).unwrap();
        let m = MatrixFactorization::rank_one(&r, "y", "y^2").unwrap();
        let s = sharp_mf(&m).unwrap();
        assert_eq!(s.phi().to_strings(), vec![vec!["y^2", "u"], vec!["-u", "y"]]);
        assert_eq!(s.psi().to_strings(), vec![vec!["y", "-u"], vec!["u", "y^2"]]);
        assert!(s.is_reduced());
        let r2 = HypersurfaceRing::new(f7(), &["y"], "y^2", 12).unwrap();
        let a1 = sharp_mf(&MatrixFactorization::rank_one(&r2, "y", "y").unwrap()).unwrap();
        assert_eq!(a1.phi().to_strings(), vec![vec!["y", "u"], vec!["-u", "y"]]);
    }

    #[test]
    fn flat_examples() {
        let r = HypersurfaceRing::new(f7(), &["y"], "y^3", 12).unwrap();
        let m = MatrixFactorization::rank_one(&r, "y", "y^2").unwrap();
        let fs = flat_mf(&sharp_mf(&m).unwrap()).unwrap();
        assert_eq!(fs, m.shift().direct_sum(&m).unwrap());
        let cover = r.double_branched_cover().unwrap().ring;
        assert!(flat_mf(&MatrixFactorization::trivial(&cover)).unwrap().is_empty());
        assert!(matches!(flat_mf(&m), Err(MflabError::NotACover(_))));
    }

    #[test]
    fn generic_homotopy_holds() {
        assert_eq!(verify_generic_homotopy(&Field::Q).unwrap().status, Status::Pass);
        assert_eq!(verify_generic_homotopy(&f7()).unwrap().status, Status::Pass);
        assert_eq!(verify_generic_homotopy(&Field::Fp(2)), Err(MflabError::CharTwo));
    }

    #[test]
    fn roundtrips_on_a2() {
        let r = HypersurfaceRing::new(f7(), &["y"], "y^3", 12).unwrap();
        let m = MatrixFactorization::rank_one(&r, "y", "y^2").unwrap();
        let ctx = Context::default();
        let a = verify_knoerrer_roundtrip(&m, Direction::SharpThenFlat, &ctx).unwrap();
        assert_eq!(a.status, Status::Pass);
        let s = sharp_mf(&m).unwrap();
        let b = verify_knoerrer_roundtrip(&s, Direction::FlatThenSharp, &ctx).unwrap();
        assert_eq!(b.status, Status::Pass);
        assert!(verify_concrete_homotopy(&s).unwrap());
        assert_eq!(find_section(&s, &ctx).unwrap().status, Status::Pass);
    }
}
