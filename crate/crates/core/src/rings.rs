//! Hypersurface rings S/(f), their double branched covers, and monomial curve rings.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::algebra::{monomials_of_degree, TruncAlgebra};
use crate::error::{MflabError, Result};
use crate::field::{Field, FieldElem};
use crate::series::{degree, Monomial, SeriesRing, TruncSeries};

/// Ring descriptor as read from JSON or TOML.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub field: Field,
    pub vars: Vec<String>,
    pub f: String,
    pub trunc: usize,
}

/// Curve descriptor as read from JSON or TOML.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveDescriptor {
    pub field: Field,
    pub semigroup: Vec<u32>,
    pub trunc: usize,
}

/// Parses JSON when the text starts with `{`, TOML otherwise.
pub fn parse_descriptor<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| MflabError::InvalidInput(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| MflabError::InvalidInput(e.to_string()))
    }
}

/// Local-order normal form data for S^{(N)}/(f) over an arbitrary field.
#[derive(Debug)]
struct NormalForm {
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// pivot monomial -> row (normalized, pivot coefficient 1)
    rows: BTreeMap<usize, BTreeMap<usize, FieldElem>>,
}

impl NormalForm {
    fn build(f: &TruncSeries) -> NormalForm {
        let ring = f.ring();
        let k = &ring.field;
        let mut monos = Vec::new();
        for d in 0..=ring.trunc {
            monos.extend(monomials_of_degree(ring.nvars(), d));
        }
        let index: HashMap<Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut nf = NormalForm {
            monos,
            index,
            rows: BTreeMap::new(),
        };
        let ord = f.order().unwrap_or(usize::MAX);
        for (mi, m) in nf.monos.clone().iter().enumerate() {
            let _ = mi;
            if degree(m) + ord > ring.trunc {
                break;
            }
            let mut row = BTreeMap::new();
            for (t, c) in f.terms() {
                let prod: Monomial = m.iter().zip(t).map(|(a, b)| a + b).collect();
                if degree(&prod) <= ring.trunc {
                    row.insert(nf.index[&prod], c.clone());
                }
            }
            let res = nf.reduce_vec(k, row);
            if let Some((&piv, c)) = res.iter().next() {
                let inv = k.inv(c).unwrap();
                let row: BTreeMap<usize, FieldElem> = res.iter().map(|(&i, v)| (i, k.mul(v, &inv))).collect();
                nf.rows.insert(piv, row);
            }
        }
        nf
    }

    fn reduce_vec(&self, k: &Field, mut acc: BTreeMap<usize, FieldElem>) -> BTreeMap<usize, FieldElem> {
        let mut out = BTreeMap::new();
        while let Some((i, c)) = acc.pop_first() {
            if k.is_zero(&c) {
                continue;
            }
            match self.rows.get(&i) {
                None => {
                    out.insert(i, c);
                }
                Some(row) => {
                    for (&j, v) in row.iter().skip(1) {
                        let e = acc.entry(j).or_insert_with(|| k.zero());
                        *e = k.sub(e, &k.mul(&c, v));
                    }
                }
            }
        }
        out
    }
}

/// R = S/(f) with S = k[[vars]], computed at truncation `trunc`.
#[derive(Clone)]
pub struct HypersurfaceRing {
    f: TruncSeries,
    cover_var: Option<String>,
    nf: Arc<OnceLock<NormalForm>>,
}

impl PartialEq for HypersurfaceRing {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.f.ring() == other.f.ring()
    }
}

impl Eq for HypersurfaceRing {}

impl fmt::Debug for HypersurfaceRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HypersurfaceRing({} over {} in {:?}, N={})",
            self.f,
            self.field(),
            self.vars(),
            self.trunc()
        )
    }
}

impl fmt::Display for HypersurfaceRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[[{}]]/({})", self.field(), self.vars().join(","), self.f)
    }
}

impl HypersurfaceRing {
    pub fn new(field: Field, vars: &[&str], f: &str, trunc: usize) -> Result<Self> {
        let ring = SeriesRing::new(field, vars.iter().map(|s| s.to_string()).collect(), trunc)?;
        Self::from_series(TruncSeries::parse(f, &ring)?)
    }

    pub fn from_series(f: TruncSeries) -> Result<Self> {
        if f.ring().nvars() == 0 {
            return Err(MflabError::InvalidRing("no variables".into()));
        }
        match f.order() {
            None => return Err(MflabError::InvalidRing("f = 0".into())),
            Some(o) if o < 2 => {
                return Err(MflabError::InvalidRing(format!(
                    "f must lie in the square of the maximal ideal (order {o})"
                )))
            }
            _ => {}
        }
        Ok(HypersurfaceRing {
            f,
            cover_var: None,
            nf: Arc::new(OnceLock::new()),
        })
    }

    pub fn from_descriptor(d: &RingDescriptor) -> Result<Self> {
        let vars: Vec<&str> = d.vars.iter().map(|s| s.as_str()).collect();
        Self::new(d.field.clone(), &vars, &d.f, d.trunc)
    }

    pub fn descriptor(&self) -> RingDescriptor {
        RingDescriptor {
            field: self.field().clone(),
            vars: self.vars().to_vec(),
            f: self.f.to_string(),
            trunc: self.trunc(),
        }
    }

    pub fn f(&self) -> &TruncSeries {
        &self.f
    }

    pub fn series_ring(&self) -> &Arc<SeriesRing> {
        self.f.ring()
    }

    pub fn field(&self) -> &Field {
        &self.series_ring().field
    }

    pub fn vars(&self) -> &[String] {
        &self.series_ring().vars
    }

    pub fn trunc(&self) -> usize {
        self.series_ring().trunc
    }

    /// Krull dimension d = |vars| - 1.
    pub fn dim(&self) -> usize {
        self.vars().len() - 1
    }

    pub fn order_f(&self) -> usize {
        self.f.order().expect("f is nonzero")
    }

    /// Same ring at another truncation.
    pub fn with_trunc(&self, trunc: usize) -> Self {
        if trunc == self.trunc() {
            return self.clone();
        }
        HypersurfaceRing {
            f: self.f.retrunc(trunc),
            cover_var: self.cover_var.clone(),
            nf: Arc::new(OnceLock::new()),
        }
    }

    /// Same field, variables and f up to the smaller of the two truncations.
    pub fn compatible(&self, other: &HypersurfaceRing) -> bool {
        let t = self.trunc().min(other.trunc());
        self.field() == other.field() && self.vars() == other.vars() && self.f.retrunc(t) == other.f.retrunc(t)
    }

    pub fn parse(&self, text: &str) -> Result<TruncSeries> {
        TruncSeries::parse(text, self.series_ring())
    }

    pub fn prime(&self) -> Result<u64> {
        self.field().prime().ok_or(MflabError::RequiresFiniteField)
    }

    fn f_residues(&self) -> Result<Vec<(Monomial, u64)>> {
        let k = self.field();
        self.prime()?;
        Ok(self.f.terms().map(|(m, c)| (m.clone(), k.residue(c))).collect())
    }

    /// S/(n^{N+1}) over F_p.
    pub fn ambient_algebra(&self, trunc: usize) -> Result<Arc<TruncAlgebra>> {
        let p = self.prime()?;
        Ok(TruncAlgebra::new(p, self.vars().len(), trunc, None))
    }

    /// R/(m^{N+1}) over F_p.
    pub fn quotient_algebra(&self, trunc: usize) -> Result<Arc<TruncAlgebra>> {
        let p = self.prime()?;
        let f = self.f_residues()?;
        Ok(TruncAlgebra::new(p, self.vars().len(), trunc, Some(&f)))
    }

    /// e(R) = ord f.
    pub fn multiplicity(&self) -> usize {
        self.order_f()
    }

    /// The cover variable, if this ring has the shape g + u^2 with g free of u.
    pub fn cover_variable(&self) -> Option<String> {
        if let Some(v) = &self.cover_var {
            return Some(v.clone());
        }
        let n = self.vars().len();
        if n < 2 {
            return None;
        }
        let i = n - 1;
        let k = self.field();
        let mut u2 = vec![0; n];
        u2[i] = 2;
        if !k.is_one(&self.f.coeff(&u2)) {
            return None;
        }
        let clean = self.f.terms().all(|(m, _)| m[i] == 0 || *m == u2);
        clean.then(|| self.vars()[i].clone())
    }

    /// R^# = S[[u]]/(f + u^2); the new variable is `u`, or the first free name among
    /// `v`, `w`, `u1`, `u2`, ... when `u` is taken.
    pub fn double_branched_cover(&self) -> Result<CoverRing> {
        if self.field().characteristic() == 2 {
            return Err(MflabError::CharTwo);
        }
        let taken = |s: &str| self.vars().iter().any(|v| v == s);
        let name = ["u", "v", "w"]
            .iter()
            .map(|s| s.to_string())
            .chain((1..).map(|i| format!("u{i}")))
            .find(|s| !taken(s))
            .unwrap();
        let mut vars = self.vars().to_vec();
        vars.push(name.clone());
        let ring = SeriesRing::new(self.field().clone(), vars, self.trunc())?;
        let f = self.f.embed(&ring)?;
        let u = TruncSeries::var(&ring, ring.nvars() - 1);
        let g = &f + &(&u * &u);
        let mut cover = HypersurfaceRing::from_series(g)?;
        cover.cover_var = Some(name.clone());
        Ok(CoverRing {
            renamed: name != "u",
            var: name,
            ring: cover,
        })
    }

    /// The base ring of a cover: u set to zero in f and dropped.
    pub fn cover_base(&self) -> Result<HypersurfaceRing> {
        let u = self
            .cover_variable()
            .ok_or_else(|| MflabError::NotACover(self.to_string()))?;
        HypersurfaceRing::from_series(self.f.substitute_zero(&u)?)
    }

    fn normal_form(&self) -> &NormalForm {
        self.nf.get_or_init(|| NormalForm::build(&self.f))
    }

    /// Canonical representative of `s` modulo (f) at the truncation.
    pub fn reduce(&self, s: &TruncSeries) -> Result<QuotientElem> {
        if s.ring() != self.series_ring() {
            return Err(MflabError::MismatchedRing(format!(
                "series over {:?} reduced in {self}",
                s.ring().vars
            )));
        }
        let nf = self.normal_form();
        let k = self.field();
        let acc: BTreeMap<usize, FieldElem> = s.terms().map(|(m, c)| (nf.index[m], c.clone())).collect();
        let res = nf.reduce_vec(k, acc);
        let rep = TruncSeries::from_terms(
            self.series_ring(),
            res.into_iter().map(|(i, c)| (nf.monos[i].clone(), c)),
        );
        Ok(QuotientElem { rep })
    }
}

/// Output of `double_branched_cover`.
#[derive(Clone, Debug)]
pub struct CoverRing {
    pub ring: HypersurfaceRing,
    pub var: String,
    pub renamed: bool,
}

/// Element of R in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientElem {
    rep: TruncSeries,
}

impl QuotientElem {
    pub fn rep(&self) -> &TruncSeries {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn add(&self, other: &QuotientElem, ring: &HypersurfaceRing) -> Result<QuotientElem> {
        ring.reduce(&self.rep.try_add(&other.rep)?)
    }

    pub fn mul(&self, other: &QuotientElem, ring: &HypersurfaceRing) -> Result<QuotientElem> {
        ring.reduce(&self.rep.try_mul(&other.rep)?)
    }
}

impl fmt::Display for QuotientElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

/// k[[t^{a_1}, ..., t^{a_g}]] with elements stored as t-series truncated at `trunc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialCurveRing {
    pub field: Field,
    pub semigroup: Vec<u32>,
    pub trunc: usize,
}

impl MonomialCurveRing {
    pub fn new(field: Field, semigroup: &[u32], trunc: usize) -> Result<Self> {
        field.validate()?;
        let mut gens = semigroup.to_vec();
        gens.sort_unstable();
        gens.dedup();
        if gens.is_empty() || gens[0] == 0 {
            return Err(MflabError::InvalidRing("semigroup generators must be positive".into()));
        }
        if gens.iter().fold(0u32, |g, &a| g.gcd(&a)) != 1 {
            return Err(MflabError::InvalidRing(format!("gcd of {gens:?} is not 1")));
        }
        let c = Self::conductor_of(&gens);
        let need = c as usize + *gens.last().unwrap() as usize;
        if trunc < need {
            return Err(MflabError::InvalidRing(format!(
                "truncation {trunc} below conductor + largest generator = {need}"
            )));
        }
        Ok(MonomialCurveRing {
            field,
            semigroup: gens,
            trunc,
        })
    }

    pub fn from_descriptor(d: &CurveDescriptor) -> Result<Self> {
        Self::new(d.field.clone(), &d.semigroup, d.trunc)
    }

    pub fn descriptor(&self) -> CurveDescriptor {
        CurveDescriptor {
            field: self.field.clone(),
            semigroup: self.semigroup.clone(),
            trunc: self.trunc,
        }
    }

    fn membership(gens: &[u32], upto: u32) -> Vec<bool> {
        let mut inside = vec![false; upto as usize + 1];
        inside[0] = true;
        for n in 1..=upto as usize {
            inside[n] = gens.iter().any(|&a| a as usize <= n && inside[n - a as usize]);
        }
        inside
    }

    fn conductor_of(gens: &[u32]) -> u32 {
        // the Frobenius number is below a_1 * a_g
        let bound = gens[0] * gens[gens.len() - 1] + 1;
        let inside = Self::membership(gens, bound);
        (0..=bound as usize)
            .rev()
            .find(|&n| !inside[n])
            .map(|n| n as u32 + 1)
            .unwrap_or(0)
    }

    pub fn contains_exponent(&self, n: u32) -> bool {
        n >= self.conductor() || Self::membership(&self.semigroup, n)[n as usize]
    }

    /// Frobenius number + 1.
    pub fn conductor(&self) -> u32 {
        Self::conductor_of(&self.semigroup)
    }

    /// Multiplicity: the smallest generator.
    pub fn multiplicity(&self) -> u32 {
        self.semigroup[0]
    }

    pub fn gaps(&self) -> Vec<u32> {
        (0..self.conductor()).filter(|&n| !self.contains_exponent(n)).collect()
    }

    /// Symmetric semigroup: n is in it iff F - n is not, for 0 <= n <= F.
    pub fn is_gorenstein(&self) -> bool {
        let c = self.conductor();
        if c == 0 {
            return true;
        }
        let fr = c - 1;
        (0..=fr).all(|n| self.contains_exponent(n) != self.contains_exponent(fr - n))
    }

    /// The t-series ring of the normalization k[[t]].
    pub fn t_ring(&self) -> Arc<SeriesRing> {
        SeriesRing::new(self.field.clone(), vec!["t".into()], self.trunc).unwrap()
    }

    /// For two generators a < b, the plane model x^b - y^a with x = t^a, y = t^b.
    pub fn plane_model(&self, trunc: usize) -> Result<HypersurfaceRing> {
        if self.semigroup.len() != 2 {
            return Err(MflabError::InvalidRing(format!(
                "plane model needs two generators, got {:?}",
                self.semigroup
            )));
        }
        let (a, b) = (self.semigroup[0], self.semigroup[1]);
        HypersurfaceRing::new(self.field.clone(), &["x", "y"], &format!("x^{b} - y^{a}"), trunc)
    }
}

/// Conductor of the numerical semigroup generated by `gens`.
pub fn curve_conductor(gens: &[u32]) -> Result<u32> {
    Ok(MonomialCurveRing::new(Field::Fp(101), gens, 10_000)?.conductor())
}

/// e(R) = ord f.
pub fn ring_multiplicity(r: &HypersurfaceRing) -> usize {
    r.multiplicity()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> Field {
        Field::fp(7).unwrap()
    }

    #[test]
    fn cover_of_cusp() {
        let r = HypersurfaceRing::new(f7(), &["y"], "y^3", 12).unwrap();
        let c = r.double_branched_cover().unwrap();
        assert_eq!(c.ring.vars(), ["y", "u"]);
        assert_eq!(c.ring.f().to_string(), "u^2 + y^3");
        assert!(!c.renamed);
        let cc = c.ring.double_branched_cover().unwrap();
        assert_eq!(cc.var, "v");
        assert!(cc.renamed);
        assert_eq!(cc.ring.f().to_string(), "u^2 + v^2 + y^3");
        let e = HypersurfaceRing::new(f7(), &["x", "y"], "x^7 - y^3", 12).unwrap();
        assert_eq!(
            e.double_branched_cover().unwrap().ring.f().to_string(),
            "u^2 - y^3 + x^7"
        );
    }

    #[test]
    fn cover_rejects_char_two_and_bad_f() {
        assert!(Field::fp(2).is_err());
        assert!(HypersurfaceRing::new(f7(), &["x"], "x", 6).is_err());
        assert!(HypersurfaceRing::new(f7(), &["x"], "0", 6).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        for (f, e) in [("x^7 - y^3", 3), ("y^2", 2), ("x*y", 2)] {
            let r = HypersurfaceRing::new(f7(), &["x", "y"], f, 12).unwrap();
            assert_eq!(ring_multiplicity(&r), e);
            let c = r.double_branched_cover().unwrap().ring;
            assert_eq!(ring_multiplicity(&c), 2);
        }
    }

    #[test]
    fn reduce_examples() {
        let r = HypersurfaceRing::new(Field::Q, &["x", "y"], "x^7 - y^3", 12).unwrap();
        assert!(r.reduce(r.f()).unwrap().is_zero());
        let one = r.parse("1").unwrap();
        assert_eq!(r.reduce(&one).unwrap().rep(), &one);
        assert_eq!(r.reduce(&r.parse("y^3").unwrap()).unwrap().to_string(), "x^7");
        let c = HypersurfaceRing::new(f7(), &["y"], "y^3", 12)
            .unwrap()
            .double_branched_cover()
            .unwrap()
            .ring;
        let u2 = c.parse("u^2").unwrap();
        assert_eq!(c.reduce(&u2).unwrap().rep(), &c.parse("-y^3").unwrap());
    }

    #[test]
    fn curve_examples() {
        assert_eq!(curve_conductor(&[3, 7]).unwrap(), 12);
        assert_eq!(curve_conductor(&[2, 3]).unwrap(), 2);
        assert_eq!(curve_conductor(&[1]).unwrap(), 0);
        let c = MonomialCurveRing::new(Field::Fp(101), &[3, 7], 30).unwrap();
        assert_eq!(c.gaps(), vec![1, 2, 4, 5, 8, 11]);
        assert!(c.is_gorenstein());
        assert!(!MonomialCurveRing::new(Field::Fp(101), &[3, 4, 5], 30)
            .unwrap()
            .is_gorenstein());
        assert!(MonomialCurveRing::new(Field::Fp(101), &[1], 30)
            .unwrap()
            .is_gorenstein());
        assert!(MonomialCurveRing::new(Field::Fp(101), &[4, 6], 30).is_err());
    }

    #[test]
    fn descriptors_in_both_formats() {
        let j = r#"{"field": {"Fp": 101}, "vars": ["x","y"], "f": "x^7 - y^3", "trunc": 12}"#;
        let t = "field = { Fp = 101 }\nvars = [\"x\", \"y\"]\nf = \"x^7 - y^3\"\ntrunc = 12\n";
        let a: RingDescriptor = parse_descriptor(j).unwrap();
        let b: RingDescriptor = parse_descriptor(t).unwrap();
        assert_eq!(a, b);
        let q: RingDescriptor = parse_descriptor(r#"{"field": "Q", "vars": ["y"], "f": "y^2", "trunc": 4}"#).unwrap();
        assert_eq!(q.field, Field::Q);
        let c: CurveDescriptor =
            parse_descriptor(r#"{"field": {"Fp": 101}, "semigroup": [3,7], "trunc": 30}"#).unwrap();
        assert_eq!(MonomialCurveRing::from_descriptor(&c).unwrap().conductor(), 12);
    }
}
