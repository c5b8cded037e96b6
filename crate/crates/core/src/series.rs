//! Multivariate power series truncated at a total degree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{MflabError, Result};
use crate::field::{Field, FieldElem};

/// Exponent vector, one entry per ring variable.
pub type Monomial = Vec<u32>;

pub fn degree(m: &[u32]) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

/// The ambient data shared by all series of one ring: field, variable names, truncation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeriesRing {
    pub field: Field,
    pub vars: Vec<String>,
    pub trunc: usize,
}

impl SeriesRing {
    pub fn new(field: Field, vars: Vec<String>, trunc: usize) -> Result<Arc<SeriesRing>> {
        field.validate()?;
        for (i, v) in vars.iter().enumerate() {
            if v.is_empty() || !v.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(MflabError::InvalidRing(format!("bad variable name `{v}`")));
            }
            if vars[..i].contains(v) {
                return Err(MflabError::InvalidRing(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Arc::new(SeriesRing { field, vars, trunc }))
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| MflabError::UnknownVariable(name.to_string()))
    }

    pub fn with_trunc(&self, trunc: usize) -> Arc<SeriesRing> {
        Arc::new(SeriesRing { trunc, ..self.clone() })
    }
}

/// A truncated series: a sparse map from exponent vectors of degree <= trunc to nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncSeries {
    ring: Arc<SeriesRing>,
    coeffs: BTreeMap<Monomial, FieldElem>,
}

fn same_ring(a: &SeriesRing, b: &SeriesRing) -> Result<()> {
    if a != b {
        return Err(MflabError::MismatchedRing(format!(
            "{:?}/{}/N={} vs {:?}/{}/N={}",
            a.vars, a.field, a.trunc, b.vars, b.field, b.trunc
        )));
    }
    Ok(())
}

impl TruncSeries {
    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        TruncSeries {
            ring: ring.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: FieldElem) -> Self {
        let mut s = Self::zero(ring);
        s.add_term(vec![0; ring.nvars()], c);
        s
    }

    pub fn one(ring: &Arc<SeriesRing>) -> Self {
        Self::constant(ring, ring.field.one())
    }

    pub fn from_i64(ring: &Arc<SeriesRing>, v: i64) -> Self {
        Self::constant(ring, ring.field.from_i64(v))
    }

    pub fn var(ring: &Arc<SeriesRing>, i: usize) -> Self {
        let mut m = vec![0; ring.nvars()];
        m[i] = 1;
        Self::monomial(ring, m, ring.field.one())
    }

    pub fn monomial(ring: &Arc<SeriesRing>, m: Monomial, c: FieldElem) -> Self {
        let mut s = Self::zero(ring);
        s.add_term(m, c);
        s
    }

    /// Builds a series from `(exponents, coefficient)` pairs, normalizing as it goes.
    pub fn from_terms(ring: &Arc<SeriesRing>, terms: impl IntoIterator<Item = (Monomial, FieldElem)>) -> Self {
        let mut s = Self::zero(ring);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    fn add_term(&mut self, m: Monomial, c: FieldElem) {
        assert_eq!(m.len(), self.ring.nvars(), "exponent vector length");
        if degree(&m) > self.ring.trunc {
            return;
        }
        let k = &self.ring.field;
        match self.coeffs.get_mut(&m) {
            Some(old) => {
                let s = k.add(old, &c);
                if k.is_zero(&s) {
                    self.coeffs.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                if !k.is_zero(&c) {
                    self.coeffs.insert(m, c);
                }
            }
        }
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn field(&self) -> &Field {
        &self.ring.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FieldElem)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, m: &[u32]) -> FieldElem {
        self.coeffs.get(m).cloned().unwrap_or_else(|| self.ring.field.zero())
    }

    pub fn constant_term(&self) -> FieldElem {
        self.coeff(&vec![0; self.ring.nvars()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        !self.ring.field.is_zero(&self.constant_term())
    }

    /// Minimal total degree of a term; `None` stands for +infinity (the zero series).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.keys().map(|m| degree(m)).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|m| degree(m)).max()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        same_ring(&self.ring, &other.ring)?;
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let k = &self.ring.field;
        TruncSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|(m, c)| (m.clone(), k.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &FieldElem) -> Self {
        let k = &self.ring.field;
        Self::from_terms(&self.ring, self.coeffs.iter().map(|(m, a)| (m.clone(), k.mul(a, c))))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        same_ring(&self.ring, &other.ring)?;
        let k = &self.ring.field;
        let n = self.ring.trunc;
        let mut out = Self::zero(&self.ring);
        for (ma, ca) in &self.coeffs {
            let da = degree(ma);
            for (mb, cb) in &other.coeffs {
                if da + degree(mb) > n {
                    continue;
                }
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, k.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one(&self.ring);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Multiplicative inverse at the truncation via the geometric series of `1 - a/a0`.
    pub fn invert(&self) -> Result<Self> {
        let k = &self.ring.field;
        let c0 = self.constant_term();
        if k.is_zero(&c0) {
            return Err(MflabError::NotAUnit);
        }
        let c0inv = k.inv(&c0)?;
        // a = c0 (1 - r) with r in the maximal ideal
        let r = (&Self::one(&self.ring) - &self.scale(&c0inv)).clone();
        let mut sum = Self::one(&self.ring);
        let mut power = Self::one(&self.ring);
        for _ in 0..self.ring.trunc {
            power = &power * &r;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(&c0inv))
    }

    /// Sets `var` to zero and drops it from the variable list.
    pub fn substitute_zero(&self, var: &str) -> Result<Self> {
        let i = self.ring.var_index(var)?;
        let mut vars = self.ring.vars.clone();
        vars.remove(i);
        let ring = Arc::new(SeriesRing {
            field: self.ring.field.clone(),
            vars,
            trunc: self.ring.trunc,
        });
        Ok(Self::from_terms(
            &ring,
            self.coeffs.iter().filter(|(m, _)| m[i] == 0).map(|(m, c)| {
                let mut m = m.clone();
                m.remove(i);
                (m, c.clone())
            }),
        ))
    }

    /// Re-expresses the series over a ring whose variables contain ours (new ones get exponent 0).
    pub fn embed(&self, target: &Arc<SeriesRing>) -> Result<Self> {
        if target.field != self.ring.field {
            return Err(MflabError::MismatchedRing("field differs".into()));
        }
        let idx: Vec<usize> = self
            .ring
            .vars
            .iter()
            .map(|v| target.var_index(v))
            .collect::<Result<_>>()?;
        Ok(Self::from_terms(
            target,
            self.coeffs.iter().map(|(m, c)| {
                let mut t = vec![0; target.nvars()];
                for (j, &e) in m.iter().enumerate() {
                    t[idx[j]] = e;
                }
                (t, c.clone())
            }),
        ))
    }

    /// Same series in a ring with a different truncation.
    pub fn retrunc(&self, trunc: usize) -> Self {
        let ring = self.ring.with_trunc(trunc);
        Self::from_terms(&ring, self.coeffs.iter().map(|(m, c)| (m.clone(), c.clone())))
    }

    /// Keeps only terms of total degree < `deg`.
    pub fn truncate_below(&self, deg: usize) -> Self {
        Self::from_terms(
            &self.ring,
            self.coeffs
                .iter()
                .filter(|(m, _)| degree(m) < deg)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Terms of exactly the given total degree.
    pub fn homogeneous_part(&self, deg: usize) -> Self {
        Self::from_terms(
            &self.ring,
            self.coeffs
                .iter()
                .filter(|(m, _)| degree(m) == deg)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Parses the polynomial grammar over the given ring.
    pub fn parse(text: &str, ring: &Arc<SeriesRing>) -> Result<Self> {
        Parser::new(text, ring).parse()
    }
}

impl std::ops::Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        self.try_add(rhs).expect("ring mismatch in add")
    }
}

impl std::ops::Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        self.try_sub(rhs).expect("ring mismatch in sub")
    }
}

impl std::ops::Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        self.try_mul(rhs).expect("ring mismatch in mul")
    }
}

impl std::ops::Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        TruncSeries::neg(self)
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.coeffs.iter().collect();
        // lowest degree first, then lexicographically larger exponents first
        terms.sort_by(|(a, _), (b, _)| degree(a).cmp(&degree(b)).then(b.cmp(a)));
        let k = &self.ring.field;
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let (neg, mag) = k.signed_repr(c);
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            for (v, &e) in self.ring.vars.iter().zip(m.iter()) {
                match e {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{e}")),
                }
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if mag != "1" {
                    write!(f, "{mag}*")?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: &'a Arc<SeriesRing>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, ring: &'a Arc<SeriesRing>) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            ring,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(MflabError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn small_number(&mut self) -> Result<u32> {
        let at = self.pos;
        let n = self.number()?;
        u32::try_from(n).or_else(|_| {
            self.pos = at;
            self.err("exponent too large")
        })
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }

    fn parse(mut self) -> Result<TruncSeries> {
        let k = self.ring.field.clone();
        let mut out = TruncSeries::zero(self.ring);
        let mut first = true;
        loop {
            let mut negative = false;
            match self.peek() {
                None if first => return self.err("empty polynomial"),
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                }
                Some(b'-') => {
                    negative = true;
                    self.pos += 1;
                }
                Some(_) if first => {}
                Some(c) => return self.err(format!("unexpected `{}`", c as char)),
            }
            first = false;
            let (m, mut c) = self.term(&k)?;
            if negative {
                c = k.neg(&c);
            }
            out.add_term(m, c);
        }
        Ok(out)
    }

    fn term(&mut self, k: &Field) -> Result<(Monomial, FieldElem)> {
        let mut coeff = k.one();
        let mut mono = vec![0u32; self.ring.nvars()];
        let mut expect_factor = true;
        let mut seen_any = false;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    if !expect_factor {
                        return self.err("missing `*` between factors");
                    }
                    let num = self.number()?;
                    let val = if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let at = self.pos;
                        let den = self.number()?;
                        k.from_ratio(&num, &den).map_err(|_| MflabError::Parse {
                            pos: at,
                            msg: "zero denominator".into(),
                        })?
                    } else {
                        k.from_bigint(&num)
                    };
                    coeff = k.mul(&coeff, &val);
                    // a coefficient may be followed directly by a variable
                    if let Some(b'*') = self.peek() {
                        self.pos += 1;
                        expect_factor = true;
                    } else {
                        expect_factor = matches!(self.peek(), Some(c) if c.is_ascii_alphabetic());
                    }
                    seen_any = true;
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    if !expect_factor {
                        return self.err("missing `*` between factors");
                    }
                    let at = self.pos;
                    let name = self.ident()?;
                    let i = self.ring.var_index(&name).map_err(|_| MflabError::Parse {
                        pos: at,
                        msg: format!("unknown variable `{name}`"),
                    })?;
                    let mut e = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        e = self.small_number()?;
                    }
                    mono[i] += e;
                    seen_any = true;
                    expect_factor = false;
                    if let Some(b'*') = self.peek() {
                        self.pos += 1;
                        expect_factor = true;
                    }
                }
                Some(b'+') | Some(b'-') | None if seen_any && !expect_factor => break,
                Some(c) => return self.err(format!("unexpected `{}`", c as char)),
                None => return self.err("unexpected end of input"),
            }
        }
        Ok((mono, coeff))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(field: Field, vars: &[&str], n: usize) -> Arc<SeriesRing> {
        SeriesRing::new(field, vars.iter().map(|s| s.to_string()).collect(), n).unwrap()
    }

    #[test]
    fn add_examples() {
        let r = ring(Field::Q, &["x", "y"], 2);
        let x = TruncSeries::parse("x", &r).unwrap();
        assert!((&x + &x.neg()).is_zero());
        let a = TruncSeries::parse("1 + y", &r).unwrap();
        let b = TruncSeries::parse("y^2", &r).unwrap();
        assert_eq!((&a + &b).to_string(), "1 + y + y^2");
        let r7 = ring(Field::Fp(7), &["x"], 4);
        let s = &TruncSeries::parse("5*x", &r7).unwrap() + &TruncSeries::parse("4*x", &r7).unwrap();
        assert_eq!(s, TruncSeries::parse("2*x", &r7).unwrap());
    }

    #[test]
    fn mul_examples() {
        let r = ring(Field::Q, &["x", "y"], 2);
        let p = &TruncSeries::parse("x", &r).unwrap() * &TruncSeries::parse("x^2", &r).unwrap();
        assert!(p.is_zero());
        let r4 = ring(Field::Q, &["x", "y"], 4);
        let p = &TruncSeries::parse("1+y", &r4).unwrap() * &TruncSeries::parse("1-y", &r4).unwrap();
        assert_eq!(p, TruncSeries::parse("1 - y^2", &r4).unwrap());
    }

    #[test]
    fn mismatched_rings() {
        let a = TruncSeries::one(&ring(Field::Q, &["x"], 3));
        let b = TruncSeries::one(&ring(Field::Q, &["x"], 4));
        assert!(matches!(a.try_add(&b), Err(MflabError::MismatchedRing(_))));
        let c = TruncSeries::one(&ring(Field::Fp(7), &["x"], 3));
        assert!(a.try_mul(&c).is_err());
    }

    #[test]
    fn invert_examples() {
        let r = ring(Field::Q, &["y"], 3);
        let one = TruncSeries::one(&r);
        assert_eq!(one.invert().unwrap(), one);
        let inv = TruncSeries::parse("1 + y", &r).unwrap().invert().unwrap();
        assert_eq!(inv, TruncSeries::parse("1 - y + y^2 - y^3", &r).unwrap());
        let x = TruncSeries::parse("y", &r).unwrap();
        assert_eq!(x.invert(), Err(MflabError::NotAUnit));
    }

    #[test]
    fn order_examples() {
        let r = ring(Field::Q, &["x", "y"], 12);
        assert_eq!(TruncSeries::parse("x^7 - y^3", &r).unwrap().order(), Some(3));
        assert_eq!(TruncSeries::zero(&r).order(), None);
        assert_eq!(TruncSeries::parse("1 + x", &r).unwrap().order(), Some(0));
    }

    #[test]
    fn substitute_zero_examples() {
        let r = ring(Field::Q, &["x", "y", "u"], 6);
        let s = TruncSeries::parse("y^2 + u*x", &r)
            .unwrap()
            .substitute_zero("u")
            .unwrap();
        assert_eq!(s.to_string(), "y^2");
        assert_eq!(s.ring().vars, vec!["x", "y"]);
        assert!(TruncSeries::parse("u^2", &r)
            .unwrap()
            .substitute_zero("u")
            .unwrap()
            .is_zero());
        assert!(matches!(s.substitute_zero("u"), Err(MflabError::UnknownVariable(_))));
    }

    #[test]
    fn parse_examples() {
        let r = ring(Field::Fp(7), &["x", "y"], 12);
        let s = TruncSeries::parse("3*x*y + 2", &r).unwrap();
        assert_eq!(s.to_string(), "2 + 3*x*y");
        let s = TruncSeries::parse("x^7 - y^3", &r).unwrap();
        assert_eq!(s.order(), Some(3));
        match TruncSeries::parse("x + @", &r) {
            Err(MflabError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        let q = ring(Field::Q, &["x"], 4);
        assert_eq!(TruncSeries::parse("3/6 x", &q).unwrap().to_string(), "1/2*x");
        assert!(TruncSeries::parse("x y", &q).is_err());
        assert!(TruncSeries::parse("", &q).is_err());
        assert!(TruncSeries::parse("z", &q).is_err());
    }
}
