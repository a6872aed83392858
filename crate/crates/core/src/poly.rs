//! Exact Laurent polynomials over Q: parsing, canonical printing, supports,
//! Newton polytopes, initial forms, monomial substitution, and toric-ideal
//! (lattice-kernel) binomial generators.

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::lattice::{integer_kernel, Int, IntegerMatrix, LatticeVector, Rat};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Sparse Laurent polynomial: exponent vector -> nonzero rational coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPolynomial {
    vars: Vec<String>,
    terms: BTreeMap<LatticeVector, Rat>,
}

impl LaurentPolynomial {
    pub fn zero(vars: Vec<String>) -> Self {
        LaurentPolynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vec<String>, c: Rat) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            let dim = p.vars.len();
            p.terms.insert(LatticeVector::zeros(dim), c);
        }
        p
    }

    pub fn from_terms(vars: Vec<String>, terms: BTreeMap<LatticeVector, Rat>) -> Self {
        let filtered = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LaurentPolynomial { vars, terms: filtered }
    }

    pub fn monomial(vars: Vec<String>, exps: LatticeVector, coeff: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        LaurentPolynomial { vars, terms }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<LatticeVector, Rat> {
        &self.terms
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&LatticeVector::zeros(self.vars.len()))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn support(&self) -> Vec<LatticeVector> {
        self.terms.keys().cloned().collect()
    }

    pub fn add(&self, other: &LaurentPolynomial) -> LaurentPolynomial {
        let (vars, a, b) = align(self, other);
        let mut terms = a;
        for (e, c) in b {
            let entry = terms.entry(e).or_insert_with(Rat::zero);
            *entry += c;
        }
        LaurentPolynomial::from_terms(vars, terms)
    }

    pub fn neg(&self) -> LaurentPolynomial {
        LaurentPolynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentPolynomial) -> LaurentPolynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Rat) -> LaurentPolynomial {
        if s.is_zero() {
            return Self::zero(self.vars.clone());
        }
        LaurentPolynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    /// Multiply by the monomial c * x^shift (shift may be negative).
    pub fn mul_monomial(&self, shift: &LatticeVector, coeff: &Rat) -> LaurentPolynomial {
        if coeff.is_zero() {
            return Self::zero(self.vars.clone());
        }
        LaurentPolynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.add(shift), c * coeff))
                .collect(),
        }
    }

    pub fn multiply(&self, other: &LaurentPolynomial) -> LaurentPolynomial {
        let (vars, a, b) = align(self, other);
        let mut terms: BTreeMap<LatticeVector, Rat> = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                let e = ea.add(eb);
                let entry = terms.entry(e).or_insert_with(Rat::zero);
                *entry += ca * cb;
            }
        }
        LaurentPolynomial::from_terms(vars, terms)
    }

    pub fn pow(&self, k: u32) -> LaurentPolynomial {
        let mut acc = LaurentPolynomial::constant(self.vars.clone(), Rat::one());
        for _ in 0..k {
            acc = acc.multiply(self);
        }
        acc
    }

    /// Exact evaluation at a rational point (zero coordinates only allowed
    /// under nonnegative exponents).
    pub fn evaluate(&self, point: &[Rat]) -> Result<Rat> {
        if point.len() != self.vars.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        let mut total = Rat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, k) in point.iter().zip(&e.0) {
                term *= rat_pow(x, k)?;
            }
            total += term;
        }
        Ok(total)
    }

    pub fn evaluate_f64(&self, point: &[f64]) -> f64 {
        let mut total = 0.0;
        for (e, c) in &self.terms {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            for (x, k) in point.iter().zip(&e.0) {
                term *= x.powi(k.to_i32().expect("desk-scale exponent"));
            }
            total += term;
        }
        total
    }

    /// Substitute each old variable j by the monomial with exponent column j
    /// of `map` over `new_vars`: a term exponent a becomes map * a.
    pub fn substitute_monomial(
        &self,
        map: &IntegerMatrix,
        new_vars: &[String],
    ) -> Result<LaurentPolynomial> {
        if map.cols != self.vars.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vars.len(),
                got: map.cols,
            });
        }
        if map.rows != new_vars.len() {
            return Err(Error::DimensionMismatch {
                expected: map.rows,
                got: new_vars.len(),
            });
        }
        let mut terms: BTreeMap<LatticeVector, Rat> = BTreeMap::new();
        for (e, c) in &self.terms {
            let img = map.mul_vec(e);
            let entry = terms.entry(img).or_insert_with(Rat::zero);
            *entry += c.clone();
        }
        Ok(LaurentPolynomial::from_terms(new_vars.to_vec(), terms))
    }

    /// Substitute var -> var + offset. Requires nonnegative exponents in var.
    pub fn translate(&self, var: &str, offset: &Rat) -> Result<LaurentPolynomial> {
        let Some(idx) = self.vars.iter().position(|v| v == var) else {
            return Err(Error::UnknownVariable(var.to_string()));
        };
        let mut out = LaurentPolynomial::zero(self.vars.clone());
        for (e, c) in &self.terms {
            let k = &e.0[idx];
            if k.is_negative() {
                return Err(Error::LaurentTranslation { var: var.to_string() });
            }
            let k = k.to_u32().expect("desk-scale exponent");
            // (var + offset)^k expanded binomially onto the other factors.
            let mut base = e.clone();
            base.0[idx] = Int::zero();
            let mut binom = Int::one();
            for j in 0..=k {
                // coefficient C(k,j) * offset^(k-j), exponent j in var
                let mut t = base.clone();
                t.0[idx] = Int::from(j);
                let coeff = c * Rat::from(binom.clone()) * rat_pow(offset, &Int::from(k - j))?;
                let m = LaurentPolynomial::monomial(self.vars.clone(), t, coeff);
                out = out.add(&m);
                if j < k {
                    binom = binom * Int::from(k - j) / Int::from(j + 1);
                }
            }
        }
        Ok(out)
    }

    /// Terms attaining the maximal pairing against the weight vector.
    pub fn initial_form(&self, w: &[Rat]) -> Result<LaurentPolynomial> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if w.len() != self.vars.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vars.len(),
                got: w.len(),
            });
        }
        let weight = |e: &LatticeVector| -> Rat {
            e.0.iter().zip(w).map(|(a, b)| Rat::from(a.clone()) * b).sum()
        };
        let max = self.terms.keys().map(&weight).max().unwrap();
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| weight(e) == max)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Ok(LaurentPolynomial { vars: self.vars.clone(), terms })
    }

    /// Rename variables without touching exponents.
    pub fn rename(&self, new_vars: Vec<String>) -> Result<LaurentPolynomial> {
        if new_vars.len() != self.vars.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vars.len(),
                got: new_vars.len(),
            });
        }
        Ok(LaurentPolynomial { vars: new_vars, terms: self.terms.clone() })
    }
}

pub(crate) fn rat_pow(base: &Rat, exp: &Int) -> Result<Rat> {
    if base.is_zero() {
        return if exp.is_negative() {
            Err(Error::OutOfRange("zero base with negative exponent".into()))
        } else if exp.is_zero() {
            Ok(Rat::one())
        } else {
            Ok(Rat::zero())
        };
    }
    let mut acc = Rat::one();
    let k = exp.abs().to_u64().expect("desk-scale exponent");
    for _ in 0..k {
        acc *= base;
    }
    if exp.is_negative() {
        acc = acc.recip();
    }
    Ok(acc)
}

/// Align two polynomials over the union of their variable sets (by name,
/// missing variables get exponent zero).
fn align(
    a: &LaurentPolynomial,
    b: &LaurentPolynomial,
) -> (
    Vec<String>,
    BTreeMap<LatticeVector, Rat>,
    BTreeMap<LatticeVector, Rat>,
) {
    if a.vars == b.vars {
        return (a.vars.clone(), a.terms.clone(), b.terms.clone());
    }
    let mut vars = a.vars.clone();
    for v in &b.vars {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    let remap = |p: &LaurentPolynomial| -> BTreeMap<LatticeVector, Rat> {
        let idx: Vec<usize> = p
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).unwrap())
            .collect();
        p.terms
            .iter()
            .map(|(e, c)| {
                let mut ee = LatticeVector::zeros(vars.len());
                for (j, k) in e.0.iter().enumerate() {
                    ee.0[idx[j]] = k.clone();
                }
                (ee, c.clone())
            })
            .collect()
    };
    (vars.clone(), remap(a), remap(b))
}

impl fmt::Display for LaurentPolynomial {
    /// Canonical form: terms in ascending lexicographic exponent order,
    /// coefficients as p/q, explicit '*', '^' only for exponents != 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || e.is_zero() {
                parts.push(format!("{mag}"));
            }
            for (v, k) in self.vars.iter().zip(&e.0) {
                if k.is_zero() {
                    continue;
                }
                if k.is_one() {
                    parts.push(v.clone());
                } else {
                    parts.push(format!("{v}^{k}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} over {:?}", self.vars)
    }
}

// ---- parser ----------------------------------------------------------------

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

type RawTerm = (Rat, Vec<(String, Int)>);

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { bytes: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, message: &str) -> Result<T> {
        Err(Error::Parse { position: self.pos, message: message.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<Int> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected integer");
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        Ok(s.parse::<Int>().unwrap())
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_alphabetic() {
            return self.err("expected identifier");
        }
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string())
    }

    fn factor(&mut self) -> Result<(String, Int)> {
        let name = self.ident()?;
        let exp = if self.eat(b'^') {
            let neg = self.eat(b'-');
            let d = self.digits()?;
            if neg {
                -d
            } else {
                d
            }
        } else {
            Int::one()
        };
        Ok((name, exp))
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut coeff = Rat::one();
        let mut factors = Vec::new();
        match self.peek() {
            Some(b) if b.is_ascii_digit() => {
                let num = self.digits()?;
                let den = if self.eat(b'/') {
                    let d = self.digits()?;
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    d
                } else {
                    Int::one()
                };
                coeff = Rat::new(num, den);
                if self.eat(b'*') {
                    factors.push(self.factor()?);
                    while self.eat(b'*') {
                        factors.push(self.factor()?);
                    }
                }
            }
            Some(b) if b.is_ascii_alphabetic() => {
                factors.push(self.factor()?);
                while self.eat(b'*') {
                    factors.push(self.factor()?);
                }
            }
            _ => return self.err("expected term"),
        }
        Ok((coeff, factors))
    }

    fn poly(&mut self) -> Result<Vec<RawTerm>> {
        let mut out = Vec::new();
        let lead_neg = self.eat(b'-');
        let (c, fs) = self.term()?;
        out.push((if lead_neg { -c } else { c }, fs));
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    out.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let (c, fs) = self.term()?;
                    out.push((-c, fs));
                }
                None => return Ok(out),
                Some(_) => return self.err("unexpected character"),
            }
        }
    }
}

/// Parse polynomial text. With `variable_order` given, unknown identifiers
/// are rejected; otherwise variables are ordered by first appearance.
pub fn parse(text: &str, variable_order: Option<&[String]>) -> Result<LaurentPolynomial> {
    let mut p = Parser::new(text);
    let raw = p.poly()?;
    let mut vars: Vec<String> = variable_order.map(|v| v.to_vec()).unwrap_or_default();
    if variable_order.is_none() {
        for (_, fs) in &raw {
            for (name, _) in fs {
                if !vars.contains(name) {
                    vars.push(name.clone());
                }
            }
        }
    }
    let mut terms: BTreeMap<LatticeVector, Rat> = BTreeMap::new();
    for (c, fs) in raw {
        let mut e = LatticeVector::zeros(vars.len());
        for (name, k) in fs {
            let Some(idx) = vars.iter().position(|v| *v == name) else {
                return Err(Error::UnknownVariable(name));
            };
            e.0[idx] += k;
        }
        let entry = terms.entry(e).or_insert_with(Rat::zero);
        *entry += c;
    }
    Ok(LaurentPolynomial::from_terms(vars, terms))
}

// ---- Newton polytope --------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolytope {
    /// Extreme points of the convex hull of the support, ascending lex.
    pub vertices: Vec<LatticeVector>,
    /// Cone generated by the (nonzero, primitivized) support vectors.
    pub support_cone: Cone,
}

/// Extreme points of a finite lattice point set, decided exactly through the
/// homogenization cone membership (a in conv(S) iff (a,1) in Con{(s,1)}).
pub fn convex_hull_vertices(points: &[LatticeVector]) -> Vec<LatticeVector> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 1 {
        return pts;
    }
    let n = pts[0].dim();
    let homog = |v: &LatticeVector| -> LatticeVector {
        let mut e = v.0.clone();
        e.push(Int::one());
        LatticeVector(e)
    };
    pts.iter()
        .filter(|p| {
            let others: Vec<LatticeVector> =
                pts.iter().filter(|q| q != p).map(homog).collect();
            let hull = Cone::new(n + 1, others).unwrap();
            !hull.contains(&homog(p))
        })
        .cloned()
        .collect()
}

pub fn newton_polytope(f: &LaurentPolynomial) -> Result<NewtonPolytope> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let support = f.support();
    let vertices = convex_hull_vertices(&support);
    let gens: Vec<LatticeVector> = support.iter().filter(|s| !s.is_zero()).cloned().collect();
    let support_cone = Cone::new(f.num_vars(), gens)?;
    Ok(NewtonPolytope { vertices, support_cone })
}

// ---- toric ideal ------------------------------------------------------------

/// Lattice-basis generators (not saturated) of the toric ideal of an
/// exponent matrix: a binomial t^{l+} - t^{l-} per kernel basis vector.
pub fn toric_ideal_basis(exponent_matrix: &IntegerMatrix) -> Vec<LaurentPolynomial> {
    let n = exponent_matrix.cols;
    let vars: Vec<String> = (1..=n).map(|i| format!("t{i}")).collect();
    integer_kernel(exponent_matrix)
        .into_iter()
        .map(|l| {
            let mut plus = LatticeVector::zeros(n);
            let mut minus = LatticeVector::zeros(n);
            for (i, e) in l.0.iter().enumerate() {
                if e.is_positive() {
                    plus.0[i] = e.clone();
                } else {
                    minus.0[i] = -e.clone();
                }
            }
            let a = LaurentPolynomial::monomial(vars.clone(), plus, Rat::one());
            let b = LaurentPolynomial::monomial(vars.clone(), minus, Rat::one());
            a.sub(&b)
        })
        .collect()
}
