//! Sparse multivariate polynomials and their canonical text format.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::field::Field;
use super::monomial::{Monomial, MonomialOrder};
use super::rational::Rational;

/// Ordered list of distinct variable names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("syntax error in polynomial at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable set mismatch: {0} vs {1} variables")]
    Mismatch(usize, usize),
}

impl VarSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, PolyError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(PolyError::DuplicateVariable(n.clone()));
            }
        }
        Ok(VarSet { names, index })
    }

    /// `prefix1 … prefixn`.
    pub fn numbered(prefix: &str, n: usize) -> Self {
        Self::new((1..=n).map(|i| format!("{prefix}{i}"))).expect("numbered names are distinct")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// A polynomial over a field `F`, stored as a map from monomials to nonzero
/// coefficients. The variable names live in a separate [`VarSet`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial<F> {
    nvars: usize,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Field> Polynomial<F> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: F) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, F::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), F::one())
    }

    pub fn term(m: Monomial, c: F) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { nvars, terms }
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(m, F::one())
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, F)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> F {
        self.terms.get(m).cloned().unwrap_or_else(F::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: F) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add_r(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Terms sorted by `order`, largest first.
    pub fn sorted_terms(&self, order: &MonomialOrder) -> Vec<(Monomial, F)> {
        let mut v: Vec<(Monomial, F)> =
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| order.compare(&b.0, &a.0));
        v
    }

    pub fn leading_term(&self, order: &MonomialOrder) -> Option<(Monomial, F)> {
        self.terms
            .iter()
            .max_by(|a, b| order.compare(a.0, b.0))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.mul_r(c))).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    /// Divides by the leading coefficient under `order`.
    pub fn monic(&self, order: &MonomialOrder) -> Self {
        match self.leading_term(order) {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv()),
        }
    }

    /// Multiplies by ±1 so that the leading coefficient under `order` is positive.
    pub fn sign_normalized(&self, order: &MonomialOrder) -> Self {
        match self.leading_term(order) {
            Some((_, c)) if c.is_negative() => -self.clone(),
            _ => self.clone(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes every variable `i` by the polynomial `images[i]`, which all
    /// live in a common ring.
    pub fn substitute(&self, images: &[Polynomial<F>]) -> Polynomial<F> {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut powers: HashMap<(usize, u16), Polynomial<F>> = HashMap::new();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers.entry((i, e)).or_insert_with(|| images[i].pow(e as u32)).clone();
                t = &t * &p;
            }
            out = out + t;
        }
        out
    }

    /// Moves the polynomial into a ring with `nvars` variables, sending
    /// variable `i` to `map[i]`.
    pub fn remap(&self, map: &[usize], nvars: usize) -> Self {
        Polynomial::from_terms(nvars, self.terms.iter().map(|(m, c)| (m.remap(map, nvars), c.clone())))
    }

    /// Variables that occur in some term.
    pub fn support(&self) -> Vec<bool> {
        let mut s = vec![false; self.nvars];
        for m in self.terms.keys() {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    s[i] = true;
                }
            }
        }
        s
    }

    pub fn map_coefficients<G: Field>(&self, f: impl Fn(&F) -> G) -> Polynomial<G> {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

impl<F: Field> Add for Polynomial<F> {
    type Output = Polynomial<F>;
    fn add(mut self, rhs: Polynomial<F>) -> Polynomial<F> {
        assert_eq!(self.nvars, rhs.nvars, "variable set mismatch");
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<F: Field> Sub for Polynomial<F> {
    type Output = Polynomial<F>;
    fn sub(mut self, rhs: Polynomial<F>) -> Polynomial<F> {
        assert_eq!(self.nvars, rhs.nvars, "variable set mismatch");
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl<F: Field> Neg for Polynomial<F> {
    type Output = Polynomial<F>;
    fn neg(self) -> Polynomial<F> {
        Polynomial { nvars: self.nvars, terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<'a, F: Field> Mul<&'a Polynomial<F>> for &'a Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: &'a Polynomial<F>) -> Polynomial<F> {
        assert_eq!(self.nvars, rhs.nvars, "variable set mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.mul(b), x.mul_r(y));
            }
        }
        out
    }
}

impl<F: Field> Mul for Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: Polynomial<F>) -> Polynomial<F> {
        &self * &rhs
    }
}

fn write_monomial(out: &mut String, m: &Monomial, vars: &VarSet) {
    let mut first = true;
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            out.push('*');
        }
        first = false;
        out.push_str(vars.name(i));
        if e > 1 {
            out.push('^');
            out.push_str(&e.to_string());
        }
    }
}

/// Renders a monomial such as `p1*p3^2`; the unit monomial renders as `1`.
pub fn format_monomial(m: &Monomial, vars: &VarSet) -> String {
    if m.is_one() {
        return "1".into();
    }
    let mut s = String::new();
    write_monomial(&mut s, m, vars);
    s
}

/// Canonical text: terms in decreasing DegRevLex order, e.g. `p1*p2 - p2^2`.
pub fn format_polynomial<F: Field>(p: &Polynomial<F>, vars: &VarSet) -> String {
    assert_eq!(p.nvars(), vars.len(), "variable set mismatch");
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.sorted_terms(&MonomialOrder::DegRevLex).iter().enumerate() {
        let neg = c.is_negative();
        let abs = if neg { -c.clone() } else { c.clone() };
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if m.is_one() {
            out.push_str(&abs.to_string());
        } else {
            if !abs.is_one() {
                out.push_str(&abs.to_string());
                out.push('*');
            }
            write_monomial(&mut out, m, vars);
        }
    }
    out
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Syntax { pos: self.pos, msg: msg.into() }
    }
    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && f(self.src[self.pos]) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }
}

fn is_ident(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'@'
}

/// Parses the canonical text format (and any reordering of it). Accepts
/// integer or `a/b` coefficients, `*`-separated factors and `^` powers.
pub fn parse_polynomial(text: &str, vars: &VarSet) -> Result<Polynomial<Rational>, PolyError> {
    let n = vars.len();
    let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
    let mut out = Polynomial::zero(n);
    let mut first = true;
    loop {
        let sign = match lx.peek() {
            None if first => return Err(lx.err("empty polynomial")),
            None => break,
            Some(b'+') => {
                lx.pos += 1;
                Rational::from_integer(1)
            }
            Some(b'-') => {
                lx.pos += 1;
                Rational::from_integer(-1)
            }
            Some(_) if first => Rational::from_integer(1),
            Some(_) => return Err(lx.err("expected `+` or `-`")),
        };
        first = false;
        let mut coeff = sign;
        let mut mono = Monomial::one(n);
        let mut factors = 0;
        loop {
            match lx.peek() {
                Some(b) if b.is_ascii_digit() => {
                    let num = lx.take_while(|b| b.is_ascii_digit());
                    let mut lit = num.to_string();
                    if lx.peek() == Some(b'/') {
                        lx.pos += 1;
                        lx.skip_ws();
                        let den = lx.take_while(|b| b.is_ascii_digit());
                        if den.is_empty() {
                            return Err(lx.err("expected denominator"));
                        }
                        lit = format!("{num}/{den}");
                    }
                    let c: Rational = lit.parse().map_err(|_| lx.err("bad coefficient"))?;
                    coeff = coeff * c;
                }
                Some(b) if is_ident(b) => {
                    let name = lx.take_while(is_ident);
                    let i = vars.index_of(name).ok_or_else(|| PolyError::UnknownVariable(name.into()))?;
                    let mut e: u16 = 1;
                    if lx.peek() == Some(b'^') {
                        lx.pos += 1;
                        lx.skip_ws();
                        let digits = lx.take_while(|b| b.is_ascii_digit());
                        e = digits.parse().map_err(|_| lx.err("bad exponent"))?;
                    }
                    mono.set(i, mono.get(i) + e);
                }
                _ => return Err(lx.err("expected coefficient or variable")),
            }
            factors += 1;
            if lx.peek() == Some(b'*') {
                lx.pos += 1;
                continue;
            }
            break;
        }
        debug_assert!(factors > 0);
        out.add_term(mono, coeff);
    }
    Ok(out)
}

/// Display adapter pairing a polynomial with its variable names.
pub struct PolyDisplay<'a, F: Field>(pub &'a Polynomial<F>, pub &'a VarSet);

impl<F: Field> fmt::Display for PolyDisplay<'_, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_polynomial(self.0, self.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let vars = VarSet::numbered("p", 3);
        let p = parse_polynomial("p1*p3 - p1*p2 + p2^2", &vars).unwrap();
        assert_eq!(format_polynomial(&p, &vars), "-p1*p2 + p2^2 + p1*p3");
        let q = parse_polynomial(&format_polynomial(&p, &vars), &vars).unwrap();
        assert_eq!(p, q);
        let r = parse_polynomial("-3/4*p1 + 2 - p2*p2", &vars).unwrap();
        assert_eq!(format_polynomial(&r, &vars), "-p2^2 - 3/4*p1 + 2");
    }

    #[test]
    fn parse_errors_are_located() {
        let vars = VarSet::numbered("p", 2);
        assert!(matches!(parse_polynomial("p1 +", &vars), Err(PolyError::Syntax { .. })));
        assert!(matches!(parse_polynomial("q1", &vars), Err(PolyError::UnknownVariable(_))));
        assert!(parse_polynomial("", &vars).is_err());
    }
}
