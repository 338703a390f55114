//! Text notation for catalog entries.
//!
//! Three sublanguages share one scanner:
//! - polynomials in the summation indices with rational coefficients, where
//!   juxtaposition multiplies (`3/2 i^2 - ij + alpha j`);
//! - q-Pochhammer factors `(a₁,…,a_k; b)_len` with signed monomial arguments;
//! - products such as `2 q^{1/4} (-q^3,-q^5,q^8;q^8)_inf / (J_1 J_{3,28})`,
//!   with `J_m = (q^m;q^m)_∞` and `J_{a,m} = (q^a,q^{m-a},q^m;q^m)_∞`.
//!
//! Parameters are substituted while parsing, so every result is concrete.

use crate::nahm::{LenForm, SignForm, SumFactor, SumSpec};
use crate::qfactors::{PochFactor, ProductSpec, SignedMonomial};
use crate::rat::{fmt_rat, to_i64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Parameter values by name.
pub type Env = BTreeMap<String, Rat>;

type PResult<T> = std::result::Result<T, String>;

/// Polynomial in the index variables with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    fn constant(nvars: usize, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        Poly { nvars, terms }
    }

    fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Poly {
            nvars,
            terms: BTreeMap::from([(e, Rat::one())]),
        }
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            let v = terms.entry(e.clone()).or_insert_with(Rat::zero);
            *v += c;
            if v.is_zero() {
                terms.remove(e);
            }
        }
        Poly {
            nvars: self.nvars,
            terms,
        }
    }

    fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::constant(self.nvars, Rat::zero());
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::constant(self.nvars, Rat::zero());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let mut t = BTreeMap::new();
                t.insert(e, c1 * c2);
                out = out.add(&Poly {
                    nvars: self.nvars,
                    terms: t,
                });
            }
        }
        out
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Coefficient of `Π xₖ^{eₖ}`.
    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.terms.get(exps).cloned().unwrap_or_else(Rat::zero)
    }

    fn unit(&self, k: usize) -> Vec<u32> {
        let mut e = vec![0; self.nvars];
        e[k] = 1;
        e
    }

    /// `(coefficients of the variables, constant)` of an integer linear form.
    fn integer_linear(&self, what: &str) -> PResult<(Vec<i64>, i64)> {
        if self.degree() > 1 {
            return Err(format!("{what} must be linear in the indices"));
        }
        let as_int =
            |r: Rat| to_i64(&r).ok_or_else(|| format!("{what} must have integer coefficients"));
        let coeffs = (0..self.nvars)
            .map(|k| as_int(self.coeff(&self.unit(k))))
            .collect::<PResult<Vec<_>>>()?;
        Ok((coeffs, as_int(self.coeff(&vec![0; self.nvars]))?))
    }
}

/// Length of a Pochhammer symbol.
#[derive(Clone, Debug)]
enum Len {
    Inf,
    Finite(Poly),
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    vars: &'a [String],
    env: &'a Env,
}

impl<'a> Parser<'a> {
    fn new(s: &str, vars: &'a [String], env: &'a Env) -> Self {
        Parser {
            chars: s.chars().collect(),
            pos: 0,
            vars,
            env,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn error(&self, msg: &str) -> String {
        let rest: String = self.chars[self.pos.min(self.chars.len())..]
            .iter()
            .take(12)
            .collect();
        if rest.is_empty() {
            format!("{msg} at end of input")
        } else {
            format!("{msg} at column {} (near {rest:?})", self.pos + 1)
        }
    }

    fn finish(&mut self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("unexpected input")),
        }
    }

    fn word(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphabetic() || self.chars[self.pos] == '\\')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn peek_word(&mut self) -> Option<String> {
        let save = self.pos;
        let w = self.word();
        self.pos = save;
        w
    }

    fn number(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn starts_atom(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '(' || c == '{')
    }

    // ---- polynomial expressions ----

    fn expr(&mut self) -> PResult<Poly> {
        let mut neg = false;
        if self.eat('-') {
            neg = true;
        } else {
            self.eat('+');
        }
        let mut acc = self.term()?;
        if neg {
            acc = acc.scale(&-Rat::one());
        }
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.add(&self.term()?.scale(&-Rat::one()));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<Poly> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.power()?);
            } else if self.eat('/') {
                let d = self.power()?;
                let c = d
                    .as_constant()
                    .ok_or_else(|| self.error("division by a non-constant"))?;
                if c.is_zero() {
                    return Err(self.error("division by zero"));
                }
                acc = acc.scale(&c.recip());
            } else if self.starts_atom() {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> PResult<Poly> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.exponent()?;
        let k = to_i64(&e).ok_or_else(|| self.error("exponent must be an integer"))?;
        match base.as_constant() {
            Some(c) => {
                if c.is_zero() && k < 0 {
                    return Err(self.error("zero to a negative power"));
                }
                Ok(Poly::constant(self.nvars(), rat_pow(&c, k)))
            }
            None => {
                if k < 0 {
                    return Err(self.error("negative power of an index"));
                }
                let mut acc = Poly::constant(self.nvars(), Rat::one());
                for _ in 0..k {
                    acc = acc.mul(&base);
                }
                Ok(acc)
            }
        }
    }

    /// Constant exponent after `^`: a number, a parameter or a group.
    fn exponent(&mut self) -> PResult<Rat> {
        if self.eat('-') {
            return Ok(-self.exponent()?);
        }
        let p = match self.peek() {
            Some('{') | Some('(') => self.atom()?,
            Some(c) if c.is_ascii_digit() => {
                let n = self
                    .number()
                    .ok_or_else(|| self.error("expected a number"))?;
                Poly::constant(self.nvars(), Rat::from_integer(n))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let w = self.word().unwrap();
                self.resolve(&w)?
            }
            _ => return Err(self.error("expected an exponent")),
        };
        p.as_constant()
            .ok_or_else(|| self.error("exponent must not depend on the indices"))
    }

    fn atom(&mut self) -> PResult<Poly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('{') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect('}')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self
                    .number()
                    .ok_or_else(|| self.error("expected a number"))?;
                Ok(Poly::constant(self.nvars(), Rat::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let w = self.word().unwrap();
                self.resolve(&w)
            }
            _ => Err(self.error("expected a term")),
        }
    }

    /// A parameter, an index, or a run of single-letter indices (`ij`).
    fn resolve(&self, w: &str) -> PResult<Poly> {
        if let Some(v) = self.env.get(w) {
            return Ok(Poly::constant(self.nvars(), v.clone()));
        }
        if let Some(k) = self.vars.iter().position(|v| v == w) {
            return Ok(Poly::var(self.nvars(), k));
        }
        let mut acc = Poly::constant(self.nvars(), Rat::one());
        for ch in w.chars() {
            let k = self
                .vars
                .iter()
                .position(|v| v.len() == 1 && v.starts_with(ch))
                .ok_or_else(|| format!("unknown identifier {w:?}"))?;
            acc = acc.mul(&Poly::var(self.nvars(), k));
        }
        Ok(acc)
    }

    fn constant_expr(&mut self) -> PResult<Rat> {
        let p = self.expr()?;
        p.as_constant()
            .ok_or_else(|| self.error("expected a constant"))
    }

    // ---- monomials and Pochhammer symbols ----

    fn unit_sign(&self, r: &Rat) -> PResult<i8> {
        if r.is_one() {
            Ok(1)
        } else if *r == -Rat::one() {
            Ok(-1)
        } else {
            Err(self.error(&format!(
                "sign coefficient must be 1 or -1, got {}",
                fmt_rat(r)
            )))
        }
    }

    /// `[-]* [{c}|param] q[^e]` or `[-]1`.
    fn monomial(&mut self) -> PResult<SignedMonomial> {
        let mut sign = 1i8;
        while self.eat('-') {
            sign = -sign;
        }
        if self.peek() == Some('{') {
            self.pos += 1;
            let c = self.constant_expr()?;
            self.expect('}')?;
            sign *= self.unit_sign(&c)?;
            self.eat('*');
        } else if let Some(w) = self.peek_word() {
            if w != "q" {
                let v = self
                    .env
                    .get(&w)
                    .ok_or_else(|| self.error(&format!("unknown sign parameter {w:?}")))?
                    .clone();
                self.word();
                sign *= self.unit_sign(&v)?;
                self.eat('*');
            }
        }
        if self.peek_word().as_deref() == Some("q") {
            self.word();
            let exp = if self.eat('^') {
                self.exponent()?
            } else {
                Rat::one()
            };
            return Ok(SignedMonomial::new(sign, exp));
        }
        match self.number() {
            Some(n) if n.is_one() => Ok(SignedMonomial::new(sign, Rat::zero())),
            _ => Err(self.error("expected a monomial in q")),
        }
    }

    fn length(&mut self) -> PResult<Len> {
        self.expect('_')?;
        let is_inf = |w: &str| matches!(w, "inf" | "\\infty" | "infty");
        if self.eat('{') {
            if let Some(w) = self.peek_word() {
                if is_inf(&w) {
                    self.word();
                    self.expect('}')?;
                    return Ok(Len::Inf);
                }
            }
            let e = self.expr()?;
            self.expect('}')?;
            return Ok(Len::Finite(e));
        }
        if self.eat('∞') {
            return Ok(Len::Inf);
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.number().unwrap();
                Ok(Len::Finite(Poly::constant(
                    self.nvars(),
                    Rat::from_integer(n),
                )))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '\\' => {
                let w = self.word().unwrap();
                if is_inf(&w) {
                    Ok(Len::Inf)
                } else {
                    Ok(Len::Finite(self.resolve(&w)?))
                }
            }
            _ => Err(self.error("expected a length")),
        }
    }

    /// `(a₁,…,a_k; b)_len` starting at `(`.
    fn poch(&mut self) -> PResult<(Vec<SignedMonomial>, SignedMonomial, Len)> {
        self.expect('(')?;
        let mut args = vec![self.monomial()?];
        while self.eat(',') {
            args.push(self.monomial()?);
        }
        self.expect(';')?;
        let base = self.monomial()?;
        self.expect(')')?;
        let len = self.length()?;
        Ok((args, base, len))
    }

    // ---- products ----

    fn product(&mut self) -> PResult<ProductSpec> {
        let mut acc = if self.eat('-') {
            constant_product(-Rat::one())
        } else {
            ProductSpec::one()
        };
        acc = acc.times(&self.pfactor()?);
        loop {
            if self.eat('*') {
                acc = acc.times(&self.pfactor()?);
            } else if self.eat('/') {
                acc = acc.times(&self.pfactor()?.inverse());
            } else if self.starts_atom() {
                acc = acc.times(&self.pfactor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn pfactor(&mut self) -> PResult<ProductSpec> {
        let (base, is_monomial) = self.patom()?;
        if is_monomial || !self.eat('^') {
            return Ok(base);
        }
        let e = self.exponent()?;
        let k = to_i64(&e).ok_or_else(|| self.error("power must be an integer"))?;
        if k < 0 && base.constant.is_zero() {
            return Err(self.error("zero to a negative power"));
        }
        Ok(base.pow(k))
    }

    /// One product atom; the flag marks `q^e`, whose `^` is already consumed.
    fn patom(&mut self) -> PResult<(ProductSpec, bool)> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.number().unwrap();
                Ok((constant_product(Rat::from_integer(n)), false))
            }
            Some('{') => {
                self.pos += 1;
                let c = self.constant_expr()?;
                self.expect('}')?;
                Ok((constant_product(c), false))
            }
            Some('(') => {
                let save = self.pos;
                match self.poch() {
                    Ok((args, base, len)) => Ok((self.poch_product(&args, &base, len)?, false)),
                    Err(poch_err) => {
                        self.pos = save + 1;
                        self.skip_ws();
                        let inner = self
                            .product()
                            .map_err(|e| format!("{poch_err}; as a group: {e}"))?;
                        self.expect(')')?;
                        Ok((inner, false))
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let w = self.word().unwrap();
                match w.as_str() {
                    "q" => {
                        let e = if self.eat('^') {
                            self.exponent()?
                        } else {
                            Rat::one()
                        };
                        Ok((ProductSpec::new(Rat::one(), e, vec![]).unwrap(), true))
                    }
                    "J" => Ok((self.j_symbol()?, false)),
                    _ => Err(self.error(&format!("unexpected {w:?} in a product"))),
                }
            }
            _ => Err(self.error("expected a product factor")),
        }
    }

    fn j_symbol(&mut self) -> PResult<ProductSpec> {
        self.expect('_')?;
        let (a, m) = if self.eat('{') {
            let first = self.constant_expr()?;
            let out = if self.eat(',') {
                (Some(first), self.constant_expr()?)
            } else {
                (None, first)
            };
            self.expect('}')?;
            out
        } else {
            let n = self.number().ok_or_else(|| self.error("expected J_m"))?;
            (None, Rat::from_integer(n))
        };
        if !m.is_positive() {
            return Err(self.error("J_m needs m > 0"));
        }
        Ok(match a {
            None => ProductSpec::j(m),
            Some(a) => ProductSpec::jam(a, m),
        })
    }

    fn poch_product(
        &self,
        args: &[SignedMonomial],
        base: &SignedMonomial,
        len: Len,
    ) -> PResult<ProductSpec> {
        if !base.exp.is_positive() {
            return Err(self.error(&format!("base {base} must have a positive exponent")));
        }
        let mut fs = Vec::new();
        for a in args {
            fs.push(PochFactor::new(a.clone(), base.clone(), 1));
            if let Len::Finite(p) = &len {
                let k = p
                    .as_constant()
                    .and_then(|c| to_i64(&c))
                    .filter(|k| *k >= 0)
                    .ok_or_else(|| {
                        self.error("finite product length must be a nonnegative integer")
                    })?;
                fs.push(PochFactor::new(a.times(&base.pow(k)), base.clone(), -1));
            }
        }
        ProductSpec::new(Rat::one(), Rat::zero(), fs).map_err(|e| e.to_string())
    }
}

fn rat_pow(c: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num_traits::pow(c.clone(), k as usize)
    } else {
        num_traits::pow(c.recip(), k.unsigned_abs() as usize)
    }
}

fn constant_product(c: Rat) -> ProductSpec {
    ProductSpec::new(c, Rat::zero(), vec![]).unwrap()
}

fn no_vars() -> &'static [String] {
    &[]
}

/// Parses a rational constant expression such as `(6*alpha-1)/24`.
pub fn parse_constant(s: &str, env: &Env) -> PResult<Rat> {
    let mut p = Parser::new(s, no_vars(), env);
    let r = p.constant_expr()?;
    p.finish()?;
    Ok(r)
}

/// Parses a polynomial in `vars`.
pub fn parse_poly(s: &str, vars: &[String], env: &Env) -> PResult<Poly> {
    let mut p = Parser::new(s, vars, env);
    let r = p.expr()?;
    p.finish()?;
    Ok(r)
}

/// Parses a product of q-Pochhammer symbols, powers of q and constants.
pub fn parse_product(s: &str, env: &Env) -> PResult<ProductSpec> {
    let mut p = Parser::new(s, no_vars(), env);
    let r = p.product()?;
    p.finish()?;
    Ok(r)
}

/// Parses `(a₁,…,a_k; b)_len` into one sum factor per argument.
pub fn parse_sum_factors(s: &str, vars: &[String], env: &Env) -> PResult<Vec<SumFactor>> {
    let mut p = Parser::new(s, vars, env);
    let (args, base, len) = p.poch()?;
    p.finish()?;
    let Len::Finite(len) = len else {
        return Err("a summand factor needs a finite length".into());
    };
    let (coeffs, constant) = len.integer_linear("factor length")?;
    Ok(args
        .into_iter()
        .map(|a| SumFactor::new(a, base.clone(), LenForm::new(coeffs.clone(), constant)))
        .collect())
}

/// Text form of a sum: index names, exponent, sign exponent and factors.
pub struct SumText<'a> {
    pub vars: &'a str,
    pub exp: &'a str,
    pub sign: Option<&'a str>,
    pub num: &'a [String],
    pub den: &'a [String],
    pub congruence: Option<&'a [(i64, i64)]>,
}

/// Builds a [`SumSpec`]; errors carry the offending field name.
pub fn parse_sum(t: &SumText<'_>, env: &Env) -> std::result::Result<SumSpec, (String, String)> {
    let vars: Vec<String> = t
        .vars
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    let r = vars.len();
    if !(r == 1 || r == 2) {
        return Err((
            "vars".into(),
            format!("expected one or two indices, got {r}"),
        ));
    }
    let exp = parse_poly(t.exp, &vars, env).map_err(|e| ("exp".to_string(), e))?;
    if exp.degree() > 2 {
        return Err(("exp".into(), "exponent must be at most quadratic".into()));
    }
    let c0 = exp.coeff(&vec![0; r]);
    let mut spec = if r == 1 {
        SumSpec::rank1(exp.coeff(&[2]), exp.coeff(&[1]), c0)
    } else {
        SumSpec::rank2(
            exp.coeff(&[2, 0]),
            exp.coeff(&[1, 1]),
            exp.coeff(&[0, 2]),
            exp.coeff(&[1, 0]),
            exp.coeff(&[0, 1]),
            c0,
        )
    };
    if let Some(s) = t.sign {
        let p = parse_poly(s, &vars, env).map_err(|e| ("sign".to_string(), e))?;
        let (coeffs, constant) = p
            .integer_linear("sign exponent")
            .map_err(|e| ("sign".to_string(), e))?;
        spec = spec.with_sign(SignForm::new(coeffs, constant));
    }
    for (k, f) in t.num.iter().enumerate() {
        for sf in parse_sum_factors(f, &vars, env).map_err(|e| (format!("num[{k}]"), e))? {
            spec = spec.with_num(sf);
        }
    }
    for (k, f) in t.den.iter().enumerate() {
        for sf in parse_sum_factors(f, &vars, env).map_err(|e| (format!("den[{k}]"), e))? {
            spec = spec.with_den(sf);
        }
    }
    if let Some(c) = t.congruence {
        spec = spec.with_congruence(c.to_vec());
    }
    spec.validate()
        .map_err(|e| ("sum".to_string(), e.to_string()))?;
    Ok(spec)
}
