//! Integer-coefficient multivariate polynomials `D(x1, ..., xK)`.
//!
//! Grammar accepted by [`DiophantinePolynomial::parse`]:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' INT)?
//! atom   := INT | 'x' INDEX | '(' expr ')'
//! ```
//!
//! Variables are `x1`, `x2`, ...; whitespace is ignored.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 256;

/// Largest integer magnitude that converts to `f64` without rounding.
const EXACT_FLOAT_LIMIT: u64 = 1 << 53;

/// A canonical polynomial: like terms combined, zero terms dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiophantinePolynomial {
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl DiophantinePolynomial {
    /// Builds a canonical polynomial from `(coefficient, exponents)` pairs.
    pub fn from_terms<I, C>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, Vec<u32>)>,
        C: Into<BigInt>,
    {
        if num_vars == 0 {
            return Err(Error::ArityMismatch { expected: 1, got: 0 });
        }
        let mut poly = Self::zero(num_vars);
        for (coeff, exps) in terms {
            if exps.len() != num_vars {
                return Err(Error::ArityMismatch { expected: num_vars, got: exps.len() });
            }
            poly.add_term(exps, coeff.into());
        }
        Ok(poly)
    }

    pub fn zero(num_vars: usize) -> Self {
        Self { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, value: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(vec![0; num_vars], value.into());
        p
    }

    fn variable(num_vars: usize, index: usize) -> Self {
        let mut exps = vec![0; num_vars];
        exps[index - 1] = 1;
        let mut p = Self::zero(num_vars);
        p.add_term(exps, BigInt::one());
        p
    }

    /// Parses `text`; the variable count is the highest index mentioned (at least 1).
    pub fn parse(text: &str) -> Result<Self> {
        let ast = Parser::new(text)?.parse_all()?;
        let k = ast.max_var().max(1);
        Ok(ast.lower(k))
    }

    /// Parses `text` against an explicitly declared variable count.
    pub fn parse_with_vars(text: &str, num_vars: usize) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::ArityMismatch { expected: 1, got: 0 });
        }
        let ast = Parser::new(text)?.parse_all()?;
        let max = ast.max_var();
        if max > num_vars {
            return Err(Error::VariableOutOfRange { index: max, declared: num_vars });
        }
        Ok(ast.lower(num_vars))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Canonical terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigInt, &[u32])> {
        self.terms.iter().map(|(e, c)| (c, e.as_slice()))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no term depends on any variable.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Exact value of `D` at `point`.
    pub fn evaluate(&self, point: &[u64]) -> Result<BigInt> {
        if point.len() != self.num_vars {
            return Err(Error::ArityMismatch { expected: self.num_vars, got: point.len() });
        }
        let mut acc = BigInt::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (&x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term *= num_traits::pow(BigInt::from(x), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// `D(point)^2` as a float, refusing values beyond 2^53.
    pub fn squared_value<T: Real>(&self, point: &[u64]) -> Result<T> {
        let d = self.evaluate(point)?;
        let sq = &d * &d;
        match sq.to_u64() {
            Some(v) if v <= EXACT_FLOAT_LIMIT => Ok(T::lit(v as f64)),
            _ => Err(Error::PrecisionGuard { label: point.to_vec(), value: sq.to_string() }),
        }
    }

    /// Lexicographically smallest root in the box `0..=cutoffs[i]`, by exhaustive scan.
    pub fn has_solution_under_cutoff(&self, cutoffs: &[u64]) -> Result<Option<Vec<u64>>> {
        if cutoffs.len() != self.num_vars {
            return Err(Error::ArityMismatch { expected: self.num_vars, got: cutoffs.len() });
        }
        let mut point = vec![0u64; self.num_vars];
        loop {
            if self.evaluate(&point)?.is_zero() {
                return Ok(Some(point));
            }
            // odometer with the last variable fastest
            let mut i = self.num_vars;
            loop {
                if i == 0 {
                    return Ok(None);
                }
                i -= 1;
                if point[i] < cutoffs[i] {
                    point[i] += 1;
                    break;
                }
                point[i] = 0;
            }
        }
    }

    fn add_term(&mut self, exps: Vec<u32>, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        Self {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(self.num_vars, 1);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl FromStr for DiophantinePolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Prints terms from highest to lowest exponent tuple, e.g. `x1^2 - 3*x1*x2 + 5`.
impl fmt::Display for DiophantinePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (exps, coeff)) in self.terms.iter().rev().enumerate() {
            let neg = coeff.is_negative();
            let mag = coeff.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| if e == 1 { format!("x{}", v + 1) } else { format!("x{}^{}", v + 1, e) })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug)]
enum Ast {
    Int(BigInt),
    Var(usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
}

impl Ast {
    fn max_var(&self) -> usize {
        match self {
            Ast::Int(_) => 0,
            Ast::Var(i) => *i,
            Ast::Neg(a) | Ast::Pow(a, _) => a.max_var(),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn lower(&self, k: usize) -> DiophantinePolynomial {
        match self {
            Ast::Int(v) => DiophantinePolynomial::constant(k, v.clone()),
            Ast::Var(i) => DiophantinePolynomial::variable(k, *i),
            Ast::Neg(a) => a.lower(k).neg(),
            Ast::Add(a, b) => a.lower(k).add(&b.lower(k)),
            Ast::Sub(a, b) => a.lower(k).add(&b.lower(k).neg()),
            Ast::Mul(a, b) => a.lower(k).mul(&b.lower(k)),
            Ast::Pow(a, e) => a.lower(k).pow(*e),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let (at, c) = chars[i];
            match c {
                c if c.is_whitespace() => i += 1,
                '+' | '-' | '*' | '^' | '(' | ')' => {
                    let t = match c {
                        '+' => Tok::Plus,
                        '-' => Tok::Minus,
                        '*' => Tok::Star,
                        '^' => Tok::Caret,
                        '(' => Tok::LParen,
                        _ => Tok::RParen,
                    };
                    toks.push((t, at));
                    i += 1;
                }
                '0'..='9' => {
                    let start = i;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                    let digits: String = chars[start..i].iter().map(|(_, c)| c).collect();
                    toks.push((Tok::Int(digits.parse().expect("decimal digits")), at));
                }
                'x' | 'X' => {
                    i += 1;
                    let start = i;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                    if start == i {
                        return Err(Error::Syntax { pos: at, msg: "expected variable index after 'x'".into() });
                    }
                    let digits: String = chars[start..i].iter().map(|(_, c)| c).collect();
                    let index: usize = digits.parse().map_err(|_| Error::Syntax {
                        pos: at,
                        msg: format!("variable index {digits} too large"),
                    })?;
                    if index == 0 {
                        return Err(Error::ZeroVariableIndex { pos: at });
                    }
                    toks.push((Tok::Var(index), at));
                }
                other => {
                    return Err(Error::Syntax { pos: at, msg: format!("unexpected character '{other}'") });
                }
            }
        }
        Ok(Self { toks, pos: 0, end: text.len() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn parse_all(mut self) -> Result<Ast> {
        if self.toks.is_empty() {
            return Err(Error::Syntax { pos: 0, msg: "empty polynomial".into() });
        }
        let ast = self.expr()?;
        if self.pos != self.toks.len() {
            return Err(Error::Syntax { pos: self.here(), msg: "unexpected trailing input".into() });
        }
        Ok(ast)
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Ast::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let at = self.here();
            let Some((Tok::Int(v), _)) = self.toks.get(self.pos).cloned() else {
                return Err(Error::BadExponent { pos: at });
            };
            self.pos += 1;
            let e = v
                .to_u32()
                .filter(|&e| e <= MAX_EXPONENT)
                .ok_or_else(|| Error::ExponentTooLarge { pos: at, value: v.to_string(), limit: MAX_EXPONENT })?;
            if let Some(Tok::Caret) = self.peek() {
                return Err(Error::Syntax { pos: self.here(), msg: "chained '^' needs parentheses".into() });
            }
            return Ok(Ast::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast> {
        let at = self.here();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Int(v), _)) => {
                self.pos += 1;
                Ok(Ast::Int(v))
            }
            Some((Tok::Var(i), _)) => {
                self.pos += 1;
                Ok(Ast::Var(i))
            }
            Some((Tok::LParen, _)) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(Error::Syntax { pos: self.here(), msg: "expected ')'".into() }),
                }
            }
            Some((t, _)) => Err(Error::Syntax { pos: at, msg: format!("unexpected token {t:?}") }),
            None => Err(Error::Syntax { pos: at, msg: "unexpected end of input".into() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn terms_of(p: &DiophantinePolynomial) -> Vec<(i64, Vec<u32>)> {
        p.terms().map(|(c, e)| (c.to_i64().unwrap(), e.to_vec())).collect()
    }

    #[test]
    fn parses_linear() {
        let p = DiophantinePolynomial::parse("x1 - 2").unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(terms_of(&p), vec![(-2, vec![0]), (1, vec![1])]);
    }

    #[test]
    fn parses_two_variables() {
        let p = DiophantinePolynomial::parse("(x1 + x2 - 3)").unwrap();
        assert_eq!(p.num_vars(), 2);
        assert_eq!(terms_of(&p), vec![(-3, vec![0, 0]), (1, vec![0, 1]), (1, vec![1, 0])]);
    }

    #[test]
    fn cancels_to_canonical_form() {
        let p = DiophantinePolynomial::parse("x1^2 - x1 + x1").unwrap();
        assert_eq!(terms_of(&p), vec![(1, vec![2])]);
        let z = DiophantinePolynomial::parse("x1 - x1").unwrap();
        assert!(z.is_zero());
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn expands_products_and_powers() {
        let p = DiophantinePolynomial::parse("(x1+1)*(x2+1) - 6").unwrap();
        assert_eq!(terms_of(&p), vec![(-5, vec![0, 0]), (1, vec![0, 1]), (1, vec![1, 0]), (1, vec![1, 1])]);
        let q = DiophantinePolynomial::parse("(x1 - 1)^3").unwrap();
        assert_eq!(q.to_string(), "x1^3 - 3*x1^2 + 3*x1 - 1");
        let c = DiophantinePolynomial::parse("-(2)^0").unwrap();
        assert_eq!(terms_of(&c), vec![(-1, vec![0])]);
    }

    #[test]
    fn explicit_arity() {
        let p = DiophantinePolynomial::parse_with_vars("x1 - 2", 3).unwrap();
        assert_eq!(p.num_vars(), 3);
        assert!(matches!(
            DiophantinePolynomial::parse_with_vars("x4", 3),
            Err(Error::VariableOutOfRange { index: 4, declared: 3 })
        ));
        let k = DiophantinePolynomial::parse("7").unwrap();
        assert_eq!(k.num_vars(), 1);
        assert!(k.is_constant());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(DiophantinePolynomial::parse("x1 + * 2"), Err(Error::Syntax { pos: 5, .. })));
        assert!(matches!(DiophantinePolynomial::parse("x1 $ 2"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(DiophantinePolynomial::parse("(x1 + 2"), Err(Error::Syntax { pos: 7, .. })));
        assert!(matches!(DiophantinePolynomial::parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(DiophantinePolynomial::parse("x + 1"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(DiophantinePolynomial::parse("2 x1"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn exponent_must_be_nonnegative_literal() {
        assert!(matches!(DiophantinePolynomial::parse("x1^-1"), Err(Error::BadExponent { pos: 3 })));
        assert!(matches!(DiophantinePolynomial::parse("x1^x2"), Err(Error::BadExponent { pos: 3 })));
        assert!(matches!(DiophantinePolynomial::parse("x1^"), Err(Error::BadExponent { pos: 3 })));
        assert!(matches!(DiophantinePolynomial::parse("x1^1000"), Err(Error::ExponentTooLarge { .. })));
    }

    #[test]
    fn zero_variable_index_rejected() {
        assert!(matches!(DiophantinePolynomial::parse("2 + x0"), Err(Error::ZeroVariableIndex { pos: 4 })));
    }

    #[test]
    fn evaluates_examples() {
        let p = DiophantinePolynomial::parse("x1 - 2").unwrap();
        assert_eq!(p.evaluate(&[2]).unwrap(), BigInt::zero());
        assert_eq!(p.evaluate(&[5]).unwrap(), BigInt::from(3));
        let q = DiophantinePolynomial::parse("(x1+1)*(x2+1) - 6").unwrap();
        assert_eq!(q.evaluate(&[1, 2]).unwrap(), BigInt::zero());
        assert!(matches!(q.evaluate(&[1]), Err(Error::ArityMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn evaluation_does_not_overflow() {
        let p = DiophantinePolynomial::parse("x1^20 + 1").unwrap();
        let v = p.evaluate(&[1000]).unwrap();
        assert_eq!(v, num_traits::pow(BigInt::from(10), 60) + 1);
    }

    #[test]
    fn precision_guard() {
        let p = DiophantinePolynomial::parse("x1 - 2").unwrap();
        assert_eq!(p.squared_value::<f64>(&[5]).unwrap(), 9.0);
        let big = DiophantinePolynomial::parse("x1^4").unwrap();
        // 10^4 squared = 10^16 > 2^53
        assert!(matches!(big.squared_value::<f64>(&[100]), Err(Error::PrecisionGuard { .. })));
        assert!(big.squared_value::<f64>(&[90]).is_ok());
    }

    #[test]
    fn brute_force_solutions() {
        let p = DiophantinePolynomial::parse("x1 - 2").unwrap();
        assert_eq!(p.has_solution_under_cutoff(&[10]).unwrap(), Some(vec![2]));
        let q = DiophantinePolynomial::parse("3*x1 - 1").unwrap();
        assert_eq!(q.has_solution_under_cutoff(&[10]).unwrap(), None);
        let r = DiophantinePolynomial::parse("(x1+1)*(x2+1) - 6").unwrap();
        // exhaustive scan of the 6x6 box: roots (0,5), (1,2), (2,1), (5,0)
        assert_eq!(r.has_solution_under_cutoff(&[5, 5]).unwrap(), Some(vec![0, 5]));
        assert_eq!(r.has_solution_under_cutoff(&[3, 3]).unwrap(), Some(vec![1, 2]));
        assert_eq!(r.has_solution_under_cutoff(&[0, 4]).unwrap(), None);
    }

    fn naive_eval(terms: &[(i64, Vec<u32>)], point: &[u64]) -> BigInt {
        let mut acc = BigInt::zero();
        for (c, e) in terms {
            let mut t = BigInt::from(*c);
            for (x, k) in point.iter().zip(e) {
                for _ in 0..*k {
                    t *= BigInt::from(*x);
                }
            }
            acc += t;
        }
        acc
    }

    fn arb_terms(k: usize) -> impl Strategy<Value = Vec<(i64, Vec<u32>)>> {
        prop::collection::vec((-50i64..50, prop::collection::vec(0u32..4, k)), 0..6)
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(terms in arb_terms(3)) {
            let p = DiophantinePolynomial::from_terms(3, terms).unwrap();
            let q = DiophantinePolynomial::parse_with_vars(&p.to_string(), 3).unwrap();
            prop_assert_eq!(p, q);
        }

        #[test]
        fn evaluate_matches_naive(terms in arb_terms(2), x in 0u64..1000, y in 0u64..1000) {
            let p = DiophantinePolynomial::from_terms(2, terms.clone()).unwrap();
            prop_assert_eq!(p.evaluate(&[x, y]).unwrap(), naive_eval(&terms, &[x, y]));
        }

        #[test]
        fn brute_force_matches_enumeration(terms in arb_terms(2), cx in 0u64..6, cy in 0u64..6) {
            let p = DiophantinePolynomial::from_terms(2, terms.clone()).unwrap();
            let mut expected = None;
            'outer: for x in 0..=cx {
                for y in 0..=cy {
                    if naive_eval(&terms, &[x, y]).is_zero() {
                        expected = Some(vec![x, y]);
                        break 'outer;
                    }
                }
            }
            prop_assert_eq!(p.has_solution_under_cutoff(&[cx, cy]).unwrap(), expected);
        }
    }
}
