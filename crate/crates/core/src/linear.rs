//! Arithmetic terms and their normalized linear form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::ident::Ident;

/// Arithmetic term as written: `k | k*v | a1 + a2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithTerm {
    Const(i64),
    Scaled(i64, Ident),
    Sum(Box<ArithTerm>, Box<ArithTerm>),
}

impl ArithTerm {
    pub fn normalize(&self) -> LinExpr {
        match self {
            ArithTerm::Const(k) => LinExpr::constant(*k),
            ArithTerm::Scaled(k, v) => LinExpr::var(v.clone()).scale(*k),
            ArithTerm::Sum(a, b) => a.normalize().add(&b.normalize()),
        }
    }

    pub fn eval(&self, env: &dyn Fn(&Ident) -> i64) -> i64 {
        match self {
            ArithTerm::Const(k) => *k,
            ArithTerm::Scaled(k, v) => k * env(v),
            ArithTerm::Sum(a, b) => a.eval(env) + b.eval(env),
        }
    }
}

/// `constant + Σ kᵢ·vᵢ` with distinct `vᵢ` and every `kᵢ ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinExpr {
    constant: i64,
    coeffs: BTreeMap<Ident, i64>,
}

impl LinExpr {
    pub fn constant(k: i64) -> LinExpr {
        LinExpr {
            constant: k,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(v: Ident) -> LinExpr {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, 1);
        LinExpr {
            constant: 0,
            coeffs,
        }
    }

    pub fn from_parts(constant: i64, terms: impl IntoIterator<Item = (Ident, i64)>) -> LinExpr {
        let mut e = LinExpr::constant(constant);
        for (v, k) in terms {
            e.add_term(v, k);
        }
        e
    }

    fn add_term(&mut self, v: Ident, k: i64) {
        if k == 0 {
            return;
        }
        let slot = self.coeffs.entry(v.clone()).or_insert(0);
        *slot += k;
        if *slot == 0 {
            self.coeffs.remove(&v);
        }
    }

    pub fn const_term(&self) -> i64 {
        self.constant
    }

    pub fn coeff(&self, v: &Ident) -> i64 {
        self.coeffs.get(v).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Ident, i64)> {
        self.coeffs.iter().map(|(v, k)| (v, *k))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Ident> {
        self.coeffs.keys()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mentions(&self, v: &Ident) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, k) in &other.coeffs {
            out.add_term(v.clone(), *k);
        }
        out
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(-1)
    }

    pub fn scale(&self, k: i64) -> LinExpr {
        if k == 0 {
            return LinExpr::constant(0);
        }
        LinExpr {
            constant: self.constant * k,
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
        }
    }

    pub fn plus_const(&self, k: i64) -> LinExpr {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// Replace `v` by `by` everywhere.
    pub fn substitute(&self, v: &Ident, by: &LinExpr) -> LinExpr {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(&k) => {
                let mut rest = self.clone();
                rest.coeffs.remove(v);
                rest.add(&by.scale(k))
            }
        }
    }

    pub fn rename(&self, map: &HashMap<Ident, Ident>) -> LinExpr {
        let mut out = LinExpr::constant(self.constant);
        for (v, k) in &self.coeffs {
            out.add_term(map.get(v).unwrap_or(v).clone(), *k);
        }
        out
    }

    pub fn eval(&self, env: &dyn Fn(&Ident) -> i64) -> i64 {
        self.coeffs
            .iter()
            .fold(self.constant, |acc, (v, k)| acc + k * env(v))
    }

    /// Gcd of the variable coefficients (0 when constant).
    pub fn coeff_gcd(&self) -> i64 {
        self.coeffs.values().fold(0, |g, k| gcd(g, k.abs()))
    }

    pub fn to_term(&self) -> ArithTerm {
        let mut term: Option<ArithTerm> = None;
        for (v, k) in &self.coeffs {
            let t = ArithTerm::Scaled(*k, v.clone());
            term = Some(match term {
                None => t,
                Some(acc) => ArithTerm::Sum(Box::new(acc), Box::new(t)),
            });
        }
        match term {
            None => ArithTerm::Const(self.constant),
            Some(t) if self.constant == 0 => t,
            Some(t) => ArithTerm::Sum(Box::new(t), Box::new(ArithTerm::Const(self.constant))),
        }
    }

    /// Split into the parts printed left and right of a relation so that both
    /// sides carry only non-negative coefficients: `self ⋈ 0` is shown as
    /// `lhs ⋈ rhs`.
    pub fn sides(&self) -> (LinExpr, LinExpr) {
        let mut lhs = LinExpr::constant(self.constant.max(0));
        let mut rhs = LinExpr::constant((-self.constant).max(0));
        for (v, k) in &self.coeffs {
            if *k > 0 {
                lhs.add_term(v.clone(), *k);
            } else {
                rhs.add_term(v.clone(), -k);
            }
        }
        (lhs, rhs)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, k) in &self.coeffs {
            let (sign, mag) = if *k < 0 { ("-", -k) } else { ("+", *k) };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            if mag == 1 {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{}*{}", mag, v)?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)
        } else if self.constant < 0 {
            write!(f, " - {}", -self.constant)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Ident {
        Ident::new(n)
    }

    #[test]
    fn normalization_merges_and_drops_zero_coefficients() {
        let t = ArithTerm::Sum(
            Box::new(ArithTerm::Scaled(2, v("x"))),
            Box::new(ArithTerm::Sum(
                Box::new(ArithTerm::Scaled(-2, v("x"))),
                Box::new(ArithTerm::Const(3)),
            )),
        );
        let e = t.normalize();
        assert!(e.is_constant());
        assert_eq!(e.const_term(), 3);
    }

    #[test]
    fn sides_move_negative_terms_right() {
        let e = LinExpr::from_parts(1, [(v("x"), 1), (v("y"), -1)]);
        let (l, r) = e.sides();
        assert_eq!(l.to_string(), "x + 1");
        assert_eq!(r.to_string(), "y");
    }

    #[test]
    fn substitute_scales_the_replacement() {
        let e = LinExpr::from_parts(0, [(v("x"), 3), (v("y"), 1)]);
        let by = LinExpr::from_parts(2, [(v("z"), 1)]);
        let out = e.substitute(&v("x"), &by);
        assert_eq!(out, LinExpr::from_parts(6, [(v("z"), 3), (v("y"), 1)]));
    }

    #[test]
    fn gcd_of_coefficients() {
        let e = LinExpr::from_parts(5, [(v("x"), 4), (v("y"), -6)]);
        assert_eq!(e.coeff_gcd(), 2);
        assert_eq!(LinExpr::constant(3).coeff_gcd(), 0);
    }
}
