//! Text syntax for expressions.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' exponent)?
//! base   := integer | '(' expr ')' | 'x[' i ']'
//!         | name '[' components? (';' derivs)? ']'
//!         | 'det(' name ')' | 'sqrtdet(' name ')' | 'inv(' name ')[' a ',' b ']'
//! ```
//!
//! Exponents are signed integers, or a parenthesized rational `(p/q)`, which is
//! only accepted for half-integer powers of `det(g)`. Negative powers and
//! division are only allowed for units of the expression class.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::atom::{Atom, Comp, FieldId, MultiIndex};
use crate::bundle::{BundleSpec, FieldKind};
use crate::error::{Error, Result};
use crate::expr::{adjugate_entry, det_polynomial, Expression, Monomial};
use crate::rational::Rational;

pub fn parse_expression(text: &str, bundle: &BundleSpec) -> Result<Expression> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        bundle,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    bundle: &'a BundleSpec,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn integer(&mut self) -> Result<i128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse::<i128>().map_err(|_| Error::Syntax {
            pos: start,
            msg: "integer too large".into(),
        })
    }

    fn ident(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            self.pos = start;
            return None;
        }
        Some(core::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut acc = if self.eat(b'-') {
            -self.term()?
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.factor()?;
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.factor()?;
                let inv = d.try_inverse().ok_or_else(|| {
                    Error::NotInvertible(format!(
                        "divisor at {at} (only numbers, sqrtdet powers and det are units)"
                    ))
                })?;
                acc = &acc * &inv;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expression> {
        let start = self.pos;
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let exp = self.exponent()?;
        if !exp.is_integer() {
            // half-integer powers of det(g) become sqrtdet powers
            if exp.denom() == 2 {
                for (i, f) in self.bundle.fields().iter().enumerate() {
                    if f.kind == FieldKind::Symmetric2 {
                        let id = FieldId(i as u16);
                        if base == det_polynomial(id, self.bundle.dim() as u8) {
                            return Ok(Expression::atom_pow(
                                self.bundle.root(id),
                                exp.numer() as i32,
                            ));
                        }
                    }
                }
            }
            return Err(Error::Syntax {
                pos: start,
                msg: "non-integer exponent is only allowed on det(g)".into(),
            });
        }
        let k = exp.numer();
        if k.unsigned_abs() > 64 {
            return Err(Error::Syntax {
                pos: start,
                msg: "exponent too large".into(),
            });
        }
        if k >= 0 {
            if let Some(c) = base.as_constant() {
                return Ok(Expression::constant(c.pow(k as i32)));
            }
            Ok(base.pow(k as u32))
        } else {
            let inv = base
                .try_inverse()
                .ok_or_else(|| Error::NotInvertible(format!("negative power at {start}")))?;
            Ok(inv.pow((-k) as u32))
        }
    }

    fn exponent(&mut self) -> Result<Rational> {
        if self.eat(b'(') {
            let neg = self.eat(b'-');
            let p = self.integer()?;
            let q = if self.eat(b'/') { self.integer()? } else { 1 };
            self.expect(b')')?;
            if q == 0 {
                return Err(self.err("zero denominator"));
            }
            let r = Rational::new(p, q);
            return Ok(if neg { -r } else { r });
        }
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let p = self.integer()?;
        Ok(Rational::integer(if neg { -p } else { p }))
    }

    fn index(&mut self) -> Result<u8> {
        let at = self.pos;
        let i = self.integer()?;
        if i < 1 || i as usize > self.bundle.dim() {
            return Err(Error::IndexOutOfRange {
                pos: at,
                msg: format!("index {i} not in 1..={}", self.bundle.dim()),
            });
        }
        Ok(i as u8)
    }

    fn index_list(&mut self) -> Result<Vec<u8>> {
        let mut v = Vec::new();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {}
            _ => return Ok(v),
        }
        loop {
            v.push(self.index()?);
            if !self.eat(b',') {
                return Ok(v);
            }
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {}
                _ => return Err(Error::MalformedMultiIndex { pos: self.pos }),
            }
        }
    }

    fn field_name(&mut self) -> Result<FieldId> {
        self.skip_ws();
        let at = self.pos;
        let name = match self.ident() {
            Some(n) => n.to_string(),
            None => return Err(self.err("expected field name")),
        };
        self.bundle
            .field_id(&name)
            .ok_or(Error::UnknownField(name))
            .map_err(|e| match e {
                Error::UnknownField(n) => Error::UnknownField(format!("{n} (at {at})")),
                e => e,
            })
    }

    fn symmetric_field(&mut self) -> Result<FieldId> {
        let at = self.pos;
        let id = self.field_name()?;
        if self.bundle.field(id).kind != FieldKind::Symmetric2 {
            return Err(Error::Syntax {
                pos: at,
                msg: "det/sqrtdet/inv need a symmetric2 field".into(),
            });
        }
        Ok(id)
    }

    fn base(&mut self) -> Result<Expression> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                Ok(Expression::constant(Rational::integer(self.integer()?)))
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(_) => {
                let at = self.pos;
                let name = match self.ident() {
                    Some(n) => n.to_string(),
                    None => return Err(self.err("unexpected character")),
                };
                let n = self.bundle.dim() as u8;
                match name.as_str() {
                    "x" if self.peek() == Some(b'[') => {
                        self.expect(b'[')?;
                        let i = self.index()?;
                        self.expect(b']')?;
                        Ok(Expression::atom(Atom::Base(i)))
                    }
                    "det" if self.peek() == Some(b'(') => {
                        self.expect(b'(')?;
                        let id = self.symmetric_field()?;
                        self.expect(b')')?;
                        Ok(det_polynomial(id, n))
                    }
                    "sqrtdet" if self.peek() == Some(b'(') => {
                        self.expect(b'(')?;
                        let id = self.symmetric_field()?;
                        self.expect(b')')?;
                        Ok(Expression::atom(self.bundle.root(id)))
                    }
                    "inv" if self.peek() == Some(b'(') => {
                        self.expect(b'(')?;
                        let id = self.symmetric_field()?;
                        self.expect(b')')?;
                        self.expect(b'[')?;
                        let a = self.index()?;
                        self.expect(b',')?;
                        let b = self.index()?;
                        self.expect(b']')?;
                        let adj = adjugate_entry(id, n, a, b);
                        Ok(&adj * &Expression::atom_pow(self.bundle.root(id), -2))
                    }
                    _ => {
                        let id = self
                            .bundle
                            .field_id(&name)
                            .ok_or_else(|| Error::UnknownField(format!("{name} (at {at})")))?;
                        let kind = self.bundle.field(id).kind;
                        self.expect(b'[')?;
                        let comp_at = self.pos;
                        let comps = self.index_list()?;
                        let derivs = if self.eat(b';') {
                            let d = self.index_list()?;
                            if d.is_empty() {
                                return Err(Error::MalformedMultiIndex { pos: self.pos });
                            }
                            d
                        } else {
                            Vec::new()
                        };
                        self.expect(b']')?;
                        if comps.len() != kind.rank() {
                            return Err(Error::IndexOutOfRange {
                                pos: comp_at,
                                msg: format!(
                                    "{} field `{name}` takes {} component indices",
                                    kind.name(),
                                    kind.rank()
                                ),
                            });
                        }
                        if derivs.len() > self.bundle.order_bound() {
                            return Err(Error::OrderBoundExceeded {
                                bound: self.bundle.order_bound(),
                            });
                        }
                        let comp = match kind {
                            FieldKind::Scalar => Comp::scalar(),
                            FieldKind::Covector => Comp::vector(comps[0]),
                            FieldKind::Symmetric2 => Comp::pair(comps[0], comps[1]),
                        };
                        Ok(Expression::atom(Atom::jet(
                            id,
                            comp,
                            MultiIndex::from_indices(derivs),
                        )))
                    }
                }
            }
        }
    }
}

fn join_indices(idx: &[u8]) -> String {
    let mut s = String::new();
    for (k, i) in idx.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        let _ = write!(s, "{i}");
    }
    s
}

pub fn format_atom(a: &Atom, bundle: &BundleSpec) -> String {
    match a {
        Atom::Base(i) => format!("x[{i}]"),
        Atom::Jet {
            field,
            comp,
            derivs,
        } => {
            let name = bundle
                .fields()
                .get(field.0 as usize)
                .map(|f| f.name.as_str())
                .unwrap_or("?");
            if derivs.is_empty() {
                format!("{name}[{}]", join_indices(comp.indices()))
            } else {
                format!(
                    "{name}[{};{}]",
                    join_indices(comp.indices()),
                    join_indices(derivs.indices())
                )
            }
        }
        Atom::Aux { index, derivs } => {
            if derivs.is_empty() {
                format!("aux({index})[]")
            } else {
                format!("aux({index})[;{}]", join_indices(derivs.indices()))
            }
        }
        Atom::Root { field, .. } => {
            let name = bundle
                .fields()
                .get(field.0 as usize)
                .map(|f| f.name.as_str())
                .unwrap_or("?");
            format!("sqrtdet({name})")
        }
        Atom::Param(k) => {
            if *k == 0 {
                "t".into()
            } else {
                format!("t{k}")
            }
        }
    }
}

fn format_monomial(m: &Monomial, bundle: &BundleSpec) -> String {
    let mut s = String::new();
    for (k, (a, e)) in m.factors().iter().enumerate() {
        if k > 0 {
            s.push('*');
        }
        s.push_str(&format_atom(a, bundle));
        if *e != 1 {
            let _ = write!(s, "^{e}");
        }
    }
    s
}

/// Canonical text form; `parse_expression` reads it back to the same value.
pub fn format_expression(e: &Expression, bundle: &BundleSpec) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (m, c)) in e.terms().iter().enumerate() {
        let neg = c.is_negative();
        if k == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let c = c.abs();
        if m.is_one() {
            let _ = write!(s, "{c}");
        } else if c.is_one() {
            s.push_str(&format_monomial(m, bundle));
        } else {
            let _ = write!(s, "{c}*{}", format_monomial(m, bundle));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::FieldDecl;

    fn b1() -> BundleSpec {
        BundleSpec::new(
            1,
            alloc::vec![
                FieldDecl::new("u", FieldKind::Scalar),
                FieldDecl::new("g", FieldKind::Symmetric2)
            ],
        )
        .unwrap()
    }

    fn b2() -> BundleSpec {
        BundleSpec::new(
            2,
            alloc::vec![
                FieldDecl::new("u", FieldKind::Scalar),
                FieldDecl::new("g", FieldKind::Symmetric2),
                FieldDecl::new("A", FieldKind::Covector)
            ],
        )
        .unwrap()
    }

    #[test]
    fn half_square_of_first_derivative() {
        let b = b1();
        let e = parse_expression("u[;1]^2 / 2", &b).unwrap();
        assert_eq!(format_expression(&e, &b), "1/2*u[;1]^2");
    }

    #[test]
    fn det_expands() {
        let b = b2();
        let e = parse_expression("det(g)", &b).unwrap();
        assert_eq!(format_expression(&e, &b), "g[1,1]*g[2,2] - g[1,2]^2");
    }

    #[test]
    fn inverse_sqrtdet() {
        let b = b1();
        let e = parse_expression("sqrtdet(g)^-1", &b).unwrap();
        assert_eq!(e, Expression::atom_pow(b.root(FieldId(1)), -1));
        assert_eq!(format_expression(&e, &b), "sqrtdet(g)^-1");
        assert_eq!(parse_expression("det(g)^(-1/2)", &b).unwrap(), e);
        assert_eq!(parse_expression("1/sqrtdet(g)", &b).unwrap(), e);
    }

    #[test]
    fn sqrtdet_squared_is_det() {
        let b = b2();
        let e = parse_expression("sqrtdet(g)^2 - det(g)", &b).unwrap();
        assert!(e.is_zero());
        let e = parse_expression("(u[;1] + u[;1]) - 2*u[;1]", &b).unwrap();
        assert!(e.is_zero());
        let e = parse_expression("u[;1] - u[;2]", &b).unwrap();
        assert!(!e.is_zero());
    }

    #[test]
    fn inverse_metric_contracts_to_identity() {
        let b = b2();
        let e = parse_expression("inv(g)[1,1]*g[1,1] + inv(g)[1,2]*g[2,1]", &b).unwrap();
        assert_eq!(e, Expression::one());
        let e = parse_expression("inv(g)[1,1]*g[1,2] + inv(g)[1,2]*g[2,2]", &b).unwrap();
        assert!(e.is_zero());
    }

    #[test]
    fn derivative_order_is_irrelevant() {
        let b = b2();
        assert_eq!(
            parse_expression("u[;2,1,1]", &b).unwrap(),
            parse_expression("u[;1,2,1]", &b).unwrap()
        );
        assert_eq!(
            parse_expression("g[2,1;1]", &b).unwrap(),
            parse_expression("g[1,2;1]", &b).unwrap()
        );
    }

    #[test]
    fn errors() {
        let b = b2();
        assert!(matches!(
            parse_expression("v[]", &b),
            Err(Error::UnknownField(_))
        ));
        assert!(matches!(
            parse_expression("u[;3]", &b),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            parse_expression("A[]", &b),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            parse_expression("u[;1,]", &b),
            Err(Error::MalformedMultiIndex { .. })
        ));
        assert!(matches!(
            parse_expression("u[;]", &b),
            Err(Error::MalformedMultiIndex { .. })
        ));
        assert!(matches!(
            parse_expression("u[] +", &b),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("u[] / u[;1]", &b),
            Err(Error::NotInvertible(_))
        ));
        assert!(matches!(
            parse_expression("u[]^-1", &b),
            Err(Error::NotInvertible(_))
        ));
        assert!(matches!(
            parse_expression("x[0]", &b),
            Err(Error::IndexOutOfRange { .. })
        ));
        match parse_expression("u[] $", &b) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn printing_round_trips() {
        let b = b2();
        for src in [
            "-1/2*u[;1]^2 + x[1]*u[] - 3",
            "sqrtdet(g)*inv(g)[1,2]*A[1;2] - A[2;1]/2",
            "(g[1,1;2] - u[])^3 / det(g)",
            "0",
        ] {
            let e = parse_expression(src, &b).unwrap();
            let text = format_expression(&e, &b);
            assert_eq!(parse_expression(&text, &b).unwrap(), e, "{src} -> {text}");
        }
    }
}
