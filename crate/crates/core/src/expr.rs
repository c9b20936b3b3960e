//! Canonical exact expressions over jet atoms.
//!
//! An [`Expression`] is a sum of Laurent monomials in [`Atom`]s with rational
//! coefficients, subject to the single relation `sqrtdet(g)^2 = det(g)` for
//! every symmetric 2-tensor field `g`. The stored form is canonical, so two
//! expressions are equal iff their term lists are identical:
//!
//! * terms are sorted by monomial, with no duplicates and no zero coefficients;
//! * per field `g` the terms split by the parity of the `sqrtdet(g)` exponent
//!   as `s^e * P / det^K`, where no exponent is `>= 2` and `P` is not divisible
//!   by `det(g)` whenever `K > 0`.
//!
//! The second rule is enforced by an exact division by the determinant
//! polynomial, which is a Gröbner basis of its own ideal, so the remainder test
//! is decisive.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::atom::{Atom, Comp, FieldId, MultiIndex};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A product of atom powers, sorted by atom.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(SmallVec<[(Atom, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn atom(a: Atom, exp: i32) -> Self {
        let mut v = SmallVec::new();
        if exp != 0 {
            v.push((a, exp));
        }
        Monomial(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn exponent(&self, a: &Atom) -> i32 {
        match self.0.binary_search_by(|(b, _)| b.cmp(a)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    /// The monomial with `a` removed, and the exponent it had.
    pub fn split(&self, a: &Atom) -> (i32, Monomial) {
        match self.0.binary_search_by(|(b, _)| b.cmp(a)) {
            Ok(i) => {
                let mut v = self.0.clone();
                let (_, k) = v.remove(i);
                (k, Monomial(v))
            }
            Err(_) => (0, self.clone()),
        }
    }

    /// Multiplies by `a^k` in place.
    pub fn mul_atom(&mut self, a: &Atom, k: i32) {
        match self.0.binary_search_by(|(b, _)| b.cmp(a)) {
            Ok(i) => {
                self.0[i].1 += k;
                if self.0[i].1 == 0 {
                    self.0.remove(i);
                }
            }
            Err(i) => {
                if k != 0 {
                    self.0.insert(i, (a.clone(), k));
                }
            }
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let k = a[i].1 + b[j].1;
                    if k != 0 {
                        out.push((a[i].0.clone(), k));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        Monomial(out)
    }

    fn has_root(&self) -> bool {
        self.0.iter().any(|(a, _)| a.is_root())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

type Terms = Vec<(Monomial, Rational)>;

/// Sorts, merges duplicate monomials and drops zero coefficients.
fn combine(mut v: Terms) -> Terms {
    if v.len() <= 1 {
        v.retain(|(_, c)| !c.is_zero());
        return v;
    }
    v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut out: Terms = Vec::with_capacity(v.len());
    for (m, c) in v {
        match out.last_mut() {
            Some((lm, lc)) if *lm == m => *lc += c,
            _ => {
                if let Some((_, lc)) = out.last() {
                    if lc.is_zero() {
                        out.pop();
                    }
                }
                out.push((m, c));
            }
        }
    }
    if let Some((_, lc)) = out.last() {
        if lc.is_zero() {
            out.pop();
        }
    }
    out
}

fn mul_terms(a: &[(Monomial, Rational)], b: &[(Monomial, Rational)]) -> Terms {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ma, ca) in a {
        for (mb, cb) in b {
            out.push((ma.mul(mb), *ca * *cb));
        }
    }
    combine(out)
}

/// Zero-order component atoms of a symmetric field, in canonical order.
fn metric_vars(field: FieldId, dim: u8) -> Vec<Atom> {
    let mut v = Vec::new();
    for a in 1..=dim {
        for b in a..=dim {
            v.push(Atom::jet(field, Comp::pair(a, b), MultiIndex::empty()));
        }
    }
    v
}

/// Symbolic determinant by cofactor expansion along the first row.
fn det_of(m: &[Vec<Expression>]) -> Expression {
    let n = m.len();
    if n == 0 {
        return Expression::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Expression::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expression>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(|c| m[r][c].clone())
                    .collect()
            })
            .collect();
        let t = &m[0][j] * &det_of(&minor);
        acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

fn metric_matrix(field: FieldId, dim: u8) -> Vec<Vec<Expression>> {
    (1..=dim)
        .map(|a| {
            (1..=dim)
                .map(|b| Expression::atom(Atom::jet(field, Comp::pair(a, b), MultiIndex::empty())))
                .collect()
        })
        .collect()
}

/// `det` of the component matrix of a symmetric field, expanded.
pub fn det_polynomial(field: FieldId, dim: u8) -> Expression {
    det_of(&metric_matrix(field, dim))
}

/// Entry `(a, b)` of the adjugate of the component matrix (1-based).
pub fn adjugate_entry(field: FieldId, dim: u8, a: u8, b: u8) -> Expression {
    let m = metric_matrix(field, dim);
    // adj[a][b] = (-1)^(a+b) * minor(b, a)
    let minor: Vec<Vec<Expression>> = (0..dim as usize)
        .filter(|&r| r != (b - 1) as usize)
        .map(|r| {
            (0..dim as usize)
                .filter(|&c| c != (a - 1) as usize)
                .map(|c| m[r][c].clone())
                .collect()
        })
        .collect();
    let d = det_of(&minor);
    if (a + b).is_multiple_of(2) {
        d
    } else {
        -d
    }
}

struct DetCache {
    field: FieldId,
    dim: u8,
    vars: Vec<Atom>,
    powers: Vec<Terms>,
}

impl DetCache {
    fn new(field: FieldId, dim: u8) -> Self {
        let d = det_polynomial(field, dim);
        DetCache {
            field,
            dim,
            vars: metric_vars(field, dim),
            powers: alloc::vec![alloc::vec![(Monomial::one(), Rational::ONE)], d.terms],
        }
    }

    fn pow(&mut self, k: usize) -> &Terms {
        while self.powers.len() <= k {
            let next = mul_terms(self.powers.last().unwrap(), &self.powers[1]);
            self.powers.push(next);
        }
        &self.powers[k]
    }

    fn root(&self) -> Atom {
        Atom::Root {
            field: self.field,
            dim: self.dim,
        }
    }
}

type ExpVec = SmallVec<[i32; 6]>;

fn split_vars(m: &Monomial, vars: &[Atom]) -> (ExpVec, Monomial) {
    let mut ev: ExpVec = SmallVec::from_elem(0, vars.len());
    let mut rest = SmallVec::new();
    for (a, k) in m.0.iter() {
        match vars.binary_search(a) {
            Ok(i) => ev[i] = *k,
            Err(_) => rest.push((a.clone(), *k)),
        }
    }
    (ev, Monomial(rest))
}

fn join_vars(ev: &ExpVec, rest: &Monomial, vars: &[Atom]) -> Monomial {
    let mut m = rest.clone();
    for (i, &k) in ev.iter().enumerate() {
        if k != 0 {
            m.mul_atom(&vars[i], k);
        }
    }
    m
}

/// Exact division of `p` by the determinant; `None` if the remainder is nonzero.
fn try_divide_det(p: &Terms, det: &Terms, vars: &[Atom]) -> Option<Terms> {
    let dsplit: Vec<(ExpVec, Rational)> = det
        .iter()
        .map(|(m, c)| (split_vars(m, vars).0, *c))
        .collect();
    let (lead_ev, lead_c) = dsplit.iter().max_by(|a, b| a.0.cmp(&b.0)).cloned()?;
    let mut work: BTreeMap<(ExpVec, Monomial), Rational> = BTreeMap::new();
    for (m, c) in p {
        let (ev, rest) = split_vars(m, vars);
        work.insert((ev, rest), *c);
    }
    let mut quotient: Terms = Vec::new();
    while let Some(((ev, rest), c)) = work.pop_last() {
        if ev.iter().zip(lead_ev.iter()).any(|(a, b)| a < b) {
            return None;
        }
        let qev: ExpVec = ev.iter().zip(lead_ev.iter()).map(|(a, b)| a - b).collect();
        let qc = c / lead_c;
        for (dev, dc) in &dsplit {
            if *dev == lead_ev {
                continue;
            }
            let kev: ExpVec = qev.iter().zip(dev.iter()).map(|(a, b)| a + b).collect();
            let key = (kev, rest.clone());
            let delta = -(qc * *dc);
            match work.get_mut(&key) {
                Some(v) => {
                    *v += delta;
                    if v.is_zero() {
                        work.remove(&key);
                    }
                }
                None => {
                    work.insert(key, delta);
                }
            }
        }
        quotient.push((join_vars(&qev, &rest, vars), qc));
    }
    Some(combine(quotient))
}

fn normalize_root(terms: Terms, cache: &mut DetCache) -> Terms {
    let root = cache.root();
    // bucket[parity][k] holds the terms carrying root^(parity - 2k), k > 0;
    // k == 0 holds everything already polynomial in det.
    let mut buckets: [BTreeMap<usize, Terms>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let mut untouched = true;
    for (m, c) in terms {
        let (r, rest) = m.split(&root);
        let e = r.rem_euclid(2);
        let q = (r - e) / 2;
        if q > 0 {
            untouched = false;
            let expanded: Terms = cache
                .pow(q as usize)
                .iter()
                .map(|(dm, dc)| (rest.mul(dm), *dc * c))
                .collect();
            buckets[e as usize].entry(0).or_default().extend(expanded);
        } else {
            if q < 0 {
                untouched = false;
            }
            buckets[e as usize]
                .entry((-q) as usize)
                .or_default()
                .push((rest, c));
        }
    }
    let mut out = Vec::new();
    for (e, bucket) in buckets.into_iter().enumerate() {
        let Some(&top) = bucket.keys().next_back() else {
            continue;
        };
        let mut k_top = top;
        let mut p: Terms = Vec::new();
        for (k, part) in bucket {
            if k == k_top {
                p.extend(part);
            } else {
                let dp = cache.pow(k_top - k).clone();
                p.extend(mul_terms(&combine(part), &dp));
            }
        }
        let mut p = combine(p);
        if !untouched {
            let det = cache.pow(1).clone();
            while k_top > 0 && !p.is_empty() {
                match try_divide_det(&p, &det, &cache.vars) {
                    Some(q) => {
                        p = q;
                        k_top -= 1;
                    }
                    None => break,
                }
            }
        }
        let shift = e as i32 - 2 * k_top as i32;
        for (mut m, c) in p {
            m.mul_atom(&root, shift);
            out.push((m, c));
        }
    }
    combine(out)
}

fn canonical(terms: Terms) -> Expression {
    let mut terms = combine(terms);
    let roots: BTreeSet<Atom> = terms
        .iter()
        .filter(|(m, _)| m.has_root())
        .flat_map(|(m, _)| {
            m.0.iter()
                .filter(|(a, _)| a.is_root())
                .map(|(a, _)| a.clone())
        })
        .collect();
    for r in roots {
        if let Atom::Root { field, dim } = r {
            let mut cache = DetCache::new(field, dim);
            terms = normalize_root(terms, &mut cache);
        }
    }
    Expression { terms }
}

/// A canonical exact expression; see the module docs for the normal form.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expression {
    terms: Terms,
}

impl Expression {
    pub fn zero() -> Self {
        Expression { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Expression::constant(Rational::ONE)
    }

    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            Expression::zero()
        } else {
            Expression {
                terms: alloc::vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn int(n: i64) -> Self {
        Expression::constant(Rational::from(n))
    }

    pub fn atom(a: Atom) -> Self {
        Expression::monomial(Monomial::atom(a, 1), Rational::ONE)
    }

    pub fn atom_pow(a: Atom, k: i32) -> Self {
        Expression::monomial(Monomial::atom(a, k), Rational::ONE)
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        canonical(alloc::vec![(m, c)])
    }

    /// Builds the canonical form of an arbitrary term list.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(it: I) -> Self {
        canonical(it.into_iter().collect())
    }

    /// Sum of many expressions with a single canonicalization pass.
    pub fn sum<'a, I: IntoIterator<Item = &'a Expression>>(it: I) -> Self {
        let mut v = Vec::new();
        for e in it {
            v.extend(e.terms.iter().cloned());
        }
        canonical(v)
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonical forms are unique, so zero testing is emptiness.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::ZERO),
            [(m, c)] if m.is_one() => Some(*c),
            _ => None,
        }
    }

    pub fn scale(&self, c: Rational) -> Expression {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), *k * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: Rational) -> Expression {
        canonical(
            self.terms
                .iter()
                .map(|(tm, tc)| (tm.mul(m), *tc * c))
                .collect(),
        )
    }

    pub fn pow(&self, k: u32) -> Expression {
        let mut acc = Expression::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Every atom occurring in some term.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.0.iter().map(|(a, _)| a.clone()))
            .collect()
    }

    pub fn contains(&self, pred: impl Fn(&Atom) -> bool) -> bool {
        self.terms
            .iter()
            .any(|(m, _)| m.0.iter().any(|(a, _)| pred(a)))
    }

    /// Maximum derivative order over jet and aux atoms.
    pub fn jet_order(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.0.iter().map(|(a, _)| a.order()))
            .max()
            .unwrap_or(0)
    }

    /// Keeps only the terms matching `keep`.
    pub fn filter_terms(&self, keep: impl Fn(&Monomial) -> bool) -> Expression {
        canonical(
            self.terms
                .iter()
                .filter(|(m, _)| keep(m))
                .cloned()
                .collect(),
        )
    }

    /// Multiplies every term by `f(monomial)`.
    pub fn map_coefficients(&self, f: impl Fn(&Monomial) -> Rational) -> Expression {
        canonical(
            self.terms
                .iter()
                .map(|(m, c)| (m.clone(), *c * f(m)))
                .collect(),
        )
    }

    /// Applies a derivation given by its action on non-root atoms.
    ///
    /// `delta` returns `None` for atoms it annihilates. Root atoms follow
    /// `δ(s^r) = (r/2) s^(r-2) δ(det)` with `δ(det)` expanded through `delta`
    /// on the zero-order components.
    pub fn derive<F>(&self, mut delta: F) -> Result<Expression>
    where
        F: FnMut(&Atom) -> Result<Option<Expression>>,
    {
        self.derive_dyn(&mut delta)
    }

    fn derive_dyn(
        &self,
        delta: &mut dyn FnMut(&Atom) -> Result<Option<Expression>>,
    ) -> Result<Expression> {
        let mut memo: BTreeMap<Atom, Option<Expression>> = BTreeMap::new();
        let mut out: Terms = Vec::new();
        for (m, c) in &self.terms {
            for (idx, (a, k)) in m.0.iter().enumerate() {
                if !memo.contains_key(a) {
                    let d = match a {
                        Atom::Root { field, dim } => {
                            let det = det_polynomial(*field, *dim);
                            let d_det = det.derive_dyn(delta)?;
                            if d_det.is_zero() {
                                None
                            } else {
                                Some(d_det)
                            }
                        }
                        _ => delta(a)?,
                    };
                    memo.insert(a.clone(), d);
                }
                let Some(da) = memo.get(a).unwrap() else {
                    continue;
                };
                let mut rest = m.clone();
                rest.0.remove(idx);
                let (factor, rest) = if a.is_root() {
                    // (k/2) s^(k-2) δdet
                    let mut r = rest;
                    r.mul_atom(a, k - 2);
                    (*c * Rational::new(*k as i128, 2), r)
                } else {
                    let mut r = rest;
                    r.mul_atom(a, k - 1);
                    (*c * Rational::from(*k), r)
                };
                for (dm, dc) in &da.terms {
                    out.push((rest.mul(dm), factor * *dc));
                }
            }
        }
        Ok(canonical(out))
    }

    /// Formal partial derivative with respect to a coordinate atom.
    ///
    /// Jet variables with distinct sorted multi-indices are independent.
    pub fn partial(&self, wrt: &Atom) -> Result<Expression> {
        match wrt {
            Atom::Root { .. } | Atom::Param(_) => return Err(Error::NotACoordinate),
            _ => {}
        }
        self.derive(|a| {
            Ok(if a == wrt {
                Some(Expression::one())
            } else {
                None
            })
        })
    }

    /// Floating-point value under a full assignment of atom values.
    ///
    /// Root atoms must be assigned the positive square root of the determinant
    /// of the assigned components; this is checked to within `1e-9`.
    pub fn evaluate(&self, assignment: &BTreeMap<Atom, f64>) -> Result<f64> {
        let atoms = self.atoms();
        for a in &atoms {
            let Some(&v) = assignment.get(a) else {
                return Err(Error::MissingAtom(alloc::format!("{a:?}")));
            };
            if let Atom::Root { field, dim } = a {
                let det = det_polynomial(*field, *dim).evaluate(assignment)?;
                let tol = 1e-9 * det.abs().max(1.0);
                if v <= 0.0 || (v * v - det).abs() > tol {
                    return Err(Error::InconsistentRoot(alloc::format!(
                        "value {v} for det {det}"
                    )));
                }
            }
        }
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (a, k) in m.0.iter() {
                t *= powi(assignment[a], *k);
            }
            total += t;
        }
        Ok(total)
    }

    /// Exact `∫₀¹ e dt` where `t` is the formal parameter atom.
    pub fn integrate_unit(&self, t: &Atom) -> Result<Expression> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let (k, rest) = m.split(t);
            if k < 0 {
                return Err(Error::NotPolynomial(alloc::format!(
                    "parameter exponent {k}"
                )));
            }
            out.push((rest, *c / Rational::from(k + 1)));
        }
        Ok(canonical(out))
    }

    /// Multiplicative inverse, when it exists inside the expression class:
    /// monomials in root atoms, and rational multiples of `det(g)^k`.
    pub fn try_inverse(&self) -> Option<Expression> {
        if let [(m, c)] = self.terms.as_slice() {
            if m.0.iter().all(|(a, _)| a.is_root()) {
                let inv = Monomial(m.0.iter().map(|(a, k)| (a.clone(), -k)).collect());
                return Some(Expression::monomial(inv, c.recip()));
            }
            return None;
        }
        // c * det^k for some symmetric field appearing in the expression
        let fields: BTreeSet<(FieldId, u8)> = self
            .atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Jet {
                    field,
                    comp,
                    derivs,
                } if derivs.is_empty() && comp.indices().len() == 2 => {
                    Some((field, comp.indices()[1]))
                }
                _ => None,
            })
            .collect();
        let mut seen = BTreeSet::new();
        for (field, _) in &fields {
            let dim = fields
                .iter()
                .filter(|(f, _)| f == field)
                .map(|(_, d)| *d)
                .max()
                .unwrap();
            if !seen.insert(*field) {
                continue;
            }
            let det = det_polynomial(*field, dim);
            let mut p = det.clone();
            for k in 1..=4 {
                if p.len() == self.len() {
                    let c = self.terms.last().unwrap().1 / p.terms.last().unwrap().1;
                    if (self - &p.scale(c)).is_zero() {
                        let root = Atom::Root { field: *field, dim };
                        return Some(Expression::monomial(
                            Monomial::atom(root, -2 * k),
                            c.recip(),
                        ));
                    }
                }
                p = &p * &det;
            }
        }
        None
    }
}

fn powi(x: f64, k: i32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k.unsigned_abs() {
        acc *= x;
    }
    if k < 0 {
        1.0 / acc
    } else {
        acc
    }
}

fn add_terms(a: &Terms, b: &Terms, negate_b: bool) -> Terms {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let sign = |c: Rational| if negate_b { -c } else { c };
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push((b[j].0.clone(), sign(b[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                let c = a[i].1 + sign(b[j].1);
                if !c.is_zero() {
                    out.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().map(|(m, c)| (m.clone(), sign(*c))));
    out
}

fn needs_root_pass(a: &Terms, b: &Terms) -> bool {
    let neg = |t: &Terms| {
        t.iter()
            .any(|(m, _)| m.0.iter().any(|(x, k)| x.is_root() && *k < 0))
    };
    neg(a) || neg(b)
}

impl<'a> Add<&'a Expression> for &'a Expression {
    type Output = Expression;
    fn add(self, rhs: &'a Expression) -> Expression {
        let t = add_terms(&self.terms, &rhs.terms, false);
        // cancellation can expose a det factor only among negative root powers
        if needs_root_pass(&self.terms, &rhs.terms) {
            canonical(t)
        } else {
            Expression { terms: t }
        }
    }
}

impl<'a> Sub<&'a Expression> for &'a Expression {
    type Output = Expression;
    fn sub(self, rhs: &'a Expression) -> Expression {
        let t = add_terms(&self.terms, &rhs.terms, true);
        if needs_root_pass(&self.terms, &rhs.terms) {
            canonical(t)
        } else {
            Expression { terms: t }
        }
    }
}

impl<'a> Mul<&'a Expression> for &'a Expression {
    type Output = Expression;
    fn mul(self, rhs: &'a Expression) -> Expression {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.push((ma.mul(mb), *ca * *cb));
            }
        }
        canonical(out)
    }
}

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -*c)).collect(),
        }
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Expression> for Expression {
            type Output = Expression;
            fn $f(self, rhs: Expression) -> Expression {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Expression> for Expression {
            type Output = Expression;
            fn $f(self, rhs: &'a Expression) -> Expression {
                (&self).$f(rhs)
            }
        }
        impl<'a> $tr<Expression> for &'a Expression {
            type Output = Expression;
            fn $f(self, rhs: Expression) -> Expression {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{m:?}")?;
        }
        Ok(())
    }
}
