//! Truncated multivariate power series over a [`Dvr`].
//!
//! A series stores its terms of total degree ≤ D in a sorted sparse map and a
//! validity order `prec`: the true series agrees with the stored one modulo
//! 𝔐^prec, where 𝔐 = ⟨π, variables⟩ (or ⟨variables⟩ over the residue field).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::coeff::{Coeff, Dvr};
use crate::error::{Error, Result};

pub const MAX_VARS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VarSet {
    pub n: usize,
    pub has_y: bool,
}

impl VarSet {
    pub fn x(n: usize) -> Self {
        VarSet { n, has_y: false }
    }

    pub fn with_y(n: usize) -> Self {
        VarSet { n, has_y: true }
    }

    pub fn count(&self) -> usize {
        self.n + self.has_y as usize
    }

    pub fn y(&self) -> Option<usize> {
        self.has_y.then_some(self.n)
    }

    pub fn name(&self, i: usize) -> String {
        if Some(i) == self.y() {
            "y".to_string()
        } else {
            format!("x{}", i + 1)
        }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 || self.count() > MAX_VARS {
            return Err(Error::ShapeMismatch(format!(
                "need 1 <= n and at most {MAX_VARS} variables"
            )));
        }
        Ok(())
    }
}

/// Exponent vector, ordered by total degree and then by exponents so that
/// x1 < x2 < … within a degree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(pub [u16; MAX_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(i: usize) -> Self {
        let mut m = Monomial::default();
        m.0[i] = 1;
        m
    }

    pub fn from_exps(e: &[u16]) -> Self {
        let mut m = Monomial::default();
        m.0[..e.len()].copy_from_slice(e);
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut m = *self;
        for i in 0..MAX_VARS {
            m.0[i] += o.0[i];
        }
        m
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn div(&self, o: &Monomial) -> Monomial {
        let mut m = *self;
        for i in 0..MAX_VARS {
            m.0[i] -= o.0[i];
        }
        m
    }

    pub fn scale(&self, k: u16) -> Monomial {
        let mut m = *self;
        for e in m.0.iter_mut() {
            *e *= k;
        }
        m
    }

    pub fn format(&self, vars: &VarSet) -> String {
        let mut parts = Vec::new();
        for i in 0..vars.count() {
            match self.0[i] {
                0 => {}
                1 => parts.push(vars.name(i)),
                k => parts.push(format!("{}^{k}", vars.name(i))),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `nvars` variables of degree exactly `d`, in ascending order.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, i: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if i + 1 == nvars {
            cur.0[i] = left as u16;
            out.push(*cur);
            cur.0[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur.0[i] = e as u16;
            rec(nvars, i + 1, left - e, cur, out);
        }
        cur.0[i] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Monomial::one());
        }
        return out;
    }
    rec(nvars, 0, d, &mut Monomial::default(), &mut out);
    out
}

/// Audit record for lost information.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionEvent {
    pub kind: String,
    pub detail: String,
}

impl PrecisionEvent {
    pub fn new(kind: &str, detail: impl Into<String>) -> Self {
        PrecisionEvent {
            kind: kind.to_string(),
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    ring: Dvr,
    vars: VarSet,
    degree: u32,
    terms: BTreeMap<Monomial, Coeff>,
    prec: u32,
}

/// Validity order of a stored jet with no further loss.
pub fn jet_cap(ring: &Dvr, degree: u32) -> u32 {
    if ring.is_truncated() {
        ring.precision().min(degree + 1)
    } else {
        degree + 1
    }
}

impl Series {
    pub fn zero(ring: Dvr, vars: VarSet, degree: u32) -> Self {
        Series {
            ring,
            vars,
            degree,
            terms: BTreeMap::new(),
            prec: jet_cap(&ring, degree),
        }
    }

    pub fn try_zero(ring: Dvr, vars: VarSet, degree: u32) -> Result<Self> {
        vars.check()?;
        Ok(Series::zero(ring, vars, degree))
    }

    pub fn constant(ring: Dvr, vars: VarSet, degree: u32, c: Coeff) -> Self {
        Series::monomial(ring, vars, degree, Monomial::one(), c)
    }

    pub fn var(ring: Dvr, vars: VarSet, degree: u32, i: usize) -> Self {
        Series::monomial(ring, vars, degree, Monomial::var(i), ring.one())
    }

    pub fn monomial(ring: Dvr, vars: VarSet, degree: u32, m: Monomial, c: Coeff) -> Self {
        let mut s = Series::zero(ring, vars, degree);
        s.add_term(m, c);
        s
    }

    /// Same shape as `self`, no terms.
    pub fn zero_like(&self) -> Self {
        Series::zero(self.ring, self.vars, self.degree)
    }

    pub fn constant_like(&self, c: Coeff) -> Self {
        Series::constant(self.ring, self.vars, self.degree, c)
    }

    pub fn var_like(&self, i: usize) -> Self {
        Series::var(self.ring, self.vars, self.degree, i)
    }

    pub fn ring(&self) -> &Dvr {
        &self.ring
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The series is known modulo 𝔐^prec.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn set_prec(&mut self, prec: u32) {
        self.prec = prec.min(jet_cap(&self.ring, self.degree));
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Coeff)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(&Monomial::one())
    }

    /// Adds c·m in place, dropping terms above the degree bound.
    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        if m.degree() > self.degree || self.ring.is_zero(c) {
            return;
        }
        let r = self.ring;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = r.add(*o.get(), c);
                if r.is_zero(s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn same_shape(&self, o: &Series) -> Result<()> {
        if self.ring != o.ring || self.vars != o.vars || self.degree != o.degree {
            return Err(Error::ShapeMismatch(format!(
                "({:?}, D={}, M={}) vs ({:?}, D={}, M={})",
                self.vars,
                self.degree,
                self.ring.precision(),
                o.vars,
                o.degree,
                o.ring.precision()
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Series) -> Result<Series> {
        self.same_shape(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, *c);
        }
        r.prec = self.prec.min(o.prec);
        Ok(r)
    }

    pub fn neg(&self) -> Series {
        let mut r = self.zero_like();
        for (m, c) in &self.terms {
            r.terms.insert(*m, self.ring.neg(*c));
        }
        r.prec = self.prec;
        r
    }

    pub fn sub(&self, o: &Series) -> Result<Series> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: Coeff) -> Series {
        let mut r = self.zero_like();
        for (m, a) in &self.terms {
            r.add_term(*m, self.ring.mul(*a, c));
        }
        r.prec = self.prec;
        r
    }

    /// Multiplication by a monomial.
    pub fn shift(&self, m: &Monomial) -> Series {
        let mut r = self.zero_like();
        for (a, c) in &self.terms {
            r.add_term(a.mul(m), *c);
        }
        r.prec = (self.prec + m.degree()).min(jet_cap(&self.ring, self.degree));
        r
    }

    pub fn mul(&self, o: &Series) -> Result<Series> {
        self.same_shape(o)?;
        let mut r = self.zero_like();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            for (mb, cb) in &o.terms {
                if da + mb.degree() > self.degree {
                    // terms are sorted by degree
                    break;
                }
                r.add_term(ma.mul(mb), self.ring.mul(*ca, *cb));
            }
        }
        let big = u32::MAX / 4;
        let oa = self.order().unwrap_or(big);
        let ob = o.order().unwrap_or(big);
        let p = (self.prec.saturating_add(ob))
            .min(o.prec.saturating_add(oa))
            .min(self.prec + o.prec);
        r.set_prec(p);
        Ok(r)
    }

    pub fn pow(&self, k: u32) -> Result<Series> {
        let mut acc = self.constant_like(self.ring.one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// ord with respect to 𝔐: least |α| + v(coefficient); `None` for zero.
    pub fn order(&self) -> Option<u32> {
        self.terms
            .iter()
            .map(|(m, c)| m.degree() + self.ring.valuation(*c).unwrap_or(0))
            .min()
    }

    /// Least total degree of a stored term.
    pub fn var_order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    /// Formal partial derivative; validity drops by one.
    pub fn partial(&self, i: usize) -> Series {
        let mut r = self.zero_like();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut d = *m;
            d.0[i] -= 1;
            r.add_term(d, self.ring.mul_int(*c, e as i128));
        }
        r.prec = self.prec.saturating_sub(1);
        r
    }

    /// All partials in every variable of the ring.
    pub fn gradient(&self) -> Vec<Series> {
        (0..self.vars.count()).map(|i| self.partial(i)).collect()
    }

    pub fn truncate(&self, d: u32) -> Series {
        let mut r = Series::zero(self.ring, self.vars, d);
        for (m, c) in &self.terms {
            r.add_term(*m, *c);
        }
        r.set_prec(self.prec);
        r
    }

    /// Re-labels the degree bound to `d` (≥ current); validity is unchanged.
    pub fn widen(&self, d: u32) -> Series {
        if d <= self.degree {
            return self.truncate(d);
        }
        let mut r = self.clone();
        r.degree = d;
        r
    }

    /// Moves to another ring of the same spec (reduction or canonical lift).
    pub fn change_ring(&self, ring: Dvr) -> Series {
        let mut r = Series::zero(ring, self.vars, self.degree);
        for (m, c) in &self.terms {
            r.add_term(*m, ring.coerce(*c));
        }
        r.set_prec(self.prec);
        r
    }

    /// Reduction modulo π into F_p[[vars]].
    pub fn residue(&self) -> Result<Series> {
        let k = Dvr::residue_field(self.ring.p())?;
        let mut r = Series::zero(k, self.vars, self.degree);
        for (m, c) in &self.terms {
            r.add_term(*m, k.from_int(self.ring.residue(*c) as i128));
        }
        r.set_prec(self.prec);
        Ok(r)
    }

    /// Adds the variable y (or re-homes into a larger variable set); x-indices
    /// are kept.
    pub fn embed(&self, vars: VarSet) -> Result<Series> {
        if vars.n < self.vars.n || (self.vars.has_y && !vars.has_y) {
            return Err(Error::ShapeMismatch("cannot embed into a smaller variable set".into()));
        }
        let mut r = Series::zero(self.ring, vars, self.degree);
        for (m, c) in &self.terms {
            let mut e = Monomial::default();
            e.0[..self.vars.n].copy_from_slice(&m.0[..self.vars.n]);
            if let (Some(a), Some(b)) = (self.vars.y(), vars.y()) {
                e.0[b] = m.0[a];
            }
            r.add_term(e, *c);
        }
        r.prec = self.prec;
        Ok(r)
    }

    /// The tilde lift: every term u·π^n·x^α becomes u·y^n·x^α.
    pub fn tilde_lift(&self) -> Result<(Series, Vec<PrecisionEvent>)> {
        if self.vars.has_y {
            return Err(Error::ShapeMismatch("tilde lift expects a series without y".into()));
        }
        let vars = VarSet::with_y(self.vars.n);
        let y = vars.n;
        let mut r = Series::zero(self.ring, vars, self.degree);
        let mut events = Vec::new();
        for (m, c) in &self.terms {
            let (v, u) = self
                .ring
                .unit_decompose(*c)
                .ok_or_else(|| Error::PrecisionExhausted("coefficient vanishes at working precision".into()))?;
            let mut e = *m;
            e.0[y] = v as u16;
            if e.degree() > self.degree {
                events.push(PrecisionEvent::new(
                    "tilde-truncated",
                    format!("term {} lifted beyond degree {}", e.format(&vars), self.degree),
                ));
                continue;
            }
            r.add_term(e, u);
        }
        r.set_prec(self.prec);
        Ok((r, events))
    }

    /// Substitutes y := π and drops y.
    pub fn project_pr(&self) -> Result<Series> {
        let y = self
            .vars
            .y()
            .ok_or_else(|| Error::ShapeMismatch("projection expects a series with y".into()))?;
        let vars = VarSet::x(self.vars.n);
        let mut r = Series::zero(self.ring, vars, self.degree);
        for (m, c) in &self.terms {
            let mut e = *m;
            let k = e.0[y];
            e.0[y] = 0;
            r.add_term(e, self.ring.mul(*c, self.ring.pi_pow(k as u32)));
        }
        r.set_prec(self.prec);
        Ok(r)
    }

    /// Composition f(φ_1, …, φ_k) where `images[i]` replaces variable i.
    pub fn substitute(&self, images: &[Series]) -> Result<Series> {
        if images.len() != self.vars.count() {
            return Err(Error::ShapeMismatch("assignment must cover every variable".into()));
        }
        let target = &images[0];
        for im in images {
            im.same_shape(target)?;
            if target.ring != self.ring {
                return Err(Error::ShapeMismatch("substitution across rings".into()));
            }
            if self.ring.is_unit(im.constant_term()) {
                return Err(Error::OrderViolation);
            }
        }
        let mut powers: Vec<Vec<Series>> = Vec::with_capacity(images.len());
        for (i, im) in images.iter().enumerate() {
            let top = self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0);
            let mut v = vec![target.constant_like(self.ring.one())];
            for k in 1..=top as usize {
                let next = v[k - 1].mul(im)?;
                v.push(next);
            }
            powers.push(v);
        }
        let mut r = target.zero_like();
        let mut worst = target.prec;
        for (m, c) in &self.terms {
            let mut t = target.constant_like(*c);
            for (i, pw) in powers.iter().enumerate() {
                let e = m.0[i] as usize;
                if e > 0 {
                    t = t.mul(&pw[e])?;
                }
            }
            worst = worst.min(t.prec);
            for (mm, cc) in &t.terms {
                r.add_term(*mm, *cc);
            }
        }
        r.set_prec(worst.min(self.prec));
        Ok(r)
    }

    /// Membership in 𝔞_r = Σ_{i<r} ⟨π^i⟩·⟨vars⟩^{r−i}.
    pub fn in_fraktur_a(&self, r: u32) -> bool {
        self.terms.iter().all(|(m, c)| {
            let d = m.degree();
            d >= 1 && d + self.ring.valuation(*c).unwrap_or(0) >= r
        })
    }

    /// Terms of total degree exactly d.
    pub fn homogeneous_part(&self, d: u32) -> Series {
        let mut r = self.zero_like();
        for (m, c) in self.terms.iter().filter(|(m, _)| m.degree() == d) {
            r.add_term(*m, *c);
        }
        r.prec = self.prec;
        r
    }

    /// Inverse of a series with unit constant term (Newton iteration).
    pub fn inverse_unit(&self) -> Result<Series> {
        let c0 = self.ring.inv_unit(self.constant_term())?;
        let two = self.constant_like(self.ring.from_int(2));
        let mut x = self.constant_like(c0);
        let mut steps = 1u32;
        while steps <= self.degree + 1 {
            x = x.mul(&two.sub(&self.mul(&x)?)?)?;
            steps *= 2;
        }
        x = x.mul(&two.sub(&self.mul(&x)?)?)?;
        x.set_prec(self.prec);
        Ok(x)
    }

    /// Square root of a series with unit constant term whose residue is a
    /// square, normalized by the canonical constant root.
    pub fn sqrt_unit(&self) -> Result<Series> {
        let b0 = self.ring.hensel_sqrt(self.constant_term())?;
        let half = self.ring.inv_unit(self.ring.from_int(2))?;
        let mut b = self.constant_like(b0);
        let rounds = 2 * (self.degree + self.ring.precision()) + 4;
        for _ in 0..rounds {
            let next = b.add(&self.mul(&b.inverse_unit()?)?)?.scale(half);
            if next.terms == b.terms {
                break;
            }
            b = next;
        }
        b.set_prec(self.prec);
        Ok(b)
    }

    /// Random series with coefficients drawn term by term, constant term in
    /// 𝔪 when `local` is set.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        ring: Dvr,
        vars: VarSet,
        degree: u32,
        max_deg: u32,
        density: f64,
        local: bool,
    ) -> Series {
        let mut s = Series::zero(ring, vars, degree);
        for d in 0..=max_deg.min(degree) {
            for m in monomials_of_degree(vars.count(), d) {
                if rng.gen_bool(density) {
                    let c = if d == 0 && local {
                        ring.random_nonunit(rng)
                    } else {
                        ring.random(rng)
                    };
                    s.add_term(m, c);
                }
            }
        }
        s
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mut cs = self.ring.format(*c);
            let neg = cs.starts_with('-') && !cs.contains(' ');
            if neg {
                cs.remove(0);
            }
            if cs.contains(' ') {
                cs = format!("({cs})");
            }
            let body = match (cs.as_str(), *m == Monomial::one()) {
                (_, true) => cs.clone(),
                ("1", false) => m.format(&self.vars),
                (_, false) => format!("{cs}*{}", m.format(&self.vars)),
            };
            if first {
                write!(f, "{}{body}", if neg { "-" } else { "" })?;
            } else {
                write!(f, " {} {body}", if neg { "-" } else { "+" })?;
            }
            first = false;
        }
        Ok(())
    }
}

/// A finite generator list in a common ambient ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealPresentation {
    vars: VarSet,
    generators: Vec<Series>,
}

impl IdealPresentation {
    /// Generators must share ring and variables; degree bounds are widened to
    /// the largest one.
    pub fn new(generators: Vec<Series>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::ShapeMismatch("an ideal needs at least one generator".into()))?;
        let (ring, vars) = (first.ring, first.vars);
        let d = generators.iter().map(|g| g.degree).max().unwrap_or(0);
        for g in &generators {
            if g.ring != ring || g.vars != vars {
                return Err(Error::ShapeMismatch("generators live in different rings".into()));
            }
        }
        let generators = generators.into_iter().map(|g| g.widen(d)).collect();
        Ok(IdealPresentation { vars, generators })
    }

    pub fn generators(&self) -> &[Series] {
        &self.generators
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn ring(&self) -> &Dvr {
        self.generators[0].ring()
    }

    pub fn degree(&self) -> u32 {
        self.generators[0].degree()
    }

    /// Smallest validity order among generators.
    pub fn prec(&self) -> u32 {
        self.generators.iter().map(|g| g.prec).min().unwrap_or(0)
    }

    pub fn with(&self, extra: &[Series]) -> Result<Self> {
        let mut g = self.generators.clone();
        g.extend(extra.iter().cloned());
        IdealPresentation::new(g)
    }

    pub fn sum(&self, other: &IdealPresentation) -> Result<Self> {
        self.with(&other.generators)
    }

    /// Product ideal, generators expanded pairwise.
    pub fn product(&self, other: &IdealPresentation) -> Result<Self> {
        let mut g = Vec::with_capacity(self.generators.len() * other.generators.len());
        for a in &self.generators {
            for b in &other.generators {
                let m = a.mul(b)?;
                if !m.is_zero() && !g.contains(&m) {
                    g.push(m);
                }
            }
        }
        if g.is_empty() {
            g.push(self.generators[0].zero_like());
        }
        IdealPresentation::new(g)
    }

    /// I^k by expansion; fails when the generator count would exceed `cap`.
    pub fn power(&self, k: u32, cap: usize) -> Result<Self> {
        let mut acc = IdealPresentation::new(vec![self.generators[0].constant_like(self.ring().one())])?;
        for _ in 0..k {
            let count = acc.generators.len() * self.generators.len();
            if count > cap {
                return Err(Error::CombinatorialBlowup { count, cap });
            }
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    pub fn truncate(&self, d: u32) -> Self {
        IdealPresentation {
            vars: self.vars,
            generators: self.generators.iter().map(|g| g.truncate(d)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::DvrSpec;

    fn ring() -> Dvr {
        Dvr::unramified(5, 6).unwrap()
    }

    fn x(r: Dvr, vars: VarSet, d: u32, i: usize) -> Series {
        Series::var(r, vars, d, i)
    }

    #[test]
    fn truncated_products() {
        let r = ring();
        let v = VarSet::x(1);
        let xx = x(r, v, 3, 0);
        let sq = xx.mul(&xx).unwrap();
        assert_eq!(sq.terms().count(), 1);
        assert_eq!(sq.coeff(&Monomial::from_exps(&[2])), r.one());
        assert!(xx.pow(3).unwrap().mul(&xx).unwrap().is_zero());
        let pix = xx.scale(r.pi());
        let a = pix.add(&Series::constant(r, v, 3, r.one())).unwrap();
        let b = pix.neg().add(&Series::constant(r, v, 3, r.one())).unwrap();
        assert_eq!(a.add(&b).unwrap(), Series::constant(r, v, 3, r.from_int(2)));
    }

    #[test]
    fn partial_order_jump() {
        let r = ring();
        let v = VarSet::x(1);
        let f = x(r, v, 8, 0).pow(5).unwrap();
        let d = f.partial(0);
        assert_eq!(d.order(), Some(5));
        assert!(Series::constant(r, v, 8, r.from_int(7)).partial(0).is_zero());
    }

    #[test]
    fn tilde_examples() {
        let v = Dvr::new(&DvrSpec::eisenstein(3, vec![-3, 0, 1]), 6).unwrap();
        let vars = VarSet::x(1);
        let one_pi = v.add(v.one(), v.pi());
        let mut f = Series::constant(v, vars, 6, one_pi);
        f.add_term(Monomial::var(0), v.pi());
        let (t, ev) = f.tilde_lift().unwrap();
        assert!(ev.is_empty());
        assert_eq!(t.coeff(&Monomial::one()), one_pi);
        assert_eq!(t.coeff(&Monomial::from_exps(&[1, 1])), v.one());
        assert_eq!(t.project_pr().unwrap(), f);
    }

    #[test]
    fn pr_of_y_minus_pi() {
        let r = ring();
        let vars = VarSet::with_y(1);
        let f = x(r, vars, 4, 1).sub(&Series::constant(r, vars, 4, r.pi())).unwrap();
        assert!(f.project_pr().unwrap().is_zero());
    }

    #[test]
    fn substitute_shift() {
        let r = ring();
        let v = VarSet::x(1);
        let xx = x(r, v, 4, 0);
        let f = xx.pow(2).unwrap();
        let img = xx.add(&Series::constant(r, v, 4, r.pi())).unwrap();
        let g = f.substitute(&[img]).unwrap();
        let mut want = Series::zero(r, v, 4);
        want.add_term(Monomial::from_exps(&[2]), r.one());
        want.add_term(Monomial::from_exps(&[1]), r.from_int(10));
        want.add_term(Monomial::one(), r.from_int(25));
        assert_eq!(g.terms().collect::<Vec<_>>(), want.terms().collect::<Vec<_>>());
        let bad = xx.add(&Series::constant(r, v, 4, r.one())).unwrap();
        assert_eq!(f.substitute(&[bad]), Err(Error::OrderViolation));
    }

    #[test]
    fn fraktur_a_examples() {
        let r = ring();
        let vars = VarSet::with_y(2);
        assert!(x(r, vars, 6, 1).pow(3).unwrap().in_fraktur_a(3));
        assert!(!Series::constant(r, vars, 6, r.pi_pow(3)).in_fraktur_a(3));
        assert!(x(r, vars, 6, 0).scale(r.pi_pow(2)).in_fraktur_a(3));
    }

    #[test]
    fn unit_sqrt_and_inverse() {
        let r = Dvr::unramified(7, 5).unwrap();
        let v = VarSet::x(2);
        let mut u = Series::constant(r, v, 6, r.from_int(2));
        u.add_term(Monomial::var(0), r.from_int(3));
        u.add_term(Monomial::from_exps(&[1, 1]), r.from_int(5));
        let inv = u.inverse_unit().unwrap();
        assert_eq!(u.mul(&inv).unwrap(), u.constant_like(r.one()));
        let s = u.sqrt_unit().unwrap();
        assert_eq!(
            s.mul(&s).unwrap().terms().collect::<Vec<_>>(),
            u.terms().collect::<Vec<_>>()
        );
    }

    #[test]
    fn monomial_enumeration() {
        let ms = monomials_of_degree(3, 2);
        assert_eq!(ms.len(), 6);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ms[0], Monomial::from_exps(&[2, 0, 0]));
    }
}
