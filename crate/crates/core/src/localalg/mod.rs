//! Colength engine: membership and length of V[[vars]]/I computed in the jet
//! space V/π^M[vars]/⟨vars⟩^{D+1}.
//!
//! The jet of I is put into Howell form (echelon form over the chain ring,
//! closed under annihilators), which answers membership by reduction and gives
//! the length of the jet quotient directly. A jet length equals the true
//! length once some power 𝔐^c lies in the jet of I with c+1 within the
//! validity order of the generators and of the truncation (Nakayama); that
//! power is the finiteness certificate.

pub mod mora;
pub mod snf;

use std::collections::HashMap;

use serde::Serialize;

use crate::coeff::{Coeff, Dvr};
use crate::error::{Bounds, Error, Result};
use crate::series::{jet_cap, monomials_of_degree, IdealPresentation, Monomial, Series, VarSet};

pub type SparseVec = Vec<(u32, Coeff)>;

/// Monomial basis of a jet space, sorted in the series order.
#[derive(Clone, Debug)]
pub struct JetSpace {
    pub ring: Dvr,
    pub vars: VarSet,
    pub degree: u32,
    pub basis: Vec<Monomial>,
    index: HashMap<Monomial, u32>,
}

impl JetSpace {
    pub fn new(ring: Dvr, vars: VarSet, degree: u32) -> Self {
        let mut basis = Vec::new();
        for d in 0..=degree {
            basis.extend(monomials_of_degree(vars.count(), d));
        }
        let index = basis.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
        JetSpace {
            ring,
            vars,
            degree,
            basis,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn vector(&self, s: &Series) -> SparseVec {
        s.terms()
            .filter(|(m, _)| m.degree() <= self.degree)
            .map(|(m, c)| (self.index[m], self.ring.coerce(*c)))
            .collect()
    }

    fn shifted(&self, s: &Series, by: &Monomial) -> SparseVec {
        s.terms()
            .filter(|(m, _)| m.degree() + by.degree() <= self.degree)
            .map(|(m, c)| (self.index[&m.mul(by)], *c))
            .collect()
    }

    /// Vectors of all multiples g·m that survive truncation.
    pub fn multiples(&self, gens: &[Series]) -> Vec<SparseVec> {
        let mut out = Vec::new();
        for g in gens {
            let Some(o) = g.var_order() else { continue };
            for m in self.basis.iter().take_while(|m| m.degree() + o <= self.degree) {
                out.push(self.shifted(g, m));
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
struct Row {
    entries: SparseVec,
    val: u32,
}

/// Howell form of a submodule of (V/π^M)^n.
#[derive(Clone, Debug)]
pub struct Echelon {
    ring: Dvr,
    rows: Vec<Option<Row>>,
}

fn axpy(ring: &Dvr, w: &[(u32, Coeff)], s: Coeff, r: &[(u32, Coeff)]) -> SparseVec {
    // w − s·r
    let mut out = Vec::with_capacity(w.len() + r.len());
    let (mut i, mut j) = (0, 0);
    while i < w.len() || j < r.len() {
        let take_w = j >= r.len() || (i < w.len() && w[i].0 < r[j].0);
        let take_r = i >= w.len() || (j < r.len() && r[j].0 < w[i].0);
        let (col, val) = if take_w {
            i += 1;
            (w[i - 1].0, w[i - 1].1)
        } else if take_r {
            j += 1;
            (r[j - 1].0, ring.neg(ring.mul(s, r[j - 1].1)))
        } else {
            i += 1;
            j += 1;
            (w[i - 1].0, ring.sub(w[i - 1].1, ring.mul(s, r[j - 1].1)))
        };
        if !ring.is_zero(val) {
            out.push((col, val));
        }
    }
    out
}

fn scale_vec(ring: &Dvr, v: &[(u32, Coeff)], s: Coeff) -> SparseVec {
    v.iter()
        .map(|&(c, a)| (c, ring.mul(a, s)))
        .filter(|(_, a)| !ring.is_zero(*a))
        .collect()
}

impl Echelon {
    pub fn new(ring: Dvr, ncols: usize) -> Self {
        Echelon {
            ring,
            rows: vec![None; ncols],
        }
    }

    pub fn ncols(&self) -> usize {
        self.rows.len()
    }

    pub fn rank(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    pub fn insert(&mut self, v: SparseVec) {
        let ring = self.ring;
        let m = ring.precision();
        let mut stack = vec![v];
        while let Some(mut w) = stack.pop() {
            while let Some(&(c, a)) = w.first() {
                let (va, u) = ring.unit_decompose(a).expect("stored entries are nonzero");
                match &self.rows[c as usize] {
                    Some(row) if va >= row.val => {
                        let s = ring.mul(u, ring.pi_pow(va - row.val));
                        w = axpy(&ring, &w, s, &row.entries);
                    }
                    _ => {
                        let w = scale_vec(&ring, &w, ring.inv_unit(u).expect("unit"));
                        if va > 0 {
                            let ann = scale_vec(&ring, &w, ring.pi_pow(m - va));
                            if !ann.is_empty() {
                                stack.push(ann);
                            }
                        }
                        if let Some(old) = self.rows[c as usize].replace(Row { entries: w, val: va }) {
                            stack.push(old.entries);
                        }
                        break;
                    }
                }
            }
        }
    }

    /// Remainder of `v` after reduction; zero iff `v` lies in the span.
    pub fn reduce(&self, mut w: SparseVec) -> SparseVec {
        let ring = self.ring;
        while let Some(&(c, a)) = w.first() {
            let (va, u) = ring.unit_decompose(a).expect("nonzero");
            match &self.rows[c as usize] {
                Some(row) if va >= row.val => {
                    let s = ring.mul(u, ring.pi_pow(va - row.val));
                    w = axpy(&ring, &w, s, &row.entries);
                }
                _ => return w,
            }
        }
        w
    }

    pub fn contains(&self, w: SparseVec) -> bool {
        self.reduce(w).is_empty()
    }

    /// Length of (V/π^M)^n modulo the span.
    pub fn quotient_length(&self) -> u64 {
        let m = self.ring.precision() as u64;
        let sub: u64 = self.rows.iter().flatten().map(|r| m - r.val as u64).sum();
        self.rows.len() as u64 * m - sub
    }
}

/// Finiteness certificate of a length computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// Smallest c with 𝔐^c inside the ideal.
    pub m_power: u32,
    /// Smallest N with π^N inside the ideal, when the ring is truncated.
    pub n_pi: Option<u32>,
    /// Degree bound at which the value was certified.
    pub degree: u32,
    pub precision: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LengthResult {
    pub length: u64,
    pub certified: bool,
    pub certificate: Certificate,
}

/// The jet of an ideal at a fixed degree, in Howell form.
#[derive(Clone, Debug)]
pub struct JetIdeal {
    pub space: JetSpace,
    pub echelon: Echelon,
    /// Validity order of the computation: generators and truncation are
    /// exact modulo 𝔐^cap.
    pub cap: u32,
    pub certificate: Option<Certificate>,
}

impl JetIdeal {
    pub fn build(ideal: &IdealPresentation, degree: u32) -> Self {
        let ideal = ideal.truncate(degree);
        let ring = *ideal.ring();
        let space = JetSpace::new(ring, ideal.vars(), degree);
        let mut vecs = space.multiples(ideal.generators());
        vecs.sort_by_key(|v| (v.first().map(|e| e.0), v.len()));
        let mut echelon = Echelon::new(ring, space.dim());
        for v in vecs {
            if !v.is_empty() {
                echelon.insert(v);
            }
        }
        let cap = ideal.prec().min(jet_cap(&ring, degree));
        let mut j = JetIdeal {
            space,
            echelon,
            cap,
            certificate: None,
        };
        j.certificate = j.find_certificate();
        j
    }

    fn monomial_in(&self, j: u32, m: &Monomial) -> bool {
        let ring = self.space.ring;
        let s = Series::monomial(ring, self.space.vars, self.space.degree, *m, ring.pi_pow(j));
        self.echelon.contains(self.space.vector(&s))
    }

    fn find_certificate(&self) -> Option<Certificate> {
        let ring = self.space.ring;
        let nv = self.space.vars.count();
        let mut m_power = None;
        for c in 0..self.cap {
            let mut all = true;
            'deg: for d in 0..=c {
                let j = c - d;
                if !ring.is_truncated() && j > 0 {
                    continue;
                }
                for m in monomials_of_degree(nv, d) {
                    if !self.monomial_in(j, &m) {
                        all = false;
                        break 'deg;
                    }
                }
            }
            if all {
                m_power = Some(c);
                break;
            }
        }
        let c = m_power?;
        let n_pi = if ring.is_truncated() {
            (0..=c).find(|&n| self.monomial_in(n, &Monomial::one()))
        } else {
            None
        };
        Some(Certificate {
            m_power: c,
            n_pi,
            degree: self.space.degree,
            precision: ring.precision(),
        })
    }

    pub fn length(&self) -> u64 {
        self.echelon.quotient_length()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }

    /// Jet-level membership; `exact` reports whether the answer is known to
    /// hold for the untruncated ideal.
    pub fn membership(&self, f: &Series) -> Membership {
        let f = f.widen(self.space.degree.max(f.degree())).truncate(self.space.degree);
        let member = self.echelon.contains(self.space.vector(&f));
        let exact = match self.certificate {
            Some(c) => f.prec() >= c.m_power,
            None => false,
        };
        Membership { member, exact }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub exact: bool,
}

fn degree_schedule(max: u32) -> Vec<u32> {
    let mut v = Vec::new();
    let mut d = max.min(4);
    while d < max {
        v.push(d);
        d += 2;
    }
    v.push(max);
    v
}

/// Builds jets of increasing degree until one is certified; falls back to
/// the full degree bound.
pub fn analyze(ideal: &IdealPresentation) -> JetIdeal {
    let mut last = None;
    for d in degree_schedule(ideal.degree()) {
        let j = JetIdeal::build(ideal, d);
        if j.is_certified() {
            return j;
        }
        last = Some(j);
    }
    last.expect("schedule is nonempty")
}

fn bounds_of(ideal: &IdealPresentation, n_max: u32) -> Bounds {
    Bounds {
        degree: ideal.degree(),
        precision: ideal.ring().precision(),
        n_max,
    }
}

/// length(V[[vars]]/I) when a finiteness certificate is found.
pub fn quotient_length(ideal: &IdealPresentation) -> Result<LengthResult> {
    let j = analyze(ideal);
    match j.certificate {
        Some(c) => Ok(LengthResult {
            length: j.length(),
            certified: true,
            certificate: c,
        }),
        None => Err(Error::NotFiniteUpToBounds(bounds_of(ideal, 0))),
    }
}

/// f ∈ I + 𝔐^{D+1} + π^M.
pub fn contains(ideal: &IdealPresentation, f: &Series) -> Result<bool> {
    if f.ring() != ideal.ring() || f.vars() != ideal.vars() {
        return Err(Error::ShapeMismatch("element and ideal in different rings".into()));
    }
    Ok(JetIdeal::build(ideal, ideal.degree()).membership(f).member)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PowerMembership {
    pub n: u32,
    pub exact: bool,
}

/// Smallest N ≤ n_max with f^N ∈ I.
pub fn power_membership(ideal: &IdealPresentation, f: &Series, n_max: u32) -> Result<PowerMembership> {
    let jet = analyze(ideal);
    power_membership_in(&jet, f, n_max)
}

pub fn power_membership_in(jet: &JetIdeal, f: &Series, n_max: u32) -> Result<PowerMembership> {
    let f = f.widen(jet.space.degree.max(f.degree())).truncate(jet.space.degree);
    let mut pw = f.constant_like(f.ring().one());
    for n in 0..=n_max {
        if n > 0 {
            pw = pw.mul(&f)?;
        }
        let m = jet.membership(&pw);
        if m.exact {
            if m.member {
                return Ok(PowerMembership { n, exact: true });
            }
            continue;
        }
        // without a certificate, powers that vanish in the jet prove nothing
        if pw.order().is_none_or(|o| o >= jet.cap) {
            break;
        }
        if m.member {
            return Ok(PowerMembership { n, exact: false });
        }
    }
    Err(Error::NotFoundUpTo(n_max))
}

/// A ⊆ B, checked generator by generator at the jet level.
pub fn ideal_power_containment(a: &IdealPresentation, b: &IdealPresentation) -> Result<bool> {
    let jet = analyze(b);
    Ok(a.generators().iter().all(|g| jet.membership(g).member))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, m: u32) -> Dvr {
        Dvr::unramified(p, m).unwrap()
    }

    fn ideal(gens: Vec<Series>) -> IdealPresentation {
        IdealPresentation::new(gens).unwrap()
    }

    #[test]
    fn lengths_of_small_ideals() {
        let r = ring(3, 6);
        let v = VarSet::x(1);
        let x = Series::var(r, v, 8, 0);
        let p = x.constant_like(r.pi());
        assert_eq!(quotient_length(&ideal(vec![p.clone(), x.clone()])).unwrap().length, 1);
        assert_eq!(
            quotient_length(&ideal(vec![p.pow(2).unwrap(), x.clone()]))
                .unwrap()
                .length,
            2
        );
        assert_eq!(
            quotient_length(&ideal(vec![p.clone(), x.pow(3).unwrap()]))
                .unwrap()
                .length,
            3
        );
        assert!(matches!(
            quotient_length(&ideal(vec![x.clone()])),
            Err(Error::NotFiniteUpToBounds(_))
        ));
    }

    #[test]
    fn membership_examples() {
        let r = ring(3, 6);
        let v = VarSet::x(1);
        let x = Series::var(r, v, 8, 0);
        let p = x.constant_like(r.pi());
        assert!(contains(&ideal(vec![x.clone(), p.clone()]), &x.scale(r.pi())).unwrap());
        let f = x.pow(2).unwrap().add(&p.pow(2).unwrap()).unwrap();
        assert!(!contains(&ideal(vec![f.clone(), x.pow(3).unwrap()]), &x).unwrap());
        let pm = power_membership(&ideal(vec![p.pow(2).unwrap(), x.clone()]), &p, 16).unwrap();
        assert_eq!(pm, PowerMembership { n: 2, exact: true });
        assert_eq!(
            power_membership(&ideal(vec![p.clone()]), &x, 16),
            Err(Error::NotFoundUpTo(16))
        );
    }

    #[test]
    fn power_containment_examples() {
        let r = ring(5, 6);
        let v = VarSet::x(1);
        let x = Series::var(r, v, 8, 0);
        let p = x.constant_like(r.pi());
        let xi = ideal(vec![x.clone()]);
        let x2 = ideal(vec![x.pow(2).unwrap()]);
        assert!(ideal_power_containment(&xi.power(2, 100).unwrap(), &x2).unwrap());
        let m = ideal(vec![x.clone(), p]);
        assert!(!ideal_power_containment(&m.power(2, 100).unwrap(), &x2).unwrap());
    }
}
