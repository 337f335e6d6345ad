//! p-derivations on V[[x]] for unramified V, and the derivation ∂/∂π for
//! ramified V.

use std::collections::HashMap;

use crate::coeff::{Coeff, Dvr};
use crate::error::{Error, Result};
use crate::series::{IdealPresentation, Monomial, Series};

/// The p-derivation determined by δ(x_i) = values[i].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PDerivation {
    pub values: Vec<Series>,
}

impl PDerivation {
    pub fn new(values: Vec<Series>) -> Result<Self> {
        if let Some(first) = values.first() {
            for v in &values {
                v.same_shape(first)?;
            }
        }
        Ok(PDerivation { values })
    }

    /// δ₀, with δ₀(x_i) = 0.
    pub fn zero_like(f: &Series) -> Self {
        PDerivation {
            values: (0..f.vars().count()).map(|_| f.zero_like()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    fn check(&self, f: &Series) -> Result<()> {
        if f.ring().is_ramified() {
            return Err(Error::RamifiedUnsupported);
        }
        if f.ring().precision() < 2 {
            return Err(Error::PrecisionExhausted("δ needs precision at least 2".into()));
        }
        if self.values.len() != f.vars().count() {
            return Err(Error::ShapeMismatch("one δ-value per variable required".into()));
        }
        for v in &self.values {
            v.same_shape(f)?;
        }
        Ok(())
    }
}

fn binomial(n: u64, k: u64) -> i128 {
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r
}

/// C_p(f, g) = (f^p + g^p − (f+g)^p)/p, evaluated through its integer
/// binomial expansion.
pub fn c_p(f: &Series, g: &Series) -> Result<Series> {
    f.same_shape(g)?;
    let p = f.ring().p();
    let mut fp = vec![f.constant_like(f.ring().one())];
    let mut gp = vec![g.constant_like(g.ring().one())];
    for j in 1..p as usize {
        fp.push(fp[j - 1].mul(f)?);
        gp.push(gp[j - 1].mul(g)?);
    }
    let mut acc = f.zero_like();
    for j in 1..p as usize {
        let c = -binomial(p, j as u64) / p as i128;
        let t = fp[j].mul(&gp[p as usize - j])?.scale(f.ring().from_int(c));
        acc = acc.add(&t)?;
    }
    Ok(acc)
}

/// Frob₀: coefficients fixed, x^α ↦ x^{pα}.
pub fn frob0(f: &Series) -> Result<Series> {
    if f.ring().is_ramified() {
        return Err(Error::RamifiedUnsupported);
    }
    let p = f.ring().p() as u16;
    let mut r = f.zero_like();
    for (m, c) in f.terms() {
        r.add_term(m.scale(p), *c);
    }
    r.set_prec(f.prec());
    Ok(r)
}

/// δ(c) = (c − c^p)/p for a scalar; lives at precision M−1.
pub fn delta_scalar(ring: &Dvr, c: Coeff) -> Result<(Dvr, Coeff)> {
    let num = ring.sub(ring.frob(c)?, ring.pow(c, ring.p() as u32));
    ring.div_p(num)
}

struct Evaluator<'a> {
    delta: &'a PDerivation,
    lower: Dvr,
    memo: HashMap<Monomial, Series>,
    template: Series,
}

impl Evaluator<'_> {
    /// δ(x^α) at full precision, by the product rule.
    fn monomial(&mut self, m: &Monomial) -> Result<Series> {
        if let Some(s) = self.memo.get(m) {
            return Ok(s.clone());
        }
        let r = if *m == Monomial::one() {
            self.template.zero_like()
        } else {
            let i = m.0.iter().position(|&e| e > 0).unwrap();
            let rest = m.div(&Monomial::var(i));
            let ring = *self.template.ring();
            let p = ring.p() as u32;
            let d_rest = self.monomial(&rest)?;
            let xi_p = Series::monomial(
                ring,
                self.template.vars(),
                self.template.degree(),
                Monomial::var(i).scale(p as u16),
                ring.one(),
            );
            let rest_p = Series::monomial(
                ring,
                self.template.vars(),
                self.template.degree(),
                rest.scale(p as u16),
                ring.one(),
            );
            let a = &self.delta.values[i];
            xi_p.mul(&d_rest)?
                .add(&rest_p.mul(a)?)?
                .add(&a.mul(&d_rest)?.scale(ring.pi()))?
        };
        self.memo.insert(*m, r.clone());
        Ok(r)
    }

    /// δ(c·x^α) at precision M−1.
    fn term(&mut self, m: &Monomial, c: Coeff) -> Result<Series> {
        let ring = *self.template.ring();
        let p = ring.p() as u32;
        let dm = self.monomial(m)?;
        let (_, dc) = delta_scalar(&ring, c)?;
        let lower = self.lower;
        let cp = ring.pow(c, p);
        let part1 = dm.scale(cp).change_ring(lower);
        let xp = Series::monomial(
            lower,
            self.template.vars(),
            self.template.degree(),
            m.scale(p as u16),
            dc,
        );
        let part3 = dm.change_ring(lower).scale(lower.mul(dc, lower.pi()));
        part1.add(&xp)?.add(&part3)
    }

    /// Folds a slice of terms with the sum rule; returns (Σ, δ(Σ)).
    fn fold(&mut self, terms: &[(Monomial, Coeff)]) -> Result<(Series, Series)> {
        let ring = *self.template.ring();
        match terms.len() {
            0 => Ok((
                self.template.zero_like(),
                self.template.zero_like().change_ring(self.lower),
            )),
            1 => {
                let (m, c) = terms[0];
                let s = Series::monomial(ring, self.template.vars(), self.template.degree(), m, c);
                Ok((s, self.term(&m, c)?))
            }
            n => {
                let (a, da) = self.fold(&terms[..n / 2])?;
                let (b, db) = self.fold(&terms[n / 2..])?;
                let cross = c_p(&a, &b)?.change_ring(self.lower);
                Ok((a.add(&b)?, da.add(&db)?.add(&cross)?))
            }
        }
    }
}

fn evaluate(delta: &PDerivation, f: &Series, terms: &[(Monomial, Coeff)]) -> Result<Series> {
    delta.check(f)?;
    let lower = f.ring().with_precision(f.ring().precision() - 1)?;
    let mut ev = Evaluator {
        delta,
        lower,
        memo: HashMap::new(),
        template: f.zero_like(),
    };
    let (_, mut d) = ev.fold(terms)?;
    let mut prec = f.prec().saturating_sub(1);
    for v in &delta.values {
        prec = prec.min(v.prec());
    }
    d.set_prec(prec);
    Ok(d)
}

/// δ(f) at precision M−1, by monomial decomposition folded with the sum rule
/// in the stored term order.
pub fn delta_eval(delta: &PDerivation, f: &Series) -> Result<Series> {
    let terms: Vec<(Monomial, Coeff)> = f.terms().map(|(m, c)| (*m, *c)).collect();
    evaluate(delta, f, &terms)
}

/// As [`delta_eval`] but folding the terms in the given order.
pub fn delta_eval_ordered(delta: &PDerivation, f: &Series, order: &[usize]) -> Result<Series> {
    let all: Vec<(Monomial, Coeff)> = f.terms().map(|(m, c)| (*m, *c)).collect();
    let terms: Vec<_> = order.iter().map(|&i| all[i]).collect();
    evaluate(delta, f, &terms)
}

/// δ₀(f) = (Frob₀(f) − f^p)/p.
pub fn delta0_closed(f: &Series) -> Result<Series> {
    let ring = *f.ring();
    if ring.is_ramified() {
        return Err(Error::RamifiedUnsupported);
    }
    let num = frob0(f)?.sub(&f.pow(ring.p() as u32)?)?;
    let lower = ring.with_precision(
        ring.precision()
            .checked_sub(1)
            .filter(|&m| m > 0)
            .ok_or_else(|| Error::PrecisionExhausted("δ needs precision at least 2".into()))?,
    )?;
    let mut r = Series::zero(lower, f.vars(), f.degree());
    for (m, c) in num.terms() {
        let (_, q) = ring.div_p(*c)?;
        r.add_term(*m, q);
    }
    r.set_prec(f.prec().saturating_sub(1));
    Ok(r)
}

/// δ(f) with the closed form cross-checked against the recursive evaluation
/// when δ = δ₀.
pub fn delta_checked(delta: &PDerivation, f: &Series) -> Result<Series> {
    let r = delta_eval(delta, f)?;
    if delta.is_zero() {
        let c = delta0_closed(f)?;
        if c.terms().ne(r.terms()) {
            return Err(Error::Inconsistent(
                "δ₀ closed form disagrees with recursive evaluation".into(),
            ));
        }
    }
    Ok(r)
}

/// J_δ(f) = ⟨(∂_1 f)^p, …, (∂_n f)^p, δ(f)⟩ at precision M−1.
pub fn j_delta(delta: &PDerivation, f: &Series) -> Result<IdealPresentation> {
    let d = delta_checked(delta, f)?;
    let lower = *d.ring();
    let p = f.ring().p() as u32;
    let mut gens = Vec::new();
    for i in 0..f.vars().count() {
        gens.push(f.partial(i).pow(p)?.change_ring(lower));
    }
    gens.push(d);
    IdealPresentation::new(gens)
}

/// ∂/∂π(f) in F_p[[x]]: the derivation V → F_p with π ↦ 1 applied to
/// coefficients.
pub fn d_dpi(f: &Series) -> Result<Series> {
    let ring = *f.ring();
    if !ring.is_ramified() {
        return Err(Error::UnramifiedUnsupported);
    }
    let k = Dvr::residue_field(ring.p())?;
    let mut r = Series::zero(k, f.vars(), f.degree());
    for (m, c) in f.terms() {
        r.add_term(*m, k.from_int(ring.d_dpi(*c)? as i128));
    }
    r.set_prec(f.prec().saturating_sub(1));
    Ok(r)
}
