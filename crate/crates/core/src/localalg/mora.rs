//! Standard bases over F_p for a local degree ordering, with Mora's normal
//! form. Serves residue-field colengths.

use crate::coeff::modpow;
use crate::error::{Error, Result};
use crate::series::{monomials_of_degree, Monomial, Series};

/// Polynomial over F_p with terms sorted so that the leading term (lowest
/// degree) comes first.
#[derive(Clone, Debug, PartialEq, Eq)]
struct KPoly {
    terms: Vec<(Monomial, u64)>,
}

impl KPoly {
    fn lead(&self) -> Option<&(Monomial, u64)> {
        self.terms.first()
    }

    fn ecart(&self) -> u32 {
        match (self.terms.first(), self.terms.iter().map(|t| t.0.degree()).max()) {
            (Some(l), Some(top)) => top - l.0.degree(),
            _ => 0,
        }
    }

    fn monic(mut self, p: u64) -> Self {
        if let Some(&(_, c)) = self.lead() {
            let inv = modpow(c, p - 2, p);
            for t in self.terms.iter_mut() {
                t.1 = t.1 * inv % p;
            }
        }
        self
    }

    /// self − c·m·g, dropping terms above `top`.
    fn sub_mul(&self, c: u64, m: &Monomial, g: &KPoly, p: u64, top: u32) -> KPoly {
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let shifted: Vec<(Monomial, u64)> = g
            .terms
            .iter()
            .map(|(gm, gc)| (gm.mul(m), (p - gc * c % p) % p))
            .filter(|t| t.0.degree() <= top)
            .collect();
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        while i < a.len() || j < shifted.len() {
            let ord = if i >= a.len() {
                std::cmp::Ordering::Greater
            } else if j >= shifted.len() {
                std::cmp::Ordering::Less
            } else {
                a[i].0.cmp(&shifted[j].0)
            };
            let t = match ord {
                std::cmp::Ordering::Less => {
                    i += 1;
                    a[i - 1]
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    shifted[j - 1]
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (a[i - 1].0, (a[i - 1].1 + shifted[j - 1].1) % p)
                }
            };
            if t.1 != 0 {
                out.push(t);
            }
        }
        KPoly { terms: out }
    }
}

/// Mora's normal form: repeatedly cancel the leading term using the
/// reducer of least ecart, adding the current remainder to the reducer set
/// whenever the chosen reducer has larger ecart.
fn normal_form(mut h: KPoly, basis: &[KPoly], p: u64, top: u32) -> KPoly {
    let mut t: Vec<KPoly> = basis.to_vec();
    loop {
        let Some(&(lm, lc)) = h.lead() else { return h };
        let best = t
            .iter()
            .enumerate()
            .filter(|(_, g)| g.lead().is_some_and(|l| l.0.divides(&lm)))
            .min_by_key(|(i, g)| (g.ecart(), *i))
            .map(|(i, _)| i);
        let Some(bi) = best else { return h };
        let g = t[bi].clone();
        if g.ecart() > h.ecart() {
            t.push(h.clone());
        }
        let (gm, gc) = *g.lead().unwrap();
        let c = lc * modpow(gc, p - 2, p) % p;
        h = h.sub_mul(c, &lm.div(&gm), &g, p, top);
    }
}

fn lcm(a: &Monomial, b: &Monomial) -> Monomial {
    let mut m = *a;
    for i in 0..m.0.len() {
        m.0[i] = a.0[i].max(b.0[i]);
    }
    m
}

fn s_poly(f: &KPoly, g: &KPoly, p: u64, top: u32) -> KPoly {
    let (fm, _) = *f.lead().unwrap();
    let (gm, _) = *g.lead().unwrap();
    let l = lcm(&fm, &gm);
    let mf = l.div(&fm);
    let scaled = KPoly {
        terms: f
            .terms
            .iter()
            .map(|(m, c)| (m.mul(&mf), *c))
            .filter(|t| t.0.degree() <= top)
            .collect(),
    };
    scaled.sub_mul(1, &l.div(&gm), g, p, top)
}

/// Result of a residue-field colength computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KLength {
    pub length: u64,
    /// Smallest c with ⟨vars⟩^c inside the ideal.
    pub m_power: u32,
}

/// dim_κ κ[[vars]]/I for generators over the residue field, computed from a
/// local standard basis of I + ⟨vars⟩^{D+1}.
pub fn colength(gens: &[Series]) -> Result<KLength> {
    let first = gens
        .first()
        .ok_or_else(|| Error::ShapeMismatch("no generators".into()))?;
    let ring = *first.ring();
    if ring.is_truncated() || ring.precision() != 1 {
        return Err(Error::ShapeMismatch(
            "standard bases need residue-field coefficients".into(),
        ));
    }
    let p = ring.p();
    let degree = gens.iter().map(|g| g.degree()).max().unwrap();
    let cap = gens.iter().map(|g| g.prec()).min().unwrap().min(degree + 1);
    let nv = first.vars().count();
    let top = degree;
    let mut basis: Vec<KPoly> = Vec::new();
    let mut input: Vec<KPoly> = gens
        .iter()
        .map(|g| KPoly {
            terms: g.terms().map(|(m, c)| (*m, ring.residue(*c))).collect(),
        })
        .filter(|k| !k.terms.is_empty())
        .collect();
    input.extend(
        monomials_of_degree(nv, degree + 1)
            .into_iter()
            .map(|m| KPoly { terms: vec![(m, 1)] }),
    );
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for f in input {
        let h = normal_form(f, &basis, p, top + 1);
        if h.terms.is_empty() {
            continue;
        }
        let h = h.monic(p);
        for i in 0..basis.len() {
            pairs.push((i, basis.len()));
        }
        basis.push(h);
    }
    while let Some((i, j)) = pairs.pop() {
        let s = s_poly(&basis[i], &basis[j], p, top + 1);
        let h = normal_form(s, &basis, p, top + 1);
        if h.terms.is_empty() {
            continue;
        }
        let h = h.monic(p);
        for k in 0..basis.len() {
            pairs.push((k, basis.len()));
        }
        basis.push(h);
    }
    let leads: Vec<Monomial> = basis.iter().map(|g| g.lead().unwrap().0).collect();
    let in_lead = |m: &Monomial| leads.iter().any(|l| l.divides(m));
    let mut length = 0u64;
    let mut m_power = None;
    for d in 0..=degree + 1 {
        let ms = monomials_of_degree(nv, d);
        let standard = ms.iter().filter(|m| !in_lead(m)).count();
        if standard == 0 && m_power.is_none() {
            m_power = Some(d);
        }
        length += standard as u64;
    }
    match m_power {
        Some(c) if c < cap => Ok(KLength { length, m_power: c }),
        _ => Err(Error::NotFiniteUpToBounds(crate::error::Bounds {
            degree,
            precision: 1,
            n_max: 0,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Dvr;
    use crate::series::VarSet;

    #[test]
    fn cusp_colength() {
        let k = Dvr::residue_field(5).unwrap();
        let v = VarSet::x(2);
        let x = Series::var(k, v, 10, 0);
        let y = Series::var(k, v, 10, 1);
        let f = x.pow(2).unwrap().add(&y.pow(3).unwrap()).unwrap();
        let r = colength(&[f.partial(0), f.partial(1), f]).unwrap();
        assert_eq!(r.length, 2);
    }

    #[test]
    fn non_monomial_standard_basis() {
        let k = Dvr::residue_field(7).unwrap();
        let v = VarSet::x(2);
        let x = Series::var(k, v, 12, 0);
        let y = Series::var(k, v, 12, 1);
        let f1 = x.pow(2).unwrap().add(&y.pow(3).unwrap()).unwrap();
        let f2 = x.mul(&y).unwrap();
        let r = colength(&[f1, f2]).unwrap();
        assert_eq!(r.length, 5);
    }
}
