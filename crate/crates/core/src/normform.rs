//! Quadratic part of f̃: Hessian, unit-square rank, constructive splitting
//! and the regular / Morse / degenerate classification.

use serde::Serialize;

use crate::coeff::{Coeff, Dvr};
use crate::error::{Error, Result};
use crate::invariants::{self, GenericSampler};
use crate::series::{Monomial, PrecisionEvent, Series};

/// Symmetric matrix of the degree-2 part of f̃ in (x₁,…,xₙ,y).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HessianData {
    pub ring: Dvr,
    /// Diagonal entries are coefficients of xᵢ², off-diagonal ones half the
    /// coefficient of xᵢxⱼ, so that the quadratic part is x⃗·H·x⃗ᵀ.
    pub matrix: Vec<Vec<Coeff>>,
}

impl HessianData {
    pub fn size(&self) -> usize {
        self.matrix.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagonalization {
    pub diagonal: Vec<Coeff>,
    /// x⃗ = P·z⃗ turns x⃗ᵀHx⃗ into Σ dᵢzᵢ².
    pub transform: Vec<Vec<Coeff>>,
    /// Number of unit diagonal entries.
    pub r: usize,
}

fn check_odd(ring: &Dvr) -> Result<()> {
    if ring.p() == 2 {
        return Err(Error::Precondition("quadratic forms need p odd".into()));
    }
    Ok(())
}

/// Hessian of f; f must have order 2.
pub fn hessian(f: &Series) -> Result<HessianData> {
    check_odd(f.ring())?;
    match f.order() {
        Some(2) => {}
        o => {
            return Err(Error::OrderMismatch {
                expected: 2,
                found: o.map_or("infinite".into(), |o| o.to_string()),
            })
        }
    }
    let (lifted, _) = f.tilde_lift()?;
    Ok(hessian_of_lift(&lifted))
}

/// Hessian read off a series in (x, y) directly.
pub fn hessian_of_lift(lifted: &Series) -> HessianData {
    let ring = *lifted.ring();
    let n = lifted.vars().count();
    let half = ring.inv_unit(ring.from_int(2)).unwrap_or_else(|_| ring.zero());
    let mut h = vec![vec![ring.zero(); n]; n];
    for (m, c) in lifted.terms().filter(|(m, _)| m.degree() == 2) {
        let idx: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, m.0[i] as usize)).collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            h[i][i] = *c;
        } else {
            let v = ring.mul(*c, half);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    HessianData { ring, matrix: h }
}

/// Symmetric elimination over V with minimal-valuation pivots; an
/// off-diagonal pivot is first moved to the diagonal by xᵢ ↦ xᵢ + xⱼ.
pub fn diagonalize_rank(h: &HessianData) -> Diagonalization {
    let ring = h.ring;
    let n = h.size();
    let mut a = h.matrix.clone();
    let mut p: Vec<Vec<Coeff>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { ring.one() } else { ring.zero() }).collect())
        .collect();
    let swap = |a: &mut Vec<Vec<Coeff>>, p: &mut Vec<Vec<Coeff>>, i: usize, j: usize| {
        a.swap(i, j);
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in p.iter_mut() {
            row.swap(i, j);
        }
    };
    for k in 0..n {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..n {
            for j in i..n {
                if let Some(v) = ring.valuation(a[i][j]) {
                    let better = match best {
                        None => true,
                        Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                    };
                    if better {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        if i != j {
            // column i += column j, row i += row j
            for r in 0..n {
                a[r][i] = ring.add(a[r][i], a[r][j]);
            }
            for c in 0..n {
                a[i][c] = ring.add(a[i][c], a[j][c]);
            }
            for row in p.iter_mut() {
                row[i] = ring.add(row[i], row[j]);
            }
        }
        swap(&mut a, &mut p, k, i);
        let (pv, pu) = ring.unit_decompose(a[k][k]).expect("pivot is nonzero");
        debug_assert_eq!(pv, v);
        let pinv = ring.inv_unit(pu).expect("unit part");
        for j in k + 1..n {
            let Some((vj, uj)) = ring.unit_decompose(a[k][j]) else {
                continue;
            };
            let c = ring.mul(ring.mul(uj, pinv), ring.pi_pow(vj - pv));
            for r in 0..n {
                a[r][j] = ring.sub(a[r][j], ring.mul(c, a[r][k]));
            }
            for col in 0..n {
                a[j][col] = ring.sub(a[j][col], ring.mul(c, a[k][col]));
            }
            for row in p.iter_mut() {
                row[j] = ring.sub(row[j], ring.mul(c, row[k]));
            }
        }
    }
    let diagonal: Vec<Coeff> = (0..n).map(|i| a[i][i]).collect();
    let r = diagonal.iter().filter(|d| ring.is_unit(**d)).count();
    Diagonalization {
        diagonal,
        transform: p,
        r,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    pub kind: String,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitResult {
    /// Number of x-squares in the normal form.
    pub k: usize,
    /// Unit-square count of the Hessian.
    pub r: usize,
    /// The quadratic part of f̃ has no unit entry in the y row, so the y² of
    /// the normal form comes from an x-direction.
    pub y_reassigned: bool,
    /// Coefficients of the unit squares, 1 unless a square root was missing.
    pub units: Vec<Coeff>,
    /// Residual g in x_{k+1},…,x_n (as a series in x and y).
    pub residual: Series,
    /// Σ cᵢzᵢ² + g.
    pub normal_form: Series,
    /// f̃(Φ) ≡ normal_form modulo 𝔫^{valid_to+1}.
    pub valid_to: u32,
    pub transform: Vec<Series>,
    pub obstructions: Vec<Obstruction>,
    pub events: Vec<PrecisionEvent>,
}

fn linear_images(like: &Series, p: &[Vec<Coeff>]) -> Vec<Series> {
    let n = p.len();
    (0..n)
        .map(|i| {
            let mut s = like.zero_like();
            for j in 0..n {
                s.add_term(Monomial::var(j), p[i][j]);
            }
            s
        })
        .collect()
}

fn identity_images(like: &Series) -> Vec<Series> {
    (0..like.vars().count()).map(|i| like.var_like(i)).collect()
}

/// Splits f̃ ~ y² + x₁² + … + x_k² + g(x_{k+1},…,xₙ) modulo 𝔫^{target+1}.
pub fn split(f: &Series, target_jet: u32) -> Result<SplitResult> {
    let h = hessian(f)?;
    let (lifted, mut events) = f.tilde_lift()?;
    split_lifted(&lifted, &h, target_jet, &mut events).map(|mut s| {
        events.append(&mut s.events);
        s.events = events;
        s
    })
}

fn split_lifted(
    lifted: &Series,
    h: &HessianData,
    target_jet: u32,
    events: &mut Vec<PrecisionEvent>,
) -> Result<SplitResult> {
    let ring = h.ring;
    let size = h.size();
    let ny = size - 1;
    let diag = diagonalize_rank(h);
    let units: Vec<usize> = (0..size).filter(|&i| ring.is_unit(diag.diagonal[i])).collect();
    let non_units: Vec<usize> = (0..size).filter(|&i| !ring.is_unit(diag.diagonal[i])).collect();
    if units.is_empty() {
        return Err(Error::OrderMismatch {
            expected: 2,
            found: "no unit square".into(),
        });
    }
    // unit directions first, the y slot last; prefer a unit direction that
    // involves y itself
    let y_src = units
        .iter()
        .copied()
        .find(|&j| ring.is_unit(diag.transform[ny][j]))
        .unwrap_or(*units.last().unwrap());
    let mut order: Vec<usize> = units.iter().copied().filter(|&i| i != y_src).collect();
    order.extend(non_units.iter().copied());
    order.push(y_src);
    let k = units.len() - 1;
    let y_reassigned = h.matrix[ny].iter().all(|c| !ring.is_unit(*c));

    let mut obstructions = Vec::new();
    let mut pm = vec![vec![ring.zero(); size]; size];
    let mut coeffs = vec![ring.zero(); size];
    for (new, &old) in order.iter().enumerate() {
        let d = diag.diagonal[old];
        let mut scale = ring.one();
        coeffs[new] = d;
        if ring.is_unit(d) {
            match ring.hensel_sqrt(d) {
                Ok(s) => {
                    scale = ring.inv_unit(s)?;
                    coeffs[new] = ring.one();
                }
                Err(Error::NotASquare { unit }) => obstructions.push(Obstruction {
                    kind: "NotASquare".into(),
                    unit,
                }),
                Err(e) => return Err(e),
            }
        }
        for i in 0..size {
            pm[i][new] = ring.mul(diag.transform[i][old], scale);
        }
    }
    let unit_slots: Vec<usize> = (0..k).chain(std::iter::once(ny)).collect();

    let valid_to = target_jet.min(lifted.prec().saturating_sub(1)).min(lifted.degree());
    if valid_to < target_jet {
        events.push(PrecisionEvent::new(
            "split-clamped",
            format!("splitting target {target_jet} clamped to {valid_to} by precision"),
        ));
    }
    let mut phi = linear_images(lifted, &pm);
    let mut fcur = lifted.substitute(&phi)?;
    let half = ring.inv_unit(ring.from_int(2))?;
    for _round in 0..=valid_to {
        let mut g: Vec<Series> = (0..size).map(|_| fcur.zero_like()).collect();
        for (m, c) in fcur.terms() {
            let Some(&i) = unit_slots.iter().find(|&&i| m.0[i] > 0) else {
                continue;
            };
            let mut c = *c;
            if *m == Monomial::var(i).scale(2) {
                c = ring.sub(c, coeffs[i]);
                if ring.is_zero(c) {
                    continue;
                }
            }
            g[i].add_term(m.div(&Monomial::var(i)), c);
        }
        let done = unit_slots.iter().all(|&i| g[i].order().is_none_or(|o| o >= valid_to));
        if done {
            break;
        }
        let mut psi = identity_images(&fcur);
        for &i in &unit_slots {
            let inv = ring.mul(half, ring.inv_unit(coeffs[i])?);
            psi[i] = psi[i].sub(&g[i].scale(inv))?;
        }
        fcur = fcur.substitute(&psi)?;
        phi = phi.iter().map(|s| s.substitute(&psi)).collect::<Result<_>>()?;
    }

    let mut residual = fcur.zero_like();
    let mut normal_form = fcur.zero_like();
    for &i in &unit_slots {
        normal_form.add_term(Monomial::var(i).scale(2), coeffs[i]);
    }
    for (m, c) in fcur.terms() {
        let involves_unit = unit_slots.iter().any(|&i| m.0[i] > 0);
        let o = m.degree() + ring.valuation(*c).unwrap_or(0);
        if !involves_unit && o <= valid_to {
            residual.add_term(*m, *c);
        }
    }
    residual.set_prec(valid_to + 1);
    normal_form = normal_form.add(&residual)?;

    let check = lifted.substitute(&phi)?.sub(&normal_form)?;
    if check.order().is_some_and(|o| o <= valid_to) {
        return Err(Error::Inconsistent(format!(
            "splitting reconstruction differs at order {}",
            check.order().unwrap()
        )));
    }
    Ok(SplitResult {
        k,
        r: diag.r,
        y_reassigned,
        units: unit_slots.iter().map(|&i| coeffs[i]).collect(),
        residual,
        normal_form,
        valid_to,
        transform: phi,
        obstructions,
        events: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Kind {
    Regular,
    Morse,
    Degenerate { r: usize, residual_ord: Option<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    #[serde(flatten)]
    pub kind: Kind,
    pub ord: u32,
    /// Certified τ_V used for the cross-check, if available.
    pub tau_v: Option<u64>,
}

/// Regular iff ord 1, Morse iff ord 2 with a full-rank Hessian, else
/// degenerate; cross-checked against τ_V when it is certified.
pub fn classify(f: &Series, sampler: &GenericSampler, target_jet: u32) -> Result<Classification> {
    let ord = match f.order() {
        None => return Err(Error::Precondition("f is zero".into())),
        Some(0) => return Err(Error::Precondition("f is a unit".into())),
        Some(o) => o,
    };
    let tau_v = match invariants::tau_v(f, sampler) {
        Ok(t) if t.certified => Some(t.value),
        Ok(_) | Err(Error::NotFiniteUpToBounds(_)) => None,
        Err(e) => return Err(e),
    };
    let kind = if ord == 1 {
        Kind::Regular
    } else if ord == 2 {
        let h = hessian(f)?;
        let d = diagonalize_rank(&h);
        if d.r == h.size() {
            Kind::Morse
        } else {
            let s = split(f, target_jet)?;
            Kind::Degenerate {
                r: d.r,
                residual_ord: s.residual.order(),
            }
        }
    } else {
        Kind::Degenerate {
            r: 0,
            residual_ord: Some(ord),
        }
    };
    let expected = match kind {
        Kind::Regular => Some(0),
        Kind::Morse => Some(1),
        Kind::Degenerate { .. } => None,
    };
    if let Some(t) = tau_v {
        let ok = match expected {
            Some(e) => t == e,
            None => t >= 2,
        };
        if !ok {
            return Err(Error::Inconsistent(format!(
                "classification {kind:?} contradicts τ_V = {t}"
            )));
        }
    }
    Ok(Classification { kind, ord, tau_v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::series::VarSet;

    fn f(src: &str, p: u64, n: usize) -> Series {
        parse(src, Dvr::unramified(p, 8).unwrap(), VarSet::x(n), 10).unwrap().0
    }

    #[test]
    fn ranks() {
        let d = |s: &str, n| diagonalize_rank(&hessian(&f(s, 5, n)).unwrap()).r;
        assert_eq!(d("p^2+x1^2+x2^2", 2), 3);
        assert_eq!(d("p*x1", 1), 2);
        assert_eq!(d("x1^2+p^3", 1), 1);
        assert_eq!(d("x1^2+x2^2+p^3", 2), 2);
    }

    #[test]
    fn off_diagonal_hessian() {
        let h = hessian(&f("p*x1", 5, 1)).unwrap();
        let r = h.ring;
        assert_eq!(h.matrix[0][0], r.zero());
        assert!(r.is_unit(h.matrix[0][1]));
    }

    #[test]
    fn already_split() {
        let s = split(&f("p^2+x1^2+x2^3", 5, 2), 6).unwrap();
        assert_eq!(s.k, 1);
        assert!(!s.y_reassigned);
        assert_eq!(s.residual.order(), Some(3));
        assert!(s.residual.in_fraktur_a(3));
    }

    #[test]
    fn one_round_of_completion() {
        let s = split(&f("p^2+x1^2+x1*x2^2", 5, 2), 6).unwrap();
        assert_eq!(s.k, 1);
        let r = *s.residual.ring();
        let quarter = r.neg(r.inv_unit(r.from_int(4)).unwrap());
        assert_eq!(s.residual.coeff(&Monomial::from_exps(&[0, 4, 0])), quarter);
        assert_eq!(s.valid_to, 6);
    }

    #[test]
    fn full_rank_and_reassigned() {
        let s = split(&f("p*x1", 5, 1), 6).unwrap();
        assert_eq!((s.k, s.r), (1, 2));
        assert!(s.residual.is_zero());
        let s = split(&f("x1^2+p^3", 5, 1), 6).unwrap();
        assert_eq!((s.k, s.r), (0, 1));
        assert!(s.y_reassigned);
        assert_eq!(s.residual.order(), Some(3));
    }

    #[test]
    fn classification() {
        let smp = GenericSampler::new(0, 5);
        assert_eq!(classify(&f("x1+x2^2", 5, 2), &smp, 6).unwrap().kind, Kind::Regular);
        assert_eq!(classify(&f("p^2+x1^2+x2^2", 5, 2), &smp, 6).unwrap().kind, Kind::Morse);
        assert_eq!(
            classify(&f("x1^2+x2^2+p^3", 5, 2), &smp, 6).unwrap().kind,
            Kind::Degenerate {
                r: 2,
                residual_ord: Some(3)
            }
        );
    }
}
