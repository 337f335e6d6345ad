//! Numerical invariants assembled from the series, δ and colength engines.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Bounds, Error, Result};
use crate::localalg::{self, mora, Certificate, LengthResult};
use crate::pderiv::{self, PDerivation};
use crate::series::{IdealPresentation, Monomial, PrecisionEvent, Series, VarSet};

pub type Rational = Ratio<i64>;

/// Truncation and sampling parameters of one job.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Config {
    pub degree: u32,
    pub precision: u32,
    pub samples: usize,
    pub seed: u64,
    pub n_max: u32,
    pub k_max: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            degree: 12,
            precision: 8,
            samples: 5,
            seed: 0,
            n_max: 16,
            k_max: 8,
        }
    }
}

impl Config {
    pub fn bounds(&self) -> Bounds {
        Bounds {
            degree: self.degree,
            precision: self.precision,
            n_max: self.n_max,
        }
    }

    /// The configuration used for the single retry after an uncertified
    /// result.
    pub fn widened(&self) -> Config {
        Config {
            degree: self.degree + 2,
            precision: self.precision * 2,
            ..*self
        }
    }
}

/// Runs `job` and, if it is not finite up to the bounds, once more with
/// doubled precision and a larger degree bound.
pub fn with_retry<T>(
    cfg: &Config,
    events: &mut Vec<PrecisionEvent>,
    mut job: impl FnMut(&Config) -> Result<T>,
) -> Result<T> {
    match job(cfg) {
        Err(Error::NotFiniteUpToBounds(b)) => {
            let wide = cfg.widened();
            events.push(PrecisionEvent::new(
                "retry",
                format!(
                    "uncertified at {b}; retrying with D={}, M={}",
                    wide.degree, wide.precision
                ),
            ));
            job(&wide)
        }
        other => other,
    }
}

/// Seeded source of the generic linear forms a = c₀y + Σcᵢxᵢ + c·π.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GenericSampler {
    pub seed: u64,
    pub samples: usize,
}

impl GenericSampler {
    pub fn new(seed: u64, samples: usize) -> Self {
        GenericSampler { seed, samples }
    }

    pub fn from_config(cfg: &Config) -> Self {
        GenericSampler::new(cfg.seed, cfg.samples)
    }

    /// Sampled forms in the ring of `like`, which must contain y.
    pub fn forms(&self, like: &Series) -> Vec<Series> {
        let ring = *like.ring();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.samples)
            .map(|_| {
                let mut a = like.zero_like();
                for i in 0..like.vars().count() {
                    a.add_term(Monomial::var(i), ring.random_unit(&mut rng));
                }
                a.add_term(Monomial::one(), ring.mul(ring.pi(), ring.random_unit(&mut rng)));
                a
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauResult {
    /// Minimum over certified samples.
    pub value: u64,
    /// Number of samples attaining the minimum.
    pub agreement: usize,
    /// At least two samples agree on the minimum.
    pub certified: bool,
    /// Per-sample lengths, `None` where the sample was not certified.
    pub samples: Vec<Option<u64>>,
    pub certificate: Certificate,
}

/// Colength of J(F) (+⟨F⟩) + ⟨a⟩ for F ∈ V[[x,y]], minimized over samples.
pub fn sampled_colength(lifted: &Series, sampler: &GenericSampler, with_f: bool) -> Result<TauResult> {
    if !lifted.vars().has_y {
        return Err(Error::ShapeMismatch("expected a series in x and y".into()));
    }
    let mut gens = lifted.gradient();
    if with_f {
        gens.push(lifted.clone());
    }
    let base = IdealPresentation::new(gens)?;
    let mut samples = Vec::new();
    let mut best: Option<(u64, Certificate)> = None;
    for a in sampler.forms(lifted) {
        match localalg::quotient_length(&base.with(&[a])?) {
            Ok(r) => {
                samples.push(Some(r.length));
                if best.is_none_or(|b| r.length < b.0) {
                    best = Some((r.length, r.certificate));
                }
            }
            Err(Error::NotFiniteUpToBounds(_)) => samples.push(None),
            Err(e) => return Err(e),
        }
    }
    let (value, certificate) = best.ok_or_else(|| {
        Error::NotFiniteUpToBounds(Bounds {
            degree: lifted.degree(),
            precision: lifted.ring().precision(),
            n_max: 0,
        })
    })?;
    let agreement = samples.iter().filter(|s| **s == Some(value)).count();
    Ok(TauResult {
        value,
        agreement,
        certified: agreement >= 2,
        samples,
        certificate,
    })
}

fn check_x_only(f: &Series) -> Result<()> {
    if f.vars().has_y {
        return Err(Error::ShapeMismatch("expected a series in x only".into()));
    }
    Ok(())
}

/// τ_V(f) = length V[[x,y]]/(J(f̃) + ⟨f̃, a⟩) for generic a.
pub fn tau_v(f: &Series, sampler: &GenericSampler) -> Result<TauResult> {
    check_x_only(f)?;
    let (lifted, _) = f.tilde_lift()?;
    sampled_colength(&lifted, sampler, true)
}

/// μ_V(f) = length V[[x,y]]/(J(f̃) + ⟨a⟩) for generic a.
pub fn mu_v(f: &Series, sampler: &GenericSampler) -> Result<TauResult> {
    check_x_only(f)?;
    let (lifted, _) = f.tilde_lift()?;
    sampled_colength(&lifted, sampler, false)
}

/// C(n+s−2, n+1), the lower bound for τ_V at order s.
pub fn tau_lower_bound(n: usize, s: u32) -> u64 {
    let top = (n as i64 + s as i64 - 2).max(0) as u64;
    let k = n as u64 + 1;
    if k > top {
        return 0;
    }
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (top - i) / (i + 1);
    }
    r
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizedLength {
    /// length / p^n.
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub length: u64,
    pub certificate: Certificate,
}

pub fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn normalized(f: &Series, r: LengthResult) -> NormalizedLength {
    let pn = (f.ring().p() as i64).pow(f.vars().count() as u32);
    NormalizedLength {
        value: Rational::new(r.length as i64, pn),
        length: r.length,
        certificate: r.certificate,
    }
}

fn delta_ideal(f: &Series, delta: &PDerivation, with_f: bool, with_p: bool) -> Result<IdealPresentation> {
    check_x_only(f)?;
    let jd = pderiv::j_delta(delta, f)?;
    let lower = *jd.ring();
    let mut extra = Vec::new();
    if with_f {
        extra.push(f.change_ring(lower));
    }
    if with_p {
        extra.push(f.change_ring(lower).constant_like(lower.pi()));
    }
    jd.with(&extra)
}

/// τ(f, δ) = length(V[[x]]/(⟨f⟩ + J_δ(f))) / p^n.
pub fn tau_delta(f: &Series, delta: &PDerivation) -> Result<NormalizedLength> {
    Ok(normalized(
        f,
        localalg::quotient_length(&delta_ideal(f, delta, true, false)?)?,
    ))
}

/// μ(f, δ) = length(V[[x]]/J_δ(f)) / p^n.
pub fn mu_delta(f: &Series, delta: &PDerivation) -> Result<NormalizedLength> {
    Ok(normalized(
        f,
        localalg::quotient_length(&delta_ideal(f, delta, false, false)?)?,
    ))
}

/// Length backend for residue-field computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Dense,
    Mora,
}

/// A p-derivation with random values of degree ≤ 2.
pub fn random_pderivation(f: &Series, seed: u64) -> PDerivation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..f.vars().count())
        .map(|_| Series::random(&mut rng, *f.ring(), f.vars(), f.degree(), 2, 0.6, false))
        .collect();
    PDerivation { values }
}

fn tau_big_delta_with(f: &Series, delta: &PDerivation, backend: Backend) -> Result<NormalizedLength> {
    let ideal = delta_ideal(f, delta, true, true)?;
    let r = match backend {
        Backend::Dense => localalg::quotient_length(&ideal)?,
        Backend::Mora => {
            let gens: Vec<Series> = ideal.generators().iter().map(|g| g.residue()).collect::<Result<_>>()?;
            let k = mora::colength(&gens)?;
            LengthResult {
                length: k.length,
                certified: true,
                certificate: Certificate {
                    m_power: k.m_power,
                    n_pi: None,
                    degree: ideal.degree(),
                    precision: 1,
                },
            }
        }
    };
    Ok(normalized(f, r))
}

/// τ^Δ(f) = length(V[[x]]/(⟨f, p⟩ + J_δ(f))) / p^n with δ = δ₀, checked
/// against a random δ.
pub fn tau_big_delta(f: &Series, seed: u64) -> Result<NormalizedLength> {
    tau_big_delta_backend(f, seed, Backend::Dense)
}

pub fn tau_big_delta_backend(f: &Series, seed: u64, backend: Backend) -> Result<NormalizedLength> {
    let r = tau_big_delta_with(f, &PDerivation::zero_like(f), backend)?;
    let other = tau_big_delta_with(f, &random_pderivation(f, seed), backend)?;
    if other.length != r.length {
        return Err(Error::Inconsistent(format!(
            "τ^Δ depends on δ: {} (δ₀) vs {} (random δ)",
            r.length, other.length
        )));
    }
    Ok(r)
}

/// Generators of ⟨f̄⟩ + J_π(f) over the residue field.
pub fn j_pi_residue(f: &Series) -> Result<Vec<Series>> {
    check_x_only(f)?;
    let mut gens = vec![f.residue()?];
    for i in 0..f.vars().count() {
        gens.push(f.partial(i).residue()?);
    }
    gens.push(pderiv::d_dpi(f)?);
    Ok(gens)
}

/// τ^π(f) = dim_κ κ[[x]]/(⟨f̄⟩ + J_π(f)).
pub fn tau_pi(f: &Series) -> Result<u64> {
    tau_pi_backend(f, Backend::Dense)
}

pub fn tau_pi_backend(f: &Series, backend: Backend) -> Result<u64> {
    let gens = j_pi_residue(f)?;
    match backend {
        Backend::Dense => Ok(localalg::quotient_length(&IdealPresentation::new(gens)?)?.length),
        Backend::Mora => Ok(mora::colength(&gens)?.length),
    }
}

/// ⟨f⟩ + J(f), partials in every variable of f's ring.
pub fn tjurina_ideal(f: &Series) -> Result<IdealPresentation> {
    let mut gens = f.gradient();
    gens.push(f.clone());
    IdealPresentation::new(gens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrdI {
    Exact(u32),
    AtLeast(u32),
}

impl OrdI {
    pub fn value(&self) -> u32 {
        match *self {
            OrdI::Exact(k) | OrdI::AtLeast(k) => k,
        }
    }
}

/// Largest k ≤ k_max with f ∈ I^k.
pub fn ord_i(f: &Series, ideal: &IdealPresentation, k_max: u32) -> Result<OrdI> {
    if f.is_zero() {
        return Ok(OrdI::AtLeast(k_max));
    }
    for k in 1..=k_max {
        let pw = ideal.power(k, 20_000)?;
        if !localalg::analyze(&pw).membership(f).member {
            return Ok(OrdI::Exact(k - 1));
        }
    }
    Ok(OrdI::AtLeast(k_max))
}

/// j_I(f) = length(I/(⟨f⟩ + J(f))), by additivity.
pub fn jacobian_number(f: &Series, ideal: &IdealPresentation) -> Result<u64> {
    if ord_i(f, ideal, 2)?.value() < 2 {
        return Err(Error::Precondition("f must lie in I²".into()));
    }
    let big = localalg::quotient_length(&tjurina_ideal(f)?)?;
    let small = localalg::quotient_length(ideal)?;
    Ok(big.length - small.length)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Determinacy {
    /// Smallest k with I^{k+2} ⊆ I·⟨f⟩ + I²·J(f).
    pub k: u32,
    /// 2k − ord_I(f) + 2.
    pub order: i64,
    pub ord_i: u32,
    /// j_I(f) when finite.
    pub j: Option<u64>,
    /// 2·j − ord_I(f) + 2.
    pub j_bound: Option<i64>,
    /// 2·(j+1) − ord_I(f) + 2, which always dominates `order`.
    pub j_bound_safe: Option<i64>,
}

const POWER_CAP: usize = 20_000;

/// Determinacy order from the smallest k with I^{k+2} ⊆ I·⟨f⟩ + I²·J(f).
pub fn determinacy_bound(f: &Series, ideal: &IdealPresentation, k_max: u32) -> Result<Determinacy> {
    let ord = ord_i(f, ideal, k_max.max(2))?.value();
    if ord == 0 {
        return Err(Error::Precondition("f must lie in I".into()));
    }
    let fi = IdealPresentation::new(vec![f.clone()])?;
    let j = IdealPresentation::new(f.gradient())?;
    let i2 = ideal.power(2, POWER_CAP)?;
    let rhs = ideal.product(&fi)?.sum(&i2.product(&j)?)?;
    let jet = localalg::analyze(&rhs);
    let mut found = None;
    for k in 0..=k_max {
        let lhs = ideal.power(k + 2, POWER_CAP)?;
        if lhs.generators().iter().all(|g| jet.membership(g).member) {
            found = Some(k);
            break;
        }
    }
    let k = found.ok_or(Error::NotFoundUpTo(k_max))?;
    let jn = if ord >= 2 { jacobian_number(f, ideal).ok() } else { None };
    let o = ord as i64;
    Ok(Determinacy {
        k,
        order: 2 * k as i64 - o + 2,
        ord_i: ord,
        j: jn,
        j_bound: jn.map(|j| 2 * j as i64 - o + 2),
        j_bound_safe: jn.map(|j| 2 * (j as i64 + 1) - o + 2),
    })
}

/// The ideal ⟨x₁,…,xₙ,y⟩ of V[[x,y]], used for determinacy of tilde lifts.
pub fn variables_ideal(like: &Series) -> Result<IdealPresentation> {
    IdealPresentation::new((0..like.vars().count()).map(|i| like.var_like(i)).collect())
}

/// 𝔐 = ⟨x₁,…,xₙ,π⟩.
pub fn maximal_ideal(like: &Series) -> Result<IdealPresentation> {
    let mut g: Vec<Series> = (0..like.vars().count()).map(|i| like.var_like(i)).collect();
    if like.ring().is_truncated() {
        g.push(like.constant_like(like.ring().pi()));
    }
    IdealPresentation::new(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Uniformizer {
    pub n: u32,
    /// The membership was decided for the untruncated ideal.
    pub exact: bool,
}

/// ord_f(p) = min N with p^N ∈ ⟨f, (∂ᵢf)^p⟩ (unramified), or
/// ord_f(π) = min N with π^N ∈ ⟨f⟩ + J(f) (ramified).
pub fn ord_uniformizer(f: &Series, n_max: u32) -> Result<Uniformizer> {
    check_x_only(f)?;
    let ring = *f.ring();
    let ideal = if ring.is_ramified() {
        tjurina_ideal(f)?
    } else {
        let mut g = vec![f.clone()];
        for i in 0..f.vars().count() {
            g.push(f.partial(i).pow(ring.p() as u32)?);
        }
        IdealPresentation::new(g)?
    };
    let pm = localalg::power_membership(&ideal, &f.constant_like(ring.pi()), n_max)?;
    Ok(Uniformizer {
        n: pm.n,
        exact: pm.exact,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Isolation {
    /// f has order 1.
    Regular,
    Isolated {
        n: u32,
        tau: String,
    },
    NotIsolated {
        witness: String,
    },
    Inconclusive {
        bounds: Bounds,
        samples: usize,
        reason: String,
    },
}

/// Isolated-singularity test: the uniformizer lies in √(J(f) + ⟨f⟩) and
/// τ^Δ (resp. τ^π) is finite.
pub fn isolated_singularity_check(f: &Series, cfg: &Config) -> Result<Isolation> {
    check_x_only(f)?;
    if f.order() == Some(1) {
        return Ok(Isolation::Regular);
    }
    let ideal = tjurina_ideal(f)?;
    if ideal.generators().iter().all(|g| g.ring().is_zero(g.constant_term())) {
        return Ok(Isolation::NotIsolated {
            witness: "J(f)+<f> lies in the prime <x1..xn>, which avoids the uniformizer".into(),
        });
    }
    let inconclusive = |reason: String| Isolation::Inconclusive {
        bounds: cfg.bounds(),
        samples: cfg.samples,
        reason,
    };
    let uni = f.constant_like(f.ring().pi());
    let n = match localalg::power_membership(&ideal, &uni, cfg.n_max) {
        Ok(pm) => pm.n,
        Err(Error::NotFoundUpTo(_)) => return Ok(inconclusive("no uniformizer power found in J(f)+<f>".into())),
        Err(e) => return Err(e),
    };
    let tau = if f.ring().is_ramified() {
        tau_pi(f).map(|t| t.to_string())
    } else {
        tau_big_delta(f, cfg.seed).map(|t| format_rational(&t.value))
    };
    match tau {
        Ok(t) => Ok(Isolation::Isolated { n, tau: t }),
        Err(Error::NotFiniteUpToBounds(_)) => Ok(inconclusive("mod-p Tjurina number not certified finite".into())),
        Err(e) => Err(e),
    }
}

/// Tilde lift placed in V[[x,y]] with the given variable count.
pub fn lift(f: &Series) -> Result<(Series, Vec<PrecisionEvent>)> {
    check_x_only(f)?;
    f.tilde_lift()
}

pub fn xy_vars(n: usize) -> VarSet {
    VarSet::with_y(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Dvr;

    #[test]
    fn lower_bound_values() {
        assert_eq!(tau_lower_bound(1, 2), 0);
        assert_eq!(tau_lower_bound(1, 3), 1);
        assert_eq!(tau_lower_bound(2, 4), 4);
    }

    #[test]
    fn sampler_is_deterministic() {
        let r = Dvr::unramified(5, 4).unwrap();
        let like = Series::zero(r, VarSet::with_y(2), 6);
        let s = GenericSampler::new(9, 3);
        assert_eq!(s.forms(&like), s.forms(&like));
        for a in s.forms(&like) {
            assert!(a.order() == Some(1));
        }
    }
}
