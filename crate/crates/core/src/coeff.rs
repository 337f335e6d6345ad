//! Truncated complete DVRs.
//!
//! A [`Dvr`] is a ring context for V/π^M where V is either Z_p (π = p) or
//! Z_p[t]/E(t) for an Eisenstein polynomial E of degree e. Elements are
//! [`Coeff`] values holding coordinates in the basis 1, π, …, π^{e−1}; the
//! i-th coordinate is reduced mod p^⌈(M−i)/e⌉, which makes the representation
//! canonical.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported ramification index.
pub const MAX_E: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ramification {
    Unramified,
    /// Coefficients of a monic Eisenstein polynomial, constant term first,
    /// leading 1 included.
    Eisenstein(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DvrSpec {
    pub p: u64,
    pub ramification: Ramification,
}

impl DvrSpec {
    pub fn unramified(p: u64) -> Self {
        DvrSpec {
            p,
            ramification: Ramification::Unramified,
        }
    }

    pub fn eisenstein(p: u64, coeffs: Vec<i64>) -> Self {
        DvrSpec {
            p,
            ramification: Ramification::Eisenstein(coeffs),
        }
    }

    pub fn e(&self) -> usize {
        match &self.ramification {
            Ramification::Unramified => 1,
            Ramification::Eisenstein(c) => c.len().saturating_sub(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::InvalidSpec(format!("{} is not prime", self.p)));
        }
        if let Ramification::Eisenstein(c) = &self.ramification {
            let e = c.len().saturating_sub(1);
            if !(2..=MAX_E).contains(&e) {
                return Err(Error::InvalidSpec(format!(
                    "Eisenstein degree must lie in 2..={MAX_E}, got {e}"
                )));
            }
            if c[e] != 1 {
                return Err(Error::InvalidSpec("Eisenstein polynomial must be monic".into()));
            }
            let p = self.p as i64;
            if c[..e].iter().any(|&a| a % p != 0) {
                return Err(Error::InvalidSpec(
                    "non-leading coefficients must be divisible by p".into(),
                ));
            }
            if c[0] % (p * p) == 0 {
                return Err(Error::InvalidSpec(
                    "constant term must have p-valuation exactly 1".into(),
                ));
            }
        }
        Ok(())
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of V/π^M, only meaningful together with its [`Dvr`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeff(pub(crate) [u64; MAX_E]);

/// Ring context for V/π^M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dvr {
    p: u64,
    e: usize,
    prec: u32,
    /// false for the residue field used as an exact ring, where π = 0 is
    /// intended rather than a truncation.
    truncated: bool,
    eis: [i64; MAX_E + 1],
    coord_mod: [u64; MAX_E],
    /// p^K with K = ⌈M/e⌉.
    modulus: u64,
    /// p^{K+1}, the working modulus for division by π.
    wide: u64,
}

fn pow_u64(b: u64, k: u32) -> Option<u64> {
    let mut r: u64 = 1;
    for _ in 0..k {
        r = r.checked_mul(b)?;
    }
    Some(r)
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

fn reduce_i128(n: i128, m: u64) -> u64 {
    n.rem_euclid(m as i128) as u64
}

impl Dvr {
    pub fn new(spec: &DvrSpec, prec: u32) -> Result<Self> {
        spec.validate()?;
        if prec == 0 {
            return Err(Error::PrecisionExhausted("precision must be at least 1".into()));
        }
        let e = spec.e();
        let mut eis = [0i64; MAX_E + 1];
        match &spec.ramification {
            Ramification::Unramified => {
                eis[0] = -(spec.p as i64);
                eis[1] = 1;
            }
            Ramification::Eisenstein(c) => eis[..c.len()].copy_from_slice(c),
        }
        let k = (prec as usize).div_ceil(e) as u32;
        let wide = pow_u64(spec.p, k + 1)
            .filter(|&w| w < (1u64 << 62))
            .ok_or_else(|| Error::InvalidSpec(format!("precision {prec} too large for p={}", spec.p)))?;
        let modulus = wide / spec.p;
        let mut coord_mod = [1u64; MAX_E];
        for (i, m) in coord_mod.iter_mut().enumerate().take(e) {
            let ki = (prec as usize).saturating_sub(i).div_ceil(e) as u32;
            *m = spec.p.pow(ki);
        }
        Ok(Dvr {
            p: spec.p,
            e,
            prec,
            truncated: true,
            eis,
            coord_mod,
            modulus,
            wide,
        })
    }

    pub fn unramified(p: u64, prec: u32) -> Result<Self> {
        Dvr::new(&DvrSpec::unramified(p), prec)
    }

    /// The residue field F_p as an exact ring (π = 0 on purpose).
    pub fn residue_field(p: u64) -> Result<Self> {
        let mut r = Dvr::unramified(p, 1)?;
        r.truncated = false;
        Ok(r)
    }

    pub fn spec(&self) -> DvrSpec {
        if self.e == 1 {
            DvrSpec::unramified(self.p)
        } else {
            DvrSpec::eisenstein(self.p, self.eis[..=self.e].to_vec())
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_ramified(&self) -> bool {
        self.e > 1
    }

    /// Same ring at another precision.
    pub fn with_precision(&self, prec: u32) -> Result<Self> {
        if prec == 0 {
            return Err(Error::PrecisionExhausted("no precision left".into()));
        }
        let mut r = Dvr::new(&self.spec(), prec)?;
        r.truncated = self.truncated;
        Ok(r)
    }

    /// Reduction mod π^{M'} of an element of `from`; also used to lift a lower
    /// precision element by its canonical representative.
    pub fn coerce(&self, a: Coeff) -> Coeff {
        self.normalize(a.0)
    }

    fn normalize(&self, c: [u64; MAX_E]) -> Coeff {
        let mut out = [0u64; MAX_E];
        for i in 0..self.e {
            out[i] = c[i] % self.coord_mod[i];
        }
        Coeff(out)
    }

    pub fn zero(&self) -> Coeff {
        Coeff::default()
    }

    pub fn one(&self) -> Coeff {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i128) -> Coeff {
        let mut c = [0u64; MAX_E];
        c[0] = reduce_i128(n, self.modulus);
        self.normalize(c)
    }

    /// The uniformizer (p itself when unramified).
    pub fn pi(&self) -> Coeff {
        if self.e == 1 {
            return self.from_int(self.p as i128);
        }
        let mut c = [0u64; MAX_E];
        c[1] = 1;
        self.normalize(c)
    }

    pub fn pi_pow(&self, k: u32) -> Coeff {
        self.pow(self.pi(), k)
    }

    /// Coordinates in the basis 1, π, …, π^{e−1}.
    pub fn coords(&self, a: Coeff) -> Vec<u64> {
        a.0[..self.e].to_vec()
    }

    pub fn from_coords(&self, c: &[i128]) -> Coeff {
        let mut out = [0u64; MAX_E];
        for (i, &v) in c.iter().enumerate().take(self.e) {
            out[i] = reduce_i128(v, self.modulus);
        }
        self.normalize(out)
    }

    pub fn is_zero(&self, a: Coeff) -> bool {
        a.0[..self.e].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: Coeff, b: Coeff) -> Coeff {
        let mut c = [0u64; MAX_E];
        for i in 0..self.e {
            c[i] = addmod(a.0[i], b.0[i], self.coord_mod[i]);
        }
        Coeff(c)
    }

    pub fn neg(&self, a: Coeff) -> Coeff {
        let mut c = [0u64; MAX_E];
        for i in 0..self.e {
            let m = self.coord_mod[i];
            c[i] = (m - a.0[i] % m) % m;
        }
        Coeff(c)
    }

    pub fn sub(&self, a: Coeff, b: Coeff) -> Coeff {
        self.add(a, self.neg(b))
    }

    fn mul_raw(&self, a: &[u64; MAX_E], b: &[u64; MAX_E], m: u64) -> [u64; MAX_E] {
        let e = self.e;
        let mut out = [0u64; MAX_E];
        if e == 1 {
            out[0] = mulmod(a[0], b[0], m);
            return out;
        }
        let mut prod = [0u64; 2 * MAX_E - 1];
        for i in 0..e {
            if a[i] == 0 {
                continue;
            }
            for j in 0..e {
                prod[i + j] = addmod(prod[i + j], mulmod(a[i], b[j], m), m);
            }
        }
        // t^e = −(E_0 + … + E_{e−1} t^{e−1})
        for d in (e..2 * e - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for j in 0..e {
                let r = reduce_i128(-(self.eis[j] as i128), m);
                prod[d - e + j] = addmod(prod[d - e + j], mulmod(c, r, m), m);
            }
        }
        out[..e].copy_from_slice(&prod[..e]);
        out
    }

    pub fn mul(&self, a: Coeff, b: Coeff) -> Coeff {
        self.normalize(self.mul_raw(&a.0, &b.0, self.modulus))
    }

    pub fn mul_int(&self, a: Coeff, n: i128) -> Coeff {
        self.mul(a, self.from_int(n))
    }

    pub fn pow(&self, a: Coeff, mut k: u32) -> Coeff {
        let mut base = a;
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// π-adic valuation, `None` for zero.
    pub fn valuation(&self, a: Coeff) -> Option<u32> {
        let mut best: Option<u32> = None;
        for i in 0..self.e {
            let mut c = a.0[i];
            if c == 0 {
                continue;
            }
            let mut v = 0u32;
            while c.is_multiple_of(self.p) {
                c /= self.p;
                v += 1;
            }
            let val = v * self.e as u32 + i as u32;
            best = Some(best.map_or(val, |b| b.min(val)));
        }
        best
    }

    pub fn is_unit(&self, a: Coeff) -> bool {
        self.valuation(a) == Some(0)
    }

    /// Image in the residue field F_p.
    pub fn residue(&self, a: Coeff) -> u64 {
        a.0[0] % self.p
    }

    /// The π-digit of `a`: the value at `a` of the derivation V → F_p sending
    /// π to 1.
    pub fn d_dpi(&self, a: Coeff) -> Result<u64> {
        if self.e == 1 {
            return Err(Error::UnramifiedUnsupported);
        }
        Ok(a.0[1] % self.p)
    }

    pub fn inv_unit(&self, a: Coeff) -> Result<Coeff> {
        let r = self.residue(a);
        if r == 0 {
            return Err(Error::NotAUnit);
        }
        let mut x = self.from_int(modpow(r, self.p - 2, self.p) as i128);
        let two = self.from_int(2);
        let mut steps = 1u32;
        while steps < 2 * self.prec {
            x = self.mul(x, self.sub(two, self.mul(a, x)));
            steps *= 2;
        }
        x = self.mul(x, self.sub(two, self.mul(a, x)));
        debug_assert_eq!(self.mul(a, x), self.one());
        Ok(x)
    }

    /// Divides an element of positive valuation by π. The result lives in the
    /// ring of precision M−1.
    pub fn div_pi(&self, a: Coeff) -> Result<(Dvr, Coeff)> {
        if self.prec < 2 {
            return Err(Error::PrecisionExhausted("division by π at precision 1".into()));
        }
        if !self.is_zero(a) && self.valuation(a) == Some(0) {
            return Err(Error::Precondition("division of a unit by π".into()));
        }
        let lower = self.with_precision(self.prec - 1)?;
        if self.e == 1 {
            let mut c = [0u64; MAX_E];
            c[0] = a.0[0] / self.p;
            return Ok((lower, lower.normalize(c)));
        }
        // π·Q(π) = −E_0 = p·w0 with Q = π^{e−1} + E_{e−1}π^{e−2} + … + E_1.
        let mut q = [0u64; MAX_E];
        for (j, qj) in q.iter_mut().enumerate().take(self.e) {
            *qj = reduce_i128(self.eis[j + 1] as i128, self.wide);
        }
        let t = self.mul_raw(&a.0, &q, self.wide);
        let mut s = [0u64; MAX_E];
        for i in 0..self.e {
            debug_assert_eq!(t[i] % self.p, 0);
            s[i] = t[i] / self.p;
        }
        let w0 = lower.from_int(-(self.eis[0] as i128) / self.p as i128);
        let s = lower.normalize(s);
        Ok((lower, lower.mul(s, lower.inv_unit(w0)?)))
    }

    /// Exact division by p in the unramified case (precision drops by one).
    pub fn div_p(&self, a: Coeff) -> Result<(Dvr, Coeff)> {
        if self.e != 1 {
            return Err(Error::RamifiedUnsupported);
        }
        self.div_pi(a)
    }

    /// a = u·π^v; `None` when a ≡ 0 mod π^M. The unit is the canonical lift of
    /// u mod π^{M−v}.
    pub fn unit_decompose(&self, a: Coeff) -> Option<(u32, Coeff)> {
        let v = self.valuation(a)?;
        let mut ring = *self;
        let mut u = a;
        for _ in 0..v {
            let (r, q) = ring.div_pi(u).expect("valuation below precision");
            ring = r;
            u = q;
        }
        Some((v, self.coerce(u)))
    }

    /// The Frobenius lift on Z_p, which is the identity.
    pub fn frob(&self, a: Coeff) -> Result<Coeff> {
        if self.e != 1 {
            return Err(Error::RamifiedUnsupported);
        }
        Ok(a)
    }

    /// Square root of a unit with residue in {1, …, (p−1)/2}.
    pub fn hensel_sqrt(&self, a: Coeff) -> Result<Coeff> {
        if self.p == 2 {
            return Err(Error::InvalidSpec("square roots need p odd".into()));
        }
        let r = self.residue(a);
        if r == 0 {
            return Err(Error::NotAUnit);
        }
        let b0 = (1..=(self.p - 1) / 2)
            .find(|&b| b * b % self.p == r)
            .ok_or_else(|| Error::NotASquare { unit: self.format(a) })?;
        let half = self.inv_unit(self.from_int(2))?;
        let mut b = self.from_int(b0 as i128);
        for _ in 0..=2 * self.prec + 2 {
            let next = self.mul(half, self.add(b, self.mul(a, self.inv_unit(b)?)));
            if next == b {
                break;
            }
            b = next;
        }
        debug_assert_eq!(self.mul(b, b), a);
        Ok(b)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Coeff {
        let mut c = [0u64; MAX_E];
        for i in 0..self.e {
            c[i] = rng.gen_range(0..self.coord_mod[i]);
        }
        Coeff(c)
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Coeff {
        loop {
            let a = self.random(rng);
            if self.is_unit(a) {
                return a;
            }
        }
    }

    /// Random element of πV/π^M.
    pub fn random_nonunit<R: Rng + ?Sized>(&self, rng: &mut R) -> Coeff {
        let a = self.random(rng);
        self.sub(a, self.from_int(self.residue(a) as i128))
    }

    fn balanced(&self, c: u64, m: u64) -> i128 {
        if c > m / 2 {
            c as i128 - m as i128
        } else {
            c as i128
        }
    }

    /// Balanced integer representative of coordinate `i`.
    pub fn coord_signed(&self, a: Coeff, i: usize) -> i128 {
        self.balanced(a.0[i], self.coord_mod[i])
    }

    pub fn format(&self, a: Coeff) -> String {
        if self.e == 1 {
            return self.coord_signed(a, 0).to_string();
        }
        let mut s = String::new();
        for i in 0..self.e {
            let c = self.coord_signed(a, i);
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if s.is_empty() {
                if c < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(if c < 0 { " - " } else { " + " });
            }
            match (i, mag) {
                (0, m) => write!(s, "{m}").unwrap(),
                (1, 1) => s.push_str("pi"),
                (1, m) => write!(s, "{m}*pi").unwrap(),
                (k, 1) => write!(s, "pi^{k}").unwrap(),
                (k, m) => write!(s, "{m}*pi^{k}").unwrap(),
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

pub fn modpow(mut b: u64, mut k: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while k > 0 {
        if k & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        k >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ram3() -> Dvr {
        // π² = 3
        Dvr::new(&DvrSpec::eisenstein(3, vec![-3, 0, 1]), 6).unwrap()
    }

    #[test]
    fn unit_decompose_examples() {
        let r = Dvr::unramified(5, 4).unwrap();
        assert_eq!(r.unit_decompose(r.from_int(50)), Some((2, r.from_int(2))));
        assert_eq!(r.unit_decompose(r.zero()), None);
        let v = ram3();
        let u = v.add(v.one(), v.pi());
        let a = v.mul(v.pi(), u);
        assert_eq!(v.unit_decompose(a), Some((1, u)));
    }

    #[test]
    fn pi_squared_is_three() {
        let v = ram3();
        assert_eq!(v.mul(v.pi(), v.pi()), v.from_int(3));
        assert_eq!(v.valuation(v.from_int(9)), Some(4));
        assert_eq!(v.valuation(v.from_int(27)), None);
    }

    #[test]
    fn frob_is_identity() {
        let r = Dvr::unramified(5, 4).unwrap();
        for n in [7, 5, 26] {
            assert_eq!(r.frob(r.from_int(n)).unwrap(), r.from_int(n));
        }
        assert_eq!(ram3().frob(ram3().one()), Err(Error::RamifiedUnsupported));
    }

    #[test]
    fn hensel_examples() {
        let r = Dvr::unramified(7, 3).unwrap();
        assert_eq!(r.hensel_sqrt(r.from_int(4)).unwrap(), r.from_int(2));
        let a = r.from_int(8);
        let b = r.hensel_sqrt(a).unwrap();
        assert_eq!(r.mul(b, b), a);
        assert_eq!(r.residue(b), 1);
        assert!(matches!(r.hensel_sqrt(r.from_int(3)), Err(Error::NotASquare { .. })));
    }

    #[test]
    fn div_pi_ramified_keeps_precision() {
        let v = ram3();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = v.random(&mut rng);
            let a = v.mul(v.pi(), x);
            let (lower, q) = v.div_pi(a).unwrap();
            assert_eq!(q, lower.coerce(x));
        }
    }

    #[test]
    fn d_dpi_is_a_derivation() {
        let v = ram3();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(v.d_dpi(v.pi()).unwrap(), 1);
        for _ in 0..200 {
            let (a, b) = (v.random(&mut rng), v.random(&mut rng));
            let p = v.p();
            let lhs = v.d_dpi(v.mul(a, b)).unwrap();
            let rhs = (v.residue(a) * v.d_dpi(b).unwrap() + v.residue(b) * v.d_dpi(a).unwrap()) % p;
            assert_eq!(lhs, rhs);
            assert_eq!(
                v.d_dpi(v.add(a, b)).unwrap(),
                (v.d_dpi(a).unwrap() + v.d_dpi(b).unwrap()) % p
            );
        }
    }

    #[test]
    fn spec_validation() {
        assert!(DvrSpec::unramified(9).validate().is_err());
        assert!(DvrSpec::eisenstein(3, vec![-9, 0, 1]).validate().is_err());
        assert!(DvrSpec::eisenstein(3, vec![-3, 1, 1]).validate().is_err());
        assert!(DvrSpec::eisenstein(3, vec![3, 3, 1]).validate().is_ok());
    }

    #[test]
    fn format_ramified() {
        let v = ram3();
        assert_eq!(v.format(v.add(v.one(), v.pi())), "1 + pi");
        assert_eq!(v.format(v.neg(v.pi())), "-pi");
    }
}
