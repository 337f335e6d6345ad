//! Quotient lengths against a self-contained Smith-form count over ℤ/p^N.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mixsing::invariants as inv;
use mixsing::localalg;
use mixsing::pderiv::PDerivation;
use mixsing::{expr, Dvr, IdealPresentation, Series, VarSet};

/// Exponent vectors of total degree < k in n variables.
fn staircase(n: usize, k: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for e in 0..k {
        for mut rest in staircase(n - 1, k - e) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

fn val(mut a: u128, p: u128, cap: u32) -> u32 {
    if a == 0 {
        return cap;
    }
    let mut v = 0;
    while a.is_multiple_of(p) {
        a /= p;
        v += 1;
    }
    v
}

fn inv_mod(a: u128, m: u128) -> u128 {
    let (mut r0, mut r1) = (a as i128, m as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(m as i128) as u128
}

/// length of (ℤ/p^N)^cols / rowspan via diagonalization.
fn smith_length(mut rows: Vec<Vec<u128>>, cols: usize, p: u128, big_n: u32) -> u64 {
    let q = p.pow(big_n);
    let mut total = 0u64;
    let mut col_alive: Vec<usize> = (0..cols).collect();
    while !col_alive.is_empty() {
        let mut best: Option<(u32, usize, usize)> = None;
        for (ri, r) in rows.iter().enumerate() {
            for (ci, &c) in col_alive.iter().enumerate() {
                let v = val(r[c], p, big_n);
                if v < big_n && best.is_none_or(|b| v < b.0) {
                    best = Some((v, ri, ci));
                }
            }
        }
        let Some((v, ri, ci)) = best else {
            total += big_n as u64 * col_alive.len() as u64;
            break;
        };
        total += v as u64;
        let c = col_alive.remove(ci);
        let pivot = rows.swap_remove(ri);
        let unit = inv_mod(pivot[c] / p.pow(v), q);
        for r in rows.iter_mut() {
            if r[c] == 0 {
                continue;
            }
            let factor = (r[c] / p.pow(v)) % q * unit % q;
            for &k in col_alive.iter() {
                r[k] = (r[k] + q - factor * pivot[k] % q) % q;
            }
            r[c] = 0;
        }
        // column operations clear the rest of the pivot row; the remaining
        // block is unaffected since the pivot row is gone
    }
    total
}

/// length of V[[x]]/(gens + ⟨p^N⟩ + 𝔪_x^K) by brute force.
fn oracle_length(gens: &[Series], p: u64, big_n: u32, k: u32) -> u64 {
    let n = gens[0].vars().count();
    let basis = staircase(n, k);
    let index = |e: &[u32]| basis.iter().position(|b| b.as_slice() == e);
    let q = (p as u128).pow(big_n);
    let mut rows = Vec::new();
    for g in gens {
        let terms: Vec<(Vec<u32>, u128)> = g
            .terms()
            .map(|(m, c)| {
                let e = m.0[..n].iter().map(|x| *x as u32).collect();
                let s = g.ring().format(*c).parse::<i128>().unwrap();
                (e, s.rem_euclid(q as i128) as u128)
            })
            .collect();
        for shift in &basis {
            let mut row = vec![0u128; basis.len()];
            for (e, c) in &terms {
                let moved: Vec<u32> = e.iter().zip(shift).map(|(a, b)| a + b).collect();
                if let Some(i) = index(&moved) {
                    row[i] = (row[i] + c) % q;
                }
            }
            rows.push(row);
        }
    }
    smith_length(rows, basis.len(), p as u128, big_n)
}

fn parse(src: &str, p: u64, m: u32, n: usize, d: u32) -> Series {
    expr::parse(src, Dvr::unramified(p, m).unwrap(), VarSet::x(n), d)
        .unwrap()
        .0
}

#[test]
fn random_ideals_match_smith_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut compared = 0;
    for _ in 0..40 {
        let p = [3u64, 5][rng.gen_range(0..2)];
        let n = rng.gen_range(1..=2);
        let (big_n, k) = (rng.gen_range(2..=3u32), rng.gen_range(3..=4u32));
        let m = big_n + k + 1;
        let d = big_n + k + 1;
        let r = Dvr::unramified(p, m).unwrap();
        let vars = VarSet::x(n);
        let mut gens: Vec<Series> = (0..rng.gen_range(1..=3))
            .map(|_| Series::random(&mut rng, r, vars, d, 3, 0.4, true))
            .collect();
        gens.push(Series::constant(r, vars, d, r.pi_pow(big_n)));
        for e in staircase(n, k + 1).into_iter().filter(|e| e.iter().sum::<u32>() == k) {
            let e16: Vec<u16> = e.iter().map(|x| *x as u16).collect();
            gens.push(Series::monomial(
                r,
                vars,
                d,
                mixsing::Monomial::from_exps(&e16),
                r.one(),
            ));
        }
        let expected = oracle_length(&gens, p, big_n, k);
        let got = localalg::quotient_length(&IdealPresentation::new(gens).unwrap()).unwrap();
        assert_eq!(got.length, expected);
        compared += 1;
    }
    assert_eq!(compared, 40);
}

#[test]
fn tau_delta_of_px_by_hand() {
    // J_δ₀(px) = ⟨p^p, x^p(1 − p^{p−1})⟩, so with f the ideal is ⟨px, p^p, x^p⟩
    for p in [3u64, 5] {
        let m = 8;
        let hand = [
            parse("p*x1", p, m, 1, 12),
            parse(&format!("p^{p}"), p, m, 1, 12),
            parse(&format!("x1^{p}"), p, m, 1, 12),
        ];
        let expected = oracle_length(&hand, p, p as u32, p as u32);
        assert_eq!(expected, 2 * p - 1);
        let f = parse("p*x1", p, m, 1, 12);
        let got = inv::tau_delta(&f, &PDerivation::zero_like(&f)).unwrap();
        assert_eq!(got.length, expected);
    }
}

#[test]
fn tau_big_delta_of_a1_by_hand() {
    // ⟨x²+p², p, 2^p x^p, δ(f)⟩ = ⟨p, x²⟩ since δ(f) ≡ −p·u + (x terms of degree ≥ 2p) mod p,
    // giving length 2 and τ^Δ = 2/p
    for p in [3u64, 5, 7] {
        let f = parse("x1^2+p^2", p, 8, 1, 16);
        let hand = [parse("p", p, 8, 1, 16), parse("x1^2", p, 8, 1, 16)];
        let expected = oracle_length(&hand, p, 1, 3);
        assert_eq!(expected, 2);
        assert_eq!(inv::tau_big_delta(&f, 9).unwrap().length, expected);
    }
}

#[test]
fn tjurina_of_cusp_residue() {
    // over the residue field: ⟨x³+y², 3x², 2y⟩ has colength 2 for p ≥ 5
    let f = parse("x1^3+x2^2", 5, 6, 2, 10);
    let ideal = inv::tjurina_ideal(&f)
        .unwrap()
        .with(&[parse("p", 5, 6, 2, 10)])
        .unwrap();
    let gens: Vec<Series> = ideal.generators().to_vec();
    assert_eq!(
        localalg::quotient_length(&ideal).unwrap().length,
        oracle_length(&gens, 5, 1, 4)
    );
}
