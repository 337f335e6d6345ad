use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mixsing::acceptance::{agree, staircase_count};
use mixsing::invariants::{self as inv, Backend, GenericSampler};
use mixsing::localalg::{self, snf};
use mixsing::normform;
use mixsing::pderiv::{self, PDerivation};
use mixsing::{expr, Dvr, IdealPresentation, Monomial, Series, VarSet};

fn ring(p: u64, m: u32) -> Dvr {
    Dvr::unramified(p, m).unwrap()
}

fn prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(3u64), Just(5), Just(7)]
}

/// π^a·unit + Σ unit·x_i^{b_i} + a few mixed terms.
fn isolated_like(rng: &mut ChaCha8Rng, r: Dvr, n: usize, d: u32) -> Series {
    let mut f = Series::zero(r, VarSet::x(n), d);
    f.add_term(
        Monomial::one(),
        r.mul(r.pi_pow(rng.gen_range(1..=3)), r.random_unit(rng)),
    );
    for i in 0..n {
        f.add_term(Monomial::var(i).scale(rng.gen_range(2..=3)), r.random_unit(rng));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let e: Vec<u16> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        let m = Monomial::from_exps(&e);
        if m.degree() >= 2 {
            f.add_term(m, r.mul(r.pi(), r.random_unit(rng)));
        }
    }
    f
}

fn unit_series(rng: &mut ChaCha8Rng, like: &Series) -> Series {
    let r = *like.ring();
    let mut u = Series::random(rng, r, like.vars(), like.degree(), 2, 0.4, false);
    let c0 = u.constant_term();
    u.add_term(Monomial::one(), r.sub(r.random_unit(rng), c0));
    u
}

/// x_i ↦ c_i·x_i + (lower-triangular linear part) + quadratic tail.
fn triangular_automorphism(rng: &mut ChaCha8Rng, like: &Series) -> Vec<Series> {
    let r = *like.ring();
    let k = like.vars().count();
    (0..k)
        .map(|i| {
            let mut s = like.zero_like();
            s.add_term(Monomial::var(i), r.random_unit(rng));
            for j in 0..i {
                s.add_term(Monomial::var(j), r.random(rng));
            }
            let tail = Series::random(rng, r, like.vars(), like.degree(), 2, 0.3, false).homogeneous_part(2);
            s.add(&tail).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn coefficient_ring_laws(p in prime(), m in 1u32..9, seed: u64) {
        let r = ring(p, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (r.random(&mut rng), r.random(&mut rng), r.random(&mut rng));
        prop_assert_eq!(r.mul(r.add(a, b), c), r.add(r.mul(a, c), r.mul(b, c)));
        prop_assert_eq!(r.add(r.sub(a, b), b), a);
        let u = r.random_unit(&mut rng);
        prop_assert_eq!(r.mul(u, r.inv_unit(u).unwrap()), r.one());
        if let (Some(va), Some(vb)) = (r.valuation(a), r.valuation(b)) {
            if va + vb < m {
                prop_assert_eq!(r.valuation(r.mul(a, b)), Some(va + vb));
            }
        }
    }

    #[test]
    fn parser_round_trip(p in prime(), n in 1usize..4, seed: u64) {
        let r = ring(p, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Series::random(&mut rng, r, VarSet::x(n), 8, 4, 0.3, false);
        let (g, _) = expr::parse(&f.to_string(), r, VarSet::x(n), 8).unwrap();
        prop_assert_eq!(g, f);
    }

    #[test]
    fn tilde_projects_back(p in prime(), n in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Series::random(&mut rng, ring(p, 6), VarSet::x(n), 8, 4, 0.4, true);
        let (lift, _) = f.tilde_lift().unwrap();
        prop_assert!(agree(&lift.project_pr().unwrap(), &f));
        prop_assert_eq!(lift.vars().y(), Some(n));
    }

    #[test]
    fn delta_sum_and_product_rules(p in prime(), m in 3u32..7, seed: u64) {
        let r = ring(p, m);
        let vars = VarSet::x(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Series::random(&mut rng, r, vars, 6, 3, 0.5, false);
        let b = Series::random(&mut rng, r, vars, 6, 3, 0.5, false);
        let delta = PDerivation::new((0..2).map(|_| Series::random(&mut rng, r, vars, 6, 2, 0.5, false)).collect()).unwrap();
        let lower = r.with_precision(m - 1).unwrap();
        let da = pderiv::delta_eval(&delta, &a).unwrap();
        let db = pderiv::delta_eval(&delta, &b).unwrap();
        let sum = pderiv::delta_eval(&delta, &a.add(&b).unwrap()).unwrap();
        let cp = pderiv::c_p(&a, &b).unwrap().change_ring(lower);
        prop_assert!(agree(&sum, &da.add(&db).unwrap().add(&cp).unwrap()));
        let prod = pderiv::delta_eval(&delta, &a.mul(&b).unwrap()).unwrap();
        let ap = a.pow(p as u32).unwrap().change_ring(lower);
        let bp = b.pow(p as u32).unwrap().change_ring(lower);
        let rule = ap.mul(&db).unwrap().add(&bp.mul(&da).unwrap()).unwrap().add(&da.mul(&db).unwrap().scale(lower.pi())).unwrap();
        prop_assert!(agree(&prod, &rule));
    }

    #[test]
    fn delta0_closed_form(p in prime(), m in 2u32..7, n in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Series::random(&mut rng, ring(p, m), VarSet::x(n), 6, 3, 0.4, false);
        let closed = pderiv::delta0_closed(&f).unwrap();
        let rec = pderiv::delta_eval(&PDerivation::zero_like(&f), &f).unwrap();
        prop_assert!(agree(&closed, &rec));
    }

    #[test]
    fn delta_is_independent_of_term_order(p in prime(), seed: u64) {
        let r = ring(p, 5);
        let vars = VarSet::x(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Series::random(&mut rng, r, vars, 6, 3, 0.5, false);
        let delta = PDerivation::new((0..2).map(|_| Series::random(&mut rng, r, vars, 6, 2, 0.5, false)).collect()).unwrap();
        let mut order: Vec<usize> = (0..f.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let a = pderiv::delta_eval(&delta, &f).unwrap();
        let b = pderiv::delta_eval_ordered(&delta, &f, &order).unwrap();
        prop_assert!(agree(&a, &b));
    }

    #[test]
    fn monomial_staircase(n in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = ring(5, 14);
        let vars = VarSet::x(n);
        let mut gens = vec![(rng.gen_range(1..=4u32), vec![0u16; n])];
        for i in 0..n {
            let mut e = vec![0u16; n];
            e[i] = rng.gen_range(1..=3);
            gens.push((0, e));
        }
        for _ in 0..rng.gen_range(0..=2) {
            gens.push((rng.gen_range(0..=2), (0..n).map(|_| rng.gen_range(0..=2)).collect()));
        }
        let ideal = IdealPresentation::new(
            gens.iter().map(|(a, e)| Series::monomial(r, vars, 14, Monomial::from_exps(e), r.pi_pow(*a))).collect(),
        ).unwrap();
        let got = localalg::quotient_length(&ideal).unwrap();
        prop_assert_eq!(got.length, staircase_count(&gens, n, 14, 14));
        prop_assert_eq!(snf::jet_quotient_length(&ideal, got.certificate.degree), got.length);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn tau_v_is_contact_invariant(p in prop_oneof![Just(5u64), Just(7)], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let f = isolated_like(&mut rng, ring(p, 8), n, 12);
        let (lift, _) = f.tilde_lift().unwrap();
        let smp = GenericSampler::new(seed, 5);
        let base = inv::sampled_colength(&lift, &smp, true).map(|t| t.value);
        let phi = triangular_automorphism(&mut rng, &lift);
        let g = lift.substitute(&phi).unwrap().mul(&unit_series(&mut rng, &lift)).unwrap();
        prop_assert_eq!(g.order(), lift.order());
        prop_assert_eq!(inv::sampled_colength(&g, &smp, true).map(|t| t.value).ok(), base.ok());
    }

    #[test]
    fn milnor_tjurina_and_lower_bound(p in prop_oneof![Just(3u64), Just(5)], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let f = isolated_like(&mut rng, ring(p, 8), n, 12);
        let smp = GenericSampler::new(seed, 5);
        let s = f.tilde_lift().unwrap().0.order().unwrap();
        if let Ok(t) = inv::tau_v(&f, &smp) {
            prop_assert!(t.value >= inv::tau_lower_bound(n, s));
            if let Ok(m) = inv::mu_v(&f, &smp) {
                prop_assert!(m.value >= t.value);
            }
        }
    }

    #[test]
    fn tjurina_sandwich(p in prop_oneof![Just(3u64), Just(5)], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let f = isolated_like(&mut rng, ring(p, 8), n, 12);
        let (Ok(big), Ok(u)) = (inv::tau_big_delta(&f, seed), inv::ord_uniformizer(&f, 16)) else {
            return Ok(());
        };
        if let Ok(t) = inv::tau_delta(&f, &inv::random_pderivation(&f, seed ^ 1)) {
            prop_assert!(big.value <= t.value);
            prop_assert!(t.value <= big.value * inv::Rational::from_integer(u.n as i64));
        }
    }

    #[test]
    fn tau_big_delta_ignores_delta(p in prop_oneof![Just(3u64), Just(5)], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let f = isolated_like(&mut rng, ring(p, 8), n, 12);
        let a = inv::tau_big_delta_backend(&f, seed, Backend::Dense).map(|t| t.length);
        let b = inv::tau_big_delta_backend(&f, seed.wrapping_add(1), Backend::Mora).map(|t| t.length);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn classification_matches_tau_v(p in prop_oneof![Just(5u64), Just(7)], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let f = isolated_like(&mut rng, ring(p, 8), n, 10);
        let c = normform::classify(&f, &GenericSampler::new(seed, 5), 10);
        prop_assert!(c.is_ok(), "{:?}", c);
        let c = c.unwrap();
        if let Some(t) = c.tau_v {
            match c.kind {
                normform::Kind::Regular => prop_assert_eq!(t, 0),
                normform::Kind::Morse => prop_assert_eq!(t, 1),
                normform::Kind::Degenerate { .. } => prop_assert!(t >= 2),
            }
        }
    }

    #[test]
    fn splitting_reconstructs(p in prop_oneof![Just(3u64), Just(5)], n in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = ring(p, 8);
        let mut f = Series::random(&mut rng, r, VarSet::x(n), 8, 4, 0.4, true).truncate(8);
        f.add_term(Monomial::var(0).scale(2), r.random_unit(&mut rng));
        f.add_term(Monomial::one(), r.mul(r.pi_pow(2), r.random_unit(&mut rng)));
        if f.order() == Some(2) {
            let s = normform::split(&f, 6).unwrap();
            prop_assert!(s.r >= 1);
            prop_assert_eq!(s.k, s.r - 1);
            // the residual lives in the non-split variables and has order ≥ 3
            prop_assert!(s.residual.order().is_none_or(|o| o >= 3));
        }
    }

    #[test]
    fn hessian_rank_is_congruence_invariant(p in prop_oneof![Just(3u64), Just(5)], n in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = ring(p, 6);
        let f = Series::random(&mut rng, r, VarSet::x(n), 6, 3, 0.6, true);
        let Ok(h) = normform::hessian(&f) else { return Ok(()) };
        let (lift, _) = f.tilde_lift().unwrap();
        let phi = triangular_automorphism(&mut rng, &lift);
        let g = lift.substitute(&phi).unwrap();
        let h2 = normform::hessian_of_lift(&g);
        prop_assert_eq!(normform::diagonalize_rank(&h).r, normform::diagonalize_rank(&h2).r);
    }
}
