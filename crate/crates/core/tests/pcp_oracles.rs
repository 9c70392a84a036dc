mod common;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use kcolor::pcp::{
    acceptance_probability, canonical_sigma, check_pairing, gen_label_cover, influence_decode, invert,
    monte_carlo_acceptance, LabelCoverInstance, LongCodeProof,
};

fn tiny_instances() -> Vec<(LabelCoverInstance, usize)> {
    let mut out = Vec::new();
    for seed in 0..4 {
        let (inst, _) = gen_label_cover(seed, 1 + seed as usize % 2, 2, 2, 1, seed % 2 == 0).unwrap();
        out.push((inst, 4));
    }
    let (inst, _) = gen_label_cover(9, 1, 2, 2, 2, false).unwrap();
    out.push((inst, 4));
    out
}

#[test]
fn exact_acceptance_matches_enumeration() {
    let mut rng = kcolor::seeded_rng(11);
    for (inst, k) in tiny_instances() {
        for trial in 0..3 {
            let proof = if trial == 0 {
                LongCodeProof::constant(&inst, k, 2).unwrap()
            } else {
                LongCodeProof::random(&inst, k, &mut rng).unwrap()
            };
            let exact = acceptance_probability(&inst, &proof, u64::MAX).unwrap().probability;
            let oracle = common::brute_force_acceptance(&inst, &proof);
            let exact_i = Ratio::new(*exact.numer() as i128, *exact.denom() as i128);
            assert_eq!(exact_i, oracle, "R={} trial {trial}", inst.r);
            assert!(exact_i >= Ratio::zero() && exact_i <= Ratio::one());
        }
    }
}

#[test]
fn constant_proof_is_always_rejected() {
    let (inst, _) = gen_label_cover(3, 2, 3, 2, 1, true).unwrap();
    let proof = LongCodeProof::constant(&inst, 6, 5).unwrap();
    let p = acceptance_probability(&inst, &proof, u64::MAX).unwrap().probability;
    assert!(p.is_zero());
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let (inst, _) = gen_label_cover(5, 2, 2, 2, 1, false).unwrap();
    let mut rng = kcolor::seeded_rng(17);
    let proof = LongCodeProof::random(&inst, 4, &mut rng).unwrap();
    let exact = acceptance_probability(&inst, &proof, u64::MAX).unwrap().probability_f64;
    let est = monte_carlo_acceptance(&inst, &proof, 1_000_000, &mut rng).unwrap();
    let se = (exact * (1.0 - exact) / est.samples as f64).sqrt();
    assert!(
        (est.estimate - exact).abs() <= 4.0 * se,
        "estimate {} vs exact {exact} (se {se})",
        est.estimate
    );
}

fn random_two_to_one(r: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..2 * r).map(|p| p / 2).collect();
    pi.shuffle(rng);
    pi
}

#[test]
fn canonical_sigma_pairs_preimages() {
    let mut rng = kcolor::seeded_rng(23);
    for _ in 0..100 {
        let r = rng.random_range(1..=5);
        let (pi, pi2) = (random_two_to_one(r, &mut rng), random_two_to_one(r, &mut rng));
        let (s, s2) = (canonical_sigma(&pi).unwrap(), canonical_sigma(&pi2).unwrap());
        assert!(check_pairing(&pi, &s, &pi2, &s2));
        for (pi, s) in [(&pi, &s), (&pi2, &s2)] {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..2 * r).collect::<Vec<_>>());
            let inv = invert(s);
            for i in 0..r {
                assert_eq!(pi[inv[2 * i]], i);
                assert_eq!(pi[inv[2 * i + 1]], i);
                assert!(inv[2 * i] < inv[2 * i + 1]);
            }
        }
    }
}

#[test]
fn rejects_projection_that_is_not_two_to_one() {
    assert!(canonical_sigma(&[0, 0, 0, 1]).is_err());
    assert!(canonical_sigma(&[0, 1, 2]).is_err());
}

#[test]
fn influence_decode_recovers_planted_labeling() {
    for seed in 0..5 {
        let (inst, lab) = gen_label_cover(seed, 2, 3, 2, 1, true).unwrap();
        let proof = LongCodeProof::from_labeling(&inst, &lab.unwrap(), 4).unwrap();
        let dec = influence_decode(&inst, &proof, 1, 0.1).unwrap();
        assert_eq!(dec.satisfied, dec.edges, "seed {seed}");
    }
}
