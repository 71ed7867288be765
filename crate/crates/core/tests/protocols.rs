use phycrypt::attacks::babai_attack;
use phycrypt::params::min_alpha;
use phycrypt::protocols::{
    bits_to_hex, cipher_symbols, decrypt, encrypt, run_key_agreement, universal_hash, CipherContext, Coder,
    KeyAgreementConfig, ToeplitzSeed,
};
use phycrypt::stats::wilson_interval;
use phycrypt::wiretap::{eve_receive, make_instance};
use phycrypt::{Error, SeededRng, SystemParams};

fn hardness(n: usize, m: u64) -> SystemParams {
    SystemParams::new(n, m, min_alpha(n, 1.0, 1.0) * 1.01, 1.0).unwrap()
}

fn random_bits(len: usize, rng: &mut SeededRng) -> Vec<bool> {
    (0..len).map(|_| rng.bit()).collect()
}

// ---- hash ----

#[test]
fn hash_of_zero_is_zero() {
    let mut rng = SeededRng::new(1, 0);
    let seed = ToeplitzSeed::random(40, 16, &mut rng).unwrap();
    assert_eq!(universal_hash(&seed, &[false; 40], 16).unwrap(), vec![false; 16]);
}

#[test]
fn hash_is_linear() {
    let mut rng = SeededRng::new(2, 0);
    let seed = ToeplitzSeed::random(50, 20, &mut rng).unwrap();
    for _ in 0..200 {
        let (x, y) = (random_bits(50, &mut rng), random_bits(50, &mut rng));
        let xy: Vec<bool> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
        let hx = universal_hash(&seed, &x, 20).unwrap();
        let hy = universal_hash(&seed, &y, 20).unwrap();
        let sum: Vec<bool> = hx.iter().zip(&hy).map(|(a, b)| a ^ b).collect();
        assert_eq!(universal_hash(&seed, &xy, 20).unwrap(), sum);
    }
}

#[test]
fn hash_matches_explicit_toeplitz_product() {
    let mut rng = SeededRng::new(3, 0);
    let (len, eta) = (9, 4);
    let seed = ToeplitzSeed::random(len, eta, &mut rng).unwrap();
    // T[i][j] depends only on i − j
    let t = |i: usize, j: usize| seed.bits[(i as isize - j as isize + len as isize - 1) as usize];
    for _ in 0..50 {
        let x = random_bits(len, &mut rng);
        let want: Vec<bool> = (0..eta).map(|i| (0..len).filter(|&j| x[j] && t(i, j)).count() % 2 == 1).collect();
        assert_eq!(universal_hash(&seed, &x, eta).unwrap(), want);
    }
}

#[test]
fn hash_collisions_are_rare() {
    // a fresh seed per pair; collision probability is 2^-32 per pair
    let mut rng = SeededRng::new(4, 0);
    let (len, eta) = (64, 32);
    let mut collisions = 0;
    for _ in 0..100_000 {
        let seed = ToeplitzSeed::random(len, eta, &mut rng).unwrap();
        let x = random_bits(len, &mut rng);
        let mut y = random_bits(len, &mut rng);
        if x == y {
            y[0] = !y[0];
        }
        if universal_hash(&seed, &x, eta).unwrap() == universal_hash(&seed, &y, eta).unwrap() {
            collisions += 1;
        }
    }
    assert!(collisions <= 5, "{collisions} collisions");
}

#[test]
fn hash_length_mismatch_is_an_error() {
    let mut rng = SeededRng::new(5, 0);
    let seed = ToeplitzSeed::random(10, 8, &mut rng).unwrap();
    assert!(matches!(universal_hash(&seed, &[true; 11], 8), Err(Error::DimensionMismatch { .. })));
    assert!(universal_hash(&seed, &[true; 10], 9).is_err());
    assert!(ToeplitzSeed::random(0, 8, &mut rng).is_err());
}

// ---- key agreement ----

#[test]
fn noiseless_key_agreement_always_succeeds() {
    for n in [2, 4, 8] {
        let p = SystemParams::new(n, 16, 1.0, 1.0).unwrap().noiseless();
        let cfg = KeyAgreementConfig::new(p, 32, Coder::None).unwrap();
        for seed in 0..20 {
            let t = run_key_agreement(&cfg, seed).unwrap();
            assert!(t.success && t.all_messages_correct);
            assert_eq!(t.alice_key_bits, t.bob_key_bits);
            assert_eq!(t.alice_key_bits.len(), 32);
            assert_eq!(t.messages, t.bob_messages);
        }
    }
}

#[test]
fn too_few_messages_is_a_config_error() {
    let p = hardness(16, 256);
    let cfg = KeyAgreementConfig::new(p.clone(), 64, Coder::None).unwrap();
    let err = KeyAgreementConfig::with_message_count(p, 64, cfg.c - 1, Coder::None);
    assert!(matches!(err, Err(Error::Config(_))));
}

#[test]
fn repetition_lowers_message_error_rate() {
    let p = hardness(16, 256).with_noise_scale(1e-4).unwrap();
    let runs = 100;
    let rate = |coder| {
        let cfg = KeyAgreementConfig::new(p.clone(), 64, coder).unwrap();
        let (mut bad, mut total) = (0u64, 0u64);
        for seed in 0..runs {
            let t = run_key_agreement(&cfg, seed).unwrap();
            bad += t.message_symbol_errors.iter().filter(|&&e| e > 0).count() as u64;
            total += t.c as u64;
        }
        (bad, total)
    };
    let (b0, t0) = rate(Coder::None);
    let (b3, t3) = rate(Coder::Repetition3);
    eprintln!("message error rate: uncoded {b0}/{t0}, repetition-3 {b3}/{t3}");
    assert!(b0 > 0, "noise scale too small to compare coders");
    let (_, hi3) = wilson_interval(b3, t3);
    let (lo0, _) = wilson_interval(b0, t0);
    assert!(hi3 < lo0, "repetition-3 [.., {hi3:.4}] vs uncoded [{lo0:.4}, ..]");
}

#[test]
fn hardness_level_success_rate_is_reported() {
    let p = hardness(16, 256);
    let cfg = KeyAgreementConfig::new(p, 64, Coder::Repetition3).unwrap();
    let runs = 200u64;
    let ok = (0..runs).filter(|&s| run_key_agreement(&cfg, s).unwrap().success).count() as u64;
    let (lo, hi) = wilson_interval(ok, runs);
    eprintln!("hardness-level key agreement: {ok}/{runs} succeeded, 95% CI [{lo:.4}, {hi:.4}]");
    assert!(lo <= ok as f64 / runs as f64 && ok as f64 / runs as f64 <= hi);
}

#[test]
fn transcript_json_fields() {
    let p = SystemParams::new(4, 16, 1.0, 1.0).unwrap().noiseless();
    let cfg = KeyAgreementConfig::new(p, 16, Coder::Repetition3).unwrap();
    let t = run_key_agreement(&cfg, 99).unwrap();
    let v: serde_json::Value = serde_json::to_value(&t).unwrap();
    for key in ["params", "seed", "messages", "bob_messages", "hash_seed", "alice_key", "bob_key", "success", "encoding"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["seed"], 99);
    assert_eq!(v["coder"], "repetition-3");
    assert_eq!(v["alice_key"].as_str().unwrap(), bits_to_hex(&t.alice_key_bits));
    assert!(v["hash_seed"].as_str().unwrap().chars().all(|c| c.is_ascii_hexdigit()));
    // same seed, same transcript
    assert_eq!(run_key_agreement(&cfg, 99).unwrap(), t);
}

// ---- cipher ----

#[test]
fn zero_message_sends_the_key() {
    let p = SystemParams::new(5, 16, 1.0, 1.0).unwrap();
    let ctx = CipherContext::new(vec![0, 3, 7, 15, 8], p).unwrap();
    assert_eq!(cipher_symbols(&ctx, &[false; 5]).unwrap().symbols, ctx.s);
    let zero = CipherContext::new(vec![0; 5], ctx.params.clone()).unwrap();
    assert_eq!(cipher_symbols(&zero, &[true; 5]).unwrap().symbols, vec![8; 5]);
}

#[test]
fn odd_constellation_is_an_error() {
    let p = SystemParams::new(3, 7, 1.0, 1.0).unwrap();
    assert!(CipherContext::new(vec![0; 3], p.clone()).is_err());
    let mut rng = SeededRng::new(6, 0);
    assert!(CipherContext::random(p, &mut rng).is_err());
}

#[test]
fn fresh_channels_give_distinct_ciphertexts() {
    let p = hardness(8, 64);
    let mut rng = SeededRng::new(7, 0);
    let ctx = CipherContext::random(p.clone(), &mut rng).unwrap();
    let msg = random_bits(8, &mut rng);
    let c1 = encrypt(&ctx, &msg, &make_instance(&p, &mut rng).unwrap(), &mut rng).unwrap();
    let c2 = encrypt(&ctx, &msg, &make_instance(&p, &mut rng).unwrap(), &mut rng).unwrap();
    assert_ne!(c1.received, c2.received);
    assert_ne!(c1.transmitted, c2.transmitted);
}

#[test]
fn noiseless_round_trip() {
    let mut rng = SeededRng::new(8, 0);
    for n in [1, 3, 8, 16] {
        let p = hardness(n, 256).noiseless();
        let ctx = CipherContext::random(p.clone(), &mut rng).unwrap();
        for _ in 0..50 {
            let msg = random_bits(n, &mut rng);
            let inst = make_instance(&p, &mut rng).unwrap();
            let ct = encrypt(&ctx, &msg, &inst, &mut rng).unwrap();
            assert_eq!(decrypt(&ctx, &ct.received, &inst).unwrap(), msg);
        }
    }
}

#[test]
fn tiny_noise_round_trip_is_exact() {
    let p = hardness(16, 256).with_noise_scale(1e-6).unwrap();
    let mut rng = SeededRng::new(9, 0);
    let ctx = CipherContext::random(p.clone(), &mut rng).unwrap();
    for _ in 0..1000 {
        let msg = random_bits(16, &mut rng);
        let inst = make_instance(&p, &mut rng).unwrap();
        let ct = encrypt(&ctx, &msg, &inst, &mut rng).unwrap();
        assert_eq!(decrypt(&ctx, &ct.received, &inst).unwrap(), msg);
    }
}

#[test]
fn bob_beats_eve_with_the_key() {
    // Eve is handed the key, so the gap is entirely the channel advantage
    let n = 16;
    let p = hardness(n, 256).with_noise_scale(0.03).unwrap();
    let mut rng = SeededRng::new(10, 0);
    let ctx = CipherContext::random(p.clone(), &mut rng).unwrap();
    let (mut bob, mut eve, mut bits) = (0u64, 0u64, 0u64);
    for _ in 0..1000 {
        let msg = random_bits(n, &mut rng);
        let inst = make_instance(&p, &mut rng).unwrap();
        let ct = encrypt(&ctx, &msg, &inst, &mut rng).unwrap();
        let b = decrypt(&ctx, &ct.received, &inst).unwrap();
        let x = cipher_symbols(&ctx, &msg).unwrap();
        let (g, ye) = eve_receive(&inst, &x, &p, &mut rng).unwrap();
        let est = babai_attack(&g, &ye, p.m).unwrap().estimate;
        let half = p.m / 2;
        let e: Vec<bool> = est.symbols.iter().zip(&ctx.s).map(|(&v, &s)| {
            let d = (v + p.m - s) % p.m;
            // nearest of {0, M/2} on the ring
            let to_half = d.abs_diff(half);
            let to_zero = d.min(p.m - d);
            to_half < to_zero
        }).collect();
        bob += b.iter().zip(&msg).filter(|(a, m)| a != m).count() as u64;
        eve += e.iter().zip(&msg).filter(|(a, m)| a != m).count() as u64;
        bits += n as u64;
    }
    let (bl, bh) = wilson_interval(bob, bits);
    let (el, eh) = wilson_interval(eve, bits);
    eprintln!("bit error rate: bob {bob}/{bits} [{bl:.4}, {bh:.4}], eve {eve}/{bits} [{el:.4}, {eh:.4}]");
    assert!(bh < el);
}

#[test]
fn successive_instances_are_uncorrelated() {
    let p = hardness(4, 16);
    let mut rng = SeededRng::new(11, 0);
    let trials = 5000;
    let firsts: Vec<(f64, f64)> = (0..trials)
        .map(|_| {
            let inst = make_instance(&p, &mut rng).unwrap();
            (inst.a[(0, 0)], inst.b[(0, 0)])
        })
        .collect();
    let corr = |xs: &[f64]| {
        let (a, b) = (&xs[..xs.len() - 1], &xs[1..]);
        let m = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (m(a), m(b));
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    };
    let bound = 3.0 / (trials as f64).sqrt();
    let a: Vec<f64> = firsts.iter().map(|f| f.0).collect();
    let b: Vec<f64> = firsts.iter().map(|f| f.1).collect();
    assert!(corr(&a).abs() < bound, "A lag-1 correlation {}", corr(&a));
    assert!(corr(&b).abs() < bound, "B lag-1 correlation {}", corr(&b));
}
