use phycrypt::attacks::{
    babai_attack, ber_experiment, bdd_via_mimo, decision_to_search, error_handling_search, exact_ml_decode,
    rerandomize_column, toy_parameters, verify_solution, zf_decode, BddInstance, BddOptions, DecoderMethod,
    ErrorHandlingOptions, ExactDecisionOracle, ExactMlOracle, SearchOracle,
};
use phycrypt::distributions::empirical_tvd;
use phycrypt::lattice::enumerate_cvp;
use phycrypt::numerics::{mat_vec, norm};
use phycrypt::params::min_alpha;
use phycrypt::wiretap::{eve_receive, make_instance, sample_a_dist, BatchLabel};
use phycrypt::{Error, LatticeBasis, Matrix, SampleBatch, SeededRng, SystemParams, TransmitVector};

fn residual(g: &Matrix, y: &[f64], x: &TransmitVector) -> f64 {
    let gx = mat_vec(g, &x.as_f64());
    norm(&y.iter().zip(&gx).map(|(a, b)| a - b).collect::<Vec<_>>())
}

#[test]
fn decoders_are_exact_without_noise() {
    let p = SystemParams::new(6, 8, 0.5, 1.0).unwrap().noiseless();
    let mut rng = SeededRng::new(1, 0);
    for _ in 0..100 {
        let inst = make_instance(&p, &mut rng).unwrap();
        let x = TransmitVector::random(6, 8, &mut rng);
        let (g, y) = eve_receive(&inst, &x, &p, &mut rng).unwrap();
        assert_eq!(zf_decode(&g, &y, 8).unwrap().estimate, x);
        assert_eq!(babai_attack(&g, &y, 8).unwrap().estimate, x);
        assert_eq!(exact_ml_decode(&g, &y, 8).unwrap().compare(&x).exact_match(), Some(true));
    }
}

#[test]
fn orthogonal_gain_decodes_coordinatewise() {
    let g = Matrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 1.0]);
    let y = [3.1, 1.2, -0.4];
    // per-coordinate ML: round(y_i/g_ii) clamped to [0, 4)
    let expected = vec![2, 2, 0];
    assert_eq!(zf_decode(&g, &y, 4).unwrap().estimate.symbols, expected);
    assert_eq!(exact_ml_decode(&g, &y, 4).unwrap().estimate.symbols, expected);
}

#[test]
fn ml_small_hand_case() {
    let g = Matrix::identity(2, 2);
    assert_eq!(exact_ml_decode(&g, &[0.9, 0.1], 2).unwrap().estimate.symbols, vec![1, 0]);
}

#[test]
fn ml_is_never_beaten() {
    let p = SystemParams::new(4, 4, 0.3, 1.0).unwrap();
    let mut rng = SeededRng::new(2, 0);
    for _ in 0..200 {
        let inst = make_instance(&p, &mut rng).unwrap();
        let x = TransmitVector::random(4, 4, &mut rng);
        let (g, y) = eve_receive(&inst, &x, &p, &mut rng).unwrap();
        let ml = residual(&g, &y, &exact_ml_decode(&g, &y, 4).unwrap().estimate);
        for other in [zf_decode(&g, &y, 4).unwrap().estimate, babai_attack(&g, &y, 4).unwrap().estimate, x.clone()] {
            assert!(ml <= residual(&g, &y, &other) + 1e-9);
        }
    }
}

#[test]
fn ml_refuses_huge_search_spaces() {
    let g = Matrix::identity(16, 16);
    assert!(matches!(exact_ml_decode(&g, &[0.0; 16], 256), Err(Error::SearchSpaceTooLarge { .. })));
}

#[test]
fn babai_attack_matches_cvp_close_to_lattice() {
    // rows of an unconstrained lattice; the attack's clamp is inactive
    // because symbols are drawn well inside the constellation
    let mut rng = SeededRng::new(3, 0);
    let trials = 500;
    let (mut agree, mut done) = (0, 0);
    while done < trials {
        let n = rng.uniform_int(2, 6) as usize;
        let g = Matrix::from_fn(n, n, |_, _| rng.uniform_int(0, 17) as f64 - 8.0);
        let Ok(b) = LatticeBasis::new(g.clone()) else { continue };
        if b.abs_determinant() < 0.5 {
            continue;
        }
        done += 1;
        let l1 = phycrypt::lattice::enumerate_svp(&b, Default::default()).unwrap().length;
        let x = TransmitVector { symbols: (0..n).map(|_| rng.uniform_int(20, 80)).collect() };
        let dir: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let scale = l1 / 4.0 * rng.uniform() / norm(&dir);
        let y: Vec<f64> = mat_vec(&g, &x.as_f64()).iter().zip(&dir).map(|(a, d)| a + scale * d).collect();
        let got = babai_attack(&g, &y, 100).unwrap().estimate;
        let cvp = enumerate_cvp(&b, &y, Default::default()).unwrap();
        agree += (got.symbols.iter().map(|&v| v as i64).collect::<Vec<_>>() == cvp.coefficients) as usize;
    }
    assert!(agree as f64 >= 0.99 * trials as f64, "{agree}/{trials}");
}

#[test]
fn hardness_level_noise_causes_errors() {
    let n = 16;
    let p = SystemParams::new(n, 256, min_alpha(n, 1.0, 1.0) * 1.01, 1.0).unwrap();
    let t = ber_experiment(&p, 1000, &[DecoderMethod::Zf, DecoderMethod::BabaiLll], 4).unwrap();
    for r in &t.rows {
        assert!(r.ser > 0.0, "{}", r.method);
    }
    let (zf, babai) = (t.row(DecoderMethod::Zf).unwrap(), t.row(DecoderMethod::BabaiLll).unwrap());
    eprintln!("SER zf {:.5}, babai {:.5}, bob {:.5}", zf.ser, babai.ser, t.row(DecoderMethod::Bob).unwrap().ser);
}

#[test]
fn tiny_noise_gives_zero_errors_for_every_method() {
    let n = 16;
    let p = SystemParams::new(n, 256, min_alpha(n, 1.0, 1.0) * 1.01, 1.0)
        .unwrap()
        .with_m_rx(2 * n)
        .unwrap()
        .with_noise_scale(1e-6)
        .unwrap();
    let t = ber_experiment(&p, 1000, &[DecoderMethod::Zf, DecoderMethod::BabaiLll], 5).unwrap();
    for r in &t.rows {
        assert_eq!(r.symbol_errors, 0, "{}", r.method);
    }
    let q = SystemParams::new(3, 4, 0.01, 1.0).unwrap().with_m_rx(6).unwrap().with_noise_scale(1e-6).unwrap();
    let t = ber_experiment(&q, 500, &[DecoderMethod::ExactMl], 6).unwrap();
    assert!(t.rows.iter().all(|r| r.symbol_errors == 0));
}

#[test]
fn experiment_csv_layout() {
    let p = SystemParams::new(4, 4, 0.05, 1.0).unwrap();
    let t = ber_experiment(&p, 20, &[DecoderMethod::Zf], 9).unwrap();
    let csv = t.to_csv_string().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "method,n,M,alpha,k,trials,ser,ser_ci_low,ser_ci_high,seed");
    assert_eq!(lines.count(), 2);
    assert!(ber_experiment(&p, 0, &[], 1).is_err());
}

fn small() -> SystemParams {
    SystemParams::new(4, 4, 0.1, 1.0).unwrap()
}

#[test]
fn verifier_rejects_empty_batches() {
    let b = SampleBatch::new(vec![], BatchLabel::Unknown).unwrap();
    assert!(matches!(verify_solution(&b, &TransmitVector::zeros(4), &small()), Err(Error::EmptyBatch)));
}

#[test]
fn wrapper_at_matching_noise_uses_first_grid_point() {
    let p = small();
    let mut rng = SeededRng::new(10, 0);
    let x = TransmitVector::random(4, 4, &mut rng);
    let batch = sample_a_dist(&x, &p, &mut rng, 256).unwrap();
    let mut calls = 0;
    let mut oracle = |b: &SampleBatch, p: &SystemParams| {
        calls += 1;
        ExactMlOracle.solve(b, p)
    };
    let got = error_handling_search(&batch, &mut oracle, &p, ErrorHandlingOptions::default(), &mut rng).unwrap();
    assert_eq!(got, x);
    assert_eq!(calls, 1);
}

#[test]
fn wrapper_beyond_its_noise_never_returns_a_wrong_answer() {
    let p = small();
    let wide = SystemParams { alpha: 4.0 * p.alpha, ..p.clone() };
    let mut rng = SeededRng::new(11, 0);
    let opts = ErrorHandlingOptions { max_grid_points: 20, repeats: Some(2), ..Default::default() };
    for _ in 0..50 {
        let x = TransmitVector::random(4, 4, &mut rng);
        let batch = sample_a_dist(&x, &wide, &mut rng, 256).unwrap();
        if let Ok(got) = error_handling_search(&batch, &mut ExactMlOracle, &p, opts, &mut rng) {
            assert_eq!(got, x);
        }
    }
}

#[test]
fn decision_to_search_recovers_every_vector() {
    let p = small();
    let mut rng = SeededRng::new(12, 0);
    for _ in 0..200 {
        let x = TransmitVector::random(4, 4, &mut rng);
        let batch = sample_a_dist(&x, &p, &mut rng, 256).unwrap();
        assert_eq!(decision_to_search(&batch, &mut ExactDecisionOracle, &p, &mut rng).unwrap(), x);
    }
}

#[test]
fn decision_to_search_refuses_large_constellations() {
    let p = SystemParams::new(2, 64, 0.1, 1.0).unwrap();
    let mut rng = SeededRng::new(13, 0);
    let batch = sample_a_dist(&TransmitVector::zeros(2), &p, &mut rng, 16).unwrap();
    assert!(decision_to_search(&batch, &mut ExactDecisionOracle, &p, &mut rng).is_err());
}

#[test]
fn correct_guess_keeps_the_distribution() {
    let p = small();
    let mut rng = SeededRng::new(14, 0);
    let x = TransmitVector::new(vec![3, 1, 0, 2], 4).unwrap();
    let n = 100_000;
    let batch = sample_a_dist(&x, &p, &mut rng, n).unwrap();
    let shifted = rerandomize_column(&batch, 0, x.symbols[0], &p, &mut rng).unwrap();
    let fresh = sample_a_dist(&x, &p, &mut rng, n).unwrap();
    let tvd_y = empirical_tvd(&shifted.ys(), &fresh.ys()).unwrap();
    let col = |b: &SampleBatch| b.rows.iter().map(|r| r.0[0]).collect::<Vec<_>>();
    let tvd_a = empirical_tvd(&col(&shifted), &col(&fresh)).unwrap();
    assert!(tvd_y < 0.02 && tvd_a < 0.02, "{tvd_y} {tvd_a}");
    // the structure survives: the true vector still verifies
    assert_eq!(verify_solution(&shifted, &x, &p).unwrap(), phycrypt::attacks::Verdict::Accept);
    // a wrong guess breaks it
    let wrong = rerandomize_column(&batch, 0, 0, &p, &mut rng).unwrap();
    assert_eq!(verify_solution(&wrong, &x, &p).unwrap(), phycrypt::attacks::Verdict::Reject);
}

#[test]
fn bdd_on_a_lattice_point_is_exact() {
    let basis = LatticeBasis::diagonal(&[3.0, 3.0]).unwrap();
    let (params, r, bound_d) = toy_parameters(&basis, 16).unwrap();
    let target = basis.point(&[5, -7]);
    let inst = BddInstance { basis, target, bound_d };
    let mut rng = SeededRng::new(15, 0);
    let rep = bdd_via_mimo(&inst, r, &mut ExactMlOracle, &params, &BddOptions::default(), &mut rng).unwrap();
    assert_eq!(rep.coefficients, vec![5, -7]);
    assert!(rep.lift_rounds >= 1);
}

#[test]
fn bdd_refuses_a_distance_beyond_the_bound() {
    let basis = LatticeBasis::diagonal(&[3.0, 3.0]).unwrap();
    let (params, r, _) = toy_parameters(&basis, 16).unwrap();
    let inst = BddInstance { basis, target: vec![0.0, 0.0], bound_d: 1e6 };
    let mut rng = SeededRng::new(16, 0);
    let err = bdd_via_mimo(&inst, r, &mut ExactMlOracle, &params, &BddOptions::default(), &mut rng);
    assert!(matches!(err, Err(Error::Precondition(_))));
}
