use std::f64::consts::PI;

use phycrypt::distributions::{
    combine_samples, continuous_from_discrete, empirical_tvd, psi_sample, sample_z, smoothing_upper_bound,
    tvd_gaussians, DiscreteGaussianSampler, DiscreteGaussianSpec, PsiParams, SamplerOptions,
};
use phycrypt::stats::{ks_p_value, ks_two_sample_statistic, mean, variance};
use phycrypt::{Error, LatticeBasis, SeededRng};
use proptest::prelude::*;

fn draws(k: f64, n: usize, seed: u64) -> Vec<f64> {
    let p = PsiParams::new(k).unwrap();
    let mut rng = SeededRng::new(seed, 0);
    (0..n).map(|_| psi_sample(p, &mut rng)).collect()
}

#[test]
fn root_two_pi_width_is_standard_normal() {
    let xs = draws((2.0 * PI).sqrt(), 200_000, 1);
    assert!(mean(&xs).abs() < 0.01);
    assert!((variance(&xs) - 1.0).abs() < 0.01);
}

#[test]
fn unit_width_variance() {
    let xs = draws(1.0, 1_000_000, 2);
    let target = 1.0 / (2.0 * PI);
    assert!((variance(&xs) / target - 1.0).abs() < 0.005);
}

#[test]
fn width_is_a_scale_parameter() {
    let a = draws(2.0, 20_000, 3);
    let b: Vec<f64> = draws(1.0, 20_000, 4).iter().map(|x| 2.0 * x).collect();
    let d = ks_two_sample_statistic(&a, &b);
    assert!(ks_p_value(d, 10_000.0) > 0.01, "D = {d}");
}

#[test]
fn non_positive_width_rejected() {
    assert!(PsiParams::new(0.0).is_err());
    assert!(PsiParams::new(-1.0).is_err());
    assert!(PsiParams::new(f64::INFINITY).is_err());
}

#[test]
fn tvd_of_identical_laws_is_zero() {
    let p = PsiParams::new(1.7).unwrap();
    assert_eq!(tvd_gaussians(p, p), 0.0);
}

#[test]
fn tvd_closed_form_agrees_with_monte_carlo() {
    let (a, b) = (PsiParams::new(1.1).unwrap(), PsiParams::new(1.0).unwrap());
    let exact = tvd_gaussians(a, b);
    assert!(exact > 0.0 && exact <= 0.9);
    // TVD = E_P[max(0, 1 − q/p)]
    let xs = draws(1.1, 1_000_000, 5);
    let mc = xs.iter().map(|&x| (1.0 - b.density(x) / a.density(x)).max(0.0)).sum::<f64>() / xs.len() as f64;
    assert!((mc - exact).abs() < 1e-3, "{mc} vs {exact}");
    // histogram estimate lands in the same place
    let h = empirical_tvd(&xs[..200_000], &draws(1.0, 200_000, 6)).unwrap();
    assert!((h - exact).abs() < 0.01, "{h} vs {exact}");
}

#[test]
fn integer_lattice_mass_at_zero() {
    let sampler =
        DiscreteGaussianSampler::new(DiscreteGaussianSpec::new(LatticeBasis::identity(1), 3.0), SamplerOptions::default())
            .unwrap();
    let mut rng = SeededRng::new(7, 0);
    let n = 1_000_000;
    let zeros = (0..n).filter(|_| sampler.sample(&mut rng).point[0] == 0.0).count();
    let z: f64 = (-50..=50).map(|x: i32| (-PI * (x * x) as f64 / 9.0).exp()).sum();
    let expected = 1.0 / z;
    let got = zeros as f64 / n as f64;
    assert!((got / expected - 1.0).abs() < 0.01, "{got} vs {expected}");
}

#[test]
fn even_lattice_support() {
    let b = LatticeBasis::diagonal(&[2.0]).unwrap();
    let sampler = DiscreteGaussianSampler::new(DiscreteGaussianSpec::new(b, 3.0), SamplerOptions::default()).unwrap();
    let mut rng = SeededRng::new(8, 0);
    for _ in 0..10_000 {
        let v = sampler.sample(&mut rng).point[0];
        assert_eq!(v.rem_euclid(2.0), 0.0);
    }
}

#[test]
fn shifted_centre_mean() {
    let spec = DiscreteGaussianSpec::new(LatticeBasis::identity(2), 5.0).with_center(vec![0.5, 0.0]);
    let sampler = DiscreteGaussianSampler::new(spec, SamplerOptions::default()).unwrap();
    let mut rng = SeededRng::new(9, 0);
    let n = 100_000;
    let pts: Vec<Vec<f64>> = (0..n).map(|_| sampler.sample(&mut rng).point).collect();
    // brute-force mean and variance per axis
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for x in -40..=40 {
        let x = x as f64;
        let p = (-PI * (x - 0.5).powi(2) / 25.0).exp();
        w += p;
        m1 += p * x;
        m2 += p * x * x;
    }
    let (mu, var) = (m1 / w, m2 / w - (m1 / w).powi(2));
    let se = (var / n as f64).sqrt();
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    assert!((mean(&xs) - mu).abs() < 3.0 * se, "{} vs {mu}", mean(&xs));
    assert!(mean(&ys).abs() < 3.0 * se);
    assert!((mu - 0.5).abs() < 1e-9);
}

#[test]
fn narrow_width_refused() {
    let err = DiscreteGaussianSampler::new(DiscreteGaussianSpec::new(LatticeBasis::identity(2), 0.5), SamplerOptions::default());
    assert!(matches!(err, Err(Error::WidthTooSmall { .. })));
    let ok = DiscreteGaussianSampler::new(
        DiscreteGaussianSpec::new(LatticeBasis::identity(2), 0.5),
        SamplerOptions { allow_narrow: true, ..Default::default() },
    );
    assert!(ok.is_ok());
}

#[test]
fn one_dimensional_sampler_matches_mass_function() {
    let mut rng = SeededRng::new(10, 0);
    let (s, c) = (0.8, 0.37);
    let n = 200_000;
    let mut counts = std::collections::BTreeMap::<i64, usize>::new();
    for _ in 0..n {
        *counts.entry(sample_z(s, c, &mut rng)).or_default() += 1;
    }
    let w = |z: i64| (-PI * (z as f64 - c).powi(2) / (s * s)).exp();
    let total: f64 = (-30..=30).map(w).sum();
    let tvd: f64 = (-30..=30).map(|z| (counts.get(&z).copied().unwrap_or(0) as f64 / n as f64 - w(z) / total).abs()).sum::<f64>() / 2.0;
    assert!(tvd < 0.01, "{tvd}");
}

#[test]
fn equal_weights_give_midpoint() {
    let (a, y) = combine_samples((&[1.0, 3.0], 2.0), (&[3.0, -1.0], 4.0), 5, 5).unwrap();
    assert_eq!(a, vec![2.0, 1.0]);
    assert_eq!(y, 3.0);
}

#[test]
fn combination_is_linear_on_noiseless_samples() {
    let x = [2.0, -1.0, 3.0];
    let mut rng = SeededRng::new(11, 0);
    for _ in 0..100 {
        let a1: Vec<f64> = (0..3).map(|_| rng.uniform_int(0, 9) as f64 - 4.0).collect();
        let a2: Vec<f64> = (0..3).map(|_| rng.uniform_int(0, 9) as f64 - 4.0).collect();
        let y = |a: &[f64]| a.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>();
        let (a, yy) = continuous_from_discrete((&a1, y(&a1)), (&a2, y(&a2)), &mut rng, 8).unwrap();
        assert!((yy - y(&a)).abs() < 1e-12);
    }
}

#[test]
fn combination_moments() {
    // integer-valued rows; the combination keeps the mean and shrinks the
    // variance by E[(ci² + cj²)/(ci + cj)²]
    let bits = 4;
    let hi = 1u64 << bits;
    let mut shrink = 0.0;
    for ci in 1..hi {
        for cj in 1..hi {
            let (a, b) = (ci as f64, cj as f64);
            shrink += (a * a + b * b) / ((a + b) * (a + b));
        }
    }
    shrink /= ((hi - 1) * (hi - 1)) as f64;

    let mut rng = SeededRng::new(12, 0);
    let n = 10_000;
    let dim = 4;
    let row = |rng: &mut SeededRng| -> Vec<f64> { (0..dim).map(|_| (2.0 * rng.standard_normal()).round() + 1.0).collect() };
    let input: Vec<Vec<f64>> = (0..n).map(|_| row(&mut rng)).collect();
    let in_mean = input.iter().map(|r| r[0]).sum::<f64>() / n as f64;
    let in_var = variance(&input.iter().map(|r| r[0]).collect::<Vec<_>>());
    let out: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let (a, b) = (row(&mut rng), row(&mut rng));
            continuous_from_discrete((&a, 0.0), (&b, 0.0), &mut rng, bits).unwrap().0
        })
        .collect();
    for j in 0..dim {
        let col: Vec<f64> = out.iter().map(|r| r[j]).collect();
        let se = (in_var * shrink / n as f64).sqrt();
        assert!((mean(&col) - in_mean).abs() < 3.0 * se + 3.0 * (in_var / n as f64).sqrt());
        let v = variance(&col);
        let target = in_var * shrink;
        assert!((v / target - 1.0).abs() < 0.05, "column {j}: {v} vs {target}");
    }
}

#[test]
fn smoothing_bound_of_integers() {
    let b = smoothing_upper_bound(&LatticeBasis::identity(1), 1.0).unwrap();
    assert!((b - (4f64.ln() / PI).sqrt()).abs() < 1e-12);
    assert!((b - 0.66428).abs() < 1e-5);
    assert!(smoothing_upper_bound(&LatticeBasis::identity(1), 0.0).is_err());
}

#[test]
fn smoothing_bound_monotone_in_epsilon() {
    let l = LatticeBasis::identity(3);
    let grid = [1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3];
    let vals: Vec<f64> = grid.iter().map(|&e| smoothing_upper_bound(&l, e).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    let limit = ((6.0f64).ln() / PI).sqrt();
    assert!(vals.iter().all(|&v| v > limit));
}

proptest! {
    #[test]
    fn smoothing_bound_scales_with_basis(c in 0.1f64..20.0, a in 1.0f64..5.0, b in 1.0f64..5.0) {
        let l = LatticeBasis::diagonal(&[a, b]).unwrap();
        let base = smoothing_upper_bound(&l, 0.25).unwrap();
        let scaled = smoothing_upper_bound(&l.scaled(c).unwrap(), 0.25).unwrap();
        prop_assert!((scaled / base - c).abs() < 1e-9 * c);
    }

    #[test]
    fn tvd_is_symmetric_and_bounded(a in 0.01f64..100.0, b in 0.01f64..100.0) {
        let (p, q) = (PsiParams::new(a).unwrap(), PsiParams::new(b).unwrap());
        let d = tvd_gaussians(p, q);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - tvd_gaussians(q, p)).abs() < 1e-15);
    }
}
