use cpcsc::prox::{clamp_linf, project_unit_padded, prox_quadratic_conjugate, soft_threshold, ProxParams};
use cpcsc::Image;
use cpcsc_oracles as oracle;
use cpcsc_oracles::SplitMix;
use proptest::prelude::*;

const CASES: u64 = 60;

fn sample(rng: &mut SplitMix, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.range(-scale, scale)).collect()
}

#[test]
fn quadratic_conjugate_matches_numeric_prox() {
    for seed in 0..CASES {
        let mut rng = SplitMix(seed);
        let n = 1 + (rng.next_u64() % 4) as usize;
        let y = sample(&mut rng, n, 3.0);
        let s = sample(&mut rng, n, 3.0);
        let sigma = rng.range(0.05, 4.0);
        let got = prox_quadratic_conjugate(&y, &s, sigma).unwrap();
        // F*(z) = ½ z² + z s for F(u) = ½(u − s)²
        for i in 0..n {
            let want = oracle::numeric_prox(|c| 0.5 * c * c + c * s[i], &y[i..=i], sigma, -50.0, 50.0)[0];
            assert!((got[i] - want).abs() < 1e-6, "seed {seed}: {} vs {want}", got[i]);
        }
    }
}

#[test]
fn quadratic_conjugate_scalar_example() {
    let got = prox_quadratic_conjugate(&[2.0], &[1.0], 3.0).unwrap()[0];
    assert_eq!(got, -0.25);
    let want = oracle::smooth_prox_scalar(|c| c + 1.0, 2.0, 3.0, -10.0, 10.0);
    assert!((got - want).abs() < 1e-8);
    let coarse = oracle::numeric_prox(|c| 0.5 * c * c + c, &[2.0], 3.0, -10.0, 10.0)[0];
    assert!((got - coarse).abs() < 1e-6);
}

#[test]
fn soft_threshold_matches_numeric_prox() {
    for seed in 0..CASES {
        let mut rng = SplitMix(1000 + seed);
        let n = 1 + (rng.next_u64() % 4) as usize;
        let x = sample(&mut rng, n, 2.0);
        let t = rng.range(0.0, 1.5);
        let got = soft_threshold(&x, t).unwrap();
        let want = oracle::numeric_prox(|c| t * c.abs(), &x, 1.0, -10.0, 10.0);
        assert!(oracle::max_abs_diff(&got, &want) < 1e-6, "seed {seed}");
    }
}

#[test]
fn clamp_matches_numeric_prox() {
    for seed in 0..CASES {
        let mut rng = SplitMix(2000 + seed);
        let n = 1 + (rng.next_u64() % 4) as usize;
        let v = sample(&mut rng, n, 2.0);
        let beta = if seed % 10 == 0 { 0.0 } else { rng.range(0.0, 1.5) };
        let got = clamp_linf(&v, beta).unwrap();
        // indicator of the box: search only inside [−β, β]
        let want = oracle::numeric_prox(|_| 0.0, &v, 1.0, -beta, beta);
        assert!(oracle::max_abs_diff(&got, &want) < 1e-6, "seed {seed}");
    }
}

#[test]
fn projection_matches_sphere_search() {
    for seed in 0..CASES {
        let mut rng = SplitMix(3000 + seed);
        let r = 1 + (rng.next_u64() % 2) as usize;
        let h = r + (rng.next_u64() % 3) as usize;
        let w = r + (rng.next_u64() % 3) as usize;
        let d = rng.grid(h, w);
        let got = project_unit_padded(&Image::from_vec(h, w, d.v.clone()).unwrap(), r).unwrap();
        assert!(!got.reset);
        let support: Vec<f64> = (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| d.at(i, j)).collect();
        let nearest = oracle::sphere_nearest(&support, 30);
        for i in 0..h {
            for j in 0..w {
                let want = if i < r && j < r { nearest[i * r + j] } else { 0.0 };
                let v = got.atom.array()[(i, j)];
                assert!((v - want).abs() < 1e-6, "seed {seed} at ({i},{j}): {v} vs {want}");
            }
        }
    }
}

#[test]
fn projection_examples() {
    let got = project_unit_padded(&Image::from_vec(1, 2, vec![3.0, 4.0]).unwrap(), 1).unwrap();
    assert_eq!(got.atom.as_slice(), &[1.0, 0.0]);

    let mut doubled = Image::impulse(4, 4, (0, 0)).unwrap();
    doubled.as_slice_mut()[0] = 2.0;
    let got = project_unit_padded(&doubled, 2).unwrap();
    assert_eq!(got.atom, Image::impulse(4, 4, (0, 0)).unwrap());

    // support empty: only energy outside the corner
    let outside = Image::impulse(4, 4, (3, 3)).unwrap();
    let got = project_unit_padded(&outside, 2).unwrap();
    assert!(got.reset);
    assert_eq!(got.atom, Image::impulse(4, 4, (0, 0)).unwrap());
}

#[test]
fn soft_threshold_examples_and_errors() {
    assert!((soft_threshold(&[1.0], 0.3).unwrap()[0] - 0.7).abs() < 1e-15);
    assert_eq!(soft_threshold(&[-0.2], 0.5).unwrap()[0], 0.0);
    assert_eq!(soft_threshold(&[-1.25, 3.0], 0.0).unwrap(), vec![-1.25, 3.0]);
    assert!(soft_threshold(&[1.0], -0.1).is_err());
}

#[test]
fn clamp_examples() {
    assert_eq!(clamp_linf(&[0.1, -0.2], 0.5).unwrap(), vec![0.1, -0.2]);
    assert_eq!(clamp_linf(&[1.0], 0.5).unwrap(), vec![0.5]);
    assert_eq!(clamp_linf(&[0.0, 3.0, -2.0], 0.0).unwrap(), vec![0.0, 0.0, 0.0]);
}

#[test]
fn step_sizes_are_balanced() {
    let p = ProxParams::from_lipschitz(2.5, 1.0, 0.05, 0.0, 0.0).unwrap();
    assert!((p.tau * p.sigma * 2.5 * 2.5 - 1.0).abs() < 1e-15);
    assert!(ProxParams::from_lipschitz(2.5, 1.0, -0.05, 0.0, 0.0).is_err());
}

proptest! {
    #[test]
    fn soft_threshold_is_a_contraction(a in prop::collection::vec(-5.0f64..5.0, 1..16), shift in -2.0f64..2.0, t in 0.0f64..3.0) {
        let b: Vec<f64> = a.iter().map(|v| v + shift * v.sin()).collect();
        let sa = soft_threshold(&a, t).unwrap();
        let sb = soft_threshold(&b, t).unwrap();
        for k in 0..a.len() {
            prop_assert!((sa[k] - sb[k]).abs() <= (a[k] - b[k]).abs() + 1e-15);
        }
    }

    #[test]
    fn clamp_stays_in_ball(v in prop::collection::vec(-1e3f64..1e3, 1..16), beta in 0.0f64..10.0) {
        for c in clamp_linf(&v, beta).unwrap() {
            prop_assert!(c.abs() <= beta + 1e-15);
        }
    }

    #[test]
    fn projection_is_idempotent_and_unit(seed in any::<u64>(), h in 1usize..7, w in 1usize..7, r in 1usize..4) {
        prop_assume!(r <= h && r <= w);
        let mut rng = SplitMix(seed);
        let d = Image::from_vec(h, w, rng.grid(h, w).v).unwrap();
        let once = project_unit_padded(&d, r).unwrap();
        prop_assert!((once.atom.norm_sq().sqrt() - 1.0).abs() < 1e-12);
        for i in 0..h {
            for j in 0..w {
                if i >= r || j >= r {
                    prop_assert_eq!(once.atom.array()[(i, j)], 0.0);
                }
            }
        }
        let twice = project_unit_padded(&once.atom, r).unwrap();
        prop_assert!(oracle::max_abs_diff(once.atom.as_slice(), twice.atom.as_slice()) < 1e-15);
    }
}
