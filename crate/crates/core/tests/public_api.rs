use std::sync::Arc;

use w2lab_core::integrals::{bickel_integral, truncated_second_moment};
use w2lab_core::limit::{build_grid, sample_limit_law, LimitSampler, Mechanism};
use w2lab_core::order_stats::sample_extreme;
use w2lab_core::rng::{standard_normal, StreamKey};
use w2lab_core::wasserstein::{w2sq_two_sample, w2sq_vs_gaussian, GaussianPartition, GaussianReference, SortedSample};
use w2lab_core::{Correlation, Error};

fn sample(n: usize, index: u64) -> SortedSample {
    let mut rng = StreamKey::new(17, 3).stream(index);
    SortedSample::from_unsorted((0..n).map(|_| standard_normal(&mut rng)).collect()).unwrap()
}

#[test]
fn partition_agrees_with_direct_formula() {
    for n in [1, 7, 100, 2500] {
        let s = sample(n, n as u64);
        let r = GaussianReference::new(0.3, 1.7).unwrap();
        let direct = w2sq_vs_gaussian(&s, r);
        let cached = GaussianPartition::new(n).unwrap().w2sq(s.values(), r).unwrap();
        assert!((direct - cached).abs() <= 1e-12 * direct, "n={n}");
    }
}

#[test]
fn shifted_copy_is_at_squared_shift() {
    let s = sample(300, 1);
    let t = s.affine(2.5, 1.0).unwrap();
    assert!((w2sq_two_sample(&s, &t).unwrap() - 6.25).abs() < 1e-12);
    assert!(matches!(w2sq_two_sample(&s, &sample(10, 2)), Err(Error::SizeMismatch { .. })));
}

#[test]
fn limit_draws_are_reproducible_and_index_addressed() {
    let grid = build_grid(64, 1e-3).unwrap();
    let rho = Correlation::new(0.4).unwrap();
    let a = sample_limit_law(rho, &grid, 50, Mechanism::GaussianGrid, 9, false).unwrap();
    let b = sample_limit_law(rho, &grid, 50, Mechanism::GaussianGrid, 9, false).unwrap();
    assert_eq!(a.values, b.values);
    let sampler = LimitSampler::new(rho, Arc::new(grid.clone()), Mechanism::GaussianGrid, 9, false).unwrap();
    assert_eq!(sampler.draw(37), a.values[37]);
    let zero = Correlation::new(0.0).unwrap();
    assert!(sample_limit_law(zero, &grid, 5, Mechanism::GaussianGrid, 9, false).is_err());
}

#[test]
fn truncated_moment_at_zero_correlation_is_twice_the_centering_integral() {
    let n = 1e6;
    let t = truncated_second_moment(Correlation::new(0.0).unwrap(), 1.0 / n).unwrap().value;
    let b = bickel_integral(n).unwrap().value;
    assert!((t - 2.0 * b).abs() < 1e-7 * t, "{t} vs {b}");
}

#[test]
fn extreme_sampler_is_deterministic() {
    let a = sample_extreme(10_000, 2, 500, 4).unwrap();
    let b = sample_extreme(10_000, 2, 500, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.count, 500);
}
