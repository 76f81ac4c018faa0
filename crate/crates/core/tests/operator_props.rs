//! Structural properties of the discrete operator.

mod common;

use common::{dense, rel_diff};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfl_core::operator::{GridFunction, TemperedOperator};
use tfl_core::par::Exec;
use tfl_core::stencil::SchemeParams;

fn op(d: usize, alpha: f64, lambda: f64, n: usize) -> TemperedOperator {
    TemperedOperator::new(&SchemeParams::cube(d, alpha, lambda, -1.0, 1.0, n).unwrap()).unwrap()
}

fn random_field(op: &TemperedOperator, rng: &mut ChaCha8Rng) -> GridFunction {
    let v = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    GridFunction::new(op.dims().to_vec(), v).unwrap()
}

#[test]
fn fft_matches_dense_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (d, n) in [(1, 128), (2, 16), (3, 6)] {
        let a = op(d, 1.3, 0.7, n);
        for _ in 0..5 {
            let u = random_field(&a, &mut rng);
            let fast = a.apply(&u).unwrap();
            let slow = a.apply_dense(&u).unwrap();
            assert!(rel_diff(fast.values(), slow.values()) < 1e-12);
        }
    }
}

#[test]
fn dense_realization_is_symmetric_positive_definite() {
    for d in [1, 2] {
        for alpha in [0.5, 1.5] {
            for lambda in [0.0, 0.5] {
                let m = dense(&op(d, alpha, lambda, 8));
                assert_eq!(m, m.transpose());
                let min = m.symmetric_eigen().eigenvalues.min();
                assert!(min > 0.0, "d={d} α={alpha} λ={lambda}: {min}");
            }
        }
    }
}

#[test]
fn sequential_and_parallel_applies_agree() {
    let p = SchemeParams::cube(2, 0.9, 0.4, 0.0, 1.0, 40).unwrap();
    let par = TemperedOperator::new(&p).unwrap().with_exec(Exec::Parallel);
    let seq = TemperedOperator::new(&p).unwrap().with_exec(Exec::Sequential);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_field(&par, &mut rng);
    assert_eq!(par.apply(&u).unwrap(), seq.apply(&u).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn apply_is_linear(seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let a = op(2, 1.1, 0.5, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_field(&a, &mut rng);
        let v = random_field(&a, &mut rng);
        let combo = GridFunction::new(
            a.dims().to_vec(),
            u.values().iter().zip(v.values()).map(|(x, y)| s * x + t * y).collect(),
        ).unwrap();
        let lhs = a.apply(&combo).unwrap();
        let au = a.apply(&u).unwrap();
        let av = a.apply(&v).unwrap();
        let rhs: Vec<f64> = au.values().iter().zip(av.values()).map(|(x, y)| s * x + t * y).collect();
        prop_assert!(rel_diff(lhs.values(), &rhs) < 1e-12);
    }

    #[test]
    fn apply_is_symmetric(seed in any::<u64>(), alpha in 0.2f64..1.9, lambda in 0.0f64..4.0) {
        let a = op(1, alpha, lambda, 24);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_field(&a, &mut rng);
        let v = random_field(&a, &mut rng);
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let uav = dot(u.values(), a.apply(&v).unwrap().values());
        let vau = dot(v.values(), a.apply(&u).unwrap().values());
        prop_assert!((uav - vau).abs() <= 1e-11 * uav.abs().max(vau.abs()).max(1.0));
    }

    #[test]
    fn dense_product_matches_nalgebra(seed in any::<u64>()) {
        let a = op(2, 0.7, 1.0, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_field(&a, &mut rng);
        let m = dense(&a);
        let expected = &m * DVector::from_column_slice(u.values());
        let ours = a.apply(&u).unwrap();
        prop_assert!(rel_diff(ours.values(), expected.as_slice()) < 1e-12);
    }
}
