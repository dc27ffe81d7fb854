use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

pub fn probe() -> (f64, f64, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x: f64 = rng.random();
    let k = rng.random_range(0..10usize);
    let mut v = vec![1, 2, 3, 4, 5];
    v.shuffle(&mut rng);
    let chi = ChiSquared::new(2.0).unwrap().inverse_cdf(0.95);
    let t = StudentsT::new(0.0, 1.0, 10.0).unwrap().cdf(1.5);
    (x, chi, k + v[0], t)
}
