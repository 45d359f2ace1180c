use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surrogate_core::ann::{deepen, gradient_check, widen, DeepenMode, DenseNetwork, WidenMode};

const STEP: f64 = 1e-5;
// Central differences at this step carry ~1e-10 absolute error, so tiny
// gradients are compared against this denominator instead of themselves.
const FLOOR: f64 = 1e-4;

fn random_case(rng: &mut ChaCha8Rng) -> (DenseNetwork, Vec<f64>, Vec<f64>) {
    let d_in = rng.random_range(1..=9);
    let d_out = rng.random_range(1..=3);
    let depth = rng.random_range(1..=3);
    let mut dims = vec![d_in];
    dims.extend((0..depth).map(|_| rng.random_range(1..=8)));
    dims.push(d_out);
    let mut net = DenseNetwork::with_dims(&dims, rng.random()).unwrap();
    for l in net.layers_mut() {
        l.biases.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
    }
    match rng.random_range(0..4) {
        0 => net = widen(&net, WidenMode::Random, rng.random()).unwrap(),
        1 => net = widen(&net, WidenMode::FunctionPreserving, rng.random()).unwrap(),
        2 => net = deepen(&net, DeepenMode::NearIdentity, rng.random()).unwrap(),
        _ => net = deepen(&widen(&net, WidenMode::Random, 1).unwrap(), DeepenMode::Random, rng.random()).unwrap(),
    }
    let x = (0..d_in).map(|_| rng.random_range(-1.5..1.5)).collect();
    let t = (0..d_out).map(|_| rng.random_range(-1.0..1.0)).collect();
    (net, x, t)
}

#[test]
fn backprop_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let (net, x, t) = random_case(&mut rng);
        let c = gradient_check(&net, &x, &t, STEP, FLOOR).unwrap();
        assert!(c.max_relative_error < 1e-6, "case {case} ({}): {c:?}", net.architecture());
        worst = worst.max(c.max_relative_error);
    }
    println!("worst relative error {worst:.3e}");
}
