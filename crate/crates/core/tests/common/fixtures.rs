use hoiseg::crf::{CrfProblem, FlowNetwork, Neighborhood};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::oracle::TinyProblem;

pub fn random_tiny(rng: &mut ChaCha8Rng, lambda: f64) -> TinyProblem {
    let width = rng.random_range(1..=3);
    let height = rng.random_range(1..=3);
    let classes = 3;
    let unary = (0..width * height).map(|_| (0..classes).map(|_| rng.random_range(0.0..4.0)).collect()).collect();
    TinyProblem { width, height, classes, unary, lambda, eight: false }
}

pub fn to_problem(t: &TinyProblem) -> CrfProblem {
    let flat = t.unary.iter().flatten().copied().collect();
    let eta = if t.eight { Neighborhood::Eight } else { Neighborhood::Four };
    CrfProblem::new(t.width, t.height, t.classes, flat, t.lambda, eta).unwrap()
}

/// Builds the same random network in the fast solver and as a dense matrix
/// (source = n, sink = n + 1).
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, integral: bool) -> (FlowNetwork, Vec<Vec<f64>>) {
    let mut cap = vec![vec![0.0; n + 2]; n + 2];
    let mut g = FlowNetwork::new();
    for _ in 0..n {
        g.add_node();
    }
    let draw = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.3) {
            0.0
        } else if integral {
            rng.random_range(0..10) as f64
        } else {
            rng.random_range(0.0..10.0)
        }
    };
    for i in 0..n {
        let (cs, ct) = (draw(rng), draw(rng));
        g.add_tweights(i, cs, ct);
        cap[n][i] += cs;
        cap[i][n + 1] += ct;
    }
    let edges = rng.random_range(0..=3 * n);
    for _ in 0..edges {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let (c, r) = (draw(rng), draw(rng));
        g.add_edge(i, j, c, r);
        cap[i][j] += c;
        cap[j][i] += r;
    }
    (g, cap)
}

