mod common;

use common::fixtures::*;
use common::oracle::*;
use hoiseg::crf::{solve, FlowNetwork, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_refuses_large_label_spaces() {
    let t = TinyProblem { width: 5, height: 5, classes: 3, unary: vec![vec![0.0; 3]; 25], lambda: 1.0, eight: false };
    assert!(exhaustive_min(&t).is_err());
}

#[test]
fn oracle_single_pixel_is_argmin() {
    let t = TinyProblem { width: 1, height: 1, classes: 3, unary: vec![vec![2.0, 0.5, 1.0]], lambda: 1.0, eight: false };
    assert_eq!(exhaustive_min(&t).unwrap(), (vec![1], 0.5));
}

#[test]
fn huge_lambda_gives_constant_labeling_of_cheapest_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut t = random_tiny(&mut rng, 1e6);
        t.width = 3;
        t.height = 3;
        t.unary = (0..9).map(|_| (0..3).map(|_| rng.random_range(0.0..4.0)).collect()).collect();
        let (labels, _) = exhaustive_min(&t).unwrap();
        let totals: Vec<f64> = (0..3).map(|c| t.unary.iter().map(|u| u[c]).sum()).collect();
        let best = (0..3).min_by(|&a, &b| totals[a].total_cmp(&totals[b])).unwrap();
        assert!(labels.iter().all(|&l| l == best));
        let s = solve(&to_problem(&t), None, 10).unwrap();
        assert!(s.labels.iter().all(|&l| l as usize == best));
    }
}

#[test]
fn solve_matches_exhaustive_on_three_by_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut exact = 0;
    for _ in 0..100 {
        let mut t = random_tiny(&mut rng, 1.0);
        t.width = 3;
        t.height = 3;
        t.unary = (0..9).map(|_| (0..3).map(|_| rng.random_range(0.0..4.0)).collect()).collect();
        let (_, best) = exhaustive_min(&t).unwrap();
        let s = solve(&to_problem(&t), None, 10).unwrap();
        assert!(s.energy >= best - 1e-9);
        assert!(s.energy <= 2.0 * best + 1e-9);
        exact += ((s.energy - best).abs() < 1e-9) as usize;
    }
    // expansion is usually exact on instances this small
    assert!(exact >= 90, "{exact}/100 exact");
}

#[test]
fn solve_is_exact_without_smoothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let t = random_tiny(&mut rng, 0.0);
        let (_, best) = exhaustive_min(&t).unwrap();
        let s = solve(&to_problem(&t), None, 10).unwrap();
        assert!((s.energy - best).abs() < 1e-12);
    }
}

#[test]
fn eight_connected_within_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let lambda = rng.random_range(0.1..2.0);
        let mut t = random_tiny(&mut rng, lambda);
        t.eight = true;
        let (_, best) = exhaustive_min(&t).unwrap();
        let s = solve(&to_problem(&t), None, 10).unwrap();
        assert!(s.energy >= best - 1e-9 && s.energy <= 2.0 * best + 1e-9);
    }
}

#[test]
fn max_flow_agrees_with_edmonds_karp() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..1000 {
        let n = rng.random_range(1..=18);
        let (mut g, cap) = random_network(&mut rng, n, k % 2 == 0);
        let fast = g.maxflow();
        let slow = naive_max_flow(&cap, n, n + 1);
        assert!((fast - slow).abs() < 1e-9 * (1.0 + slow), "case {k}: {fast} vs {slow}");
        assert!((g.cut_capacity() - fast).abs() < 1e-9 * (1.0 + fast));
    }
}

#[test]
fn incremental_cuts_match_edmonds_karp() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let draw = |rng: &mut ChaCha8Rng| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..10.0) };
    for case in 0..1000 {
        let n = rng.random_range(2..=15);
        let rate = rng.random_range(0.02..0.5);
        let mut g = FlowNetwork::new();
        let mut terms: Vec<(f64, f64)> = (0..n).map(|_| (draw(&mut rng), draw(&mut rng))).collect();
        for (i, &(cs, ct)) in terms.iter().enumerate() {
            g.add_node();
            g.add_tweights(i, cs, ct);
        }
        let mut edges = Vec::new();
        for _ in 0..rng.random_range(0..=3 * n) {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i != j {
                let (c, r) = (draw(&mut rng), draw(&mut rng));
                let id = g.add_edge(i, j, c, r);
                edges.push((id, i, j, c, r));
            }
        }
        g.maxflow();
        for round in 0..6 {
            for (i, t) in terms.iter_mut().enumerate() {
                if rng.random_bool(rate) {
                    *t = (draw(&mut rng), draw(&mut rng));
                    g.set_tweights(i, t.0, t.1);
                }
            }
            for e in edges.iter_mut() {
                if rng.random_bool(rate) {
                    (e.3, e.4) = (draw(&mut rng), draw(&mut rng));
                    g.set_edge(e.0, e.3, e.4);
                }
            }
            g.maxflow_incremental();
            let mut cap = vec![vec![0.0; n + 2]; n + 2];
            for (i, &(cs, ct)) in terms.iter().enumerate() {
                cap[n][i] += cs;
                cap[i][n + 1] += ct;
            }
            for &(_, i, j, c, r) in &edges {
                cap[i][j] += c;
                cap[j][i] += r;
            }
            let slow = naive_max_flow(&cap, n, n + 1);
            let cut = g.cut_capacity();
            assert!((cut - slow).abs() < 1e-9 * (1.0 + slow), "case {case} round {round}: {cut} vs {slow}");
        }
    }
}

#[test]
fn disconnected_network_has_zero_flow() {
    let mut g = FlowNetwork::new();
    let a = g.add_node();
    let b = g.add_node();
    g.add_tweights(a, 5.0, 0.0);
    g.add_tweights(b, 0.0, 5.0);
    assert_eq!(g.maxflow(), 0.0);
    assert_eq!(g.segment(b), Segment::Sink);
    let mut cap = vec![vec![0.0, 0.0, 0.0, 0.0], vec![0.0; 4], vec![5.0, 0.0, 0.0, 0.0], vec![0.0; 4]];
    cap[1][3] = 5.0;
    assert_eq!(naive_max_flow(&cap, 2, 3), 0.0);
}

#[test]
fn direct_entropy_agrees_with_histogram_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let labels: Vec<u8> = (0..rng.random_range(1..200)).map(|_| rng.random_range(0..5)).collect();
        let mut h = [0u32; 5];
        for &l in &labels {
            h[l as usize] += 1;
        }
        assert!((hoiseg::forest::entropy(&h) - direct_entropy(&labels)).abs() < 1e-12);
    }
}
