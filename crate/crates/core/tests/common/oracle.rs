//! Brute-force references. Nothing here calls into the library's solvers.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct TinyProblem {
    pub width: usize,
    pub height: usize,
    pub classes: usize,
    /// `unary[pixel][class]`
    pub unary: Vec<Vec<f64>>,
    pub lambda: f64,
    pub eight: bool,
}

#[derive(Debug)]
pub struct TooLarge(pub u128);

impl TinyProblem {
    pub fn energy(&self, labels: &[usize]) -> f64 {
        let mut e = 0.0;
        for (p, &l) in labels.iter().enumerate() {
            e += self.unary[p][l];
        }
        for y in 0..self.height {
            for x in 0..self.width {
                let p = y * self.width + x;
                let mut neighbors = vec![];
                if x + 1 < self.width {
                    neighbors.push(p + 1);
                }
                if y + 1 < self.height {
                    neighbors.push(p + self.width);
                    if self.eight {
                        if x + 1 < self.width {
                            neighbors.push(p + self.width + 1);
                        }
                        if x > 0 {
                            neighbors.push(p + self.width - 1);
                        }
                    }
                }
                for q in neighbors {
                    if labels[p] != labels[q] {
                        e += self.lambda;
                    }
                }
            }
        }
        e
    }
}

/// Global minimum by enumerating every labeling.
pub fn exhaustive_min(problem: &TinyProblem) -> Result<(Vec<usize>, f64), TooLarge> {
    let n = problem.width * problem.height;
    let space = (problem.classes as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if space > 1 << 20 {
        return Err(TooLarge(space));
    }
    let mut labels = vec![0usize; n];
    let mut best = (labels.clone(), problem.energy(&labels));
    for _ in 1..space {
        for l in labels.iter_mut() {
            *l += 1;
            if *l < problem.classes {
                break;
            }
            *l = 0;
        }
        let e = problem.energy(&labels);
        if e < best.1 {
            best = (labels.clone(), e);
        }
    }
    Ok(best)
}

/// Edmonds-Karp on a dense capacity matrix.
pub fn naive_max_flow(capacity: &[Vec<f64>], source: usize, sink: usize) -> f64 {
    let n = capacity.len();
    let mut residual = capacity.to_vec();
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && residual[u][v] > 1e-12 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while v != source {
            push = push.min(residual[prev[v]][v]);
            v = prev[v];
        }
        let mut v = sink;
        while v != source {
            residual[prev[v]][v] -= push;
            residual[v][prev[v]] += push;
            v = prev[v];
        }
        total += push;
    }
}

/// Kolmogorov-Smirnov statistic of `samples` against U(lo, hi).
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic KS critical value at significance 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Shannon entropy in nats by direct summation of probabilities.
pub fn direct_entropy(labels: &[u8]) -> f64 {
    let mut counts = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    let n = labels.len() as f64;
    counts.values().map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum()
}
