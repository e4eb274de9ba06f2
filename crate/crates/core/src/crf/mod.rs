//! Pairwise Potts CRF over the pixel grid, minimized by α-expansion.

mod maxflow;

pub use maxflow::{FlowNetwork, Segment};

use crate::error::{Error, Result};
use crate::forest::PosteriorVolume;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Neighborhood {
    Four,
    Eight,
}

impl Neighborhood {
    /// Forward offsets; each unordered neighbor pair is visited once.
    fn forward(self) -> &'static [(isize, isize)] {
        match self {
            Neighborhood::Four => &[(1, 0), (0, 1)],
            Neighborhood::Eight => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Neighborhood::Four => "4",
            Neighborhood::Eight => "8",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrfProblem {
    pub width: usize,
    pub height: usize,
    pub classes: usize,
    /// Pixel-major costs, `classes` per pixel.
    pub unary: Vec<f64>,
    pub potts_weight: f64,
    pub neighborhood: Neighborhood,
}

impl CrfProblem {
    pub fn new(
        width: usize,
        height: usize,
        classes: usize,
        unary: Vec<f64>,
        potts_weight: f64,
        neighborhood: Neighborhood,
    ) -> Result<Self> {
        if classes == 0 || classes > 256 {
            return Err(Error::InvalidParameter(format!("{classes} classes")));
        }
        if unary.len() != width * height * classes {
            return Err(Error::DimensionMismatch(format!(
                "{} unary costs for {width}x{height}x{classes}",
                unary.len()
            )));
        }
        if !(potts_weight >= 0.0) || !potts_weight.is_finite() {
            return Err(Error::InvalidParameter(format!("potts weight {potts_weight}")));
        }
        if unary.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidParameter("non-finite unary cost".into()));
        }
        Ok(Self { width, height, classes, unary, potts_weight, neighborhood })
    }

    /// Unary costs `-ln p` from forest posteriors.
    pub fn from_posteriors(post: &PosteriorVolume, potts_weight: f64, neighborhood: Neighborhood) -> Result<Self> {
        let unary = post.data.iter().map(|&p| -(p as f64).ln()).collect();
        Self::new(post.width, post.height, post.classes, unary, potts_weight, neighborhood)
    }

    #[inline]
    fn cost(&self, pixel: usize, label: u8) -> f64 {
        self.unary[pixel * self.classes + label as usize]
    }

    fn for_each_pair(&self, mut f: impl FnMut(usize, usize)) {
        let (w, h) = (self.width as isize, self.height as isize);
        for y in 0..h {
            for x in 0..w {
                for &(dx, dy) in self.neighborhood.forward() {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && nx < w && ny < h {
                        f((y * w + x) as usize, (ny * w + nx) as usize);
                    }
                }
            }
        }
    }

    #[inline]
    fn step(&self, p: usize, dx: isize, dy: isize) -> Option<usize> {
        let x = (p % self.width) as isize + dx;
        let y = (p / self.width) as isize + dy;
        (x >= 0 && x < self.width as isize && y >= 0 && y < self.height as isize)
            .then(|| y as usize * self.width + x as usize)
    }

    fn for_each_neighbor(&self, p: usize, mut f: impl FnMut(usize)) {
        for &(dx, dy) in self.neighborhood.forward() {
            if let Some(q) = self.step(p, dx, dy) {
                f(q);
            }
            if let Some(q) = self.step(p, -dx, -dy) {
                f(q);
            }
        }
    }

    /// Per-pixel lowest-cost labels; ties go to the lower class id.
    pub fn unary_argmin(&self) -> Vec<u8> {
        self.unary
            .chunks_exact(self.classes)
            .map(|u| {
                let mut best = 0;
                for (k, &v) in u.iter().enumerate() {
                    if v < u[best] {
                        best = k;
                    }
                }
                best as u8
            })
            .collect()
    }

    fn check_labels(&self, labels: &[u8]) -> Result<()> {
        if labels.len() != self.width * self.height {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {}x{} grid",
                labels.len(),
                self.width,
                self.height
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= self.classes) {
            return Err(Error::InvalidParameter(format!("label {bad} out of range")));
        }
        Ok(())
    }
}

/// Σ unary + λ · #{neighbor pairs with different labels}.
pub fn energy(problem: &CrfProblem, labels: &[u8]) -> Result<f64> {
    problem.check_labels(labels)?;
    Ok(energy_unchecked(problem, labels))
}

fn energy_unchecked(problem: &CrfProblem, labels: &[u8]) -> f64 {
    let unary: f64 = labels.iter().enumerate().map(|(i, &l)| problem.cost(i, l)).sum();
    let mut cuts = 0u64;
    problem.for_each_pair(|i, j| cuts += (labels[i] != labels[j]) as u64);
    unary + problem.potts_weight * cuts as f64
}

const NO_EDGE: u32 = u32::MAX;

/// Expansion graph of one α with a node per pixel. It is kept between moves
/// and only the capacities around relabeled pixels are rewritten.
#[derive(Debug)]
struct AlphaGraph {
    graph: FlowNetwork,
    /// Edge id per pixel and forward offset.
    edge_of: Vec<u32>,
    /// Labeling the current capacities encode.
    basis: Vec<u8>,
}

/// Terminal capacities of `p`; the source side keeps the current label.
fn terminal_caps(problem: &CrfProblem, labels: &[u8], alpha: u8, p: usize) -> (f64, f64) {
    let l = labels[p];
    if l == alpha {
        return (0.0, 0.0);
    }
    let lambda = problem.potts_weight;
    let mut ct = problem.cost(p, l);
    for &(dx, dy) in problem.neighborhood.forward() {
        if problem.step(p, dx, dy).is_some_and(|q| labels[q] == alpha) {
            ct += lambda;
        }
        // λ(1 - x_p) of a pair whose labels differ, see `pair_caps`
        if problem.step(p, -dx, -dy).is_some_and(|r| labels[r] != l) {
            ct += lambda;
        }
    }
    (problem.cost(p, alpha), ct)
}

/// Capacities of the forward pair `p -> q`.
fn pair_caps(lambda: f64, lp: u8, lq: u8, alpha: u8) -> (f64, f64) {
    if lp == alpha || lq == alpha {
        (0.0, 0.0)
    } else if lp == lq {
        (lambda, lambda)
    } else {
        // λ unless both switch: λ(1 - x_q) + λ(1 - x_p)x_q, up to a constant
        (lambda, 0.0)
    }
}

impl AlphaGraph {
    fn build(problem: &CrfProblem, labels: &[u8], alpha: u8) -> Self {
        let n = labels.len();
        let fwd = problem.neighborhood.forward();
        let smooth = problem.potts_weight > 0.0;
        let mut graph = FlowNetwork::with_capacity(n, if smooth { n * fwd.len() } else { 0 });
        for p in 0..n {
            graph.add_node();
            let (cs, ct) = terminal_caps(problem, labels, alpha, p);
            graph.add_tweights(p, cs, ct);
        }
        let mut edge_of = Vec::new();
        if smooth {
            edge_of = vec![NO_EDGE; n * fwd.len()];
            for p in 0..n {
                for (k, &(dx, dy)) in fwd.iter().enumerate() {
                    if let Some(q) = problem.step(p, dx, dy) {
                        let (c, r) = pair_caps(problem.potts_weight, labels[p], labels[q], alpha);
                        edge_of[p * fwd.len() + k] = graph.add_edge(p, q, c, r) as u32;
                    }
                }
            }
        }
        graph.maxflow();
        Self { graph, edge_of, basis: labels.to_vec() }
    }

    fn update(&mut self, problem: &CrfProblem, labels: &[u8], alpha: u8, dirty: &mut Vec<usize>) {
        dirty.clear();
        dirty.extend((0..labels.len()).filter(|&p| labels[p] != self.basis[p]));
        if dirty.is_empty() {
            return;
        }
        let fwd = problem.neighborhood.forward();
        let lambda = problem.potts_weight;
        for &p in dirty.iter() {
            let (cs, ct) = terminal_caps(problem, labels, alpha, p);
            self.graph.set_tweights(p, cs, ct);
            problem.for_each_neighbor(p, |q| {
                let (cs, ct) = terminal_caps(problem, labels, alpha, q);
                self.graph.set_tweights(q, cs, ct);
            });
            if self.edge_of.is_empty() {
                continue;
            }
            for (k, &(dx, dy)) in fwd.iter().enumerate() {
                if let Some(q) = problem.step(p, dx, dy) {
                    let (c, r) = pair_caps(lambda, labels[p], labels[q], alpha);
                    self.graph.set_edge(self.edge_of[p * fwd.len() + k] as usize, c, r);
                }
                if let Some(r) = problem.step(p, -dx, -dy) {
                    let (c, rc) = pair_caps(lambda, labels[r], labels[p], alpha);
                    self.graph.set_edge(self.edge_of[r * fwd.len() + k] as usize, c, rc);
                }
            }
        }
        self.basis.copy_from_slice(labels);
        self.graph.maxflow_incremental();
    }
}

/// Expansion graphs of every α seen so far, for moves on one problem.
#[derive(Debug, Default)]
struct Expander {
    graphs: Vec<Option<AlphaGraph>>,
    dirty: Vec<usize>,
}

impl Expander {
    /// Optimal α-expansion move from `labels`, applied in place. Returns
    /// `current` plus the change the move makes, and whether any label
    /// changed. The move is discarded if rounding made it worse.
    fn expand_move(&mut self, problem: &CrfProblem, labels: &mut [u8], alpha: u8, current: f64) -> (f64, bool) {
        if labels.iter().all(|&l| l == alpha) {
            return (current, false);
        }
        if self.graphs.len() < problem.classes {
            self.graphs.resize_with(problem.classes, || None);
        }
        let ag = match &mut self.graphs[alpha as usize] {
            Some(ag) => {
                ag.update(problem, labels, alpha, &mut self.dirty);
                ag
            }
            slot => slot.insert(AlphaGraph::build(problem, labels, alpha)),
        };
        let g = &ag.graph;
        let lambda = problem.potts_weight;
        let switches = |q: usize, labels: &[u8]| labels[q] != alpha && g.segment(q) == Segment::Sink;
        let mut unary_delta = 0.0;
        let mut cut_delta = 0i64;
        let mut any = false;
        for p in 0..labels.len() {
            if !switches(p, labels) {
                continue;
            }
            any = true;
            let old = labels[p];
            unary_delta += problem.cost(p, alpha) - problem.cost(p, old);
            problem.for_each_neighbor(p, |q| {
                let sq = switches(q, labels);
                // pairs where both ends switch are counted from the lower index
                if sq && q < p {
                    return;
                }
                let new_q = if sq { alpha } else { labels[q] };
                cut_delta += (alpha != new_q) as i64 - (old != labels[q]) as i64;
            });
        }
        let delta = unary_delta + lambda * cut_delta as f64;
        if !any || delta > 0.0 {
            return (current, false);
        }
        for (p, l) in labels.iter_mut().enumerate() {
            if *l != alpha && g.segment(p) == Segment::Sink {
                *l = alpha;
            }
        }
        (current + delta, true)
    }
}

/// One α-expansion move on a copy of `labels`.
pub fn expand(problem: &CrfProblem, labels: &[u8], alpha: u8) -> Result<Vec<u8>> {
    problem.check_labels(labels)?;
    if alpha as usize >= problem.classes {
        return Err(Error::InvalidParameter(format!("alpha {alpha} out of range")));
    }
    let mut out = labels.to_vec();
    Expander::default().expand_move(problem, &mut out, alpha, 0.0);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrfSolution {
    pub labels: Vec<u8>,
    /// Initial energy plus the accumulated change of every accepted move.
    pub energy: f64,
    /// Energy before any move, then after every expansion move performed.
    pub trace: Vec<f64>,
    pub sweeps: usize,
}

pub const DEFAULT_MAX_SWEEPS: usize = 10;

/// Classes by ascending total unary cost, so the visiting order does not
/// depend on how classes are numbered.
fn expansion_order(problem: &CrfProblem) -> Vec<u8> {
    let mut totals = vec![0.0f64; problem.classes];
    for u in problem.unary.chunks_exact(problem.classes) {
        for (t, &v) in totals.iter_mut().zip(u) {
            *t += v;
        }
    }
    let mut order: Vec<u8> = (0..problem.classes as u8).collect();
    order.sort_by(|&a, &b| totals[a as usize].total_cmp(&totals[b as usize]));
    order
}

/// Cycles expansion moves over all classes until a sweep brings no
/// decrease or `max_sweeps` sweeps have run. Starts from the unary argmin
/// when `init` is `None`.
pub fn solve(problem: &CrfProblem, init: Option<&[u8]>, max_sweeps: usize) -> Result<CrfSolution> {
    let mut labels = match init {
        Some(l) => {
            problem.check_labels(l)?;
            l.to_vec()
        }
        None => problem.unary_argmin(),
    };
    let mut e = energy_unchecked(problem, &labels);
    let mut trace = vec![e];
    let mut sweeps = 0;
    if problem.potts_weight == 0.0 && init.is_none() {
        return Ok(CrfSolution { labels, energy: e, trace, sweeps });
    }
    let mut expander = Expander::default();
    let order = expansion_order(problem);
    // a move that changed nothing stays a no-op until some other move changes the labeling
    let mut version = 0u64;
    let mut idle_since = vec![None; problem.classes];
    while sweeps < max_sweeps {
        sweeps += 1;
        let start = e;
        for &alpha in &order {
            if idle_since[alpha as usize] == Some(version) {
                continue;
            }
            let (next, changed) = expander.expand_move(problem, &mut labels, alpha, e);
            e = next;
            if changed {
                version += 1;
            } else {
                idle_since[alpha as usize] = Some(version);
            }
            trace.push(e);
        }
        if !(e < start) {
            break;
        }
    }
    Ok(CrfSolution { labels, energy: e, trace, sweeps })
}
