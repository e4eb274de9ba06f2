//! Augmenting-path max-flow with persistent search trees (Boykov-Kolmogorov).
//!
//! Arcs come in pairs: arc `a` and its reverse `a ^ 1`. Terminal links are
//! folded into one signed residual per node, positive toward the source and
//! negative toward the sink.
//!
//! After a solve, capacities can be changed with [`FlowNetwork::set_tweights`]
//! and [`FlowNetwork::set_edge`] and the cut recomputed with
//! [`FlowNetwork::maxflow_incremental`], which keeps the existing flow and
//! search trees and repairs them around the changed nodes.

use std::collections::VecDeque;

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Source,
    Sink,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    first: u32,
    parent: u32,
    ts: u32,
    dist: u32,
    tr_cap: f64,
    is_sink: bool,
    queued: bool,
    marked: bool,
}

#[derive(Clone, Copy, Debug)]
struct Arc {
    head: u32,
    next: u32,
    r_cap: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    source_cap: Vec<f64>,
    sink_cap: Vec<f64>,
    arc_cap: Vec<f64>,
    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    changed: Vec<u32>,
    flow: f64,
    time: u32,
}

impl FlowNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        let mut g = Self::default();
        g.reserve(nodes, edges);
        g
    }

    pub fn reserve(&mut self, nodes: usize, edges: usize) {
        self.nodes.reserve(nodes);
        self.source_cap.reserve(nodes);
        self.sink_cap.reserve(nodes);
        self.arcs.reserve(2 * edges);
        self.arc_cap.reserve(2 * edges);
    }

    /// Removes all nodes and arcs, keeping allocations.
    pub fn clear(&mut self) {
        self.nodes.clear();
        self.arcs.clear();
        self.source_cap.clear();
        self.sink_cap.clear();
        self.arc_cap.clear();
        self.active.clear();
        self.orphans.clear();
        self.changed.clear();
        self.flow = 0.0;
        self.time = 0;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes.push(Node { first: NONE, parent: NONE, ts: 0, dist: 0, tr_cap: 0.0, is_sink: false, queued: false, marked: false });
        self.source_cap.push(0.0);
        self.sink_cap.push(0.0);
        self.nodes.len() - 1
    }

    /// Arc `i -> j` with capacity `cap` and `j -> i` with `rev_cap`. Returns
    /// the edge id.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: f64, rev_cap: f64) -> usize {
        debug_assert!(i != j && cap >= 0.0 && rev_cap >= 0.0);
        let a = self.arcs.len() as u32;
        self.arcs.push(Arc { head: j as u32, next: self.nodes[i].first, r_cap: cap });
        self.arcs.push(Arc { head: i as u32, next: self.nodes[j].first, r_cap: rev_cap });
        self.arc_cap.push(cap);
        self.arc_cap.push(rev_cap);
        self.nodes[i].first = a;
        self.nodes[j].first = a + 1;
        a as usize / 2
    }

    /// Adds `source -> i` capacity `cs` and `i -> sink` capacity `ct`.
    pub fn add_tweights(&mut self, i: usize, cs: f64, ct: f64) {
        debug_assert!(cs >= 0.0 && ct >= 0.0);
        self.source_cap[i] += cs;
        self.sink_cap[i] += ct;
        let mut delta = self.nodes[i].tr_cap;
        let (mut cs, mut ct) = (cs, ct);
        if delta > 0.0 {
            cs += delta;
        } else {
            ct -= delta;
        }
        delta = cs.min(ct);
        self.flow += delta;
        self.nodes[i].tr_cap = cs - ct;
    }

    fn mark(&mut self, i: usize) {
        if !self.nodes[i].marked {
            self.nodes[i].marked = true;
            self.changed.push(i as u32);
        }
    }

    /// Replaces the terminal capacities of `i` given so far.
    pub fn set_tweights(&mut self, i: usize, cs: f64, ct: f64) {
        debug_assert!(cs >= 0.0 && ct >= 0.0);
        let d = (cs - self.source_cap[i]) - (ct - self.sink_cap[i]);
        self.source_cap[i] = cs;
        self.sink_cap[i] = ct;
        if d != 0.0 {
            self.nodes[i].tr_cap += d;
            self.mark(i);
        }
    }

    /// Replaces both capacities of edge `e`. Flow exceeding a new capacity
    /// is returned through the terminal links of its endpoints.
    pub fn set_edge(&mut self, e: usize, cap: f64, rev_cap: f64) {
        debug_assert!(cap >= 0.0 && rev_cap >= 0.0);
        let (a, b) = (2 * e, 2 * e + 1);
        if self.arc_cap[a] == cap && self.arc_cap[b] == rev_cap {
            return;
        }
        let (i, j) = (self.arcs[b].head as usize, self.arcs[a].head as usize);
        let f = self.arc_cap[a] - self.arcs[a].r_cap;
        let (mut ra, mut rb) = (cap - f, rev_cap + f);
        if ra < 0.0 {
            self.nodes[i].tr_cap -= ra;
            self.nodes[j].tr_cap += ra;
            (ra, rb) = (0.0, cap + rev_cap);
        } else if rb < 0.0 {
            self.nodes[j].tr_cap -= rb;
            self.nodes[i].tr_cap += rb;
            (ra, rb) = (cap + rev_cap, 0.0);
        }
        self.arcs[a].r_cap = ra;
        self.arcs[b].r_cap = rb;
        self.arc_cap[a] = cap;
        self.arc_cap[b] = rev_cap;
        self.mark(i);
        self.mark(j);
    }

    /// Flow pushed so far. After capacity changes this includes the flow of
    /// earlier solves and is no longer the network's maximum flow; use
    /// [`FlowNetwork::cut_capacity`] for the cut value.
    pub fn flow(&self) -> f64 {
        self.flow
    }

    /// Side of the minimum cut; nodes unreachable from either terminal
    /// count as source side.
    pub fn segment(&self, i: usize) -> Segment {
        if self.nodes[i].parent != NONE && self.nodes[i].is_sink {
            Segment::Sink
        } else {
            Segment::Source
        }
    }

    /// Capacity of the cut given by `segment`, from the original capacities.
    pub fn cut_capacity(&self) -> f64 {
        let mut cut = 0.0;
        for i in 0..self.node_count() {
            match self.segment(i) {
                Segment::Source => {
                    cut += self.sink_cap[i];
                    let mut a = self.nodes[i].first;
                    while a != NONE {
                        if self.segment(self.arcs[a as usize].head as usize) == Segment::Sink {
                            cut += self.arc_cap[a as usize];
                        }
                        a = self.arcs[a as usize].next;
                    }
                }
                Segment::Sink => cut += self.source_cap[i],
            }
        }
        cut
    }

    fn set_active(&mut self, i: u32) {
        if !self.nodes[i as usize].queued {
            self.nodes[i as usize].queued = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            self.nodes[i as usize].queued = false;
            if self.nodes[i as usize].parent != NONE {
                return Some(i);
            }
        }
        None
    }

    /// Runs to completion and returns the maximum flow value.
    pub fn maxflow(&mut self) -> f64 {
        self.active.clear();
        self.orphans.clear();
        for &i in &self.changed {
            self.nodes[i as usize].marked = false;
        }
        self.changed.clear();
        self.time = 0;
        for i in 0..self.node_count() {
            self.nodes[i].queued = false;
            self.nodes[i].ts = 0;
            let c = self.nodes[i].tr_cap;
            if c != 0.0 {
                self.nodes[i].is_sink = c < 0.0;
                self.nodes[i].parent = TERMINAL;
                self.nodes[i].dist = 1;
                self.set_active(i as u32);
            } else {
                self.nodes[i].parent = NONE;
            }
        }

        self.run();
        self.flow
    }

    /// Recomputes the minimum cut after capacity changes, starting from the
    /// flow and search trees of the previous solve. Nodes and edges added
    /// since then are only seen by [`FlowNetwork::maxflow`].
    pub fn maxflow_incremental(&mut self) {
        self.time = self.time.wrapping_add(1);
        let changed = std::mem::take(&mut self.changed);
        let mut flipped = Vec::new();
        for &i in &changed {
            let iu = i as usize;
            self.nodes[iu].marked = false;
            let Node { parent, tr_cap, is_sink, .. } = self.nodes[iu];
            if tr_cap != 0.0 {
                let sink = tr_cap < 0.0;
                if parent != NONE && is_sink != sink {
                    self.orphan_children(iu);
                    flipped.push(i);
                }
                let n = &mut self.nodes[iu];
                n.parent = TERMINAL;
                n.is_sink = sink;
                n.dist = 1;
                n.ts = self.time;
            } else if parent == TERMINAL {
                self.set_orphan_rear(iu);
            } else if parent != NONE && parent != ORPHAN {
                let a = parent as usize;
                let valid = if is_sink { self.arcs[a].r_cap > 0.0 } else { self.arcs[a ^ 1].r_cap > 0.0 };
                if !valid {
                    self.set_orphan_rear(iu);
                }
            }
        }
        self.adopt_orphans();
        for &i in &changed {
            self.set_active(i);
        }
        // passive neighbors of a node that switched trees may now border it
        for i in flipped {
            let mut a = self.nodes[i as usize].first;
            while a != NONE {
                let j = self.arcs[a as usize].head;
                if self.nodes[j as usize].parent != NONE {
                    self.set_active(j);
                }
                a = self.arcs[a as usize].next;
            }
        }
        self.changed = changed;
        self.changed.clear();
        self.run();
    }

    /// Orphans every tree child of `i`.
    fn orphan_children(&mut self, i: usize) {
        let mut a = self.nodes[i].first;
        while a != NONE {
            let j = self.arcs[a as usize].head as usize;
            let pj = self.nodes[j].parent;
            if pj != NONE && pj != TERMINAL && pj != ORPHAN && self.arcs[pj as usize].head as usize == i {
                self.set_orphan_rear(j);
            }
            a = self.arcs[a as usize].next;
        }
    }

    fn adopt_orphans(&mut self) {
        while let Some(o) = self.orphans.pop_front() {
            // re-rooted at a terminal after being queued
            if self.nodes[o as usize].parent != ORPHAN {
                continue;
            }
            if self.nodes[o as usize].is_sink {
                self.adopt_sink_orphan(o);
            } else {
                self.adopt_source_orphan(o);
            }
        }
    }

    fn run(&mut self) {
        let mut current: Option<u32> = None;
        loop {
            let i = match current.filter(|&c| self.nodes[c as usize].parent != NONE) {
                Some(c) => c,
                None => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };
            current = None;
            let iu = i as usize;
            let mut bridge = NONE;
            let mut a = self.nodes[iu].first;
            if !self.nodes[iu].is_sink {
                while a != NONE {
                    let au = a as usize;
                    if self.arcs[au].r_cap > 0.0 {
                        let j = self.arcs[au].head as usize;
                        if self.nodes[j].parent == NONE {
                            self.nodes[j].is_sink = false;
                            self.nodes[j].parent = a ^ 1;
                            self.nodes[j].ts = self.nodes[iu].ts;
                            self.nodes[j].dist = self.nodes[iu].dist + 1;
                            self.set_active(j as u32);
                        } else if self.nodes[j].is_sink {
                            bridge = a;
                            break;
                        } else if self.nodes[j].ts <= self.nodes[iu].ts && self.nodes[j].dist > self.nodes[iu].dist {
                            self.nodes[j].parent = a ^ 1;
                            self.nodes[j].ts = self.nodes[iu].ts;
                            self.nodes[j].dist = self.nodes[iu].dist + 1;
                        }
                    }
                    a = self.arcs[au].next;
                }
            } else {
                while a != NONE {
                    let au = a as usize;
                    if self.arcs[au ^ 1].r_cap > 0.0 {
                        let j = self.arcs[au].head as usize;
                        if self.nodes[j].parent == NONE {
                            self.nodes[j].is_sink = true;
                            self.nodes[j].parent = a ^ 1;
                            self.nodes[j].ts = self.nodes[iu].ts;
                            self.nodes[j].dist = self.nodes[iu].dist + 1;
                            self.set_active(j as u32);
                        } else if !self.nodes[j].is_sink {
                            bridge = a ^ 1;
                            break;
                        } else if self.nodes[j].ts <= self.nodes[iu].ts && self.nodes[j].dist > self.nodes[iu].dist {
                            self.nodes[j].parent = a ^ 1;
                            self.nodes[j].ts = self.nodes[iu].ts;
                            self.nodes[j].dist = self.nodes[iu].dist + 1;
                        }
                    }
                    a = self.arcs[au].next;
                }
            }

            self.time = self.time.wrapping_add(1);
            if bridge != NONE {
                current = Some(i);
                self.augment(bridge);
                self.adopt_orphans();
            }
        }
    }

    fn set_orphan_front(&mut self, i: usize) {
        self.nodes[i].parent = ORPHAN;
        self.orphans.push_front(i as u32);
    }

    fn set_orphan_rear(&mut self, i: usize) {
        self.nodes[i].parent = ORPHAN;
        self.orphans.push_back(i as u32);
    }

    /// `bridge` runs from a source-tree node to a sink-tree node.
    fn augment(&mut self, bridge: u32) {
        let b = bridge as usize;
        let mut bottleneck = self.arcs[b].r_cap;
        let mut i = self.arcs[b ^ 1].head as usize;
        loop {
            let pa = self.nodes[i].parent;
            if pa == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[pa as usize ^ 1].r_cap);
            i = self.arcs[pa as usize].head as usize;
        }
        bottleneck = bottleneck.min(self.nodes[i].tr_cap);
        let mut i = self.arcs[b].head as usize;
        loop {
            let pa = self.nodes[i].parent;
            if pa == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[pa as usize].r_cap);
            i = self.arcs[pa as usize].head as usize;
        }
        bottleneck = bottleneck.min(-self.nodes[i].tr_cap);

        self.arcs[b ^ 1].r_cap += bottleneck;
        self.arcs[b].r_cap -= bottleneck;
        let mut i = self.arcs[b ^ 1].head as usize;
        loop {
            let pa = self.nodes[i].parent;
            if pa == TERMINAL {
                break;
            }
            let pa = pa as usize;
            self.arcs[pa].r_cap += bottleneck;
            self.arcs[pa ^ 1].r_cap -= bottleneck;
            if self.arcs[pa ^ 1].r_cap <= 0.0 {
                self.arcs[pa ^ 1].r_cap = 0.0;
                self.set_orphan_front(i);
            }
            i = self.arcs[pa].head as usize;
        }
        self.nodes[i].tr_cap -= bottleneck;
        if self.nodes[i].tr_cap <= 0.0 {
            self.nodes[i].tr_cap = 0.0;
            self.set_orphan_front(i);
        }
        let mut i = self.arcs[b].head as usize;
        loop {
            let pa = self.nodes[i].parent;
            if pa == TERMINAL {
                break;
            }
            let pa = pa as usize;
            self.arcs[pa ^ 1].r_cap += bottleneck;
            self.arcs[pa].r_cap -= bottleneck;
            if self.arcs[pa].r_cap <= 0.0 {
                self.arcs[pa].r_cap = 0.0;
                self.set_orphan_front(i);
            }
            i = self.arcs[pa].head as usize;
        }
        self.nodes[i].tr_cap += bottleneck;
        if self.nodes[i].tr_cap >= 0.0 {
            self.nodes[i].tr_cap = 0.0;
            self.set_orphan_front(i);
        }
        self.flow += bottleneck;
    }

    /// Distance from `j` to its terminal through valid parents, or `None`
    /// when the path ends at an orphan. Marks the path with the current time.
    fn origin_distance(&mut self, j: usize) -> Option<u32> {
        let mut d = 0u32;
        let mut k = j;
        loop {
            if self.nodes[k].ts == self.time {
                d += self.nodes[k].dist;
                break;
            }
            let a = self.nodes[k].parent;
            d += 1;
            if a == TERMINAL {
                self.nodes[k].ts = self.time;
                self.nodes[k].dist = 1;
                break;
            }
            if a == ORPHAN || a == NONE {
                return None;
            }
            k = self.arcs[a as usize].head as usize;
        }
        let total = d;
        let (mut k, mut d) = (j, d);
        while self.nodes[k].ts != self.time {
            self.nodes[k].ts = self.time;
            self.nodes[k].dist = d;
            d -= 1;
            k = self.arcs[self.nodes[k].parent as usize].head as usize;
        }
        Some(total)
    }

    fn adopt_source_orphan(&mut self, i: u32) {
        self.adopt(i as usize, false);
    }

    fn adopt_sink_orphan(&mut self, i: u32) {
        self.adopt(i as usize, true);
    }

    fn adopt(&mut self, i: usize, sink: bool) {
        // capacity into i (source tree) or out of i (sink tree) along arc a
        let usable = |g: &Self, a: usize| if sink { g.arcs[a].r_cap > 0.0 } else { g.arcs[a ^ 1].r_cap > 0.0 };
        let mut best = NONE;
        let mut d_min = u32::MAX;
        let mut a = self.nodes[i].first;
        while a != NONE {
            let au = a as usize;
            if usable(self, au) {
                let j = self.arcs[au].head as usize;
                if self.nodes[j].is_sink == sink && self.nodes[j].parent != NONE {
                    if let Some(d) = self.origin_distance(j) {
                        if d < d_min {
                            best = a;
                            d_min = d;
                        }
                    }
                }
            }
            a = self.arcs[au].next;
        }
        self.nodes[i].parent = best;
        if best != NONE {
            self.nodes[i].ts = self.time;
            self.nodes[i].dist = d_min + 1;
            return;
        }
        let mut a = self.nodes[i].first;
        while a != NONE {
            let au = a as usize;
            let j = self.arcs[au].head as usize;
            let pj = self.nodes[j].parent;
            if self.nodes[j].is_sink == sink && pj != NONE {
                if usable(self, au) {
                    self.set_active(j as u32);
                }
                if pj != TERMINAL && pj != ORPHAN && self.arcs[pj as usize].head as usize == i {
                    self.set_orphan_rear(j);
                }
            }
            a = self.arcs[au].next;
        }
    }
}
