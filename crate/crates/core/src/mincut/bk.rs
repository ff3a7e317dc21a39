//! Boykov-Kolmogorov max-flow.
//!
//! Two search trees grow from the terminals until they touch, the path is
//! augmented, and nodes cut off from their tree root by saturated arcs are
//! either re-attached (adopted) or released. Arcs are stored in CSR order so
//! traversal is deterministic. Terminal links live in a per-node signed
//! residual: positive means capacity from the source, negative to the sink.
//!
//! Augmenting paths run mostly along time, so nodes are numbered bin-major
//! internally: consecutive frames of one bin sit next to each other in
//! memory.

use std::collections::VecDeque;

use super::FlowNetwork;

const FREE: u8 = 0;
const SOURCE_TREE: u8 = 1;
const SINK_TREE: u8 = 2;

// Parent sentinels; real parents are arc indices.
const NO_PARENT: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;

#[derive(Clone, Copy)]
struct Arc {
    head: u32,
    sister: u32,
    residual: f64,
}

#[derive(Clone, Copy)]
struct Node {
    terminal: f64,
    parent: u32,
    timestamp: u32,
    dist: u32,
    tree: u8,
    queued: bool,
}

pub(super) struct Solver {
    frames: usize,
    bins: usize,
    // CSR: arcs leaving node i are first[i]..first[i + 1]
    first: Vec<u32>,
    arcs: Vec<Arc>,
    nodes: Vec<Node>,

    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u32,
    flow: f64,
}

impl Solver {
    pub(super) fn new(net: &FlowNetwork) -> Self {
        let (frames, bins) = (net.frames(), net.bins());
        let n = net.grid_nodes();
        let internal = |u: u32| {
            let u = u as usize;
            ((u % bins) * frames + u / bins) as u32
        };
        let edges = net.edges();

        let mut degree = vec![0u32; n];
        for e in edges {
            degree[internal(e.u) as usize] += 1;
            degree[internal(e.v) as usize] += 1;
        }
        let mut first = Vec::with_capacity(n + 1);
        let mut acc = 0u32;
        for d in &degree {
            first.push(acc);
            acc += d;
        }
        first.push(acc);

        let mut arcs = vec![
            Arc {
                head: 0,
                sister: 0,
                residual: 0.0
            };
            acc as usize
        ];
        let mut fill: Vec<u32> = first[..n].to_vec();
        for e in edges {
            let (u, v) = (internal(e.u), internal(e.v));
            let a = fill[u as usize];
            fill[u as usize] += 1;
            let b = fill[v as usize];
            fill[v as usize] += 1;
            arcs[a as usize] = Arc {
                head: v,
                sister: b,
                residual: e.capacity,
            };
            arcs[b as usize] = Arc {
                head: u,
                sister: a,
                residual: e.capacity,
            };
        }

        let blank = Node {
            terminal: 0.0,
            parent: NO_PARENT,
            timestamp: 0,
            dist: 0,
            tree: FREE,
            queued: false,
        };
        let mut nodes = vec![blank; n];
        let cap = net.terminal_capacity();
        let mut flow = 0.0;
        for node in net.source_nodes() {
            nodes[internal(node) as usize].terminal += cap;
        }
        for node in net.sink_nodes() {
            let t = &mut nodes[internal(node) as usize].terminal;
            // A node tied to both terminals passes min(s, t) straight through.
            if *t > 0.0 {
                flow += t.min(cap);
            }
            *t -= cap;
        }

        let mut solver = Self {
            frames,
            bins,
            first,
            arcs,
            nodes,
            active: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
            flow,
        };
        // Seed the queue in external id order.
        for u in 0..n as u32 {
            let i = internal(u);
            let node = &mut solver.nodes[i as usize];
            if node.terminal != 0.0 {
                node.tree = if node.terminal > 0.0 {
                    SOURCE_TREE
                } else {
                    SINK_TREE
                };
                node.parent = TERMINAL;
                node.dist = 1;
                solver.make_active(i);
            }
        }
        solver
    }

    fn arc_range(&self, i: u32) -> std::ops::Range<usize> {
        self.first[i as usize] as usize..self.first[i as usize + 1] as usize
    }

    fn tail(&self, arc: usize) -> u32 {
        self.arcs[self.arcs[arc].sister as usize].head
    }

    fn make_active(&mut self, i: u32) {
        let node = &mut self.nodes[i as usize];
        if !node.queued {
            node.queued = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            let node = &mut self.nodes[i as usize];
            node.queued = false;
            if node.tree != FREE {
                return Some(i);
            }
        }
        None
    }

    fn set_orphan(&mut self, i: u32) {
        self.nodes[i as usize].parent = ORPHAN;
        self.orphans.push_back(i);
    }

    /// Runs to completion and returns the max-flow value.
    pub(super) fn run(&mut self) -> f64 {
        let mut current: Option<u32> = None;
        loop {
            if let Some(c) = current {
                self.nodes[c as usize].queued = false;
            }
            let i = match current.take() {
                Some(c) if self.nodes[c as usize].tree != FREE => c,
                _ => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };

            let Some(bridge) = self.grow(i) else {
                continue;
            };
            // Keep expanding from the same node next round; flag it so it is
            // not queued twice in the meantime.
            self.nodes[i as usize].queued = true;
            current = Some(i);

            self.time += 1;
            self.augment(bridge);
            self.adopt_orphans();
        }
        self.flow
    }

    /// Expands the tree containing `i` through its arcs. Returns an arc from
    /// a source-tree node to a sink-tree node when the trees meet.
    fn grow(&mut self, i: u32) -> Option<usize> {
        let me = self.nodes[i as usize];
        let from_source = me.tree == SOURCE_TREE;
        for a in self.arc_range(i) {
            let arc = self.arcs[a];
            // Residual away from the root: i -> j in the source tree,
            // j -> i in the sink tree. Either way j's parent arc is j -> i.
            let outward = if from_source { a } else { arc.sister as usize };
            let toward_root = arc.sister;
            if self.arcs[outward].residual <= 0.0 {
                continue;
            }
            let j = arc.head as usize;
            let other = self.nodes[j];
            if other.tree == FREE {
                self.nodes[j] = Node {
                    tree: me.tree,
                    parent: toward_root,
                    timestamp: me.timestamp,
                    dist: me.dist + 1,
                    ..other
                };
                self.make_active(j as u32);
            } else if other.tree != me.tree {
                return Some(outward);
            } else if other.timestamp <= me.timestamp && other.dist > me.dist {
                let node = &mut self.nodes[j];
                node.parent = toward_root;
                node.timestamp = me.timestamp;
                node.dist = me.dist + 1;
            }
        }
        None
    }

    /// Pushes the bottleneck along source -> ... -> bridge -> ... -> sink.
    ///
    /// In the source tree a node's parent arc points from the node to its
    /// parent and flow uses the sister arc; in the sink tree flow uses the
    /// parent arc itself.
    fn augment(&mut self, bridge: usize) {
        let mut bottleneck = self.arcs[bridge].residual;

        let mut v = self.tail(bridge) as usize;
        loop {
            let p = self.nodes[v].parent;
            if p == TERMINAL {
                bottleneck = bottleneck.min(self.nodes[v].terminal);
                break;
            }
            let arc = self.arcs[p as usize];
            bottleneck = bottleneck.min(self.arcs[arc.sister as usize].residual);
            v = arc.head as usize;
        }
        let mut v = self.arcs[bridge].head as usize;
        loop {
            let p = self.nodes[v].parent;
            if p == TERMINAL {
                bottleneck = bottleneck.min(-self.nodes[v].terminal);
                break;
            }
            let arc = self.arcs[p as usize];
            bottleneck = bottleneck.min(arc.residual);
            v = arc.head as usize;
        }

        let back = self.arcs[bridge].sister as usize;
        self.arcs[back].residual += bottleneck;
        self.arcs[bridge].residual -= bottleneck;

        let mut v = self.tail(bridge) as usize;
        loop {
            let p = self.nodes[v].parent;
            if p == TERMINAL {
                self.nodes[v].terminal -= bottleneck;
                if self.nodes[v].terminal == 0.0 {
                    self.set_orphan(v as u32);
                }
                break;
            }
            let Arc {
                head: next,
                sister: forward,
                ..
            } = self.arcs[p as usize];
            self.arcs[p as usize].residual += bottleneck;
            self.arcs[forward as usize].residual -= bottleneck;
            if self.arcs[forward as usize].residual == 0.0 {
                self.set_orphan(v as u32);
            }
            v = next as usize;
        }
        let mut v = self.arcs[bridge].head as usize;
        loop {
            let p = self.nodes[v].parent;
            if p == TERMINAL {
                self.nodes[v].terminal += bottleneck;
                if self.nodes[v].terminal == 0.0 {
                    self.set_orphan(v as u32);
                }
                break;
            }
            let Arc {
                head: next,
                sister: back,
                ..
            } = self.arcs[p as usize];
            self.arcs[back as usize].residual += bottleneck;
            self.arcs[p as usize].residual -= bottleneck;
            if self.arcs[p as usize].residual == 0.0 {
                self.set_orphan(v as u32);
            }
            v = next as usize;
        }

        self.flow += bottleneck;
    }

    fn adopt_orphans(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            self.adopt(i);
        }
    }

    /// Walks from `j` toward its root. Returns the path length in nodes, or
    /// `None` if the walk reaches an orphan.
    fn origin_distance(&mut self, j: u32) -> Option<u32> {
        let mut d = 0u32;
        let mut k = j as usize;
        loop {
            let node = self.nodes[k];
            if node.timestamp == self.time {
                return Some(d + node.dist);
            }
            d += 1;
            match node.parent {
                TERMINAL => {
                    self.nodes[k].timestamp = self.time;
                    self.nodes[k].dist = 1;
                    return Some(d);
                }
                ORPHAN => return None,
                p => k = self.arcs[p as usize].head as usize,
            }
        }
    }

    /// Residual on `a` (leaving an orphan in `tree`) in the direction that
    /// would let the arc's head serve as its parent.
    fn parent_capacity(&self, tree: u8, a: usize) -> f64 {
        if tree == SOURCE_TREE {
            self.arcs[self.arcs[a].sister as usize].residual
        } else {
            self.arcs[a].residual
        }
    }

    fn adopt(&mut self, i: u32) {
        let iu = i as usize;
        let tree = self.nodes[iu].tree;
        let mut best: Option<(usize, u32)> = None;

        for a in self.arc_range(i) {
            if self.parent_capacity(tree, a) <= 0.0 {
                continue;
            }
            let j = self.arcs[a].head;
            if self.nodes[j as usize].tree != tree {
                continue;
            }
            let Some(mut d) = self.origin_distance(j) else {
                continue;
            };
            if best.is_none_or(|(_, dmin)| d < dmin) {
                best = Some((a, d));
            }
            // Cache distances along the verified path.
            let mut k = j as usize;
            while self.nodes[k].timestamp != self.time {
                let node = &mut self.nodes[k];
                node.timestamp = self.time;
                node.dist = d;
                d -= 1;
                k = self.arcs[node.parent as usize].head as usize;
            }
        }

        if let Some((a, d)) = best {
            let node = &mut self.nodes[iu];
            node.parent = a as u32;
            node.timestamp = self.time;
            node.dist = d + 1;
            return;
        }

        self.nodes[iu].tree = FREE;
        self.nodes[iu].parent = NO_PARENT;
        for a in self.arc_range(i) {
            let j = self.arcs[a].head as usize;
            if self.nodes[j].tree != tree {
                continue;
            }
            if self.parent_capacity(tree, a) > 0.0 {
                self.make_active(j as u32);
            }
            let p = self.nodes[j].parent;
            if p != TERMINAL && p != ORPHAN && p != NO_PARENT && self.arcs[p as usize].head == i {
                self.set_orphan(j as u32);
            }
        }
    }

    /// Grid cells reachable from the source through arcs with positive
    /// residual, indexed by external (frame-major) node id.
    pub(super) fn source_reachable(&self) -> Vec<bool> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.terminal > 0.0 {
                seen[i] = true;
                queue.push_back(i as u32);
            }
        }
        while let Some(i) = queue.pop_front() {
            for a in self.arc_range(i) {
                let arc = self.arcs[a];
                let j = arc.head as usize;
                if !seen[j] && arc.residual > 0.0 {
                    seen[j] = true;
                    queue.push_back(j as u32);
                }
            }
        }
        let mut external = vec![false; n];
        for (i, r) in seen.into_iter().enumerate() {
            let (b, t) = (i / self.frames, i % self.frames);
            external[t * self.bins + b] = r;
        }
        external
    }
}
