//! Grid flow network over two overlapped dB spectrograms and its minimum cut.
//!
//! Every (frame, bin) cell becomes a node connected to its time and
//! frequency neighbours. An edge costs the summed per-cell disagreement of
//! the two tracks at its endpoints, so a cut is cheap where the tracks look
//! alike. Frame 0 is tied to the source (track A) and the last frame to the
//! sink (track B); each bin switches from A to B where the cut crosses it.

mod bk;

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::spectral::DbSpectrogram;

/// Cost of switching between tracks across the edge joining cells
/// `(i, j)` and `(k, l)`: `|A_ij - B_ij| + |A_kl - B_kl|`.
pub fn edge_weight(a_ij: f64, b_ij: f64, a_kl: f64, b_kl: f64) -> f64 {
    (a_ij - b_ij).abs() + (a_kl - b_kl).abs()
}

/// An undirected edge between two grid nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEdge {
    pub u: u32,
    pub v: u32,
    pub capacity: f64,
}

/// 4-connected capacity grid with the first frame tied to the source and the
/// last frame tied to the sink.
///
/// Node `frame * bins + bin` is a grid cell; the source and sink take the
/// two ids after the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    frames: usize,
    bins: usize,
    edges: Vec<GridEdge>,
    terminal_capacity: f64,
}

impl FlowNetwork {
    /// Builds the grid, asking `weight` for the capacity of every edge.
    ///
    /// Edges are produced frame-major, bin-minor: for each cell, the edge
    /// to the next frame comes before the edge to the next bin.
    pub fn grid(
        frames: usize,
        bins: usize,
        mut weight: impl FnMut((usize, usize), (usize, usize)) -> f64,
    ) -> Result<Self> {
        if frames < 2 {
            return Err(Error::TooShort(format!(
                "grid needs at least 2 frames, got {frames}"
            )));
        }
        if bins == 0 {
            return Err(Error::Shape("grid needs at least one bin".into()));
        }
        if frames
            .checked_mul(bins)
            .is_none_or(|n| n + 2 > u32::MAX as usize - 3)
        {
            return Err(Error::Range(format!("{frames} x {bins} grid is too large")));
        }
        let id = |t: usize, b: usize| (t * bins + b) as u32;
        let mut edges = Vec::with_capacity(2 * frames * bins);
        let mut total = 0.0;
        for t in 0..frames {
            for b in 0..bins {
                let mut push = |other: (usize, usize)| -> Result<()> {
                    let capacity = weight((t, b), other);
                    if !(capacity.is_finite() && capacity >= 0.0) {
                        return Err(Error::Range(format!(
                            "edge ({t},{b})-({},{}) has capacity {capacity}",
                            other.0, other.1
                        )));
                    }
                    total += capacity;
                    edges.push(GridEdge {
                        u: id(t, b),
                        v: id(other.0, other.1),
                        capacity,
                    });
                    Ok(())
                };
                if t + 1 < frames {
                    push((t + 1, b))?;
                }
                if b + 1 < bins {
                    push((t, b + 1))?;
                }
            }
        }
        Ok(Self {
            frames,
            bins,
            edges,
            terminal_capacity: 1.0 + total,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }
    pub fn bins(&self) -> usize {
        self.bins
    }
    pub fn grid_nodes(&self) -> usize {
        self.frames * self.bins
    }
    pub fn node_count(&self) -> usize {
        self.grid_nodes() + 2
    }
    pub fn source(&self) -> u32 {
        self.grid_nodes() as u32
    }
    pub fn sink(&self) -> u32 {
        self.grid_nodes() as u32 + 1
    }
    pub fn node(&self, frame: usize, bin: usize) -> u32 {
        (frame * self.bins + bin) as u32
    }
    pub fn edges(&self) -> &[GridEdge] {
        &self.edges
    }

    /// Capacity of every terminal link; exceeds the sum of all grid
    /// capacities, so no terminal link can be part of a minimum cut.
    pub fn terminal_capacity(&self) -> f64 {
        self.terminal_capacity
    }

    /// Nodes linked to the source (frame 0).
    pub fn source_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.bins).map(|b| self.node(0, b))
    }

    /// Nodes linked to the sink (last frame).
    pub fn sink_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.bins).map(|b| self.node(self.frames - 1, b))
    }

    /// Every edge including terminal links as `(u, v, capacity)`; terminal
    /// links are directed source -> node and node -> sink.
    pub fn all_edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let cap = self.terminal_capacity;
        self.edges
            .iter()
            .map(|e| (e.u, e.v, e.capacity))
            .chain(self.source_nodes().map(move |n| (self.source(), n, cap)))
            .chain(self.sink_nodes().map(move |n| (n, self.sink(), cap)))
    }

    /// Writes the network as text: a header line `frames bins source sink`,
    /// then one `u v cap` line per edge.
    pub fn write_dump(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(
            out,
            "# {} {} {} {}",
            self.frames,
            self.bins,
            self.source(),
            self.sink()
        )?;
        for (u, v, cap) in self.all_edges() {
            writeln!(out, "{u} {v} {cap}")?;
        }
        Ok(())
    }

    /// Total capacity of the edges whose endpoints carry different labels.
    pub fn cut_capacity(&self, labels: &CutLabeling) -> f64 {
        let side = |n: u32| labels.labels[n as usize];
        let mut total: f64 = self
            .edges
            .iter()
            .filter(|e| side(e.u) != side(e.v))
            .map(|e| e.capacity)
            .sum();
        total += self
            .source_nodes()
            .filter(|&n| side(n) == Label::Sink)
            .count() as f64
            * self.terminal_capacity;
        total += self
            .sink_nodes()
            .filter(|&n| side(n) == Label::Source)
            .count() as f64
            * self.terminal_capacity;
        total
    }
}

/// Builds the flow network for two equally shaped dB spectrograms.
pub fn build_grid_graph(db_a: &DbSpectrogram, db_b: &DbSpectrogram) -> Result<FlowNetwork> {
    build_grid_graph_with(db_a, db_b, edge_weight)
}

/// [`build_grid_graph`] with a custom cost in place of [`edge_weight`].
pub fn build_grid_graph_with(
    db_a: &DbSpectrogram,
    db_b: &DbSpectrogram,
    weight: impl Fn(f64, f64, f64, f64) -> f64,
) -> Result<FlowNetwork> {
    if db_a.frames() != db_b.frames() || db_a.bins() != db_b.bins() {
        return Err(Error::Shape(format!(
            "segments differ: {}x{} vs {}x{}",
            db_a.frames(),
            db_a.bins(),
            db_b.frames(),
            db_b.bins()
        )));
    }
    FlowNetwork::grid(db_a.frames(), db_a.bins(), |(t, b), (k, l)| {
        weight(
            db_a.get(t, b),
            db_b.get(t, b),
            db_a.get(k, l),
            db_b.get(k, l),
        )
    })
}

/// Which track a cell is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// Reachable from the source after max-flow: take track A.
    Source,
    /// Take track B.
    Sink,
}

/// Binary partition of the grid cells plus its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CutLabeling {
    frames: usize,
    bins: usize,
    labels: Vec<Label>,
    cut_cost: f64,
}

impl CutLabeling {
    pub fn new(frames: usize, bins: usize, labels: Vec<Label>, cut_cost: f64) -> Result<Self> {
        if labels.len() != frames * bins {
            return Err(Error::Shape(format!(
                "{} labels for a {frames}x{bins} grid",
                labels.len()
            )));
        }
        Ok(Self {
            frames,
            bins,
            labels,
            cut_cost,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }
    pub fn bins(&self) -> usize {
        self.bins
    }
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
    pub fn get(&self, frame: usize, bin: usize) -> Label {
        self.labels[frame * self.bins + bin]
    }
    /// Max-flow value, equal to the capacity of the cut.
    pub fn cut_cost(&self) -> f64 {
        self.cut_cost
    }
}

/// Solves max-flow with the Boykov-Kolmogorov algorithm and labels every
/// cell by whether it is reachable from the source in the residual graph.
pub fn max_flow_min_cut(net: &FlowNetwork) -> CutLabeling {
    let mut solver = bk::Solver::new(net);
    let flow = solver.run();
    let reachable = solver.source_reachable();
    let labels = reachable
        .into_iter()
        .take(net.grid_nodes())
        .map(|r| if r { Label::Source } else { Label::Sink })
        .collect();
    CutLabeling {
        frames: net.frames,
        bins: net.bins,
        labels,
        cut_cost: flow,
    }
}

/// Per-bin frame indices at which the labeling flips along time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seam {
    pub frames: usize,
    /// Outer index is the frequency bin.
    pub flips: Vec<Vec<usize>>,
}

impl Seam {
    pub fn bins(&self) -> usize {
        self.flips.len()
    }

    /// First switch from A to B in `bin`.
    pub fn primary(&self, bin: usize) -> Option<usize> {
        self.flips[bin].first().copied()
    }

    pub fn is_monotone(&self) -> bool {
        self.flips.iter().all(|f| f.len() == 1)
    }
}

/// Lists, for each bin, every frame `t` whose label differs from frame
/// `t - 1`.
pub fn extract_seam(labels: &CutLabeling) -> Seam {
    let flips = (0..labels.bins)
        .map(|b| {
            (1..labels.frames)
                .filter(|&t| labels.get(t, b) != labels.get(t - 1, b))
                .collect()
        })
        .collect();
    Seam {
        frames: labels.frames,
        flips,
    }
}
