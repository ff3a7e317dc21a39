//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spectraseam::{AudioClip, FlowNetwork, CANONICAL_RATE};

pub const RATE: u32 = CANONICAL_RATE;

/// O(N^2) DFT straight from the definition.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Synthetic track parameters.
#[derive(Clone, Debug)]
pub struct Track {
    pub bpm: f64,
    pub secs: f64,
    /// Time of the first click.
    pub first_click: f64,
    /// Every fourth click at double amplitude.
    pub accent: bool,
    /// Sustained tone frequencies mixed under the clicks.
    pub chord: Vec<f64>,
    pub chord_level: f64,
    pub seed: u64,
}

impl Track {
    pub fn clicks(bpm: f64, secs: f64) -> Self {
        Self {
            bpm,
            secs,
            first_click: 0.25,
            accent: false,
            chord: Vec::new(),
            chord_level: 0.0,
            seed: 7,
        }
    }

    pub fn with_chord(mut self, chord: &[f64], level: f64) -> Self {
        self.chord = chord.to_vec();
        self.chord_level = level;
        self
    }

    pub fn click_times(&self) -> Vec<f64> {
        let period = 60.0 / self.bpm;
        (0..)
            .map(|k| self.first_click + k as f64 * period)
            .take_while(|t| *t < self.secs - 0.05)
            .collect()
    }

    pub fn render(&self) -> AudioClip {
        let n = (self.secs * RATE as f64) as usize;
        let mut s = vec![0.0f64; n];
        for (i, f) in self.chord.iter().enumerate() {
            let phase = i as f64 * 0.7;
            for (j, v) in s.iter_mut().enumerate() {
                *v += self.chord_level * (2.0 * PI * f * j as f64 / RATE as f64 + phase).sin();
            }
        }
        let mut rng = StdRng::seed_from_u64(self.seed);
        let burst = (0.02 * RATE as f64) as usize;
        for (k, t) in self.click_times().into_iter().enumerate() {
            let start = (t * RATE as f64).round() as usize;
            let amp = if self.accent && k % 4 == 0 { 0.8 } else { 0.4 };
            for j in 0..burst.min(n.saturating_sub(start)) {
                let decay = (-(j as f64) / (0.004 * RATE as f64)).exp();
                s[start + j] += amp * decay * rng.random_range(-1.0..1.0);
            }
        }
        AudioClip::new(
            s.into_iter().map(|v| v.clamp(-1.0, 1.0) as f32).collect(),
            RATE,
        )
        .unwrap()
    }
}

pub fn white_noise(len: usize, seed: u64) -> AudioClip {
    let mut rng = StdRng::seed_from_u64(seed);
    let s = (0..len).map(|_| rng.random_range(-0.5f32..0.5)).collect();
    AudioClip::new(s, RATE).unwrap()
}

/// sqrt(sum (a-b)^2 / sum b^2) over `range`.
pub fn relative_rms(actual: &[f32], reference: &[f32], range: std::ops::Range<usize>) -> f64 {
    let mut err = 0.0;
    let mut energy = 0.0;
    for i in range {
        let d = actual[i] as f64 - reference[i] as f64;
        err += d * d;
        energy += (reference[i] as f64).powi(2);
    }
    (err / energy).sqrt()
}

/// Edmonds-Karp max-flow on the network's full edge list. Grid edges are
/// undirected; terminal links are directed.
pub fn edmonds_karp(net: &FlowNetwork) -> f64 {
    let n = net.node_count();
    let mut cap = vec![std::collections::HashMap::<usize, f64>::new(); n];
    let mut add = |u: usize, v: usize, c: f64| {
        *cap[u].entry(v).or_insert(0.0) += c;
        cap[v].entry(u).or_insert(0.0);
    };
    for e in net.edges() {
        add(e.u as usize, e.v as usize, e.capacity);
        add(e.v as usize, e.u as usize, e.capacity);
    }
    for node in net.source_nodes() {
        add(
            net.source() as usize,
            node as usize,
            net.terminal_capacity(),
        );
    }
    for node in net.sink_nodes() {
        add(node as usize, net.sink() as usize, net.terminal_capacity());
    }
    let adjacency: Vec<Vec<usize>> = cap
        .iter()
        .map(|m| {
            let mut v: Vec<usize> = m.keys().copied().collect();
            v.sort_unstable();
            v
        })
        .collect();

    let (s, t) = (net.source() as usize, net.sink() as usize);
    let mut flow = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if prev[v] == usize::MAX && cap[u][&v] > 0.0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = prev[v];
            bottleneck = bottleneck.min(cap[u][&v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            *cap[u].get_mut(&v).unwrap() -= bottleneck;
            *cap[v].get_mut(&u).unwrap() += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
}

/// Minimum cut by enumerating every labeling with frame 0 on the source
/// side and the last frame on the sink side.
pub fn brute_force_min_cut(net: &FlowNetwork) -> f64 {
    let (frames, bins) = (net.frames(), net.bins());
    let free: Vec<usize> = (bins..(frames - 1) * bins).collect();
    let mut best = f64::INFINITY;
    for mask in 0u64..(1 << free.len()) {
        // true = source side
        let mut side = vec![false; frames * bins];
        side[..bins].fill(true);
        for (bit, &node) in free.iter().enumerate() {
            side[node] = mask >> bit & 1 == 1;
        }
        let cost: f64 = net
            .edges()
            .iter()
            .filter(|e| side[e.u as usize] != side[e.v as usize])
            .map(|e| e.capacity)
            .sum();
        best = best.min(cost);
    }
    best
}

/// Random grid with capacities from `gen`.
pub fn random_grid(
    rng: &mut StdRng,
    frames: usize,
    bins: usize,
    mut gen: impl FnMut(&mut StdRng) -> f64,
) -> FlowNetwork {
    FlowNetwork::grid(frames, bins, |_, _| gen(rng)).unwrap()
}

pub fn peak_bin(values: &[Complex64]) -> usize {
    (0..values.len())
        .max_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()))
        .unwrap()
}

pub fn tone(freq: f64, secs: f64, rate: u32) -> AudioClip {
    let n = (secs * rate as f64).round() as usize;
    let s = (0..n)
        .map(|i| (0.5 * (2.0 * PI * freq * i as f64 / rate as f64).sin()) as f32)
        .collect();
    AudioClip::new(s, rate).unwrap()
}

pub fn write_wav(dir: &std::path::Path, name: &str, clip: &AudioClip) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, spectraseam::encode_wav(clip).unwrap()).unwrap();
    path
}
