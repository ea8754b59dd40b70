//! Sticky point-mass dynamics (inertia clusters) and the drifted optimal
//! clusters derived from them.
//!
//! Point mass `i` starts at `x_i` with weight `m_i` and speed
//! `φ_i = ½(m_{i+1} + … + m_n) − ½(m_1 + … + m_{i−1})`. Adjacent masses that
//! meet stick together and continue with the momentum-weighted speed. The
//! masses that have merged by time `t` form an ordered interval partition of
//! `{0..n}`; subtracting the per-block drift `v_j = ζ_{B_j}(t)/t` turns the
//! inertia paths ζ into optimal paths ξ that all end at 0.
//!
//! The simulation is event driven and exact between events, so paths are
//! stored as piecewise-linear curves with one knot per event time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::MomentInstance;
use crate::one_based;

/// Relative window within which collision times count as simultaneous.
pub const EVENT_TOLERANCE: f64 = 1e-12;

/// A cluster of consecutive point masses `first..=last` (zero-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub first: usize,
    pub last: usize,
    pub mass: u64,
    pub position: f64,
    pub speed: f64,
}

impl Cluster {
    pub fn momentum(&self) -> f64 {
        self.mass as f64 * self.speed
    }

    pub fn members(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

/// One collision: the pre-merge clusters in `merged` become a single cluster
/// at `position`. Several events may share a time when disjoint groups
/// collide simultaneously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub time: f64,
    #[serde(with = "one_based::intervals")]
    pub merged: Vec<(usize, usize)>,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearPath {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseLinearPath {
    /// Linear interpolation between knots; exact at a knot.
    pub fn evaluate(&self, s: f64) -> Result<f64> {
        let start = self.breakpoints[0];
        let end = *self
            .breakpoints
            .last()
            .expect("paths have at least one knot");
        if !(s >= start && s <= end) {
            return Err(Error::OutOfRange { s, start, end });
        }
        let k = self.breakpoints.partition_point(|&b| b < s);
        if self.breakpoints[k] == s {
            return Ok(self.values[k]);
        }
        let (s0, s1) = (self.breakpoints[k - 1], self.breakpoints[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        Ok(v0 + (v1 - v0) * (s - s0) / (s1 - s0))
    }
}

/// Outcome of simulating the inertia clusters over `[0, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub t: f64,
    /// Ordered interval partition of the location indices.
    #[serde(with = "one_based::sets")]
    pub partition: Vec<Vec<usize>>,
    pub cluster_masses: Vec<u64>,
    pub terminal_positions: Vec<f64>,
    pub drifts: Vec<f64>,
    pub events: Vec<MergeEvent>,
    pub inertia_paths: Vec<PiecewiseLinearPath>,
    pub optimal_paths: Vec<PiecewiseLinearPath>,
}

impl ClusterResult {
    /// Number of clusters at time `t`.
    pub fn num_blocks(&self) -> usize {
        self.partition.len()
    }

    /// Block index of location `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.partition
            .iter()
            .position(|b| b.contains(&i))
            .expect("partition covers every index")
    }

    /// Knot times shared by all paths.
    pub fn breakpoints(&self) -> &[f64] {
        &self.inertia_paths[0].breakpoints
    }
}

/// `φ_i = ½ Σ_{j>i} m_j − ½ Σ_{j<i} m_j`.
pub fn initial_speeds(m: &[u32]) -> Vec<f64> {
    let total: u64 = m.iter().map(|&v| u64::from(v)).sum();
    let mut left = 0u64;
    m.iter()
        .map(|&mi| {
            let right = total - left - u64::from(mi);
            let phi = 0.5 * (right as f64 - left as f64);
            left += u64::from(mi);
            phi
        })
        .collect()
}

pub fn simulate_inertia(inst: &MomentInstance) -> ClusterResult {
    simulate_inertia_observed(inst, |_, _| {})
}

/// Runs the dynamics, calling `observe(s, clusters)` at `s = 0`, after every
/// event time, and at `s = t`.
pub fn simulate_inertia_observed<F>(inst: &MomentInstance, mut observe: F) -> ClusterResult
where
    F: FnMut(f64, &[Cluster]),
{
    let t = inst.t();
    let n = inst.n();
    let tol = EVENT_TOLERANCE * (1.0 + t);

    let mut clusters: Vec<Cluster> = initial_speeds(inst.m())
        .into_iter()
        .enumerate()
        .map(|(i, speed)| Cluster {
            first: i,
            last: i,
            mass: u64::from(inst.m()[i]),
            position: inst.x()[i],
            speed,
        })
        .collect();

    let mut now = 0.0;
    let mut events = Vec::new();
    let mut knots = vec![0.0];
    let mut zeta: Vec<Vec<f64>> = inst.x().iter().map(|&x| vec![x]).collect();
    observe(now, &clusters);

    loop {
        // time until each adjacent pair collides
        let waits: Vec<Option<f64>> = clusters
            .windows(2)
            .map(|w| {
                let closing = w[0].speed - w[1].speed;
                (closing > 0.0).then(|| (w[1].position - w[0].position) / closing)
            })
            .collect();
        let Some(wait) = waits.iter().flatten().copied().reduce(f64::min) else {
            break;
        };
        if now + wait > t + tol {
            break;
        }
        let when = (now + wait).min(t);
        let dt = when - now;
        for c in &mut clusters {
            c.position += c.speed * dt;
        }

        let joins: Vec<bool> = waits
            .iter()
            .map(|w| matches!(w, Some(w) if *w <= wait + tol))
            .collect();
        let mut next = Vec::with_capacity(clusters.len());
        let mut k = 0;
        while k < clusters.len() {
            let mut end = k;
            while end < joins.len() && joins[end] {
                end += 1;
            }
            let group = &clusters[k..=end];
            if group.len() == 1 {
                next.push(group[0].clone());
            } else {
                let mass: u64 = group.iter().map(|c| c.mass).sum();
                let momentum: f64 = group.iter().map(Cluster::momentum).sum();
                let position = group
                    .iter()
                    .map(|c| c.mass as f64 * c.position)
                    .sum::<f64>()
                    / mass as f64;
                events.push(MergeEvent {
                    time: when,
                    merged: group.iter().map(|c| (c.first, c.last)).collect(),
                    position,
                });
                next.push(Cluster {
                    first: group[0].first,
                    last: group[group.len() - 1].last,
                    mass,
                    position,
                    speed: momentum / mass as f64,
                });
            }
            k = end + 1;
        }
        clusters = next;
        now = when;
        record(&clusters, &mut zeta);
        knots.push(now);
        observe(now, &clusters);
        if now >= t {
            break;
        }
    }

    if now < t {
        for c in &mut clusters {
            c.position += c.speed * (t - now);
        }
        record(&clusters, &mut zeta);
        knots.push(t);
        observe(t, &clusters);
    }

    let partition: Vec<Vec<usize>> = clusters.iter().map(|c| c.members().collect()).collect();
    let cluster_masses = clusters.iter().map(|c| c.mass).collect();
    let terminal_positions: Vec<f64> = clusters.iter().map(|c| c.position).collect();
    let drifts: Vec<f64> = terminal_positions.iter().map(|&p| p / t).collect();

    let mut block = vec![0; n];
    for (j, c) in clusters.iter().enumerate() {
        for i in c.members() {
            block[i] = j;
        }
    }
    let inertia_paths: Vec<PiecewiseLinearPath> = zeta
        .into_iter()
        .map(|values| PiecewiseLinearPath {
            breakpoints: knots.clone(),
            values,
        })
        .collect();
    let optimal_paths = inertia_paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let v = drifts[block[i]];
            let mut values: Vec<f64> = p
                .values
                .iter()
                .zip(&knots)
                .map(|(z, s)| z - v * s)
                .collect();
            // ζ_{B}(t) − v t vanishes up to rounding
            *values.last_mut().expect("at least two knots") = 0.0;
            PiecewiseLinearPath {
                breakpoints: knots.clone(),
                values,
            }
        })
        .collect();

    ClusterResult {
        t,
        partition,
        cluster_masses,
        terminal_positions,
        drifts,
        events,
        inertia_paths,
        optimal_paths,
    }
}

fn record(clusters: &[Cluster], zeta: &mut [Vec<f64>]) {
    for c in clusters {
        for i in c.members() {
            zeta[i].push(c.position);
        }
    }
}

/// State of the optimal clusters at the first merge time `s₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstMerge {
    pub s0: f64,
    /// Distinct optimal-cluster positions right after `s₀`.
    pub x_prime: Vec<f64>,
    pub m_prime: Vec<u32>,
    /// `ξ_i(s₀)` for every location.
    pub xi_at_s0: Vec<f64>,
}

/// Collapses the locations that merge at the first event time.
pub fn first_optimal_merge(res: &ClusterResult, inst: &MomentInstance) -> Result<FirstMerge> {
    let s0 = res.events.first().ok_or(Error::NoMerge)?.time;
    let xi_at_s0 = res
        .optimal_paths
        .iter()
        .map(|p| p.evaluate(s0))
        .collect::<Result<Vec<_>>>()?;

    // every event at s0 belongs to the same cascade
    let mut group_end: Vec<usize> = (0..inst.n()).collect();
    for e in res.events.iter().take_while(|e| e.time == s0) {
        let first = e.merged[0].0;
        let last = e.merged[e.merged.len() - 1].1;
        group_end[first] = last;
    }
    let mut x_prime = Vec::new();
    let mut m_prime = Vec::new();
    let mut i = 0;
    while i < inst.n() {
        let last = group_end[i];
        let mass: u32 = inst.m()[i..=last].iter().sum();
        let weighted: f64 = (i..=last)
            .map(|k| f64::from(inst.m()[k]) * xi_at_s0[k])
            .sum();
        x_prime.push(weighted / f64::from(mass));
        m_prime.push(mass);
        i = last + 1;
    }
    Ok(FirstMerge {
        s0,
        x_prime,
        m_prime,
        xi_at_s0,
    })
}

/// Block center-of-mass speed `ψ_k = ½(Σ_{i > max B_k} m_i − Σ_{i < min B_k} m_i)`.
pub fn block_speed(inst: &MomentInstance, block: &[usize]) -> f64 {
    let lo = block[0];
    let hi = block[block.len() - 1];
    let left: u64 = inst.m()[..lo].iter().map(|&v| u64::from(v)).sum();
    let right: u64 = inst.m()[hi + 1..].iter().map(|&v| u64::from(v)).sum();
    0.5 * (right as f64 - left as f64)
}

/// Mass-weighted mean of `values` over `block`.
pub fn block_mean(inst: &MomentInstance, block: &[usize], values: &[f64]) -> f64 {
    let mass: f64 = block.iter().map(|&i| f64::from(inst.m()[i])).sum();
    block
        .iter()
        .map(|&i| f64::from(inst.m()[i]) * values[i])
        .sum::<f64>()
        / mass
}

/// Margins of the block separation inequality for consecutive final blocks:
/// `mean_{k+1}(x) − mean_k(x) − (M_k + M_{k+1}) t/2`, strictly positive for a
/// partition produced by the dynamics.
pub fn separation_margins(inst: &MomentInstance, res: &ClusterResult) -> Vec<f64> {
    res.partition
        .windows(2)
        .map(|pair| {
            let mass = |b: &[usize]| b.iter().map(|&i| f64::from(inst.m()[i])).sum::<f64>();
            block_mean(inst, &pair[1], inst.x())
                - block_mean(inst, &pair[0], inst.x())
                - (mass(&pair[0]) + mass(&pair[1])) * inst.t() / 2.0
        })
        .collect()
}
