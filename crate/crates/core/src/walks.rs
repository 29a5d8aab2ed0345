//! Random walks along out-edges: pair walks with meeting and trail-departure
//! diagnostics, the coalescing system, the stationary law and the
//! Wasserstein-1 comparison of stationary meeting times with Exp(1).
//!
//! The trail-departure time `tau_bar` is the first time the X-walk jumps to a
//! vertex outside `{x} ∪ {Y_s : s <= t}`. A meeting before `tau_bar` is a
//! "chase meeting": X caught Y by retracing Y's own trail.

use std::collections::HashSet;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::dcm::{is_strongly_connected, Digraph};
use crate::error::{Error, Result};
use crate::seed::task_rng;

/// One step of the simple random walk along out-edges (multiplicity-weighted).
pub fn rw_step<R: Rng + ?Sized>(g: &Digraph, x: usize, rng: &mut R) -> usize {
    let heads = g.out_neighbors(x);
    heads[rng.random_range(0..heads.len())]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One walk moves per step, chosen by a fair coin; time counts steps.
    Discrete,
    /// Each walk jumps at rate 1 (pair holding times Exp(2)).
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeetingSample {
    pub x0: usize,
    pub y0: usize,
    pub meet_time: Option<f64>,
    pub steps: u64,
    pub tau_bar: Option<f64>,
    pub chase_meet: bool,
    pub mode: Mode,
}

impl MeetingSample {
    pub fn censored(&self) -> bool {
        self.meet_time.is_none()
    }
}

/// Tracks Y's visited set until X first departs from it.
struct TrailTracker {
    trail: HashSet<usize>,
    departed: bool,
}

impl TrailTracker {
    fn new(x: usize, y: usize) -> Self {
        Self {
            trail: HashSet::from([x, y]),
            departed: false,
        }
    }

    fn y_moved(&mut self, to: usize) {
        if !self.departed {
            self.trail.insert(to);
        }
    }

    /// Returns true when this X-jump is the departure.
    fn x_moved(&mut self, to: usize) -> bool {
        if self.departed || self.trail.contains(&to) {
            return false;
        }
        self.departed = true;
        self.trail = HashSet::new();
        true
    }
}

/// First meeting of two independent walks started at `(x, y)`, censored at
/// `cap` (steps in discrete mode, time in continuous mode).
pub fn sample_meeting<R: Rng + ?Sized>(
    g: &Digraph,
    x: usize,
    y: usize,
    mode: Mode,
    cap: f64,
    rng: &mut R,
) -> MeetingSample {
    let mut sample = MeetingSample {
        x0: x,
        y0: y,
        meet_time: None,
        steps: 0,
        tau_bar: None,
        chase_meet: false,
        mode,
    };
    if x == y {
        sample.meet_time = Some(0.0);
        return sample;
    }
    let (mut px, mut py) = (x, y);
    let mut trail = TrailTracker::new(x, y);
    let mut now = 0.0;
    loop {
        now += match mode {
            Mode::Discrete => 1.0,
            Mode::Continuous => rng.sample::<f64, _>(Exp1) / 2.0,
        };
        if now > cap {
            return sample;
        }
        sample.steps += 1;
        if rng.random::<bool>() {
            px = rw_step(g, px, rng);
            if trail.x_moved(px) {
                sample.tau_bar = Some(now);
            }
        } else {
            py = rw_step(g, py, rng);
            trail.y_moved(py);
        }
        if px == py {
            sample.meet_time = Some(now);
            sample.chase_meet = sample.tau_bar.is_none();
            return sample;
        }
    }
}

/// Number of discrete asynchronous steps until X departs from Y's trail; the
/// walks ignore meetings (they are independent). `None` if no departure
/// happens within `max_steps`.
pub fn trail_departure_steps<R: Rng + ?Sized>(
    g: &Digraph,
    x: usize,
    y: usize,
    max_steps: u64,
    rng: &mut R,
) -> Option<u64> {
    let (mut px, mut py) = (x, y);
    let mut trail = TrailTracker::new(x, y);
    for step in 1..=max_steps {
        if rng.random::<bool>() {
            px = rw_step(g, px, rng);
            if trail.x_moved(px) {
                return Some(step);
            }
        } else {
            py = rw_step(g, py, rng);
            trail.y_moved(py);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    /// L1 change of the last lazy-kernel sweep.
    pub residual: f64,
    pub iterations: usize,
}

/// Stationary law of the walk by iterating the lazy kernel `(I + P) / 2` from
/// the uniform vector until the L1 change falls below `tol`.
pub fn stationary_distribution(g: &Digraph, tol: f64, max_iters: usize) -> Result<StationaryDistribution> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    if !is_strongly_connected(g) {
        return Err(Error::NotStronglyConnected);
    }
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        next.iter_mut().zip(&pi).for_each(|(nx, p)| *nx = 0.5 * p);
        for (x, &p) in pi.iter().enumerate() {
            let heads = g.out_neighbors(x);
            let share = 0.5 * p / heads.len() as f64;
            for &h in heads {
                next[h] += share;
            }
        }
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual < tol {
            let total: f64 = crate::stats::compensated_sum(pi.iter().copied());
            pi.iter_mut().for_each(|p| *p /= total);
            return Ok(StationaryDistribution {
                pi,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
        residual,
    })
}

/// `count` meeting samples in continuous mode with both starts drawn i.i.d.
/// from `pi`. Sample `i` uses the stream `(seed, i)`, so results do not depend
/// on the thread count.
pub fn meeting_from_stationarity(
    g: &Digraph,
    pi: &StationaryDistribution,
    count: usize,
    cap: f64,
    seed: u64,
) -> Result<Vec<MeetingSample>> {
    if pi.pi.len() != g.n() {
        return Err(Error::InvalidParameter("stationary vector has wrong length".into()));
    }
    let starts = WeightedIndex::new(&pi.pi)
        .map_err(|e| Error::InvalidParameter(format!("stationary weights: {e}")))?;
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, &[i as u64]);
            let x = starts.sample(&mut rng);
            let y = starts.sample(&mut rng);
            sample_meeting(g, x, y, Mode::Continuous, cap, &mut rng)
        })
        .collect())
}

/// Meeting times of uncensored samples; censored input is an error.
pub fn meeting_times(samples: &[MeetingSample]) -> Result<Vec<f64>> {
    let censored = samples.iter().filter(|s| s.censored()).count();
    if censored > 0 {
        return Err(Error::Censored(censored));
    }
    Ok(samples.iter().filter_map(|s| s.meet_time).collect())
}

/// `(1/N) sum_i |T_(i)/scale - Q((i - 0.5)/N)|` with `Q(p) = -ln(1 - p)`.
pub fn wasserstein_to_exp1(times: &[f64], scale: f64) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale = {scale} must be positive")));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let total = crate::stats::compensated_sum(sorted.iter().enumerate().map(|(i, &t)| {
        let p = (i as f64 + 0.5) / n;
        (t / scale + (1.0 - p).ln()).abs()
    }));
    Ok(total / n)
}

/// Same as [`wasserstein_to_exp1`] on meeting samples (censored → error).
pub fn wasserstein_samples_to_exp1(samples: &[MeetingSample], scale: f64) -> Result<f64> {
    wasserstein_to_exp1(&meeting_times(samples)?, scale)
}

pub fn write_meeting_csv(samples: &[MeetingSample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x0", "y0", "meet_time", "steps", "tau_bar", "chase_meet", "censored"])?;
    let opt = |v: Option<f64>| v.map(|t| t.to_string()).unwrap_or_default();
    for s in samples {
        w.write_record([
            s.x0.to_string(),
            s.y0.to_string(),
            opt(s.meet_time),
            s.steps.to_string(),
            opt(s.tau_bar),
            s.chase_meet.to_string(),
            s.censored().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coalescence {
    /// Time of the last merge; `None` if censored at the cap.
    pub tau_coal: Option<f64>,
    pub merge_times: Vec<f64>,
}

/// Coalescing random walks from the distinct vertices in `starts`: each active
/// walk jumps at rate 1 and walks landing on an occupied vertex merge.
pub fn coalescing_system<R: Rng + ?Sized>(
    g: &Digraph,
    starts: &[usize],
    cap: f64,
    rng: &mut R,
) -> Result<Coalescence> {
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no starting vertices".into()));
    }
    const EMPTY: usize = usize::MAX;
    let mut occupant = vec![EMPTY; g.n()];
    let mut positions = Vec::with_capacity(starts.len());
    for &v in starts {
        if v >= g.n() {
            return Err(Error::InvalidParameter(format!("start {v} out of range")));
        }
        if occupant[v] == EMPTY {
            occupant[v] = positions.len();
            positions.push(v);
        }
    }
    let mut merge_times = Vec::with_capacity(positions.len() - 1);
    let mut now = 0.0;
    while positions.len() > 1 {
        now += rng.sample::<f64, _>(Exp1) / positions.len() as f64;
        if now > cap {
            return Ok(Coalescence {
                tau_coal: None,
                merge_times,
            });
        }
        let i = rng.random_range(0..positions.len());
        let from = positions[i];
        let to = rw_step(g, from, rng);
        if to == from {
            continue;
        }
        occupant[from] = EMPTY;
        if occupant[to] != EMPTY {
            // merge: drop walk i by moving the last walk into its slot
            merge_times.push(now);
            let last = positions.len() - 1;
            positions.swap_remove(i);
            if i < last {
                occupant[positions[i]] = i;
            }
        } else {
            positions[i] = to;
            occupant[to] = i;
        }
    }
    Ok(Coalescence {
        tau_coal: Some(merge_times.last().copied().unwrap_or(0.0)),
        merge_times,
    })
}
