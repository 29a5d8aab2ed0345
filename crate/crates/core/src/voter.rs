//! Exact event-driven voter dynamics with incremental discordant-edge counts.
//!
//! Every vertex with at least one out-edge rings at total rate 1 (each of its
//! `d+` out-slots at rate `1/d+`). The superposition is simulated as
//! exponential holding times of rate `#active vertices`, a uniform active
//! vertex and a uniform out-slot; the vertex copies the opinion at the slot's
//! head. Self-loop events consume time but change nothing.

use std::path::Path;

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::dcm::Digraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpinionState {
    opinions: Vec<bool>,
    discordant: usize,
    ones: usize,
}

impl OpinionState {
    /// Wraps explicit opinions and counts discordant edges by full scan.
    pub fn from_opinions(g: &Digraph, opinions: Vec<bool>) -> Result<Self> {
        if opinions.len() != g.n() {
            return Err(Error::InvalidParameter(format!(
                "{} opinions for {} vertices",
                opinions.len(),
                g.n()
            )));
        }
        let discordant = count_discordant(g, &opinions);
        let ones = opinions.iter().filter(|&&o| o).count();
        Ok(Self {
            opinions,
            discordant,
            ones,
        })
    }

    /// I.i.d. Bernoulli(u) opinions.
    pub fn init_bernoulli<R: Rng + ?Sized>(g: &Digraph, u: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!("u = {u} outside [0, 1]")));
        }
        let opinions = (0..g.n()).map(|_| rng.random::<f64>() < u).collect();
        Self::from_opinions(g, opinions)
    }

    pub fn opinions(&self) -> &[bool] {
        &self.opinions
    }

    pub fn discordant_count(&self) -> usize {
        self.discordant
    }

    pub fn ones_count(&self) -> usize {
        self.ones
    }

    pub fn is_consensus(&self) -> bool {
        self.ones == 0 || self.ones == self.opinions.len()
    }

    /// Sets `opinions[x] = value`, updating the counters from x's incident
    /// slots only.
    fn set(&mut self, g: &Digraph, x: usize, value: bool) {
        if self.opinions[x] == value {
            return;
        }
        let mut before = 0usize;
        let mut incident = 0usize;
        for &h in g.out_neighbors(x).iter().chain(g.in_neighbors(x)) {
            if h != x {
                incident += 1;
                before += usize::from(self.opinions[h] != self.opinions[x]);
            }
        }
        self.opinions[x] = value;
        self.discordant = self.discordant - before + (incident - before);
        if value {
            self.ones += 1;
        } else {
            self.ones -= 1;
        }
    }
}

/// Brute-force number of edges (with multiplicity) whose endpoints disagree.
/// Self-loops never count.
pub fn count_discordant(g: &Digraph, opinions: &[bool]) -> usize {
    g.edges()
        .iter()
        .filter(|&&(x, y)| opinions[x] != opinions[y])
        .count()
}

/// Brute-force discordant density `count / m`.
pub fn discordant_density(g: &Digraph, state: &OpinionState) -> f64 {
    if g.m() == 0 {
        return 0.0;
    }
    count_discordant(g, state.opinions()) as f64 / g.m() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub obs_times: Vec<f64>,
    pub densities: Vec<f64>,
    pub consensus_time: Option<f64>,
    /// `Some(true)` for all-1 absorption, `Some(false)` for all-0.
    pub absorbed_state: Option<bool>,
}

impl Trajectory {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "density"])?;
        for (t, d) in self.obs_times.iter().zip(&self.densities) {
            w.write_record([t.to_string(), d.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Run metadata exported next to a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub u: f64,
    pub consensus_time: Option<f64>,
}

/// The event source shared by `run` and `consensus_time`.
struct Dynamics<'a> {
    g: &'a Digraph,
    active: Vec<usize>,
}

impl<'a> Dynamics<'a> {
    fn new(g: &'a Digraph) -> Self {
        let active = (0..g.n()).filter(|&x| g.out_degree(x) > 0).collect();
        Self { g, active }
    }

    /// Draws the next holding time; `None` when no vertex can ever update.
    fn holding_time<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        if self.active.is_empty() {
            return None;
        }
        let e: f64 = rng.sample(Exp1);
        Some(e / self.active.len() as f64)
    }

    fn apply_event<R: Rng + ?Sized>(&self, state: &mut OpinionState, rng: &mut R) {
        let x = self.active[rng.random_range(0..self.active.len())];
        let heads = self.g.out_neighbors(x);
        let h = heads[rng.random_range(0..heads.len())];
        let value = state.opinions[h];
        state.set(self.g, x, value);
    }
}

/// Advances `state` from time 0 to `t_max`, recording the discordant density
/// at each observation time (value after the last event at or before it).
///
/// `observer` is called at every observation with the index and the current
/// state; it lets tests compare the incremental counter against a recount.
pub fn run_observed<R, F>(
    g: &Digraph,
    state: &mut OpinionState,
    t_max: f64,
    obs_times: &[f64],
    rng: &mut R,
    mut observer: F,
) -> Result<Trajectory>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &OpinionState),
{
    if !(t_max >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_max = {t_max} must be >= 0")));
    }
    if obs_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("observation times must be sorted".into()));
    }
    if obs_times.iter().any(|&t| !(0.0..=t_max).contains(&t)) {
        return Err(Error::InvalidParameter(format!(
            "observation times must lie in [0, {t_max}]"
        )));
    }
    let m = g.m().max(1) as f64;
    let dynamics = Dynamics::new(g);
    let mut densities = Vec::with_capacity(obs_times.len());
    let mut consensus_time = if state.is_consensus() { Some(0.0) } else { None };
    let mut next_event = if consensus_time.is_some() {
        f64::INFINITY
    } else {
        dynamics.holding_time(rng).unwrap_or(f64::INFINITY)
    };
    for (i, &t_obs) in obs_times.iter().enumerate() {
        while next_event <= t_obs {
            let now = next_event;
            dynamics.apply_event(state, rng);
            if state.is_consensus() {
                consensus_time = Some(now);
                next_event = f64::INFINITY;
            } else {
                next_event = now + dynamics.holding_time(rng).unwrap_or(f64::INFINITY);
            }
        }
        observer(i, state);
        densities.push(state.discordant as f64 / m);
    }
    // finish the interval up to t_max so a consensus inside it is reported
    while next_event <= t_max {
        let now = next_event;
        dynamics.apply_event(state, rng);
        if state.is_consensus() {
            consensus_time = Some(now);
            break;
        }
        next_event = now + dynamics.holding_time(rng).unwrap_or(f64::INFINITY);
    }
    let absorbed_state = consensus_time.map(|_| state.ones > 0);
    Ok(Trajectory {
        obs_times: obs_times.to_vec(),
        densities,
        consensus_time,
        absorbed_state,
    })
}

pub fn run<R: Rng + ?Sized>(
    g: &Digraph,
    state: &mut OpinionState,
    t_max: f64,
    obs_times: &[f64],
    rng: &mut R,
) -> Result<Trajectory> {
    run_observed(g, state, t_max, obs_times, rng, |_, _| {})
}

/// Runs until absorption or until `cap`; returns the absorption time.
pub fn consensus_time<R: Rng + ?Sized>(
    g: &Digraph,
    state: &mut OpinionState,
    cap: f64,
    rng: &mut R,
) -> Result<Option<f64>> {
    if !(cap > 0.0) {
        return Err(Error::InvalidParameter(format!("cap = {cap} must be positive")));
    }
    Ok(run(g, state, cap, &[], rng)?.consensus_time)
}
