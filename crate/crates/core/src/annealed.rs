//! Local-tree machinery behind the short-time prediction.
//!
//! * `mu_plus` — the size-biased offspring law of the out-tree seen from a
//!   uniform in-stub.
//! * `simulate_chase` — two discrete asynchronous walks on a lazily grown
//!   marked Galton-Watson out-tree conditioned on the edge `x -> y`, started at
//!   `(x, y)`; X catches Y only by retracing Y's path.
//! * `chase_meet_probability` and `dyck_oracle` — the closed form of the chase
//!   law and an exhaustive check of its Catalan count.
//! * `annealed_pair_walk` — the same experiment on a finite configuration model
//!   whose edges are matched only when a walk first uses them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::degree::BiDegreeSequence;
use crate::error::{Error, Result};

/// Size-biased offspring law `mu+(k) = sum_x (d-_x / m) 1{d+_x = k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffspringLaw {
    pub support: Vec<(usize, f64)>,
    pub mean: f64,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl OffspringLaw {
    pub fn new(support: Vec<(usize, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidParameter("empty offspring law".into()));
        }
        let mut keys: Vec<usize> = support.iter().map(|&(k, _)| k).collect();
        keys.sort_unstable();
        keys.dedup();
        if keys.len() != support.len() {
            return Err(Error::InvalidParameter("duplicate offspring values".into()));
        }
        if support.iter().any(|&(k, p)| k == 0 || !(p >= 0.0)) {
            return Err(Error::InvalidParameter(
                "offspring values must be >= 1 with non-negative mass".into(),
            ));
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("offspring law sums to {total}")));
        }
        let mean = support.iter().map(|&(k, p)| k as f64 * p).sum();
        let cumulative = support
            .iter()
            .scan(0.0, |acc, &(_, p)| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            support,
            mean,
            cumulative,
        })
    }

    pub fn point_mass(k: usize) -> Result<Self> {
        Self::new(vec![(k, 1.0)])
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.support
            .iter()
            .find(|&&(j, _)| j == k)
            .map_or(0.0, |&(_, p)| p)
    }

    /// `sum_k mu(k) / k`, which equals rho for the law of a degree sequence.
    pub fn inverse_mean(&self) -> f64 {
        self.support.iter().map(|&(k, p)| p / k as f64).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.support[i.min(self.support.len() - 1)].0
    }
}

pub fn mu_plus(seq: &BiDegreeSequence) -> Result<OffspringLaw> {
    let m = seq.m();
    if m == 0 {
        return Err(Error::InvalidParameter("sequence has no edges".into()));
    }
    let mut mass: BTreeMap<usize, usize> = BTreeMap::new();
    for (&din, &dout) in seq.in_deg().iter().zip(seq.out_deg()) {
        if din > 0 {
            if dout == 0 {
                return Err(Error::Domain(
                    "a vertex with in-stubs has out-degree 0".into(),
                ));
            }
            *mass.entry(dout).or_default() += din;
        }
    }
    OffspringLaw::new(
        mass.into_iter()
            .map(|(k, w)| (k, w as f64 / m as f64))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChaseOutcome {
    /// Discrete asynchronous step of the first co-location.
    pub meet_step: Option<u64>,
    /// True when X never left Y's trail before the meeting or the cap.
    pub stayed_on_trail: bool,
    /// Number of out-degrees drawn from the offspring law (or of fresh edges
    /// matched, for the finite-n walk).
    pub marks_used: usize,
    /// Step at which X left Y's trail, if it did.
    pub deviation_step: Option<u64>,
}

impl ChaseOutcome {
    /// The event counted by the chase law: meeting at `step`, on the trail.
    pub fn chase_meet_at(&self, step: u64) -> bool {
        self.stayed_on_trail && self.meet_step == Some(step)
    }
}

#[derive(Debug, Clone)]
struct TreeNode {
    out_degree: Option<usize>,
    children: Vec<usize>,
    on_y_path: bool,
}

/// Lazily grown out-tree: nodes are created when their parent is first
/// expanded and receive an out-degree the first time a walk leaves them.
struct LazyTree<'a> {
    nodes: Vec<TreeNode>,
    law: &'a OffspringLaw,
    marks_used: usize,
}

impl<'a> LazyTree<'a> {
    const ROOT: usize = 0;
    const Y: usize = 1;

    fn new(dx: usize, dy: usize, law: &'a OffspringLaw) -> Self {
        let node = |d: Option<usize>, on_y_path| TreeNode {
            out_degree: d,
            children: Vec::new(),
            on_y_path,
        };
        Self {
            nodes: vec![node(Some(dx), false), node(Some(dy), true)],
            law,
            marks_used: 0,
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, v: usize, rng: &mut R) -> usize {
        if self.nodes[v].children.is_empty() {
            let d = match self.nodes[v].out_degree {
                Some(d) => d,
                None => {
                    self.marks_used += 1;
                    let d = self.law.sample(rng);
                    self.nodes[v].out_degree = Some(d);
                    d
                }
            };
            let mut children = Vec::with_capacity(d);
            if v == Self::ROOT {
                // the conditioning edge x -> y is one of the root's children
                children.push(Self::Y);
            }
            while children.len() < d {
                children.push(self.nodes.len());
                self.nodes.push(TreeNode {
                    out_degree: None,
                    children: Vec::new(),
                    on_y_path: false,
                });
            }
            self.nodes[v].children = children;
        }
        let c = &self.nodes[v].children;
        c[rng.random_range(0..c.len())]
    }
}

/// Two discrete asynchronous walks on the conditioned out-tree, X at the root
/// and Y at its distinguished child. The run stops at the meeting, at X's
/// departure from Y's path (after which the walks sit in disjoint subtrees and
/// can never meet), or after `t_max_steps` steps.
pub fn simulate_chase<R: Rng + ?Sized>(
    dx: usize,
    dy: usize,
    law: &OffspringLaw,
    t_max_steps: u64,
    rng: &mut R,
) -> Result<ChaseOutcome> {
    chase_with_movers(dx, dy, law, t_max_steps, rng, |r| r.random::<bool>())
}

/// [`simulate_chase`] with the mover coin supplied by `x_moves`.
fn chase_with_movers<R: Rng + ?Sized>(
    dx: usize,
    dy: usize,
    law: &OffspringLaw,
    t_max_steps: u64,
    rng: &mut R,
    mut x_moves: impl FnMut(&mut R) -> bool,
) -> Result<ChaseOutcome> {
    if dx == 0 || dy == 0 {
        return Err(Error::InvalidParameter("dx and dy must be >= 1".into()));
    }
    let mut tree = LazyTree::new(dx, dy, law);
    let (mut px, mut py) = (LazyTree::ROOT, LazyTree::Y);
    for step in 1..=t_max_steps {
        if x_moves(rng) {
            px = tree.step(px, rng);
            if !tree.nodes[px].on_y_path {
                return Ok(ChaseOutcome {
                    meet_step: None,
                    stayed_on_trail: false,
                    marks_used: tree.marks_used,
                    deviation_step: Some(step),
                });
            }
        } else {
            py = tree.step(py, rng);
            tree.nodes[py].on_y_path = true;
        }
        if px == py {
            debug_assert!(step % 2 == 1, "tree meetings happen at odd steps");
            return Ok(ChaseOutcome {
                meet_step: Some(step),
                stayed_on_trail: true,
                marks_used: tree.marks_used,
                deviation_step: None,
            });
        }
    }
    Ok(ChaseOutcome {
        meet_step: None,
        stayed_on_trail: true,
        marks_used: tree.marks_used,
        deviation_step: None,
    })
}

/// Probability of an on-trail meeting at an even step: the X-Y distance
/// changes parity at every step, so it is exactly zero on the tree.
pub const EVEN_STEP_CHASE_PROBABILITY: f64 = 0.0;

/// Probability that the chase meets, on the trail, at step `2s + 1`:
/// `1/(2 dx)` for `s = 0`, else `2^{-2s-1} C_s / (dx dy) * rho^{s-1}`.
pub fn chase_meet_probability(s: u32, dx: usize, dy: usize, rho: f64) -> Result<f64> {
    if dx == 0 || dy == 0 {
        return Err(Error::Domain("dx and dy must be >= 1".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho = {rho} outside (0, 1)")));
    }
    if s == 0 {
        return Ok(0.5 / dx as f64);
    }
    // p_1 = 1/(8 dx dy); p_{j+1}/p_j = rho (2j+1) / (2(j+2)) keeps every
    // intermediate value in range for any s
    let mut p = 0.125 / (dx * dy) as f64;
    for j in 1..s {
        p *= rho * (2 * j + 1) as f64 / (2 * (j + 2)) as f64;
    }
    Ok(p)
}

/// Largest `s` accepted by [`dyck_oracle`] (2^25 sequences).
pub const DYCK_ORACLE_MAX_S: u32 = 12;

/// Counts mover sequences of length `2s + 1` (X moves: distance -1, Y moves:
/// distance +1) that keep the distance, starting at 1, positive through step
/// `2s` and reach 0 at step `2s + 1`. Exhaustive over all `2^{2s+1}`
/// sequences.
pub fn dyck_oracle(s: u32) -> Result<u64> {
    if s > DYCK_ORACLE_MAX_S {
        return Err(Error::InvalidParameter(format!(
            "dyck_oracle supports s <= {DYCK_ORACLE_MAX_S}, got {s}"
        )));
    }
    let len = 2 * s + 1;
    let count = (0u64..1 << len)
        .filter(|&moves| {
            let mut dist: i64 = 1;
            for i in 0..len {
                dist += if moves >> i & 1 == 1 { -1 } else { 1 };
                if dist == 0 {
                    return i == len - 1;
                }
            }
            false
        })
        .count();
    Ok(count as u64)
}

/// Shared, immutable stub layout for annealed walks on one degree sequence.
#[derive(Debug, Clone)]
pub struct AnnealedSampler {
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
    head_owner: Vec<usize>,
    head_offset: Vec<usize>,
}

impl AnnealedSampler {
    pub fn new(seq: &BiDegreeSequence) -> Self {
        let head_owner = crate::dcm::stub_owners(seq.in_deg());
        let mut head_offset = Vec::with_capacity(seq.n() + 1);
        head_offset.push(0);
        for &d in seq.in_deg() {
            head_offset.push(head_offset.last().unwrap() + d);
        }
        Self {
            out_deg: seq.out_deg().to_vec(),
            in_deg: seq.in_deg().to_vec(),
            head_owner,
            head_offset,
        }
    }

    pub fn m(&self) -> usize {
        self.head_owner.len()
    }
}

/// A partial matching grown on demand. Only touched stubs are stored, so a
/// walk of `k` steps costs `O(k)` memory whatever the graph size.
#[derive(Debug, Clone)]
pub struct AnnealedEnvironment<'a> {
    sampler: &'a AnnealedSampler,
    tails: HashMap<(usize, usize), usize>,
    matched_heads: HashSet<usize>,
}

impl<'a> AnnealedEnvironment<'a> {
    /// Environment conditioned on the edge `x -> y` (tail slot 0 of `x`
    /// matched to the first head stub of `y`; stubs are exchangeable).
    pub fn conditioned_on_edge(sampler: &'a AnnealedSampler, x: usize, y: usize) -> Result<Self> {
        let n = sampler.out_deg.len();
        if x >= n || y >= n {
            return Err(Error::InvalidParameter("vertex out of range".into()));
        }
        if sampler.out_deg[x] == 0 || sampler.in_deg[y] == 0 {
            return Err(Error::Domain(format!("no stub available for the edge {x} -> {y}")));
        }
        let mut env = Self {
            sampler,
            tails: HashMap::new(),
            matched_heads: HashSet::new(),
        };
        env.tails.insert((x, 0), y);
        env.matched_heads.insert(sampler.head_offset[y]);
        Ok(env)
    }

    pub fn matched_edges(&self) -> usize {
        self.tails.len()
    }

    /// Moves a walk from `v` along a uniform out-slot, matching the slot to a
    /// uniform unmatched head stub if it is still free.
    pub fn step<R: Rng + ?Sized>(&mut self, v: usize, rng: &mut R) -> Result<usize> {
        let d = self.sampler.out_deg[v];
        if d == 0 {
            return Err(Error::Domain(format!("vertex {v} has no out-stubs")));
        }
        let slot = rng.random_range(0..d);
        if let Some(&h) = self.tails.get(&(v, slot)) {
            return Ok(h);
        }
        let m = self.sampler.m();
        if self.matched_heads.len() >= m {
            return Err(Error::Generation("all head stubs are matched".into()));
        }
        // rejection against the static stub array is exact for a uniform
        // unmatched stub and cheap while few stubs are matched
        let stub = loop {
            let s = rng.random_range(0..m);
            if !self.matched_heads.contains(&s) {
                break s;
            }
        };
        self.matched_heads.insert(stub);
        let h = self.sampler.head_owner[stub];
        self.tails.insert((v, slot), h);
        Ok(h)
    }
}

/// The chase experiment on a finite configuration model whose environment is
/// revealed along the walks, conditioned on the edge `x -> y`.
pub fn annealed_pair_walk<R: Rng + ?Sized>(
    sampler: &AnnealedSampler,
    x: usize,
    y: usize,
    t_max_steps: u64,
    rng: &mut R,
) -> Result<ChaseOutcome> {
    if x == y {
        return Err(Error::InvalidParameter("annealed pair walk needs x != y".into()));
    }
    let mut env = AnnealedEnvironment::conditioned_on_edge(sampler, x, y)?;
    let mut trail: HashSet<usize> = HashSet::from([x, y]);
    let (mut px, mut py) = (x, y);
    let outcome = |env: &AnnealedEnvironment, meet_step, stayed_on_trail, deviation_step| ChaseOutcome {
        meet_step,
        stayed_on_trail,
        marks_used: env.matched_edges() - 1,
        deviation_step,
    };
    for step in 1..=t_max_steps {
        if rng.random::<bool>() {
            px = env.step(px, rng)?;
            if !trail.contains(&px) {
                return Ok(outcome(&env, None, false, Some(step)));
            }
        } else {
            py = env.step(py, rng)?;
            trail.insert(py);
        }
        if px == py {
            return Ok(outcome(&env, Some(step), true, None));
        }
    }
    Ok(outcome(&env, None, true, None))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaseRow {
    pub s: u32,
    pub empirical: f64,
    pub formula: f64,
    pub stderr: f64,
    pub n_runs: usize,
}

/// Empirical on-trail meeting frequency at step `2s + 1` for `s <= s_max`
/// next to the closed form.
pub fn chase_table(
    outcomes: &[ChaseOutcome],
    s_max: u32,
    dx: usize,
    dy: usize,
    rho: f64,
) -> Result<Vec<ChaseRow>> {
    let n = outcomes.len();
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    (0..=s_max)
        .map(|s| {
            let hits = outcomes
                .iter()
                .filter(|o| o.chase_meet_at(2 * s as u64 + 1))
                .count();
            let p = hits as f64 / n as f64;
            Ok(ChaseRow {
                s,
                empirical: p,
                formula: chase_meet_probability(s, dx, dy, rho)?,
                stderr: (p * (1.0 - p) / n as f64).sqrt(),
                n_runs: n,
            })
        })
        .collect()
}

pub fn write_chase_csv(rows: &[ChaseRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["s", "empirical", "formula", "stderr", "n_runs"])?;
    for r in rows {
        w.write_record([
            r.s.to_string(),
            r.empirical.to_string(),
            r.formula.to_string(),
            r.stderr.to_string(),
            r.n_runs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{gen_regular, gen_uniform_range, stats};
    use crate::seed::{rng_from_seed, task_rng};
    use crate::stats::summarize;
    use crate::theory::catalan;

    fn toy() -> BiDegreeSequence {
        BiDegreeSequence::new(vec![2, 2, 3, 3], vec![2, 3, 2, 3]).unwrap()
    }

    #[test]
    fn mu_plus_examples() {
        let law = mu_plus(&gen_regular(20, 3).unwrap()).unwrap();
        assert_eq!(law.support, vec![(3, 1.0)]);
        assert_eq!(law.mean, 3.0);

        let law = mu_plus(&toy()).unwrap();
        assert!((law.prob(2) - 0.5).abs() < 1e-15);
        assert!((law.prob(3) - 0.5).abs() < 1e-15);
        assert!((law.inverse_mean() - 5.0 / 12.0).abs() < 1e-15);
        assert!((law.inverse_mean() - stats(&toy()).unwrap().rho).abs() < 1e-15);
    }

    #[test]
    fn mu_plus_reproduces_rho_and_mean() {
        for seed in 0..10 {
            let seq = gen_uniform_range(200, 2, 7, seed).unwrap();
            let law = mu_plus(&seq).unwrap();
            let p = stats(&seq).unwrap();
            assert!((law.inverse_mean() - p.rho).abs() < 1e-12);
            let mean: f64 = seq
                .in_deg()
                .iter()
                .zip(seq.out_deg())
                .map(|(&a, &b)| (a * b) as f64)
                .sum::<f64>()
                / seq.m() as f64;
            assert!((law.mean - mean).abs() < 1e-12);
            assert!((law.support.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn offspring_law_validation() {
        assert!(OffspringLaw::new(vec![]).is_err());
        assert!(OffspringLaw::new(vec![(2, 0.5), (2, 0.5)]).is_err());
        assert!(OffspringLaw::new(vec![(2, 0.5), (3, 0.4)]).is_err());
        assert!(OffspringLaw::new(vec![(0, 1.0)]).is_err());
    }

    #[test]
    fn offspring_sampling_frequencies() {
        let law = OffspringLaw::new(vec![(2, 0.2), (3, 0.5), (7, 0.3)]).unwrap();
        let mut rng = rng_from_seed(3);
        let n = 100_000;
        let mut counts = BTreeMap::new();
        for _ in 0..n {
            *counts.entry(law.sample(&mut rng)).or_insert(0usize) += 1;
        }
        for &(k, p) in &law.support {
            let emp = counts[&k] as f64 / n as f64;
            assert!((emp - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
        }
    }

    #[test]
    fn mark_expectation_identity() {
        // E[prod_{j=2..s} 1/D_j] = rho^{s-1} for i.i.d. D_j ~ mu+
        let seq = gen_uniform_range(500, 2, 6, 4).unwrap();
        let law = mu_plus(&seq).unwrap();
        let rho = stats(&seq).unwrap().rho;
        let mut rng = rng_from_seed(9);
        for s in 2..=4 {
            let samples: Vec<f64> = (0..200_000)
                .map(|_| (2..=s).map(|_| 1.0 / law.sample(&mut rng) as f64).product())
                .collect();
            let st = summarize(&samples).unwrap();
            assert!(st.within_sigmas(rho.powi(s - 1), 3.0), "s={s}: {st:?}");
        }
    }

    #[test]
    fn chase_formula_examples() {
        assert!((chase_meet_probability(0, 3, 3, 1.0 / 3.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((chase_meet_probability(1, 3, 3, 1.0 / 3.0).unwrap() - 1.0 / 72.0).abs() < 1e-15);
        assert!((chase_meet_probability(2, 3, 3, 1.0 / 3.0).unwrap() - 1.0 / 432.0).abs() < 1e-15);
        assert!(chase_meet_probability(1, 0, 3, 0.3).is_err());
        assert!(chase_meet_probability(1, 3, 3, 1.0).is_err());
        for s in 0..30 {
            let direct = catalan(s).unwrap() as f64 * 0.5f64.powi(2 * s as i32 + 1) / 6.0
                * 0.4f64.powi(s as i32 - 1);
            let v = chase_meet_probability(s, 2, 3, 0.4).unwrap();
            if s > 0 {
                assert!((v - direct).abs() <= 1e-13 * direct, "s={s}");
            }
        }
        let total: f64 = (0..2000)
            .map(|s| chase_meet_probability(s, 2, 2, 0.5).unwrap())
            .sum();
        assert!(total < 1.0);
        assert_eq!(EVEN_STEP_CHASE_PROBABILITY, 0.0);
    }

    #[test]
    fn dyck_oracle_counts_catalan() {
        assert_eq!(dyck_oracle(0).unwrap(), 1);
        assert_eq!(dyck_oracle(1).unwrap(), 1);
        assert_eq!(dyck_oracle(2).unwrap(), 2);
        assert_eq!(dyck_oracle(3).unwrap(), 5);
        assert_eq!(dyck_oracle(5).unwrap(), 42);
        for s in 0..=8 {
            assert_eq!(dyck_oracle(s).unwrap() as u128, catalan(s).unwrap());
        }
        assert!(dyck_oracle(DYCK_ORACLE_MAX_S + 1).is_err());
    }

    #[test]
    fn chase_without_x_moves_never_meets() {
        let law = OffspringLaw::point_mass(3).unwrap();
        let o = chase_with_movers(3, 3, &law, 50, &mut rng_from_seed(2), |_| false).unwrap();
        assert_eq!(o.meet_step, None);
        assert!(o.stayed_on_trail);
        assert_eq!(o.deviation_step, None);
        // Y descended 50 levels, drawing a mark for every level below y
        assert_eq!(o.marks_used, 49);
    }

    #[test]
    fn chase_when_x_always_moves_follows_formula_path() {
        // X moves first: meets iff it picks y among the root's children
        let law = OffspringLaw::point_mass(3).unwrap();
        let hits = (0..30_000u64)
            .filter(|&r| {
                let o = chase_with_movers(3, 3, &law, 5, &mut task_rng(3, &[r]), |_| true).unwrap();
                o.meet_step == Some(1)
            })
            .count() as f64;
        let p = 1.0 / 3.0;
        assert!((hits / 30_000.0 - p).abs() < 3.0 * (p * (1.0 - p) / 30_000.0).sqrt());
    }

    #[test]
    fn chase_meetings_have_odd_parity() {
        let law = mu_plus(&gen_uniform_range(100, 2, 5, 1).unwrap()).unwrap();
        for r in 0..50_000u64 {
            let o = simulate_chase(3, 2, &law, 200, &mut task_rng(4, &[r])).unwrap();
            if let Some(s) = o.meet_step {
                assert_eq!(s % 2, 1);
                assert!(o.stayed_on_trail);
            }
        }
    }

    #[test]
    fn chase_frequencies_regular() {
        let law = OffspringLaw::point_mass(3).unwrap();
        let runs = 200_000u64;
        let outcomes: Vec<ChaseOutcome> = (0..runs)
            .map(|r| simulate_chase(3, 3, &law, 1000, &mut task_rng(5, &[r])).unwrap())
            .collect();
        for row in chase_table(&outcomes, 2, 3, 3, 1.0 / 3.0).unwrap() {
            let se = (row.formula * (1.0 - row.formula) / runs as f64).sqrt();
            assert!((row.empirical - row.formula).abs() < 3.0 * se, "{row:?}");
        }
    }

    #[test]
    fn annealed_first_step_follows_urn() {
        // from x = 1 (out-degree 3): slot 0 is the conditioning edge to y = 2;
        // the other slots pick a head stub uniformly among the m - 1 free ones
        let seq = BiDegreeSequence::new(vec![1, 2, 3, 4], vec![3, 3, 2, 2]).unwrap();
        let sampler = AnnealedSampler::new(&seq);
        let (x, y) = (1, 2);
        let m = seq.m() as f64;
        let exact: Vec<f64> = (0..4)
            .map(|z| {
                let free = seq.in_degree(z) as f64 - if z == y { 1.0 } else { 0.0 };
                let direct = if z == y { 1.0 / 3.0 } else { 0.0 };
                direct + (2.0 / 3.0) * free / (m - 1.0)
            })
            .collect();
        assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let draws = 100_000u64;
        let mut counts = [0usize; 4];
        for r in 0..draws {
            let mut rng = task_rng(6, &[r]);
            let mut env = AnnealedEnvironment::conditioned_on_edge(&sampler, x, y).unwrap();
            counts[env.step(x, &mut rng).unwrap()] += 1;
        }
        let chi2: f64 = (0..4)
            .map(|z| {
                let e = exact[z] * draws as f64;
                (counts[z] as f64 - e).powi(2) / e
            })
            .sum();
        // 3 degrees of freedom, alpha = 0.001
        assert!(chi2 < 16.27, "chi2 {chi2}, counts {counts:?}");
    }

    #[test]
    fn annealed_environment_is_consistent() {
        let seq = BiDegreeSequence::new(vec![1, 1], vec![1, 1]).unwrap();
        let sampler = AnnealedSampler::new(&seq);
        let mut env = AnnealedEnvironment::conditioned_on_edge(&sampler, 0, 1).unwrap();
        let mut rng = rng_from_seed(0);
        // the only free head belongs to 0
        assert_eq!(env.step(1, &mut rng).unwrap(), 0);
        assert_eq!(env.step(1, &mut rng).unwrap(), 0);
        assert_eq!(env.step(0, &mut rng).unwrap(), 1);
        assert_eq!(env.matched_edges(), 2);
        assert!(annealed_pair_walk(&sampler, 0, 0, 5, &mut rng).is_err());
    }

    #[test]
    fn annealed_matches_tree_at_large_n() {
        let seq = gen_regular(100_000, 3).unwrap();
        let sampler = AnnealedSampler::new(&seq);
        let law = mu_plus(&seq).unwrap();
        let runs = 100_000u64;
        let annealed: Vec<ChaseOutcome> = (0..runs)
            .map(|r| {
                let mut rng = task_rng(7, &[r]);
                let x = rng.random_range(0..seq.n());
                let y = (x + 1 + rng.random_range(0..seq.n() - 1)) % seq.n();
                annealed_pair_walk(&sampler, x, y, 100, &mut rng).unwrap()
            })
            .collect();
        let tree: Vec<ChaseOutcome> = (0..runs)
            .map(|r| simulate_chase(3, 3, &law, 100, &mut task_rng(8, &[r])).unwrap())
            .collect();
        for step in 1..=9u64 {
            let pa = annealed.iter().filter(|o| o.chase_meet_at(step)).count() as f64 / runs as f64;
            let pt = tree.iter().filter(|o| o.chase_meet_at(step)).count() as f64 / runs as f64;
            let se = ((pa * (1.0 - pa) + pt * (1.0 - pt)) / runs as f64).sqrt();
            assert!((pa - pt).abs() <= 3.0 * se + 1e-12, "step {step}: {pa} vs {pt}");
        }
    }

    #[test]
    fn chase_csv_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chase.csv");
        let law = OffspringLaw::point_mass(2).unwrap();
        let outcomes: Vec<ChaseOutcome> = (0..100u64)
            .map(|r| simulate_chase(2, 2, &law, 50, &mut task_rng(1, &[r])).unwrap())
            .collect();
        write_chase_csv(&chase_table(&outcomes, 3, 2, 2, 0.5).unwrap(), &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with("s,empirical,formula,stderr,n_runs\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
