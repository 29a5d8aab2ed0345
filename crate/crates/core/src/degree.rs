//! Bi-degree sequences: construction, validation, generators and the scalar
//! functionals that parameterise every prediction.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, LabRng};
use crate::stats::CompensatedSum;

/// In/out degrees of `n` labelled vertices with equal totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiDegreeSequence {
    in_deg: Vec<usize>,
    out_deg: Vec<usize>,
    m: usize,
}

/// Outcome of [`validate`]: one entry per check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub in_sum: usize,
    pub out_sum: usize,
    pub sums_match: bool,
    /// `None` when the minimum-degree check was not requested.
    pub min_degree_ok: Option<bool>,
    pub in_min: usize,
    pub out_min: usize,
    pub in_max: usize,
    pub out_max: usize,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.sums_match && self.min_degree_ok.unwrap_or(true)
    }

    /// Convert the first failed check into an error.
    pub fn check(&self) -> Result<()> {
        if !self.sums_match {
            return Err(Error::SumMismatch {
                in_sum: self.in_sum,
                out_sum: self.out_sum,
            });
        }
        if self.min_degree_ok == Some(false) {
            return Err(Error::Assumption(format!(
                "minimum degrees in={} out={} must both be >= 2",
                self.in_min, self.out_min
            )));
        }
        Ok(())
    }
}

/// Check the matching constraint and, optionally, the minimum-degree bound.
///
/// Mismatched or empty arrays are a structural error; everything else is
/// reported in the returned [`ValidationReport`].
pub fn validate(
    in_deg: &[usize],
    out_deg: &[usize],
    require_assumption1: bool,
) -> Result<ValidationReport> {
    if in_deg.is_empty() || out_deg.is_empty() {
        return Err(Error::Structural("degree arrays must be non-empty".into()));
    }
    if in_deg.len() != out_deg.len() {
        return Err(Error::Structural(format!(
            "in-degree array has length {} but out-degree array has length {}",
            in_deg.len(),
            out_deg.len()
        )));
    }
    let in_sum: usize = in_deg.iter().sum();
    let out_sum: usize = out_deg.iter().sum();
    let in_min = *in_deg.iter().min().unwrap();
    let out_min = *out_deg.iter().min().unwrap();
    Ok(ValidationReport {
        n: in_deg.len(),
        in_sum,
        out_sum,
        sums_match: in_sum == out_sum,
        min_degree_ok: require_assumption1.then_some(in_min >= 2 && out_min >= 2),
        in_min,
        out_min,
        in_max: *in_deg.iter().max().unwrap(),
        out_max: *out_deg.iter().max().unwrap(),
    })
}

impl BiDegreeSequence {
    pub fn new(in_deg: Vec<usize>, out_deg: Vec<usize>) -> Result<Self> {
        let report = validate(&in_deg, &out_deg, false)?;
        report.check()?;
        Ok(Self {
            m: report.in_sum,
            in_deg,
            out_deg,
        })
    }

    pub fn n(&self) -> usize {
        self.in_deg.len()
    }

    /// Total number of stubs of each kind, i.e. the number of edges.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn in_deg(&self) -> &[usize] {
        &self.in_deg
    }

    pub fn out_deg(&self) -> &[usize] {
        &self.out_deg
    }

    pub fn in_degree(&self, x: usize) -> usize {
        self.in_deg[x]
    }

    pub fn out_degree(&self, x: usize) -> usize {
        self.out_deg[x]
    }

    pub fn validate(&self, require_assumption1: bool) -> ValidationReport {
        validate(&self.in_deg, &self.out_deg, require_assumption1)
            .expect("constructed sequences are structurally valid")
    }

    pub fn satisfies_assumption1(&self) -> bool {
        self.validate(true).passes()
    }

    pub fn max_out_degree(&self) -> usize {
        self.out_deg.iter().copied().max().unwrap_or(0)
    }

    pub fn max_in_degree(&self) -> usize {
        self.in_deg.iter().copied().max().unwrap_or(0)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
        for x in 0..self.n() {
            wtr.serialize(DegreeRow {
                vertex: x,
                in_deg: self.in_deg[x],
                out_deg: self.out_deg[x],
            })?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Read a `vertex,in_deg,out_deg` CSV. Vertices must be `0..n` in order.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(BufReader::new(file));
        let mut in_deg = Vec::new();
        let mut out_deg = Vec::new();
        for (i, row) in rdr.deserialize::<DegreeRow>().enumerate() {
            let row = row?;
            if row.vertex != i {
                return Err(Error::Structural(format!(
                    "row {} has vertex id {} (expected {})",
                    i + 1,
                    row.vertex,
                    i
                )));
            }
            in_deg.push(row.in_deg);
            out_deg.push(row.out_deg);
        }
        Self::new(in_deg, out_deg)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DegreeRow {
    vertex: usize,
    in_deg: usize,
    out_deg: usize,
}

/// `n` vertices, every in- and out-degree equal to `d >= 2`.
pub fn gen_regular(n: usize, d: usize) -> Result<BiDegreeSequence> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if d < 2 {
        return Err(Error::Assumption(format!("regular degree {d} < 2")));
    }
    BiDegreeSequence::new(vec![d; n], vec![d; n])
}

/// Raise or lower entries of `deg` by one until the sum equals `target`,
/// keeping every entry inside `[lo, hi]`.
///
/// Only entries strictly below `hi` are incremented and only entries strictly
/// above `lo` are decremented; each adjustment picks a uniformly random
/// eligible entry.
fn repair_sum(
    deg: &mut [usize],
    target: usize,
    lo: usize,
    hi: usize,
    rng: &mut LabRng,
) -> Result<()> {
    let n = deg.len();
    if target < n * lo || target > n * hi {
        return Err(Error::Generation(format!(
            "cannot reach degree sum {target} with {n} entries in [{lo}, {hi}]"
        )));
    }
    let mut sum: usize = deg.iter().sum();
    if sum == target {
        return Ok(());
    }
    let raise = sum < target;
    let mut eligible: Vec<usize> = (0..n)
        .filter(|&i| if raise { deg[i] < hi } else { deg[i] > lo })
        .collect();
    while sum != target {
        // feasibility above guarantees eligible entries remain
        let k = rng.random_range(0..eligible.len());
        let i = eligible[k];
        if raise {
            deg[i] += 1;
            sum += 1;
            if deg[i] == hi {
                eligible.swap_remove(k);
            }
        } else {
            deg[i] -= 1;
            sum -= 1;
            if deg[i] == lo {
                eligible.swap_remove(k);
            }
        }
    }
    Ok(())
}

/// Degrees drawn i.i.d. uniform on `lo..=hi`; in-degrees are then repaired so
/// both sums agree.
pub fn gen_uniform_range(n: usize, lo: usize, hi: usize, seed: u64) -> Result<BiDegreeSequence> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if lo < 2 || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "degree range [{lo}, {hi}] must satisfy 2 <= lo <= hi"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let out_deg: Vec<usize> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let mut in_deg: Vec<usize> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let target = out_deg.iter().sum();
    repair_sum(&mut in_deg, target, lo, hi, &mut rng)?;
    BiDegreeSequence::new(in_deg, out_deg)
}

/// A finite law on degree values, e.g. the in-degree law of an out-regular
/// sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeLaw {
    values: Vec<usize>,
    weights: Vec<f64>,
}

impl DegreeLaw {
    pub fn new(pairs: Vec<(usize, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("degree law has empty support".into()));
        }
        let mut pairs = pairs;
        pairs.sort_by_key(|&(k, _)| k);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("degree law has repeated values".into()));
        }
        if pairs.iter().any(|&(_, w)| !(w.is_finite() && w >= 0.0)) {
            return Err(Error::InvalidParameter("degree law weights must be >= 0".into()));
        }
        let (values, weights): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter("degree law has zero total weight".into()));
        }
        Ok(Self { values, weights })
    }

    pub fn point_mass(k: usize) -> Self {
        Self {
            values: vec![k],
            weights: vec![1.0],
        }
    }

    /// Uniform on the listed values.
    pub fn uniform(values: &[usize]) -> Result<Self> {
        Self::new(values.iter().map(|&k| (k, 1.0)).collect())
    }

    pub fn min_value(&self) -> usize {
        self.values[0]
    }

    pub fn max_value(&self) -> usize {
        *self.values.last().unwrap()
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.weights).expect("weights validated at construction")
    }
}

/// Out-degree identically `d`; in-degrees drawn from `in_law` and repaired to
/// sum to `n * d` within the law's support range.
pub fn gen_out_regular(
    n: usize,
    d: usize,
    in_law: &DegreeLaw,
    seed: u64,
) -> Result<BiDegreeSequence> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if d < 2 {
        return Err(Error::Assumption(format!("out-degree {d} < 2")));
    }
    if in_law.min_value() < 2 {
        return Err(Error::Assumption(format!(
            "in-degree law charges {} < 2",
            in_law.min_value()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let sampler = in_law.sampler();
    let mut in_deg: Vec<usize> = (0..n).map(|_| in_law.values[sampler.sample(&mut rng)]).collect();
    repair_sum(&mut in_deg, n * d, in_law.min_value(), in_law.max_value(), &mut rng)?;
    BiDegreeSequence::new(in_deg, vec![d; n])
}

/// Scalar functionals of a degree sequence.
///
/// `theta` is `None` when `rho >= 1`, where the closed form has no real value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub delta: f64,
    pub beta: f64,
    pub rho: f64,
    pub gamma: f64,
    pub theta: Option<f64>,
    pub n: usize,
    pub m: usize,
}

impl TheoryParams {
    pub fn theta_or_err(&self) -> Result<f64> {
        self.theta.ok_or_else(|| {
            Error::Domain(format!("theta undefined for rho = {} >= 1", self.rho))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Linear time-scale constant from the other four functionals.
pub fn theta_from(delta: f64, beta: f64, rho: f64, gamma: f64) -> Option<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return None;
    }
    let tail = (1.0 - (1.0 - rho).sqrt()) / rho;
    Some(delta / ((gamma - rho) / (1.0 - rho) * tail + beta - 1.0))
}

/// delta = m/n, beta = sum (d-)^2 / m, rho = sum d-/d+ / m,
/// gamma = sum (d-)^2/d+ / m and theta.
pub fn stats(seq: &BiDegreeSequence) -> Result<TheoryParams> {
    if let Some(x) = seq.out_deg.iter().position(|&d| d == 0) {
        return Err(Error::Domain(format!("vertex {x} has out-degree 0")));
    }
    let m = seq.m() as f64;
    let mut beta = CompensatedSum::new();
    let mut rho = CompensatedSum::new();
    let mut gamma = CompensatedSum::new();
    for (&din, &dout) in seq.in_deg.iter().zip(&seq.out_deg) {
        let (din, dout) = (din as f64, dout as f64);
        beta.add(din * din);
        rho.add(din / dout);
        gamma.add(din * din / dout);
    }
    let delta = m / seq.n() as f64;
    let (beta, rho, gamma) = (beta.value() / m, rho.value() / m, gamma.value() / m);
    Ok(TheoryParams {
        delta,
        beta,
        rho,
        gamma,
        theta: theta_from(delta, beta, rho, gamma),
        n: seq.n(),
        m: seq.m(),
    })
}
