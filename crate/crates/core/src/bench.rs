//! Monte-Carlo experiment harness.
//!
//! Every trial index gets its own terrain. All methods and visibility
//! conditions of that index run on the same terrain with their own episode
//! seed, and the batch is sorted before it is returned, so the output is a
//! pure function of the configuration.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::BinaryImage;
use crate::policies::{build_policy, Method, PolicyConfig};
use crate::seeds;
use crate::simenv::{
    render_view, zoom, Action, AgentState, Env, EpisodeStatus, TraceRecord, VisibilityModel,
    WorkspaceBounds,
};
use crate::worldgen::{generate, GenParams, TerrainMap};

pub const RESULTS_HEADER: [&str; 11] = [
    "method",
    "theta",
    "trial_index",
    "seed",
    "soil_fraction",
    "status",
    "steps",
    "distance",
    "final_x",
    "final_y",
    "final_z_hat",
];

pub const SUMMARY_HEADER: [&str; 11] = [
    "method",
    "theta",
    "bin_lo",
    "bin_hi",
    "n",
    "success_rate",
    "mean_steps",
    "median_steps",
    "mean_distance_success",
    "share_truncated",
    "share_oob",
];

pub const PROBE_HEADER: [&str; 5] = [
    "theta",
    "z_hat",
    "zoom",
    "false_negative_rate",
    "false_positive_rate",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub thetas: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    /// Soil-abundance bin edges; bins are `[lo, hi)`, the last one closed.
    pub bins: Vec<f64>,
    /// Worker threads; has no effect on the output.
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            thetas: vec![0.7, 0.2],
            trials: 500,
            master_seed: 2024,
            bins: vec![0.0, 0.05, 0.10, 0.15, 0.20, 0.30, 0.40],
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.methods.is_empty() {
            return bad("methods list is empty".into());
        }
        if self.thetas.is_empty() {
            return bad("thetas list is empty".into());
        }
        if let Some(t) = self.thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return bad(format!("theta must be > 0, got {t}"));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        validate_bins(&self.bins)
    }
}

pub fn validate_bins(bins: &[f64]) -> Result<()> {
    if bins.len() < 2 {
        return Err(Error::InvalidConfig("need at least two bin edges".into()));
    }
    if bins.iter().any(|b| !(0.0..=1.0).contains(b)) || bins.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "bin edges must be strictly increasing within [0, 1], got {bins:?}"
        )));
    }
    Ok(())
}

/// Everything an episode needs besides the bench plan.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub worldgen: GenParams,
    /// Observation model; `theta` is replaced per condition.
    pub simenv: VisibilityModel,
    pub policies: PolicyConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.worldgen.validate()?;
        self.simenv.validate()?;
        self.policies
            .validate(&WorkspaceBounds::for_side(self.worldgen.side))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialStatus {
    TargetFound,
    Truncated,
    OutOfBounds,
    /// The trial's terrain could not be generated; no episode ran.
    GenerationExhausted,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TargetFound => "TargetFound",
            Self::Truncated => "Truncated",
            Self::OutOfBounds => "OutOfBounds",
            Self::GenerationExhausted => "GenerationExhausted",
        }
    }
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrialStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TargetFound" => Ok(Self::TargetFound),
            "Truncated" => Ok(Self::Truncated),
            "OutOfBounds" => Ok(Self::OutOfBounds),
            "GenerationExhausted" => Ok(Self::GenerationExhausted),
            other => Err(Error::InvalidConfig(format!(
                "unknown trial status `{other}`"
            ))),
        }
    }
}

impl TryFrom<EpisodeStatus> for TrialStatus {
    type Error = Error;

    fn try_from(s: EpisodeStatus) -> Result<Self> {
        match s {
            EpisodeStatus::TargetFound => Ok(Self::TargetFound),
            EpisodeStatus::Truncated => Ok(Self::Truncated),
            EpisodeStatus::OutOfBounds => Ok(Self::OutOfBounds),
            EpisodeStatus::Running => Err(Error::InvalidParameter(
                "a running episode has no trial status".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    pub theta: f64,
    pub trial_index: u64,
    /// Trial (terrain) seed; the episode seed is derived from it.
    pub seed: u64,
    /// `None` when no terrain could be generated.
    pub soil_fraction: Option<f64>,
    pub status: TrialStatus,
    pub steps: u32,
    pub distance: f64,
    pub final_x: f64,
    pub final_y: f64,
    pub final_z_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub status: EpisodeStatus,
    pub state: AgentState,
    /// Noise-free soil fraction under the final footprint.
    pub truth_soil_fraction: f64,
}

/// Runs one episode to termination, reporting the reset and every step to
/// `on_record`.
pub fn run_episode(
    map: Arc<TerrainMap>,
    method: Method,
    theta: f64,
    episode_seed: u64,
    sim: &SimConfig,
    mut on_record: impl FnMut(&TraceRecord),
) -> Result<EpisodeOutcome> {
    let mut env = Env::new(map, sim.simenv.with_theta(theta))?;
    let mut policy = build_policy(method, &sim.policies, &env.bounds(), theta, episode_seed)?;
    let mut obs = env.reset(episode_seed);
    on_record(&env.trace_record(Action::default()));
    loop {
        let action = policy.act(&obs);
        let (next, status) = env.step(action)?;
        on_record(&env.trace_record(action));
        if status.is_terminal() {
            return Ok(EpisodeOutcome {
                status,
                state: *env.state(),
                truth_soil_fraction: env.truth_soil_fraction(),
            });
        }
        obs = next;
    }
}

fn trial_records(bench: &BenchConfig, sim: &SimConfig, index: u64) -> Result<Vec<TrialRecord>> {
    let seed = seeds::trial_seed(bench.master_seed, index);
    let map = match generate(&sim.worldgen, seed) {
        Ok(map) => Some(Arc::new(map)),
        Err(Error::GenerationExhausted { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut out = Vec::with_capacity(bench.methods.len() * bench.thetas.len());
    for &method in &bench.methods {
        for &theta in &bench.thetas {
            let record = match &map {
                Some(map) => {
                    let episode = seeds::episode_seed(seed, method.as_str(), theta);
                    let outcome = run_episode(map.clone(), method, theta, episode, sim, |_| {})?;
                    TrialRecord {
                        method,
                        theta,
                        trial_index: index,
                        seed,
                        soil_fraction: Some(map.soil_fraction()),
                        status: outcome.status.try_into()?,
                        steps: outcome.state.step_count,
                        distance: outcome.state.distance,
                        final_x: outcome.state.x,
                        final_y: outcome.state.y,
                        final_z_hat: outcome.state.z_hat,
                    }
                }
                None => TrialRecord {
                    method,
                    theta,
                    trial_index: index,
                    seed,
                    soil_fraction: None,
                    status: TrialStatus::GenerationExhausted,
                    steps: 0,
                    distance: 0.0,
                    final_x: f64::NAN,
                    final_y: f64::NAN,
                    final_z_hat: f64::NAN,
                },
            };
            out.push(record);
        }
    }
    Ok(out)
}

/// Runs `trials` trials of every (method, θ) pair. Records come back sorted
/// by method and θ (in configuration order), then trial index.
pub fn run_trials(bench: &BenchConfig, sim: &SimConfig) -> Result<Vec<TrialRecord>> {
    bench.validate()?;
    sim.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(bench.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let batches: Vec<Vec<TrialRecord>> = pool.install(|| {
        (0..bench.trials)
            .into_par_iter()
            .map(|k| trial_records(bench, sim, k))
            .collect::<Result<_>>()
    })?;
    let mut records: Vec<TrialRecord> = batches.into_iter().flatten().collect();
    let method_rank = |m: Method| bench.methods.iter().position(|&x| x == m);
    let theta_rank = |t: f64| bench.thetas.iter().position(|&x| x == t);
    records.sort_by_key(|r| (method_rank(r.method), theta_rank(r.theta), r.trial_index));
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub theta: f64,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub n: usize,
    pub success_rate: Option<f64>,
    /// Over all trials in the bin.
    pub mean_steps: Option<f64>,
    pub median_steps: Option<f64>,
    /// Over successful trials only.
    pub mean_distance_success: Option<f64>,
    pub share_truncated: Option<f64>,
    pub share_oob: Option<f64>,
}

/// Bin holding `fraction`: `[lo, hi)` except the last bin, which also takes
/// its upper edge.
pub fn bin_index(bins: &[f64], fraction: f64) -> Option<usize> {
    let last = bins.len().checked_sub(2)?;
    (0..=last).find(|&i| {
        let (lo, hi) = (bins[i], bins[i + 1]);
        fraction >= lo && (fraction < hi || (i == last && fraction == hi))
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// Aggregates records per (method, θ, abundance bin). Records without a
/// terrain, or whose abundance falls outside every bin, are left out.
/// Methods and θs appear in first-seen order.
pub fn summarize(records: &[TrialRecord], bins: &[f64]) -> Result<Vec<SummaryRow>> {
    validate_bins(bins)?;
    let mut methods: Vec<Method> = Vec::new();
    let mut thetas: Vec<f64> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        if !thetas.contains(&r.theta) {
            thetas.push(r.theta);
        }
    }
    let mut rows = Vec::new();
    for &method in &methods {
        for &theta in &thetas {
            for (b, edge) in bins.windows(2).enumerate() {
                let group: Vec<&TrialRecord> = records
                    .iter()
                    .filter(|r| r.method == method && r.theta == theta)
                    .filter(|r| r.soil_fraction.and_then(|f| bin_index(bins, f)) == Some(b))
                    .collect();
                rows.push(summary_row(method, theta, edge[0], edge[1], &group));
            }
        }
    }
    Ok(rows)
}

fn summary_row(method: Method, theta: f64, lo: f64, hi: f64, group: &[&TrialRecord]) -> SummaryRow {
    let n = group.len();
    let share = |s: TrialStatus| {
        (n > 0).then(|| group.iter().filter(|r| r.status == s).count() as f64 / n as f64)
    };
    SummaryRow {
        method,
        theta,
        bin_lo: lo,
        bin_hi: hi,
        n,
        success_rate: share(TrialStatus::TargetFound),
        mean_steps: mean(group.iter().map(|r| f64::from(r.steps))),
        median_steps: median(group.iter().map(|r| f64::from(r.steps)).collect()),
        mean_distance_success: mean(
            group
                .iter()
                .filter(|r| r.status == TrialStatus::TargetFound)
                .map(|r| r.distance),
        ),
        share_truncated: share(TrialStatus::Truncated),
        share_oob: share(TrialStatus::OutOfBounds),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn finite_or_empty(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

pub fn write_results_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.write_record([
            r.method.as_str().to_owned(),
            r.theta.to_string(),
            r.trial_index.to_string(),
            r.seed.to_string(),
            opt(r.soil_fraction),
            r.status.to_string(),
            r.steps.to_string(),
            r.distance.to_string(),
            finite_or_empty(r.final_x),
            finite_or_empty(r.final_y),
            finite_or_empty(r.final_z_hat),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::InvalidConfig(format!(
            "unexpected CSV header {:?}, expected {expected:?}",
            found.iter().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    check_header(rd.headers()?, &RESULTS_HEADER)?;
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let parse_err = |i: usize| {
            Error::InvalidConfig(format!(
                "results row {}: bad {} `{}`",
                line + 1,
                RESULTS_HEADER[i],
                field(i)
            ))
        };
        let num = |i: usize| field(i).parse::<f64>().map_err(|_| parse_err(i));
        let num_or_nan = |i: usize| {
            if field(i).is_empty() {
                Ok(f64::NAN)
            } else {
                num(i)
            }
        };
        out.push(TrialRecord {
            method: field(0).parse()?,
            theta: num(1)?,
            trial_index: field(2).parse().map_err(|_| parse_err(2))?,
            seed: field(3).parse().map_err(|_| parse_err(3))?,
            soil_fraction: if field(4).is_empty() {
                None
            } else {
                Some(num(4)?)
            },
            status: field(5).parse()?,
            steps: field(6).parse().map_err(|_| parse_err(6))?,
            distance: num(7)?,
            final_x: num_or_nan(8)?,
            final_y: num_or_nan(9)?,
            final_z_hat: num_or_nan(10)?,
        });
    }
    Ok(out)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.as_str().to_owned(),
            r.theta.to_string(),
            r.bin_lo.to_string(),
            r.bin_hi.to_string(),
            r.n.to_string(),
            opt(r.success_rate),
            opt(r.mean_steps),
            opt(r.median_steps),
            opt(r.mean_distance_success),
            opt(r.share_truncated),
            opt(r.share_oob),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width text table of per-condition aggregates (all bins pooled).
pub fn format_condition_table(records: &[TrialRecord]) -> String {
    let mut out = format!(
        "{:<20} {:>6} {:>6} {:>8} {:>10} {:>10} {:>8} {:>8}\n",
        "method", "theta", "n", "success", "mean_steps", "mean_dist", "trunc", "oob"
    );
    let full = [0.0, 1.0];
    if let Ok(rows) = summarize(records, &full) {
        for r in rows {
            let f = |v: Option<f64>, p: usize| v.map_or("-".to_owned(), |v| format!("{v:.p$}"));
            out.push_str(&format!(
                "{:<20} {:>6} {:>6} {:>8} {:>10} {:>10} {:>8} {:>8}\n",
                r.method.as_str(),
                r.theta,
                r.n,
                f(r.success_rate, 3),
                f(r.mean_steps, 1),
                f(r.mean_distance_success, 1),
                f(r.share_truncated, 3),
                f(r.share_oob, 3),
            ));
        }
    }
    out
}

/// Misclassification rates of the observation model at one height.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub theta: f64,
    pub z_hat: f64,
    pub zoom: f64,
    /// Share of soil pixels rendered as non-soil over all-soil ground.
    pub false_negative_rate: f64,
    /// Share of pixels rendered as soil over soil-free ground.
    pub false_positive_rate: f64,
}

/// Renders `views` observations per height over uniform all-soil and
/// soil-free ground at `z_steps + 1` evenly spaced heights.
pub fn visibility_probe(
    model: &VisibilityModel,
    thetas: &[f64],
    z_steps: usize,
    views: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    model.validate()?;
    if z_steps == 0 || views == 0 {
        return Err(Error::InvalidParameter(
            "probe needs z_steps >= 1 and views >= 1".into(),
        ));
    }
    let soil = BinaryImage::ones(200, 200);
    let clear = BinaryImage::zeros(200, 200);
    let pose_xy = (99.5, 99.5);
    let mut rows = Vec::new();
    for &theta in thetas {
        let m = model.with_theta(theta);
        m.validate()?;
        for i in 0..=z_steps {
            let z = i as f64 / z_steps as f64;
            let mut rng = seeds::rng(
                seeds::derive(
                    seed,
                    &[&theta.to_bits().to_le_bytes(), &(i as u64).to_le_bytes()],
                ),
                "probe",
            );
            let pose = (pose_xy.0, pose_xy.1, z);
            let (mut missed, mut spurious) = (0usize, 0usize);
            for _ in 0..views {
                missed += 625 - render_view(&soil, pose, &m, &mut rng).count_ones();
                spurious += render_view(&clear, pose, &m, &mut rng).count_ones();
            }
            let total = (views * 625) as f64;
            rows.push(ProbeRow {
                theta,
                z_hat: z,
                zoom: zoom(z),
                false_negative_rate: missed as f64 / total,
                false_positive_rate: spurious as f64 / total,
            });
        }
    }
    Ok(rows)
}

pub fn write_probe_csv<W: Write>(rows: &[ProbeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROBE_HEADER)?;
    for r in rows {
        w.write_record([
            r.theta.to_string(),
            r.z_hat.to_string(),
            r.zoom.to_string(),
            r.false_negative_rate.to_string(),
            r.false_positive_rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
