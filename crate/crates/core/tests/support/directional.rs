//! Directional checks on a full benchmark run: how the four methods rank
//! against each other per soil-abundance bin and visibility level.

use amorph_core::bench::{summarize, SummaryRow, TrialRecord, TrialStatus};
use amorph_core::policies::Method;

pub const HIGH_VIS: f64 = 0.7;
pub const LOW_VIS: f64 = 0.2;
/// Bins whose upper edge is at most this count as sparse.
pub const SPARSE_MAX: f64 = 0.15;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

const HEURISTICS: [Method; 2] = [Method::HeuristicSquare, Method::HeuristicLissajous];
const NAIVE: [Method; 2] = [Method::Square, Method::Lissajous];

fn row(rows: &[SummaryRow], m: Method, theta: f64, lo: f64) -> Option<&SummaryRow> {
    rows.iter()
        .find(|r| r.method == m && r.theta == theta && r.bin_lo == lo && r.n > 0)
}

fn sparse(r: &TrialRecord) -> bool {
    r.soil_fraction.is_some_and(|f| f < SPARSE_MAX)
}

fn pooled_success(recs: &[TrialRecord], m: Method, theta: f64) -> f64 {
    let pool: Vec<_> = recs
        .iter()
        .filter(|r| r.method == m && r.theta == theta && sparse(r))
        .collect();
    let ok = pool
        .iter()
        .filter(|r| r.status == TrialStatus::TargetFound)
        .count();
    ok as f64 / pool.len().max(1) as f64
}

fn overall_success(recs: &[TrialRecord], m: Method, theta: f64) -> f64 {
    let pool: Vec<_> = recs
        .iter()
        .filter(|r| r.method == m && r.theta == theta && r.soil_fraction.is_some())
        .collect();
    let ok = pool
        .iter()
        .filter(|r| r.status == TrialStatus::TargetFound)
        .count();
    ok as f64 / pool.len().max(1) as f64
}

/// (OutOfBounds count, failure count) among sparse trials.
fn sparse_oob(recs: &[TrialRecord], m: Method, theta: f64) -> (usize, usize) {
    let fails: Vec<_> = recs
        .iter()
        .filter(|r| r.method == m && r.theta == theta && sparse(r))
        .filter(|r| matches!(r.status, TrialStatus::Truncated | TrialStatus::OutOfBounds))
        .collect();
    let oob = fails
        .iter()
        .filter(|r| r.status == TrialStatus::OutOfBounds)
        .count();
    (oob, fails.len())
}

pub fn evaluate(recs: &[TrialRecord], bins: &[f64]) -> Vec<Check> {
    let rows = summarize(recs, bins).expect("valid bins");
    let sparse_bins: Vec<f64> = bins
        .windows(2)
        .filter(|w| w[1] <= SPARSE_MAX + 1e-12)
        .map(|w| w[0])
        .collect();
    let mut out = Vec::new();

    // heuristic-lissajous success at high visibility, every bin
    let mut pass = true;
    let mut detail = Vec::new();
    for w in bins.windows(2) {
        if let Some(r) = row(&rows, Method::HeuristicLissajous, HIGH_VIS, w[0]) {
            let s = r.success_rate.unwrap_or(0.0);
            pass &= s >= 0.95;
            detail.push(format!("[{},{})={s:.3}", w[0], w[1]));
        }
    }
    out.push(Check {
        name: "heuristic-lissajous success >= 0.95 in every bin at high visibility",
        pass,
        detail: detail.join(" "),
    });

    // heuristics beat naive baselines on steps and distance in sparse bins
    let mut pass = true;
    let mut detail = Vec::new();
    for theta in [HIGH_VIS, LOW_VIS] {
        for &lo in &sparse_bins {
            for h in HEURISTICS {
                for b in NAIVE {
                    let (Some(hr), Some(br)) = (row(&rows, h, theta, lo), row(&rows, b, theta, lo))
                    else {
                        continue;
                    };
                    let steps_ok = hr.mean_steps < br.mean_steps;
                    let dist_ok = match (hr.mean_distance_success, br.mean_distance_success) {
                        (Some(hd), Some(bd)) => hd < bd,
                        (Some(_), None) => true,
                        _ => false,
                    };
                    if !(steps_ok && dist_ok) {
                        pass = false;
                        detail.push(format!("θ={theta} bin {lo}: {h} vs {b}"));
                    }
                }
            }
        }
    }
    out.push(Check {
        name: "sparse bins: heuristics take fewer steps and less distance than naive baselines",
        pass,
        detail: if detail.is_empty() {
            "all pairs ordered".into()
        } else {
            detail.join("; ")
        },
    });

    // naive square has the lowest sparse success
    let mut pass = true;
    let mut detail = Vec::new();
    for theta in [HIGH_VIS, LOW_VIS] {
        let sq = pooled_success(recs, Method::Square, theta);
        let others = [
            Method::Lissajous,
            Method::HeuristicSquare,
            Method::HeuristicLissajous,
        ]
        .map(|m| pooled_success(recs, m, theta));
        pass &= others.iter().all(|&o| sq < o);
        detail.push(format!("θ={theta}: square {sq:.3} vs {others:.3?}"));
    }
    out.push(Check {
        name: "sparse bins: naive square has the lowest success rate",
        pass,
        detail: detail.join("; "),
    });

    // lissajous fallback travels less than square fallback
    let mut pass = true;
    let mut detail = Vec::new();
    for theta in [HIGH_VIS, LOW_VIS] {
        for &lo in &sparse_bins {
            let (Some(l), Some(s)) = (
                row(&rows, Method::HeuristicLissajous, theta, lo),
                row(&rows, Method::HeuristicSquare, theta, lo),
            ) else {
                continue;
            };
            let (Some(ld), Some(sd)) = (l.mean_distance_success, s.mean_distance_success) else {
                pass = false;
                continue;
            };
            let ratio = ld / sd;
            pass &= ratio <= 0.9;
            detail.push(format!("θ={theta} bin {lo}: {ratio:.3}"));
        }
    }
    out.push(Check {
        name: "sparse bins: heuristic-lissajous distance <= 0.9 x heuristic-square",
        pass,
        detail: detail.join(" "),
    });

    // robustness to low visibility
    let hi = overall_success(recs, Method::HeuristicLissajous, HIGH_VIS);
    let lo = overall_success(recs, Method::HeuristicLissajous, LOW_VIS);
    out.push(Check {
        name: "heuristic-lissajous success drop under low visibility <= 10 points",
        pass: hi - lo <= 0.10,
        detail: format!("{hi:.3} -> {lo:.3}"),
    });
    let mut pass = true;
    let mut detail = Vec::new();
    for &b in &sparse_bins {
        let (Some(h), Some(l)) = (
            row(&rows, Method::HeuristicLissajous, HIGH_VIS, b),
            row(&rows, Method::HeuristicLissajous, LOW_VIS, b),
        ) else {
            continue;
        };
        let inc = l.mean_steps.unwrap_or(f64::NAN) - h.mean_steps.unwrap_or(f64::NAN);
        pass &= inc <= 25.0;
        detail.push(format!("bin {b}: {inc:+.1}"));
    }
    out.push(Check {
        name: "sparse bins: heuristic-lissajous step increase under low visibility <= 25",
        pass,
        detail: detail.join(" "),
    });

    // failure mix
    let (oh, fh) = sparse_oob(recs, Method::HeuristicLissajous, HIGH_VIS);
    let (ol, fl) = sparse_oob(recs, Method::HeuristicLissajous, LOW_VIS);
    let share = |o: usize, f: usize| if f == 0 { 0.0 } else { o as f64 / f as f64 };
    out.push(Check {
        name: "sparse bins: out-of-bounds share of heuristic-lissajous failures is higher at low visibility",
        pass: share(ol, fl) > share(oh, fh),
        detail: format!("high {oh}/{fh}, low {ol}/{fl}"),
    });
    out
}
