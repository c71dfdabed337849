//! CSV and JSON output for experiments.

use std::fs::{self, File};
use std::io;
use std::path::Path;

use serde::Serialize;

use super::{EpisodeRecord, ExperimentReport, PolicyComparison};

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Writes `metrics.csv` and `summary.json` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("metrics.csv")).map_err(csv_err)?;
    for row in &report.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    let f = File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(f, report).map_err(io::Error::other)
}

#[derive(Serialize)]
struct TraceRow<'a> {
    profile: &'a str,
    episode: usize,
    turn: usize,
    reward: f64,
    q_value: f64,
}

/// One row per simulated turn: reward received and Q-value of the chosen act.
pub fn write_traces(episodes: &[EpisodeRecord], path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for ep in episodes {
        for (t, (r, q)) in ep.rewards.iter().zip(&ep.q_values).enumerate() {
            w.serialize(TraceRow {
                profile: &ep.profile,
                episode: ep.episode,
                turn: t + 1,
                reward: *r,
                q_value: *q,
            })
            .map_err(csv_err)?;
        }
    }
    w.flush()
}

#[derive(Serialize)]
struct ComparisonRow<'a> {
    profile: &'a str,
    policy: &'static str,
    mean_return: f64,
    avg_dialogue_length: f64,
    accuracy_pct: f64,
}

pub fn write_policy_csv(rows: &[PolicyComparison], path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        for (policy, s) in [("hand-crafted", &r.hand_crafted), ("learned", &r.learned), ("random", &r.random)] {
            w.serialize(ComparisonRow {
                profile: &r.profile,
                policy,
                mean_return: s.mean_return,
                avg_dialogue_length: s.avg_dialogue_length,
                accuracy_pct: s.accuracy_pct,
            })
            .map_err(csv_err)?;
        }
    }
    w.flush()
}
