//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use avatar_dm::fuzzy::{self, Emotion, FammTable};
use avatar_dm::level::{classify_level, ControlMode, KnowledgeLevel};
use avatar_dm::pomdp::{ActionId, Belief, ObservationId, PomdpModel};
use avatar_dm::qlearn::{self, QConfig, QTable};
use avatar_dm::sentiment::{classify_compound, SentimentClass};
use avatar_dm::sim::{self, PolicySpec, ProfileSet};
use avatar_dm::{trend, Assets, EngineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BELIEF_TOL: f64 = 1e-12;
const BELIEF_BUDGET: Duration = Duration::from_secs(5);
const DWT_TOL: f64 = 1e-9;
const DWT_BUDGET: Duration = Duration::from_secs(2);
const Q_TOL: f64 = 1e-2;
const Q_BUDGET: Duration = Duration::from_secs(5);
const SENTIMENT_MIN_AGREEMENT: usize = 22;
const SIM_EPISODES: usize = 200;
const SIM_BUDGET: Duration = Duration::from_secs(60);
const SIM_MIN_NEUTRAL_POSITIVE: f64 = 80.0;
const TRAIN_EPISODES: usize = 2000;
const TRAIN_ALPHA: f64 = 0.1;
const MASTER_SEED: u64 = 2024;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, pass: String, fail: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(pass)
    } else {
        Err(fail())
    }
}

fn random_rows(rng: &mut ChaCha8Rng, rows: usize, width: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            let raw: Vec<f64> = (0..width).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        })
        .collect()
}

fn belief_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (ns, na, no) = (rng.random_range(1..=6), rng.random_range(1..=4), rng.random_range(1..=4));
        // t[a][s] is a row over s'; z[a][s'] is a row over o.
        let t: Vec<Vec<Vec<f64>>> = (0..na).map(|_| random_rows(&mut rng, ns, ns)).collect();
        let z: Vec<Vec<Vec<f64>>> = (0..na).map(|_| random_rows(&mut rng, ns, no)).collect();
        let model = PomdpModel::new(
            (0..ns).map(|i| format!("s{i}")).collect(),
            (0..na).map(|i| format!("a{i}")).collect(),
            (0..no).map(|i| format!("o{i}")).collect(),
            t.iter().flatten().flatten().copied().collect(),
            z.iter().flatten().flatten().copied().collect(),
            vec![0.0; na * ns * ns],
            0.9,
        )
        .map_err(|e| e.to_string())?;
        let b = random_rows(&mut rng, 1, ns).remove(0);
        let (a, o) = (rng.random_range(0..na), rng.random_range(0..no));

        let mut expected: Vec<f64> = (0..ns)
            .map(|s2| z[a][s2][o] * (0..ns).map(|s| t[a][s][s2] * b[s]).sum::<f64>())
            .collect();
        let norm: f64 = expected.iter().sum();
        expected.iter_mut().for_each(|x| *x /= norm);

        let got = model
            .update_belief(&Belief::new(b).map_err(|e| e.to_string())?, ActionId(a), ObservationId(o))
            .map_err(|e| e.to_string())?;
        let l1: f64 = got.probs().iter().zip(&expected).map(|(x, y)| (x - y).abs()).sum();
        worst = worst.max(l1);
    }
    let elapsed = start.elapsed();
    check(
        worst <= BELIEF_TOL && elapsed < BELIEF_BUDGET,
        format!("1000 models, max L1 {worst:.2e}, {elapsed:.2?}"),
        || format!("max L1 {worst:.2e} (tol {BELIEF_TOL:e}), {elapsed:.2?}"),
    )
}

fn dwt_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let start = Instant::now();
    let (mut recon, mut energy) = (0.0_f64, 0.0_f64);
    for _ in 0..500 {
        let n = 1usize << rng.random_range(1..=9);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dwt = trend::haar_dwt(&x).map_err(|e| e.to_string())?;
        let back = dwt.inverse();
        recon = recon.max(x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        let e_out: f64 = dwt.levels.iter().flat_map(|l| &l.detail).map(|d| d * d).sum::<f64>()
            + dwt.deepest_approx().powi(2);
        energy = energy.max((e_in - e_out).abs());
    }
    let elapsed = start.elapsed();
    let bump = trend::analyze(&[0.0, 1.0, 1.0, 0.0]).map_err(|e| e.to_string())?.ncp;
    let flat = trend::analyze(&[0.4; 8]).map_err(|e| e.to_string())?.ncp;
    check(
        recon <= DWT_TOL && energy <= DWT_TOL && bump == 1 && flat == 0 && elapsed < DWT_BUDGET,
        format!("500 signals, reconstruction {recon:.1e}, energy {energy:.1e}, fixtures 1/0, {elapsed:.2?}"),
        || format!("reconstruction {recon:.1e}, energy {energy:.1e}, fixtures {bump}/{flat}, {elapsed:.2?}"),
    )
}

/// States 0, 1, 2 in a row; action 0 moves left (staying put at 0), action 1
/// moves right. Moving right from 2 ends the episode with reward 1.
fn chain_step(s: usize, a: usize) -> (Option<usize>, f64) {
    match (s, a) {
        (2, 1) => (None, 1.0),
        (s, 1) => (Some(s + 1), 0.0),
        (s, _) => (Some(s.saturating_sub(1)), 0.0),
    }
}

fn chain_oracle(gamma: f64) -> [[f64; 2]; 3] {
    let mut q = [[0.0_f64; 2]; 3];
    for _ in 0..10_000 {
        let v: Vec<f64> = q.iter().map(|r| r[0].max(r[1])).collect();
        for (s, row) in q.iter_mut().enumerate() {
            for (a, cell) in row.iter_mut().enumerate() {
                let (next, r) = chain_step(s, a);
                *cell = r + next.map_or(0.0, |n| gamma * v[n]);
            }
        }
    }
    q
}

fn q_convergence() -> Outcome {
    let cfg = QConfig {
        alpha: 0.1,
        gamma: 0.9,
        epsilon0: 1.0,
        epsilon_decay: 0.999,
        epsilon_min: 0.2,
        rng_seed: 0,
    };
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut q = QTable::new(3, 2).map_err(|e| e.to_string())?;
    for episode in 0..5000 {
        let eps = cfg.epsilon_after(episode);
        let mut s = rng.random_range(0..3);
        for _ in 0..50 {
            let a = qlearn::choose_action(&q, s, eps, &mut rng);
            match chain_step(s, a.0) {
                (Some(next), r) => {
                    qlearn::update_q(&mut q, s, a, r, next, &cfg);
                    s = next;
                }
                (None, r) => {
                    qlearn::update_q_terminal(&mut q, s, a, r, &cfg);
                    break;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let oracle = chain_oracle(cfg.gamma);
    let mut worst: f64 = 0.0;
    let mut greedy_ok = true;
    for (s, row) in oracle.iter().enumerate() {
        for (a, v) in row.iter().enumerate() {
            worst = worst.max((q.get(s, ActionId(a)) - v).abs());
        }
        let best = if row[1] >= row[0] { 1 } else { 0 };
        greedy_ok &= q.greedy(s).0 == best;
    }

    let mut single = QTable::new(2, 1).map_err(|e| e.to_string())?;
    single.set(1, ActionId(0), 2.0);
    let half = QConfig { alpha: 0.5, ..cfg };
    qlearn::update_q(&mut single, 0, ActionId(0), 1.0, 1, &half);
    let fixture = single.get(0, ActionId(0));

    check(
        worst <= Q_TOL && greedy_ok && fixture == 1.4 && elapsed < Q_BUDGET,
        format!("max |Q - Q*| {worst:.2e}, greedy optimal, single step {fixture}, {elapsed:.2?}"),
        || format!("max |Q - Q*| {worst:.2e}, greedy optimal {greedy_ok}, single step {fixture}, {elapsed:.2?}"),
    )
}

fn thresholds() -> Outcome {
    let cases = [
        (0.10, KnowledgeLevel::Expert),
        (0.40, KnowledgeLevel::Professional),
        (0.60, KnowledgeLevel::Amateur),
        (0.90, KnowledgeLevel::Novice),
    ];
    let wrong: Vec<String> = cases
        .iter()
        .filter_map(|&(r, want)| {
            let got = classify_level(r).ok();
            (got != Some(want)).then(|| format!("{r} -> {got:?}"))
        })
        .collect();
    check(wrong.is_empty(), "0.10/0.40/0.60/0.90 -> expert/professional/amateur/novice".into(), || wrong.join(", "))
}

fn famm_exactness() -> Outcome {
    use ControlMode::*;
    use Emotion::*;
    use SentimentClass as S;
    let filled = [
        (S::Negative, Strategic, Disgust),
        (S::Negative, Tactical, Anger),
        (S::Negative, Scrambled, Fear),
        (S::Neutral, Strategic, Fear),
        (S::Neutral, Tactical, Sad),
        (S::Neutral, Opportunistic, Surprise),
        (S::Neutral, Scrambled, Sad),
        (S::Positive, Strategic, Happy),
        (S::Positive, Opportunistic, Surprise),
    ];
    let famm = FammTable::default();
    let mut wrong: Vec<String> = filled
        .iter()
        .filter(|&&(s, m, e)| famm.cell(s, m) != e)
        .map(|(s, m, e)| format!("table ({s}, {m:?}) != {e}"))
        .collect();
    let compound_peak = |s: SentimentClass| match s {
        S::Negative => -1.0,
        S::Neutral => 0.0,
        S::Positive => 1.0,
    };
    let mut round_trips = 0;
    for s in SentimentClass::ALL {
        for m in ControlMode::ALL {
            let ratio = 0.125 + 0.25 * m.index() as f64;
            match fuzzy::infer(compound_peak(s), ratio, &famm) {
                Ok((e, _)) if e == famm.cell(s, m) => round_trips += 1,
                Ok((e, x)) => wrong.push(format!("({s}, {m:?}) -> {e} at {x}")),
                Err(err) => wrong.push(format!("({s}, {m:?}): {err}")),
            }
        }
    }
    check(
        wrong.is_empty(),
        format!("9 filled cells verbatim, {round_trips}/12 peak round trips"),
        || wrong.join("; "),
    )
}

fn replay() -> Outcome {
    let s = common::replay(common::REPLAY_SEED);
    let again = common::replay(common::REPLAY_SEED);
    let deterministic = serde_json::to_string(s.transcript()).ok() == serde_json::to_string(again.transcript()).ok();
    let mismatches = common::feature_mismatches(&s);
    check(
        s.goal_reached() && s.turn() == 26 && mismatches.is_empty() && deterministic,
        format!("26 turns, completion reached, {} feature outcomes correct, deterministic", common::EXPECTED_FEATURES.len()),
        || format!("goal {}, turns {}, mismatches {mismatches:?}, deterministic {deterministic}", s.goal_reached(), s.turn()),
    )
}

fn sentiment_agreement() -> Outcome {
    let lexicon = Assets::shipped().lexicon;
    let lines = common::transcript();
    let mut agree = 0;
    let mut exact = 0;
    let mut misses = Vec::new();
    for (u, printed) in &lines {
        let got = avatar_dm::sentiment::score_utterance(u, &lexicon).map_err(|e| e.to_string())?.compound;
        if classify_compound(got) == classify_compound(*printed) {
            agree += 1;
        } else {
            misses.push(format!("{u:?}: {got} vs {printed}"));
        }
        if (got - printed).abs() < 5e-5 {
            exact += 1;
        }
    }
    check(
        agree >= SENTIMENT_MIN_AGREEMENT,
        format!("{agree}/{} classes agree (need {SENTIMENT_MIN_AGREEMENT}), {exact} compounds exact to 4 places", lines.len()),
        || format!("{agree}/{} agree: {}", lines.len(), misses.join("; ")),
    )
}

fn simulation_properties() -> Outcome {
    let start = Instant::now();
    let report = sim::run_experiment(
        &Assets::shipped(),
        &EngineConfig::default(),
        &ProfileSet::shipped(),
        &PolicySpec::HandCrafted,
        SIM_EPISODES,
        MASTER_SEED,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (profiles, average) = report.rows.split_at(report.rows.len() - 1);
    let lengths: Vec<f64> = profiles.iter().map(|r| r.avg_dialogue_length).collect();
    let accuracy: Vec<f64> = profiles.iter().map(|r| r.accuracy_pct).collect();
    let increasing = lengths.windows(2).all(|w| w[0] < w[1]);
    let weakly_decreasing = accuracy.windows(2).all(|w| w[0] >= w[1]);
    let np = average[0].neutral_positive_pct;
    let summary = format!(
        "length {lengths:.2?}, accuracy {accuracy:.1?}, neutral/positive {np:.2}%, {elapsed:.2?}"
    );
    check(
        increasing && weakly_decreasing && np >= SIM_MIN_NEUTRAL_POSITIVE && elapsed < SIM_BUDGET,
        summary.clone(),
        || summary,
    )
}

fn policy_improvement() -> Outcome {
    let mut cfg = EngineConfig::default();
    cfg.q.alpha = TRAIN_ALPHA;
    let rows = sim::policy_improvement_report(
        &Assets::shipped(),
        &cfg,
        &ProfileSet::shipped(),
        TRAIN_EPISODES,
        SIM_EPISODES,
        MASTER_SEED,
    )
    .map_err(|e| e.to_string())?;
    let per_profile = &rows[..rows.len() - 1];
    let detail: Vec<String> = per_profile
        .iter()
        .map(|r| format!("{} {:.2} vs {:.2}", r.profile, r.learned.mean_return, r.random.mean_return))
        .collect();
    let ok = per_profile.iter().all(|r| r.learned.mean_return > r.random.mean_return);
    check(ok, format!("learned vs random return: {}", detail.join(", ")), || detail.join(", "))
}

fn gateway_determinism() -> Outcome {
    let lines: Vec<&str> = common::transcript().into_iter().map(|(u, _)| u).collect();
    let repl = common::repl_log(common::REPLAY_SEED, &lines);
    let http = common::http_log(common::REPLAY_SEED, &lines);
    let repl = common::log_as_array(&repl);
    check(
        repl == http,
        format!("{} turns byte-identical over REPL and HTTP, core crate only", lines.len()),
        || "REPL and HTTP transcripts differ".into(),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("belief update oracle", belief_oracle),
        ("dwt correctness", dwt_correctness),
        ("q-learning convergence", q_convergence),
        ("knowledge thresholds", thresholds),
        ("famm exactness", famm_exactness),
        ("scripted replay", replay),
        ("sentiment agreement", sentiment_agreement),
        ("simulation properties", simulation_properties),
        ("policy improvement", policy_improvement),
        ("gateway determinism", gateway_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
