mod common;

use common::*;

#[test]
fn repl_and_http_agree_on_the_scripted_session() {
    let lines: Vec<&str> = transcript().into_iter().map(|(u, _)| u).collect();
    let repl = repl_log(REPLAY_SEED, &lines);
    let http = http_log(REPLAY_SEED, &lines);
    assert_eq!(repl.lines().count(), 26);
    assert_eq!(log_as_array(&repl), http);
}

#[test]
fn repl_and_http_agree_under_random_policy() {
    let lines = ["Yes", "hmm", "What is that?", "No", "Sure, I want that.", "ok"];
    for seed in [1, 2, 3] {
        let repl = {
            let dir = tempfile::tempdir().unwrap();
            let cfg = dir.path().join("cfg.json");
            std::fs::write(&cfg, r#"{"policy": "random"}"#).unwrap();
            let log = dir.path().join("turns.jsonl");
            let mut input = std::io::Cursor::new(lines.join("\n").into_bytes());
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let seed = seed.to_string();
            let args = ["avatar-dm", "repl", "--seed", &seed, "--config", cfg.to_str().unwrap(), "--log", log.to_str().unwrap()];
            assert_eq!(avatar_dm::gateway::run(args, &mut input, &mut out, &mut err), 0);
            std::fs::read_to_string(log).unwrap()
        };
        let native = {
            let cfg = avatar_dm::EngineConfig { policy: avatar_dm::policy::PolicyMode::Random, ..Default::default() };
            let mut s = avatar_dm::Session::new(avatar_dm::Assets::shipped(), cfg, seed).unwrap();
            lines.iter().map(|l| serde_json::to_string(&s.step(l).unwrap()).unwrap() + "\n").collect::<String>()
        };
        assert_eq!(repl, native);
    }
}
