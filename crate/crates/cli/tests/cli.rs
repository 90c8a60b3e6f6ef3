use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

use hackbox::env::{random_policy, Env};
use hackbox::observe::Observation;
use hackbox::tasks::Overrides;

fn hackbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hackbox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn des(name: &str) -> String {
    format!("{}/../core/data/des/{name}.des", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn tasks_lists_registry() {
    let o = hackbox(&["tasks"]);
    assert!(o.status.success());
    let ids: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(ids.len(), hackbox::tasks::TASK_IDS.len());
    assert!(ids.iter().any(|i| i == "Room-5x5"));
    assert!(ids.iter().any(|i| i == "Boxoban-Hard"));
}

#[test]
fn compile_simple_maze_summary() {
    let o = hackbox(&["compile", &des("simple_maze"), "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("objects: 5\n"), "{text}");
    assert!(text.contains("traps: 5\n"));
    assert!(text.contains("monsters: 1\n"));
}

#[test]
fn compile_json_is_reproducible() {
    let a = hackbox(&["compile", &des("oracle"), "--seed", "4", "--json"]);
    let b = hackbox(&["compile", &des("oracle"), "--seed", "4", "--json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["name"], "oracle");
}

#[test]
fn malformed_des_reports_position() {
    let dir = std::env::temp_dir().join(format!("hackbox-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.des");
    std::fs::write(&path, "MAZE: \"x\", ' '\nMAP\n...\nENDMAP\nMONSTER: 'x', (1,\n").unwrap();
    let o = hackbox(&["compile", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn user_errors_exit_one() {
    let o = hackbox(&["rollout", "--frobnicate", "Room-5x5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(hackbox(&["rollout", "Nope-9x9"]).status.code(), Some(1));
    assert_eq!(hackbox(&["compile", "/nonexistent/x.des"]).status.code(), Some(1));
    assert!(hackbox(&["--help"]).status.success());
}

#[test]
fn rollout_returns_are_bounded() {
    let o = hackbox(&["rollout", "Room-5x5", "--episodes", "10", "--quiet"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let r: f64 = parts[5].parse().unwrap();
        assert!((-0.1..=1.0).contains(&r), "{line}");
    }
}

#[test]
fn rollout_json_is_reproducible() {
    let args = ["rollout", "KeyRoom-S5", "--episodes", "3", "--seed", "11", "--json"];
    let a = hackbox(&args);
    let b = hackbox(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_river_narrow() {
    let o = hackbox(&["check", "River-Narrow", "--seeds", "100"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("solvable: 100/100"));
}

#[test]
fn sample_json_is_reproducible() {
    let args = ["sample", "HideNSeek", "--count", "2", "--render", "json", "--seed", "3"];
    let a = hackbox(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, hackbox(&args).stdout);
    let first: Value = serde_json::from_str(stdout(&a).lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 3);
    assert_eq!(first["obs"]["chars"].as_array().unwrap().len(), 21);
}

#[test]
fn sample_des_file_ansi() {
    let o = hackbox(&["sample", &des("rivers"), "--count", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\x1b["));
}

#[test]
fn play_reads_keys_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hackbox"))
        .args(["play", "Room-5x5", "--quiet"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"l\nj\nzz\n:q\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches("reward").count(), 2, "{text}");
    assert!(text.contains("unknown key `zz`"));
}

struct Server {
    child: std::process::Child,
    input: std::process::ChildStdin,
    output: BufReader<std::process::ChildStdout>,
}

impl Server {
    fn start() -> (Server, Value) {
        let mut child = Command::new(env!("CARGO_BIN_EXE_hackbox"))
            .arg("serve")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        let input = child.stdin.take().unwrap();
        let output = BufReader::new(child.stdout.take().unwrap());
        let mut s = Server { child, input, output };
        let banner = s.read();
        (s, banner)
    }

    fn read(&mut self) -> Value {
        let mut line = String::new();
        self.output.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap()
    }

    fn ask(&mut self, req: Value) -> Value {
        writeln!(self.input, "{req}").unwrap();
        self.read()
    }

    fn finish(self) -> std::process::ExitStatus {
        let Server { mut child, input, .. } = self;
        drop(input);
        child.wait().unwrap()
    }
}

fn obs_json(o: &Observation) -> Value {
    serde_json::to_value(o).unwrap()
}

#[test]
fn serve_protocol_matches_rollout() {
    let (mut server, banner) = Server::start();
    assert_eq!(banner, json!({"protocol": 1}));
    let cases = [
        ("Room-5x5", 0),
        ("Room-Monster-15x15", 1),
        ("KeyRoom-S5", 2),
        ("MazeWalk-9x9", 3),
        ("River-Narrow", 4),
        ("Eat", 5),
        ("WoD-Easy", 6),
        ("MultiRoom-N2", 7),
        ("Boxoban-Medium", 8),
        ("CorridorBattle", 9),
    ];
    for (task, seed) in cases {
        let made = server.ask(json!({"cmd": "make", "task": task}));
        assert_eq!(made["ok"], true, "{made}");
        let h = made["env"].clone();
        let n = made["actions"].as_array().unwrap().len();

        let mut local = Env::make(task, &Overrides::default()).unwrap();
        let mut obs = local.reset(seed).unwrap();
        let reset = server.ask(json!({"cmd": "reset", "env": h, "seed": seed}));
        assert_eq!(reset["obs"], obs_json(&obs), "{task}: reset observation");

        let mut policy = random_policy(seed);
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            let a = policy(&obs, n);
            let t = local.step_index(a).unwrap();
            let remote = server.ask(json!({"cmd": "step", "env": h, "action": a}));
            assert_eq!(remote["obs"], obs_json(&t.obs), "{task}: step {steps}");
            assert_eq!(remote["reward"].as_f64().unwrap().to_bits(), t.reward.to_bits());
            assert_eq!(remote["done"], t.done);
            total += t.reward;
            steps += 1;
            obs = t.obs;
            if t.done {
                break;
            }
        }

        let cli = hackbox(&["rollout", task, "--seed", &seed.to_string(), "--json"]);
        let ep: Value = serde_json::from_slice(&cli.stdout).unwrap();
        assert_eq!(ep["steps"], steps, "{task}");
        assert!((ep["total_reward"].as_f64().unwrap() - total).abs() < 1e-12, "{task}");
        assert_eq!(ep["final_hash"], obs.hash(), "{task}");
        assert_eq!(server.ask(json!({"cmd": "close", "env": h})), json!({"ok": true}));
    }
    assert!(server.finish().success());
}

#[test]
fn serve_reports_errors() {
    let (mut server, _) = Server::start();
    let r = server.ask(json!({"cmd": "step", "env": 0, "action": 0}));
    assert_eq!(r["ok"], false);
    assert_eq!(r["error"], "unknown_env");
    writeln!(server.input, "not json").unwrap();
    assert_eq!(server.read()["error"], "bad_json");
    let r = server.ask(json!({"cmd": "make", "task": "Room-5x5-Random-v0"}));
    assert_eq!(r["ok"], true);
    assert!(server.finish().success());
}

#[test]
fn serve_exits_on_every_close() {
    for i in 0..100 {
        let (mut server, _) = Server::start();
        let made = server.ask(json!({"cmd": "make", "task": "Room-5x5"}));
        let h = made["env"].clone();
        assert_eq!(server.ask(json!({"cmd": "reset", "env": h, "seed": i}))["ok"], true);
        assert_eq!(server.ask(json!({"cmd": "close", "env": h})), json!({"ok": true}));
        assert!(server.finish().success(), "cycle {i}");
    }
}
