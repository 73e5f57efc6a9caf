use std::path::Path;
use std::process::{Command, Output};

fn mpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpe"))
        .args(args)
        .env_remove("MPE_REGISTRY_PATH")
        .output()
        .expect("mpe runs")
}

fn ok(args: &[&str]) -> Output {
    let out = mpe(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_one_return_per_player_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        ok(&["run", "coins", "--seed", "7", "--policies", "random,random", "--max-steps", "2000", "--out", s(p)]);
    }
    let v = json(&a);
    assert_eq!(v["returns"].as_array().unwrap().len(), 2);
    assert_eq!(v["manifest"]["command"], "run");
    assert_eq!(v["manifest"]["engine_version"], mpe_core::VERSION);
    assert!(v["events"].as_array().is_some());
    // the manifests differ only in the output path
    let strip = |p: &Path| {
        let mut v = json(p);
        v["manifest"]["out"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn run_output_is_byte_identical() {
    let args = ["run", "prisoners_dilemma_repeated", "--seed", "3", "--policies", "tit_for_tat,random"];
    assert_eq!(ok(&args).stdout, ok(&args).stdout);
}

#[test]
fn exit_codes_by_error_class() {
    let arity = mpe(&["run", "coins", "--policies", "random,random,random"]);
    assert_eq!(arity.status.code(), Some(4));
    let unknown = mpe(&["run", "no_such_substrate"]);
    assert_eq!(unknown.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&unknown.stderr);
    assert!(msg.contains("coins") && msg.contains("clean_up"), "{msg}");
    let scenario = mpe(&["eval", "--scenario", "clean_up/SC99", "--out", "/tmp/unused"]);
    assert_eq!(scenario.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let io = mpe(&["render", "coins", "--max-steps", "2", "--out", s(&blocker.join("frames"))]);
    assert_eq!(io.status.code(), Some(3));
}

#[test]
fn eval_clean_up_gives_nine_rows_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&["eval", "--scenario", "clean_up", "--episodes", "1", "--max-steps", "100", "--jobs", "2", "--out", s(&out)]);
        out
    };
    let (a, b) = (run("a"), run("b"));
    let report = json(&a.join("report.json"));
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 9);
    assert!(reports.iter().all(|r| r["episodes"] == 1));
    assert_eq!(report["substrates"]["clean_up"]["scenarios"], 9);

    let csv = std::fs::read_to_string(a.join("episodes.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# mpe "));
    assert_eq!(lines[1], "scenario,seed,focal_pc,background_pc,gini,collective");
    assert_eq!(lines.len(), 2 + 9);
    let body = |p: &Path| std::fs::read_to_string(p.join("episodes.csv")).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a), body(&b));
}

#[test]
fn eval_jobs_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(jobs);
        ok(&["eval", "--scenario", "coins/SC0", "--episodes", "4", "--max-steps", "200", "--jobs", jobs, "--out", s(&out)]);
        let csv = std::fs::read_to_string(out.join("episodes.csv")).unwrap();
        bodies.push(csv.lines().skip(1).map(str::to_owned).collect::<Vec<_>>());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[0].len(), 5);
}

fn write_eval(path: &Path, rows: &[(&str, f64)]) {
    let mut text = String::from("# mpe test\nscenario,seed,focal_pc,background_pc,gini,collective\n");
    for (sc, x) in rows {
        text += &format!("{sc},0,{x},,,0\n");
    }
    std::fs::write(path, text).unwrap();
}

fn table(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn normalize_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    write_eval(&p("good.csv"), &[("coins/SC0", 10.0), ("coins/SC1", 4.0)]);
    write_eval(&p("bad.csv"), &[("coins/SC0", 1.0), ("coins/SC1", -2.0)]);
    write_eval(&p("mid.csv"), &[("coins/SC0", 7.75), ("coins/SC1", 2.5)]);

    let two = table(&ok(&["normalize", s(&p("good.csv")), s(&p("bad.csv"))]));
    assert_eq!(two[0], ["agent", "coins/SC0", "coins/SC1", "coins"]);
    assert_eq!(two[1], ["good", "1", "1", "1"]);
    assert_eq!(two[2], ["bad", "0", "0", "0"]);

    let three = table(&ok(&["normalize", s(&p("good.csv")), s(&p("bad.csv")), s(&p("mid.csv"))]));
    assert_eq!(three[3], ["mid", "0.75", "0.75", "0.75"]);

    write_eval(&p("short.csv"), &[("coins/SC0", 3.0)]);
    let err = mpe(&["normalize", s(&p("good.csv")), s(&p("short.csv"))]);
    assert_eq!(err.status.code(), Some(4));
    let msg = String::from_utf8_lossy(&err.stderr);
    assert!(msg.contains("short lacks coins/SC1"), "{msg}");

    assert_eq!(mpe(&["normalize", s(&p("good.csv"))]).status.code(), Some(4));
}

#[test]
fn normalize_reads_eval_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for focal in ["random", "noop"] {
        let out = dir.path().join(focal);
        ok(&["eval", "--scenario", "coins", "--focal", focal, "--episodes", "1", "--max-steps", "100", "--out", s(&out)]);
        let csv = dir.path().join(format!("{focal}.csv"));
        std::fs::copy(out.join("episodes.csv"), &csv).unwrap();
        files.push(csv);
    }
    let t = table(&ok(&["normalize", s(&files[0]), s(&files[1])]));
    assert_eq!(t.len(), 3);
    for row in &t[1..] {
        for x in &row[1..] {
            let v: f64 = x.parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
}

fn png_info(path: &Path) -> (u32, u32, Vec<(String, String)>) {
    let dec = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(path).unwrap()));
    let reader = dec.read_info().unwrap();
    let info = reader.info();
    let text = info.uncompressed_latin1_text.iter().map(|t| (t.keyword.clone(), t.text.clone())).collect();
    (info.width, info.height, text)
}

#[test]
fn render_writes_reset_frame_plus_one_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["render", "coins", "--seed", "5", "--max-steps", "100", "--out", s(out)]);
    }
    let mut names: Vec<String> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 101);
    assert_eq!(names[0], "frame_00000.png");
    assert_eq!(names[100], "frame_00100.png");

    let reg = mpe_core::Registry::builtin();
    let layout = reg.map(&reg.substrate_config("coins").unwrap().map).unwrap();
    let (w, h, text) = png_info(&a.join("frame_00000.png"));
    assert_eq!((w as i32, h as i32), (layout.width * 8, layout.height * 8));
    assert!(text.iter().any(|(k, v)| k == "mpe-version" && v == mpe_core::VERSION));
    assert!(text.iter().any(|(k, v)| k == "manifest" && v.contains("\"render\"")));

    // frames embed the output path, so compare pixels
    let pixels = |p: &Path| {
        let mut r = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(p).unwrap())).read_info().unwrap();
        let mut buf = vec![0; r.output_buffer_size().unwrap()];
        r.next_frame(&mut buf).unwrap();
        buf
    };
    for n in [&names[0], &names[50], &names[100]] {
        assert_eq!(pixels(&a.join(n)), pixels(&b.join(n)));
    }
}

#[test]
fn render_scenario_is_byte_identical_for_same_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    ok(&["render", "--scenario", "clean_up/SC2", "--seed", "1", "--max-steps", "5", "--out", s(&out)]);
    let first: Vec<Vec<u8>> = (0..6).map(|i| std::fs::read(out.join(format!("frame_{i:05}.png"))).unwrap()).collect();
    ok(&["render", "--scenario", "clean_up/SC2", "--seed", "1", "--max-steps", "5", "--out", s(&out)]);
    for (i, f) in first.iter().enumerate() {
        assert_eq!(f, &std::fs::read(out.join(format!("frame_{i:05}.png"))).unwrap());
    }
}

#[test]
fn config_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("over.toml");
    std::fs::write(&cfg, "[coins.termination]\nmax_steps = 42\n").unwrap();
    let out = dir.path().join("r.json");
    ok(&["run", "coins", "--config", s(&cfg), "--out", s(&out)]);
    let v = json(&out);
    assert_eq!(v["steps"], 42);
    assert_eq!(v["manifest"]["config"]["overrides"]["coins"]["termination"]["max_steps"], 42);

    std::fs::write(&cfg, "[nowhere]\nx = 1\n").unwrap();
    assert_eq!(mpe(&["run", "coins", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn list_and_bench() {
    let out = String::from_utf8(ok(&["list"]).stdout).unwrap();
    assert!(out.contains("substrate coins"));
    assert!(out.contains("scenario clean_up/SC8"));
    assert!(out.contains("bot tit_for_tat"));
    let b = ok(&["bench", "--substrate", "commons_harvest_open", "--steps", "200"]);
    let v: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    let r = &v["results"][0];
    assert_eq!(r["substrate"], "commons_harvest_open");
    assert!(r["player_steps_per_sec"].as_f64().unwrap() > 0.0);
}
