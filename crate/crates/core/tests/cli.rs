use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iemi-sim")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn unknown_key_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[sensor]\nbogus_key = 1.0\n");
    let o = run(&["sweep", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zero_duration_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[simulation]\nduration_s = 0.0\n");
    let o = run(&["simulate-sensor", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn touched_sensor_reaches_threshold() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[sensor]\npreset = \"table1\"\n[simulation]\ntouch_delta_c_f = 0.5e-12\n");
    let o = run(&["simulate-sensor", "--config", &cfg], d.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines = rows(&text);
    assert_eq!(lines[0], "time_s,v_o_v,sum_v_t_v");
    let peak = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(peak >= 2.75, "peak {peak}");
}

#[test]
fn empty_band_gives_header_only() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[sweep]\nband_low_hz = 500000.0\nband_high_hz = 100000.0\n");
    let o = run(&["sweep", "--config", &cfg], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# config_sha256="));
    assert_eq!(rows(&text).len(), 1);
}

#[test]
fn locate_on_empty_traces_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["gen-traces", "--out", "t"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Flatten every trace so no emission is ever visible.
    for e in std::fs::read_dir(d.path().join("t")).unwrap() {
        let p = e.unwrap().path();
        if p.file_name().unwrap().to_string_lossy().starts_with("trace_") {
            let text = std::fs::read_to_string(&p).unwrap();
            let flat: String = text
                .lines()
                .map(|l| if l.starts_with('#') || l.contains('=') { format!("{l}\n") } else { "0\n".to_string() })
                .collect();
            std::fs::write(&p, flat).unwrap();
        }
    }
    let o = run(&["locate", "--traces", "t"], d.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn outputs_carry_config_hash_and_seed() {
    let d = tempfile::tempdir().unwrap();
    let a = run(&["predict-frequencies", "--seed", "5"], d.path());
    let b = run(&["predict-frequencies", "--seed", "6"], d.path());
    let va: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let vb: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(va["seed"], 5);
    assert_eq!(va["config_sha256"].as_str().unwrap().len(), 64);
    assert_ne!(va["config_sha256"], vb["config_sha256"]);
    assert_eq!(va["result"], vb["result"]);
}
