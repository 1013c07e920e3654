use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netfeed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netfeed")).args(args).output().unwrap()
}

fn smoke(out: &Path) -> Output {
    netfeed(&[
        "--agents",
        "6",
        "--arms",
        "5",
        "--horizon",
        "100",
        "--reps",
        "2",
        "--q-grid",
        "0.5,1",
        "--pnet-grid",
        "0.3",
        "--pfeed-grid",
        "0.3",
        "--out",
        out.to_str().unwrap(),
    ])
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((name, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn smoke_grid_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = smoke(dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "q,p_net,p_feed,coop_mean,coop_std,base_mean,base_std");
    assert_eq!(lines.len(), 3);
    assert!(dir.path().join("spec.txt").exists());
    let cell = dir.path().join("q0.5_pnet0.3_pfeed0.3");
    let traces = fs::read_to_string(cell.join("traces_coop.csv")).unwrap();
    assert_eq!(traces.lines().count(), 1 + 2 * 100);
    assert!(cell.join("traces_base.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(smoke(a.path()).status.success());
    assert!(smoke(b.path()).status.success());
    // spec.txt echoes the output directory, which differs by construction
    let strip = |dir: &Path| {
        let mut files = snapshot(dir);
        for (name, bytes) in &mut files {
            if name == "spec.txt" {
                let text = String::from_utf8(bytes.clone()).unwrap();
                *bytes = text
                    .lines()
                    .filter(|l| !l.starts_with("out="))
                    .collect::<Vec<_>>()
                    .join("\n")
                    .into_bytes();
            }
        }
        files
    };
    let (x, y) = (strip(a.path()), strip(b.path()));
    assert!(x.len() > 3);
    assert_eq!(x, y);
}

#[test]
fn malformed_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    fs::write(&path, "# grid\nreps=2\nhorizon: 100\n").unwrap();
    let out = netfeed(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = netfeed(&["--verify", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.starts_with("check,instances,failures,max_violation"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("0")), "{csv}");
}
