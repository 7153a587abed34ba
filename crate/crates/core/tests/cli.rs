use std::process::{Command, Output};

fn dstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dstab")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = dstab(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn countcheck_small() {
    let out = stdout(&["countcheck", "--X", "1,2"]);
    assert!(out.starts_with("X,count,main_term,relative_error\n"));
    let counts: Vec<_> = rows(&out).iter().map(|r| r[1].clone()).collect();
    assert_eq!(counts, ["8", "150"]);
}

#[test]
fn delta_table() {
    let out = stdout(&["delta", "--ell", "5"]);
    let rows = rows(&out);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.last().unwrap() == "true"));
}

#[test]
fn census_p5() {
    let out = stdout(&["census", "--prime-bound", "5"]);
    let rows = rows(&out);
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[0] == "5" && r[4] == "true"));
}

#[test]
fn hurwitz_values() {
    let out = stdout(&["hurwitz", "--n", "3,4,23"]);
    assert_eq!(out, "n,H,six_h\n3,1/3,2\n4,1/2,3\n23,3,18\n");
}

#[test]
fn sieve_is_byte_deterministic() {
    let args = ["sieve", "--X", "6,10", "--samples", "2000", "--seed", "42"];
    let one = dstab(&[&args[..], &["--threads", "1"]].concat());
    let many = dstab(&[&args[..], &["--threads", "8"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stdout, dstab(&args).stdout);
}

#[test]
fn sieve_requires_seed() {
    let out = dstab(&["sieve", "--X", "8"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("error: InvalidConfig:"));
}

#[test]
fn error_classes() {
    let cases: [(&[&str], &str); 4] = [
        (&["delta", "--ell", "9"], "UnsupportedPrime"),
        (&["delta", "--d", "10"], "ZeroResidue"),
        (&["stability", "--X", "1", "--ell", "17"], "BudgetExceeded"),
        (&["decay", "--X", "2", "--curve", "-3,2"], "InvalidCurve"),
    ];
    for (args, class) in cases {
        let out = dstab(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with(&format!("error: {class}: ")), "{err}");
    }
}

#[test]
fn trace_cache_written_and_merged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.bin");
    let p = path.to_str().unwrap();
    stdout(&["trace", "--X", "1", "--prime-bound", "50", "--cache", p]);
    let first = dstab::store::TraceCache::load(&path).unwrap();
    stdout(&["trace", "--X", "2", "--prime-bound", "30", "--cache", p]);
    let merged = dstab::store::TraceCache::load(&path).unwrap();
    assert!(merged.len() > first.len());
    assert_eq!((merged.meta.height_bound, merged.meta.prime_bound), (2, 50));
    for ((a, b, p), v) in first.iter() {
        assert_eq!(merged.get(a, b, p), Some(v));
    }

    std::fs::write(&path, b"not a cache").unwrap();
    let out = dstab(&["trace", "--X", "1", "--cache", p]);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("error: CorruptFile:"));
}

#[test]
fn trace_csv_export() {
    let out = stdout(&["trace", "--X", "1", "--prime-bound", "7"]);
    assert!(out.starts_with("A,B,p,a_p\n"));
    assert!(out.contains("\n-1,-1,5,"));
}

#[test]
fn stability_summary_with_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let ranks = dir.path().join("ranks.csv");
    std::fs::write(&ranks, "A,B,rank\n-1,1,1\n1,1,1\n0,1,0\n").unwrap();
    let out = dstab(&["stability", "--X", "1", "--summary", "--ranks", ranks.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = &rows(&text)[0];
    assert_eq!(&row[..2], ["1", "5"]);
    assert_eq!(row[5], "8");
    assert!(row[4].parse::<u64>().unwrap() <= 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("Sha"));
}

#[test]
fn image_json_lines() {
    let out = stdout(&["image", "--X", "1", "--prime-bound", "500", "--format", "json"]);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0]["A"], -1);
    assert_eq!(lines[0]["target"], "GL2");
}
