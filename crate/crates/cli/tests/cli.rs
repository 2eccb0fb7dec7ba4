use std::process::{Command, Output};

const AC4: &[&str] = &["--rank", "1", "--gamma", "0.7", "--kappa", "-1.6", "--alpha2", "-0.85", "--m2", "0.7142857142857143"];

fn toda(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_toda"));
    cmd.args(args).env_remove("TODA_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn special_upsilon_emits_value() {
    let o = toda(&["special", "--fn", "upsilon", "--z", "2.1", "--gamma", "0.8"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("{\"value_re\":"), "{out}");
    assert!(out.contains("\"value_im\":"));
    assert!(out.contains("\"params\":{"));
}

#[test]
fn verify_on_rank_one_parameters_passes() {
    let o = toda(&with(&["verify"], AC4), &[]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("\"pass\":true"), "{out}");
}

#[test]
fn verify_against_recurrence_passes() {
    let o = toda(&with(&["verify", "--closed", "recurrence"], AC4), &[]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("\"pass\":true"));
}

#[test]
fn divergent_integral_is_refused_with_margins() {
    let o = toda(&["df", "--rank", "1", "--gamma", "0.7", "--kappa", "0.5", "--alpha2", "0.3"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.contains("\"infinity_margins\":[-"), "{out}");
}

#[test]
fn missing_gamma_is_a_usage_error() {
    let o = toda(&["df", "--rank", "1", "--kappa", "-1.6", "--alpha2", "-0.85"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = toda(&["df", "--beta", "1"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--beta"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = std::env::temp_dir().join(format!("toda-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ac4.cfg");
    std::fs::write(&path, "gamma = 0.8  # replaced below\nrank=1\nkappa=-1.6\nalpha2=-0.85\nclosed=recurrence\n").unwrap();
    let o = toda(&["verify", "--config", path.to_str().unwrap(), "--gamma", "0.7"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"gamma\":6.9999999999999996e-1"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_falls_back_to_environment() {
    let o = toda(&["special", "--fn", "l", "--z", "0.3"], &[("TODA_SEED", "11")]);
    assert!(stdout(&o).contains("\"seed\":11"));
    let o = toda(&["special", "--fn", "l", "--z", "0.3", "--seed", "5"], &[("TODA_SEED", "11")]);
    assert!(stdout(&o).contains("\"seed\":5"));
}

#[test]
fn csv_columns_are_fixed() {
    let o = toda(&["special", "--fn", "l", "--z", "0.3", "--output", "csv"], &[]);
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    assert!(header.ends_with("value_re,value_im,stderr,method,seed"), "{header}");
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = [
        "verify", "--rank", "2", "--gamma", "0.8", "--kappa", "-1.25", "--alpha2", "-1.8166666666666667,-1.5333333333333334", "--m2",
        "0.41666666666666667,0.83333333333333333", "--closed", "recurrence", "--policy", "mc", "--samples", "65536", "--seed", "42",
    ];
    let runs: Vec<Output> = ["1", "4", "16"].iter().map(|t| toda(&args, &[("RAYON_NUM_THREADS", t)])).collect();
    for r in &runs {
        assert!(r.status.code() == Some(0) || r.status.code() == Some(1));
        assert_eq!(r.stdout, runs[0].stdout);
    }
}
