use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path, seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cbdenoise"));
    cmd.args(args).current_dir(dir).env_remove("DENOISE_SEED");
    if let Some(s) = seed {
        cmd.env("DENOISE_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gaussian_prints_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gaussian", "--gamma", "3", "--output", "g.csv"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("compress_loss=0.5 compress_rate=1 bit indirect_loss=0.4375"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(
        csv,
        "gamma,compress_rate_bits,compress_loss,indirect_loss_at_rate,indirect_rate_at_loss_bits\n\
         3,1,0.5,0.4375,0.792481250361\n"
    );
}

#[test]
fn verify_rd_on_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "rd", "--k", "1"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS rd markov(0.2)/bsc(0.1) k=1"));
    let o = run(&["verify", "rd", "--suite", "--k", "2", "--output", "rd.csv"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 12);
    let csv = std::fs::read_to_string(dir.path().join("rd.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn achiever_flags_deficient_channel() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), "channel.p = 0.5\n").unwrap();
    let o = run(&["verify", "achiever", "--config", "c.cfg"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rank deficient"));
}

#[test]
fn figure_writes_csv_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figure", "bsc-hamming", "--output", "f.csv", "--gnuplot", "f.gp"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert!(csv.starts_with("alpha,bayes,theoretical,empirical,empirical_se,upper_bound\n"));
    assert_eq!(csv.lines().count(), 22);
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(v[1] <= v[2] && v[2] <= v[5]);
    }
    assert!(std::fs::read_to_string(dir.path().join("f.gp")).unwrap().contains("f.csv"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transmogrify"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.cfg"), "run.n = 100\nsource.p_s = 0.7\n").unwrap();
    let o = run(&["verify", "rd", "--config", "bad.cfg"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.cfg:2"), "{}", stderr(&o));

    let o = run(&["verify", "rd", "--config", "missing.cfg"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["verify", "rd", "--k", "20"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget exceeded"), "{}", stderr(&o));

    let o = run(&["gaussian"], dir.path(), Some("not-a-number"));
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("strict.cfg"), "mixing.k_max = 3\nmixing.tails = 32\ncheck.mixing_r2 = 1\n").unwrap();
    let o = run(&["verify", "mixing", "--config", "strict.cfg"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("FAIL mixing"));
}

#[test]
fn seed_override_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.cfg"), "run.n = 512\nrun.trials = 12\nrun.baseline_trials = 4\nrun.baseline_len = 256\n").unwrap();
    let go = |name: &str, threads: &str, seed: Option<&str>| {
        let o = run(
            &["run", "denoise", "--config", "d.cfg", "--threads", threads, "--output", name],
            dir.path(),
            seed,
        );
        assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let a = go("a.csv", "1", None);
    let b = go("b.csv", "3", None);
    assert_eq!(a, b);
    let c = go("c.csv", "2", Some("7"));
    let d = go("d.csv", "1", Some("7"));
    assert_eq!(c, d);
    assert_ne!(a, c);
}

#[test]
fn lemma_and_codebook_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "lemma"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bound=0.46"));
    std::fs::write(
        dir.path().join("cb.cfg"),
        "source.type = iid\nchannel.p = 0.2\nrun.denoiser = codebook\nrun.n = 256\nrun.trials = 40\n",
    )
    .unwrap();
    let o = run(&["run", "denoise", "--config", "cb.cfg", "--output", "cb.csv"], dir.path(), None);
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
    assert_eq!(stdout(&o).lines().count(), 2);
    let csv = std::fs::read_to_string(dir.path().join("cb.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
}
