use std::path::PathBuf;
use std::process::{Command, Output};

use subred::cli::{run_sweep, SweepFamily, SweepSpec};
use subred::detect::Ensemble;
use subred::dump::{read_dump, Dump};

fn subred(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_subred"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("subred-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_suites_and_usage_errors() {
    for suite in ["clone", "exponents", "kernel", "diagonal", "it-bound"] {
        let out = subred(&["verify", suite], None);
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "{suite}: {text}");
        assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    }
    let out = subred(&["verify", "nonsense"], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn sweep_is_byte_identical_across_thread_counts() {
    let args = ["sweep", "--alphas", "0.3,1.2", "--betas", "0.4,0.6", "--n", "60", "--trials", "20", "--seed", "9"];
    let a = subred(&args, Some("1"));
    let b = subred(&args, Some("4"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("detector,n,k,family,param,skl,trials,type1,type2,total,stderr,seed,alpha,beta,regime,boundary_flag"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}

#[test]
fn sweep_easy_and_impossible_cells() {
    let spec = SweepSpec {
        family: SweepFamily::Bc,
        alphas: vec![0.3, 1.5],
        betas: vec![0.5, 0.7],
        n: 400,
        trials: 200,
        seed: 4,
        slack: None,
        ensemble: Ensemble::Ssd,
    };
    let rows = run_sweep(&spec).unwrap();
    for r in &rows {
        assert!(r.seed != 0 && r.slack > 1.0 && !r.param.is_empty());
        if r.alpha == 0.3 && r.beta == 0.7 && r.detector == "sum" {
            assert!(r.total <= 0.1, "{r:?}");
        }
        if r.alpha == 1.5 {
            assert_eq!(r.regime, "ImpossibleUC_C");
            assert!(r.total >= 0.8, "{r:?}");
        }
    }
}

#[test]
fn infeasible_gp_cells_are_flagged() {
    let spec = SweepSpec {
        family: SweepFamily::Gp { gamma: 0.2, c: 1.0 },
        alphas: vec![2.5],
        betas: vec![0.5],
        n: 100,
        trials: 5,
        seed: 1,
        slack: Some(10.0),
        ensemble: Ensemble::Ssd,
    };
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.status.starts_with("infeasible") && r.total.is_nan()));
}

#[test]
fn reduce_writes_dump_and_report() {
    let cfg = scratch("reduce.cfg");
    std::fs::write(&cfg, "n=8 k=2 N=60 ell=2 graph_p=1 graph_q=0.25\nfamily=gaussian mu=0.01\n").unwrap();
    let out_path = scratch("reduce.dump");
    let out = subred(
        &["reduce", cfg.to_str().unwrap(), "--sample", "planted", "--out", out_path.to_str().unwrap(), "--seed", "2"],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dump = read_dump(&mut std::io::BufReader::new(std::fs::File::open(&out_path).unwrap())).unwrap();
    match dump {
        Dump::Matrix(m) => assert_eq!(m.d(), 120),
        Dump::Graph(_) => panic!("expected a matrix dump"),
    }
    let report = std::fs::read_to_string(format!("{}.report.txt", out_path.display())).unwrap();
    assert!(report.contains("bound_null=") && report.contains("output_dim=120"));

    std::fs::write(&cfg, "n=8 k=2 N=20 ell=2 graph_p=1 graph_q=0.25 family=gaussian mu=0.01").unwrap();
    let out = subred(
        &["reduce", cfg.to_str().unwrap(), "--sample", "planted", "--out", out_path.to_str().unwrap()],
        None,
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("k <= Q eps n / 2"));
}

#[test]
fn reduce_reads_graph_dump() {
    let mut rng = subred::rng::stream_rng(1, &[]);
    let g = subred::sampler::sample_er(8, 0.25, &mut rng).unwrap();
    let graph_path = scratch("input.graph");
    let mut f = std::fs::File::create(&graph_path).unwrap();
    subred::dump::write_graph(&mut f, &g).unwrap();
    let cfg = scratch("reduce2.cfg");
    std::fs::write(&cfg, "n=8 k=1 N=40 ell=1 graph_p=1 graph_q=0.25 family=bernoulli p=1 q=0.5").unwrap();
    let out_path = scratch("reduce2.dump");
    let out = subred(
        &["reduce", cfg.to_str().unwrap(), "--input", graph_path.to_str().unwrap(), "--out", out_path.to_str().unwrap()],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exponents_table() {
    let out = subred(&["exponents", "family=gaussian mu=1", "--points", "5"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("tau,E_P,E_Q"));
    assert!(text.lines().any(|l| l == "0,0.125,0.125"), "{text}");
}
