use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stgan-nd"));
    c.env_remove("STGAN_ND_SEED");
    c
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = walk(dir).into_iter().map(|p| p.strip_prefix(dir).unwrap().display().to_string()).collect();
    v.sort();
    v
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn synth_shape_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&["synth", "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["synth", "--seed", "4", "--out", b.to_str().unwrap()]).0, 0);
    let ta = std::fs::read_to_string(a.join("dataset.csv")).unwrap();
    let tb = std::fs::read_to_string(b.join("dataset.csv")).unwrap();
    assert_eq!(ta.lines().count(), 881);
    assert_eq!(tb.lines().count(), 881);
    assert_ne!(ta, tb);

    let c = dir.path().join("c");
    assert_eq!(run(&["synth", "--synth-spec", "3,7,5", "--out", c.to_str().unwrap()]).0, 0);
    let tc = std::fs::read_to_string(c.join("dataset.csv")).unwrap();
    assert_eq!(tc.lines().count(), 22);
    assert_eq!(tc.lines().next().unwrap(), "ch0,ch1,ch2,ch3,ch4,label");
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&["synth", "--seed", "9", "--out", a.to_str().unwrap()]).0, 0);
    let status = bin()
        .env("STGAN_ND_SEED", "9")
        .args(["synth", "--out", b.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        std::fs::read(a.join("dataset.csv")).unwrap(),
        std::fs::read(b.join("dataset.csv")).unwrap()
    );
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["train", "--out", o]).0, 1);
    assert_eq!(run(&["train", "--synth-spec", "8,110,16", "--out", o]).0, 1);
    assert_eq!(run(&["train", "--synth-spec", "8,110,16", "--novel-classes", "7", "--batch-size", "31", "--out", o]).0, 1);
    assert_eq!(run(&["train", "--synth-spec", "8,110,16", "--novel-classes", "9", "--out", o]).0, 1);
    assert_eq!(run(&["train", "--variant", "test_9", "--out", o]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert!(!out.exists(), "nothing is written when validation fails");
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn train_evaluate_distances_generate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = out.to_str().unwrap();
    let (code, err) = run(&[
        "train", "--synth-spec", "8,110,16", "--novel-classes", "7", "--variant", "test_2", "--epochs", "4",
        "--seed", "3", "--out", o,
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(run(&["evaluate", "--run", o]).0, 0);
    assert_eq!(run(&["distances", "--run", o, "--n", "50"]).0, 0);
    assert_eq!(run(&["generate", "--run", o, "--class", "2", "--n", "5"]).0, 0);

    let eval = std::fs::read_to_string(out.join("evaluation.csv")).unwrap();
    let rows: Vec<&str> = eval.lines().collect();
    assert_eq!(rows[0], "variant,target_gca,tau,class,others,mean_balanced,mean_weighted,auc");
    assert_eq!(rows.len(), 4);
    let zero: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(zero[2], "0.0");
    assert_eq!(zero[4], "0.0", "Others is 0 at tau = 0");
    assert!(std::fs::read_to_string(out.join("roc.csv")).unwrap().starts_with("fpr,tpr,threshold\n"));
    let dist = std::fs::read_to_string(out.join("distances.csv")).unwrap();
    assert_eq!(dist.lines().count(), 8);
    assert!(dist.lines().skip(1).all(|l| l.split(',').all(|c| !c.is_empty())));
    let samples = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 6);
    assert!(samples.lines().skip(1).all(|l| l.ends_with(",2")));

    assert_eq!(
        files(&out),
        vec![
            "classifier.json", "discriminator.json", "distances.csv", "evaluation.csv", "generator.json",
            "loss_history.csv", "manifest.json", "report.json", "roc.csv", "samples.csv",
        ]
    );
    assert_eq!(files(dir.path()).len(), 10, "nothing outside the run directory");
}

#[test]
fn generate_is_deterministic_and_accepts_mixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(
        run(&["train", "--synth-spec", "4,20,6", "--novel-classes", "3", "--epochs", "2", "--out", o]).0,
        0
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        assert_eq!(run(&["generate", "--run", o, "--class", "1", "--n", "7", "--seed", "4", "--out", d.to_str().unwrap()]).0, 0);
    }
    assert_eq!(std::fs::read(a.join("samples.csv")).unwrap(), std::fs::read(b.join("samples.csv")).unwrap());
    let m = dir.path().join("m");
    let (code, err) = run(&[
        "generate", "--run", o, "--target", "0.34,0.33,0.33", "--n", "3", "--out", m.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read_to_string(m.join("samples.csv")).unwrap().lines().count(), 4);
    assert_eq!(run(&["generate", "--run", o, "--class", "3"]).0, 1, "novel class cannot be generated");
    assert_eq!(run(&["generate", "--run", o, "--target", "0.5,0.5"]).0, 1);
}

#[test]
fn distances_without_generator_omit_gan_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let (code, err) = run(&[
        "distances", "--synth-spec", "4,20,6", "--novel-classes", "0", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(err.contains("warning"));
    let text = std::fs::read_to_string(out.join("distances.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "1", "original class labels are reported");
    assert!(first[3].is_empty() && first[4].is_empty());
}

#[test]
fn parallel_variants_get_their_own_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let (code, err) = run(&[
        "train", "--synth-spec", "4,20,6", "--novel-classes", "3", "--variant", "baseline_a,test_1a", "--jobs", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    for v in ["baseline_a", "test_1a"] {
        let m = std::fs::read_to_string(out.join(v).join("manifest.json")).unwrap();
        assert!(m.contains(&format!("\"variant\": \"{v}\"")));
        assert!(std::fs::read_to_string(out.join(v).join("loss_history.csv")).unwrap().starts_with("epoch,train_loss,val_loss\n"));
    }
}
