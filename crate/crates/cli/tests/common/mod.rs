#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

/// Runs the binary with `args` plus `--out out`.
pub fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasiline"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

pub fn status(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Every file of a directory by name.
pub fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut m = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let p: PathBuf = e.unwrap().path();
        m.insert(p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap());
    }
    m
}

pub fn csvs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    files(dir).into_iter().filter(|(k, _)| k.ends_with(".csv")).collect()
}

/// One scenario per subcommand over the bundled inputs; `vulchain` reads
/// the measure written by `counterexample` into `measure_dir`.
pub fn scenarios(measure_dir: &Path) -> Vec<(&'static str, Vec<String>)> {
    let m = measure_dir.join("measure.txt").display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        ("counterexample", s(&["counterexample", "--p", &data("profile_counterexample.txt")])),
        ("conjugate_pl", s(&["conjugate", "--p", &data("profile_pl.txt")])),
        ("conjugate_square", s(&["conjugate", "--p", &data("profile_square.txt")])),
        ("verdict_p", s(&["verdict", "--p", &data("profile_counterexample.txt")])),
        ("verdict_weight", s(&["verdict", "--weight", &data("weight_dense.txt")])),
        ("transform_cosine", s(&["transform", "--measure", &data("measure_atoms.txt")])),
        ("transform_stieltjes", s(&["transform", "--measure", &data("measure_atoms.txt"), "--kind", "stieltjes", "--grid", "-4:4:9"])),
        ("thm2_dense", s(&["thm2", "--weight", &data("weight_dense.txt")])),
        ("thm2_notdense", s(&["thm2", "--weight", &data("weight_notdense.txt")])),
        ("thm2_inconclusive", s(&["thm2", "--weight", &data("weight_inconclusive.txt")])),
        ("vulchain", s(&["vulchain", "--measure", &m, "--p", &data("profile_counterexample.txt")])),
        ("density", s(&["density", "--measure", &data("measure_laplace.txt"), "--weight", &data("weight_density.txt"), "--nmax", "16"])),
        ("moment_report", s(&["moment-report", "--lognormal", "--weight", &data("weight_density.txt"), "--nmax", "16"])),
    ]
}
