use std::fmt::Write as _;
use std::path::Path;

use quasiline_core::convexcalc::{vul_integral_verdict, young_fenchel_gap, Extension, PlConvex};
use quasiline_core::cosxform::{cosine_grid, stieltjes_grid};
use quasiline_core::densitylab::{
    determinacy_report, distances_with, lognormal_moments, moment_digits, stieltjes_discrete, target_battery, bits_for, Discrete,
    MeasureInput, PositiveMeasure,
};
use quasiline_core::mandelbrojt::{counterexample, CounterexampleOptions, Part};
use quasiline_core::measures::SignedMeasure;
use quasiline_core::quasidc::{
    bk_series_verdict, dc_divergence_verdict, hall_verdict, ostrowski_consistency, ostrowski_csv, theorem2_verdict, Branch,
    HallExponent, TwoSidedWeight,
};
use quasiline_core::report::{fmt_num, EstimateReport};
use quasiline_core::vulproof::{proof_chain, ChainOptions, IOptions};
use quasiline_core::Execution;

use crate::artifacts::Artifacts;
use crate::{CliError, Cmd, Common, PartArg, TransformKind};

fn exec(c: &Common) -> Execution {
    if c.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn grid_or(c: &Common, default: &[f64]) -> Vec<f64> {
    c.grid.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| default.to_vec())
}

fn load<T>(art: &mut Artifacts, path: &Path, parse: impl Fn(&str) -> quasiline_core::Result<T>) -> Result<T, CliError> {
    let text = art.read(path)?;
    parse(&text).map_err(|err| CliError::File { path: path.to_path_buf(), err })
}

fn start(common: &Common, name: &str) -> Result<Artifacts, CliError> {
    if !(common.tolerance > 0.0) {
        return Err(CliError::Input(format!("--tolerance must be positive, got {}", common.tolerance)));
    }
    let mut art = Artifacts::new(&common.out, name)?;
    art.param("tolerance", fmt_num(common.tolerance));
    if let Some(g) = &common.grid {
        art.param("grid", g.0.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>());
    }
    Ok(art)
}

fn report_line(r: &EstimateReport) -> String {
    format!(
        "{}: {} ({} rows, {} failing, min margin {})\n",
        r.name,
        if r.all_pass() { "pass" } else { "FAIL" },
        r.rows.len(),
        r.failures(),
        fmt_num(r.min_margin())
    )
}

/// Runs one command; `Ok(pass)` reports whether every check held.
pub fn run(cmd: Cmd) -> Result<bool, CliError> {
    match cmd {
        Cmd::Conjugate { p, common } => conjugate(&p, &common),
        Cmd::Verdict { p, weight, kmax, common } => verdict(p.as_deref(), weight.as_deref(), kmax, &common),
        Cmd::Transform { measure, kind, common } => transform(&measure, kind, &common),
        Cmd::Thm2 { weight, common } => thm2(&weight, &common),
        Cmd::Vulchain { measure, p, cert_scale, no_carleman, common } => vulchain(&measure, &p, cert_scale, no_carleman, &common),
        Cmd::Counterexample { p, rmax, xmax, part, common } => counter(&p, rmax, xmax, part, &common),
        Cmd::Density { measure, weight, precision, nmax, common } => density(&measure, &weight, precision, nmax, &common),
        Cmd::MomentReport { moments, lognormal, weight, precision, nmax, common } => {
            moment_report(moments.as_deref(), lognormal, &weight, precision, nmax, &common)
        }
    }
}

fn conjugate(p_path: &Path, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "conjugate")?;
    let p = load(&mut art, p_path, PlConvex::parse)?;
    let ps = p.conjugate()?;
    // a tailed conjugate is not conjugated again
    let involution = match p.extension() {
        Extension::Tail(_) => None,
        _ => Some(ps.conjugate()? == p.canonical()),
    };
    let ts = grid_or(common, &(0..=40).map(|i| i as f64 * 0.25).collect::<Vec<_>>());
    let mut csv = String::from("t,p,p_star\n");
    for &t in &ts {
        let _ = writeln!(csv, "{},{},{}", fmt_num(t), fmt_num(p.value(t)), fmt_num(ps.value(t)));
    }
    let mut gap_min = f64::INFINITY;
    for &s in &ts {
        for &x in &ts {
            let (g, flagged) = young_fenchel_gap(&p, &ps, s, x);
            if !flagged {
                gap_min = gap_min.min(g);
            }
        }
    }
    let pass = involution != Some(false) && gap_min >= -1e-12;
    let inv = involution.map_or("not checked (tail)".to_string(), |b| b.to_string());
    let summary = format!("involution exact: {inv}\nmin Young-Fenchel gap on grid pairs: {}\n", fmt_num(gap_min));
    art.write("conjugate.txt", &ps.to_text())?;
    art.write("conjugate.csv", &csv)?;
    art.write("summary.txt", &summary)?;
    print!("{summary}");
    art.finish(pass)?;
    Ok(pass)
}

fn verdict(p: Option<&Path>, weight: Option<&Path>, kmax: usize, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "verdict")?;
    art.param("kmax", kmax);
    let mut text = String::new();
    let mut pass = true;
    match (p, weight) {
        (Some(p), _) => {
            let p = load(&mut art, p, PlConvex::parse)?;
            let v = vul_integral_verdict(&p)?;
            let _ = writeln!(text, "int p(s)/s^3 ds: {} ({})", v.kind, v.witness);
        }
        (None, Some(w)) => {
            let wt = load(&mut art, w, TwoSidedWeight::parse)?;
            let r = hall_verdict(&wt.qbranch, Branch::Right, HallExponent::ThreeHalves)?;
            let _ = writeln!(text, "right branch, int log W lambda^(-3/2): {} ({})", r.kind, r.witness);
            let l = hall_verdict(&wt.p0branch, Branch::Left, HallExponent::Two)?;
            let _ = writeln!(text, "left branch, int log W(-lambda) lambda^(-2): {} ({})", l.kind, l.witness);
            let s = bk_series_verdict(&wt.qbranch)?;
            let _ = writeln!(text, "series: {} ({})", s.kind, s.witness);
            match dc_divergence_verdict(&wt, 0.0, kmax) {
                Ok(dc) => {
                    let mut csv = String::from("k,partial_sum\n");
                    for (k, v) in &dc.partial_sums {
                        let _ = writeln!(csv, "{k},{}", fmt_num(*v));
                    }
                    art.write("dc_partial_sums.csv", &csv)?;
                }
                Err(e) => {
                    let _ = writeln!(text, "partial sums skipped: {e}");
                }
            }
            if let Ok(row) = ostrowski_consistency(&wt.qbranch) {
                let _ = writeln!(text, "integral and series agree: {}", row.agree);
                pass = row.agree;
                art.write("ostrowski.csv", &ostrowski_csv(&[row]))?;
            }
        }
        (None, None) => return Err(CliError::Input("verdict needs --p or --weight".into())),
    }
    art.write("verdict.txt", &text)?;
    print!("{text}");
    art.finish(pass)?;
    Ok(pass)
}

fn transform(m: &Path, kind: TransformKind, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "transform")?;
    art.param("kind", format!("{kind:?}").to_lowercase());
    let sigma = load(&mut art, m, SignedMeasure::parse)?;
    let xs = grid_or(common, &(0..=16).map(|i| i as f64 * 0.25).collect::<Vec<_>>());
    let g = match kind {
        TransformKind::Cosine => cosine_grid(&sigma, &xs, exec(common))?,
        TransformKind::Stieltjes => stieltjes_grid(&sigma, &xs, exec(common))?,
    };
    art.write("transform.csv", &g.to_csv())?;
    println!("{} points written", xs.len());
    art.finish(true)?;
    Ok(true)
}

fn thm2(w: &Path, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "thm2")?;
    let wt = load(&mut art, w, TwoSidedWeight::parse)?;
    let v = theorem2_verdict(&wt)?;
    let text = v.to_text();
    art.write("thm2.txt", &text)?;
    print!("{text}");
    art.finish(true)?;
    Ok(true)
}

fn vulchain(m: &Path, p: &Path, cert_scale: f64, no_carleman: bool, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "vulchain")?;
    art.param("cert_scale", fmt_num(cert_scale));
    art.param("carleman", !no_carleman);
    let sigma = load(&mut art, m, SignedMeasure::parse)?;
    let p = load(&mut art, p, PlConvex::parse)?;
    let xs = grid_or(common, &[-4.0, -16.0, -64.0, -256.0, -1024.0]);
    let mut opts = ChainOptions {
        i: IOptions { tol: common.tolerance, exec: exec(common), ..IOptions::default() },
        cert_scale,
        ..ChainOptions::default()
    };
    if no_carleman {
        opts.carleman = None;
    }
    let rep = proof_chain(&sigma, &p, &xs, &opts)?;
    let mut summary = String::new();
    for r in rep.reports() {
        art.write(&format!("{}.csv", r.name), &r.to_csv_with_constant())?;
        summary.push_str(&report_line(r));
    }
    let c = &rep.certificate;
    let cert = format!(
        "C_dec {}\nC_maj {}\nC_tv {}\nC_i1 {}\nC_final {}\n",
        fmt_num(c.dec.constant),
        fmt_num(c.c_maj),
        fmt_num(c.c_tv),
        fmt_num(c.c_i1()),
        fmt_num(c.c_final())
    );
    art.write("certificate.txt", &cert)?;
    let (res, bound) = rep.ibounds.residual;
    let _ = writeln!(summary, "cosine residual on [0, max u*]: {} (bound {})", fmt_num(res), fmt_num(bound));
    if let Some(t) = &rep.carleman {
        let mut csv = String::from("xmin,value,error,clamped\n");
        for (x, v) in &t.partials {
            let _ = writeln!(csv, "{},{},{},{}", fmt_num(*x), fmt_num(v.value), fmt_num(v.error), v.clamped);
        }
        art.write("carleman.csv", &csv)?;
        let _ = writeln!(summary, "log-integral trend: {} against verdict {} (consistent: {}, evidence only)", t.trend, t.verdict.kind, t.consistent);
    }
    let pass = rep.all_pass();
    art.write("summary.txt", &summary)?;
    print!("{summary}");
    art.finish(pass)?;
    Ok(pass)
}

fn counter(p: &Path, rmax: f64, xmax: f64, part: PartArg, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "counterexample")?;
    art.param("rmax", fmt_num(rmax));
    art.param("xmax", fmt_num(xmax));
    art.param("part", format!("{part:?}").to_lowercase());
    let p = load(&mut art, p, PlConvex::parse)?;
    let opts = CounterexampleOptions {
        rmax,
        xmax,
        part: match part {
            PartArg::Re => Part::Re,
            PartArg::Im => Part::Im,
        },
        exec: exec(common),
        ..CounterexampleOptions::default()
    };
    let xs = grid_or(common, &(0..=8).map(|i| xmax * i as f64 / 8.0).collect::<Vec<_>>());
    let growth: Vec<f64> = [0.0, 1.0, 2.0, 4.0].into_iter().filter(|&x| x <= xmax).collect();
    let run = counterexample(&p, &opts, &xs, &growth)?;
    let sigma = &run.measure.sigma;
    let text = sigma.to_text();
    let round_trip = SignedMeasure::parse(&text).map(|s| &s == sigma).unwrap_or(false);
    let tv = sigma.total_variation();
    art.write("sinc_product.txt", &run.measure.product.to_text())?;
    art.write("measure.txt", &text)?;
    let mut summary = String::new();
    for r in [&run.bound, &run.annihilation, &run.growth] {
        art.write(&format!("{}.csv", r.name), &r.to_csv_with_constant())?;
        summary.push_str(&report_line(r));
    }
    let _ = writeln!(
        summary,
        "L = {}, sum n a = {}, total variation {}, growth constant {}, measure round trip: {round_trip}",
        fmt_num(run.measure.lambda),
        fmt_num(run.measure.product.exponent_type()),
        fmt_num(tv),
        fmt_num(run.growth_constant)
    );
    let pass = run.all_pass() && round_trip && tv > 1e-2;
    art.write("summary.txt", &summary)?;
    print!("{summary}");
    art.finish(pass)?;
    Ok(pass)
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

fn density(m: &Path, w: &Path, digits: u32, nmax: usize, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "density")?;
    art.param("precision", digits);
    art.param("nmax", nmax);
    let sigma = load(&mut art, m, SignedMeasure::parse)?;
    let wt = load(&mut art, w, TwoSidedWeight::parse)?;
    let mu = PositiveMeasure::new(sigma)?;
    let rep = determinacy_report(&MeasureInput::Measure(mu.clone()), &wt, nmax, digits)?;
    let d = Discrete::new(&mu.discretize(), digits);
    let rec = stieltjes_discrete(&d, nmax)?;
    let ns: Vec<usize> = (0..=nmax).collect();
    let battery = target_battery();
    let mut cols = Vec::new();
    for (_, f) in &battery {
        cols.push(distances_with(&d, &rec, f, &ns)?);
    }
    let mut csv = String::from("n,rho_n");
    for (name, _) in &battery {
        let _ = write!(csv, ",dist_{name}");
    }
    csv.push('\n');
    for n in 0..=nmax {
        let _ = write!(csv, "{n},{}", fmt_num(rep.rho[n]));
        for c in &cols {
            let _ = write!(csv, ",{}", fmt_num(c[n]));
        }
        csv.push('\n');
    }
    let dist_ok = cols.iter().all(|c| nonincreasing(c));
    let mut text = rep.to_text();
    for ((name, _), c) in battery.iter().zip(&cols) {
        let _ = writeln!(text, "distance to {name} at n = {nmax}: {}", fmt_num(c[nmax]));
    }
    let pass = rep.rho_nonincreasing && dist_ok;
    art.write("density.txt", &text)?;
    art.write("density.csv", &csv)?;
    print!("{text}");
    art.finish(pass)?;
    Ok(pass)
}

fn parse_moments(text: &str, prec: u32) -> quasiline_core::Result<Vec<rug::Float>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = rug::Float::parse(line).map_err(|_| quasiline_core::Error::parse(i + 1, format!("bad moment '{line}'")))?;
        out.push(rug::Float::with_val(prec, v));
    }
    Ok(out)
}

fn moment_report(moments: Option<&Path>, lognormal: bool, w: &Path, digits: u32, nmax: usize, common: &Common) -> Result<bool, CliError> {
    let mut art = start(common, "moment-report")?;
    let digits = moment_digits(nmax, digits);
    art.param("precision", digits);
    art.param("nmax", nmax);
    art.param("lognormal", lognormal);
    let ms = match moments {
        Some(path) => load(&mut art, path, |t| parse_moments(t, bits_for(digits)))?,
        None => lognormal_moments(2 * nmax + 2, digits),
    };
    let wt = load(&mut art, w, TwoSidedWeight::parse)?;
    let rep = determinacy_report(&MeasureInput::Moments(ms), &wt, nmax, digits)?;
    let text = rep.to_text();
    art.write("moment_report.txt", &text)?;
    art.write("moment.csv", &rep.rho_csv())?;
    print!("{text}");
    let pass = rep.rho_nonincreasing;
    art.finish(pass)?;
    Ok(pass)
}
