use crate::args::*;
use crate::Failure;
use innerfn_core::sequences::{regular_punctured_runs, regularity_functional_runs, PointRuns};
use innerfn_core::*;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

type Res<T> = std::result::Result<T, Failure>;

pub fn run(cli: Cli) -> Res<()> {
    let out = cli.output;
    match cli.command {
        Command::Generate(a) => generate_cmd(a, &out),
        Command::Classify(a) => classify_cmd(a, &out),
        Command::Build(a) => build_cmd(a, &out),
        Command::Eval(a) => eval_cmd(a, &out),
        Command::Sup(a) => sup_cmd(a, &out),
        Command::Zeros(a) => zeros_cmd(a, &out),
        Command::Counterexample(a) => counterexample_cmd(a, &out),
        Command::Regularity(a) => regularity_cmd(a, &out),
        Command::Discrepancy(a) => discrepancy_cmd(a, &out),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Res<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(out: &Option<PathBuf>, v: &T) -> Res<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit(out, &s)
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn fields<T: std::str::FromStr>(text: &str, n: usize, what: &str) -> Res<Vec<T>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != n {
        return Err(Failure::Usage(format!("{what} must have {n} ':'-separated fields, got {text:?}")));
    }
    parts
        .iter()
        .map(|p| p.trim().parse::<T>().map_err(|_| Failure::Usage(format!("bad {what} field {p:?} in {text:?}"))))
        .collect()
}

fn index_window(text: &str) -> Res<IndexWindow> {
    let v: Vec<i64> = fields(text, 2, "window")?;
    if v[0] > v[1] {
        return Err(Failure::Usage(format!("window {text} is empty")));
    }
    Ok(IndexWindow::new(v[0], v[1]))
}

fn real_window(text: &str) -> Res<(f64, f64)> {
    let v: Vec<f64> = fields(text, 2, "window")?;
    if !(v[0] < v[1]) {
        return Err(Failure::Usage(format!("window {text} must satisfy lo < hi")));
    }
    Ok((v[0], v[1]))
}

fn load_sequence(path: &Path) -> Res<SeparatedSequence> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        SeparatedSequence::from_json(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    } else {
        Ok(SeparatedSequence::from_csv_str(&text)?)
    }
}

fn load_model(path: &Path) -> Res<InnerFunctionModel> {
    InnerFunctionModel::from_json(&read(path)?).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn eval_config(tol: &TolArgs, base: EvaluationConfig) -> Res<EvaluationConfig> {
    let mut cfg = base;
    if let Ok(v) = std::env::var("MIF_REL_TOLERANCE") {
        cfg.rel_tolerance = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("MIF_REL_TOLERANCE is not a number: {v:?}")))?;
    }
    if let Some(r) = tol.rel_tolerance {
        cfg.rel_tolerance = r;
    }
    if let Some(r) = tol.exclusion_radius {
        cfg.atom_exclusion_radius = Some(r);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn require<T>(v: Option<T>, flag: &str, family: &str) -> Res<T> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for the {family} family")))
}

fn generate_cmd(a: GenerateArgs, out: &Option<PathBuf>) -> Res<()> {
    let family = match a.family {
        FamilyName::Arithmetic => Family::Arithmetic,
        FamilyName::Power => Family::Power { k: require(a.k, "k", "power")? },
        FamilyName::Geometric => Family::Geometric { r: require(a.r, "r", "geometric")? },
        FamilyName::DoubleExponential => Family::DoubleExponential,
        FamilyName::LogGap => Family::LogGap { a1: a.a1, c: a.c },
        FamilyName::ClusterGap => {
            Family::ClusterGap { t1: a.t1, n: require(a.n, "N", "cluster-gap")?, d: require(a.d, "D", "cluster-gap")? }
        }
        FamilyName::RegularPunctured => Family::RegularPunctured,
    };
    let seq = generate(&family, index_window(&a.window)?)?;
    emit_json(out, &seq)
}

fn classify_cmd(a: ClassifyArgs, out: &Option<PathBuf>) -> Res<()> {
    let seq = load_sequence(&a.sequence)?;
    let mut cfg = ClassifyConfig::default();
    if let Some(m) = a.min_points {
        cfg.min_points = m;
    }
    if let Some(n) = a.n {
        cfg.counterexample_n = n;
    }
    cfg.counterexample_d = a.d.or(cfg.counterexample_d);
    emit_json(out, &classify(&seq, &cfg)?)
}

fn build_cmd(a: BuildArgs, out: &Option<PathBuf>) -> Res<()> {
    let seq = load_sequence(&a.sequence)?;
    let cfg = eval_config(&a.tol, EvaluationConfig::default())?;
    let model = if a.krein {
        if a.weights.is_some() {
            return Err(Failure::Usage("--weights cannot be combined with --krein".into()));
        }
        let window = match &a.window {
            Some(w) => index_window(w)?,
            None => {
                let (lo, hi) = seq.index_range();
                IndexWindow::new(lo, hi)
            }
        };
        krein_build(&seq, window, a.krein_c)?.with_exp_factor(a.exp_factor)?.with_config(cfg)?
    } else {
        let (strategy, weights) = match a.strategy {
            Strategy::Unit => (WeightStrategy::Unit, None),
            Strategy::Gap => (WeightStrategy::Gap, None),
            Strategy::Custom => {
                let path = a.weights.as_ref().ok_or_else(|| Failure::Usage("--weights is required for custom".into()))?;
                (WeightStrategy::Custom, Some(read_weights(path)?))
            }
        };
        let measure = build_measure(&seq, strategy, weights.as_deref())?;
        InnerFunctionModel::clark(measure, a.exp_factor, cfg)?
    };
    emit_json(out, &model)
}

fn read_weights(path: &Path) -> Res<Vec<f64>> {
    let mut w = Vec::new();
    for line in read(path)?.lines() {
        let f = line.split(',').next().unwrap_or("").trim();
        if f.is_empty() || f.starts_with('#') {
            continue;
        }
        w.push(f.parse().map_err(|_| Failure::Usage(format!("bad weight {f:?}")))?);
    }
    Ok(w)
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn eval_cmd(a: EvalArgs, out: &Option<PathBuf>) -> Res<()> {
    let model = load_model(&a.model)?;
    let cfg = eval_config(&a.tol, *model.config())?;
    let model = model.with_config(cfg)?;
    let g: Vec<f64> = fields(&a.grid, 3, "grid")?;
    let (lo, hi, step) = (g[0], g[1], g[2]);
    if !(lo <= hi) || !(step > 0.0) || !step.is_finite() {
        return Err(Failure::Usage(format!("grid {} needs lo <= hi and step > 0", a.grid)));
    }
    let count = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "theta_re", "theta_im", "phase_derivative", "branch"])?;
    let mut tolerance_met = true;
    for i in 0..count {
        let x = if i + 1 == count && (lo + step * i as f64 - hi).abs() <= 1e-9 * step { hi } else { lo + step * i as f64 };
        let b = model.boundary(x);
        if b.branch == Branch::Regular {
            tolerance_met &= model.theta_eval(Complex64::new(x, 0.0))?.tail.tolerance_met();
        }
        let branch = match b.branch {
            Branch::Regular => "regular",
            Branch::AtomLimit => "atom_limit",
        };
        w.write_record([sci(b.x), sci(b.theta.re), sci(b.theta.im), sci(b.phase_derivative), branch.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    emit(out, &String::from_utf8_lossy(&bytes))?;
    if !tolerance_met {
        return Err(Failure::Numeric("transform tail bound exceeds the requested tolerance".into()));
    }
    Ok(())
}

fn sup_cmd(a: SupArgs, out: &Option<PathBuf>) -> Res<()> {
    let model = load_model(&a.model)?;
    let mut report = model.sup_derivative(real_window(&a.window)?)?;
    if a.no_profile {
        report.profile.clear();
    }
    emit_json(out, &report)
}

fn zeros_cmd(a: ZerosArgs, out: &Option<PathBuf>) -> Res<()> {
    let model = load_model(&a.model)?;
    let region = match &a.region {
        Some(r) => {
            let v: Vec<f64> = fields(r, 4, "region")?;
            Some(Rect::new(v[0], v[1], v[2], v[3])?)
        }
        None => None,
    };
    let zs = find_zeros(&model, region)?;
    emit_json(out, &zs)?;
    if !zs.certified {
        return Err(Failure::Numeric(format!(
            "zero set not certified ({} found, {} by winding)",
            zs.zeros.len(),
            zs.certified_count
        )));
    }
    Ok(())
}

fn counterexample_cmd(a: CounterexampleArgs, out: &Option<PathBuf>) -> Res<()> {
    let strategy = match a.strategy {
        Strategy::Unit => WeightStrategy::Unit,
        Strategy::Gap => WeightStrategy::Gap,
        Strategy::Custom => return Err(Failure::Usage("counterexample strategy must be unit or gap".into())),
    };
    let reports = counterexample_sweep(&a.n, a.d, a.t1, strategy)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["N", "D", "min_height", "Z", "sup_phase_derivative"])?;
    for r in &reports {
        w.write_record([r.n.to_string(), sci(r.d), sci(r.min_height), r.z.to_string(), sci(r.sup_phase_derivative)])?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    emit(out, &String::from_utf8_lossy(&bytes))?;
    if let Some(r) = reports.iter().find(|r| !r.certified) {
        return Err(Failure::Numeric(format!("zero set for N = {} not certified", r.n)));
    }
    Ok(())
}

fn regularity_cmd(a: RegularityArgs, out: &Option<PathBuf>) -> Res<()> {
    let window = real_window(&a.window)?;
    let runs = match &a.sequence {
        Some(p) => PointRuns::from_points(load_sequence(p)?.points()),
        None => regular_punctured_runs(window.1)?,
    };
    emit_json(out, &regularity_functional_runs(&runs, a.a, window)?)
}

fn discrepancy_cmd(a: DiscrepancyArgs, out: &Option<PathBuf>) -> Res<()> {
    let text = read(&a.measure)?;
    let measure = match InnerFunctionModel::from_json(&text) {
        Ok(m) => m.measure().clone(),
        Err(_) => ClarkMeasure::from_json(&text).map_err(|e| Failure::Io(format!("{}: {e}", a.measure.display())))?,
    };
    emit_json(out, &discrepancy_report(&measure)?)
}
