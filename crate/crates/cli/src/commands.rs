use std::collections::hash_map::RandomState;
use std::fmt::Write as _;
use std::fs;
use std::hash::BuildHasher;
use std::path::Path;

use doublesel::diagnostics::sparse_eigenvalues;
use doublesel::double_selection::{post_double_selection, post_double_selection_ridge, TreatmentEffectEstimate};
use doublesel::numerics::{RealMatrix, RngStream};
use doublesel::penalty::{PenaltyConfig, SelectorKind};
use doublesel::ridge::RidgeCvSpec;
use doublesel::simulation::{full_grid, run_point, studentize, DesignSpec, Estimator, SeKind, SimulationOptions};

use crate::args::{DiagnoseArgs, FitArgs, PenaltyArgs, SimulateArgs};
use crate::dataset::{ingest_csv, parse_name_list, Controls, Roles};
use crate::error::{CliError, CliResult};
use crate::report::{
    to_json, EstimationReport, FitConfig, SimulationConfig, SimulationPointReport, SparseEigenvalueReport,
    ESTIMATION_SCHEMA, SCHEMA_VERSION, SPARSE_EIG_SCHEMA,
};

pub const INTERCEPT_NAME: &str = "(intercept)";
pub const RIDGE_NAME: &str = "(ridge-fit)";

/// The given seed, or a fresh one announced on standard error.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = RandomState::new().hash_one(std::time::SystemTime::now());
        eprintln!("seed: {s}");
        s
    })
}

fn penalty_config(args: &PenaltyArgs) -> CliResult<PenaltyConfig> {
    let selector: SelectorKind = args.selector.parse()?;
    let config = PenaltyConfig { c: args.c, gamma: args.gamma, selector, ..Default::default() };
    config.validate()?;
    Ok(config)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Data(format!("cannot write '{}': {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn names(indices: &[usize], columns: &[String]) -> Vec<String> {
    indices.iter().map(|&j| columns[j].clone()).collect()
}

fn fit_summary(report: &EstimationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "effect of {} on {}", report.treatment, report.outcome);
    let _ = writeln!(s, "  alpha_hat      {:.6}", report.alpha_hat);
    let _ = writeln!(
        s,
        "  se (plug-in)   {:.6}   {:.0}% CI [{:.6}, {:.6}]",
        report.se_plugin,
        100.0 * report.config.level,
        report.ci_plugin.lower,
        report.ci_plugin.upper
    );
    let _ = writeln!(
        s,
        "  se (jackknife) {:.6}   {:.0}% CI [{:.6}, {:.6}]",
        report.se_jackknife,
        100.0 * report.config.level,
        report.ci_jackknife.lower,
        report.ci_jackknife.upper
    );
    let _ = writeln!(s, "  n = {} ({} rows dropped), {} controls", report.n_used, report.rows_dropped, report.p);
    let _ = writeln!(s, "  selected for treatment: {}", report.selected_for_treatment.join(", "));
    let _ = writeln!(s, "  selected for outcome:   {}", report.selected_for_outcome.join(", "));
    let _ = writeln!(s, "  union size: {}", report.union_size);
    if report.rank_deficient {
        let _ = writeln!(s, "  warning: the final regression design is rank deficient");
    }
    s
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let config = penalty_config(&args.penalty)?;
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Argument(format!("--level must lie in (0, 1), got {}", args.level)));
    }
    let controls = match &args.controls {
        Some(list) => Controls::Named(parse_name_list(list)),
        None => Controls::AllOthers,
    };
    let roles = Roles {
        outcome: Some(args.outcome.clone()),
        treatment: Some(args.treatment.clone()),
        controls,
        amelioration: args.amelioration.as_deref().map(parse_name_list).unwrap_or_default(),
    };
    let dataset = ingest_csv(&args.data, &roles)?;
    let seed = resolve_seed(args.seed);

    let mut columns = dataset.controls.clone();
    let mut x = dataset.x.clone();
    if !args.no_intercept {
        if columns.iter().any(|c| c == INTERCEPT_NAME) {
            return Err(CliError::Argument(format!("a control is named '{INTERCEPT_NAME}'; pass --no-intercept")));
        }
        columns.insert(0, INTERCEPT_NAME.to_string());
        x = x.insert_column(0, 1.0);
    }
    let amelioration: Vec<usize> = dataset
        .amelioration
        .iter()
        .map(|a| columns.iter().position(|c| c == a).expect("validated during ingestion"))
        .collect();
    let y = dataset.y.as_ref().expect("outcome role requested");
    let d = dataset.d.as_ref().expect("treatment role requested");

    let context = format!("estimating the effect of '{}' on '{}'", args.treatment, args.outcome);
    let estimate: TreatmentEffectEstimate = if args.with_ridge {
        columns.push(RIDGE_NAME.to_string());
        let mut stream = RngStream::new(seed, 0);
        post_double_selection_ridge(y, d, &x, &amelioration, &config, args.level, &RidgeCvSpec::default(), &mut stream)
    } else {
        post_double_selection(y, d, &x, &amelioration, &config, args.level)
    }
    .map_err(|e| CliError::from(e).context(&context))?;

    let report = EstimationReport {
        schema: ESTIMATION_SCHEMA,
        schema_version: SCHEMA_VERSION,
        outcome: args.outcome.clone(),
        treatment: args.treatment.clone(),
        alpha_hat: estimate.alpha_hat,
        sigma_plugin: estimate.sigma_plugin,
        se_plugin: estimate.se_plugin,
        se_jackknife: estimate.se_jackknife,
        ci_plugin: estimate.ci_plugin,
        ci_jackknife: estimate.ci_jackknife,
        selected_for_treatment: names(&estimate.selection.treatment, &columns),
        selected_for_outcome: names(&estimate.selection.outcome, &columns),
        amelioration: names(&estimate.selection.amelioration, &columns),
        union: names(&estimate.selection.union, &columns),
        union_size: estimate.selection.size(),
        n_used: estimate.n,
        rows_dropped: dataset.rows_dropped,
        p: estimate.p,
        rank_deficient: estimate.rank_deficient,
        config: FitConfig {
            c: config.c,
            gamma: config.gamma,
            selector: config.selector,
            level: args.level,
            seed,
            intercept: !args.no_intercept,
            with_ridge: args.with_ridge,
            max_loading_iterations: config.max_iterations,
            loading_tolerance: config.tolerance,
        },
    };
    let json = to_json(&report);
    match &args.out {
        Some(path) => {
            write_output(Some(path), &json)?;
            print!("{}", fit_summary(&report));
        }
        None => {
            eprint!("{}", fit_summary(&report));
            print!("{json}");
        }
    }
    Ok(())
}

/// `full`, `;`-separated pairs, or a flat comma list of even length.
pub fn parse_grid(value: &str) -> CliResult<Vec<(f64, f64)>> {
    if value.trim() == "full" {
        return Ok(full_grid());
    }
    let bad = || CliError::Argument(format!("invalid --r2-grid '{value}': expected 'full' or pairs 'r2_y,r2_d;...'"));
    let numbers: Vec<f64> = value
        .split([',', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    if numbers.is_empty() || numbers.len() % 2 != 0 {
        return Err(bad());
    }
    let grid: Vec<(f64, f64)> = numbers.chunks(2).map(|c| (c[0], c[1])).collect();
    for &(a, b) in &grid {
        if !((0.0..1.0).contains(&a) && (0.0..1.0).contains(&b)) {
            return Err(CliError::Argument(format!("R^2 values must lie in [0, 1), got ({a}, {b})")));
        }
    }
    Ok(grid)
}

fn parse_estimators(value: &str) -> CliResult<Vec<Estimator>> {
    let list = parse_name_list(value);
    if list.is_empty() {
        return Err(CliError::Argument("no estimators given".into()));
    }
    let mut out: Vec<Estimator> = Vec::new();
    for name in list {
        let e: Estimator = name.parse()?;
        if !out.contains(&e) {
            out.push(e);
        }
    }
    Ok(out)
}

fn point_stem(design: u8, r2_y: f64, r2_d: f64) -> String {
    format!("design{design}_r2y{r2_y}_r2d{r2_d}")
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let grid = parse_grid(&args.r2_grid)?;
    let estimators = parse_estimators(&args.estimators)?;
    let penalty = penalty_config(&args.penalty)?;
    let se = match args.se.as_str() {
        "jackknife" => SeKind::Jackknife,
        "plugin" => SeKind::Plugin,
        other => return Err(CliError::Argument(format!("unknown --se '{other}'; valid: jackknife, plugin"))),
    };
    if args.reps < 1 {
        return Err(CliError::Argument("--reps must be at least 1".into()));
    }
    let seed = resolve_seed(args.seed);
    let base = DesignSpec {
        n: args.n,
        p: args.p,
        alpha0: args.alpha0,
        rho: args.rho,
        tail_limit: args.tail_limit,
        ..DesignSpec::new(args.design, 0.0, 0.0, seed)
    };
    base.validate()?;
    let options = SimulationOptions { penalty: penalty.clone(), se, ..Default::default() };
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Data(format!("cannot create '{}': {e}", args.out.display())))?;

    let mut table = String::from("design,r2_y,r2_d,estimator,rmse,bias,std,rejection_rate,reps,exclusions\n");
    println!("design {} | n {} | p {} | reps {} | seed {}", base.design, base.n, base.p, args.reps, seed);
    println!("{:>5} {:>5}  {:<24} {:>9} {:>9} {:>9} {:>6} {:>5}", "r2_y", "r2_d", "estimator", "rmse", "bias", "std", "rej", "excl");
    for &(r2_y, r2_d) in &grid {
        let spec = DesignSpec { r2_y, r2_d, ..base.clone() };
        let (report, records) = run_point(&spec, args.reps, &estimators, &options)?;
        let stem = point_stem(spec.design, r2_y, r2_d);
        let doc = SimulationPointReport::new(
            &report,
            SimulationConfig {
                c: penalty.c,
                gamma: penalty.gamma,
                selector: penalty.selector,
                ridge_folds: options.ridge.folds,
                rho: spec.rho,
                tail_limit: spec.tail_limit,
            },
        );
        write_output(Some(&args.out.join(format!("{stem}.json"))), &to_json(&doc))?;
        for s in &report.estimators {
            let _ = writeln!(
                table,
                "{},{},{},{},{},{},{},{},{},{}",
                spec.design, r2_y, r2_d, s.estimator, s.rmse, s.bias, s.std, s.rejection_rate, args.reps, s.exclusions
            );
            println!(
                "{:>5} {:>5}  {:<24} {:>9.4} {:>9.4} {:>9.4} {:>6.3} {:>5}",
                r2_y, r2_d, s.estimator.name(), s.rmse, s.bias, s.std, s.rejection_rate, s.exclusions
            );
        }
        if args.emit_studentized {
            let mut out = String::from("replication,estimator,alpha_hat,se,statistic\n");
            for (k, e) in estimators.iter().enumerate() {
                for r in &records {
                    if let Ok(est) = &r.results[k] {
                        let se = est.se(se);
                        let t = (est.alpha - spec.alpha0) / se;
                        let _ = writeln!(out, "{},{},{},{},{}", r.replication, e, est.alpha, se, t);
                    }
                }
                if args.reps >= 2 {
                    if let Ok(st) = studentize(&records, k, spec.alpha0, se) {
                        println!("{:>5} {:>5}  {:<24} KS distance to N(0,1): {:.4}", r2_y, r2_d, e.name(), st.ks);
                    }
                }
            }
            write_output(Some(&args.out.join(format!("studentized_{stem}.csv"))), &out)?;
        }
    }
    write_output(Some(&args.out.join(format!("simulation_design{}.csv", base.design))), &table)
}

pub fn diagnose(args: &DiagnoseArgs) -> CliResult<()> {
    if args.m < 1 {
        return Err(CliError::Argument("--m must be at least 1".into()));
    }
    let controls = match &args.controls {
        Some(list) => Controls::Named(parse_name_list(list)),
        None => Controls::AllOthers,
    };
    let roles = Roles { outcome: None, treatment: None, controls, amelioration: Vec::new() };
    let dataset = ingest_csv(&args.data, &roles)?;
    let n = dataset.rows() as f64;
    let gram: RealMatrix = dataset.x.transpose() * &dataset.x / n;
    let p = gram.nrows();
    if args.m > p {
        return Err(CliError::Argument(format!("--m {} exceeds the number of controls ({p})", args.m)));
    }
    let result = sparse_eigenvalues(&gram, args.m, args.cap as u128)?;
    let report = SparseEigenvalueReport {
        schema: SPARSE_EIG_SCHEMA,
        schema_version: SCHEMA_VERSION,
        controls: dataset.controls.clone(),
        n_used: dataset.rows(),
        rows_dropped: dataset.rows_dropped,
        p,
        m: result.m,
        phi_min: result.phi_min,
        phi_max: result.phi_max,
        method: result.method,
        subsets_examined: result.subsets_examined.min(u64::MAX as u128) as u64,
    };
    let json = to_json(&report);
    match &args.out {
        Some(path) => {
            write_output(Some(path), &json)?;
            println!(
                "m = {}: phi_min = {:.6e}, phi_max = {:.6e} ({} supports)",
                report.m, report.phi_min, report.phi_max, report.subsets_examined
            );
        }
        None => print!("{json}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::write_numeric_csv;
    use doublesel::numerics::{RealVector, RngStream};
    use std::path::PathBuf;

    fn penalty() -> PenaltyArgs {
        PenaltyArgs { c: 1.1, gamma: 0.05, selector: "iterated-lasso".into() }
    }

    fn fit_args(data: PathBuf, out: PathBuf) -> FitArgs {
        FitArgs {
            data,
            outcome: "y".into(),
            treatment: "d".into(),
            controls: None,
            controls_all_others: true,
            amelioration: None,
            penalty: penalty(),
            level: 0.95,
            no_intercept: false,
            with_ridge: false,
            seed: Some(1),
            out: Some(out),
        }
    }

    fn sim_args(out: PathBuf, grid: &str, reps: usize, estimators: &str) -> SimulateArgs {
        SimulateArgs {
            design: 1,
            r2_grid: grid.into(),
            reps,
            estimators: estimators.into(),
            seed: Some(11),
            n: 100,
            p: 200,
            alpha0: 0.5,
            rho: 0.5,
            tail_limit: None,
            se: "jackknife".into(),
            penalty: penalty(),
            out,
            emit_studentized: false,
        }
    }

    fn diag_args(data: PathBuf, m: usize, out: PathBuf) -> DiagnoseArgs {
        DiagnoseArgs { data, controls: None, controls_all: true, m, cap: 200_000, out: Some(out) }
    }

    /// Columns `y, d, x1..xp` from the given matrices.
    fn write_table(path: &Path, y: &RealVector, d: &RealVector, x: &RealMatrix) {
        let n = x.nrows();
        let mut header = vec!["y".to_string(), "d".to_string()];
        header.extend((1..=x.ncols()).map(|j| format!("x{j}")));
        let mut all = RealMatrix::zeros(n, x.ncols() + 2);
        all.set_column(0, y);
        all.set_column(1, d);
        all.columns_mut(2, x.ncols()).copy_from(x);
        write_numeric_csv(path, &header, &all).unwrap();
    }

    fn json(path: &Path) -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
    }

    fn normal_matrix(s: &mut RngStream, n: usize, p: usize) -> RealMatrix {
        RealMatrix::from_fn(n, p, |_, _| s.normal())
    }

    #[test]
    fn constant_treatment_is_an_estimation_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = RngStream::new(3, 0);
        let x = normal_matrix(&mut s, 40, 5);
        let y = RealVector::from_fn(40, |_, _| s.normal());
        let d = RealVector::from_element(40, 2.5);
        let data = dir.path().join("data.csv");
        write_table(&data, &y, &d, &x);
        let err = fit(&fit_args(data, dir.path().join("out.json"))).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("treatment fully explained"), "{err}");
        assert!(err.to_string().contains("'d'"), "{err}");
    }

    #[test]
    fn saturated_amelioration_matches_ols() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = RngStream::new(4, 0);
        let (n, p) = (60, 6);
        let x = normal_matrix(&mut s, n, p);
        let d = RealVector::from_fn(n, |i, _| x[(i, 0)] + s.normal());
        let y = RealVector::from_fn(n, |i, _| 0.7 * d[i] - x[(i, 1)] + 0.3 + s.normal());
        let data = dir.path().join("data.csv");
        write_table(&data, &y, &d, &x);
        let out = dir.path().join("out.json");
        let mut args = fit_args(data, out.clone());
        args.amelioration = Some((1..=p).map(|j| format!("x{j}")).collect::<Vec<_>>().join(","));
        fit(&args).unwrap();
        let report = json(&out);

        // Normal equations for y on [d, 1, X].
        let w = RealMatrix::from_fn(n, p + 2, |i, j| match j {
            0 => d[i],
            1 => 1.0,
            _ => x[(i, j - 2)],
        });
        let coef = (w.transpose() * &w).lu().solve(&(w.transpose() * &y)).unwrap();
        let alpha = report["alpha_hat"].as_f64().unwrap();
        assert!((alpha - coef[0]).abs() < 1e-8, "{alpha} vs {}", coef[0]);
        assert_eq!(report["union_size"], p + 1);
    }

    #[test]
    fn report_names_map_to_columns() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = RngStream::new(5, 0);
        let (n, p) = (80, 30);
        let x = normal_matrix(&mut s, n, p);
        let d = RealVector::from_fn(n, |i, _| 2.0 * x[(i, 3)] + s.normal());
        let y = RealVector::from_fn(n, |i, _| 0.5 * d[i] + 2.0 * x[(i, 7)] + s.normal());
        let data = dir.path().join("data.csv");
        write_table(&data, &y, &d, &x);
        let out = dir.path().join("out.json");
        fit(&fit_args(data, out.clone())).unwrap();
        let report = json(&out);
        let names = |k: &str| -> Vec<String> {
            report[k].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect()
        };
        assert!(names("selected_for_treatment").contains(&"x4".to_string()));
        assert!(names("selected_for_outcome").contains(&"x8".to_string()));
        assert_eq!(names("amelioration"), vec![INTERCEPT_NAME.to_string()]);
        let union = names("union");
        assert_eq!(report["union_size"].as_u64().unwrap() as usize, union.len());
        for name in &union {
            assert!(name == INTERCEPT_NAME || (1..=p).any(|j| *name == format!("x{j}")), "{name}");
        }
    }

    #[test]
    fn unknown_column_and_bad_selector_are_argument_errors() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data.csv");
        fs::write(&data, "y,d,x1\n1,2,3\n4,5,6\n7,8,10\n").unwrap();
        let mut args = fit_args(data.clone(), dir.path().join("out.json"));
        args.controls = Some("x1,x9".into());
        args.controls_all_others = false;
        assert_eq!(fit(&args).unwrap_err().exit_code(), 2);
        let mut args = fit_args(data, dir.path().join("out.json"));
        args.penalty.selector = "lasso".into();
        let err = fit(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("sqrt-lasso-iterated"), "{err}");
    }

    #[test]
    fn single_replication_table() {
        let dir = tempfile::tempdir().unwrap();
        simulate(&sim_args(dir.path().to_path_buf(), "0,0", 1, "double-selection")).unwrap();
        let table = fs::read_to_string(dir.path().join("simulation_design1.csv")).unwrap();
        let rows: Vec<&str> = table.lines().collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], "design,r2_y,r2_d,estimator,rmse,bias,std,rejection_rate,reps,exclusions");
        let cells: Vec<&str> = rows[1].split(',').collect();
        assert_eq!(cells[3], "double-selection");
        assert_eq!(cells[6], "0");
    }

    #[test]
    fn simulation_outputs_are_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for dir in [&a, &b] {
            let mut args = sim_args(dir.path().to_path_buf(), "0.2,0.4;0.8,0", 12, "oracle,post-lasso,double-selection");
            args.emit_studentized = true;
            simulate(&args).unwrap();
        }
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert_eq!(names.len(), 5);
        for name in names {
            assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
        }
    }

    #[test]
    fn post_lasso_rejects_far_more_often_at_high_r2() {
        let dir = tempfile::tempdir().unwrap();
        simulate(&sim_args(dir.path().to_path_buf(), "0.8,0.8", 1000, "post-lasso,double-selection")).unwrap();
        let report = json(&dir.path().join("design1_r2y0.8_r2d0.8.json"));
        let rate = |k: usize| report["estimators"][k]["rejection_rate"].as_f64().unwrap();
        let (pl, ds) = (rate(0), rate(1));
        assert!((0.02..=0.12).contains(&ds), "double-selection rejection {ds}");
        assert!(pl >= 2.0 * ds, "post-lasso {pl} vs double-selection {ds}");
    }

    #[test]
    fn invalid_simulation_flags() {
        let dir = tempfile::tempdir().unwrap();
        let mut args = sim_args(dir.path().to_path_buf(), "0,0", 1, "oracle");
        args.design = 4;
        assert_eq!(simulate(&args).unwrap_err().exit_code(), 2);
        let args = sim_args(dir.path().to_path_buf(), "0.3", 1, "oracle");
        assert_eq!(simulate(&args).unwrap_err().exit_code(), 2);
    }

    fn diagnose_report(x: &RealMatrix, m: usize) -> serde_json::Value {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("x.csv");
        let header: Vec<String> = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        write_numeric_csv(&data, &header, x).unwrap();
        let out = dir.path().join("eig.json");
        diagnose(&diag_args(data, m, out.clone())).unwrap();
        json(&out)
    }

    #[test]
    fn orthonormal_controls_have_unit_sparse_eigenvalues() {
        let mut s = RngStream::new(6, 0);
        let n = 50;
        let x = normal_matrix(&mut s, n, 6).qr().q() * (n as f64).sqrt();
        let report = diagnose_report(&x, 3);
        for key in ["phi_min", "phi_max"] {
            assert!((report[key].as_f64().unwrap() - 1.0).abs() < 1e-9, "{key} {}", report[key]);
        }
        assert_eq!(report["subsets_examined"], 20);
    }

    #[test]
    fn duplicated_control_gives_zero_phi_min() {
        let mut s = RngStream::new(7, 0);
        let mut x = normal_matrix(&mut s, 30, 5);
        let first = x.column(0).into_owned();
        x.set_column(4, &first);
        let report = diagnose_report(&x, 2);
        assert!(report["phi_min"].as_f64().unwrap() < 1e-10);
    }

    #[test]
    fn full_size_matches_eigendecomposition() {
        let mut s = RngStream::new(8, 0);
        let x = normal_matrix(&mut s, 40, 10);
        let report = diagnose_report(&x, 10);
        let eig = (x.transpose() * &x / 40.0).symmetric_eigen().eigenvalues;
        assert!((report["phi_min"].as_f64().unwrap() - eig.min()).abs() < 1e-10);
        assert!((report["phi_max"].as_f64().unwrap() - eig.max()).abs() < 1e-10);
        assert_eq!(report["method"], "full-spectrum");
    }

    #[test]
    fn capacity_error_reports_subset_count() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = RngStream::new(9, 0);
        let data = dir.path().join("x.csv");
        let header: Vec<String> = (1..=30).map(|j| format!("x{j}")).collect();
        write_numeric_csv(&data, &header, &normal_matrix(&mut s, 40, 30)).unwrap();
        let mut args = diag_args(data, 8, dir.path().join("eig.json"));
        args.cap = 1000;
        let err = diagnose(&args).unwrap_err();
        assert_eq!(err.exit_code(), 5);
        assert!(err.to_string().contains("5852925"), "{err}");
    }

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0,0").unwrap(), vec![(0.0, 0.0)]);
        assert_eq!(parse_grid("0.8,0.8;0,0.2").unwrap(), vec![(0.8, 0.8), (0.0, 0.2)]);
        assert_eq!(parse_grid("0,0.2,0.8,0.8").unwrap(), vec![(0.0, 0.2), (0.8, 0.8)]);
        assert_eq!(parse_grid("full").unwrap().len(), 25);
        assert!(parse_grid("0.5").is_err());
        assert!(parse_grid("1,0").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn estimator_lists() {
        assert_eq!(
            parse_estimators("post-lasso, double-selection").unwrap(),
            vec![Estimator::PostLasso, Estimator::DoubleSelection]
        );
        match parse_estimators("lasso") {
            Err(CliError::Argument(m)) => assert!(m.contains("double-selection-ridge")),
            other => panic!("{other:?}"),
        }
    }
}
