use cdinn::dcopt::{ccp_optimize, filtered_subgrad, CcpConfig, OptimTrace, StepSchedule, SubgradConfig};

use crate::error::{CliError, CliResult};
use crate::io::{parse_constraints, parse_list, write_csv};
use crate::model::ModelFile;
use crate::{OptMethod, OptimizeArgs, StepRule};

/// Tolerance for the start point against the constraints, in scaled units.
const START_TOL: f64 = 1e-8;

pub fn run(a: &OptimizeArgs) -> CliResult<()> {
    let file = ModelFile::load(&a.model)?;
    let model = file.to_fitted();
    let net = model.feedforward()?;
    let d = net.input_dim();
    let dim_checked = |v: Vec<f64>, what: &str| {
        if v.len() == d {
            Ok(v)
        } else {
            Err(CliError::usage(format!("{what} has {} values for a {d}-input model", v.len())))
        }
    };
    let x0 = dim_checked(parse_list(&a.x0, "--x0")?, "--x0")?;
    let default_box = model.x_scaler.as_ref().map(|s| (s.min.clone(), s.max.clone()));
    let lower = match (&a.lower, &default_box) {
        (Some(s), _) => dim_checked(parse_list(s, "--lower")?, "--lower")?,
        (None, Some((lo, _))) => lo.clone(),
        (None, None) => return Err(CliError::usage("model has no input scaler; pass --lower and --upper")),
    };
    let upper = match (&a.upper, &default_box) {
        (Some(s), _) => dim_checked(parse_list(s, "--upper")?, "--upper")?,
        (None, Some((_, hi))) => hi.clone(),
        (None, None) => return Err(CliError::usage("model has no input scaler; pass --lower and --upper")),
    };
    let rows = match &a.constraints {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?;
            parse_constraints(&text, d)?
        }
        None => Vec::new(),
    };
    let cons = model.constraints(&lower, &upper, &rows)?;
    let x0s = model.scale_input(&x0);
    if !cons.contains(&x0s, START_TOL) {
        return Err(CliError::usage(format!("start point {x0:?} violates the box or constraints")));
    }
    let units = model.units();
    let trace: OptimTrace = match a.method {
        OptMethod::Ccp => {
            let cfg = CcpConfig { max_iterations: a.max_iter, epsilon: a.tol, x0: x0s, maximize: a.maximize, units };
            ccp_optimize(net, &cons, &cfg)?
        }
        OptMethod::Subgrad => {
            if !rows.is_empty() {
                eprintln!("note: subgrad clips to the box only; affine rows are not enforced");
            }
            let schedule = match a.schedule {
                StepRule::Const => StepSchedule::Constant,
                StepRule::OverK => StepSchedule::OverK,
            };
            let cfg = SubgradConfig {
                beta: a.beta,
                max_iterations: a.max_iter,
                epsilon: a.tol,
                units,
                ..SubgradConfig::new(a.alpha0, schedule, x0s)
            };
            filtered_subgrad(net, &cons, &cfg, a.maximize)?
        }
    };
    if let Some(path) = &a.trace {
        let mut header = vec!["iter".to_string()];
        header.extend((0..d).map(|j| format!("x{j}")));
        header.extend(["objective", "surrogate", "lp_status", "lp_pivots"].map(String::from));
        let rows: Vec<Vec<String>> = trace
            .records
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let mut row = vec![k.to_string()];
                row.extend(model.unscale_input(&r.x).iter().map(|v| v.to_string()));
                row.push(model.unscale_output(r.objective).to_string());
                row.push(r.surrogate.map_or(String::new(), |s| model.unscale_output(s).to_string()));
                row.push(r.lp_status.map_or(String::new(), |s| format!("{s:?}").to_lowercase()));
                row.push(r.lp_pivots.map_or(String::new(), |p| p.to_string()));
                row
            })
            .collect();
        write_csv(path, &header, &rows)?;
    }
    let x_opt = model.unscale_input(trace.final_x());
    println!(
        "method={} termination={} iterations={} x_opt={} y_opt={} seconds={:.4}",
        match a.method {
            OptMethod::Ccp => "ccp",
            OptMethod::Subgrad => "subgrad",
        },
        trace.termination.name(),
        trace.iterations(),
        x_opt.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(","),
        model.unscale_output(trace.final_objective()),
        trace.seconds,
    );
    Ok(())
}
