use std::fs;

use steercert_core::certify::{
    linspace, render_svg, sweep as run_sweep, write_csv, CertificateJson, CertifyError, CsvRow, GuessingSetup,
    SolverStatus, SvgSeries,
};
use steercert_core::steering::{
    assemblage_from, canonical_measurements, lhs_bound as enumerate_lhs, result2_functional, schmidt_state,
    steering_value, Assemblage, FamilyJson,
};

use crate::args::{CertifyArgs, ConstructArgs, StateArgs, SweepArgs, ValueArgs};
use crate::input::{certify_failure, certify_options, functional, parse_schmidt, read_json, write_file};
use crate::Failure;

/// Distance below the maximal value used as the default sweep end point.
const SWEEP_END_OFFSET: f64 = 1e-6;

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

pub fn construct(args: &ConstructArgs) -> Result<(), Failure> {
    let spec = parse_schmidt(&args.state.schmidt, args.state.d)?;
    let func = result2_functional(&spec).map_err(invalid)?;
    let meas = canonical_measurements(spec.dim()).map_err(invalid)?;
    let asm = assemblage_from(&schmidt_state(&spec).map_err(invalid)?, &meas).map_err(invalid)?;
    let beta = steering_value(&func, &asm).map_err(invalid)?;
    let beta_lhs = enumerate_lhs(&func).map_err(invalid)?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::Io(format!("{}: {e}", args.out.display())))?;
    write_file(&args.out.join("functional.json"), &to_json(&FamilyJson::from(&func)))?;
    write_file(&args.out.join("measurements.json"), &to_json(&FamilyJson::from(&meas)))?;
    write_file(&args.out.join("assemblage.json"), &to_json(&FamilyJson::from(&asm)))?;
    println!("beta={beta:.12} beta_lhs={beta_lhs:.12}");
    Ok(())
}

pub fn value(args: &ValueArgs) -> Result<(), Failure> {
    let func = functional(&args.state)?;
    let asm = match &args.assemblage {
        Some(path) => {
            let raw: FamilyJson = read_json(path)?;
            Assemblage::try_from(&raw).map_err(invalid)?
        }
        None => {
            let spec = parse_schmidt(&args.state.schmidt, args.state.d)?;
            let meas = canonical_measurements(spec.dim()).map_err(invalid)?;
            assemblage_from(&schmidt_state(&spec).map_err(invalid)?, &meas).map_err(invalid)?
        }
    };
    println!("beta={:.12}", steering_value(&func, &asm).map_err(invalid)?);
    Ok(())
}

pub fn lhs_bound(args: &StateArgs) -> Result<(), Failure> {
    let func = functional(args)?;
    println!("beta_lhs={:.12}", enumerate_lhs(&func).map_err(invalid)?);
    Ok(())
}

pub fn certify(args: &CertifyArgs) -> Result<(), Failure> {
    let func = functional(&args.state)?;
    let opts = certify_options(&args.solve)?;
    let setup = GuessingSetup::new(&func, &opts).map_err(certify_failure)?;
    let cert = setup.certify(args.beta, args.x_star, &opts).map_err(certify_failure)?;
    let json = to_json(&CertificateJson::from(&cert));
    if let Some(path) = &args.out {
        write_file(path, &json)?;
    }
    print!("{json}");
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let func = functional(&args.state)?;
    let opts = certify_options(&args.solve)?;
    if args.steps == 0 {
        return Err(Failure::Invalid("--steps must be at least 1".into()));
    }
    let setup = GuessingSetup::new(&func, &opts).map_err(certify_failure)?;
    let beta_min = match (args.beta_min, setup.beta_lhs()) {
        (Some(b), _) | (None, Some(b)) => b,
        (None, None) => return Err(Failure::Invalid("--beta-min is required for this functional".into())),
    };
    let beta_max = args.beta_max.unwrap_or(setup.beta_max() - SWEEP_END_OFFSET);
    if beta_min > beta_max {
        return Err(Failure::Invalid(format!("--beta-min {beta_min} exceeds --beta-max {beta_max}")));
    }
    for b in [beta_min, beta_max] {
        setup.check_beta(b, opts.solver.feas_tol).map_err(certify_failure)?;
    }
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let grid = linspace(beta_min, beta_max, args.steps);
    let points = run_sweep(&setup, &grid, args.x_star, &opts, threads).map_err(certify_failure)?;

    let d = func.scenario().n_outcomes;
    let mut failures = 0;
    let rows: Vec<CsvRow> = points
        .iter()
        .map(|p| match &p.result {
            Ok(cert) => CsvRow::from_certificate(cert),
            Err(e) => {
                failures += 1;
                eprintln!("steercert: beta_obs={}: {e}", p.beta_obs);
                let status = match e {
                    CertifyError::Infeasible(_) => SolverStatus::Infeasible,
                    CertifyError::Unbounded(_) => SolverStatus::Unbounded,
                    _ => SolverStatus::NumericalFailure,
                };
                CsvRow::failed(d, p.beta_obs, status)
            }
        })
        .collect();

    let csv = write_csv(&rows);
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &args.svg {
        let series = SvgSeries {
            label: format!("d = {d}"),
            points: rows.iter().map(|r| (r.beta_obs, r.h_min_bits)).collect(),
        };
        write_file(path, &render_svg(&[series], "observed steering value", "min-entropy (bits)"))?;
    }
    if failures == rows.len() {
        return Err(Failure::Solver(format!("all {failures} grid points failed")));
    }
    Ok(())
}
