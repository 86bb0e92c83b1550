//! Cross-check battery: maximal value of the constructed assemblage, closed
//! form of the classical bound, uniqueness of two-set decompositions, and
//! agreement of the guessing program with the analytic value near the
//! maximum.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steercert_core::certify::GuessingSetup;
use steercert_core::steering::{
    analytic_pguess_at_max, assemblage_from, canonical_measurements, lhs_bound, random_co_decomposable,
    random_schmidt, result2_functional, schmidt_state, steering_value, unique_distributions, EnsembleOptions,
    SchmidtSpec,
};

use crate::args::VerifyArgs;
use crate::input::{certify_options, parse_schmidt};
use crate::Failure;

const EXACT_TOL: f64 = 1e-9;
const FACT_TOL: f64 = 1e-8;
const MIN_COEFF: f64 = 1e-3;
const SCHMIDT_FLOOR: f64 = 0.02;

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn max_value(spec: &SchmidtSpec) -> Check {
    let outcome = (|| {
        let asm = assemblage_from(&schmidt_state(spec)?, &canonical_measurements(spec.dim())?)?;
        steering_value(&result2_functional(spec)?, &asm)
    })();
    match outcome {
        Ok(beta) => check(
            "maximal value",
            (beta - 2.0).abs() <= EXACT_TOL,
            format!("beta={beta:.12} |beta-2|={:.3e}", (beta - 2.0).abs()),
        ),
        Err(e) => check("maximal value", false, e.to_string()),
    }
}

fn lhs_closed_form(specs: &[SchmidtSpec]) -> Check {
    let mut worst: f64 = 0.0;
    for spec in specs {
        match result2_functional(spec).and_then(|f| lhs_bound(&f)) {
            Ok(b) => worst = worst.max((b - (1.0 + spec.max_lambda().sqrt())).abs()),
            Err(e) => return check("classical bound closed form", false, e.to_string()),
        }
    }
    check(
        "classical bound closed form",
        worst <= EXACT_TOL,
        format!("{} states, max deviation {worst:.3e}", specs.len()),
    )
}

fn unique_decomposition(d: usize, cases: usize, rng: &mut ChaCha8Rng) -> Check {
    let opts = EnsembleOptions::default();
    let (mut worst_value, mut worst_residual): (f64, f64) = (0.0, 0.0);
    for _ in 0..cases {
        let pair = random_co_decomposable(d, MIN_COEFF, rng);
        match unique_distributions(&pair.set_a, &pair.set_b, &opts) {
            Ok(u) => {
                let dev = u
                    .q
                    .iter()
                    .zip(&pair.q)
                    .chain(u.lam.iter().zip(&pair.lam))
                    .map(|(x, y)| (x - y).abs())
                    .fold(u.oracle_discrepancy, f64::max);
                worst_value = worst_value.max(dev);
                worst_residual = worst_residual.max(u.ensemble_residual);
            }
            Err(e) => return check("unique decomposition", false, e.to_string()),
        }
    }
    check(
        "unique decomposition",
        worst_value <= FACT_TOL && worst_residual <= FACT_TOL,
        format!("{cases} pairs, value deviation {worst_value:.3e}, ensemble residual {worst_residual:.3e}"),
    )
}

fn analytic_agreement(spec: &SchmidtSpec, x_star: usize, args: &VerifyArgs) -> Result<Check, Failure> {
    let name = format!("guessing program vs analytic (x*={x_star})");
    let opts = certify_options(&args.solve)?;
    let func = result2_functional(spec).map_err(|e| Failure::Invalid(e.to_string()))?;
    let outcome = GuessingSetup::new(&func, &opts).and_then(|setup| {
        let beta = setup.beta_max() - args.eps;
        setup.certify(beta, x_star, &opts).map(|c| (beta, c))
    });
    let (beta, cert) = match outcome {
        Ok(v) => v,
        Err(e) => return Ok(check(name, false, e.to_string())),
    };
    let analytic = match cert.analytic_pguess {
        Some(q) => q,
        None => match analytic_pguess_at_max(&func, x_star, &opts.ensemble) {
            Ok(q) => q,
            Err(e) => return Ok(check(name, false, e.to_string())),
        },
    };
    let gap = (cert.p_guess_dual - analytic).abs();
    Ok(check(
        name,
        gap <= args.tol_analytic,
        format!(
            "beta={beta:.9} p_dual={:.9} analytic={analytic:.9} |diff|={gap:.3e} tol={:.1e} status={}",
            cert.p_guess_dual,
            args.tol_analytic,
            cert.status()
        ),
    ))
}

pub fn run(args: &VerifyArgs) -> Result<(), Failure> {
    let spec = parse_schmidt(&args.state.schmidt, args.state.d)?;
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(Failure::Invalid("--eps must be positive".into()));
    }
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(args.solve.seed);

    let mut specs = vec![spec.clone()];
    specs.extend((0..args.cases).map(|_| random_schmidt(d, SCHMIDT_FLOOR, &mut rng)));

    let mut checks = vec![
        max_value(&spec),
        lhs_closed_form(&specs),
        unique_decomposition(d, args.cases, &mut rng),
    ];
    for x_star in [0, 1] {
        checks.push(analytic_agreement(&spec, x_star, args)?);
    }

    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        return Err(Failure::Verification(failed));
    }
    Ok(())
}
