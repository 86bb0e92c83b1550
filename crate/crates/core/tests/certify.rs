use proptest::prelude::*;
use steercert_core::certify::{
    embed_program, linspace, parse_csv, solve, sweep, write_csv, BetaConstraint, CertificateJson, CertifyOptions,
    CsvRow, GuessingSetup, SolverOptions, SolverStatus,
};
use steercert_core::steering::{result2_functional, SchmidtSpec};

fn setup(spec: &SchmidtSpec, opts: &CertifyOptions) -> GuessingSetup {
    GuessingSetup::new(&result2_functional(spec).unwrap(), opts).unwrap()
}

#[test]
fn real_embedding_gives_the_same_bound() {
    let complex = CertifyOptions::default();
    let real = CertifyOptions {
        real_embedding: true,
        ..CertifyOptions::default()
    };
    for spec in [SchmidtSpec::maximal(2), SchmidtSpec::maximal(3), SchmidtSpec::new(vec![0.5, 0.3, 0.2]).unwrap()] {
        let s = setup(&spec, &complex);
        for beta in [1.8, 1.95, 1.999] {
            for x_star in [0, 1] {
                let a = s.certify(beta, x_star, &complex).unwrap();
                let b = s.certify(beta, x_star, &real).unwrap();
                assert!(
                    (a.p_guess_dual - b.p_guess_dual).abs() <= 2.0 * complex.solver.gap_tol + 1e-9,
                    "{:?} beta={beta}: {} vs {}",
                    spec.lambdas(),
                    a.p_guess_dual,
                    b.p_guess_dual
                );
            }
        }
    }
}

#[test]
fn embedded_program_solves_to_the_complex_optimum() {
    let opts = CertifyOptions::default();
    let s = setup(&SchmidtSpec::maximal(3), &opts);
    let program = s.program(1.9, 1, BetaConstraint::Equality, opts.solver.feas_tol).unwrap();
    let direct = solve(&program, &SolverOptions::default()).unwrap();
    let embedded = solve(&embed_program(&program), &SolverOptions::default()).unwrap();
    assert!((direct.report.primal_value - embedded.report.primal_value).abs() < 1e-6);
}

#[test]
fn at_least_mode_dominates_equality() {
    let eq = CertifyOptions::default();
    let geq = CertifyOptions {
        constraint: BetaConstraint::AtLeast,
        ..CertifyOptions::default()
    };
    let s = setup(&SchmidtSpec::maximal(3), &eq);
    for beta in linspace(1.6, 1.99, 5) {
        let a = s.certify(beta, 1, &eq).unwrap().p_guess_dual;
        let b = s.certify(beta, 1, &geq).unwrap().p_guess_dual;
        assert!(b >= a - 1e-6, "beta={beta}: geq {b} < eq {a}");
    }
}

#[test]
fn below_classical_bound_nothing_is_certified() {
    let opts = CertifyOptions::default();
    let s = setup(&SchmidtSpec::maximal(3), &opts);
    let c = s.certify(1.4, 1, &opts).unwrap();
    assert!(c.h_min_bits < 1e-6);
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let opts = CertifyOptions::default();
    let s = setup(&SchmidtSpec::new(vec![0.6, 0.4]).unwrap(), &opts);
    let grid = linspace(s.beta_lhs().unwrap(), 1.999, 7);
    let run = |threads| -> Vec<(f64, f64)> {
        sweep(&s, &grid, 1, &opts, threads)
            .unwrap()
            .into_iter()
            .map(|p| {
                let c = p.result.unwrap();
                (c.beta_obs, c.p_guess_dual)
            })
            .collect()
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn certificate_and_csv_round_trip() {
    let opts = CertifyOptions::default();
    let s = setup(&SchmidtSpec::maximal(2), &opts);
    let certs: Vec<_> = linspace(1.75, 1.99, 4).into_iter().map(|b| s.certify(b, 1, &opts).unwrap()).collect();
    let json = serde_json::to_string(&CertificateJson::from(&certs[0])).unwrap();
    let back: CertificateJson = serde_json::from_str(&json).unwrap();
    assert_eq!(back, CertificateJson::from(&certs[0]));

    let mut rows: Vec<CsvRow> = certs.iter().map(CsvRow::from_certificate).collect();
    rows.push(CsvRow::failed(2, 1.995, SolverStatus::NumericalFailure));
    let text = write_csv(&rows);
    assert_eq!(write_csv(&parse_csv(&text).unwrap()), text);
    assert!(text.lines().last().unwrap().contains("numerical_failure"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certified_bound_lies_between_primal_and_one(
        raw in prop::collection::vec(0.1f64..1.0, 2..=3),
        t in 0.05f64..0.95,
        x_star in 0usize..2,
    ) {
        let sum: f64 = raw.iter().sum();
        let mut lam: Vec<f64> = raw.iter().map(|r| r / sum).collect();
        lam[0] += 1.0 - lam.iter().sum::<f64>();
        let spec = SchmidtSpec::new(lam).unwrap();
        let opts = CertifyOptions::default();
        let s = setup(&spec, &opts);
        let beta = s.beta_lhs().unwrap() + t * (2.0 - s.beta_lhs().unwrap());
        let c = s.certify(beta, x_star, &opts).unwrap();
        prop_assert!(c.p_guess_dual <= 1.0);
        prop_assert!(c.p_guess_dual >= c.p_guess_primal - 1e-6);
        prop_assert!(c.p_guess_dual >= 1.0 / spec.dim() as f64 - 1e-9);
        let audit = c.attack.as_ref().unwrap().audit(s.functional(), beta, x_star);
        prop_assert!(audit.within(1e-6, BetaConstraint::Equality));
    }
}
