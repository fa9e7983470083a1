//! Rule and identity verification suite.
//!
//! Runs the GHR calculus rules over the scalar corpus and the
//! gradient/Hessian correspondence identities over the real-valued corpus,
//! producing one machine-readable record per check. The CLI serializes the
//! records as a JSON report and exits nonzero when any check fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{product_rule_residual, verify_rule, Rule, ScalarField};
use crate::fields::{
    chain_pairs, product_pairs, random_mu, random_point, real_corpus, scalar_corpus,
};
use crate::gradient::{augmented_gradient, real_gradient};
use crate::hessian::{
    augmented_hessian, eigen_shift_residual, hessian_bundle, real_hessian, second_derivative,
    REAL_HESSIAN_STEP,
};
use crate::linalg::j_matrix;
use crate::quat::Quaternion;

pub const RULE_TOL: f64 = 1e-6;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const HESSIAN_TOL: f64 = 1e-5;
pub const EIGEN_SHIFT_TOL: f64 = 1e-6;
pub const LAPLACIAN_TOL: f64 = 1e-5;
pub const HERMITIAN_TOL: f64 = 1e-6;
/// The traditional product rule must miss by at least this much on the
/// counterexample family.
pub const COUNTEREXAMPLE_MARGIN: f64 = 0.1;

/// One verification record. For ordinary checks `pass` means
/// `residual <= tolerance`; for the negative control (`rule` =
/// `"naive_product_failure"`) it means the deliberately wrong rule missed by
/// more than the margin stored in `tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub rule: String,
    pub field: String,
    pub mu: Option<[f64; 4]>,
    pub nu: Option<[f64; 4]>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn passing(
        rule: &str,
        field: &str,
        mu: Option<Quaternion>,
        nu: Option<Quaternion>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        CheckRecord {
            rule: rule.to_string(),
            field: field.to_string(),
            mu: mu.map(Quaternion::to_array),
            nu: nu.map(Quaternion::to_array),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random evaluation points per (field, μ) combination.
    pub points: usize,
    /// Random μ draws per field.
    pub mus: usize,
    /// Negative-control mode: evaluate the product rule with a flipped sign
    /// so every product check must fail.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            points: 20,
            mus: 10,
            inject_fault: false,
        }
    }
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

/// Rule suite: product, product_conj, chain, chain_conj, rotation,
/// conjugate, constant — plus the naive-product-rule negative control.
pub fn run_rule_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();

    let pairs = product_pairs(&mut rng);
    for rule in [Rule::Product, Rule::ProductConj] {
        for (f, g) in &pairs {
            let label = format!("{}*{}", f.name(), g.name());
            for _ in 0..cfg.mus {
                let mu = random_mu(&mut rng);
                let mut worst = 0.0f64;
                for _ in 0..cfg.points {
                    let q = random_point(1, &mut rng);
                    let conj = rule == Rule::ProductConj;
                    let res = product_rule_residual(f, g, &q, mu, conj, cfg.inject_fault)
                        .expect("corpus point in domain");
                    worst = worst.max(res);
                }
                records.push(CheckRecord::passing(
                    &rule.to_string(),
                    &label,
                    Some(mu),
                    None,
                    worst,
                    RULE_TOL,
                ));
            }
        }
    }

    for rule in [Rule::Chain, Rule::ChainConj] {
        for (f, g) in chain_pairs(&mut rng) {
            let label = format!("{}O{}", f.name(), g.name());
            for _ in 0..cfg.mus {
                let mu = random_mu(&mut rng);
                let mut worst = 0.0f64;
                for _ in 0..cfg.points {
                    let q = random_point(1, &mut rng);
                    let res = verify_rule(rule, &f, &g, &q, mu, Quaternion::ONE)
                        .expect("corpus point in domain");
                    worst = worst.max(res);
                }
                records.push(CheckRecord::passing(
                    &rule.to_string(),
                    &label,
                    Some(mu),
                    None,
                    worst,
                    RULE_TOL,
                ));
            }
        }
    }

    let corpus = scalar_corpus(&mut rng);
    for rule in [Rule::Rotation, Rule::Conjugate, Rule::Constant] {
        for f in &corpus {
            for _ in 0..cfg.mus {
                let mu = random_mu(&mut rng);
                let nu = match rule {
                    Rule::Conjugate => None,
                    _ => Some(random_mu(&mut rng)),
                };
                let mut worst = 0.0f64;
                for _ in 0..cfg.points {
                    let q = random_point(1, &mut rng);
                    let res = verify_rule(rule, f, f, &q, mu, nu.unwrap_or(Quaternion::ONE))
                        .expect("corpus point in domain");
                    worst = worst.max(res);
                }
                records.push(CheckRecord::passing(
                    &rule.to_string(),
                    f.name(),
                    Some(mu),
                    nu,
                    worst,
                    RULE_TOL,
                ));
            }
        }
    }

    // Negative control: with f = q, g = q*, the traditional product rule
    // misses by exactly |Im(q)|, so it must exceed the margin at every point
    // with |Im(q)| > 0.1.
    let f = ScalarField::new("q", 1, |x| x[0]);
    let g = ScalarField::new("q_conj", 1, |x| x[0].conjugate());
    let mut worst_pass = f64::INFINITY;
    let mut tried = 0;
    while tried < cfg.points.max(1) {
        let q = random_point(1, &mut rng);
        if q[0].vector_part().modulus() <= COUNTEREXAMPLE_MARGIN {
            continue;
        }
        tried += 1;
        let res = crate::calculus::naive_product_rule_residual(&f, &g, &q, Quaternion::ONE)
            .expect("corpus point in domain");
        worst_pass = worst_pass.min(res);
    }
    records.push(CheckRecord {
        rule: "naive_product_failure".to_string(),
        field: "q*q_conj".to_string(),
        mu: Some(Quaternion::ONE.to_array()),
        nu: None,
        residual: worst_pass,
        tolerance: COUNTEREXAMPLE_MARGIN,
        pass: worst_pass > COUNTEREXAMPLE_MARGIN,
    });

    records
}

/// Identity suite: gradient and Hessian correspondences, the eigenvalue
/// shift identity, the Laplacian identity and Hermitian structure, across
/// the real-valued corpus at N ∈ {1, 2, 4}.
pub fn run_identity_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut records = Vec::new();

    for dim in [1usize, 2, 4] {
        let fields = real_corpus(dim, &mut rng);
        for f in &fields {
            let label = format!("{}[N={dim}]", f.name());
            let q = random_point(dim, &mut rng);

            // gradient correspondence: ∇_r f = Jᴴ ∇_{h*} f
            let aug = augmented_gradient(f, &q).expect("corpus field smooth");
            let mapped = j_matrix(dim).hermitian().matvec(&aug);
            let rg =
                real_gradient(f, &q, crate::calculus::DEFAULT_STEP).expect("corpus field smooth");
            let scale = rg.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let mut res = 0.0f64;
            for (s, &v) in rg.iter().enumerate() {
                res = res.max((mapped[s] - Quaternion::real(v)).modulus());
            }
            records.push(CheckRecord::passing(
                "gradient_correspondence",
                &label,
                None,
                None,
                res / scale,
                GRADIENT_TOL,
            ));

            // Hessian correspondence and friends share one pair of Hessians
            let h_hh = augmented_hessian(f, &q).expect("corpus field smooth");
            let h_rr = real_hessian(f, &q, REAL_HESSIAN_STEP).expect("corpus field smooth");
            let j = j_matrix(dim);
            let mapped = j.hermitian().matmul(&h_hh.m).matmul(&j);
            let mut res = 0.0f64;
            let mut hscale = 1.0f64;
            for r in 0..4 * dim {
                for c in 0..4 * dim {
                    hscale = hscale.max(h_rr[(r, c)].abs());
                    res = res.max((mapped[(r, c)] - Quaternion::real(h_rr[(r, c)])).modulus());
                }
            }
            records.push(CheckRecord::passing(
                "hessian_correspondence",
                &label,
                None,
                None,
                res / hscale,
                HESSIAN_TOL,
            ));

            // eigenvalue shift, 10 random λ
            let mut res = 0.0f64;
            for _ in 0..10 {
                let lambda = rng.random_range(-1.0..1.0);
                res = res.max(eigen_shift_residual(&h_hh.m, &h_rr, lambda));
            }
            records.push(CheckRecord::passing(
                "eigen_shift",
                &label,
                None,
                None,
                res / hscale,
                EIGEN_SHIFT_TOL,
            ));

            // Hermitian structure of H_hh* and H_qq*
            let bundle = hessian_bundle(f, &q).expect("corpus field smooth");
            let herm = h_hh.hermitian_deviation().max(bundle.asymmetry) / hscale;
            records.push(CheckRecord::passing(
                "hermitian_structure",
                &label,
                None,
                None,
                herm,
                HERMITIAN_TOL,
            ));
        }

        // Laplacian identity on scalar restrictions: canonical and random μ
        if dim == 1 {
            for f in &fields {
                let q = random_point(1, &mut rng);
                let h_rr = real_hessian(f, &q, REAL_HESSIAN_STEP).expect("corpus field smooth");
                let trace: f64 = (0..4).map(|s| h_rr[(s, s)]).sum();
                let mut mus: Vec<Quaternion> = crate::calculus::CANONICAL_MUS.to_vec();
                mus.push(crate::fields::random_unit(&mut rng));
                mus.push(crate::fields::random_unit(&mut rng));
                for mu in mus {
                    let d = second_derivative(f, &q, (mu, false), (mu, true))
                        .expect("corpus field smooth");
                    let res = (d * 16.0 - Quaternion::real(trace)).modulus() / trace.abs().max(1.0);
                    records.push(CheckRecord::passing(
                        "laplacian",
                        f.name(),
                        Some(mu),
                        None,
                        res,
                        LAPLACIAN_TOL,
                    ));
                }
            }
        }
    }

    records
}

/// The full suite the `verify` command runs: rules plus identities.
pub fn run_full_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let mut records = run_rule_suite(cfg);
    records.extend(run_identity_suite(cfg));
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let cfg = VerifyConfig {
            points: 4,
            mus: 2,
            ..VerifyConfig::default()
        };
        let records = run_full_suite(&cfg);
        let failures: Vec<&CheckRecord> = records.iter().filter(|r| !r.pass).collect();
        assert!(
            failures.is_empty(),
            "unexpected failures: {:?}",
            failures
                .iter()
                .map(|r| format!("{}/{} residual {}", r.rule, r.field, r.residual))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn fault_injection_fails_product_checks() {
        let cfg = VerifyConfig {
            points: 2,
            mus: 1,
            inject_fault: true,
            ..VerifyConfig::default()
        };
        let records = run_rule_suite(&cfg);
        assert!(!all_pass(&records));
        let product_failures = records
            .iter()
            .filter(|r| r.rule == "product" && !r.pass)
            .count();
        assert!(product_failures > 0);
    }

    #[test]
    fn records_serialize_with_expected_keys() {
        let cfg = VerifyConfig {
            points: 1,
            mus: 1,
            ..VerifyConfig::default()
        };
        let records = run_rule_suite(&cfg);
        let json = serde_json::to_string(&records).unwrap();
        for key in [
            "\"rule\"",
            "\"field\"",
            "\"mu\"",
            "\"nu\"",
            "\"residual\"",
            "\"pass\"",
        ] {
            assert!(json.contains(key), "missing key {key}");
        }
        let back: Vec<CheckRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), records.len());
    }

    #[test]
    fn determinism_under_fixed_seed() {
        let cfg = VerifyConfig {
            points: 2,
            mus: 1,
            ..VerifyConfig::default()
        };
        let a = serde_json::to_string(&run_full_suite(&cfg)).unwrap();
        let b = serde_json::to_string(&run_full_suite(&cfg)).unwrap();
        assert_eq!(a, b);
    }
}
