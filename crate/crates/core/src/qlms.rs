//! QLMS adaptive filtering.
//!
//! The error is `e(n) = d(n) - wᵀ(n)x(n)` and the weight update is
//! `w(n+1) = w(n) + ½α e(n) x*(n)`, with the quaternion products in exactly
//! that order: product order is load-bearing everywhere in this module
//! (`e·x*` and `x*·e` differ). The ½ factor is kept explicit so the
//! component-wise derivation can be checked for exact agreement; callers who
//! want it absorbed simply double α. A conjugate-data variant starting from
//! `e = d - wᴴx` with update `w + α x e*` is also provided.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::QVector;
use crate::quat::Quaternion;

/// Adaptive filter weights plus step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub w: QVector,
    pub n: usize,
}

impl FilterState {
    pub fn new(taps: usize) -> Self {
        Self {
            w: QVector::zeros(taps),
            n: 0,
        }
    }

    pub fn with_weights(w: QVector) -> Self {
        Self { w, n: 0 }
    }
}

/// One input regressor and its desired output.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: QVector,
    pub d: Quaternion,
}

/// Which derivation of the update to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlmsVariant {
    /// `w + ½α e x*` from the GHR gradient.
    Ghr,
    /// Same update assembled from the four real subgradients.
    Componentwise,
    /// `e = d - wᴴx`, `w + α x e*`.
    Conjugate,
}

/// GHR-derived step: `e = d - wᵀx`, `w' = w + ½α e x*`.
///
/// A zero step size is allowed and leaves the weights unchanged (useful for
/// flat-curve control runs).
pub fn qlms_step(state: &FilterState, sample: &Sample, alpha: f64) -> (FilterState, Quaternion) {
    assert!(alpha >= 0.0, "step size must be nonnegative");
    assert_eq!(state.w.len(), sample.x.len(), "tap count mismatch");
    let e = sample.d - state.w.dot_t(&sample.x);
    let w = QVector::from_vec(
        state
            .w
            .iter()
            .zip(sample.x.iter())
            .map(|(&wn, &xn)| wn + (e * xn.conjugate()) * (0.5 * alpha))
            .collect(),
    );
    (FilterState { w, n: state.n + 1 }, e)
}

/// Component-wise step: assembles the update from the four real subgradients
///
/// ```text
/// ∇_{w_a}J = -e*x - x*e          ∇_{w_b}J = -e*ix + x*ie
/// ∇_{w_c}J = -e*jx + x*je        ∇_{w_d}J = -e*kx + x*ke
/// ```
///
/// via `w' = w - ¼α(∇_{w_a}J + ∇_{w_b}J·i + ∇_{w_c}J·j + ∇_{w_d}J·k)`.
/// Algebraically identical to [`qlms_step`]; kept separate so the identity
/// is testable.
pub fn qlms_componentwise_step(
    state: &FilterState,
    sample: &Sample,
    alpha: f64,
) -> (FilterState, Quaternion) {
    assert!(alpha >= 0.0, "step size must be nonnegative");
    assert_eq!(state.w.len(), sample.x.len(), "tap count mismatch");
    let e = sample.d - state.w.dot_t(&sample.x);
    let ec = e.conjugate();
    let w = QVector::from_vec(
        state
            .w
            .iter()
            .zip(sample.x.iter())
            .map(|(&wn, &xn)| {
                let xc = xn.conjugate();
                let ga = -(ec * xn) - xc * e;
                let gb = -(ec * Quaternion::I * xn) + xc * Quaternion::I * e;
                let gc = -(ec * Quaternion::J * xn) + xc * Quaternion::J * e;
                let gd = -(ec * Quaternion::K * xn) + xc * Quaternion::K * e;
                let grad = ga + gb * Quaternion::I + gc * Quaternion::J + gd * Quaternion::K;
                wn - grad * (0.25 * alpha)
            })
            .collect(),
    );
    (FilterState { w, n: state.n + 1 }, e)
}

/// Conjugate-data variant: `e = d - wᴴx`, `w' = w + α x e*`.
pub fn qlms_conjugate_variant_step(
    state: &FilterState,
    sample: &Sample,
    alpha: f64,
) -> (FilterState, Quaternion) {
    assert!(alpha >= 0.0, "step size must be nonnegative");
    assert_eq!(state.w.len(), sample.x.len(), "tap count mismatch");
    let e = sample.d - state.w.dot_h(&sample.x);
    let ec = e.conjugate();
    let w = QVector::from_vec(
        state
            .w
            .iter()
            .zip(sample.x.iter())
            .map(|(&wn, &xn)| wn + (xn * ec) * alpha)
            .collect(),
    );
    (FilterState { w, n: state.n + 1 }, e)
}

fn step_with(
    variant: QlmsVariant,
    state: &FilterState,
    sample: &Sample,
    alpha: f64,
) -> (FilterState, Quaternion) {
    match variant {
        QlmsVariant::Ghr => qlms_step(state, sample, alpha),
        QlmsVariant::Componentwise => qlms_componentwise_step(state, sample, alpha),
        QlmsVariant::Conjugate => qlms_conjugate_variant_step(state, sample, alpha),
    }
}

/// Learning curves of one filter run.
#[derive(Debug, Clone)]
pub struct QlmsRun {
    /// `‖w(n) - w_true‖` per step; empty when no ground truth is known.
    pub weight_errors: Vec<f64>,
    /// `|e(n)|²` per step.
    pub squared_errors: Vec<f64>,
    /// Final state after the last processed sample.
    pub state: FilterState,
    /// Set when a weight norm exceeded 1e6; the run stops there.
    pub diverged: bool,
}

/// Stream samples through the filter, recording learning curves.
pub fn qlms_run(
    samples: &[Sample],
    alpha: f64,
    w0: QVector,
    w_true: Option<&QVector>,
    variant: QlmsVariant,
) -> QlmsRun {
    let mut state = FilterState::with_weights(w0);
    let mut weight_errors = Vec::with_capacity(samples.len());
    let mut squared_errors = Vec::with_capacity(samples.len());
    let mut diverged = false;
    for sample in samples {
        let (next, e) = step_with(variant, &state, sample, alpha);
        state = next;
        if let Some(truth) = w_true {
            weight_errors.push((&state.w - truth).norm());
        }
        squared_errors.push(e.norm_sqr());
        let scale = state
            .w
            .norm()
            .max(weight_errors.last().copied().unwrap_or(0.0));
        if !scale.is_finite() || scale > 1e6 {
            diverged = true;
            break;
        }
    }
    QlmsRun {
        weight_errors,
        squared_errors,
        state,
        diverged,
    }
}

/// Synthetic system-identification setup.
#[derive(Debug, Clone, Copy)]
pub struct SignalConfig {
    pub taps: usize,
    pub samples: usize,
    /// Standard deviation per real axis of the additive quaternion noise.
    pub noise_sigma: f64,
}

/// Quaternion with independent `N(0, σ²)` components per axis.
pub fn gaussian_quat(rng: &mut impl Rng, sigma: f64) -> Quaternion {
    let mut draw = || -> f64 {
        let v: f64 = StandardNormal.sample(rng);
        v * sigma
    };
    Quaternion::new(draw(), draw(), draw(), draw())
}

/// Draw a ground-truth weight vector (unit-norm entries) and a sample stream
/// `d = w_trueᵀ x + noise` with white quaternion regressors.
pub fn generate_system_id(cfg: &SignalConfig, rng: &mut impl Rng) -> (QVector, Vec<Sample>) {
    let w_true = QVector::from_vec(
        (0..cfg.taps)
            .map(|_| {
                let mut q = gaussian_quat(rng, 1.0);
                while q.modulus() < 1e-6 {
                    q = gaussian_quat(rng, 1.0);
                }
                q / q.modulus()
            })
            .collect(),
    );
    let samples = (0..cfg.samples)
        .map(|_| {
            let x = QVector::from_vec((0..cfg.taps).map(|_| gaussian_quat(rng, 1.0)).collect());
            let d = w_true.dot_t(&x) + gaussian_quat(rng, cfg.noise_sigma);
            Sample { x, d }
        })
        .collect();
    (w_true, samples)
}

/// Stream CSV with columns `n,x1_a,x1_b,x1_c,x1_d,...,d_a,d_b,d_c,d_d`.
pub fn stream_to_csv(samples: &[Sample]) -> String {
    let taps = samples.first().map_or(0, |s| s.x.len());
    let mut header = String::from("n");
    for t in 1..=taps {
        for axis in ["a", "b", "c", "d"] {
            header.push_str(&format!(",x{t}_{axis}"));
        }
    }
    header.push_str(",d_a,d_b,d_c,d_d\n");
    let mut out = header;
    for (n, s) in samples.iter().enumerate() {
        out.push_str(&n.to_string());
        for q in s.x.iter() {
            out.push_str(&format!(",{},{},{},{}", q.a, q.b, q.c, q.d));
        }
        let d = s.d;
        out.push_str(&format!(",{},{},{},{}\n", d.a, d.b, d.c, d.d));
    }
    out
}

pub fn stream_from_csv(text: &str) -> std::result::Result<Vec<Sample>, String> {
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('n')) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 9 || !(fields.len() - 1).is_multiple_of(4) {
            return Err(format!("line {}: malformed sample row", lineno + 1));
        }
        let vals: Vec<f64> = fields[1..]
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        let quats: Vec<Quaternion> = vals
            .chunks_exact(4)
            .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
            .collect();
        let (x, d) = quats.split_at(quats.len() - 1);
        samples.push(Sample {
            x: QVector::from_vec(x.to_vec()),
            d: d[0],
        });
    }
    Ok(samples)
}
