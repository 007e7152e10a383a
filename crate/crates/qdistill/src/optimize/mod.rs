//! Numerical estimation of the supremum singlet fraction over filter
//! classes, plus the closed-form two-qubit machinery: Pauli correlation
//! matrix, the (1 + N)/4 fidelity formula and the analytic one-way optimum
//! for the quasidistillable family.
//!
//! The search is a random-restart Nelder-Mead over the real parameters of
//! the complex filter entries, projected to the unit Hilbert-Schmidt sphere
//! after every step. Results are lower bounds on the true supremum.

mod nelder_mead;

pub use nelder_mead::{NmOptions, NmResult};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densmat::{hermitian_eig, svd, ComplexMatrix, DensityMatrix, Side};
use crate::locc::{filtered_m_fraction, FilterNorm, LoccError, LocalFilter};
use crate::states::complex_gaussian;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("operation requires a 2x2 system, got {dim_a}x{dim_b}")]
    NotTwoQubit { dim_a: usize, dim_b: usize },
    #[error("m = {m} out of range, need 1 <= m <= {max}")]
    MOutOfRange { m: usize, max: usize },
    #[error(transparent)]
    Locc(#[from] LoccError),
}

/// Protocol class the search optimizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterClassTag {
    /// Both parties apply arbitrary conclusive filters.
    TwoWay,
    /// Only A filters conclusively; B is fixed to the identity.
    OneWayAFilters,
    /// Only B filters conclusively; A is fixed to the identity.
    OneWayBFilters,
    /// Trace-preserving on both sides, approximated by twirl plus a local
    /// unitary search.
    DeterministicTwoWay,
}

/// A filter class together with the target m-singlet fraction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterClass {
    pub tag: FilterClassTag,
    pub m: usize,
}

impl FilterClass {
    pub fn two_way(m: usize) -> Self {
        Self { tag: FilterClassTag::TwoWay, m }
    }

    pub fn one_way_a(m: usize) -> Self {
        Self { tag: FilterClassTag::OneWayAFilters, m }
    }

    pub fn one_way_b(m: usize) -> Self {
        Self { tag: FilterClassTag::OneWayBFilters, m }
    }

    pub fn deterministic_two_way(m: usize) -> Self {
        Self { tag: FilterClassTag::DeterministicTwoWay, m }
    }
}

/// Search budget; restarts are independent and seeded individually from
/// `seed`, so a fixed budget reproduces the report exactly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_xtol")]
    pub xtol: f64,
    #[serde(default = "default_ftol")]
    pub ftol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_restarts() -> usize {
    64
}
fn default_max_iters() -> usize {
    400
}
fn default_xtol() -> f64 {
    1e-10
}
fn default_ftol() -> f64 {
    1e-13
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            restarts: default_restarts(),
            max_iters: default_max_iters(),
            xtol: default_xtol(),
            ftol: default_ftol(),
            seed: 0,
        }
    }
}

impl Budget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// Outcome of a singlet-fraction search: a lower bound on the supremum over
/// the class, the filters achieving it, and the per-restart progress trace.
#[derive(Debug, Clone)]
pub struct OptimizationReport {
    pub best_f: f64,
    pub best_filters: (LocalFilter, LocalFilter),
    pub restarts: usize,
    pub evals: usize,
    pub converged: bool,
    /// (restart index, best value seen so far) - nondecreasing.
    pub history: Vec<(usize, f64)>,
}

/// Which matrices the parameter vector encodes.
#[derive(Clone, Copy)]
enum Encoding {
    /// General complex matrices, HS-projected; `None` side is pinned to I.
    Filters { vary_a: bool, vary_b: bool },
    /// Hermitian generators of local unitaries on both sides.
    Unitaries,
}

struct Parameterization {
    dim_a: usize,
    dim_b: usize,
    encoding: Encoding,
}

impl Parameterization {
    fn len(&self) -> usize {
        match self.encoding {
            Encoding::Filters { vary_a, vary_b } => {
                let mut n = 0;
                if vary_a {
                    n += 2 * self.dim_a * self.dim_a;
                }
                if vary_b {
                    n += 2 * self.dim_b * self.dim_b;
                }
                n
            }
            Encoding::Unitaries => self.dim_a * self.dim_a + self.dim_b * self.dim_b,
        }
    }

    /// Project the raw parameters in place (filters only) and decode the
    /// (A, B) matrix pair. Returns `None` when a varying block is numerically
    /// zero and cannot be projected.
    fn decode(&self, x: &mut [f64]) -> Option<(ComplexMatrix, ComplexMatrix)> {
        match self.encoding {
            Encoding::Filters { vary_a, vary_b } => {
                let mut offset = 0;
                let a = if vary_a {
                    let m = project_block(&mut x[offset..offset + 2 * self.dim_a * self.dim_a], self.dim_a)?;
                    offset += 2 * self.dim_a * self.dim_a;
                    m
                } else {
                    ComplexMatrix::identity(self.dim_a)
                };
                let b = if vary_b {
                    project_block(&mut x[offset..offset + 2 * self.dim_b * self.dim_b], self.dim_b)?
                } else {
                    ComplexMatrix::identity(self.dim_b)
                };
                Some((a, b))
            }
            Encoding::Unitaries => {
                let na = self.dim_a * self.dim_a;
                let ua = unitary_from_params(&x[..na], self.dim_a);
                let ub = unitary_from_params(&x[na..], self.dim_b);
                Some((ua, ub))
            }
        }
    }

    /// Identity-equivalent starting point.
    fn identity_start(&self) -> Vec<f64> {
        match self.encoding {
            Encoding::Filters { vary_a, vary_b } => {
                let mut x = Vec::with_capacity(self.len());
                if vary_a {
                    x.extend(identity_block(self.dim_a));
                }
                if vary_b {
                    x.extend(identity_block(self.dim_b));
                }
                x
            }
            Encoding::Unitaries => vec![0.0; self.len()],
        }
    }
}

fn identity_block(d: usize) -> Vec<f64> {
    let mut x = vec![0.0; 2 * d * d];
    for i in 0..d {
        x[2 * (i * d + i)] = 1.0;
    }
    x
}

/// Normalize the (re, im) parameter block to unit Euclidean norm (= unit HS
/// norm of the matrix) and decode it.
fn project_block(x: &mut [f64], d: usize) -> Option<ComplexMatrix> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return None;
    }
    for v in x.iter_mut() {
        *v /= norm;
    }
    Some(ComplexMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        Complex64::new(x[k], x[k + 1])
    }))
}

/// U = exp(iH) with H Hermitian assembled from d^2 real parameters
/// (d diagonal entries, then re/im pairs for the upper triangle).
fn unitary_from_params(x: &[f64], d: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h.set(i, i, Complex64::new(x[i], 0.0));
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = Complex64::new(x[k], x[k + 1]);
            h.set(i, j, z);
            h.set(j, i, z.conj());
            k += 2;
        }
    }
    let eig = hermitian_eig(&h);
    let mut phase = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        phase.set(i, i, Complex64::new(eig.values[i].cos(), eig.values[i].sin()));
    }
    eig.vectors.matmul(&phase).matmul(&eig.vectors.adjoint())
}

struct RestartOutcome {
    x: Vec<f64>,
    value: f64,
    evals: usize,
    converged: bool,
}

/// Maximize the m-singlet fraction of the filtered state over the class.
///
/// One-way classes pin the silent side's conclusive filter to the identity
/// (a trace-preserving map there cannot change what the filtering side sees).
/// `deterministic_two_way` searches local unitaries, the twirl-compatible
/// trace-preserving approximation. The returned value is a lower bound on
/// the supremum; `converged = false` flags a search that only stopped on the
/// iteration cap.
pub fn fsup_estimate(
    s: &DensityMatrix,
    cls: &FilterClass,
    budget: &Budget,
) -> Result<OptimizationReport, OptimizeError> {
    let max_m = s.min_dim();
    if cls.m < 1 || cls.m > max_m {
        return Err(OptimizeError::MOutOfRange { m: cls.m, max: max_m });
    }
    let encoding = match cls.tag {
        FilterClassTag::TwoWay => Encoding::Filters { vary_a: true, vary_b: true },
        FilterClassTag::OneWayAFilters => Encoding::Filters { vary_a: true, vary_b: false },
        FilterClassTag::OneWayBFilters => Encoding::Filters { vary_a: false, vary_b: true },
        FilterClassTag::DeterministicTwoWay => Encoding::Unitaries,
    };
    let param = Parameterization {
        dim_a: s.dim_a(),
        dim_b: s.dim_b(),
        encoding,
    };
    let m = cls.m;
    let opts = NmOptions {
        max_iters: budget.max_iters,
        xtol: budget.xtol,
        ftol: budget.ftol,
    };
    let restarts = budget.restarts.max(1);

    let run_restart = |k: usize| -> RestartOutcome {
        let x0 = if k == 0 {
            param.identity_start()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(
                budget.seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            (0..param.len()).map(|_| complex_gaussian(&mut rng).re).collect()
        };
        let mut objective = |x: &mut [f64]| -> f64 {
            match param.decode(x) {
                Some((a, b)) => filtered_m_fraction(s, &a, &b, m).unwrap_or(0.0),
                None => 0.0,
            }
        };
        let r = nelder_mead::maximize(&mut objective, x0, 0.35, &opts);
        RestartOutcome {
            x: r.x,
            value: r.value,
            evals: r.evals,
            converged: r.converged,
        }
    };

    let results: Vec<RestartOutcome> = (0..restarts).into_par_iter().map(run_restart).collect();

    // Deterministic merge in restart order; ties go to the better-conditioned
    // filter pair (largest success probability for the same fraction).
    let mut best_idx = 0usize;
    let mut best_cond = f64::INFINITY;
    let mut history = Vec::with_capacity(restarts);
    let mut evals = 0usize;
    for (k, r) in results.iter().enumerate() {
        evals += r.evals;
        let mut take = false;
        if k == 0 || r.value > results[best_idx].value + 1e-12 {
            take = true;
        } else if (r.value - results[best_idx].value).abs() <= 1e-12 {
            let cond = pair_condition(&param, &mut r.x.clone());
            if cond < best_cond {
                take = true;
            }
        }
        if take {
            best_idx = k;
            best_cond = pair_condition(&param, &mut results[k].x.clone());
        }
        history.push((k, results[best_idx].value));
    }

    let winner = &results[best_idx];
    let (a, b) = param
        .decode(&mut winner.x.clone())
        .expect("winning point decodes");
    let best_filters = (
        LocalFilter::new(Side::A, a, FilterNorm::HsUnit)?,
        LocalFilter::new(Side::B, b, FilterNorm::HsUnit)?,
    );
    Ok(OptimizationReport {
        best_f: winner.value,
        best_filters,
        restarts,
        evals,
        converged: winner.converged,
        history,
    })
}

fn pair_condition(param: &Parameterization, x: &mut [f64]) -> f64 {
    match param.decode(x) {
        Some((a, b)) => condition_number(&a).max(condition_number(&b)),
        None => f64::INFINITY,
    }
}

fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = svd(m).singular_values;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

fn pauli() -> [ComplexMatrix; 3] {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    [
        ComplexMatrix::from_rows(vec![vec![z(0.0, 0.0), z(1.0, 0.0)], vec![z(1.0, 0.0), z(0.0, 0.0)]])
            .unwrap(),
        ComplexMatrix::from_rows(vec![vec![z(0.0, 0.0), z(0.0, -1.0)], vec![z(0.0, 1.0), z(0.0, 0.0)]])
            .unwrap(),
        ComplexMatrix::from_rows(vec![vec![z(1.0, 0.0), z(0.0, 0.0)], vec![z(0.0, 0.0), z(-1.0, 0.0)]])
            .unwrap(),
    ]
}

/// The 3x3 Pauli correlation matrix T_ij = Tr[rho (sigma_i x sigma_j)] of a
/// two-qubit state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub t: [[f64; 3]; 3],
}

impl CorrelationMatrix {
    pub fn singular_values(&self) -> [f64; 3] {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new(self.t[i][j], 0.0));
        let sv = svd(&m).singular_values;
        [sv[0], sv[1], sv[2]]
    }

    /// N = sum of singular values of T (the trace norm).
    pub fn n(&self) -> f64 {
        self.singular_values().iter().sum()
    }
}

fn require_two_qubit(s: &DensityMatrix) -> Result<(), OptimizeError> {
    if s.dim_a() != 2 || s.dim_b() != 2 {
        return Err(OptimizeError::NotTwoQubit {
            dim_a: s.dim_a(),
            dim_b: s.dim_b(),
        });
    }
    Ok(())
}

pub fn correlation_matrix(s: &DensityMatrix) -> Result<CorrelationMatrix, OptimizeError> {
    require_two_qubit(s)?;
    let sigma = pauli();
    let mut t = [[0.0f64; 3]; 3];
    for (i, si) in sigma.iter().enumerate() {
        for (j, sj) in sigma.iter().enumerate() {
            let obs = si.kron(sj);
            t[i][j] = s.mat().matmul(&obs).trace().re;
        }
    }
    Ok(CorrelationMatrix { t })
}

/// The correlation-based fidelity formula (1 + N(rho))/4 for a two-qubit
/// state, with N the trace norm of the Pauli correlation matrix. On states
/// aligned with Psi_+ this matches the singlet fraction; in general it is an
/// alignment-free quantity, so compare with [`crate::densmat::singlet_fraction`]
/// when both are available.
pub fn fidelity_via_n(s: &DensityMatrix) -> Result<f64, OptimizeError> {
    Ok((1.0 + correlation_matrix(s)?.n()) / 4.0)
}

/// F(t) for a Bob-side diagonal filter diag(1, t) on the two-qubit
/// quasidistillable state p P_+ + (1-p)|01><01|.
pub fn oneway_filter_fidelity(p: f64, t: f64) -> f64 {
    p * (1.0 + t) * (1.0 + t) / (2.0 * p * (1.0 + t * t) + 4.0 * (1.0 - p) * t * t)
}

/// Closed-form maximum of [`oneway_filter_fidelity`] over t > 0:
/// t* = p/(2 - p), F* = 1/(2 - p). At p = 1/2 this is the filter
/// proportional to diag(3, 1) reaching F = 2/3.
pub fn oneway_analytic_optimum(p: f64) -> (f64, f64) {
    assert!(p > 0.0 && p < 1.0, "oneway_analytic_optimum: p must be in (0,1)");
    let t_star = p / (2.0 - p);
    let f_star = 1.0 / (2.0 - p);
    (t_star, f_star)
}
