//! Conclusive local filtering, trace-preserving Kraus channels and twirling.
//!
//! A filtering operation keeps one measurement branch,
//! rho -> (A x B) rho (A x B)^dagger / trace. The reported success
//! probability always refers to the canonical rescaling in which each
//! filter's largest singular value is 1 - the largest multiple that still
//! fits inside a physical two-outcome measurement {V, sqrt(I - V^dagger V)}.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densmat::{
    hermitian_eig, singlet_fraction, svd, trace_norm, ComplexMatrix, DensityMatrix, DensmatError,
    Side,
};
use crate::states::{complex_gaussian, isotropic};

/// Conclusive branches with probability at or below this are reported as
/// [`LoccError::VanishingOutcome`] instead of a meaningless state.
pub const PROB_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum LoccError {
    #[error("conclusive branch has vanishing probability ({prob:.3e})")]
    VanishingOutcome { prob: f64 },
    #[error("operation requires d_A = d_B, got {dim_a}x{dim_b}")]
    NonSquareSystem { dim_a: usize, dim_b: usize },
    #[error("Kraus operators are not trace-preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },
    #[error("filter acts on side {expected:?}, but {got:?} was supplied")]
    WrongSide { expected: Side, got: Side },
    #[error("operator is {rows}x{cols}, expected {dim}x{dim} for side {side:?}")]
    FilterDimension {
        rows: usize,
        cols: usize,
        dim: usize,
        side: Side,
    },
    #[error("filter matrix is zero")]
    ZeroFilter,
    #[error("Kraus operator shapes are inconsistent with declared dimensions")]
    KrausShape,
    #[error(transparent)]
    Densmat(#[from] DensmatError),
}

/// Declared normalization of a filter matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterNorm {
    /// sqrt(Tr V^dagger V) = 1.
    HsUnit,
    /// Tr|V| = 1.
    TraceUnit,
    /// No constraint.
    None,
}

/// One party's conclusive operation element: an arbitrary complex square
/// matrix acting on that party's subsystem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LocalFilterJson", into = "LocalFilterJson")]
pub struct LocalFilter {
    side: Side,
    mat: ComplexMatrix,
    normalization: FilterNorm,
}

impl LocalFilter {
    /// Rescales `mat` to satisfy the declared normalization.
    pub fn new(side: Side, mat: ComplexMatrix, normalization: FilterNorm) -> Result<Self, LoccError> {
        if !mat.is_square() || mat.rows() == 0 {
            return Err(LoccError::FilterDimension {
                rows: mat.rows(),
                cols: mat.cols(),
                dim: mat.rows().max(1),
                side,
            });
        }
        if !mat.all_finite() {
            return Err(LoccError::Densmat(DensmatError::NonFiniteEntry));
        }
        let mat = match normalization {
            FilterNorm::HsUnit => {
                let n = mat.hs_norm();
                if n <= 0.0 {
                    return Err(LoccError::ZeroFilter);
                }
                mat.scale_real(1.0 / n)
            }
            FilterNorm::TraceUnit => {
                let n = trace_norm(&mat);
                if n <= 0.0 {
                    return Err(LoccError::ZeroFilter);
                }
                mat.scale_real(1.0 / n)
            }
            FilterNorm::None => {
                if mat.max_abs() == 0.0 {
                    return Err(LoccError::ZeroFilter);
                }
                mat
            }
        };
        Ok(Self {
            side,
            mat,
            normalization,
        })
    }

    pub fn identity(side: Side, dim: usize) -> Self {
        Self {
            side,
            mat: ComplexMatrix::identity(dim),
            normalization: FilterNorm::None,
        }
    }

    /// Diagonal filter from real entries.
    pub fn diagonal(side: Side, entries: &[f64]) -> Result<Self, LoccError> {
        Self::new(side, ComplexMatrix::diagonal_real(entries), FilterNorm::None)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn normalization(&self) -> FilterNorm {
        self.normalization
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        svd(&self.mat).singular_values.first().copied().unwrap_or(0.0)
    }

    /// Condition number sigma_max / sigma_min (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        let sv = svd(&self.mat).singular_values;
        let smax = sv.first().copied().unwrap_or(0.0);
        let smin = sv.last().copied().unwrap_or(0.0);
        if smin <= 0.0 {
            f64::INFINITY
        } else {
            smax / smin
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalFilterJson {
    side: Side,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    #[serde(default = "default_norm")]
    normalization: FilterNorm,
}

fn default_norm() -> FilterNorm {
    FilterNorm::None
}

impl From<LocalFilter> for LocalFilterJson {
    fn from(f: LocalFilter) -> Self {
        let parts = crate::densmat::matrix_parts(&f.mat);
        LocalFilterJson {
            side: f.side,
            re: parts.0,
            im: parts.1,
            normalization: f.normalization,
        }
    }
}

impl TryFrom<LocalFilterJson> for LocalFilter {
    type Error = LoccError;

    fn try_from(j: LocalFilterJson) -> Result<Self, LoccError> {
        let mat = crate::densmat::matrix_from_parts(j.re, j.im)?;
        LocalFilter::new(j.side, mat, j.normalization)
    }
}

/// Trace-preserving completely positive map as a list of Kraus operators,
/// each `output_dim x input_dim`, with sum_k K_k^dagger K_k = I.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "KrausChannelJson", into = "KrausChannelJson")]
pub struct KrausChannel {
    input_dim: usize,
    output_dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        kraus_ops: Vec<ComplexMatrix>,
    ) -> Result<Self, LoccError> {
        if input_dim == 0
            || output_dim == 0
            || kraus_ops.is_empty()
            || kraus_ops
                .iter()
                .any(|k| k.rows() != output_dim || k.cols() != input_dim || !k.all_finite())
        {
            return Err(LoccError::KrausShape);
        }
        let ch = Self {
            input_dim,
            output_dim,
            kraus_ops,
        };
        let deviation = ch.tp_deviation();
        if deviation > 1e-9 {
            return Err(LoccError::NotTracePreserving { deviation });
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            input_dim: dim,
            output_dim: dim,
            kraus_ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// rho -> (1 - noise) rho + noise * I/d, through the Weyl-operator Kraus
    /// set {sqrt(1 - noise (d^2-1)/d^2) I} u {sqrt(noise)/d X^a Z^b}.
    pub fn depolarizing(dim: usize, noise: f64) -> Result<Self, LoccError> {
        assert!((0.0..=1.0).contains(&noise), "noise must be in [0,1]");
        let d = dim;
        let mut ops = Vec::with_capacity(d * d);
        let id_weight = (1.0 - noise * ((d * d - 1) as f64) / ((d * d) as f64)).sqrt();
        ops.push(ComplexMatrix::identity(d).scale_real(id_weight));
        let w = (noise).sqrt() / d as f64;
        for a in 0..d {
            for b in 0..d {
                if a == 0 && b == 0 {
                    continue;
                }
                // (X^a Z^b)[r][c] = omega^{b c} delta_{r, c+a mod d}
                let op = ComplexMatrix::from_fn(d, d, |r, c| {
                    if r == (c + a) % d {
                        let phase = 2.0 * std::f64::consts::PI * (b * c) as f64 / d as f64;
                        Complex64::new(phase.cos(), phase.sin()).scale(w)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                ops.push(op);
            }
        }
        Self::new(d, d, ops)
    }

    /// Seeded random trace-preserving channel: Gaussian blocks G_k whitened by
    /// the inverse square root of sum G_k^dagger G_k.
    pub fn random(input_dim: usize, output_dim: usize, n_ops: usize, seed: u64) -> Self {
        assert!(n_ops >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks: Vec<ComplexMatrix> = (0..n_ops)
            .map(|_| ComplexMatrix::from_fn(output_dim, input_dim, |_, _| complex_gaussian(&mut rng)))
            .collect();
        let mut s = ComplexMatrix::zeros(input_dim, input_dim);
        for g in &blocks {
            s = s.add(&g.adjoint().matmul(g));
        }
        // S^{-1/2} via eigendecomposition; S is positive definite almost surely.
        let eig = hermitian_eig(&s);
        let inv_sqrt = {
            let n = input_dim;
            let mut d = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                d.set(i, i, Complex64::new(1.0 / eig.values[i].max(1e-300).sqrt(), 0.0));
            }
            eig.vectors.matmul(&d).matmul(&eig.vectors.adjoint())
        };
        let kraus_ops = blocks.into_iter().map(|g| g.matmul(&inv_sqrt)).collect();
        Self::new(input_dim, output_dim, kraus_ops).expect("whitened Kraus set is TP")
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    /// Max-abs deviation of sum K^dagger K from the identity.
    pub fn tp_deviation(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.input_dim, self.input_dim);
        for k in &self.kraus_ops {
            s = s.add(&k.adjoint().matmul(k));
        }
        s.sub(&ComplexMatrix::identity(self.input_dim)).max_abs()
    }

    /// Apply to a bare matrix: sum_k K m K^dagger.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.kraus_ops {
            out = out.add(&k.matmul(m).matmul(&k.adjoint()));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KrausChannelJson {
    input_dim: usize,
    output_dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
}

impl From<KrausChannel> for KrausChannelJson {
    fn from(c: KrausChannel) -> Self {
        KrausChannelJson {
            input_dim: c.input_dim,
            output_dim: c.output_dim,
            kraus_ops: c.kraus_ops,
        }
    }
}

impl TryFrom<KrausChannelJson> for KrausChannel {
    type Error = LoccError;

    fn try_from(j: KrausChannelJson) -> Result<Self, LoccError> {
        KrausChannel::new(j.input_dim, j.output_dim, j.kraus_ops)
    }
}

/// Result of one conclusive branch: the post-operation state, the success
/// probability at canonical filter scaling, and the plain singlet fraction of
/// the post state.
#[derive(Debug, Clone)]
pub struct LoccOutcome {
    pub post_state: DensityMatrix,
    pub success_prob: f64,
    pub achieved_f: f64,
}

fn check_filter(f: &LocalFilter, expected_side: Side, dim: usize) -> Result<(), LoccError> {
    if f.side() != expected_side {
        return Err(LoccError::WrongSide {
            expected: expected_side,
            got: f.side(),
        });
    }
    if f.mat().rows() != dim {
        return Err(LoccError::FilterDimension {
            rows: f.mat().rows(),
            cols: f.mat().cols(),
            dim,
            side: expected_side,
        });
    }
    Ok(())
}

/// rho -> (A x B) rho (A x B)^dagger / trace, one conclusive branch.
///
/// The post state and its singlet fraction are invariant under rescaling of
/// either filter; the success probability is computed after rescaling each
/// filter so its largest singular value is 1.
pub fn apply_filter_pair(
    s: &DensityMatrix,
    fa: &LocalFilter,
    fb: &LocalFilter,
) -> Result<LoccOutcome, LoccError> {
    check_filter(fa, Side::A, s.dim_a())?;
    check_filter(fb, Side::B, s.dim_b())?;
    let sa = fa.spectral_norm();
    let sb = fb.spectral_norm();
    if sa <= 0.0 || sb <= 0.0 {
        return Err(LoccError::ZeroFilter);
    }
    let m = fa.mat().kron(fb.mat());
    let raw = m.matmul(s.mat()).matmul(&m.adjoint());
    let raw_trace = raw.trace().re;
    let success_prob = raw_trace / (sa * sa * sb * sb);
    if success_prob <= PROB_FLOOR {
        return Err(LoccError::VanishingOutcome { prob: success_prob });
    }
    let post = raw.scale_real(1.0 / raw_trace).hermitized();
    let post_state = DensityMatrix::new(post, s.dim_a(), s.dim_b())?;
    let achieved_f = singlet_fraction(&post_state, post_state.min_dim());
    Ok(LoccOutcome {
        post_state,
        success_prob,
        achieved_f,
    })
}

/// One-way branch: the communicating side applies a conclusive filter `v`
/// while the silent side receives the trace-preserving channel `ch`,
/// rho -> (V x I)(I x Lambda)(rho)(V x I)^dagger / trace (or mirrored,
/// following `v.side()`). The silent side's reduced state depends only on V.
pub fn apply_one_way(
    s: &DensityMatrix,
    v: &LocalFilter,
    ch: &KrausChannel,
) -> Result<LoccOutcome, LoccError> {
    let filter_side = v.side();
    let channel_side = filter_side.other();
    let after_channel = apply_channel(s, ch, channel_side)?;
    let id = LocalFilter::identity(
        channel_side,
        match channel_side {
            Side::A => after_channel.dim_a(),
            Side::B => after_channel.dim_b(),
        },
    );
    match filter_side {
        Side::A => apply_filter_pair(&after_channel, v, &id),
        Side::B => apply_filter_pair(&after_channel, &id, v),
    }
}

/// Apply a trace-preserving channel to one side:
/// sum_k (I x K_k) rho (I x K_k)^dagger (or mirrored).
pub fn apply_channel(
    s: &DensityMatrix,
    ch: &KrausChannel,
    side: Side,
) -> Result<DensityMatrix, LoccError> {
    let local_dim = match side {
        Side::A => s.dim_a(),
        Side::B => s.dim_b(),
    };
    if ch.input_dim() != local_dim {
        return Err(LoccError::KrausShape);
    }
    let (da, db) = (s.dim_a(), s.dim_b());
    let mut out: Option<ComplexMatrix> = None;
    for k in ch.kraus_ops() {
        let lifted = match side {
            Side::A => k.kron(&ComplexMatrix::identity(db)),
            Side::B => ComplexMatrix::identity(da).kron(k),
        };
        let term = lifted.matmul(s.mat()).matmul(&lifted.adjoint());
        out = Some(match out {
            Some(acc) => acc.add(&term),
            None => term,
        });
    }
    let mat = out.expect("channel has at least one Kraus operator").hermitized();
    let (new_da, new_db) = match side {
        Side::A => (ch.output_dim(), db),
        Side::B => (da, ch.output_dim()),
    };
    Ok(DensityMatrix::new(mat, new_da, new_db)?)
}

/// U x U* twirling as the exact projection onto the isotropic family: the
/// output is the isotropic state with the input's singlet fraction. Exact,
/// no Haar sampling.
pub fn twirl(s: &DensityMatrix) -> Result<DensityMatrix, LoccError> {
    if s.dim_a() != s.dim_b() {
        return Err(LoccError::NonSquareSystem {
            dim_a: s.dim_a(),
            dim_b: s.dim_b(),
        });
    }
    let d = s.dim_a();
    Ok(isotropic(singlet_fraction(s, d), d))
}

/// Singlet-fraction fast path for optimizer loops: the m-singlet fraction of
/// (A x B) rho (A x B)^dagger / trace without building the post state.
/// Returns `None` when the branch probability (at canonical scaling sigma_max
/// = 1 for both filters) falls at or below [`PROB_FLOOR`].
pub fn filtered_m_fraction(
    s: &DensityMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    m: usize,
) -> Option<f64> {
    let (da, db) = (s.dim_a(), s.dim_b());
    debug_assert!(a.rows() == da && a.is_square());
    debug_assert!(b.rows() == db && b.is_square());
    debug_assert!(m >= 1 && m <= da.min(db));

    // w = (A x B)^dagger |Psi_+^m> via the coefficient-matrix identity
    // (A x B)|phi> has coefficient matrix A C B^T.
    let w_coeff = {
        let inv_sqrt_m = 1.0 / (m as f64).sqrt();
        // C_m = inv_sqrt_m * sum_{i<m} e_i e_i^T, so A^dagger C_m conj(B) is
        // inv_sqrt_m times (first m columns of A^dagger) * (first m rows of conj(B)).
        ComplexMatrix::from_fn(da, db, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                acc += a.get(k, i).conj() * b.get(k, j).conj();
            }
            acc.scale(inv_sqrt_m)
        })
    };
    let w: Vec<Complex64> = (0..da * db)
        .map(|idx| w_coeff.get(idx / db, idx % db))
        .collect();

    // Numerator <w| rho |w>.
    let rho_w = s.mat().mul_vec(&w);
    let numer: f64 = w
        .iter()
        .zip(&rho_w)
        .map(|(wi, ri)| (wi.conj() * ri).re)
        .sum();

    // Denominator Tr(rho (A^dagger A x B^dagger B)).
    let ga = a.adjoint().matmul(a);
    let gb = b.adjoint().matmul(b);
    let mut denom = 0.0;
    for r in 0..da * db {
        let (ra, rb) = (r / db, r % db);
        for c in 0..da * db {
            let (ca, cb) = (c / db, c % db);
            denom += (s.mat().get(r, c) * ga.get(ca, ra) * gb.get(cb, rb)).re;
        }
    }

    let smax_a = svd(a).singular_values[0];
    let smax_b = svd(b).singular_values[0];
    if smax_a <= 0.0 || smax_b <= 0.0 {
        return None;
    }
    let prob = denom / (smax_a * smax_a * smax_b * smax_b);
    if prob <= PROB_FLOOR || denom <= 0.0 {
        return None;
    }
    Some((numer / denom).clamp(0.0, 1.0))
}
