//! Constructors for the concrete state families used throughout the crate,
//! plus seeded random instances and a JSON-friendly family description.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densmat::{ComplexMatrix, DensityMatrix, DensmatError, PureState};

#[derive(Debug, Error)]
pub enum StateError {
    #[error("m = {m} out of range, need 2 <= m <= {max}")]
    MOutOfRange { m: usize, max: usize },
    #[error("permutation is not a bijection on 0..{d}")]
    InvalidPermutation { d: usize },
    #[error("parameters must be strictly positive, got a = {a}, b = {b}")]
    NonPositiveParameter { a: f64, b: f64 },
    #[error("cannot embed {d_old}x{d_old} system into smaller dimension {d_new}")]
    DimensionShrink { d_old: usize, d_new: usize },
    #[error("rank = {rank} out of range, need 1 <= rank <= {max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("parameter {name} = {value} outside {range}")]
    ParameterRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(transparent)]
    Densmat(#[from] DensmatError),
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// |Psi_+> = (1/sqrt(d)) sum_{i<d} |ii> with d = min(d_a, d_b).
pub fn max_entangled(d_a: usize, d_b: usize) -> PureState {
    assert!(d_a >= 2 && d_b >= 2, "max_entangled: dimensions must be >= 2");
    let d = d_a.min(d_b);
    let mut amps = vec![re(0.0); d_a * d_b];
    let w = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amps[i * d_b + i] = re(w);
    }
    PureState::new(d_a, d_b, amps).expect("unit norm by construction")
}

/// |Psi_+^m> = (1/sqrt(m)) sum_{i<m} |ii>, the maximally entangled state of
/// Schmidt rank exactly m inside d_a x d_b.
pub fn max_entangled_m(d_a: usize, d_b: usize, m: usize) -> Result<PureState, StateError> {
    let max = d_a.min(d_b);
    if m < 2 || m > max {
        return Err(StateError::MOutOfRange { m, max });
    }
    let mut amps = vec![re(0.0); d_a * d_b];
    let w = 1.0 / (m as f64).sqrt();
    for i in 0..m {
        amps[i * d_b + i] = re(w);
    }
    Ok(PureState::new(d_a, d_b, amps).expect("unit norm by construction"))
}

/// The projector P_+ = |Psi_+><Psi_+| on a d x d system.
pub fn max_entangled_projector(d: usize) -> DensityMatrix {
    max_entangled(d, d).to_density()
}

/// The rank-2 mixture p P_+ + (1-p) |01><01| on a d x d system: a maximally
/// entangled state polluted by a single orthogonal product state. Its singlet
/// fraction is exactly p, yet local filtering can push the fraction as close
/// to 1 as desired at ever smaller success probability.
pub fn quasidistillable(p: f64, d: usize) -> DensityMatrix {
    assert!((0.0..=1.0).contains(&p), "quasidistillable: p must be in [0,1]");
    assert!(d >= 2, "quasidistillable: d must be >= 2");
    let plus = max_entangled_projector(d);
    let junk = PureState::basis(d, d, 0, 1).to_density();
    let mat = plus.mat().scale_real(p).add(&junk.mat().scale_real(1.0 - p));
    DensityMatrix::new(mat, d, d).expect("convex mixture of states")
}

/// p P_+ + ((1-p)/d) sum_i |i><i| x |pi(i)><pi(i)| for a permutation pi of
/// 0..d. With no fixed points the separable part is orthogonal to Psi_+ and
/// the singlet fraction equals p.
pub fn permutation_family(p: f64, d: usize, perm: &[usize]) -> Result<DensityMatrix, StateError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(StateError::ParameterRange {
            name: "p",
            value: p,
            range: "(0, 1]",
        });
    }
    if perm.len() != d {
        return Err(StateError::InvalidPermutation { d });
    }
    let mut seen = vec![false; d];
    for &x in perm {
        if x >= d || seen[x] {
            return Err(StateError::InvalidPermutation { d });
        }
        seen[x] = true;
    }
    let plus = max_entangled_projector(d);
    let mut mat = plus.mat().scale_real(p);
    let w = (1.0 - p) / d as f64;
    for i in 0..d {
        let idx = i * d + perm[i];
        let v = mat.get(idx, idx) + re(w);
        mat.set(idx, idx, v);
    }
    Ok(DensityMatrix::new(mat, d, d)?)
}

/// Mixture (b/(a+b)) |Psi><Psi| + (a/(a+b)) |01><01| with
/// |Psi> = a|00> + b|11| on two qubits; (a, b) are renormalized to the unit
/// circle. The second term is the Hermitian product projector |01><01|.
pub fn ab_state(a: f64, b: f64) -> Result<DensityMatrix, StateError> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(StateError::NonPositiveParameter { a, b });
    }
    let norm = (a * a + b * b).sqrt();
    let (a, b) = (a / norm, b / norm);
    let mut amps = vec![re(0.0); 4];
    amps[0] = re(a);
    amps[3] = re(b);
    let psi = PureState::new(2, 2, amps).expect("unit norm by construction");
    let junk = PureState::basis(2, 2, 0, 1).to_density();
    let wa = b / (a + b);
    let wb = a / (a + b);
    let mat = psi
        .to_density()
        .mat()
        .scale_real(wa)
        .add(&junk.mat().scale_real(wb));
    Ok(DensityMatrix::new(mat, 2, 2)?)
}

/// Isotropic state F P_+ + (1-F) (I - P_+)/(d^2 - 1); its singlet fraction
/// is F by construction.
pub fn isotropic(f: f64, d: usize) -> DensityMatrix {
    assert!((0.0..=1.0).contains(&f), "isotropic: F must be in [0,1]");
    assert!(d >= 2, "isotropic: d must be >= 2");
    let n = d * d;
    let plus = max_entangled_projector(d);
    let rest = ComplexMatrix::identity(n).sub(plus.mat());
    let mat = plus
        .mat()
        .scale_real(f)
        .add(&rest.scale_real((1.0 - f) / (n - 1) as f64));
    DensityMatrix::new(mat, d, d).expect("isotropic state is valid")
}

/// Embed a state into a d_new x d_new system, zero-padding in the
/// computational basis. Spectrum and local structure are untouched.
pub fn embed(s: &DensityMatrix, d_new: usize) -> Result<DensityMatrix, StateError> {
    let (da, db) = (s.dim_a(), s.dim_b());
    if d_new < da.max(db) {
        return Err(StateError::DimensionShrink {
            d_old: da.max(db),
            d_new,
        });
    }
    let mut mat = ComplexMatrix::zeros(d_new * d_new, d_new * d_new);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    mat.set(i * d_new + j, k * d_new + l, s.mat().get(i * db + j, k * db + l));
                }
            }
        }
    }
    Ok(DensityMatrix::new(mat, d_new, d_new)?)
}

/// Reproducible random density matrix of the requested rank via a Gram
/// construction G G^dagger / Tr with G a (d_a d_b) x rank matrix of standard
/// complex Gaussians drawn from ChaCha8 seeded with `seed` (Box-Muller).
pub fn random_density(
    d_a: usize,
    d_b: usize,
    rank: usize,
    seed: u64,
) -> Result<DensityMatrix, StateError> {
    let n = d_a * d_b;
    if rank < 1 || rank > n {
        return Err(StateError::RankOutOfRange { rank, max: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(n, rank, |_, _| complex_gaussian(&mut rng));
    let gram = g.matmul(&g.adjoint());
    let trace = gram.trace().re;
    let mat = gram.scale_real(1.0 / trace);
    Ok(DensityMatrix::new(mat, d_a, d_b)?)
}

/// Random pure state from the same generator.
pub fn random_pure(d_a: usize, d_b: usize, seed: u64) -> PureState {
    let n = d_a * d_b;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in amps.iter_mut() {
        *z = *z / norm;
    }
    PureState::new(d_a, d_b, amps).expect("normalized")
}

/// Standard complex Gaussian (independent N(0, 1/2)-ish real and imaginary
/// parts via Box-Muller; the overall scale cancels in every Gram quotient).
pub(crate) fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// JSON-facing description of a state family; `build` produces the state.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateFamilySpec {
    MaxEntangled {
        d_a: usize,
        d_b: usize,
    },
    MaxEntangledM {
        d_a: usize,
        d_b: usize,
        m: usize,
    },
    Eq10 {
        p: f64,
        d: usize,
    },
    Permutation {
        p: f64,
        d: usize,
        permutation: Vec<usize>,
    },
    AbState {
        a: f64,
        b: f64,
    },
    Isotropic {
        #[serde(rename = "F")]
        f: f64,
        d: usize,
    },
    Embedded {
        inner: Box<StateFamilySpec>,
        d_new: usize,
    },
    Random {
        d_a: usize,
        d_b: usize,
        rank: usize,
        seed: u64,
    },
}

impl StateFamilySpec {
    pub fn build(&self) -> Result<DensityMatrix, StateError> {
        match self {
            StateFamilySpec::MaxEntangled { d_a, d_b } => {
                check_dim("d_a", *d_a)?;
                check_dim("d_b", *d_b)?;
                Ok(max_entangled(*d_a, *d_b).to_density())
            }
            StateFamilySpec::MaxEntangledM { d_a, d_b, m } => {
                check_dim("d_a", *d_a)?;
                check_dim("d_b", *d_b)?;
                Ok(max_entangled_m(*d_a, *d_b, *m)?.to_density())
            }
            StateFamilySpec::Eq10 { p, d } => {
                check_unit("p", *p)?;
                check_dim("d", *d)?;
                Ok(quasidistillable(*p, *d))
            }
            StateFamilySpec::Permutation { p, d, permutation } => {
                check_dim("d", *d)?;
                permutation_family(*p, *d, permutation)
            }
            StateFamilySpec::AbState { a, b } => ab_state(*a, *b),
            StateFamilySpec::Isotropic { f, d } => {
                check_unit("F", *f)?;
                check_dim("d", *d)?;
                Ok(isotropic(*f, *d))
            }
            StateFamilySpec::Embedded { inner, d_new } => {
                let s = inner.build()?;
                embed(&s, *d_new)
            }
            StateFamilySpec::Random { d_a, d_b, rank, seed } => {
                random_density(*d_a, *d_b, *rank, *seed)
            }
        }
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<(), StateError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(StateError::ParameterRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

fn check_dim(name: &'static str, value: usize) -> Result<(), StateError> {
    if value >= 2 {
        Ok(())
    } else {
        Err(StateError::ParameterRange {
            name,
            value: value as f64,
            range: "[2, ...)",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densmat::{partial_trace, schmidt, singlet_fraction, Side};

    #[test]
    fn max_entangled_two_by_two_amplitudes() {
        let v = max_entangled(2, 2);
        let w = 1.0 / 2f64.sqrt();
        let expect = [w, 0.0, 0.0, w];
        for (a, e) in v.amplitudes().iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn max_entangled_rectangular_uses_min_dim() {
        let v = max_entangled(2, 3);
        assert_eq!(schmidt(&v).rank(), 2);
        assert!((singlet_fraction(&v.to_density(), 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_entangled_m_matches_plain_at_full_rank() {
        let v = max_entangled_m(3, 3, 3).unwrap();
        let full = max_entangled(3, 3);
        for (a, b) in v.amplitudes().iter().zip(full.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(matches!(
            max_entangled_m(3, 3, 4),
            Err(StateError::MOutOfRange { .. })
        ));
        assert!(matches!(
            max_entangled_m(3, 3, 1),
            Err(StateError::MOutOfRange { .. })
        ));
    }

    #[test]
    fn max_entangled_m_embedded_rank_two() {
        let v = max_entangled_m(3, 3, 2).unwrap();
        let d = schmidt(&v);
        assert_eq!(d.rank(), 2);
        assert!((singlet_fraction(&v.to_density(), 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quasidistillable_fraction_and_rank() {
        let s = quasidistillable(0.5, 3);
        assert_eq!(s.rank(), 2);
        assert!((singlet_fraction(&s, 3) - 0.5).abs() < 1e-12);

        let pure = quasidistillable(1.0, 3);
        assert_eq!(pure.rank(), 1);
    }

    #[test]
    fn quasidistillable_m_two_overlap() {
        // <Psi_+^2| rho |Psi_+^2> = p * 2/3 for the d=3 family.
        let s = quasidistillable(0.7, 3);
        assert!((singlet_fraction(&s, 2) - 0.7 * 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn quasidistillable_reduced_state() {
        // Tr_A = p I/d + (1-p) |1><1| on the B side.
        let p = 0.5;
        let s = quasidistillable(p, 3);
        let rb = partial_trace(&s, Side::B);
        let mut expect = ComplexMatrix::identity(3).scale_real(p / 3.0);
        expect.set(1, 1, expect.get(1, 1) + Complex64::new(1.0 - p, 0.0));
        assert!(rb.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn permutation_identity_fraction() {
        // F = p + (1-p)/d when pi = id.
        let (p, d) = (0.5, 2);
        let s = permutation_family(p, d, &[0, 1]).unwrap();
        let expect = p + (1.0 - p) / d as f64;
        assert!((singlet_fraction(&s, d) - expect).abs() < 1e-12);
    }

    #[test]
    fn permutation_derangement_fraction_is_p() {
        let (p, d) = (0.5, 2);
        let s = permutation_family(p, d, &[1, 0]).unwrap();
        assert!((singlet_fraction(&s, d) - p).abs() < 1e-12);
    }

    #[test]
    fn permutation_general_oracle() {
        // Independent oracle: F = p + (1-p) * (#fixed points) / d^2.
        let (p, d) = (0.3, 4);
        let perm = [2usize, 1, 0, 3]; // fixed points: 1 and 3
        let s = permutation_family(p, d, &perm).unwrap();
        let fixed = perm.iter().enumerate().filter(|&(i, &x)| i == x).count();
        let expect = p + (1.0 - p) * fixed as f64 / (d * d) as f64;
        assert!((singlet_fraction(&s, d) - expect).abs() < 1e-12);
    }

    #[test]
    fn permutation_rejects_non_bijection() {
        assert!(matches!(
            permutation_family(0.5, 3, &[0, 0, 1]),
            Err(StateError::InvalidPermutation { .. })
        ));
        assert!(matches!(
            permutation_family(0.5, 3, &[0, 1]),
            Err(StateError::InvalidPermutation { .. })
        ));
    }

    #[test]
    fn ab_state_symmetric_case() {
        let s = ab_state(1.0, 1.0).unwrap();
        // Equal weights on Psi_+ and |01>.
        assert!((singlet_fraction(&s, 2) - 0.5).abs() < 1e-12);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn ab_state_is_valid_and_rank_two() {
        let s = ab_state(0.6, 0.8).unwrap();
        assert_eq!(s.rank(), 2);
        assert!((s.spectrum().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(
            ab_state(0.0, 1.0),
            Err(StateError::NonPositiveParameter { .. })
        ));
    }

    #[test]
    fn ab_state_renormalizes() {
        let s1 = ab_state(0.6, 0.8).unwrap();
        let s2 = ab_state(6.0, 8.0).unwrap();
        assert!(s1.mat().sub(s2.mat()).max_abs() < 1e-12);
    }

    #[test]
    fn isotropic_extremes() {
        let d = 3;
        let p = isotropic(1.0, d);
        assert!(p.is_pure());
        let unif = isotropic(1.0 / (d * d) as f64, d);
        let expect = ComplexMatrix::identity(d * d).scale_real(1.0 / (d * d) as f64);
        assert!(unif.mat().sub(&expect).max_abs() < 1e-12);
        assert!((singlet_fraction(&isotropic(0.9, d), d) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn embed_singlet_fraction_drops_to_d_over_dprime() {
        let s = max_entangled_projector(2);
        let e = embed(&s, 3).unwrap();
        assert!((singlet_fraction(&e, 3) - 2.0 / 3.0).abs() < 1e-12);
        // Spectrum unchanged up to padding zeros.
        assert_eq!(e.rank(), 1);
        assert!((e.spectrum()[0] - 1.0).abs() < 1e-12);
        assert!(matches!(
            embed(&s, 1),
            Err(StateError::DimensionShrink { .. })
        ));
    }

    #[test]
    fn random_density_rank_and_determinism() {
        let full = random_density(2, 2, 4, 7).unwrap();
        assert_eq!(full.rank(), 4);
        let again = random_density(2, 2, 4, 7).unwrap();
        assert!(full.mat().sub(again.mat()).max_abs() == 0.0);
        let pure = random_density(2, 2, 1, 3).unwrap();
        assert!(pure.is_pure());
        assert!(matches!(
            random_density(2, 2, 5, 0),
            Err(StateError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn family_spec_json_roundtrip_and_build() {
        let j = r#"{"family":"eq10","p":0.5,"d":3}"#;
        let spec: StateFamilySpec = serde_json::from_str(j).unwrap();
        let s = spec.build().unwrap();
        assert!((singlet_fraction(&s, 3) - 0.5).abs() < 1e-12);

        let j = r#"{"family":"permutation","p":0.5,"d":2,"permutation":[1,0]}"#;
        let spec: StateFamilySpec = serde_json::from_str(j).unwrap();
        assert!((singlet_fraction(&spec.build().unwrap(), 2) - 0.5).abs() < 1e-12);

        let j = r#"{"family":"embedded","d_new":3,"inner":{"family":"max_entangled","d_a":2,"d_b":2}}"#;
        let spec: StateFamilySpec = serde_json::from_str(j).unwrap();
        assert!((singlet_fraction(&spec.build().unwrap(), 3) - 2.0 / 3.0).abs() < 1e-12);

        // Unknown fields are rejected.
        let j = r#"{"family":"eq10","p":0.5,"d":3,"bogus":1}"#;
        assert!(serde_json::from_str::<StateFamilySpec>(j).is_err());
    }
}
