//! Beamforming and phase-shift solvers.
//!
//! * Interference cancellation: given RIS phases, the BS precoder is the
//!   power-normalized right pseudo-inverse of the cascaded channel, which
//!   diagonalizes the effective channel.
//! * One element serves one UAV: given an element-to-UAV association and a
//!   precoder, each element's phase cancels the phase of its own cascaded
//!   contribution at its UAV.
//! * Decoders that turn raw actor outputs into constraint-satisfying
//!   variables, a random-search baseline, and one-bit phase quantization.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::channel::{cascaded_channel, wrap_phase, ChannelSet, PhaseConfig};
use crate::linalg::{gram_trace, matmul, right_pinv, CMatrix, LinalgError};
use crate::metrics::{sinr_report, SinrReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("cascaded channel is rank deficient (pivot ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },
    #[error("raw beamformer is all zeros")]
    ZeroBeamformer,
    #[error("expected {expected} values, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for SolverError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::RankDeficient { ratio } => SolverError::RankDeficient { ratio },
            other => SolverError::Linalg(other),
        }
    }
}

/// Combined precoder `F̂ = F·P`, `N_B × N_U`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingMatrix {
    pub f_hat: CMatrix,
}

impl BeamformingMatrix {
    /// Radiated power `trace(F̂ᴴF̂)`.
    pub fn power(&self) -> f64 {
        gram_trace(&self.f_hat)
    }
}

/// Binary element-to-UAV assignment; every element serves exactly one UAV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMatrix {
    assigned: Vec<usize>,
    n_uav: usize,
}

impl AssociationMatrix {
    /// Panics if an index is out of range.
    pub fn from_assignment(assigned: Vec<usize>, n_uav: usize) -> Self {
        assert!(assigned.iter().all(|&u| u < n_uav), "UAV index out of range");
        Self { assigned, n_uav }
    }

    /// UAV served by each element.
    pub fn assignment(&self) -> &[usize] {
        &self.assigned
    }

    pub fn n_uav(&self) -> usize {
        self.n_uav
    }

    /// Dense `(N·N_R) × N_U` 0/1 matrix.
    pub fn to_binary(&self) -> Vec<Vec<u8>> {
        self.assigned
            .iter()
            .map(|&u| (0..self.n_uav).map(|i| u8::from(i == u)).collect())
            .collect()
    }
}

/// How the pseudo-inverse precoder is scaled to the power budget.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IcScaling {
    /// `√(P_max / trace(F̃ᴴF̃))·F̃`; radiates exactly `P_max`.
    #[default]
    SquareRoot,
    /// `P_max·F̃ / trace(F̃ᴴF̃)`; radiates `P_max² / trace(F̃ᴴF̃)`.
    Literal,
}

/// SINR report of a phase configuration and precoder.
pub fn evaluate(channels: &ChannelSet, phases: &PhaseConfig, bf: &BeamformingMatrix, noise_power: f64) -> SinrReport {
    let effective = matmul(&cascaded_channel(channels, phases), &bf.f_hat)
        .expect("precoder must have N_B rows");
    sinr_report(&effective, noise_power)
}

pub fn ic_beamforming(channels: &ChannelSet, phases: &PhaseConfig, p_max: f64) -> Result<BeamformingMatrix, SolverError> {
    ic_beamforming_scaled(channels, phases, p_max, IcScaling::SquareRoot)
}

pub fn ic_beamforming_scaled(
    channels: &ChannelSet,
    phases: &PhaseConfig,
    p_max: f64,
    scaling: IcScaling,
) -> Result<BeamformingMatrix, SolverError> {
    let cascade = cascaded_channel(channels, phases);
    let pinv = right_pinv(&cascade)?;
    let tr = gram_trace(&pinv);
    let s = match scaling {
        IcScaling::SquareRoot => (p_max / tr).sqrt(),
        IcScaling::Literal => p_max / tr,
    };
    Ok(BeamformingMatrix {
        f_hat: pinv.scale_real(s),
    })
}

/// Per-element cascaded contribution `h[u,m]·(G[m,:]·f̂_u)` at its assigned UAV.
pub fn element_contributions(
    assoc: &AssociationMatrix,
    channels: &ChannelSet,
    bf: &BeamformingMatrix,
) -> Vec<Complex64> {
    let g = &channels.g_stacked;
    let h = &channels.h_stacked;
    assoc
        .assignment()
        .iter()
        .enumerate()
        .map(|(m, &u)| {
            let beam: Complex64 = g
                .row(m)
                .iter()
                .enumerate()
                .map(|(b, &gmb)| gmb * bf.f_hat[(b, u)])
                .sum();
            h[(u, m)] * beam
        })
        .collect()
}

/// Phases that make every element add coherently (zero phase) at the UAV it
/// is associated with, for the given precoder.
pub fn oresou_phases(assoc: &AssociationMatrix, channels: &ChannelSet, bf: &BeamformingMatrix) -> PhaseConfig {
    assert_eq!(assoc.assignment().len(), channels.total_elements(), "association must cover every element");
    let theta = element_contributions(assoc, channels, bf)
        .into_iter()
        .map(|e| wrap_phase(-e.arg()))
        .collect();
    PhaseConfig::new(theta)
}

/// Row-wise argmax of a raw `(N·N_R) × N_U` score matrix (row-major), ties
/// resolved to the lowest UAV index.
pub fn decode_association(raw: &[f64], n_uav: usize) -> Result<AssociationMatrix, SolverError> {
    if n_uav == 0 || raw.len() % n_uav != 0 {
        return Err(SolverError::BadLength {
            expected: n_uav.max(1) * (raw.len() / n_uav.max(1)),
            got: raw.len(),
        });
    }
    let assigned = raw
        .chunks(n_uav)
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                .0
        })
        .collect();
    Ok(AssociationMatrix { assigned, n_uav })
}

/// Interprets `raw` as interleaved real/imaginary parts of a row-major
/// `N_B × N_U` precoder and rescales it to radiate exactly `p_max`.
pub fn normalize_beamformer(raw: &[f64], n_bs: usize, n_uav: usize, p_max: f64) -> Result<BeamformingMatrix, SolverError> {
    let expected = 2 * n_bs * n_uav;
    if raw.len() != expected {
        return Err(SolverError::BadLength { expected, got: raw.len() });
    }
    let entries: Vec<Complex64> = raw.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
    let f = CMatrix::from_vec(n_bs, n_uav, entries)?;
    let power = gram_trace(&f);
    if !(power > 0.0) {
        return Err(SolverError::ZeroBeamformer);
    }
    Ok(BeamformingMatrix {
        f_hat: f.scale_real((p_max / power).sqrt()),
    })
}

/// Snaps every phase to the nearer of `{0, π}`; exact ties go to 0.
pub fn quantize_one_bit(phases: &PhaseConfig) -> PhaseConfig {
    const TIE: f64 = 1e-12;
    let theta = phases
        .theta()
        .iter()
        .map(|&t| {
            let t = wrap_phase(t);
            let to_zero = t.min(TAU - t);
            let to_pi = (t - PI).abs();
            if to_pi < to_zero - TIE {
                PI
            } else {
                0.0
            }
        })
        .collect();
    PhaseConfig::new(theta)
}

/// One constraint-satisfying random draw of phases and precoder.
pub fn random_search_step<R: Rng + ?Sized>(
    rng: &mut R,
    channels: &ChannelSet,
    p_max: f64,
    noise_power: f64,
    one_bit: bool,
) -> (PhaseConfig, BeamformingMatrix, SinrReport) {
    let theta = (0..channels.total_elements()).map(|_| rng.gen_range(0.0..TAU)).collect();
    let mut phases = PhaseConfig::new(theta);
    if one_bit {
        phases = quantize_one_bit(&phases);
    }
    let n_bs = channels.n_bs_antennas();
    let n_uav = channels.n_uav();
    let bf = loop {
        let raw: Vec<f64> = (0..2 * n_bs * n_uav).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(bf) = normalize_beamformer(&raw, n_bs, n_uav, p_max) {
            break bf;
        }
    };
    let report = evaluate(channels, &phases, &bf, noise_power);
    (phases, bf, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_nlos;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Channels whose cascade with zero phases is `I₂` padded to 2x4.
    fn padded_identity_channels() -> ChannelSet {
        let g = CMatrix::from_fn(2, 4, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        ChannelSet::from_matrices(g, CMatrix::identity(2), 1)
    }

    #[test]
    fn ic_closed_form_on_padded_identity() {
        let ch = padded_identity_channels();
        let bf = ic_beamforming(&ch, &PhaseConfig::zeros(2), 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = CMatrix::from_fn(4, 2, |i, j| if i == j { c(s, 0.0) } else { c(0.0, 0.0) });
        assert!(bf.f_hat.sub(&expected).unwrap().max_abs() < 1e-15);
        assert!((bf.power() - 1.0).abs() < 1e-15);
        let eff = matmul(&cascaded_channel(&ch, &PhaseConfig::zeros(2)), &bf.f_hat).unwrap();
        assert_eq!(eff[(0, 1)], c(0.0, 0.0));
        assert_eq!(eff[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn ic_literal_scaling_breaks_power_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = ChannelSet::from_matrices(draw_nlos(&mut rng, 8, 4), draw_nlos(&mut rng, 2, 8), 2);
        let phases = PhaseConfig::zeros(8);
        let lit = ic_beamforming_scaled(&ch, &phases, 2.0, IcScaling::Literal).unwrap();
        let sq = ic_beamforming(&ch, &phases, 2.0).unwrap();
        let tr = gram_trace(&right_pinv(&cascaded_channel(&ch, &phases)).unwrap());
        assert!((lit.power() - 4.0 / tr).abs() < 1e-12 * lit.power());
        assert!((sq.power() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ic_power_scaling_is_linear_in_sinr() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = ChannelSet::from_matrices(draw_nlos(&mut rng, 8, 4), draw_nlos(&mut rng, 2, 8), 2);
        let phases = PhaseConfig::new((0..8).map(|i| i as f64).collect());
        let a = ic_beamforming(&ch, &phases, 1.0).unwrap();
        let b = ic_beamforming(&ch, &phases, 10.0).unwrap();
        let ra = evaluate(&ch, &phases, &a, 1e-3);
        let rb = evaluate(&ch, &phases, &b, 1e-3);
        assert!((rb.min_sinr_db - ra.min_sinr_db - 10.0).abs() < 1e-9);
    }

    #[test]
    fn ic_propagates_rank_deficiency() {
        let g = CMatrix::from_fn(2, 4, |_, j| c(j as f64, 0.0));
        let ch = ChannelSet::from_matrices(g, CMatrix::identity(2), 1);
        assert!(matches!(
            ic_beamforming(&ch, &PhaseConfig::zeros(2), 1.0),
            Err(SolverError::RankDeficient { .. })
        ));
    }

    #[test]
    fn oresou_leaves_aligned_elements_alone() {
        let ch = ChannelSet::from_matrices(
            CMatrix::from_rows(&[[c(2.0, 0.0)], [c(0.5, 0.0)]]),
            CMatrix::from_rows(&[[c(1.0, 0.0), c(3.0, 0.0)]]),
            1,
        );
        let bf = BeamformingMatrix {
            f_hat: CMatrix::from_rows(&[[c(1.0, 0.0)]]),
        };
        let assoc = AssociationMatrix::from_assignment(vec![0, 0], 1);
        assert_eq!(oresou_phases(&assoc, &ch, &bf).theta(), &[0.0, 0.0]);
    }

    #[test]
    fn oresou_rotates_imaginary_contribution() {
        let ch = ChannelSet::from_matrices(
            CMatrix::from_rows(&[[c(0.0, 1.0)]]),
            CMatrix::from_rows(&[[c(1.0, 0.0)]]),
            1,
        );
        let bf = BeamformingMatrix {
            f_hat: CMatrix::from_rows(&[[c(1.0, 0.0)]]),
        };
        let assoc = AssociationMatrix::from_assignment(vec![0], 1);
        let phases = oresou_phases(&assoc, &ch, &bf);
        assert!((phases.theta()[0] - 1.5 * PI).abs() < 1e-15);
        let rotated = c(0.0, 1.0) * phases.coefficients()[0];
        assert!(rotated.im.abs() < 1e-15 && rotated.re > 0.0);
    }

    #[test]
    fn association_decoding() {
        let a = decode_association(&[0.1, 0.9, 0.5, 0.5, -0.2, -0.3], 2).unwrap();
        assert_eq!(a.assignment(), &[1, 0, 0]);
        assert_eq!(a.to_binary(), vec![vec![0, 1], vec![1, 0], vec![1, 0]]);
        assert!(decode_association(&[0.0; 3], 2).is_err());
    }

    #[test]
    fn beamformer_normalization() {
        let raw = [0.6, 0.0, 0.0, 0.8];
        let bf = normalize_beamformer(&raw, 2, 1, 1.0).unwrap();
        assert!((bf.f_hat[(0, 0)] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((bf.f_hat[(1, 0)] - c(0.0, 0.8)).norm() < 1e-15);
        let scaled: Vec<f64> = raw.iter().map(|x| x * 7.0).collect();
        let bf7 = normalize_beamformer(&scaled, 2, 1, 1.0).unwrap();
        assert!(bf7.f_hat.sub(&bf.f_hat).unwrap().max_abs() < 1e-15);
        assert_eq!(normalize_beamformer(&[0.0; 4], 2, 1, 1.0), Err(SolverError::ZeroBeamformer));
        assert!(matches!(
            normalize_beamformer(&[1.0; 3], 2, 1, 1.0),
            Err(SolverError::BadLength { .. })
        ));
    }

    #[test]
    fn one_bit_cases() {
        let q = quantize_one_bit(&PhaseConfig::new(vec![0.1, 3.0, PI / 2.0, 1.5 * PI, 6.2, 4.0]));
        assert_eq!(q.theta(), &[0.0, PI, 0.0, 0.0, 0.0, PI]);
    }

    #[test]
    fn random_search_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = ChannelSet::from_matrices(draw_nlos(&mut rng, 8, 4), draw_nlos(&mut rng, 2, 8), 2);
        let a = random_search_step(&mut ChaCha8Rng::seed_from_u64(1), &ch, 3.0, 1e-2, false);
        let b = random_search_step(&mut ChaCha8Rng::seed_from_u64(1), &ch, 3.0, 1e-2, false);
        assert_eq!(a, b);
        assert!((a.1.power() - 3.0).abs() < 1e-12);
        let (p, _, _) = random_search_step(&mut ChaCha8Rng::seed_from_u64(1), &ch, 3.0, 1e-2, true);
        assert!(p.theta().iter().all(|&t| t == 0.0 || t == PI));
    }
}
