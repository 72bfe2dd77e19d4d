//! Rician channel synthesis for the BS→RIS and RIS→UAV hops, the RIS phase
//! matrix, and the cascaded BS→UAV channel.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{kron, CMatrix};
use crate::scene::{GeometrySet, LinkGeometry, SystemConfig};

/// Channel matrices of one fading realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `(N·N_R) × N_B`, per-RIS blocks stacked vertically.
    pub g_stacked: CMatrix,
    /// `N_U × (N·N_R)`, per-RIS row blocks side by side.
    pub h_stacked: CMatrix,
    /// Amplitude factor applied to each BS→RIS link.
    pub pathloss_bs_ris: Vec<f64>,
    /// Amplitude factor applied to each RIS→UAV link, `[ris][uav]`.
    pub pathloss_ris_uav: Vec<Vec<f64>>,
    elements_per_ris: usize,
}

impl ChannelSet {
    pub fn n_uav(&self) -> usize {
        self.h_stacked.rows()
    }

    pub fn n_bs_antennas(&self) -> usize {
        self.g_stacked.cols()
    }

    pub fn total_elements(&self) -> usize {
        self.g_stacked.rows()
    }

    pub fn elements_per_ris(&self) -> usize {
        self.elements_per_ris
    }

    pub fn n_ris(&self) -> usize {
        self.total_elements() / self.elements_per_ris
    }

    /// Builds a channel set from given stacked matrices with unit path loss.
    pub fn from_matrices(g_stacked: CMatrix, h_stacked: CMatrix, n_ris: usize) -> Self {
        assert_eq!(g_stacked.rows(), h_stacked.cols(), "G and H do not conform");
        assert!(n_ris > 0 && g_stacked.rows() % n_ris == 0, "elements not divisible by RIS count");
        let n_uav = h_stacked.rows();
        Self {
            elements_per_ris: g_stacked.rows() / n_ris,
            g_stacked,
            h_stacked,
            pathloss_bs_ris: vec![1.0; n_ris],
            pathloss_ris_uav: vec![vec![1.0; n_uav]; n_ris],
        }
    }

    /// Entries of `G` and `H` with each link's path loss divided out, real
    /// parts followed by imaginary parts (H first, then G).
    pub fn normalized_features(&self) -> Vec<f64> {
        let n = self.elements_per_ris;
        let mut h_re = Vec::with_capacity(self.h_stacked.as_slice().len());
        let mut h_im = Vec::with_capacity(h_re.capacity());
        for u in 0..self.n_uav() {
            for (m, z) in self.h_stacked.row(u).iter().enumerate() {
                let z = z / self.pathloss_ris_uav[m / n][u];
                h_re.push(z.re);
                h_im.push(z.im);
            }
        }
        let mut g_re = Vec::with_capacity(self.g_stacked.as_slice().len());
        let mut g_im = Vec::with_capacity(g_re.capacity());
        for m in 0..self.total_elements() {
            for z in self.g_stacked.row(m) {
                let z = z / self.pathloss_bs_ris[m / n];
                g_re.push(z.re);
                g_im.push(z.im);
            }
        }
        [h_re, h_im, g_re, g_im].concat()
    }
}

/// Continuous RIS phase shifts, one per element across all RISs.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    theta: Vec<f64>,
}

impl PhaseConfig {
    /// Wraps every angle into `[0, 2π)`.
    pub fn new(theta: Vec<f64>) -> Self {
        Self {
            theta: theta.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self { theta: vec![0.0; len] }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Unit-modulus reflection coefficients `exp(jθ)`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn ula_response(n: usize, phase_step: f64) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::from_polar(1.0, phase_step * i as f64))
        .collect()
}

/// Normalized planar-array response of an `n_x × n_y` RIS.
pub fn steering_ris(
    azimuth: f64,
    elevation: f64,
    n_x: usize,
    n_y: usize,
    d_x: f64,
    d_y: f64,
    wavelength: f64,
) -> Vec<Complex64> {
    let ax = ula_response(n_x, 2.0 * PI * d_x / wavelength * azimuth.cos() * elevation.sin());
    let ay = ula_response(n_y, 2.0 * PI * d_y / wavelength * azimuth.sin() * elevation.sin());
    let norm = 1.0 / ((n_x * n_y) as f64).sqrt();
    kron(&CMatrix::column_vector(&ax), &CMatrix::column_vector(&ay))
        .as_slice()
        .iter()
        .map(|z| z * norm)
        .collect()
}

/// Normalized response of the vertical BS array towards `elevation`.
pub fn steering_bs(elevation: f64, downtilt: f64, n_b: usize, d_z: f64, wavelength: f64) -> Vec<Complex64> {
    let norm = 1.0 / (n_b as f64).sqrt();
    ula_response(n_b, 2.0 * PI * d_z / wavelength * (elevation - downtilt).cos())
        .into_iter()
        .map(|z| z * norm)
        .collect()
}

fn delay_phasor(delay: f64, carrier_freq: f64) -> Complex64 {
    // Reduce the cycle count before scaling by 2π to keep the phase accurate.
    let cycles = (carrier_freq * delay).fract();
    Complex64::from_polar(1.0, -TAU * cycles)
}

/// LoS component of a BS→RIS link, `N × N_B`.
pub fn los_bs_ris(geom: &LinkGeometry, config: &SystemConfig) -> CMatrix {
    let [d_x, d_y, d_z] = config.element_spacing;
    let lambda = config.wavelength();
    let a_r = steering_ris(
        geom.azimuth,
        geom.elevation,
        config.ris_elements_x,
        config.ris_elements_y,
        d_x,
        d_y,
        lambda,
    );
    let a_b = steering_bs(geom.elevation, config.downtilt, config.n_bs_antennas, d_z, lambda);
    let phasor = delay_phasor(geom.delay, config.carrier_freq);
    CMatrix::from_fn(a_r.len(), a_b.len(), |i, j| a_r[i] * a_b[j].conj() * phasor)
}

/// LoS component of a RIS→UAV link, `1 × N`.
pub fn los_ris_uav(geom: &LinkGeometry, config: &SystemConfig) -> CMatrix {
    let [d_x, d_y, _] = config.element_spacing;
    let a_r = steering_ris(
        geom.azimuth,
        geom.elevation,
        config.ris_elements_x,
        config.ris_elements_y,
        d_x,
        d_y,
        config.wavelength(),
    );
    let phasor = delay_phasor(geom.delay, config.carrier_freq);
    let row: Vec<Complex64> = a_r.iter().map(|z| z.conj() * phasor).collect();
    CMatrix::row_vector(&row)
}

/// `√(κ/(κ+1))·los + √(1/(κ+1))·nlos`. `κ = ∞` yields the LoS term alone.
pub fn rician_combine(los: &CMatrix, nlos: &CMatrix, kappa: f64) -> CMatrix {
    let (w_los, w_nlos) = if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        ((kappa / (kappa + 1.0)).sqrt(), (1.0 / (kappa + 1.0)).sqrt())
    };
    los.axpby(w_los, nlos, w_nlos)
        .expect("LoS and NLoS components must share a shape")
}

/// I.i.d. `CN(0, 1)` entries.
pub fn draw_nlos<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Free-space amplitude gain `λ/(4πd)`, or 1 when path loss is disabled.
pub fn pathloss_amplitude(distance: f64, wavelength: f64, enabled: bool) -> f64 {
    if enabled {
        wavelength / (4.0 * PI * distance)
    } else {
        1.0
    }
}

/// Draws one realization of every link.
///
/// NLoS draws are consumed in a fixed order: all BS→RIS blocks by RIS, then
/// the RIS→UAV rows by UAV and then RIS.
pub fn assemble_channels<R: Rng + ?Sized>(
    config: &SystemConfig,
    geometry: &GeometrySet,
    rng: &mut R,
) -> ChannelSet {
    let n = config.elements_per_ris();
    let lambda = config.wavelength();
    let mut g_blocks = Vec::with_capacity(config.n_ris());
    let mut pathloss_bs_ris = Vec::with_capacity(config.n_ris());
    for geom in &geometry.bs_ris {
        let los = los_bs_ris(geom, config);
        let nlos = draw_nlos(rng, n, config.n_bs_antennas);
        let pl = pathloss_amplitude(geom.distance, lambda, config.pathloss_enabled);
        g_blocks.push(rician_combine(&los, &nlos, config.rician_bs_ris).scale_real(pl));
        pathloss_bs_ris.push(pl);
    }

    let mut pathloss_ris_uav = vec![vec![0.0; config.n_uav()]; config.n_ris()];
    let mut h_rows = Vec::with_capacity(config.n_uav());
    for u in 0..config.n_uav() {
        let mut blocks = Vec::with_capacity(config.n_ris());
        for (r, per_uav) in geometry.ris_uav.iter().enumerate() {
            let geom = &per_uav[u];
            let los = los_ris_uav(geom, config);
            let nlos = draw_nlos(rng, 1, n);
            let pl = pathloss_amplitude(geom.distance, lambda, config.pathloss_enabled);
            blocks.push(rician_combine(&los, &nlos, config.rician_ris_uav).scale_real(pl));
            pathloss_ris_uav[r][u] = pl;
        }
        h_rows.push(CMatrix::hstack(&blocks).expect("row blocks share one row"));
    }

    ChannelSet {
        g_stacked: CMatrix::vstack(&g_blocks).expect("blocks share N_B columns"),
        h_stacked: CMatrix::vstack(&h_rows).expect("rows share N·N_R columns"),
        pathloss_bs_ris,
        pathloss_ris_uav,
        elements_per_ris: n,
    }
}

/// Block-diagonal reflection matrix `Φ = diag(exp(jθ))`.
pub fn phase_matrix(phases: &PhaseConfig) -> CMatrix {
    crate::linalg::diag_embed(&phases.coefficients())
}

/// End-to-end channel `H·Φ·G`, `N_U × N_B`.
pub fn cascaded_channel(channels: &ChannelSet, phases: &PhaseConfig) -> CMatrix {
    let h = &channels.h_stacked;
    let g = &channels.g_stacked;
    assert_eq!(phases.len(), g.rows(), "phase vector length must equal N·N_R");
    let coeffs = phases.coefficients();
    let mut out = CMatrix::zeros(h.rows(), g.cols());
    for u in 0..h.rows() {
        for (m, (&hm, &phi)) in h.row(u).iter().zip(&coeffs).enumerate() {
            let w = hm * phi;
            for (b, &gmb) in g.row(m).iter().enumerate() {
                out[(u, b)] += w * gmb;
            }
        }
    }
    out
}
