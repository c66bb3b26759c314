//! Shared evaluation layer: SINR, sum rate, beampatterns, and SLNR, plus
//! the beamformer and RIS state containers they evaluate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{fa_steering, ris_steering, ChannelSet};
use crate::linalg::{cis, CMat, CVec};
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Transmitter hardware architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// Fully digital: one RF chain per antenna; the analog factor stores an
    /// orthonormal basis of the beam span.
    Fd,
    /// Fully connected phase network: every analog entry unit modulus.
    FullCon,
    /// Sub-connected: block-diagonal analog matrix, one subarray per chain.
    SubCon,
}

impl Architecture {
    pub fn label(&self) -> &'static str {
        match self {
            Architecture::Fd => "fd",
            Architecture::FullCon => "full",
            Architecture::SubCon => "sub",
        }
    }
}

/// Digital/analog beamformer pair; the overall per-user beam is
/// `f_k = V w_k`.
#[derive(Debug, Clone)]
pub struct BeamformerState {
    pub arch: Architecture,
    /// Analog factor, N x K.
    pub analog: CMat,
    /// Digital factor, K x K (column k serves user k).
    pub digital: CMat,
}

impl BeamformerState {
    pub fn overall(&self) -> CMat {
        &self.analog * &self.digital
    }

    pub fn beam(&self, k: usize) -> CVec {
        &self.analog * self.digital.column(k)
    }

    pub fn n_tx(&self) -> usize {
        self.analog.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.digital.ncols()
    }

    /// `Tr(V W W^H V^H)`.
    pub fn transmit_power(&self) -> f64 {
        self.overall().norm_squared()
    }

    /// Scale the digital factor so the transmit power equals `p` exactly
    /// (no-op on an all-zero beamformer).
    pub fn scale_to_power(&mut self, p: f64) {
        let cur = self.transmit_power();
        if cur > 0.0 {
            self.digital *= Complex64::new((p / cur).sqrt(), 0.0);
        }
    }

    /// Check the architecture constraints and the power budget
    /// (`Tr(VWW^HV^H) <= P (1 + 1e-9)`).
    pub fn validate(&self, power_budget: f64, sub_size: usize) -> Result<()> {
        match self.arch {
            Architecture::Fd => {}
            Architecture::FullCon => {
                for v in self.analog.iter() {
                    if (v.norm() - 1.0).abs() > 1e-9 {
                        return Err(Error::Invalid(
                            "fully connected analog entry is not unit modulus".into(),
                        ));
                    }
                }
            }
            Architecture::SubCon => {
                for k in 0..self.n_users() {
                    for n in 0..self.n_tx() {
                        let v = self.analog[(n, k)];
                        let in_block = n / sub_size == k;
                        if in_block && (v.norm() - 1.0).abs() > 1e-9 {
                            return Err(Error::Invalid(
                                "sub-connected block entry is not unit modulus".into(),
                            ));
                        }
                        if !in_block && v.norm() != 0.0 {
                            return Err(Error::Invalid(
                                "sub-connected off-block entry is nonzero".into(),
                            ));
                        }
                    }
                }
            }
        }
        let p = self.transmit_power();
        if p > power_budget * (1.0 + 1e-9) {
            return Err(Error::Invalid(format!(
                "transmit power {p} exceeds budget {power_budget}"
            )));
        }
        Ok(())
    }
}

/// Per-RIS unit-modulus phase vectors, with the optional lifted covariance
/// from the last passive-beamforming solve.
#[derive(Debug, Clone)]
pub struct RisState {
    pub phases: Vec<CVec>,
    pub lifted: Option<CMat>,
}

impl RisState {
    pub fn all_ones(scn: &Scenario) -> RisState {
        let m = scn.n_ris_units();
        RisState {
            phases: (0..scn.n_ris)
                .map(|_| CVec::from_element(m, Complex64::new(1.0, 0.0)))
                .collect(),
            lifted: None,
        }
    }

    pub fn random(scn: &Scenario, rng: &mut impl Rng) -> RisState {
        let m = scn.n_ris_units();
        RisState {
            phases: (0..scn.n_ris)
                .map(|_| {
                    CVec::from_fn(m, |_, _| cis(rng.gen::<f64>() * 2.0 * std::f64::consts::PI))
                })
                .collect(),
            lifted: None,
        }
    }

    /// Stacked phase vector with the homogenization slot appended:
    /// `x = [e_1; ...; e_L; 1]`.
    pub fn lift_vector(&self) -> CVec {
        let m: usize = self.phases.iter().map(|e| e.len()).sum();
        let mut x = CVec::zeros(m + 1);
        let mut off = 0;
        for e in &self.phases {
            x.rows_mut(off, e.len()).copy_from(e);
            off += e.len();
        }
        x[m] = Complex64::new(1.0, 0.0);
        x
    }

    pub fn validate(&self) -> Result<()> {
        for (l, e) in self.phases.iter().enumerate() {
            for v in e.iter() {
                if (v.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::Invalid(format!("RIS {l} phase is not unit modulus")));
                }
            }
        }
        if let Some(xi) = &self.lifted {
            for i in 0..xi.nrows() {
                if (xi[(i, i)].re - 1.0).abs() > 1e-6 {
                    return Err(Error::Invalid("lifted covariance diagonal is not 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Per-user SINR `gamma_k = |g_k^H f_k|^2 / (sum_{j!=k} |g_k^H f_j|^2 + noise)`.
pub fn sinr(g: &[CVec], bf: &BeamformerState, noise: f64) -> Vec<f64> {
    let f = bf.overall();
    let k_users = g.len();
    (0..k_users)
        .map(|k| {
            let mut signal = 0.0;
            let mut interference = 0.0;
            for j in 0..f.ncols() {
                let dot = g[k].dotc(&f.column(j).into_owned());
                let p = dot.norm_sqr();
                if j == k {
                    signal = p;
                } else {
                    interference += p;
                }
            }
            signal / (interference + noise)
        })
        .collect()
}

/// `sum_k log2(1 + gamma_k)`.
pub fn sum_rate(gammas: &[f64]) -> f64 {
    gammas.iter().map(|&g| (1.0 + g).log2()).sum()
}

/// Convenience: sum rate of a beamformer over the given cascaded channels.
pub fn sum_rate_of(g: &[CVec], bf: &BeamformerState, noise: f64) -> f64 {
    sum_rate(&sinr(g, bf, noise))
}

/// Default beampattern grid: 0.1 degree steps over [0, 180] degrees.
pub fn default_theta_grid() -> Vec<f64> {
    (0..=1800).map(|i| (i as f64 * 0.1).to_radians()).collect()
}

/// Array gain `|a(theta)^H w|` over the grid, normalized by its maximum.
pub fn beampattern(
    weights: &CVec,
    positions: &[f64],
    wavelength: f64,
    theta_grid: &[f64],
) -> Vec<f64> {
    assert!(!theta_grid.is_empty(), "beampattern grid must be nonempty");
    let raw: Vec<f64> = theta_grid
        .iter()
        .map(|&t| fa_steering(t, positions, wavelength).dotc(weights).norm())
        .collect();
    let max = raw.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        raw.into_iter().map(|v| v / max).collect()
    } else {
        raw
    }
}

/// Signal-to-leakage-and-noise ratio of the phase vector `e` at RIS `l`:
/// served users in the numerator, all other users plus `noise/M` in the
/// denominator. The effective channel of user `k` through RIS `l` is
/// `diag(a_M(theta_l, phi_l)) conj(h^{r,u}_{l,k})`.
pub fn slnr(e: &CVec, served: &[usize], ch: &ChannelSet, l: usize, noise: f64) -> Result<f64> {
    if served.is_empty() {
        return Err(Error::Invalid("SLNR needs a nonempty served set".into()));
    }
    let scn = &ch.scenario;
    let m = scn.n_ris_units();
    let (s, t) = slnr_matrices(ch, l, served, noise)?;
    let num = e.dotc(&(&s * e)).re;
    let den = e.dotc(&(&t * e)).re;
    let _ = m;
    Ok(num / den)
}

/// Numerator and denominator quadratic forms of the SLNR at RIS `l`.
pub fn slnr_matrices(
    ch: &ChannelSet,
    l: usize,
    served: &[usize],
    noise: f64,
) -> Result<(CMat, CMat)> {
    let scn = &ch.scenario;
    if l >= scn.n_ris {
        return Err(Error::Dimension(format!("RIS index {l} out of range")));
    }
    let m = scn.n_ris_units();
    let (m1, m2) = scn.ris_dims;
    let a_m = ris_steering(scn.bs_ris[l].theta, scn.bs_ris[l].phi, m1, m2);
    let eff = |k: usize| -> CVec {
        CVec::from_iterator(
            m,
            a_m.iter()
                .zip(ch.ris_ue[l][k].iter())
                .map(|(&am, &h)| am * h.conj()),
        )
    };
    let mut s = CMat::zeros(m, m);
    let mut t = CMat::from_diagonal_element(m, m, Complex64::new(noise / m as f64, 0.0));
    for k in 0..scn.n_users {
        let h = eff(k);
        let outer = &h * h.adjoint();
        if served.contains(&k) {
            s += outer;
        } else {
            t += outer;
        }
    }
    Ok((s, t))
}

/// Write a beampattern as CSV with columns `theta_deg, gain_linear, gain_db`.
pub fn beampattern_csv(theta_grid: &[f64], gains: &[f64]) -> String {
    let mut out = String::from("theta_deg,gain_linear,gain_db\n");
    for (t, g) in theta_grid.iter().zip(gains) {
        let db = if *g > 0.0 { 20.0 * g.log10() } else { -300.0 };
        out.push_str(&format!("{:.4},{:.9},{:.4}\n", t.to_degrees(), g, db));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{assemble_channels, draw_nlos};
    use crate::scenario::{rng_for_trial, uniform_apv};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn toy_bf(f: CMat) -> BeamformerState {
        let k = f.ncols();
        BeamformerState {
            arch: Architecture::Fd,
            analog: f,
            digital: CMat::identity(k, k),
        }
    }

    fn random_cvec(n: usize, rng: &mut impl Rng) -> CVec {
        CVec::from_fn(n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn single_user_sinr_has_no_interference() {
        let g = vec![CVec::from_element(4, Complex64::new(1.0, 0.0))];
        let f = CMat::from_element(4, 1, Complex64::new(0.5, 0.0));
        let gam = sinr(&g, &toy_bf(f), 2.0);
        // |g^H f|^2 = 4, noise 2
        assert_relative_eq!(gam[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_beams_give_zero_sinr_and_rate() {
        let g = vec![
            CVec::from_element(4, Complex64::new(1.0, 0.0)),
            CVec::from_element(4, Complex64::new(0.0, 1.0)),
        ];
        let f = CMat::zeros(4, 2);
        let gam = sinr(&g, &toy_bf(f), 1e-3);
        assert_eq!(gam, vec![0.0, 0.0]);
        assert_eq!(sum_rate(&gam), 0.0);
    }

    #[test]
    fn sinr_matches_scalar_loop_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let n = 6;
        let k = 3;
        let g: Vec<CVec> = (0..k).map(|_| random_cvec(n, &mut rng)).collect();
        let f = CMat::from_fn(n, k, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let noise = 0.37;
        let gam = sinr(&g, &toy_bf(f.clone()), noise);
        for kk in 0..k {
            // scalar-loop oracle with explicit accumulation
            let mut sig = Complex64::default();
            for idx in 0..n {
                sig += g[kk][idx].conj() * f[(idx, kk)];
            }
            let mut interf = 0.0;
            for j in 0..k {
                if j == kk {
                    continue;
                }
                let mut acc = Complex64::default();
                for idx in 0..n {
                    acc += g[kk][idx].conj() * f[(idx, j)];
                }
                interf += acc.norm_sqr();
            }
            let oracle = sig.norm_sqr() / (interf + noise);
            assert_relative_eq!(gam[kk], oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn sum_rate_reference_points() {
        assert_relative_eq!(sum_rate(&[1.0, 1.0, 1.0]), 3.0, epsilon = 1e-12);
        assert_eq!(sum_rate(&[0.0, 0.0]), 0.0);
        assert_relative_eq!(sum_rate(&[3.0]), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn matched_filter_beampattern_peaks_at_steering_angle() {
        let lambda = 0.0857;
        let z: Vec<f64> = (0..16).map(|n| n as f64 * lambda / 2.0).collect();
        let theta0 = 72f64.to_radians();
        let w = fa_steering(theta0, &z, lambda);
        let grid = default_theta_grid();
        let gains = beampattern(&w, &z, lambda, &grid);
        // the grid includes 72.0 deg exactly
        let idx = grid
            .iter()
            .position(|&t| (t - theta0).abs() < 1e-9)
            .unwrap();
        assert_relative_eq!(gains[idx], 1.0, epsilon = 1e-9);
        for &g in &gains {
            assert!(g <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn beampattern_is_normalized_for_random_weights() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        let lambda = 0.0857;
        let z: Vec<f64> = (0..8).map(|n| n as f64 * lambda / 2.0).collect();
        let w = random_cvec(8, &mut rng);
        let gains = beampattern(&w, &z, lambda, &default_theta_grid());
        let max = gains.iter().cloned().fold(0.0f64, f64::max);
        assert_relative_eq!(max, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn slnr_cases() {
        let scn = Scenario::default_scenario();
        let mut rng = rng_for_trial(&scn, 2);
        let draws = draw_nlos(&scn, &mut rng);
        let apv = uniform_apv(&scn, scn.wavelength / 2.0).unwrap();
        let ch = assemble_channels(&scn, &draws, &apv).unwrap();
        let m = scn.n_ris_units();
        let noise = scn.noise_power;

        // all users served: denominator is the noise term only
        let e = CVec::from_element(m, Complex64::new(1.0, 0.0));
        let all: Vec<usize> = (0..scn.n_users).collect();
        let v = slnr(&e, &all, &ch, 0, noise).unwrap();
        let (s, _) = slnr_matrices(&ch, 0, &all, noise).unwrap();
        let expect = e.dotc(&(&s * &e)).re / (noise / m as f64 * e.norm_squared());
        assert_relative_eq!(v, expect, max_relative = 1e-12);

        // global phase invariance
        let rot = &e * cis(1.234);
        let v2 = slnr(&rot, &all, &ch, 0, noise).unwrap();
        assert_relative_eq!(v, v2, max_relative = 1e-12);

        // scalar-loop oracle on a random vector and served = {0}
        let er = random_cvec(m, &mut rng);
        let v3 = slnr(&er, &[0], &ch, 1, noise).unwrap();
        let (m1, m2) = scn.ris_dims;
        let a_m = ris_steering(scn.bs_ris[1].theta, scn.bs_ris[1].phi, m1, m2);
        let mut num = 0.0;
        let mut den = noise / m as f64 * er.norm_squared();
        for k in 0..scn.n_users {
            let mut acc = Complex64::default();
            for i in 0..m {
                let h = a_m[i] * ch.ris_ue[1][k][i].conj();
                acc += er[i].conj() * h;
            }
            if k == 0 {
                num += acc.norm_sqr();
            } else {
                den += acc.norm_sqr();
            }
        }
        assert_relative_eq!(v3, num / den, max_relative = 1e-12);

        // empty served set errors
        assert!(slnr(&e, &[], &ch, 0, noise).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rate_invariant_to_common_beam_phase(seed in 0u64..500, phase in 0f64..6.28) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let g: Vec<CVec> = (0..2).map(|_| random_cvec(5, &mut rng)).collect();
            let f = CMat::from_fn(5, 2, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let mut f2 = f.clone();
            f2.column_mut(0).apply(|v| *v *= cis(phase));
            let r1 = sum_rate_of(&g, &toy_bf(f), 1e-2);
            let r2 = sum_rate_of(&g, &toy_bf(f2), 1e-2);
            prop_assert!((r1 - r2).abs() < 1e-9 * r1.abs().max(1.0));
        }

        #[test]
        fn sinr_monotone_in_signal_power(seed in 0u64..500, scale in 1.0f64..4.0) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let g: Vec<CVec> = (0..2).map(|_| random_cvec(5, &mut rng)).collect();
            let f = CMat::from_fn(5, 2, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let mut f2 = f.clone();
            // scaling user 0's beam scales |g_0^H f_0|^2 while interference
            // for user 0 is untouched
            f2.column_mut(0).apply(|v| *v *= Complex64::new(scale, 0.0));
            let g1 = sinr(&g, &toy_bf(f), 1e-2);
            let g2 = sinr(&g, &toy_bf(f2), 1e-2);
            prop_assert!(g2[0] >= g1[0] - 1e-12);
        }
    }
}
