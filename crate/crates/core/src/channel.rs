//! Steering vectors, Rician channel synthesis, and the cascaded per-user
//! channel through the RIS panels.
//!
//! NLoS draws are frozen per trial: changing the antenna positions only
//! refreshes the BS-side line-of-sight steering factors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{cis, standard_cn_vector, CMat, CVec};
use crate::metrics::RisState;
use crate::scenario::{Apv, Scenario};
use crate::{Error, Result};

/// Steering vector of the position-reconfigurable linear array:
/// entry `n` is `exp(-j 2 pi z_n cos(theta) / lambda)`.
pub fn fa_steering(theta: f64, positions: &[f64], wavelength: f64) -> CVec {
    let w = -2.0 * std::f64::consts::PI * theta.cos() / wavelength;
    CVec::from_iterator(positions.len(), positions.iter().map(|&z| cis(w * z)))
}

/// Steering vector of an `m1 x m2` RIS panel at half-wavelength unit
/// spacing: Kronecker product of the two axis factors with spatial
/// frequencies `sin(theta) sin(phi) / 2` and `sin(theta) cos(phi) / 2`.
pub fn ris_steering(theta: f64, phi: f64, m1: usize, m2: usize) -> CVec {
    let fy = 0.5 * theta.sin() * phi.sin();
    let fx = 0.5 * theta.sin() * phi.cos();
    let tau = -2.0 * std::f64::consts::PI;
    let a1: Vec<Complex64> = (0..m1).map(|m| cis(tau * m as f64 * fy)).collect();
    let a2: Vec<Complex64> = (0..m2).map(|m| cis(tau * m as f64 * fx)).collect();
    CVec::from_iterator(m1 * m2, a1.iter().flat_map(|&u| a2.iter().map(move |&v| u * v)))
}

/// Frozen NLoS fading realizations for every link, i.i.d. CN(0, 1).
#[derive(Debug, Clone)]
pub struct NlosDraws {
    pub bs_ue: Vec<CVec>,
    pub bs_ris: Vec<CMat>,
    pub ris_ue: Vec<Vec<CVec>>,
}

/// Draw a full set of NLoS realizations from `rng`. Draw order is fixed
/// (direct links first, then RIS by index) so scenarios that share a prefix
/// of the RIS list see identical draws for the shared links.
pub fn draw_nlos(scn: &Scenario, rng: &mut impl Rng) -> NlosDraws {
    let n = scn.n_tx;
    let m = scn.n_ris_units();
    let bs_ue = (0..scn.n_users).map(|_| standard_cn_vector(n, rng)).collect();
    let mut bs_ris = Vec::with_capacity(scn.n_ris);
    let mut ris_ue = Vec::with_capacity(scn.n_ris);
    for _ in 0..scn.n_ris {
        let mut h = CMat::zeros(n, m);
        for c in 0..m {
            h.set_column(c, &standard_cn_vector(n, rng));
        }
        bs_ris.push(h);
        ris_ue.push((0..scn.n_users).map(|_| standard_cn_vector(m, rng)).collect());
    }
    NlosDraws { bs_ue, bs_ris, ris_ue }
}

/// Assembled channels for one NLoS realization and one antenna placement,
/// plus the per-link composite LoS/NLoS amplitude factors.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub scenario: Scenario,
    pub draws: NlosDraws,
    pub apv: Apv,
    /// (LoS factor, NLoS factor) per user: `beta sqrt(kappa/(kappa+1))`,
    /// `beta sqrt(1/(kappa+1))`.
    pub chi_bu: Vec<(f64, f64)>,
    pub chi_br: Vec<(f64, f64)>,
    pub chi_ru: Vec<Vec<(f64, f64)>>,
    /// `h^{b,u}_k`, length N.
    pub bs_ue: Vec<CVec>,
    /// `H^{b,r}_l`, N x M.
    pub bs_ris: Vec<CMat>,
    /// `h^{r,u}_{l,k}`, length M; independent of the antenna positions.
    pub ris_ue: Vec<Vec<CVec>>,
}

fn chi(kappa: f64, beta: f64) -> (f64, f64) {
    (
        beta * (kappa / (kappa + 1.0)).sqrt(),
        beta * (1.0 / (kappa + 1.0)).sqrt(),
    )
}

/// Assemble all channels for the given draws and antenna positions.
pub fn assemble_channels(scn: &Scenario, draws: &NlosDraws, apv: &Apv) -> Result<ChannelSet> {
    let n = scn.n_tx;
    let m = scn.n_ris_units();
    if apv.len() != n {
        return Err(Error::Dimension(format!(
            "apv has {} entries, scenario has {n} ports",
            apv.len()
        )));
    }
    if draws.bs_ue.len() != scn.n_users
        || draws.bs_ris.len() < scn.n_ris
        || draws.bs_ue.iter().any(|h| h.len() != n)
        || draws.bs_ris.iter().take(scn.n_ris).any(|h| h.shape() != (n, m))
    {
        return Err(Error::Dimension("NLoS draws do not match scenario".into()));
    }

    let chi_bu: Vec<_> = scn.bs_ue.iter().map(|g| chi(g.kappa, g.beta)).collect();
    let chi_br: Vec<_> = scn.bs_ris.iter().map(|g| chi(g.kappa, g.beta)).collect();
    let chi_ru: Vec<Vec<_>> = scn
        .ris_ue
        .iter()
        .map(|row| row.iter().map(|g| chi(g.kappa, g.beta)).collect())
        .collect();

    let z = apv.positions();
    let bs_ue = (0..scn.n_users)
        .map(|k| {
            let los = fa_steering(scn.bs_ue[k].theta, z, scn.wavelength);
            let (cb, ct) = chi_bu[k];
            los * Complex64::new(cb, 0.0) + &draws.bs_ue[k] * Complex64::new(ct, 0.0)
        })
        .collect();

    let (m1, m2) = scn.ris_dims;
    let bs_ris = (0..scn.n_ris)
        .map(|l| {
            let a_n = fa_steering(scn.bs_ris[l].theta, z, scn.wavelength);
            let a_m = ris_steering(scn.bs_ris[l].theta, scn.bs_ris[l].phi, m1, m2);
            let (cb, ct) = chi_br[l];
            &a_n * a_m.adjoint() * Complex64::new(cb, 0.0)
                + &draws.bs_ris[l] * Complex64::new(ct, 0.0)
        })
        .collect();

    let ris_ue = (0..scn.n_ris)
        .map(|l| {
            (0..scn.n_users)
                .map(|k| {
                    let g = &scn.ris_ue[l][k];
                    let los = ris_steering(g.theta, g.phi, m1, m2);
                    let (cb, ct) = chi_ru[l][k];
                    los * Complex64::new(cb, 0.0)
                        + &draws.ris_ue[l][k] * Complex64::new(ct, 0.0)
                })
                .collect()
        })
        .collect();

    Ok(ChannelSet {
        scenario: scn.clone(),
        draws: draws.clone(),
        apv: apv.clone(),
        chi_bu,
        chi_br,
        chi_ru,
        bs_ue,
        bs_ris,
        ris_ue,
    })
}

impl ChannelSet {
    /// Rebuild the BS-side channels for new antenna positions; NLoS draws
    /// and the RIS-user channels are untouched.
    pub fn reassemble(&self, apv: &Apv) -> Result<ChannelSet> {
        assemble_channels(&self.scenario, &self.draws, apv)
    }

    /// Statistical-CSI counterpart: every channel reduced to its LoS mean.
    pub fn los_only(&self) -> ChannelSet {
        let mut zeroed = self.draws.clone();
        for h in &mut zeroed.bs_ue {
            h.fill(Complex64::default());
        }
        for h in &mut zeroed.bs_ris {
            h.fill(Complex64::default());
        }
        for row in &mut zeroed.ris_ue {
            for h in row {
                h.fill(Complex64::default());
            }
        }
        assemble_channels(&self.scenario, &zeroed, &self.apv)
            .expect("dimensions unchanged")
    }

    /// Scale the BS-side links (direct and BS-RIS) by `s`; used to
    /// normalize the optimization domain so that power and noise are O(1).
    /// The scaling is folded into the scenario's path-loss amplitudes so
    /// that later reassembly at new positions keeps it.
    pub fn scale_bs_links(&self, s: f64) -> ChannelSet {
        let mut scn = self.scenario.clone();
        for g in &mut scn.bs_ue {
            g.beta *= s;
        }
        for g in &mut scn.bs_ris {
            g.beta *= s;
        }
        assemble_channels(&scn, &self.draws, &self.apv).expect("dimensions unchanged")
    }

    /// Cascaded channel `g_k = h^{b,u}_k + sum_l H^{b,r}_l diag(e_l) h^{r,u}_{l,k}`.
    pub fn cascade(&self, ris: &RisState) -> Vec<CVec> {
        (0..self.scenario.n_users)
            .map(|k| {
                let mut g = self.bs_ue[k].clone();
                for l in 0..self.scenario.n_ris {
                    let e = &ris.phases[l];
                    let reflected = CVec::from_iterator(
                        e.len(),
                        e.iter().zip(self.ris_ue[l][k].iter()).map(|(&em, &hm)| em * hm),
                    );
                    g += &self.bs_ris[l] * reflected;
                }
                g
            })
            .collect()
    }
}

/// Free-function alias for [`ChannelSet::cascade`].
pub fn cascade(ch: &ChannelSet, ris: &RisState) -> Vec<CVec> {
    ch.cascade(ris)
}
