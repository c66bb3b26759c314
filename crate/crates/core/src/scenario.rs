//! Static problem description: array and RIS sizes, geometry, powers,
//! Rician factors, path losses, loop controls, and deterministic
//! per-trial randomness.

use rand_chacha::ChaCha12Rng;
use serde::Deserialize;

use crate::{Error, Result, SPEED_OF_LIGHT};

/// Default scenario shipped with the crate (24-port array, 3 users, 2 RIS).
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.toml");

/// Geometry and fading description of one link.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeom {
    /// Elevation angle, radians in `[0, pi]`.
    pub theta: f64,
    /// Azimuth angle, radians in `[0, 2pi)`. Unused by the linear BS array.
    pub phi: f64,
    /// Propagation distance, meters.
    pub range: f64,
    /// Rician factor, linear.
    pub kappa: f64,
    /// Path loss as a linear amplitude factor (10^(beta_dB/20)).
    pub beta: f64,
}

/// Rank-1 penalty policy for the lifted beamforming subproblems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// Start at 10x the initial objective magnitude, double per FP pass
    /// while the extraction tightness stays below 0.999.
    Auto,
    /// Fixed weight (its magnitude is used; escalation still doubles it).
    Fixed(f64),
}

/// Validated static problem data.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    /// Transmit array ports (N).
    pub n_tx: usize,
    /// Users = RF chains (K).
    pub n_users: usize,
    /// Number of RIS panels (L).
    pub n_ris: usize,
    /// RIS panel dimensions (M1, M2); M = M1 * M2 units.
    pub ris_dims: (usize, usize),
    /// Maximum array aperture D, meters.
    pub aperture: f64,
    /// Minimum element spacing delta, meters.
    pub min_spacing: f64,
    /// Transmit power budget, linear watts.
    pub power: f64,
    /// Noise power, linear watts.
    pub noise_power: f64,
    /// Convergence threshold for the iterative loops.
    pub rho: f64,
    pub max_bcd_iters: usize,
    pub max_mm_iters: usize,
    pub penalty: Penalty,
    /// Base RNG seed; per-trial streams derive from it.
    pub seed: u64,
    /// Default Monte Carlo trial count.
    pub trials: usize,
    /// BS -> user links, one per user.
    pub bs_ue: Vec<LinkGeom>,
    /// BS -> RIS links, one per RIS.
    pub bs_ris: Vec<LinkGeom>,
    /// RIS -> user links, indexed `[ris][user]`.
    pub ris_ue: Vec<Vec<LinkGeom>>,
}

impl Scenario {
    /// RIS unit count M.
    pub fn n_ris_units(&self) -> usize {
        self.ris_dims.0 * self.ris_dims.1
    }

    /// Sub-connected subarray size N/K.
    pub fn sub_size(&self) -> usize {
        self.n_tx / self.n_users
    }

    /// The scenario from the crate's default configuration.
    pub fn default_scenario() -> Scenario {
        load_scenario(DEFAULT_SCENARIO).expect("embedded default scenario is valid")
    }
}

/// Antenna position vector: ordered element coordinates along the array
/// axis, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Apv {
    positions: Vec<f64>,
}

impl Apv {
    /// Validates ordering, minimum spacing, and aperture bounds
    /// (absolute tolerance 1e-12 m).
    pub fn new(positions: Vec<f64>, aperture: f64, min_spacing: f64) -> Result<Apv> {
        const TOL: f64 = 1e-12;
        if positions.is_empty() {
            return Err(Error::Invalid("empty antenna position vector".into()));
        }
        if positions[0] < -TOL {
            return Err(Error::Invalid(format!("z_1 = {} < 0", positions[0])));
        }
        let last = *positions.last().unwrap();
        if last > aperture + TOL {
            return Err(Error::Invalid(format!("z_N = {last} exceeds aperture {aperture}")));
        }
        for w in positions.windows(2) {
            if w[1] - w[0] < min_spacing - TOL {
                return Err(Error::Invalid(format!(
                    "spacing {} below minimum {min_spacing}",
                    w[1] - w[0]
                )));
            }
        }
        Ok(Apv { positions })
    }

    /// Exact Euclidean projection of arbitrary coordinates onto the feasible
    /// set (ordering with minimum spacing, plus the aperture box). Used to
    /// repair solver outputs that satisfy the constraints only to solver
    /// tolerance.
    pub fn project(raw: &[f64], aperture: f64, min_spacing: f64) -> Result<Apv> {
        let n = raw.len();
        let slack = aperture - (n as f64 - 1.0) * min_spacing;
        if slack < -1e-12 {
            return Err(Error::Infeasible(format!(
                "aperture {aperture} cannot hold {n} elements at spacing {min_spacing}"
            )));
        }
        // Shift to y_n = z_n - (n-1) delta: feasible set becomes
        // {y nondecreasing, 0 <= y <= slack}; bounded isotonic regression is
        // the clipped pool-adjacent-violators fit.
        let y: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(i, &z)| z - i as f64 * min_spacing)
            .collect();
        let iso = isotonic(&y);
        let slack = slack.max(0.0);
        let positions: Vec<f64> = iso
            .iter()
            .enumerate()
            .map(|(i, &v)| v.clamp(0.0, slack) + i as f64 * min_spacing)
            .collect();
        Apv::new(positions, aperture, min_spacing)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Pool-adjacent-violators: least-squares nondecreasing fit.
fn isotonic(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut level: Vec<f64> = Vec::with_capacity(n);
    let mut weight: Vec<f64> = Vec::with_capacity(n);
    for &v in y {
        level.push(v);
        weight.push(1.0);
        while level.len() > 1 && level[level.len() - 2] > level[level.len() - 1] {
            let (l2, w2) = (level.pop().unwrap(), weight.pop().unwrap());
            let (l1, w1) = (level.pop().unwrap(), weight.pop().unwrap());
            level.push((l1 * w1 + l2 * w2) / (w1 + w2));
            weight.push(w1 + w2);
        }
    }
    let mut out = Vec::with_capacity(n);
    for (l, w) in level.iter().zip(&weight) {
        for _ in 0..*w as usize {
            out.push(*l);
        }
    }
    out
}

/// Uniformly spaced positions starting at zero.
pub fn uniform_apv(scn: &Scenario, spacing: f64) -> Result<Apv> {
    if spacing < scn.min_spacing - 1e-15 {
        return Err(Error::Invalid(format!(
            "spacing {spacing} below minimum {}",
            scn.min_spacing
        )));
    }
    let span = (scn.n_tx as f64 - 1.0) * spacing;
    if span > scn.aperture + 1e-12 {
        return Err(Error::Invalid(format!(
            "span {span} of {} elements at spacing {spacing} exceeds aperture {}",
            scn.n_tx, scn.aperture
        )));
    }
    let positions = (0..scn.n_tx).map(|n| n as f64 * spacing).collect();
    Apv::new(positions, scn.aperture, scn.min_spacing)
}

/// Deterministic per-trial random stream: the base seed and trial index are
/// mixed into the ChaCha key, so equal inputs give bit-identical streams and
/// different seeds or trials give independent ones.
pub fn rng_for_trial(scn: &Scenario, trial: usize) -> ChaCha12Rng {
    use rand::SeedableRng;
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&scn.seed.to_le_bytes());
    key[8..16].copy_from_slice(&(trial as u64).to_le_bytes());
    key[16..24].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

// ---------------------------------------------------------------------------
// Configuration parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    carrier_ghz: f64,
    n_tx: usize,
    n_users: usize,
    n_ris: usize,
    ris_dims: [usize; 2],
    aperture_m: Option<f64>,
    min_spacing_m: Option<f64>,
    power_dbm: f64,
    noise_dbm: f64,
    kappa_db: f64,
    pathloss_db: f64,
    rho: f64,
    max_bcd_iters: usize,
    max_mm_iters: usize,
    penalty: Option<f64>,
    seed: u64,
    trials: Option<usize>,
    links: LinksSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinksSection {
    bs_ue: Family,
    bs_ris: Family,
    ris_ue: PairFamily,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Family {
    theta_deg: Vec<f64>,
    phi_deg: Option<Vec<f64>>,
    range_m: Vec<f64>,
    exponent: f64,
    kappa_db: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairFamily {
    theta_deg: Vec<Vec<f64>>,
    phi_deg: Vec<Vec<f64>>,
    range_m: Vec<Vec<f64>>,
    exponent: f64,
    kappa_db: Option<f64>,
}

/// A parsed configuration that can still take `key = value` overrides
/// before being turned into a validated [`Scenario`].
#[derive(Debug, Clone)]
pub struct Config {
    value: toml::Value,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let value: toml::Value =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Config { value })
    }

    pub fn default_config() -> Config {
        Config::parse(DEFAULT_SCENARIO).expect("embedded default scenario parses")
    }

    /// Apply one `key.path = value` override; the value is parsed as TOML.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override '{assignment}' is not key=value")))?;
        let parsed: toml::Value = toml::from_str(&format!("v = {}", raw.trim()))
            .map_err(|e| Error::Parse(format!("override value '{raw}': {e}")))?;
        let v = parsed["v"].clone();
        let mut cur = &mut self.value;
        let parts: Vec<&str> = path.trim().split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = cur
                .as_table_mut()
                .ok_or_else(|| Error::Parse(format!("override path '{path}' hits a non-table")))?;
            if i == parts.len() - 1 {
                table.insert((*part).to_string(), v);
                return Ok(());
            }
            cur = table
                .entry((*part).to_string())
                .or_insert(toml::Value::Table(Default::default()));
        }
        unreachable!()
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let file: ConfigFile = self
            .value
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        build_scenario(file)
    }
}

/// Parse and validate a scenario configuration.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    Config::parse(text)?.to_scenario()
}

fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Path loss in dB for distance `r` and exponent `vartheta`:
/// `beta = -beta0 - 10 vartheta log10(r)`, returned as linear amplitude.
fn pathloss_amplitude(beta0_db: f64, exponent: f64, range: f64) -> f64 {
    let beta_db = -beta0_db - 10.0 * exponent * range.log10();
    10f64.powf(beta_db / 20.0)
}

fn check_angle(deg: f64, key: &str, azimuth: bool) -> Result<f64> {
    let limit = if azimuth { 360.0 } else { 180.0 };
    if !(0.0..=limit).contains(&deg) || (azimuth && deg == 360.0) {
        return Err(Error::Invalid(format!("{key} = {deg} deg out of range")));
    }
    Ok(deg.to_radians())
}

fn build_family(
    fam: &Family,
    count: usize,
    key: &str,
    beta0: f64,
    kappa_default_db: f64,
) -> Result<Vec<LinkGeom>> {
    if fam.theta_deg.len() < count || fam.range_m.len() < count {
        return Err(Error::Invalid(format!(
            "links.{key}: need at least {count} entries"
        )));
    }
    let kappa = db_to_linear(fam.kappa_db.unwrap_or(kappa_default_db));
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let range = fam.range_m[i];
        if range <= 0.0 {
            return Err(Error::Invalid(format!("links.{key}.range_m[{i}] must be > 0")));
        }
        let phi = fam
            .phi_deg
            .as_ref()
            .map(|p| p.get(i).copied().unwrap_or(0.0))
            .unwrap_or(0.0);
        out.push(LinkGeom {
            theta: check_angle(fam.theta_deg[i], &format!("links.{key}.theta_deg[{i}]"), false)?,
            phi: check_angle(phi, &format!("links.{key}.phi_deg[{i}]"), true)?,
            range,
            kappa,
            beta: pathloss_amplitude(beta0, fam.exponent, range),
        });
    }
    Ok(out)
}

fn build_scenario(file: ConfigFile) -> Result<Scenario> {
    if file.n_users == 0 || file.n_tx == 0 {
        return Err(Error::Invalid("n_tx and n_users must be positive".into()));
    }
    if file.n_tx % file.n_users != 0 {
        return Err(Error::Invalid(format!(
            "n_tx mod n_users != 0 ({} mod {})",
            file.n_tx, file.n_users
        )));
    }
    if file.ris_dims[0] == 0 || file.ris_dims[1] == 0 {
        return Err(Error::Invalid("ris_dims entries must be positive".into()));
    }
    let wavelength = SPEED_OF_LIGHT / (file.carrier_ghz * 1e9);
    let aperture = file.aperture_m.unwrap_or((file.n_tx as f64 - 1.0) * wavelength);
    let min_spacing = file.min_spacing_m.unwrap_or(wavelength / 2.0);
    if aperture < (file.n_tx as f64 - 1.0) * min_spacing - 1e-12 {
        return Err(Error::Invalid(format!(
            "aperture_m = {aperture} cannot hold {} elements at min_spacing_m = {min_spacing}",
            file.n_tx
        )));
    }
    let power = dbm_to_watts(file.power_dbm);
    let noise_power = dbm_to_watts(file.noise_dbm);
    if power <= 0.0 || noise_power <= 0.0 {
        return Err(Error::Invalid("power and noise must be positive".into()));
    }

    let l = file.n_ris;
    let bs_ue = build_family(
        &file.links.bs_ue,
        file.n_users,
        "bs_ue",
        file.pathloss_db,
        file.kappa_db,
    )?;
    let bs_ris = build_family(&file.links.bs_ris, l, "bs_ris", file.pathloss_db, file.kappa_db)?;

    let ru = &file.links.ris_ue;
    if ru.theta_deg.len() < l || ru.phi_deg.len() < l || ru.range_m.len() < l {
        return Err(Error::Invalid(format!("links.ris_ue: need at least {l} rows")));
    }
    let kappa_ru = db_to_linear(ru.kappa_db.unwrap_or(file.kappa_db));
    let mut ris_ue = Vec::with_capacity(l);
    for li in 0..l {
        if ru.theta_deg[li].len() < file.n_users || ru.range_m[li].len() < file.n_users {
            return Err(Error::Invalid(format!(
                "links.ris_ue row {li}: need {} entries",
                file.n_users
            )));
        }
        let mut row = Vec::with_capacity(file.n_users);
        for k in 0..file.n_users {
            let range = ru.range_m[li][k];
            if range <= 0.0 {
                return Err(Error::Invalid(format!(
                    "links.ris_ue.range_m[{li}][{k}] must be > 0"
                )));
            }
            row.push(LinkGeom {
                theta: check_angle(
                    ru.theta_deg[li][k],
                    &format!("links.ris_ue.theta_deg[{li}][{k}]"),
                    false,
                )?,
                phi: check_angle(
                    ru.phi_deg[li].get(k).copied().unwrap_or(0.0),
                    &format!("links.ris_ue.phi_deg[{li}][{k}]"),
                    true,
                )?,
                range,
                kappa: kappa_ru,
                beta: pathloss_amplitude(file.pathloss_db, ru.exponent, range),
            });
        }
        ris_ue.push(row);
    }

    Ok(Scenario {
        wavelength,
        n_tx: file.n_tx,
        n_users: file.n_users,
        n_ris: l,
        ris_dims: (file.ris_dims[0], file.ris_dims[1]),
        aperture,
        min_spacing,
        power,
        noise_power,
        rho: file.rho,
        max_bcd_iters: file.max_bcd_iters,
        max_mm_iters: file.max_mm_iters,
        penalty: match file.penalty {
            Some(p) => Penalty::Fixed(p),
            None => Penalty::Auto,
        },
        seed: file.seed,
        trials: file.trials.unwrap_or(10),
        bs_ue,
        bs_ris,
        ris_ue,
    })
}
