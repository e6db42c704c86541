//! The space-time lattice gas whose interaction is `-log` of the noisy
//! transition probability, evaluated on 7-cell patterns.
//!
//! Energies are in nats. The interaction takes two values: `-ln(1 - ε)` on
//! error-free patterns and `-ln(ε / (m - 1))` on patterns with an error at
//! the origin, where `m = |Σ̄|` comes from the loaded tile set.

use crate::ca1d::{Boundary, LocalRule};
use crate::pca::{f_tilde, psi, NoiseParams, Pattern, SpaceTimeConfig, NEIGHBORHOOD};
use crate::{Error, Result, Symbol};

/// Offsets `(a, b, i, t)` of the interaction support: the six neighbourhood
/// cells one step earlier, then the origin.
pub const SUPPORT: [[isize; 4]; 7] = [
    [0, 0, 0, -1],
    [1, 0, 0, -1],
    [0, 1, 0, -1],
    [0, 0, 1, -1],
    [1, 0, 1, -1],
    [0, 1, 1, -1],
    [0, 0, 0, 0],
];

/// Symbols on [`SUPPORT`], in the same order.
pub type SupportPattern = [Symbol; 7];

/// The two values of the interaction for a fixed noise level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLevels {
    pub error_free: f64,
    pub error: f64,
}

impl EnergyLevels {
    pub fn new(np: &NoiseParams) -> Self {
        Self { error_free: -(1.0 - np.epsilon()).ln(), error: -np.off_diagonal().ln() }
    }

    /// `ln((1 - ε)(m - 1) / ε)`.
    pub fn gap(&self) -> f64 {
        self.error - self.error_free
    }
}

/// Whether the origin of the pattern follows the stacked rule.
pub fn is_error_free(rule: &LocalRule, pattern: &SupportPattern) -> bool {
    let mut nbhd: Pattern = [0; 6];
    nbhd.copy_from_slice(&pattern[..6]);
    f_tilde(rule, &nbhd) == pattern[6]
}

/// `φ_ε(pattern) = -ln ψ_ε(neighbourhood, origin)`.
pub fn phi(rule: &LocalRule, np: &NoiseParams, pattern: &SupportPattern) -> f64 {
    let levels = EnergyLevels::new(np);
    if is_error_free(rule, pattern) {
        levels.error_free
    } else {
        levels.error
    }
}

/// Base noise, inverse temperature and blank chemical potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractionParams {
    pub epsilon0: f64,
    pub beta: f64,
    pub mu_blank: f64,
    pub alphabet_size: usize,
}

impl InteractionParams {
    /// Requires `0 < ε₀ < (m - 1) / m` (16/17 for the Ammann alphabet),
    /// `β > 0` and `μ ≥ 0`.
    pub fn new(epsilon0: f64, beta: f64, mu_blank: f64, alphabet_size: usize) -> Result<Self> {
        let ceiling = (alphabet_size as f64 - 1.0) / alphabet_size as f64;
        if !(epsilon0 > 0.0 && epsilon0 < ceiling) {
            return Err(Error::InvalidParameter(format!("epsilon0 {epsilon0} outside (0, {ceiling})")));
        }
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("beta {beta} must be positive")));
        }
        if mu_blank.is_nan() || mu_blank < 0.0 {
            return Err(Error::InvalidParameter(format!("mu_blank {mu_blank} must be non-negative")));
        }
        Ok(Self { epsilon0, beta, mu_blank, alphabet_size })
    }
}

/// Solution of `β·φ_{ε₀} = α + φ_{ε(β)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemperatureMap {
    pub alpha: f64,
    pub epsilon: f64,
}

/// The closed form without the `ε₀ < (m-1)/m` restriction, so that
/// the non-monotone regime above it can be examined.
pub fn temperature_map(epsilon0: f64, beta: f64, alphabet_size: usize) -> Result<TemperatureMap> {
    if !(epsilon0 > 0.0 && epsilon0 < 1.0) || beta.is_nan() || beta <= 0.0 || alphabet_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "temperature map at epsilon0={epsilon0}, beta={beta}, m={alphabet_size}"
        )));
    }
    let others = (alphabet_size - 1) as f64;
    // Work in logs: (1-ε₀)^β and (m-1)(ε₀/(m-1))^β.
    let keep = beta * (1.0 - epsilon0).ln();
    let wrong = others.ln() + beta * (epsilon0 / others).ln();
    let hi = keep.max(wrong);
    let log_total = hi + ((keep - hi).exp() + (wrong - hi).exp()).ln();
    let alpha = -log_total;
    Ok(TemperatureMap { alpha, epsilon: (wrong + alpha).exp() })
}

pub fn beta_to_epsilon(ip: &InteractionParams) -> Result<TemperatureMap> {
    temperature_map(ip.epsilon0, ip.beta, ip.alphabet_size)
}

/// Interaction at one noise level, with optional blank chemical potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hamiltonian {
    pub noise: NoiseParams,
    pub mu_blank: f64,
    sign: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowEnergy {
    pub energy: f64,
    pub n_errors: usize,
    pub n_cells: usize,
}

impl Hamiltonian {
    pub fn new(noise: NoiseParams, mu_blank: f64) -> Result<Self> {
        if noise.epsilon() <= 0.0 {
            return Err(Error::InvalidParameter("the interaction needs epsilon > 0".into()));
        }
        Ok(Self { noise, mu_blank, sign: 1.0 })
    }

    /// Negative control: every energy enters with the wrong sign.
    pub fn mis_signed(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    /// The factor at `(a, b, i, t)` read off the window, if its support is
    /// resolvable (`t >= 1` and the feed stream reaches `t - 1`).
    fn factor(&self, rule: &LocalRule, x: &SpaceTimeConfig, cell: [usize; 4]) -> Option<(f64, bool)> {
        let [a, b, i, t] = cell;
        let nbhd = x.neighborhood(rule.blank(), a, b, i, t)?;
        let mut pattern = [0; 7];
        pattern[..6].copy_from_slice(&nbhd);
        pattern[6] = x.get(a, b, i, t);
        let error = !is_error_free(rule, &pattern);
        Some((self.sign * phi(rule, &self.noise, &pattern), error))
    }

    /// Sum of the factors at `region`, plus `μ` per blank cell in it.
    pub fn window_energy(&self, rule: &LocalRule, x: &SpaceTimeConfig, region: &[[usize; 4]]) -> Result<WindowEnergy> {
        let mut out = WindowEnergy { energy: 0.0, n_errors: 0, n_cells: region.len() };
        for &cell in region {
            let (e, err) = self.factor(rule, x, cell).ok_or(Error::TruncatedSupport(cell))?;
            out.energy += e;
            out.n_errors += usize::from(err);
            if rule.alphabet().is_blank(x.get(cell[0], cell[1], cell[2], cell[3])) {
                out.energy += self.sign * self.mu_blank;
            }
        }
        Ok(out)
    }

    /// Factor centres whose support contains `cell`: its own, and the six at
    /// `cell - n` one step later. The final time row has only its own.
    fn factors_containing(&self, x: &SpaceTimeConfig, cell: [usize; 4]) -> Result<Vec<[usize; 4]>> {
        let [na, nb, nl, nt] = x.extents4();
        let [a, b, i, t] = cell;
        if a >= na || b >= nb || i >= nl || t >= nt {
            return Err(Error::InvalidParameter(format!("cell {cell:?} outside window")));
        }
        if t == 0 {
            return Err(Error::InvalidParameter("the initial row is conditioned on".into()));
        }
        let mut centres = vec![cell];
        if t + 1 < nt {
            let periodic = x.boundary_i == Boundary::Periodic;
            for [da, db, di] in NEIGHBORHOOD {
                let ci = if periodic {
                    (i + nl - di) % nl
                } else if i >= di {
                    i - di
                } else {
                    return Err(Error::TruncatedSupport(cell));
                };
                let centre = [(a + na - da) % na, (b + nb - db) % nb, ci, t + 1];
                if !centres.contains(&centre) {
                    centres.push(centre);
                }
            }
        }
        Ok(centres)
    }

    /// Distribution of the symbol at `cell` given every other cell.
    pub fn conditional(&self, rule: &LocalRule, x: &SpaceTimeConfig, cell: [usize; 4]) -> Result<Vec<f64>> {
        let centres = self.factors_containing(x, cell)?;
        let m = rule.alphabet().size();
        let [a, b, i, t] = cell;
        let mut work = x.clone();
        let mut energies = Vec::with_capacity(m);
        for s in 0..m as Symbol {
            work.set(a, b, i, t, s);
            let mut e = 0.0;
            for &c in &centres {
                e += self.factor(rule, &work, c).ok_or(Error::TruncatedSupport(cell))?.0;
            }
            if rule.alphabet().is_blank(s) {
                e += self.sign * self.mu_blank;
            }
            energies.push(e);
        }
        Ok(boltzmann(&energies))
    }
}

/// Normalized `exp(-E)` weights.
fn boltzmann(energies: &[f64]) -> Vec<f64> {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (min - e).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Every cell with `t >= 1` whose factor is resolvable.
pub fn full_region(rule: &LocalRule, x: &SpaceTimeConfig) -> Vec<[usize; 4]> {
    let [na, nb, nl, nt] = x.extents4();
    let mut region = Vec::new();
    for t in 1..nt {
        for a in 0..na {
            for b in 0..nb {
                for i in 0..nl {
                    if x.neighborhood(rule.blank(), a, b, i, t).is_some() {
                        region.push([a, b, i, t]);
                    }
                }
            }
        }
    }
    region
}

/// `Σ_{region} φ_ε + μ·#blank`.
pub fn window_energy(
    rule: &LocalRule,
    x: &SpaceTimeConfig,
    epsilon: f64,
    mu_blank: f64,
    region: &[[usize; 4]],
) -> Result<WindowEnergy> {
    Hamiltonian::new(NoiseParams::for_rule(rule, epsilon)?, mu_blank)?.window_energy(rule, x, region)
}

/// Single-site conditional of the interaction at noise level `epsilon`.
pub fn gibbs_conditional(rule: &LocalRule, x: &SpaceTimeConfig, cell: [usize; 4], epsilon: f64) -> Result<Vec<f64>> {
    Hamiltonian::new(NoiseParams::for_rule(rule, epsilon)?, 0.0)?.conditional(rule, x, cell)
}

/// `ln` of the path probability of rows `1..=T` given row 0.
pub fn path_log_weight(rule: &LocalRule, np: &NoiseParams, x: &SpaceTimeConfig) -> Result<f64> {
    let [na, nb, nl, nt] = x.extents4();
    let mut total = 0.0;
    for t in 1..nt {
        for a in 0..na {
            for b in 0..nb {
                for i in 0..nl {
                    let p = x
                        .neighborhood(rule.blank(), a, b, i, t)
                        .ok_or(Error::TruncatedSupport([a, b, i, t]))?;
                    total += psi(rule, np, &p, x.get(a, b, i, t)).ln();
                }
            }
        }
    }
    Ok(total)
}

/// Conditional of `cell` under the path measure, by re-weighting the whole
/// window for each candidate symbol.
pub fn path_conditional(rule: &LocalRule, np: &NoiseParams, x: &SpaceTimeConfig, cell: [usize; 4]) -> Result<Vec<f64>> {
    let [a, b, i, t] = cell;
    if t == 0 {
        return Err(Error::InvalidParameter("the initial row is conditioned on".into()));
    }
    let mut work = x.clone();
    let mut energies = Vec::new();
    for s in 0..rule.alphabet().size() as Symbol {
        work.set(a, b, i, t, s);
        energies.push(-path_log_weight(rule, np, &work)?);
    }
    Ok(boltzmann(&energies))
}

/// Largest absolute difference between the local-factor conditional and the
/// path-measure conditional over every cell with `t >= 1`.
pub fn dlr_max_residual(rule: &LocalRule, ham: &Hamiltonian, x: &SpaceTimeConfig) -> Result<f64> {
    let [na, nb, nl, nt] = x.extents4();
    let mut worst = 0.0f64;
    for t in 1..nt {
        for a in 0..na {
            for b in 0..nb {
                for i in 0..nl {
                    let cell = [a, b, i, t];
                    let local = ham.conditional(rule, x, cell)?;
                    let global = path_conditional(rule, &ham.noise, x, cell)?;
                    for (p, q) in local.iter().zip(&global) {
                        worst = worst.max((p - q).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stack3d::Config3D;
    use crate::tileset::TileSet;

    fn rule() -> LocalRule {
        LocalRule::from_tileset(&TileSet::fixture("ammann16").unwrap()).unwrap()
    }

    fn error_free_pattern(rule: &LocalRule) -> SupportPattern {
        let p: Pattern = [0, 0, 0, 1, 1, 1];
        let mut out = [0; 7];
        out[..6].copy_from_slice(&p);
        out[6] = f_tilde(rule, &p);
        out
    }

    #[test]
    fn support_shape() {
        assert_eq!(SUPPORT.len(), 7);
        assert!(SUPPORT.iter().all(|o| o.iter().all(|&v| v == 0 || v.abs() == 1)));
        for (s, n) in SUPPORT.iter().zip(NEIGHBORHOOD) {
            assert_eq!(s[3], -1);
            assert_eq!([s[0] as usize, s[1] as usize, s[2] as usize], n);
        }
    }

    #[test]
    fn phi_at_one_half() {
        let rule = rule();
        let np = NoiseParams::for_rule(&rule, 0.5).unwrap();
        let good = error_free_pattern(&rule);
        let mut bad = good;
        bad[6] = (bad[6] + 1) % 17;
        assert!((phi(&rule, &np, &good) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((phi(&rule, &np, &bad) - 3.465735902799727).abs() < 1e-12);
    }

    #[test]
    fn phi_levels_coincide_at_sixteen_seventeenths() {
        let np = NoiseParams::new(16.0 / 17.0, 17).unwrap();
        let lv = EnergyLevels::new(&np);
        assert!((lv.error_free - 17f64.ln()).abs() < 1e-12);
        assert!((lv.error - 17f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn beta_one_is_identity() {
        let tm = temperature_map(0.3, 1.0, 17).unwrap();
        assert!(tm.alpha.abs() < 1e-12);
        assert!((tm.epsilon - 0.3).abs() < 1e-12);
    }

    #[test]
    fn invalid_interaction_params() {
        assert!(InteractionParams::new(0.95, 2.0, 0.0, 17).is_err());
        assert!(InteractionParams::new(0.5, 0.0, 0.0, 17).is_err());
        assert!(InteractionParams::new(0.5, 1.0, -1.0, 17).is_err());
        assert!(InteractionParams::new(0.5, 1.0, 0.0, 17).is_ok());
        assert!(temperature_map(0.5, -1.0, 17).is_err());
    }

    #[test]
    fn final_row_conditional_is_theta_row() {
        let rule = rule();
        let init = Config3D::filled([2, 2, 3], 5, Boundary::FeedBlank).unwrap();
        let mut x = SpaceTimeConfig::from_initial(&init);
        x.push(&init).unwrap();
        let cell = [1, 0, 1, 1];
        let det = x.rule_value(&rule, 1, 0, 1, 1).unwrap();
        let np = NoiseParams::for_rule(&rule, 0.2).unwrap();
        let dist = gibbs_conditional(&rule, &x, cell, 0.2).unwrap();
        for (s, p) in dist.iter().enumerate() {
            let expect = crate::pca::theta(&np, det, s as Symbol);
            assert!((p - expect).abs() < 1e-12);
        }
        let uniform = gibbs_conditional(&rule, &x, cell, 16.0 / 17.0).unwrap();
        assert!(uniform.iter().all(|p| (p - 1.0 / 17.0).abs() < 1e-12));
    }

    #[test]
    fn truncated_supports_are_rejected() {
        let rule = rule();
        let init = Config3D::filled([2, 2, 3], 5, Boundary::FeedBlank).unwrap();
        let mut x = SpaceTimeConfig::from_initial(&init);
        x.push(&init).unwrap();
        x.push(&init).unwrap();
        assert!(matches!(gibbs_conditional(&rule, &x, [0, 0, 0, 1], 0.2), Err(Error::TruncatedSupport(_))));
        assert!(gibbs_conditional(&rule, &x, [0, 0, 1, 1], 0.2).is_ok());
        assert!(gibbs_conditional(&rule, &x, [0, 0, 1, 0], 0.2).is_err());
        assert!(window_energy(&rule, &x, 0.2, 0.0, &[[0, 0, 0, 0]]).is_err());
    }

    #[test]
    fn blank_window_energy_counts_mu() {
        let rule = rule();
        let init = Config3D::filled([2, 2, 2], rule.blank(), Boundary::FeedBlank).unwrap();
        let mut x = SpaceTimeConfig::from_initial(&init);
        x.push(&init).unwrap();
        let region = full_region(&rule, &x);
        assert_eq!(region.len(), 8);
        let we = window_energy(&rule, &x, 0.1, 0.1, &region).unwrap();
        assert_eq!(we.n_errors, 0);
        assert!((we.energy - 8.0 * (-(0.9f64).ln() + 0.1)).abs() < 1e-12);
    }
}
