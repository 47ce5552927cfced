//! Single-site distributions for the random potential.
//!
//! Two families are supported:
//!
//! * [`DisorderFamily::UniformDensity`]: constant density on `[v_min, v_max]`
//!   (Hölder exponent 1, bounded density).
//! * [`DisorderFamily::AlphaPower`]: CDF `F(x) = ((x - v_min) / w)^α` on
//!   `[v_min, v_max]`, `w = v_max - v_min`. Its concentration function is
//!   known in closed form, which makes the Wegner constant exact.
//!
//! Sampling is by inverse CDF. Draws are keyed by `(master seed, realization,
//! site key)` through a ChaCha stream, so the value at a site never depends on
//! which other sites were sampled or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DisorderFamily {
    UniformDensity,
    AlphaPower,
}

/// The single-site law `μ` together with the coupling `g` multiplying every draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub family: DisorderFamily,
    /// `[v_min, v_max]` of the unscaled law.
    pub support: [f64; 2],
    pub alpha: f64,
    /// `U` in `S_μ(s) <= U s^α`.
    pub holder_const: f64,
    pub coupling: f64,
}

impl DisorderSpec {
    /// Uniform law on `[lo, hi]` with the exact Hölder constant `1 / (hi - lo)`.
    pub fn uniform(lo: f64, hi: f64, coupling: f64) -> Self {
        Self {
            family: DisorderFamily::UniformDensity,
            support: [lo, hi],
            alpha: 1.0,
            holder_const: 1.0 / (hi - lo),
            coupling,
        }
    }

    /// `F(x) = x^α` on `[0, 1]`, for which `U = 1`.
    pub fn alpha_power(alpha: f64, coupling: f64) -> Self {
        Self {
            family: DisorderFamily::AlphaPower,
            support: [0.0, 1.0],
            alpha,
            holder_const: 1.0,
            coupling,
        }
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self { coupling, ..self.clone() }
    }

    pub fn width(&self) -> f64 {
        self.support[1] - self.support[0]
    }

    /// Smallest `U` with `S_μ(s) <= U s^α` for every `s > 0`.
    pub fn exact_holder_const(&self) -> f64 {
        self.width().powf(-self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.support;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(config_err!("support [{lo}, {hi}] must be bounded"));
        }
        if !(hi > lo) {
            return Err(config_err!("support [{lo}, {hi}] is empty"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(config_err!("alpha = {} outside (0, 1]", self.alpha));
        }
        if self.family == DisorderFamily::UniformDensity && self.alpha != 1.0 {
            return Err(config_err!("UniformDensity has Hölder exponent 1, got alpha = {}", self.alpha));
        }
        if !(self.holder_const > 0.0 && self.holder_const.is_finite()) {
            return Err(config_err!("holder_const must be positive"));
        }
        let exact = self.exact_holder_const();
        if self.holder_const < exact * (1.0 - 1e-12) {
            return Err(config_err!(
                "holder_const = {} is below the exact constant {exact} of this law",
                self.holder_const
            ));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(config_err!("coupling = {} must be >= 0", self.coupling));
        }
        Ok(())
    }

    /// CDF of the unscaled law.
    pub fn cdf(&self, x: f64) -> f64 {
        let [lo, hi] = self.support;
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let t = (x - lo) / self.width();
        match self.family {
            DisorderFamily::UniformDensity => t,
            DisorderFamily::AlphaPower => t.powf(self.alpha),
        }
    }

    /// Inverse CDF of the unscaled law, `u ∈ [0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let t = match self.family {
            DisorderFamily::UniformDensity => u,
            DisorderFamily::AlphaPower => u.powf(1.0 / self.alpha),
        };
        self.support[0] + self.width() * t
    }

    /// `sup_a μ[a, a + s]` of the unscaled law.
    ///
    /// Both families have a concave CDF on the support, so the supremum is
    /// attained at `a = v_min`.
    pub fn concentration(&self, s: f64) -> Result<f64> {
        self.validate()?;
        if !(s > 0.0) {
            return Err(config_err!("concentration width must be positive, got {s}"));
        }
        Ok(self.cdf(self.support[0] + s))
    }

    /// `‖ρ‖_∞` when the law has a bounded density.
    pub fn density_sup(&self) -> Option<f64> {
        match self.family {
            DisorderFamily::UniformDensity => Some(1.0 / self.width()),
            DisorderFamily::AlphaPower if self.alpha == 1.0 => Some(1.0 / self.width()),
            DisorderFamily::AlphaPower => None,
        }
    }

    /// Wegner constant `Q_μ(s)`: `‖ρ‖_∞ s` with a bounded density, `8 S_μ(s)` otherwise.
    pub fn wegner_constant(&self, s: f64) -> Result<f64> {
        self.validate()?;
        if !(s > 0.0) {
            return Err(config_err!("Wegner width must be positive, got {s}"));
        }
        match self.family {
            DisorderFamily::UniformDensity => Ok(s / self.width()),
            DisorderFamily::AlphaPower => Ok(8.0 * self.concentration(s)?),
        }
    }

    /// Wegner constant of the law of `g·ω` evaluated at energy width `width`.
    ///
    /// For `g > 0` this is `Q_μ(width / g)`; a zero coupling collapses the law
    /// to a point mass, whose concentration is 1 at every width.
    pub fn coupled_wegner_constant(&self, width: f64) -> Result<f64> {
        if width == 0.0 {
            return Ok(0.0);
        }
        if self.coupling == 0.0 {
            self.validate()?;
            return Ok(8.0);
        }
        self.wegner_constant(width / self.coupling)
    }

    /// Largest `|g·v|` over the support.
    pub fn max_abs_potential(&self) -> f64 {
        self.coupling * self.support[0].abs().max(self.support[1].abs())
    }

    /// Draws `g·F⁻¹(u)` from a uniform `u`.
    #[inline]
    pub fn transform(&self, u: f64) -> f64 {
        self.coupling * self.inverse_cdf(u)
    }
}

/// Address of one stream of draws: realization `realization_index` of the
/// ensemble seeded by `master_seed`, starting at site key `site_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub master_seed: u64,
    pub realization_index: u64,
    pub site_index: u64,
}

/// One disorder realization `ω` of an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Realization {
    pub master_seed: u64,
    pub index: u64,
}

impl Realization {
    pub fn new(master_seed: u64, index: u64) -> Self {
        Self { master_seed, index }
    }

    pub fn at_site(&self, site_index: u64) -> SeedPath {
        SeedPath {
            master_seed: self.master_seed,
            realization_index: self.index,
            site_index,
        }
    }
}

impl SeedPath {
    /// ChaCha stream positioned at this site. Each site consumes two 32-bit words.
    fn stream(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization_index);
        rng.set_word_pos(u128::from(self.site_index) * 2);
        rng
    }
}

/// Uniform variates in `[0, 1)` for `n_sites` consecutive site keys.
pub fn uniform_draws(seed: SeedPath, n_sites: usize) -> Vec<f64> {
    let mut rng = seed.stream();
    (0..n_sites).map(|_| rng.random::<f64>()).collect()
}

/// Potential values `g·ω_k` for site keys `seed.site_index .. seed.site_index + n_sites`.
pub fn sample_potential<T: Real>(spec: &DisorderSpec, seed: SeedPath, n_sites: usize) -> Result<Vec<T>> {
    spec.validate()?;
    if n_sites == 0 {
        return Err(config_err!("n_sites must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_sites);
    fill_potential(spec, seed, &mut out, n_sites);
    Ok(out)
}

/// Appends `n_sites` draws to `out`; `spec` must already be validated.
pub(crate) fn fill_potential<T: Real>(spec: &DisorderSpec, seed: SeedPath, out: &mut Vec<T>, n_sites: usize) {
    let mut rng = seed.stream();
    for _ in 0..n_sites {
        let u: f64 = rng.random();
        out.push(T::lit(spec.transform(u)));
    }
}
