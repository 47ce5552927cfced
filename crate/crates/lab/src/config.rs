//! Experiment configuration: JSON on disk, dotted-path overrides from the
//! command line, and validation before any computation starts.

use std::path::{Path, PathBuf};

use anderson_core::lattice::sub_scale;
use anderson_core::poisson::PoissonThresholds;
use anderson_core::{DisorderSpec, Rect};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::LabError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub disorder: DisorderSpec,
    pub dimension: usize,
    pub lambda: f64,
    /// Energy window `[a, b]` assumed to be in the localized regime.
    pub localized_window: [f64; 2],
    /// Exponent in `β_L = L^{d/α}`.
    pub alpha: f64,
    /// `c` in `I = [-c, c]`.
    pub interval_halfwidth: f64,
    pub q: Rect,
    #[serde(rename = "L_list")]
    pub l_list: Vec<usize>,
    pub a_exponent: f64,
    pub gamma_log: f64,
    /// Sites added around `L·Q` and the cells for the `ξ` host box.
    pub padding: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub thresholds: Thresholds,
    pub decay: DecayConfig,
    pub ids: IdsConfig,
    pub audit: AuditConfig,
    pub negative_control: NegativeControlConfig,
    pub outputs: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub max_tv: f64,
    pub dispersion: [f64; 2],
    pub min_chi_p: f64,
    pub min_r_squared: f64,
    /// Relative tolerance of the sample mean against `|I| D̂ |Q|`.
    pub intensity_tolerance: f64,
    /// Relative tolerance of the audit slope against `-d(1 - a)`.
    pub audit_slope_tolerance: f64,
    pub identity_residual: f64,
    pub ids_sup_error: f64,
    pub min_poisson_samples: usize,
}

impl Thresholds {
    pub fn poisson(&self) -> PoissonThresholds {
        PoissonThresholds {
            max_tv: self.max_tv,
            dispersion: self.dispersion,
            min_chi_p: self.min_chi_p,
            min_samples: self.min_poisson_samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub box_side: usize,
    /// Fractional exponent `s`.
    pub s: f64,
    /// `Im z`; the real part is `lambda`.
    pub eta: f64,
    pub min_distance: usize,
    pub max_distance: usize,
    pub n_realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsConfig {
    pub box_side: usize,
    pub n_realizations: usize,
    /// Half-widths for the fractional derivative, strictly decreasing.
    pub epsilons: Vec<f64>,
    pub grid_points: usize,
    pub scan_scales: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub scales: Vec<usize>,
    pub interval_halfwidth: f64,
    pub n_realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativeControlConfig {
    pub interval_halfwidth: f64,
    pub n_realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Validation(format!("bad config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key.path=value` overrides to the JSON tree. Values are parsed
    /// as JSON first and fall back to plain strings.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, LabError> {
        let mut tree = serde_json::to_value(self).expect("config serializes");
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| LabError::Validation(format!("override {item:?} is not key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_leaf(&mut tree, key, value)?;
        }
        serde_json::from_value(tree).map_err(|e| LabError::Validation(format!("override produced a bad config: {e}")))
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |msg: String| Err(LabError::Validation(msg));
        self.disorder.validate()?;
        let [a, b] = self.localized_window;
        if !(a <= b) || !(a <= self.lambda && self.lambda <= b) {
            return bad(format!("lambda = {} is outside the localized window [{a}, {b}]", self.lambda));
        }
        if self.dimension == 0 || self.q.dim() != self.dimension {
            return bad(format!("Q has dimension {}, expected d = {}", self.q.dim(), self.dimension));
        }
        self.q.validate()?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        if !(self.interval_halfwidth > 0.0) {
            return bad("interval_halfwidth must be positive".into());
        }
        if !(self.a_exponent > 0.0 && self.a_exponent < 1.0) {
            return bad(format!("a_exponent = {} must lie in (0, 1)", self.a_exponent));
        }
        if !(self.gamma_log > 0.0) {
            return bad("gamma_log must be positive".into());
        }
        if self.l_list.is_empty() {
            return bad("L_list is empty".into());
        }
        for scales in [&self.l_list, &self.audit.scales] {
            for &l in scales {
                let sub = sub_scale(l, self.a_exponent);
                if l < 2 * sub || sub == 0 {
                    return bad(format!("L = {l} is smaller than 2 l_L = {}", 2 * sub));
                }
            }
        }
        if self.padding == 0 {
            return bad("padding must be at least 1".into());
        }
        if self.n_realizations == 0 || self.audit.n_realizations < 2 || self.negative_control.n_realizations == 0 {
            return bad("realization counts must be positive".into());
        }
        let t = &self.thresholds;
        if !(t.max_tv > 0.0 && t.dispersion[0] < t.dispersion[1] && t.min_chi_p > 0.0 && t.min_chi_p < 1.0) {
            return bad("thresholds are inconsistent".into());
        }
        let d = &self.decay;
        if !(d.s > 0.0 && d.s < 1.0 && d.eta > 0.0) || d.max_distance < d.min_distance + 3 {
            return bad("decay needs s in (0, 1), eta > 0 and at least 4 distances".into());
        }
        if 2 * d.max_distance + 1 > d.box_side {
            return bad(format!(
                "decay box side {} is too small for distance {}",
                d.box_side, d.max_distance
            ));
        }
        let ids = &self.ids;
        if ids.epsilons.is_empty() || ids.epsilons.windows(2).any(|w| w[1] >= w[0]) || ids.grid_points < 2 {
            return bad("ids epsilons must be strictly decreasing and the grid needs 2 points".into());
        }
        if !(self.audit.interval_halfwidth > 0.0 && self.negative_control.interval_halfwidth > 0.0) {
            return bad("window half-widths must be positive".into());
        }
        Ok(())
    }

    pub fn largest_scale(&self) -> usize {
        *self.l_list.iter().max().expect("validated")
    }
}

fn set_leaf(tree: &mut Value, key: &str, value: Value) -> Result<(), LabError> {
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                let slot = map
                    .get_mut(*part)
                    .ok_or_else(|| LabError::Validation(format!("unknown config key {key:?}")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| LabError::Validation(format!("{part:?} in {key:?} is not an index")))?;
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| LabError::Validation(format!("index {idx} out of range in {key:?}")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(LabError::Validation(format!("{key:?} descends into a scalar"))),
        };
    }
    Err(LabError::Validation("empty override key".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ExperimentConfig {
        ExperimentConfig::from_json(include_str!("../../../configs/reference.json")).unwrap()
    }

    #[test]
    fn reference_config_is_valid() {
        reference().validate().unwrap();
    }

    #[test]
    fn overrides_reach_nested_leaves() {
        let c = reference()
            .with_overrides(&["disorder.coupling=3.5".into(), "L_list.0=60".into(), "outputs.dir=elsewhere".into()])
            .unwrap();
        assert_eq!(c.disorder.coupling, 3.5);
        assert_eq!(c.l_list[0], 60);
        assert_eq!(c.outputs.dir, PathBuf::from("elsewhere"));
        assert!(reference().with_overrides(&["nope=1".into()]).is_err());
        assert!(reference().with_overrides(&["lambda".into()]).is_err());
    }

    #[test]
    fn lambda_outside_window_is_rejected() {
        let c = reference().with_overrides(&["lambda=5.0".into()]).unwrap();
        assert!(matches!(c.validate(), Err(LabError::Validation(_))));
    }

    #[test]
    fn empty_scale_list_is_rejected() {
        let c = reference().with_overrides(&["L_list=[]".into()]).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn scale_below_twice_the_cell_is_rejected() {
        let c = reference().with_overrides(&["L_list=[3]".into()]).unwrap();
        assert!(c.validate().is_err());
    }
}
