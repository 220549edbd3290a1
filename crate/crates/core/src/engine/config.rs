use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extractors::ExtractorSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LossMode {
    /// Plain L1 with subgradient `sign(r)`, `sign(0) = 0`.
    L1,
    /// Huber with threshold `delta`; smooth, for gradient checks.
    Huber { delta: f64 },
}

impl Default for LossMode {
    fn default() -> Self {
        LossMode::L1
    }
}

impl LossMode {
    pub const DEFAULT_HUBER_DELTA: f64 = 1e-3;

    pub fn huber() -> Self {
        LossMode::Huber {
            delta: Self::DEFAULT_HUBER_DELTA,
        }
    }

    /// Value and derivative of the per-element penalty.
    #[inline]
    pub fn eval(self, r: f64) -> (f64, f64) {
        match self {
            LossMode::L1 => {
                let s = if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                (r.abs(), s)
            }
            LossMode::Huber { delta } => {
                if r.abs() <= delta {
                    (0.5 * r * r / delta, r / delta)
                } else {
                    (r.abs() - 0.5 * delta, r.signum())
                }
            }
        }
    }
}

/// How the non-editable region is kept fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BackgroundMode {
    /// Reset `(1 − B)` to the original latent after every step.
    Hard,
    /// Unconstrained steps plus `weight · ||(z − z_orig) ⊙ (1 − B)||₁`.
    Soft { weight: f64 },
}

impl Default for BackgroundMode {
    fn default() -> Self {
        BackgroundMode::Hard
    }
}

/// Inversion-side step counts of a full generative pipeline. The toy engine
/// optimizes a single latent, so these are recorded but not interpreted and
/// no relationship between them is enforced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionKnobs {
    pub diffusion_steps: usize,
    pub skipped_steps: usize,
    pub drag_start_step: usize,
    pub optimize_at_step: usize,
}

impl Default for InversionKnobs {
    fn default() -> Self {
        InversionKnobs {
            diffusion_steps: 25,
            skipped_steps: 6,
            drag_start_step: 19,
            optimize_at_step: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DragConfig {
    /// Motion steps `K`; the schedule reaches the full transform here.
    pub k_motion: usize,
    /// Extra steps repeating the final transform.
    pub k_refine: usize,
    pub lr_phase1: f64,
    pub lr_phase2: f64,
    pub loss_mode: LossMode,
    /// Warp the stop-gradient source features into the step-`k` frame.
    /// Off gives the literal unaligned difference.
    pub align_source: bool,
    /// Scale each step so the largest editable update is `lr · lr_scale`.
    /// Off applies `lr · grad` directly.
    pub normalize_gradient: bool,
    /// Maps the default learning rates (tuned for large real latents) onto
    /// unit-scale toy latents: 1000 becomes a 0.1 per-cell step.
    pub lr_scale: f64,
    pub background: BackgroundMode,
    /// Include intermediate step masks in the editable mask.
    pub sweep: bool,
    pub extractor: ExtractorSpec,
    /// The loop has no randomness; kept so configs round-trip with callers
    /// that seed latents or sampling.
    pub seed: u64,
    pub inversion: InversionKnobs,
}

impl Default for DragConfig {
    fn default() -> Self {
        DragConfig {
            k_motion: 50,
            k_refine: 20,
            lr_phase1: 1000.0,
            lr_phase2: 1200.0,
            loss_mode: LossMode::L1,
            align_source: true,
            normalize_gradient: true,
            lr_scale: 1e-4,
            background: BackgroundMode::Hard,
            sweep: true,
            extractor: ExtractorSpec::Identity,
            seed: 0,
            inversion: InversionKnobs::default(),
        }
    }
}

impl DragConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.k_motion == 0 {
            return bad("k_motion must be at least 1".into());
        }
        for (name, v) in [("lr_phase1", self.lr_phase1), ("lr_phase2", self.lr_phase2), ("lr_scale", self.lr_scale)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if let LossMode::Huber { delta } = self.loss_mode {
            if !(delta > 0.0 && delta.is_finite()) {
                return bad(format!("huber delta must be positive, got {delta}"));
            }
        }
        if let BackgroundMode::Soft { weight } = self.background {
            if !(weight >= 0.0 && weight.is_finite()) {
                return bad(format!("soft background weight must be non-negative, got {weight}"));
            }
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.k_motion + self.k_refine
    }

    /// Learning rate of iteration `it`.
    pub fn lr_at(&self, it: usize) -> f64 {
        if it < self.k_motion {
            self.lr_phase1
        } else {
            self.lr_phase2
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: DragConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::InvalidArgument(format!("config field `{}`: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_schedule() {
        let c = DragConfig::default();
        assert_eq!((c.k_motion, c.k_refine), (50, 20));
        assert_eq!((c.lr_phase1, c.lr_phase2), (1000.0, 1200.0));
        assert_eq!(c.lr_at(49), 1000.0);
        assert_eq!(c.lr_at(50), 1200.0);
        assert!(c.align_source);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let c = DragConfig {
            loss_mode: LossMode::huber(),
            extractor: ExtractorSpec::GaussianBlur { sigma: 1.5 },
            ..DragConfig::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(DragConfig::from_json(&text).unwrap(), c);
        assert_eq!(DragConfig::from_json("{}").unwrap(), DragConfig::default());
        let e = DragConfig::from_json(r#"{"extractor": {"kind": "pooled_blur", "stride": "x"}}"#).unwrap_err();
        assert!(e.to_string().contains("extractor"), "{e}");
        assert!(DragConfig::from_json(r#"{"k_motion": 0}"#).is_err());
        assert!(DragConfig::from_json(r#"{"lr_phase1": -1}"#).is_err());
        assert!(DragConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn penalties() {
        assert_eq!(LossMode::L1.eval(0.0), (0.0, 0.0));
        assert_eq!(LossMode::L1.eval(-2.0), (2.0, -1.0));
        let h = LossMode::Huber { delta: 0.5 };
        assert_eq!(h.eval(0.25), (0.0625, 0.5));
        assert_eq!(h.eval(-1.0), (0.75, -1.0));
    }
}
