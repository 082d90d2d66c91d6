//! Deterministic synthetic EEG session generator.
//!
//! Stands in for a recorded dataset: plateau classes sit at a subject- and
//! gender-dependent level, transition classes follow a logistic ramp between
//! the two levels, and every session carries Gaussian noise plus occasional
//! positive outlier spikes.
//!
//! Two state-dependent shape cues keep the plateau classes separable after
//! per-window min-max normalization (which erases absolute level, so level
//! alone carries no information into the classifier):
//!
//! * a settling transient at session start — relaxed sessions settle downward
//!   onto their plateau, focused sessions ramp up onto theirs. Its amplitude
//!   scales with the condition's noise level, so noise-free sessions are
//!   exact plateaus;
//! * state-dependent noise smoothness — relaxed noise is a slow AR(1) wander
//!   (slow-wave activity), focused noise is nearly white (fast activity),
//!   with the marginal std-dev fixed at the condition's level either way.
//!   Transitions interpolate the smoothness along the ramp.
//!
//! Randomness: one `ChaCha8` stream per session, seeded via the SplitMix64
//! counter scheme in [`crate::rng`]. Sessions are generated class-major
//! (canonical class order, then session index), subjects assigned round-robin
//! within each class.

use crate::error::{Error, Result};
use crate::rng::{derive_seed, new_rng};
use crate::signal::{Gender, LabelClass, RawSession, SESSION_LEN};
use crate::tensor::sigmoid;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: String,
    pub gender: Gender,
    /// Plateau level held while relaxed.
    pub relaxed_level: f64,
    /// Plateau level held while focused.
    pub focused_level: f64,
    /// Std-dev of the per-session level shift.
    pub level_jitter: f64,
}

impl SubjectProfile {
    pub fn new(subject_id: impl Into<String>, gender: Gender) -> Self {
        let (relaxed_level, focused_level) = match gender {
            Gender::Male => (58.0, 78.0),
            Gender::Female => (45.0, 70.0),
        };
        SubjectProfile {
            subject_id: subject_id.into(),
            gender,
            relaxed_level,
            focused_level,
            level_jitter: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.focused_level <= self.relaxed_level {
            return Err(Error::InvalidArgument(format!(
                "subject {}: focused level must exceed relaxed level",
                self.subject_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub sessions_per_class: usize,
    pub profiles: Vec<SubjectProfile>,
    /// Sample noise std-dev in the quiet condition.
    pub quiet_noise_std: f64,
    /// Sample noise std-dev in the noisy condition.
    pub noisy_noise_std: f64,
    /// Per-sample probability of an additive spike.
    pub outlier_rate: f64,
    /// Spike height, added on top of the clean value.
    pub outlier_magnitude: f64,
    /// Transition midpoint, as a fraction interval of the session length.
    pub transition_center_range: (f64, f64),
    /// Logistic steepness, as a fraction of the session length.
    pub transition_steepness: f64,
    /// Settling-transient amplitude in units of the condition noise std-dev.
    pub settle_gain: f64,
    /// Settling-transient decay constant, in samples.
    pub settle_tau: f64,
    /// AR(1) noise coefficient while relaxed (slow wander).
    pub relaxed_smoothness: f64,
    /// AR(1) noise coefficient while focused (near-white).
    pub focused_smoothness: f64,
}

impl GenSpec {
    pub fn new(sessions_per_class: usize) -> Self {
        GenSpec {
            sessions_per_class,
            profiles: default_profiles(),
            quiet_noise_std: 1.5,
            noisy_noise_std: 6.0,
            outlier_rate: 0.01,
            outlier_magnitude: 40.0,
            transition_center_range: (0.35, 0.65),
            transition_steepness: 0.08,
            settle_gain: 2.5,
            settle_tau: 24.0,
            relaxed_smoothness: 0.7,
            focused_smoothness: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sessions_per_class == 0 {
            return Err(Error::InvalidArgument("sessions_per_class must be >= 1".into()));
        }
        if self.profiles.is_empty() {
            return Err(Error::InvalidArgument("at least one subject profile required".into()));
        }
        for p in &self.profiles {
            p.validate()?;
        }
        if !(0.0..=1.0).contains(&self.outlier_rate) {
            return Err(Error::InvalidArgument("outlier rate must be in [0, 1]".into()));
        }
        if self.quiet_noise_std < 0.0 || self.noisy_noise_std < 0.0 {
            return Err(Error::InvalidArgument("noise std-devs must be >= 0".into()));
        }
        let (lo, hi) = self.transition_center_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidArgument("bad transition center range".into()));
        }
        for rho in [self.relaxed_smoothness, self.focused_smoothness] {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidArgument("smoothness coefficients must be in [0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn noise_std(&self, noisy: bool) -> f64 {
        if noisy {
            self.noisy_noise_std
        } else {
            self.quiet_noise_std
        }
    }
}

/// Four default subjects, alternating male/female.
pub fn default_profiles() -> Vec<SubjectProfile> {
    vec![
        SubjectProfile::new("s1", Gender::Male),
        SubjectProfile::new("s2", Gender::Female),
        SubjectProfile::new("s3", Gender::Male),
        SubjectProfile::new("s4", Gender::Female),
    ]
}

/// Sidecar manifest recording how a dataset was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenManifest {
    pub spec: GenSpec,
    pub noisy: bool,
    pub master_seed: u64,
    pub session_count: usize,
}

/// Generate one session. Fully determined by its arguments.
pub fn generate_session(
    class: LabelClass,
    profile: &SubjectProfile,
    spec: &GenSpec,
    noisy: bool,
    seed: u64,
) -> Result<RawSession> {
    spec.validate()?;
    profile.validate()?;
    let mut rng = new_rng(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let noise_std = spec.noise_std(noisy);

    // Per-session level shifts. Drawn for both levels regardless of class so
    // the draw order is identical across classes.
    let lo = profile.relaxed_level + profile.level_jitter * unit.sample(&mut rng);
    let hi = profile.focused_level + profile.level_jitter * unit.sample(&mut rng);
    let (c_lo, c_hi) = spec.transition_center_range;
    let center = SESSION_LEN as f64 * (c_lo + (c_hi - c_lo) * rng.random::<f64>());
    let steep = (spec.transition_steepness * SESSION_LEN as f64).max(1e-9);
    let settle_amp = spec.settle_gain * noise_std;

    let mut values = Vec::with_capacity(SESSION_LEN);
    let mut focus_progress = Vec::with_capacity(SESSION_LEN);
    for t in 0..SESSION_LEN {
        let tf = t as f64;
        let ramp = sigmoid((tf - center) / steep);
        let (clean, progress) = match class {
            LabelClass::Relaxed => (lo + settle_amp * (-tf / spec.settle_tau).exp(), 0.0),
            LabelClass::Focused => (hi - settle_amp * (-tf / spec.settle_tau).exp(), 1.0),
            LabelClass::RelaxedToFocused => (lo + (hi - lo) * ramp, ramp),
            LabelClass::FocusedToRelaxed => (hi + (lo - hi) * ramp, 1.0 - ramp),
        };
        values.push(clean);
        focus_progress.push(progress);
    }
    // AR(1) noise whose coefficient follows the mental state; the marginal
    // std-dev stays at the condition's level throughout
    let mut noise_state = noise_std * unit.sample(&mut rng);
    values[0] += noise_state;
    for t in 1..SESSION_LEN {
        let rho = spec.relaxed_smoothness
            + (spec.focused_smoothness - spec.relaxed_smoothness) * focus_progress[t];
        let innovation = noise_std * (1.0 - rho * rho).sqrt() * unit.sample(&mut rng);
        noise_state = rho * noise_state + innovation;
        values[t] += noise_state;
    }
    for v in values.iter_mut() {
        if rng.random::<f64>() < spec.outlier_rate {
            *v += spec.outlier_magnitude;
        }
    }
    RawSession::new(profile.subject_id.clone(), profile.gender, class, noisy, values)
}

/// Generate a balanced dataset: `sessions_per_class` sessions for each of the
/// four classes, subjects round-robin, per-session seeds derived from
/// `master_seed` by generation-order counter.
pub fn generate_dataset(spec: &GenSpec, noisy: bool, master_seed: u64) -> Result<Vec<RawSession>> {
    spec.validate()?;
    let mut sessions = Vec::with_capacity(spec.sessions_per_class * LabelClass::ALL.len());
    let mut counter: u64 = 0;
    for class in LabelClass::ALL {
        for s in 0..spec.sessions_per_class {
            let profile = &spec.profiles[s % spec.profiles.len()];
            let seed = derive_seed(master_seed, counter);
            sessions.push(generate_session(class, profile, spec, noisy, seed)?);
            counter += 1;
        }
    }
    Ok(sessions)
}
