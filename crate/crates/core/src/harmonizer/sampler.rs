use rand::Rng;
use thiserror::Error;

pub const DEFAULT_TEMPERATURE: f64 = 1.1;
pub const DEFAULT_TOP_P: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("no token is legal here")]
    EmptyMask,
    #[error("the model gives zero probability to every legal token")]
    ZeroMass,
    #[error("temperature must be > 0 and top-p in (0, 1]")]
    InvalidConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub temperature: f64,
    pub top_p: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { temperature: DEFAULT_TEMPERATURE, top_p: DEFAULT_TOP_P, seed: 0 }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig { seed, ..Default::default() }
    }

    /// A nucleus so small that only the most likely token survives.
    pub fn greedy(seed: u64) -> Self {
        SamplerConfig { temperature: 1.0, top_p: f64::MIN_POSITIVE, seed }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let ok = self.temperature > 0.0 && self.temperature.is_finite() && self.top_p > 0.0 && self.top_p <= 1.0;
        ok.then_some(()).ok_or(SampleError::InvalidConfig)
    }
}

/// Tokens kept by temperature scaling plus top-p truncation, as
/// `(id, probability)` in descending probability, renormalised.
///
/// Masked-out and zero-probability tokens are dropped first. Temperature is
/// applied in the log domain (`p^(1/τ)`, renormalised); the nucleus is then
/// the shortest descending prefix whose mass reaches `top_p`. Ties keep the
/// lower id first.
pub fn nucleus_set(dist: &[f64], config: &SamplerConfig, mask: &[bool]) -> Result<Vec<(usize, f64)>, SampleError> {
    config.validate()?;
    if !mask.iter().any(|m| *m) {
        return Err(SampleError::EmptyMask);
    }
    let live: Vec<(usize, f64)> = dist
        .iter()
        .zip(mask)
        .enumerate()
        .filter(|(_, (p, m))| **m && **p > 0.0)
        .map(|(i, (p, _))| (i, p.ln() / config.temperature))
        .collect();
    if live.is_empty() {
        return Err(SampleError::ZeroMass);
    }

    let max = live.iter().map(|(_, l)| *l).fold(f64::NEG_INFINITY, f64::max);
    let mut scaled: Vec<(usize, f64)> = live.into_iter().map(|(i, l)| (i, (l - max).exp())).collect();
    let total: f64 = scaled.iter().map(|(_, w)| w).sum();
    for (_, w) in scaled.iter_mut() {
        *w /= total;
    }
    scaled.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut cumulative = 0.0;
    let mut keep = scaled.len();
    for (n, (_, w)) in scaled.iter().enumerate() {
        cumulative += w;
        if cumulative >= config.top_p - 1e-12 {
            keep = n + 1;
            break;
        }
    }
    scaled.truncate(keep);
    let kept: f64 = scaled.iter().map(|(_, w)| w).sum();
    for (_, w) in scaled.iter_mut() {
        *w /= kept;
    }
    Ok(scaled)
}

/// Draws one token id from the nucleus.
pub fn nucleus_sample<R: Rng + ?Sized>(
    dist: &[f64],
    config: &SamplerConfig,
    mask: &[bool],
    rng: &mut R,
) -> Result<usize, SampleError> {
    let set = nucleus_set(dist, config, mask)?;
    Ok(draw(&set, rng))
}

pub(crate) fn draw<R: Rng + ?Sized>(set: &[(usize, f64)], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for &(id, w) in set {
        cumulative += w;
        if u < cumulative {
            return id;
        }
    }
    set.last().expect("nucleus is never empty").0
}
