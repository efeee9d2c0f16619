use crate::error::ElhError;

/// Energy-law defect over one pair of sampling intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    /// Time of the middle sample.
    pub t: f64,
    pub absolute: f64,
    /// `absolute / (max D over the sampled window + 1e-30)`
    pub relative: f64,
}

/// Discrete check of `dE/dt = -D` on uniformly spaced samples.
///
/// Pairs consecutive intervals: a central difference of `E` against the Simpson
/// average of `D`, both exact to fourth order in the spacing.
pub fn energy_residual(times: &[f64], energies: &[f64], dissipations: &[f64]) -> Result<Vec<ResidualSample>, ElhError> {
    let n = times.len();
    if energies.len() != n || dissipations.len() != n {
        return Err(ElhError::Diagnostics(format!(
            "sample lengths differ: {} times, {} energies, {} dissipations",
            n,
            energies.len(),
            dissipations.len()
        )));
    }
    if n < 3 {
        return Err(ElhError::Diagnostics(format!("need at least 3 samples (got {n})")));
    }
    let h = times[1] - times[0];
    if !(h > 0.0) {
        return Err(ElhError::Diagnostics("sample times must increase".into()));
    }
    for pair in times.windows(2) {
        if ((pair[1] - pair[0]) - h).abs() > 1e-9 * h.max(pair[1].abs()) {
            return Err(ElhError::Diagnostics(format!(
                "sample times are not uniformly spaced near t = {}",
                pair[0]
            )));
        }
    }
    let scale = dissipations.iter().fold(0.0f64, |m, &d| m.max(d)) + 1e-30;
    Ok((0..n - 2)
        .map(|k| {
            let de = (energies[k + 2] - energies[k]) / (2.0 * h);
            let davg = (dissipations[k] + 4.0 * dissipations[k + 1] + dissipations[k + 2]) / 6.0;
            let absolute = (de + davg).abs();
            ResidualSample {
                t: times[k + 1],
                absolute,
                relative: absolute / scale,
            }
        })
        .collect())
}
