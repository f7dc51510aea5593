//! Averaged-periodogram amplitude spectra and peak picking.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum series length (after transient removal) for a stroboscopic spectrum.
pub const MIN_SERIES_LEN: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumOptions {
    /// Welch segment length (samples). Segments overlap by half.
    pub segment_len: usize,
    /// Peaks below this fraction of the dominant amplitude are dropped.
    pub rel_threshold: f64,
    /// Spectra whose largest amplitude is below this are treated as flat
    /// (converged fixed points leave only round-off).
    pub abs_floor: f64,
    pub min_len: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            segment_len: 256,
            rel_threshold: 1e-3,
            abs_floor: 1e-9,
            min_len: MIN_SERIES_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Angular frequency in `[0, 2π/Δt)`.
    pub frequency: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPeaks {
    /// Descending amplitude.
    pub peaks: Vec<Peak>,
    /// Bin width in angular frequency.
    pub resolution: f64,
    pub series_length: usize,
    /// Upper end of the frequency circle (`2π` for stroboscopic data).
    pub band: f64,
}

impl SpectrumPeaks {
    /// Peaks in `(0, band/2]`, i.e. one member of each mirror pair.
    pub fn half_band(&self) -> Vec<Peak> {
        self.peaks
            .iter()
            .copied()
            .filter(|p| p.frequency > 0.0 && p.frequency <= 0.5 * self.band + 1e-12)
            .collect()
    }

    pub fn dominant(&self) -> Option<Peak> {
        self.half_band().first().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Averaged Hann-windowed power spectrum over half-overlapping segments of the
/// mean-removed series; returns one-sided-normalised amplitudes on the full
/// circle of `segment_len` bins.
pub fn welch_amplitudes(series: &[f64], segment_len: usize) -> Result<Vec<f64>> {
    if segment_len < 8 || segment_len > series.len() {
        return Err(Error::SeriesTooShort {
            needed: segment_len.max(8),
            have: series.len(),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series"));
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let window: Vec<f64> = (0..segment_len)
        .map(|i| 0.5 - 0.5 * (TAU * i as f64 / segment_len as f64).cos())
        .collect();
    let wsum: f64 = window.iter().sum();
    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let step = segment_len / 2;
    let mut power = vec![0.0; segment_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut count = 0usize;
    let mut start = 0;
    while start + segment_len <= series.len() {
        for (b, (x, w)) in buf.iter_mut().zip(series[start..start + segment_len].iter().zip(&window)) {
            *b = Complex64::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (p, b) in power.iter_mut().zip(&buf) {
            *p += b.norm_sqr();
        }
        count += 1;
        start += step;
    }
    Ok(power.into_iter().map(|p| 2.0 * (p / count as f64).sqrt() / wsum).collect())
}

/// Local maxima of a circular amplitude spectrum above `rel_threshold` of the
/// largest, refined by a parabola through the log-amplitudes of three bins.
pub fn pick_peaks(amps: &[f64], sample_spacing: f64, rel_threshold: f64) -> Vec<Peak> {
    let n = amps.len();
    let max = amps.iter().skip(1).fold(0.0f64, |a, &b| a.max(b));
    let scale = amps.iter().fold(0.0f64, |a, &b| a.max(b));
    if n < 3 || !(max > 1e-12 * scale.max(1e-300)) || max < 1e-14 {
        return Vec::new();
    }
    let band = TAU / sample_spacing;
    let mut peaks: Vec<Peak> = Vec::new();
    for i in 1..n {
        let (a, b, c) = (amps[i - 1], amps[i], amps[(i + 1) % n]);
        if !(b > a && b >= c && b >= rel_threshold * max) {
            continue;
        }
        let shift = if a > 0.0 && c > 0.0 {
            let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
            let den = la - 2.0 * lb + lc;
            if den < 0.0 {
                (0.5 * (la - lc) / den).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        } else {
            0.0
        };
        let f = ((i as f64 + shift) / n as f64 * band).rem_euclid(band);
        peaks.push(Peak { frequency: f, amplitude: b });
    }
    peaks.sort_by(|x, y| y.amplitude.total_cmp(&x.amplitude).then(x.frequency.total_cmp(&y.frequency)));
    let resolution = band / n as f64;
    let mut kept: Vec<Peak> = Vec::with_capacity(peaks.len());
    for p in peaks {
        let close = kept.iter().any(|k| {
            let d = (k.frequency - p.frequency).abs();
            d.min(band - d) < resolution
        });
        if !close {
            kept.push(p);
        }
    }
    kept
}

/// Peaks of a series sampled every `sample_spacing` time units.
pub fn spectrum_peaks(series: &[f64], sample_spacing: f64, opts: &SpectrumOptions) -> Result<SpectrumPeaks> {
    if !(sample_spacing > 0.0) {
        return Err(Error::param("sample_spacing", "must be positive"));
    }
    if series.len() < opts.min_len {
        return Err(Error::SeriesTooShort {
            needed: opts.min_len,
            have: series.len(),
        });
    }
    let amps = welch_amplitudes(series, opts.segment_len)?;
    let band = TAU / sample_spacing;
    let flat = amps.iter().skip(1).all(|&a| a < opts.abs_floor);
    Ok(SpectrumPeaks {
        peaks: if flat { Vec::new() } else { pick_peaks(&amps, sample_spacing, opts.rel_threshold) },
        resolution: band / opts.segment_len as f64,
        series_length: series.len(),
        band,
    })
}

/// Spectrum of a once-per-period series after dropping `drop_transient`
/// leading samples. Frequencies lie in `[0, 2π)`.
pub fn stroboscopic_spectrum(series: &[f64], drop_transient: usize, opts: &SpectrumOptions) -> Result<SpectrumPeaks> {
    let tail = series.get(drop_transient..).unwrap_or(&[]);
    spectrum_peaks(tail, 1.0, opts)
}

/// Mirror image `2π − f` of a stroboscopic frequency.
pub fn mirror(f: f64) -> f64 {
    (TAU - f).rem_euclid(TAU)
}

/// Folds a frequency onto `[0, π]`.
pub fn fold_half(f: f64) -> f64 {
    let f = f.rem_euclid(TAU);
    if f > PI {
        TAU - f
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, n: usize) -> Vec<f64> {
        (0..n).map(|t| (f * t as f64).cos()).collect()
    }

    #[test]
    fn pure_tone_gives_mirror_pair() {
        let s = stroboscopic_spectrum(&tone(1.0, 1 << 14), 0, &SpectrumOptions::default()).unwrap();
        let bin = s.resolution;
        assert!((s.peaks[0].frequency - 1.0).abs() < bin || (s.peaks[0].frequency - mirror(1.0)).abs() < bin);
        let d = s.dominant().unwrap();
        assert!((d.frequency - 1.0).abs() < bin);
        assert!((d.amplitude - 1.0).abs() < 0.2);
        let partner = s.peaks.iter().find(|p| (p.frequency - mirror(1.0)).abs() < bin).unwrap();
        assert!((partner.amplitude - d.amplitude).abs() <= 0.01 * d.amplitude);
    }

    #[test]
    fn constant_series_has_no_peaks() {
        let s = stroboscopic_spectrum(&vec![0.3; 5000], 0, &SpectrumOptions::default()).unwrap();
        assert!(s.is_empty());
        let jitter: Vec<f64> = (0..5000).map(|t| 0.3 + 1e-15 * (t as f64 * 2.1).sin()).collect();
        assert!(stroboscopic_spectrum(&jitter, 0, &SpectrumOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn short_series_rejected() {
        let r = stroboscopic_spectrum(&tone(1.0, 5000), 2000, &SpectrumOptions::default());
        assert!(matches!(r, Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn fold_and_mirror() {
        assert!((fold_half(TAU - 0.3) - 0.3).abs() < 1e-12);
        assert!((mirror(0.3) - (TAU - 0.3)).abs() < 1e-12);
        assert_eq!(mirror(0.0), 0.0);
    }
}
