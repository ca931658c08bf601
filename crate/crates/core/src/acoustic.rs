//! Synthetic acoustics: linear chirps, sparse room impulse responses,
//! received-signal simulation and matched-filter correlation.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{echo_set, ForwardError};
use crate::geometry::{ConvexRoom, Point2};

/// Half-length of the windowed-sinc fractional delay kernel (32 taps total).
const SINC_HALF_TAPS: i64 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcousticError {
    #[error("sweep {f0} Hz -> {f1} Hz must satisfy 0 < f0 < f1 < fs/2 = {nyquist} Hz")]
    Nyquist { f0: f64, f1: f64, nyquist: f64 },
    #[error("chirp duration must be positive and span at least one sample")]
    Duration,
    #[error("sample rate must be positive and finite")]
    SampleRate,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sample rates differ: {0} Hz vs {1} Hz")]
    RateMismatch(f64, f64),
    #[error("impulse response has {delays} delays but {gains} gains")]
    RirShape { delays: usize, gains: usize },
    #[error("impulse response delays must be nonnegative with the line-of-sight path first")]
    RirOrder,
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self, AcousticError> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(AcousticError::SampleRate);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AcousticError::NonFinite(i));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    /// Mean squared amplitude.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Delays by a whole number of samples, zero-padding the front.
    pub fn shifted(&self, samples: usize) -> Self {
        let mut out = vec![0.0; samples];
        out.extend_from_slice(&self.samples);
        Self { samples: out, sample_rate: self.sample_rate }
    }
}

/// Linear sweep from `f0` to `f1` with `sin` phase (first sample 0) and unit peak.
pub fn make_chirp(f0: f64, f1: f64, duration: f64, sample_rate: f64) -> Result<Waveform, AcousticError> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(AcousticError::SampleRate);
    }
    let nyquist = sample_rate / 2.0;
    if !(f0 > 0.0 && f0 < f1 && f1 < nyquist) {
        return Err(AcousticError::Nyquist { f0, f1, nyquist });
    }
    let n = (duration * sample_rate).round();
    if !(duration > 0.0 && n >= 1.0) {
        return Err(AcousticError::Duration);
    }
    let sweep = (f1 - f0) / duration;
    let mut samples: Vec<f64> = (0..n as usize)
        .map(|i| {
            let t = i as f64 / sample_rate;
            (2.0 * PI * (f0 * t + 0.5 * sweep * t * t)).sin()
        })
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        samples.iter_mut().for_each(|s| *s /= peak);
    }
    Waveform::new(samples, sample_rate)
}

/// Instantaneous frequency of the linear sweep at time `t`.
pub fn chirp_frequency(f0: f64, f1: f64, duration: f64, t: f64) -> f64 {
    f0 + (f1 - f0) * t / duration
}

/// Sparse impulse response: per-path delays (seconds) and gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RirSpec {
    delays: Vec<f64>,
    gains: Vec<f64>,
}

impl RirSpec {
    pub fn new(delays: Vec<f64>, gains: Vec<f64>) -> Result<Self, AcousticError> {
        if delays.len() != gains.len() {
            return Err(AcousticError::RirShape { delays: delays.len(), gains: gains.len() });
        }
        let first = delays.first().copied().unwrap_or(0.0);
        if delays.iter().any(|d| !(d.is_finite() && *d >= 0.0) || *d < first) {
            return Err(AcousticError::RirOrder);
        }
        Ok(Self { delays, gains })
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }
}

/// Path gain `Γ^order / max(path_length, 1 m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainModel {
    pub reflection_coeff: f64,
}

impl Default for GainModel {
    fn default() -> Self {
        Self { reflection_coeff: 0.9 }
    }
}

impl GainModel {
    pub fn gain(&self, order: usize, path_length: f64) -> f64 {
        self.reflection_coeff.powi(order as i32) / path_length.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RirOptions {
    pub max_order: usize,
    pub d_max: f64,
    /// Speed of sound, m/s.
    pub c: f64,
    /// Line-of-sight latency of the co-located loudspeaker and microphone.
    pub los_delay: f64,
    /// Direct-path gain; the loudspeaker sits next to the microphone, so
    /// this dominates every reflection.
    pub los_gain: f64,
    pub gain_model: GainModel,
}

impl Default for RirOptions {
    fn default() -> Self {
        Self { max_order: 1, d_max: 10.0, c: 346.0, los_delay: 1e-3, los_gain: 4.0, gain_model: GainModel::default() }
    }
}

/// Impulse response at `p`: the line-of-sight path followed by one path per
/// image source, each delayed by its round trip `2 d / c`.
pub fn rir_from_room(room: &ConvexRoom, p: Point2, opts: &RirOptions) -> Result<RirSpec, AcousticError> {
    let echoes = echo_set(room, p, opts.max_order, opts.d_max)?;
    let mut delays = vec![opts.los_delay];
    let mut gains = vec![opts.los_gain];
    for (d, seq) in echoes.distances().iter().zip(echoes.labels()) {
        delays.push(opts.los_delay + 2.0 * d / opts.c);
        gains.push(opts.gain_model.gain(seq.order(), 2.0 * d));
    }
    RirSpec::new(delays, gains)
}

/// `s * h + w`: every path adds a scaled, delayed copy of `s`; white
/// Gaussian noise is scaled so that the line-of-sight component sits
/// `snr_db` above it. Pass `f64::INFINITY` for a noiseless signal.
pub fn simulate_received(s: &Waveform, rir: &RirSpec, snr_db: f64, seed: u64) -> Waveform {
    let fs = s.sample_rate();
    let max_delay = rir.delays().iter().fold(0.0f64, |m, &d| m.max(d));
    let len = s.len() + (max_delay * fs).ceil() as usize + SINC_HALF_TAPS as usize + 1;
    let mut out = vec![0.0; len];
    for (&delay, &gain) in rir.delays().iter().zip(rir.gains()) {
        add_delayed(&mut out, s.samples(), delay * fs, gain);
    }
    if snr_db.is_finite() {
        let los_gain = rir.gains().first().copied().unwrap_or(1.0);
        let los_power = los_gain * los_gain * s.power();
        let sigma = (los_power / 10f64.powf(snr_db / 10.0)).sqrt();
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("finite noise level");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            out.iter_mut().for_each(|x| *x += normal.sample(&mut rng));
        }
    }
    Waveform { samples: out, sample_rate: fs }
}

/// Adds `gain * s(t - delay)` to `out`, band-limited interpolation for
/// fractional delays and a plain shift for whole-sample ones.
fn add_delayed(out: &mut [f64], s: &[f64], delay: f64, gain: f64) {
    let whole = delay.floor();
    let frac = delay - whole;
    let base = whole as i64;
    if frac < 1e-9 || frac > 1.0 - 1e-9 {
        let base = if frac > 0.5 { base + 1 } else { base };
        for (i, &x) in s.iter().enumerate() {
            if let Some(o) = out.get_mut((base + i as i64) as usize) {
                *o += gain * x;
            }
        }
        return;
    }
    let taps: Vec<(i64, f64)> =
        (-SINC_HALF_TAPS + 1..=SINC_HALF_TAPS).map(|k| (k, windowed_sinc(k as f64 - frac))).collect();
    for (i, &x) in s.iter().enumerate() {
        for &(k, h) in &taps {
            let n = base + k + i as i64;
            if n >= 0 && (n as usize) < out.len() {
                out[n as usize] += gain * h * x;
            }
        }
    }
}

fn windowed_sinc(x: f64) -> f64 {
    let sinc = if x.abs() < 1e-12 { 1.0 } else { (PI * x).sin() / (PI * x) };
    // Hann taper over the kernel support
    let w = 0.5 * (1.0 + (PI * x / SINC_HALF_TAPS as f64).cos());
    sinc * w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationWindow {
    None,
    #[default]
    Triangular,
}

/// Symmetric triangular taper of length `n` peaking at 1 in the middle.
pub fn triangular_window(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    let half = (n - 1) as f64 / 2.0;
    (0..n).map(|i| 1.0 - ((i as f64 - half) / half).abs()).collect()
}

/// Correlator output; sample `zero_lag` holds lag 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlogram {
    pub values: Waveform,
    pub zero_lag: usize,
}

impl Correlogram {
    pub fn lag_seconds(&self, index: f64) -> f64 {
        (index - self.zero_lag as f64) / self.values.sample_rate()
    }

    pub fn index_of_lag(&self, lag: f64) -> f64 {
        lag * self.values.sample_rate() + self.zero_lag as f64
    }

    pub fn sample_rate(&self) -> f64 {
        self.values.sample_rate()
    }

    /// Value at an integer lag measured in samples.
    pub fn at_lag(&self, lag: i64) -> Option<f64> {
        let i = self.zero_lag as i64 + lag;
        (i >= 0).then(|| self.values.samples().get(i as usize).copied()).flatten()
    }
}

/// Full cross-correlation `c[k] = Σ r[n + k] w[n] s[n]` for lags
/// `-(len(s) - 1) ..= len(r) - 1`, computed with FFTs.
pub fn correlate_windowed(r: &Waveform, s: &Waveform, window: CorrelationWindow) -> Result<Correlogram, AcousticError> {
    if r.sample_rate() != s.sample_rate() {
        return Err(AcousticError::RateMismatch(r.sample_rate(), s.sample_rate()));
    }
    let template: Vec<f64> = match window {
        CorrelationWindow::None => s.samples().to_vec(),
        CorrelationWindow::Triangular => {
            s.samples().iter().zip(triangular_window(s.len())).map(|(x, w)| x * w).collect()
        }
    };
    if r.is_empty() || template.is_empty() {
        return Ok(Correlogram { values: Waveform::new(Vec::new(), r.sample_rate())?, zero_lag: 0 });
    }
    let out_len = r.len() + template.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut a: Vec<Complex<f64>> = r
        .samples()
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    // time-reversed template turns convolution into correlation
    let mut b: Vec<Complex<f64>> = template
        .iter()
        .rev()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    inv.process(&mut a);
    let scale = 1.0 / n as f64;
    let values: Vec<f64> = a[..out_len].iter().map(|z| z.re * scale).collect();
    Ok(Correlogram { values: Waveform::new(values, r.sample_rate())?, zero_lag: template.len() - 1 })
}

/// Magnitude of the analytic signal (Hilbert envelope).
pub fn envelope(x: &[f64]) -> Vec<f64> {
    let len = x.len();
    if len == 0 {
        return Vec::new();
    }
    let n = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> =
        x.iter().map(|&v| Complex::new(v, 0.0)).chain(std::iter::repeat(Complex::new(0.0, 0.0))).take(n).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        if k == 0 || (n > 1 && k == n / 2) {
            continue;
        } else if k < n / 2 {
            *z *= 2.0;
        } else {
            *z = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf[..len].iter().map(|z| z.norm() / n as f64).collect()
}

/// Largest envelope value outside the main lobe divided by the peak. The
/// main lobe runs from the peak to the first envelope minimum on each side.
pub fn peak_sidelobe_ratio(m: &Correlogram) -> f64 {
    let v = envelope(m.values.samples());
    let Some((peak_i, peak)) = v.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)) else {
        return 0.0;
    };
    if peak <= 0.0 {
        return 0.0;
    }
    let mut lo = peak_i;
    while lo > 0 && v[lo - 1] <= v[lo] {
        lo -= 1;
    }
    let mut hi = peak_i;
    while hi + 1 < v.len() && v[hi + 1] <= v[hi] {
        hi += 1;
    }
    let side = v[..lo].iter().chain(&v[hi + 1..]).fold(0.0f64, |m, &x| m.max(x));
    side / peak
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Wall;
    use approx::assert_abs_diff_eq;

    fn unit_square() -> ConvexRoom {
        let walls: Vec<Wall> = (0..4).map(|i| Wall::new(i as f64 * PI / 2.0, 0.5)).collect();
        ConvexRoom::from_walls(&walls).unwrap()
    }

    #[test]
    fn chirp_shape() {
        let s = make_chirp(30.0, 8000.0, 0.05, 96_000.0).unwrap();
        assert_eq!(s.len(), 4800);
        assert_eq!(s.samples()[0], 0.0);
        assert_abs_diff_eq!(s.peak(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chirp_frequency(30.0, 8000.0, 0.05, 0.025), 4015.0);
        assert!(make_chirp(100.0, 100.0, 0.05, 96_000.0).is_err());
        assert!(matches!(make_chirp(30.0, 50_000.0, 0.05, 96_000.0), Err(AcousticError::Nyquist { .. })));
    }

    #[test]
    fn chirp_frequency_from_phase() {
        // finite-difference the phase of an unnormalized sweep
        let (f0, f1, dur) = (30.0, 8000.0, 0.05);
        let phase = |t: f64| 2.0 * PI * (f0 * t + 0.5 * (f1 - f0) / dur * t * t);
        let t = dur / 2.0;
        let h = 1e-7;
        let f = (phase(t + h) - phase(t - h)) / (2.0 * h) / (2.0 * PI);
        assert_abs_diff_eq!(f, (f0 + f1) / 2.0, epsilon = 1e-4);
    }

    #[test]
    fn rir_of_square() {
        let room = unit_square();
        let opts = RirOptions::default();
        let rir = rir_from_room(&room, Point2::ORIGIN, &opts).unwrap();
        assert_eq!(rir.len(), 5);
        assert_eq!(rir.delays()[0], 1e-3);
        for d in &rir.delays()[1..] {
            assert_abs_diff_eq!(*d, 1e-3 + 1.0 / 346.0, epsilon = 1e-15);
        }
        let rir = rir_from_room(&room, Point2::new(0.2, 0.0), &opts).unwrap();
        for (d, want) in rir.delays()[1..].iter().zip([0.6, 1.0, 1.0, 1.4]) {
            assert_abs_diff_eq!(*d, 1e-3 + want / 346.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gains_fall_with_path_length() {
        let g = GainModel::default();
        let lengths = [1.0, 1.5, 2.7, 6.0];
        for w in lengths.windows(2) {
            assert!(g.gain(1, w[0]) > g.gain(1, w[1]));
        }
        // below one meter the spreading term saturates
        assert_eq!(g.gain(1, 0.4), g.gain(1, 0.9));
        assert!(g.gain(2, 1.0) < g.gain(1, 1.0));
        assert_eq!(g.gain(0, 0.0), 1.0);
    }

    #[test]
    fn single_path_is_identity() {
        let s = make_chirp(30.0, 8000.0, 0.01, 96_000.0).unwrap();
        let rir = RirSpec::new(vec![0.0], vec![1.0]).unwrap();
        let r = simulate_received(&s, &rir, f64::INFINITY, 0);
        assert_eq!(&r.samples()[..s.len()], s.samples());
        assert!(r.samples()[s.len()..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_paths_superpose() {
        let s = make_chirp(30.0, 8000.0, 0.01, 96_000.0).unwrap();
        let shift = 37;
        let rir = RirSpec::new(vec![0.0, shift as f64 / 96_000.0], vec![1.0, 0.5]).unwrap();
        let r = simulate_received(&s, &rir, f64::INFINITY, 0);
        let delayed = s.shifted(shift);
        for (i, &y) in r.samples().iter().enumerate() {
            let a = s.samples().get(i).copied().unwrap_or(0.0);
            let b = delayed.samples().get(i).copied().unwrap_or(0.0);
            assert_abs_diff_eq!(y, a + 0.5 * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn fractional_delay_interpolates() {
        // a slow sinusoid delayed by 10.25 samples matches the analytic shift
        let fs = 96_000.0;
        let f = 1000.0;
        let s = Waveform::new((0..2000).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect(), fs).unwrap();
        let rir = RirSpec::new(vec![10.25 / fs], vec![1.0]).unwrap();
        let r = simulate_received(&s, &rir, f64::INFINITY, 0);
        for n in 100..1500 {
            let want = (2.0 * PI * f * (n as f64 - 10.25) / fs).sin();
            assert_abs_diff_eq!(r.samples()[n], want, epsilon = 2e-3);
        }
    }

    #[test]
    fn noise_power_matches_snr() {
        let fs = 96_000.0;
        let s = make_chirp(30.0, 8000.0, 100_000.0 / fs, fs).unwrap();
        let rir = RirSpec::new(vec![0.0], vec![1.0]).unwrap();
        let clean = simulate_received(&s, &rir, f64::INFINITY, 5);
        let noisy = simulate_received(&s, &rir, 20.0, 5);
        let noise: Vec<f64> = noisy.samples().iter().zip(clean.samples()).map(|(a, b)| a - b).take(100_000).collect();
        let mean = noise.iter().sum::<f64>() / noise.len() as f64;
        let var = noise.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (noise.len() - 1) as f64;
        let want = s.power() / 100.0;
        assert!((var / want - 1.0).abs() < 0.05, "noise power {var} vs {want}");
        assert_eq!(noisy, simulate_received(&s, &rir, 20.0, 5));
    }

    #[test]
    fn autocorrelation_peaks_at_zero_lag() {
        let s = make_chirp(30.0, 8000.0, 0.02, 96_000.0).unwrap();
        let m = correlate_windowed(&s, &s, CorrelationWindow::None).unwrap();
        let argmax = argmax_abs(m.values.samples());
        assert_eq!(argmax, m.zero_lag);
        assert_abs_diff_eq!(m.at_lag(0).unwrap(), s.energy(), epsilon = 1e-9 * s.energy());
    }

    #[test]
    fn shifted_signal_peaks_at_shift() {
        let s = make_chirp(30.0, 8000.0, 0.02, 96_000.0).unwrap();
        for window in [CorrelationWindow::None, CorrelationWindow::Triangular] {
            let m = correlate_windowed(&s.shifted(123), &s, window).unwrap();
            assert_eq!(argmax_abs(m.values.samples()) as i64 - m.zero_lag as i64, 123);
        }
    }

    #[test]
    fn correlation_matches_direct_sum() {
        let s = Waveform::new(vec![1.0, -2.0, 0.5], 10.0).unwrap();
        let r = Waveform::new(vec![0.0, 3.0, 1.0, -1.0, 2.0], 10.0).unwrap();
        let m = correlate_windowed(&r, &s, CorrelationWindow::None).unwrap();
        assert_eq!(m.values.len(), 7);
        for k in -2i64..=4 {
            let direct: f64 = (0..3)
                .filter_map(|n| {
                    let j = n + k;
                    (0..5).contains(&j).then(|| r.samples()[j as usize] * s.samples()[n as usize])
                })
                .sum();
            assert_abs_diff_eq!(m.at_lag(k).unwrap(), direct, epsilon = 1e-12);
        }
        assert!(correlate_windowed(&r, &Waveform::new(vec![1.0], 11.0).unwrap(), CorrelationWindow::None).is_err());
    }

    #[test]
    fn triangular_taper() {
        assert_eq!(triangular_window(5), vec![0.0, 0.5, 1.0, 0.5, 0.0]);
        let s = make_chirp(30.0, 8000.0, 0.05, 96_000.0).unwrap();
        let w: f64 = s.samples().iter().zip(triangular_window(s.len())).map(|(x, w)| (x * w).powi(2)).sum();
        assert!(w <= s.energy());
    }

    #[test]
    fn triangular_window_lowers_sidelobes() {
        let s = make_chirp(30.0, 8000.0, 0.05, 96_000.0).unwrap();
        let raw = peak_sidelobe_ratio(&correlate_windowed(&s, &s, CorrelationWindow::None).unwrap());
        let tri = peak_sidelobe_ratio(&correlate_windowed(&s, &s, CorrelationWindow::Triangular).unwrap());
        assert!(tri < raw, "triangular {tri} vs raw {raw}");
    }

    fn argmax_abs(v: &[f64]) -> usize {
        v.iter().enumerate().fold((0, f64::MIN), |b, (i, x)| if x.abs() > b.1 { (i, x.abs()) } else { b }).0
    }
}
