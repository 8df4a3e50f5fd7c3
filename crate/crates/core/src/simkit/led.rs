use std::sync::OnceLock;

/// Illuminated band of the white LED, nm.
pub const LED_BAND_NM: (f64, f64) = (450.0, 700.0);

// Blue emitter plus the broad phosphor lobe: (centre nm, sigma nm, amplitude).
const LOBES: [(f64, f64, f64); 2] = [(455.0, 12.0, 1.0), (580.0, 70.0, 0.7)];

fn raw(lambda_nm: f64) -> f64 {
    LOBES
        .iter()
        .map(|&(c, s, a)| a * (-0.5 * ((lambda_nm - c) / s).powi(2)).exp())
        .sum()
}

/// Wavelength of the spectrum maximum, located on a 0.001 nm scan.
pub fn led_peak_nm() -> f64 {
    static PEAK: OnceLock<f64> = OnceLock::new();
    *PEAK.get_or_init(|| {
        let (lo, hi) = LED_BAND_NM;
        let steps = ((hi - lo) / 1e-3).round() as usize;
        (0..=steps)
            .map(|i| lo + i as f64 * 1e-3)
            .fold((lo, f64::MIN), |best, l| {
                let v = raw(l);
                if v > best.1 {
                    (l, v)
                } else {
                    best
                }
            })
            .0
    })
}

/// Relative white-LED intensity: two Gaussian lobes cut to the LED band,
/// normalised to a peak of 1.
pub fn led_spectrum(lambda_nm: f64) -> f64 {
    let (lo, hi) = LED_BAND_NM;
    if !(lo..=hi).contains(&lambda_nm) {
        return 0.0;
    }
    raw(lambda_nm) / raw(led_peak_nm())
}
