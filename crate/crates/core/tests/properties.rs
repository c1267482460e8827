use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use vitalcam_core::roi::{
    assess_quality, build_trace, extract_channel_means, AnnotatedFrame, BoundingBox, Frame, FrameAnnotation,
    IlluminationPolicy, RoiMode,
};
use vitalcam_core::signal::{
    bandpass, detect_peaks, detrend, estimate_spectrum, moving_average, DetrendConfig, Signal,
};
use vitalcam_core::sim::{synth_trace, SimSpec};
use vitalcam_core::vitals::{
    classify_stress, estimate_all, estimate_hr, estimate_spo2, extract_bvp, BvpSignal, ChannelComponents, ChannelMode,
    SpO2Calibration, VitalsConfig,
};

fn line_slope(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mt = (n - 1.0) / 2.0;
    let mx = x.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        num += (i as f64 - mt) * (v - mx);
        den += (i as f64 - mt) * (i as f64 - mt);
    }
    num / den
}

fn tone(freq: f64, amp: f64, phase: f64, fs: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| amp * (TAU * freq * i as f64 / fs + phase).sin()).collect()
}

/// Direct O(n²) DFT of the Hann-windowed, mean-removed signal; returns the
/// in-band bin index with the largest magnitude and the two largest values.
fn dft_argmax(x: &[f64], fs: f64, low: f64, high: f64) -> (f64, f64, f64) {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v - m) * (0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()))
        .collect();
    let mut best = (f64::NAN, -1.0, -1.0);
    for k in 0..=n / 2 {
        let f = k as f64 * fs / n as f64;
        if f < low - 1e-9 || f > high + 1e-9 {
            continue;
        }
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in w.iter().enumerate() {
            let a = -TAU * (k * j % n) as f64 / n as f64;
            re += v * a.cos();
            im += v * a.sin();
        }
        let mag = re.hypot(im);
        if mag > best.1 {
            best = (f, mag, best.1);
        } else if mag > best.2 {
            best.2 = mag;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detrend_removes_affine_trends(
        slope in -5.0f64..5.0,
        offset in -100.0f64..100.0,
        f in 0.8f64..3.0,
        amp in 0.1f64..2.0,
    ) {
        let n = 300;
        let x: Vec<f64> = tone(f, amp, 0.3, 30.0, n)
            .iter()
            .enumerate()
            .map(|(i, v)| v + offset + slope * i as f64)
            .collect();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let out = detrend(&Signal::new(x, 30.0).unwrap(), &DetrendConfig::default()).unwrap();
        let residual = line_slope(out.samples());
        prop_assert!(residual.abs() <= 1e-6 * slope.abs().max(1e-3), "{residual}");
        let mean = out.samples().iter().sum::<f64>() / n as f64;
        prop_assert!(mean.abs() < 1e-9 * (1.0 + scale));
    }

    /// Smoothness priors is a high-pass filter rather than a projection, so a
    /// second pass only leaves the trend-free part nearly unchanged: the affine
    /// component stays zero and in-band content moves by under 5% of its RMS.
    #[test]
    fn detrend_twice_stays_trend_free(f in 0.8f64..3.0, slope in -2.0f64..2.0) {
        let x: Vec<f64> = tone(f, 1.0, 0.0, 30.0, 600)
            .iter()
            .enumerate()
            .map(|(i, v)| v + slope * i as f64 / 30.0)
            .collect();
        let cfg = DetrendConfig::default();
        let once = detrend(&Signal::new(x, 30.0).unwrap(), &cfg).unwrap();
        let twice = detrend(&once, &cfg).unwrap();
        prop_assert!(line_slope(twice.samples()).abs() < 1e-9);
        let rms = (once.samples().iter().map(|v| v * v).sum::<f64>() / 600.0).sqrt();
        let diff = once
            .samples()
            .iter()
            .zip(twice.samples())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / 600.0;
        prop_assert!(diff.sqrt() < 0.05 * rms, "{} vs {}", diff.sqrt(), rms);
    }

    #[test]
    fn moving_average_preserves_affine_means(
        slope in -3.0f64..3.0,
        offset in -50.0f64..50.0,
        n in 5usize..200,
        w in 1usize..9,
    ) {
        let x: Vec<f64> = (0..n).map(|i| offset + slope * i as f64).collect();
        let mean_in = x.iter().sum::<f64>() / n as f64;
        let out = moving_average(&Signal::new(x, 30.0).unwrap(), w).unwrap();
        let mean_out = out.samples().iter().sum::<f64>() / n as f64;
        if w % 2 == 1 {
            prop_assert!((mean_in - mean_out).abs() < 1e-9);
        }
        // Truncated edges move the mean by at most half a window of slope.
        prop_assert!((mean_in - mean_out).abs() <= slope.abs() * w as f64 / 2.0 + 1e-9);
    }

    #[test]
    fn bandpass_is_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let n = 400;
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let f = |v: Vec<f64>| bandpass(&Signal::new(v, 30.0).unwrap(), 0.7, 4.0).unwrap().into_samples();
        let (fx, fy, fm) = (f(x), f(y), f(mix));
        let scale = fm.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
        for i in 0..n {
            let lin = a * fx[i] + b * fy[i];
            prop_assert!((fm[i] - lin).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn spectrum_argmax_matches_direct_dft(
        f1 in 0.7f64..4.0,
        f2 in 0.7f64..4.0,
        a2 in 0.0f64..1.5,
        n in 60usize..200,
        noise_seed in any::<u32>(),
    ) {
        let fs = 20.0;
        let mut s = noise_seed as u64 | 1;
        let x: Vec<f64> = tone(f1, 1.0, 0.1, fs, n)
            .iter()
            .zip(tone(f2, a2, 1.3, fs, n))
            .map(|(p, q)| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                p + q + 0.2 * ((s >> 33) as f64 / (1u64 << 31) as f64 - 0.5)
            })
            .collect();
        let est = estimate_spectrum(&Signal::new(x.clone(), fs).unwrap(), 0.7, 4.0).unwrap();
        let (f, top, second) = dft_argmax(&x, fs, 0.7, 4.0);
        prop_assume!(top - second > 1e-9 * top);
        let bin = |f: f64| (f * n as f64 / fs).round() as usize;
        prop_assert_eq!(bin(est.dominant_frequency), bin(f));
    }

    #[test]
    fn peaks_ignore_constant_offsets(k in -64i32..64, f in 0.5f64..2.5) {
        // Dyadic samples keep the offset addition exact.
        let x: Vec<f64> = tone(f, 1.0, 0.2, 30.0, 300)
            .iter()
            .map(|v| (v * 1024.0).round() / 1024.0)
            .collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + k as f64).collect();
        let a = detect_peaks(&Signal::new(x, 30.0).unwrap(), 0.25, 0.1).unwrap();
        let b = detect_peaks(&Signal::new(shifted, 30.0).unwrap(), 0.25, 0.1).unwrap();
        prop_assert_eq!(a.times(), b.times());
        for (p, q) in a.amplitudes().iter().zip(b.amplitudes()) {
            prop_assert!((q - p - k as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn spo2_is_affine_in_ratio(r1 in 0.0f64..5.0, r2 in 0.0f64..5.0, b in 0.01f64..0.2) {
        let cal = SpO2Calibration::new(1.0, b).unwrap();
        let est = |r: f64| {
            let c = ChannelComponents { ac_r: r, dc_r: 1.0, ac_ir: 1.0, dc_ir: 1.0 };
            estimate_spo2(&c, &cal).unwrap()
        };
        let (e1, e2) = (est(r1), est(r2));
        let lhs = e1.unclamped_percent - e2.unclamped_percent;
        let rhs = -100.0 * b * (r1 - r2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        if r1 <= r2 {
            prop_assert!(e1.percent >= e2.percent);
        }
    }

    #[test]
    fn stress_is_monotone(h1 in 0.0f64..250.0, h2 in 0.0f64..250.0) {
        let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        prop_assert!(classify_stress(lo) <= classify_stress(hi));
    }

    #[test]
    fn hr_is_scale_invariant(scale in 1e-3f64..1e3, hr in 45.0f64..180.0) {
        let spec = SimSpec { hr_bpm: hr, duration_s: 20.0, ..SimSpec::default() };
        let (trace, _) = synth_trace(&spec).unwrap();
        let bvp = extract_bvp(&trace, ChannelMode::Green).unwrap();
        let scaled = BvpSignal {
            signal: Signal::new(bvp.signal.samples().iter().map(|v| v * scale).collect(), 30.0).unwrap(),
            source: bvp.source,
        };
        prop_assert_eq!(estimate_hr(&bvp).unwrap().bpm, estimate_hr(&scaled).unwrap().bpm);
    }

    #[test]
    fn channel_means_ignore_pixels_outside_the_box(
        fill in any::<u8>(),
        outside in any::<u8>(),
        k in 0u8..40,
        x in 0usize..20,
        y in 0usize..20,
    ) {
        let fill = fill.min(200);
        let b = BoundingBox::new(x as f64, y as f64, 12.0, 10.0).unwrap();
        let ann = FrameAnnotation::new(0, 0.0, b);
        let mut frame = Frame::uniform(32, 32, [outside; 3]).unwrap();
        for yy in y..y + 10 {
            for xx in x..x + 12 {
                frame.set_pixel(xx, yy, [fill, fill / 2, (xx + yy) as u8]);
            }
        }
        let base = extract_channel_means(&frame, &ann, RoiMode::FullBox).unwrap();
        let mut other = frame.clone();
        for yy in 0..32 {
            for xx in 0..32 {
                if !(x..x + 12).contains(&xx) || !(y..y + 10).contains(&yy) {
                    other.set_pixel(xx, yy, [outside.wrapping_add(99); 3]);
                }
            }
        }
        prop_assert_eq!(base, extract_channel_means(&other, &ann, RoiMode::FullBox).unwrap());

        let mut lifted = frame.clone();
        for yy in 0..32 {
            for xx in 0..32 {
                lifted.set_pixel(xx, yy, frame.pixel(xx, yy).map(|v| v.saturating_add(k)));
            }
        }
        let up = extract_channel_means(&lifted, &ann, RoiMode::FullBox).unwrap();
        prop_assert!((up.r - base.r - k as f64).abs() < 1e-9);
        prop_assert!((up.g - base.g - k as f64).abs() < 1e-9);
        prop_assert!((up.b - base.b - k as f64).abs() < 1e-9);
    }
}

#[test]
fn constant_shift_moves_trace_by_k_without_equalization() {
    let k = 17u8;
    let frames = |shift: u8| {
        (0..40).map(move |i| AnnotatedFrame {
            frame: Frame::uniform(16, 16, [100 + shift, 90 + (i % 5) as u8 + shift, 80 + shift]).unwrap(),
            annotation: Some(FrameAnnotation::new(i, i as f64 / 30.0, BoundingBox::new(2.0, 2.0, 12.0, 12.0).unwrap())),
        })
    };
    let (a, _) = build_trace(frames(0), RoiMode::SkinMask, IlluminationPolicy::Never).unwrap();
    let (b, _) = build_trace(frames(k), RoiMode::SkinMask, IlluminationPolicy::Never).unwrap();
    for (p, q) in a.entries().iter().zip(b.entries()) {
        assert_eq!(q.mean_g - p.mean_g, k as f64);
        assert_eq!(q.mean_r - p.mean_r, k as f64);
    }
}

#[test]
fn quality_depends_only_on_annotations_and_brightness() {
    let anns: Vec<FrameAnnotation> = (0..30)
        .map(|i| FrameAnnotation::new(i, i as f64 / 30.0, BoundingBox::new(10.0 + i as f64, 10.0, 30.0, 30.0).unwrap()))
        .collect();
    let bright = vec![120.0; 30];
    let q1 = assess_quality(&anns, 64.0 * 64.0, &bright).unwrap();
    let q2 = assess_quality(&anns.clone(), 64.0 * 64.0, &bright.clone()).unwrap();
    assert_eq!(q1, q2);

    let make = |rgb: [u8; 3]| {
        anns.iter()
            .cloned()
            .map(move |a| AnnotatedFrame { frame: Frame::uniform(64, 64, rgb).unwrap(), annotation: Some(a) })
    };
    let (_, qa) = build_trace(make([120, 120, 120]), RoiMode::FullBox, IlluminationPolicy::Never).unwrap();
    let (_, qb) = build_trace(make([200, 90, 70]), RoiMode::FullBox, IlluminationPolicy::Never).unwrap();
    assert_eq!(qa.verdict, qb.verdict);
    assert_eq!(qa.max_displacement, qb.max_displacement);
}

#[test]
fn estimate_all_is_deterministic() {
    let spec = SimSpec { seed: 11, ..SimSpec::default() }.with_snr_db(6.0);
    let (trace, _) = synth_trace(&spec).unwrap();
    let cfg = VitalsConfig::default();
    assert_eq!(estimate_all(&trace, &cfg).unwrap(), estimate_all(&trace, &cfg).unwrap());
}
