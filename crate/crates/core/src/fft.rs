//! Discrete Fourier transform of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform. Other
//! lengths go through Bluestein's chirp-z algorithm on top of it, so the output
//! bins always sit at `k * fs / n` for the input length `n`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Forward transform, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
pub fn forward(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    if n <= 1 {
        return input.to_vec();
    }
    if n.is_power_of_two() {
        let mut buf = input.to_vec();
        radix2_in_place(&mut buf, false);
        buf
    } else {
        bluestein(input)
    }
}

/// Forward transform of a real sequence.
pub fn forward_real(input: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&buf)
}

fn radix2_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // Twiddles are computed directly rather than by repeated multiplication
        // to keep the error flat for long transforms.
        let twiddles: Vec<Complex64> = (0..half).map(|k| Complex64::from_polar(1.0, ang * k as f64)).collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = buf[start + k];
                let v = buf[start + k + half] * twiddles[k];
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for x in buf.iter_mut() {
            *x *= scale;
        }
    }
}

fn bluestein(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    let m = (2 * n - 1).next_power_of_two();
    // chirp[k] = exp(-i pi k^2 / n); k^2 taken mod 2n to keep the angle small.
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
            Complex64::from_polar(1.0, -PI * k2 / n as f64)
        })
        .collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = input[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2_in_place(&mut a, false);
    radix2_in_place(&mut b, false);
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= *y;
    }
    radix2_in_place(&mut a, true);
    (0..n).map(|k| a[k] * chirp[k]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let ang = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                    acc + v * Complex64::from_polar(1.0, ang)
                })
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                Complex64::new(a, b)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_various_lengths() {
        for &n in &[1usize, 2, 3, 5, 8, 12, 64, 100, 127, 300] {
            let x = pseudo_random(n, n as u64);
            let fast = forward(&x);
            let slow = naive_dft(&x);
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!((a - b).norm() < 1e-9 * (n as f64), "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut x = vec![Complex64::new(0.0, 0.0); 900];
        x[0] = Complex64::new(1.0, 0.0);
        for v in forward(&x) {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }
}
