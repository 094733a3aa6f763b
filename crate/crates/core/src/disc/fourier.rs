//! Fourier synthesis and analysis on the uniform grid `zeta_j = exp(2 pi i j / M)`.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use super::types::C64;

pub fn grid_point(j: usize, m: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)
}

pub fn grid(m: usize) -> Vec<C64> {
    (0..m).map(|j| grid_point(j, m)).collect()
}

/// Samples `sum_k coeffs[k] zeta^(k + lowest)` of a vector-valued Laurent
/// polynomial at the `m` grid points; output is `m` rows of `dim` values.
/// Coefficients beyond the grid resolution are folded, which is exact on the grid.
pub fn synthesize(coeffs: &[Vec<C64>], lowest: i64, m: usize, dim: usize) -> Vec<Vec<C64>> {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(m);
    let mut out = vec![vec![C64::new(0.0, 0.0); dim]; m];
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for c in 0..dim {
        buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
        for (k, row) in coeffs.iter().enumerate() {
            let idx = (k as i64 + lowest).rem_euclid(m as i64) as usize;
            buf[idx] += row[c];
        }
        fft.process(&mut buf);
        for j in 0..m {
            out[j][c] = buf[j];
        }
    }
    out
}

/// Fourier coefficients with indices `lo..=hi` of grid samples (`m` rows of `dim`).
pub fn analyze(samples: &[Vec<C64>], lo: i64, hi: i64, dim: usize) -> Vec<Vec<C64>> {
    let m = samples.len();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let count = (hi - lo + 1).max(0) as usize;
    let mut out = vec![vec![C64::new(0.0, 0.0); dim]; count];
    let mut buf = vec![C64::new(0.0, 0.0); m];
    let scale = 1.0 / m as f64;
    for c in 0..dim {
        for j in 0..m {
            buf[j] = samples[j][c];
        }
        fft.process(&mut buf);
        for (k, row) in out.iter_mut().enumerate() {
            let idx = (k as i64 + lo).rem_euclid(m as i64) as usize;
            row[c] = buf[idx] * scale;
        }
    }
    out
}

/// Spectral derivative in `theta` of a real periodic sequence.
pub fn differentiate_real(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let freq = if 2 * k < m {
            k as f64
        } else if 2 * k == m {
            0.0
        } else {
            k as f64 - m as f64
        };
        *b *= C64::new(0.0, freq);
    }
    inv.process(&mut buf);
    buf.iter().map(|b| b.re / m as f64).collect()
}

/// Horner evaluation of `sum_k coeffs[k] zeta^k` for one component.
pub fn horner(coeffs: &[Vec<C64>], c: usize, zeta: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, row| acc * zeta + row[c])
}

/// Horner evaluation of the derivative `sum_k k coeffs[k] zeta^(k-1)`.
pub fn horner_derivative(coeffs: &[Vec<C64>], c: usize, zeta: C64) -> C64 {
    coeffs.iter().enumerate().skip(1).rev().fold(C64::new(0.0, 0.0), |acc, (k, row)| acc * zeta + row[c] * k as f64)
}
