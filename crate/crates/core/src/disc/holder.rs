use super::fourier::differentiate_real;
use crate::error::{Error, Result};

pub const MIN_GRID: usize = 8;

/// `C^{k,eps}` norm of a curve `S^1 -> R^d` sampled on a uniform grid.
///
/// `samples[j]` is the point at `theta_j = 2 pi j / M`. The norm is
/// `sum_{l <= k} sup |curve^(l)|` plus the Hölder seminorm of the k-th
/// derivative, taken as a max over all grid pairs. Derivatives are spectral
/// `d/dtheta`, whose modulus agrees with `d/dzeta` on the unit circle.
pub fn holder_norm(samples: &[Vec<f64>], k: usize, eps: f64) -> Result<f64> {
    let m = samples.len();
    if m < MIN_GRID {
        return Err(Error::InvalidGrid { m, min: MIN_GRID });
    }
    if !(0.0 < eps && eps < 1.0) || k > 1 {
        return Err(Error::InvalidParameters(format!("holder norm needs k in {{0,1}} and 0 < eps < 1 (got k={k}, eps={eps})")));
    }
    let dim = samples[0].len();
    let mut total = sup_norm(samples);
    let top = if k == 1 {
        let mut cols: Vec<Vec<f64>> = (0..dim).map(|c| differentiate_real(&samples.iter().map(|s| s[c]).collect::<Vec<_>>())).collect();
        let deriv: Vec<Vec<f64>> = (0..m).map(|j| cols.iter_mut().map(|col| col[j]).collect()).collect();
        total += sup_norm(&deriv);
        deriv
    } else {
        samples.to_vec()
    };
    Ok(total + holder_seminorm(&top, eps))
}

pub fn sup_norm(samples: &[Vec<f64>]) -> f64 {
    samples.iter().map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max)
}

/// `max_{i != j} |c_i - c_j| / |zeta_i - zeta_j|^eps` over the grid.
pub fn holder_seminorm(samples: &[Vec<f64>], eps: f64) -> f64 {
    let m = samples.len();
    // chord length depends only on the index offset
    let denom: Vec<f64> = (0..m)
        .map(|off| {
            let chord = 2.0 * (std::f64::consts::PI * off as f64 / m as f64).sin().abs();
            if off == 0 {
                f64::INFINITY
            } else {
                chord.powf(eps)
            }
        })
        .collect();
    let mut best = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            let d2: f64 = samples[i].iter().zip(&samples[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let q = d2.sqrt() / denom[j - i];
            if q > best {
                best = q;
            }
        }
    }
    best
}
