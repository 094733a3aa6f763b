//! Text formats for complex numbers, vectors and Hermitian forms on the command line.

use nalgebra::DMatrix;
use stadisc::{ComplexPoint, HermitianForm, C64};

use crate::manifest::{CliError, Run};

/// `re` or `re,im`.
pub fn complex(s: &str) -> Result<C64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: {t:?} in {s:?}")));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(CliError::Usage(format!("expected `re` or `re,im`, got {s:?}"))),
    }
}

/// Components separated by `;`, each `re` or `re,im`.
pub fn complex_vec(s: &str) -> Result<Vec<C64>, CliError> {
    s.split(';').map(complex).collect()
}

pub fn point(s: &str) -> Result<ComplexPoint, CliError> {
    Ok(ComplexPoint::new(complex_vec(s)?)?)
}

pub fn reals(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: {t:?}")))).collect()
}

/// `identity`, `diag:l1,l2,...`, or a JSON file holding rows of `[re, im]` entries.
pub fn form(spec: &str, n: usize, run: &mut Run) -> Result<HermitianForm, CliError> {
    if spec == "identity" {
        return Ok(HermitianForm::identity(n));
    }
    let a = if let Some(diag) = spec.strip_prefix("diag:") {
        HermitianForm::diagonal(&reals(diag)?)?
    } else {
        let rows: Vec<Vec<C64>> = run.read_json(spec.as_ref())?;
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(CliError::Usage(format!("{spec}: form must be a square matrix")));
        }
        HermitianForm::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))?
    };
    if a.n() != n {
        return Err(CliError::Usage(format!("form has size {} but the vectors have {n} components", a.n())));
    }
    Ok(a)
}
