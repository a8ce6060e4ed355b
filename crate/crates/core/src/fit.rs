//! Ordinary least-squares line fits used throughout the analysis code.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of the data.
    pub correlation: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    /// Standard error of the slope.
    pub slope_error: f64,
    pub n: usize,
}

impl LineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Fits `y = slope·x + intercept`. Needs at least two distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "fit_line: {} abscissae but {} ordinates",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs >= 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "line fit needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    let (correlation, r_squared) = if syy == 0.0 {
        (1.0, 1.0)
    } else {
        (sxy / (sxx * syy).sqrt(), 1.0 - ss_res / syy)
    };
    let slope_error = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        correlation,
        r_squared,
        rms_residual: (ss_res / nf).sqrt(),
        slope_error,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 0.25 * v - 3.0).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-14);
        assert!((f.intercept + 3.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(f.rms_residual < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_line(&[1.0, 2.0], &[1.0]).is_err());
    }
}
