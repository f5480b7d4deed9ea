//! Ordinary least-squares line fit.

use crate::error::{Result, ZenoError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(ZenoError::Fit(format!("need >= 2 paired samples, got {} and {}", xs.len(), ys.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 || !sxy.is_finite() {
        return Err(ZenoError::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit { slope, intercept: my - slope * mx })
}
