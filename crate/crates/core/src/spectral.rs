//! Mixed sine/cosine pseudo-spectral basis on (0,1).
//!
//! Velocity-like fields (vanishing at the walls) are expanded in sin(kπy),
//! k = 1..n; temperature-like fields (zero Neumann data) in cos(jπy),
//! j = 0..n. Collocation uses the midpoint grid y_i = (i+½)/M, on which the
//! discrete transforms are exactly orthogonal for modes below M, so
//! projection after synthesis is the identity on the span. Nonlinear terms
//! are formed pointwise on the M nodes and projected back; with M ≥ 2n+1 the
//! aliasing images of cubic products fall entirely outside the retained
//! modes (the usual 2/3-style dealiasing).
//!
//! Interior flux derivatives are taken at full node resolution: a nodal flux
//! is expanded through mode M−1, differentiated term by term, and evaluated
//! back on the nodes. Only the final projection truncates to n.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Basis {
    /// Retained spectral modes n.
    pub modes: usize,
    /// Collocation nodes M.
    pub points: usize,
    /// Midpoint nodes y_i = (i+½)/M.
    pub nodes: Vec<f64>,
    /// sin(kπ y_i), row k−1 (k = 1..M−1), length M each.
    sin_tab: Vec<f64>,
    /// cos(jπ y_i), row j (j = 0..M−1), length M each.
    cos_tab: Vec<f64>,
    /// Exact L² projection of cos(jπ·) onto sin(lπ·); row l−1 (l = 1..n),
    /// column j (j = 0..n).
    cos_to_sin: Vec<f64>,
}

impl Basis {
    pub fn new(modes: usize, points: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Domain("basis needs at least one mode".into()));
        }
        if points < modes + 1 {
            return Err(Error::Domain(format!(
                "basis needs at least modes+1 = {} collocation points, got {points}",
                modes + 1
            )));
        }
        let m = points;
        let nodes: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let mut sin_tab = vec![0.0; (m - 1) * m];
        for k in 1..m {
            for (i, y) in nodes.iter().enumerate() {
                sin_tab[(k - 1) * m + i] = (k as f64 * PI * y).sin();
            }
        }
        let mut cos_tab = vec![0.0; m * m];
        for j in 0..m {
            for (i, y) in nodes.iter().enumerate() {
                cos_tab[j * m + i] = (j as f64 * PI * y).cos();
            }
        }
        let n = modes;
        let mut cos_to_sin = vec![0.0; n * (n + 1)];
        for l in 1..=n {
            for j in 0..=n {
                // 2 ∫ cos(jπy) sin(lπy) dy on (0,1)
                let val = if l == j {
                    0.0
                } else if (l + j) % 2 == 0 {
                    0.0
                } else {
                    let (lf, jf) = (l as f64, j as f64);
                    4.0 * lf / (PI * (lf * lf - jf * jf))
                };
                cos_to_sin[(l - 1) * (n + 1) + j] = val;
            }
        }
        Ok(Basis {
            modes,
            points,
            nodes,
            sin_tab,
            cos_tab,
            cos_to_sin,
        })
    }

    fn check_nodal(&self, f: &[f64], what: &'static str) -> Result<()> {
        if f.len() != self.points {
            return Err(Error::Shape {
                what,
                expected: self.points,
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Sine coefficients c_k = (2/M) Σ_i f_i sin(kπ y_i), k = 1..=kmax.
    pub fn sine_analyze(&self, f: &[f64], kmax: usize) -> Result<Vec<f64>> {
        self.check_nodal(f, "sine_analyze input")?;
        assert!(kmax <= self.points - 1, "kmax beyond quadrature exactness");
        let m = self.points;
        let scale = 2.0 / m as f64;
        let mut out = vec![0.0; kmax];
        for k in 1..=kmax {
            let row = &self.sin_tab[(k - 1) * m..k * m];
            let mut acc = 0.0;
            for i in 0..m {
                acc += f[i] * row[i];
            }
            out[k - 1] = scale * acc;
        }
        Ok(out)
    }

    /// Cosine coefficients d_0 = (1/M) Σ f_i, d_j = (2/M) Σ f_i cos(jπ y_i),
    /// j = 0..=jmax.
    pub fn cosine_analyze(&self, f: &[f64], jmax: usize) -> Result<Vec<f64>> {
        self.check_nodal(f, "cosine_analyze input")?;
        assert!(jmax <= self.points - 1, "jmax beyond quadrature exactness");
        let m = self.points;
        let mut out = vec![0.0; jmax + 1];
        out[0] = f.iter().sum::<f64>() / m as f64;
        let scale = 2.0 / m as f64;
        for j in 1..=jmax {
            let row = &self.cos_tab[j * m..(j + 1) * m];
            let mut acc = 0.0;
            for i in 0..m {
                acc += f[i] * row[i];
            }
            out[j] = scale * acc;
        }
        Ok(out)
    }

    /// Galerkin projection onto the retained sine modes.
    pub fn project_sine(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.sine_analyze(f, self.modes)
    }

    /// Galerkin projection onto the retained cosine modes (including j = 0).
    pub fn project_cosine(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.cosine_analyze(f, self.modes)
    }

    /// Evaluate Σ c_k sin(kπy) on the collocation nodes.
    pub fn synth_sine(&self, co: &[f64]) -> Vec<f64> {
        let m = self.points;
        assert!(co.len() <= m - 1);
        let mut out = vec![0.0; m];
        for (k0, &c) in co.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.sin_tab[k0 * m..(k0 + 1) * m];
            for i in 0..m {
                out[i] += c * row[i];
            }
        }
        out
    }

    /// Evaluate d/dy Σ c_k sin(kπy) = Σ c_k kπ cos(kπy) on the nodes.
    pub fn synth_sine_deriv(&self, co: &[f64]) -> Vec<f64> {
        let m = self.points;
        assert!(co.len() <= m - 1);
        let mut out = vec![0.0; m];
        for (k0, &c) in co.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let k = k0 + 1;
            let w = c * k as f64 * PI;
            let row = &self.cos_tab[k * m..(k + 1) * m];
            for i in 0..m {
                out[i] += w * row[i];
            }
        }
        out
    }

    /// Evaluate Σ d_j cos(jπy) on the nodes.
    pub fn synth_cosine(&self, co: &[f64]) -> Vec<f64> {
        let m = self.points;
        assert!(co.len() <= m);
        let mut out = vec![co.first().copied().unwrap_or(0.0); m];
        for (j, &d) in co.iter().enumerate().skip(1) {
            if d == 0.0 {
                continue;
            }
            let row = &self.cos_tab[j * m..(j + 1) * m];
            for i in 0..m {
                out[i] += d * row[i];
            }
        }
        out
    }

    /// Evaluate d/dy Σ d_j cos(jπy) = −Σ d_j jπ sin(jπy) on the nodes.
    pub fn synth_cosine_deriv(&self, co: &[f64]) -> Vec<f64> {
        let m = self.points;
        assert!(co.len() <= m);
        let mut out = vec![0.0; m];
        for (j, &d) in co.iter().enumerate().skip(1) {
            if d == 0.0 {
                continue;
            }
            let w = -d * j as f64 * PI;
            let row = &self.sin_tab[(j - 1) * m..j * m];
            for i in 0..m {
                out[i] += w * row[i];
            }
        }
        out
    }

    /// Nodal derivative of an even-type flux (nonzero wall values allowed):
    /// expand through cos((M−1)πy), differentiate, evaluate back.
    pub fn deriv_even_field(&self, f: &[f64]) -> Result<Vec<f64>> {
        let co = self.cosine_analyze(f, self.points - 1)?;
        Ok(self.synth_cosine_deriv(&co))
    }

    /// Nodal derivative of an odd-type flux (vanishing at the walls):
    /// expand through sin((M−1)πy), differentiate, evaluate back.
    pub fn deriv_odd_field(&self, f: &[f64]) -> Result<Vec<f64>> {
        let co = self.sine_analyze(f, self.points - 1)?;
        Ok(self.synth_sine_deriv(&co))
    }

    /// Exact L² projection onto the retained sine modes of a cosine series
    /// with coefficients `cos_co` (j = 0..=n). Used for linear terms whose
    /// projection must not pick up quadrature parity error.
    pub fn cosine_series_to_sine(&self, cos_co: &[f64]) -> Vec<f64> {
        let n = self.modes;
        assert!(cos_co.len() <= n + 1);
        let mut out = vec![0.0; n];
        for l in 1..=n {
            let row = &self.cos_to_sin[(l - 1) * (n + 1)..l * (n + 1)];
            let mut acc = 0.0;
            for (j, &d) in cos_co.iter().enumerate() {
                acc += d * row[j];
            }
            out[l - 1] = acc;
        }
        out
    }

    /// Complex sine analysis (both components share the real transform).
    pub fn sine_analyze_c(&self, f: &[Complex64], kmax: usize) -> Result<Vec<Complex64>> {
        if f.len() != self.points {
            return Err(Error::Shape {
                what: "sine_analyze_c input",
                expected: self.points,
                got: f.len(),
            });
        }
        let m = self.points;
        let scale = 2.0 / m as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); kmax];
        for k in 1..=kmax {
            let row = &self.sin_tab[(k - 1) * m..k * m];
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                acc += f[i] * row[i];
            }
            out[k - 1] = scale * acc;
        }
        Ok(out)
    }

    /// Evaluate a complex sine series on the nodes.
    pub fn synth_sine_c(&self, co: &[Complex64]) -> Vec<Complex64> {
        let m = self.points;
        assert!(co.len() <= m - 1);
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (k0, &c) in co.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let row = &self.sin_tab[k0 * m..(k0 + 1) * m];
            for i in 0..m {
                out[i] += c * row[i];
            }
        }
        out
    }

    /// Evaluate the derivative of a complex sine series on the nodes.
    pub fn synth_sine_deriv_c(&self, co: &[Complex64]) -> Vec<Complex64> {
        let m = self.points;
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (k0, &c) in co.iter().enumerate() {
            let k = k0 + 1;
            let w = c * (k as f64 * PI);
            let row = &self.cos_tab[k * m..(k + 1) * m];
            for i in 0..m {
                out[i] += w * row[i];
            }
        }
        out
    }
}

/// Evaluate Σ c_k sin(kπy) at an arbitrary point. Wall values are exact
/// zeros: every basis function vanishes there by construction, so the
/// rounding of sin(kπ) must not leak through.
pub fn eval_sine_at(co: &[f64], y: f64) -> f64 {
    if y == 0.0 || y == 1.0 {
        return 0.0;
    }
    co.iter()
        .enumerate()
        .map(|(k0, &c)| c * ((k0 + 1) as f64 * PI * y).sin())
        .sum()
}

/// Evaluate Σ d_j cos(jπy) at an arbitrary point.
pub fn eval_cosine_at(co: &[f64], y: f64) -> f64 {
    co.iter()
        .enumerate()
        .map(|(j, &d)| d * (j as f64 * PI * y).cos())
        .sum()
}

/// Evaluate a complex sine series at an arbitrary point; exact zeros at the
/// walls, as in the real case.
pub fn eval_sine_at_c(co: &[Complex64], y: f64) -> Complex64 {
    if y == 0.0 || y == 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    co.iter()
        .enumerate()
        .map(|(k0, &c)| c * ((k0 + 1) as f64 * PI * y).sin())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_kills_out_of_span_modes() {
        // f = sin(3πy) projected with n = 2 has no retained content
        let b = Basis::new(2, 7).unwrap();
        let f: Vec<f64> = b.nodes.iter().map(|y| (3.0 * PI * y).sin()).collect();
        let co = b.project_sine(&f).unwrap();
        for c in co {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn projection_is_identity_on_span() {
        let b = Basis::new(4, 9).unwrap();
        let f: Vec<f64> = b.nodes.iter().map(|y| (PI * y).sin()).collect();
        let co = b.project_sine(&f).unwrap();
        assert_abs_diff_eq!(co[0], 1.0, epsilon = 1e-14);
        for c in &co[1..] {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-14);
        }
        // round trip on a full random-ish coefficient vector
        let co_in = vec![0.3, -1.2, 0.07, 2.5];
        let back = b.project_sine(&b.synth_sine(&co_in)).unwrap();
        for (a, e) in back.iter().zip(&co_in) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-13);
        }
    }

    #[test]
    fn cosine_round_trip_and_mean_mode() {
        let b = Basis::new(3, 9).unwrap();
        let co_in = vec![0.9, -0.4, 1.1, -0.02];
        let back = b.project_cosine(&b.synth_cosine(&co_in)).unwrap();
        for (a, e) in back.iter().zip(&co_in) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-13);
        }
        let ones = vec![1.0; b.points];
        let co = b.project_cosine(&ones).unwrap();
        assert_abs_diff_eq!(co[0], 1.0, epsilon = 1e-14);
        for c in &co[1..] {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivatives_are_exact_on_span() {
        let b = Basis::new(4, 11).unwrap();
        let co = vec![0.0, 1.5, 0.0, 0.0];
        let d = b.synth_sine_deriv(&co);
        for (i, y) in b.nodes.iter().enumerate() {
            assert_abs_diff_eq!(d[i], 1.5 * 2.0 * PI * (2.0 * PI * y).cos(), epsilon = 1e-12);
        }
        let dc = b.synth_cosine_deriv(&[0.0, 0.0, 2.0]);
        for (i, y) in b.nodes.iter().enumerate() {
            assert_abs_diff_eq!(dc[i], -2.0 * 2.0 * PI * (2.0 * PI * y).sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn flux_derivative_round_trip() {
        // even-type flux cos(2πy): nodal derivative should match analytically
        let b = Basis::new(8, 33).unwrap();
        let f: Vec<f64> = b.nodes.iter().map(|y| (2.0 * PI * y).cos()).collect();
        let d = b.deriv_even_field(&f).unwrap();
        for (i, y) in b.nodes.iter().enumerate() {
            assert_abs_diff_eq!(d[i], -2.0 * PI * (2.0 * PI * y).sin(), epsilon = 1e-11);
        }
        let g: Vec<f64> = b.nodes.iter().map(|y| (3.0 * PI * y).sin()).collect();
        let dg = b.deriv_odd_field(&g).unwrap();
        for (i, y) in b.nodes.iter().enumerate() {
            assert_abs_diff_eq!(dg[i], 3.0 * PI * (3.0 * PI * y).cos(), epsilon = 1e-11);
        }
    }

    #[test]
    fn cosine_to_sine_projection_matches_classical_series() {
        // the sine expansion of the constant 1 is Σ_{l odd} (4/lπ) sin(lπy)
        let b = Basis::new(5, 11).unwrap();
        let out = b.cosine_series_to_sine(&[1.0]);
        for (l0, &c) in out.iter().enumerate() {
            let l = l0 + 1;
            let expect = if l % 2 == 1 { 4.0 / (l as f64 * PI) } else { 0.0 };
            assert_abs_diff_eq!(c, expect, epsilon = 1e-14);
        }
        // and against high-resolution quadrature for a mixed series
        let fine = Basis::new(5, 4001).unwrap();
        let series = vec![0.2, -0.7, 0.4, 0.0, 1.3, -0.5];
        let nodal = fine.synth_cosine(&series);
        let quad = fine.project_sine(&nodal).unwrap();
        let exact = b.cosine_series_to_sine(&series);
        for (a, e) in quad.iter().zip(&exact) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-6);
        }
    }

    #[test]
    fn complex_round_trip() {
        let b = Basis::new(3, 7).unwrap();
        let co = vec![
            Complex64::new(0.5, -0.25),
            Complex64::new(-1.0, 0.1),
            Complex64::new(0.0, 2.0),
        ];
        let back = b.sine_analyze_c(&b.synth_sine_c(&co), 3).unwrap();
        for (a, e) in back.iter().zip(&co) {
            assert!((a - e).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_undersized_grids() {
        assert!(Basis::new(4, 4).is_err());
        assert!(Basis::new(0, 8).is_err());
    }
}
