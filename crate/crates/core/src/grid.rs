//! Uniform periodic grids, spectral differentiation, quadrature, and
//! interpolation — the substrate every solver in this crate runs on.
//!
//! All domains are periodic and sized as powers of two. Fields are immutable
//! after construction; every operation returns a fresh field.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic spatial lattice with cached transform plans.
///
/// Cloning is cheap: the coordinate table, wavenumbers, and FFT plans are
/// shared behind `Arc`s.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    length: f64,
    origin: f64,
    spacing: f64,
    wavenumbers: Arc<Vec<f64>>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("origin", &self.origin)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length && self.origin == other.origin
    }
}

impl Grid {
    /// Build a periodic grid of `n` points covering `[origin, origin + length)`.
    ///
    /// `n` must be a power of two and `length` positive. Coordinates are
    /// `x_j = origin + j * spacing` with `spacing = length / n`.
    pub fn new(n: usize, length: f64, origin: f64) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::GridSizeNotPowerOfTwo(n));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::NonPositiveLength(length));
        }
        let spacing = length / n as f64;
        // DFT-ordered wavenumbers: 0, 1, ..., n/2-1, -n/2, ..., -1 (times 2*pi/L).
        let base = 2.0 * std::f64::consts::PI / length;
        let wavenumbers: Vec<f64> = (0..n)
            .map(|j| {
                let j_signed = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                base * j_signed as f64
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        Ok(Self {
            n,
            length,
            origin,
            spacing,
            wavenumbers: Arc::new(wavenumbers),
            fft_fwd,
            fft_inv,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of node `j`.
    pub fn coord(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing
    }

    /// All node coordinates in grid order.
    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coord(j)).collect()
    }

    /// Spectral wavenumbers in DFT order (`k[0] == 0`, Nyquist at `n/2`).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Wrap `x` into the fundamental domain `[origin, origin + length)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let r = (x - self.origin).rem_euclid(self.length);
        self.origin + r
    }

    /// Unnormalized forward transform, in place.
    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fft_fwd.process(buf);
    }

    /// Inverse transform, in place, normalized by `1/n`.
    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fft_inv.process(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

fn check_finite_real(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteField)
    }
}

fn check_finite_complex(values: &[Complex64]) -> Result<()> {
    if values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteField)
    }
}

/// Real-valued samples on a [`Grid`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLengthMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        check_finite_real(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len()).map(|j| f(grid.coord(j))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise map returning a new field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// Complex-valued samples on a [`Grid`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLengthMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        check_finite_complex(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values: Vec<Complex64> = (0..grid.len()).map(|j| f(grid.coord(j))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn re(&self) -> RealField {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }
}

/// Spectral derivative of the given order: transform, multiply by `(i k)^order`,
/// transform back. Exact for band-limited fields.
///
/// The Nyquist mode is zeroed for odd orders; `(i k)^order` has no
/// sign-consistent value there and keeping it breaks conjugate symmetry.
pub fn spectral_derivative(f: &ComplexField, order: u32) -> Result<ComplexField> {
    let grid = f.grid();
    let n = grid.len();
    let mut buf = f.values().to_vec();
    grid.fft_forward(&mut buf);
    for (j, v) in buf.iter_mut().enumerate() {
        if order % 2 == 1 && j == n / 2 {
            *v = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, grid.wavenumbers()[j]);
        *v *= ik.powu(order);
    }
    grid.fft_inverse(&mut buf);
    ComplexField::new(grid.clone(), buf)
}

/// Spectral derivative of a real field. The imaginary residue of the round
/// trip must stay below `1e-10` relative to the field scale; it is then
/// discarded.
pub fn real_derivative(f: &RealField, order: u32) -> Result<RealField> {
    let d = spectral_derivative(&f.to_complex(), order)?;
    let re_max = d.values().iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let im_max = d.values().iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    let tol = 1e-10 * re_max.max(f.max_abs()).max(1e-30);
    if im_max > tol {
        return Err(Error::SpectralResidue {
            residue: im_max,
            tol,
        });
    }
    Ok(d.re())
}

/// Quadrature on the periodic grid: `spacing * sum(values)`.
///
/// On a periodic lattice the trapezoid rule collapses to the rectangle rule,
/// which is spectrally accurate for smooth periodic integrands.
pub fn integrate(f: &RealField) -> f64 {
    f.grid().spacing() * f.values().iter().sum::<f64>()
}

/// Weighted quadrature `spacing * sum(w_j * f_j)` used for expectation values.
pub fn integrate_weighted(f: &RealField, weight: impl Fn(f64) -> f64) -> f64 {
    let g = f.grid();
    g.spacing()
        * f.values()
            .iter()
            .enumerate()
            .map(|(j, &v)| weight(g.coord(j)) * v)
            .sum::<f64>()
}

/// Cubic interpolation weights on the unit interval for the 4-node stencil
/// at offsets {-1, 0, 1, 2}: the unique cubic through the four nodes.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Evaluate `f` at an off-grid point by 4-node cubic interpolation over the
/// periodic samples. Exact at grid nodes and for cubic polynomials restricted
/// to four consecutive nodes; error is O(spacing^4) for smooth fields.
pub fn interpolate(f: &RealField, x: f64) -> f64 {
    let g = f.grid();
    let n = g.len();
    let xr = (x - g.origin()).rem_euclid(g.length());
    let cell_f = (xr / g.spacing()).floor();
    // Guard the case xr/spacing rounding to n.
    let cell = (cell_f as usize).min(n - 1);
    let t = xr / g.spacing() - cell as f64;
    let w = cubic_weights(t);
    let v = f.values();
    let idx = |off: i64| -> usize {
        let j = cell as i64 + off;
        j.rem_euclid(n as i64) as usize
    };
    w[0] * v[idx(-1)] + w[1] * v[idx(0)] + w[2] * v[idx(1)] + w[3] * v[idx(2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize, length: f64, origin: f64) -> Grid {
        Grid::new(n, length, origin).unwrap()
    }

    #[test]
    fn grid_coordinates_and_spacing() {
        let g = grid(8, 8.0, -4.0);
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.coords(), vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert!((g.spacing() * g.len() as f64 - g.length()).abs() < 1e-15);
    }

    #[test]
    fn grid_wavenumbers_follow_dft_order() {
        let g = grid(4, 2.0 * PI, 0.0);
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert!((k[1] - 1.0).abs() < 1e-15);
        assert!((k[2].abs() - 2.0).abs() < 1e-15); // Nyquist
        assert!((k[3] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(matches!(
            Grid::new(6, 1.0, 0.0),
            Err(Error::GridSizeNotPowerOfTwo(6))
        ));
        assert!(matches!(
            Grid::new(8, 0.0, 0.0),
            Err(Error::NonPositiveLength(_))
        ));
        assert!(matches!(
            Grid::new(8, -1.0, 0.0),
            Err(Error::NonPositiveLength(_))
        ));
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let l = 10.0;
        let g = grid(64, l, 0.0);
        let f = RealField::from_fn(g.clone(), |x| (2.0 * PI * x / l).sin()).unwrap();
        let d = real_derivative(&f, 1).unwrap();
        for (j, &v) in d.values().iter().enumerate() {
            let expect = (2.0 * PI / l) * (2.0 * PI * g.coord(j) / l).cos();
            assert!((v - expect).abs() < 1e-10 * (2.0 * PI / l));
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid(32, 5.0, -2.5);
        let f = RealField::from_fn(g, |_| 3.25).unwrap();
        for order in 1..=4 {
            let d = real_derivative(&f, order).unwrap();
            assert!(d.max_abs() < 1e-12, "order {order}");
        }
    }

    #[test]
    fn plane_wave_is_laplacian_eigenfunction() {
        let l = 8.0;
        let g = grid(64, l, -4.0);
        let k = g.wavenumbers()[5];
        let f = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, k * x)).unwrap();
        let d2 = spectral_derivative(&f, 2).unwrap();
        for (v, d) in f.values().iter().zip(d2.values()) {
            assert!((d + k * k * v).norm() < 1e-10 * k * k);
        }
    }

    #[test]
    fn integrate_constant_and_sine() {
        let g = grid(128, 10.0, 0.0);
        let one = RealField::from_fn(g.clone(), |_| 1.0).unwrap();
        assert!((integrate(&one) - 10.0).abs() < 1e-12);
        let s = RealField::from_fn(g, |x| (2.0 * PI * x / 10.0).sin()).unwrap();
        assert!(integrate(&s).abs() < 1e-12);
    }

    #[test]
    fn integrate_normalized_gaussian() {
        // Oracle: analytic normalization of a sigma=1 Gaussian; tails at L=40
        // are below machine epsilon.
        let g = grid(512, 40.0, -20.0);
        let rho = RealField::from_fn(g, |x| {
            (-x * x / 2.0).exp() / (2.0 * PI).sqrt()
        })
        .unwrap();
        assert!((integrate(&rho) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn interpolate_hits_grid_nodes_exactly() {
        let g = grid(32, 6.0, -3.0);
        let f = RealField::from_fn(g.clone(), |x| (x * 1.3).sin() * (x * 0.4).cos()).unwrap();
        for j in 0..g.len() {
            assert_eq!(interpolate(&f, g.coord(j)), f.values()[j]);
        }
    }

    #[test]
    fn interpolate_matches_smooth_function_at_midpoints() {
        // Oracle: analytic value of sin at the midpoint; cubic error is O(h^4).
        let l = 2.0 * PI;
        for n in [32usize, 64] {
            let g = grid(n, l, 0.0);
            let f = RealField::from_fn(g.clone(), |x| x.sin()).unwrap();
            let h = g.spacing();
            let mut worst = 0.0f64;
            for j in 0..n {
                let x = g.coord(j) + 0.5 * h;
                worst = worst.max((interpolate(&f, x) - x.sin()).abs());
            }
            // 4-point cubic: |err| <= h^4 / 24 * max|f''''| (with margin).
            assert!(worst < h.powi(4) / 10.0, "n={n} worst={worst:.3e}");
        }
    }

    #[test]
    fn interpolate_wraps_periodically() {
        let g = grid(16, 4.0, -2.0);
        let f = RealField::from_fn(g.clone(), |x| x * x * 0.3 - x).unwrap();
        let x = -2.0 + 0.5 * g.spacing();
        let wrapped = x + g.length();
        assert!((interpolate(&f, x) - interpolate(&f, wrapped)).abs() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // Derivative linearity over random band-limited fields.
        #[test]
        fn derivative_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
            let g = grid(64, 12.0, -6.0);
            let modes = [1usize, 2, 3, 5];
            let f = ComplexField::from_fn(g.clone(), |x| {
                modes.iter().enumerate().map(|(i, &m)| {
                    let k = 2.0 * PI * m as f64 / 12.0;
                    Complex64::from_polar(((seed + i as u64) % 7) as f64 * 0.2 + 0.1, k * x)
                }).sum()
            }).unwrap();
            let h = ComplexField::from_fn(g.clone(), |x| {
                modes.iter().map(|&m| {
                    let k = 2.0 * PI * m as f64 / 12.0;
                    Complex64::new((k * x).cos(), (2.0 * k * x).sin() * 0.3)
                }).sum()
            }).unwrap();
            let combo = ComplexField::new(
                g.clone(),
                f.values().iter().zip(h.values()).map(|(&u, &v)| a * u + b * v).collect(),
            ).unwrap();
            let d_combo = spectral_derivative(&combo, 1).unwrap();
            let d_f = spectral_derivative(&f, 1).unwrap();
            let d_h = spectral_derivative(&h, 1).unwrap();
            let scale = d_combo.max_abs().max(1.0);
            for ((dc, df), dh) in d_combo.values().iter().zip(d_f.values()).zip(d_h.values()) {
                prop_assert!((dc - (a * df + b * dh)).norm() <= 1e-12 * scale);
            }
        }

        // D(D(f,1),1) == D(f,2) for band-limited fields.
        #[test]
        fn first_derivative_twice_matches_second(m in 1usize..6) {
            let g = grid(64, 10.0, 0.0);
            let k = 2.0 * PI * m as f64 / 10.0;
            let f = ComplexField::from_fn(g, |x| Complex64::new((k * x).sin(), 0.5 * (k * x).cos())).unwrap();
            let d1d1 = spectral_derivative(&spectral_derivative(&f, 1).unwrap(), 1).unwrap();
            let d2 = spectral_derivative(&f, 2).unwrap();
            let scale = d2.max_abs().max(1e-30);
            for (a, b) in d1d1.values().iter().zip(d2.values()) {
                prop_assert!((a - b).norm() <= 1e-10 * scale);
            }
        }

        // Periodic boundary: the integral of any derivative vanishes.
        #[test]
        fn integral_of_derivative_vanishes(m in 1usize..8, amp in 0.1f64..2.0) {
            let g = grid(64, 10.0, -5.0);
            let k = 2.0 * PI * m as f64 / 10.0;
            let f = RealField::from_fn(g, |x| amp * (k * x).sin() + 0.3 * (2.0 * k * x).cos()).unwrap();
            let d = real_derivative(&f, 1).unwrap();
            prop_assert!(integrate(&d).abs() < 1e-10);
        }

        // The interpolant reproduces cubic polynomials exactly.
        #[test]
        fn interpolation_reproduces_cubics(
            c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -1.0f64..1.0, c3 in -1.0f64..1.0,
            t in 0.0f64..1.0,
        ) {
            let g = grid(32, 8.0, 0.0);
            let p = |x: f64| c0 + c1 * x + c2 * x * x + c3 * x * x * x;
            let f = RealField::from_fn(g.clone(), p).unwrap();
            // Stay inside one 4-node stencil away from the periodic seam.
            let h = g.spacing();
            let x = g.coord(10) + t * h;
            let got = interpolate(&f, x);
            let scale = 1.0 + p(x).abs();
            prop_assert!((got - p(x)).abs() <= 1e-12 * scale, "got {got} expected {}", p(x));
        }
    }
}
