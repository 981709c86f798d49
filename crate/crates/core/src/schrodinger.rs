//! Split-step spectral propagator for the time-dependent Schrodinger
//! equation on a periodic grid, plus the standard observables and the
//! Ehrenfest consistency residuals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    integrate, integrate_weighted, interpolate, real_derivative, spectral_derivative,
    ComplexField, Grid, RealField,
};

/// Absolute bound on |psi| at the domain edges; states must keep their tails
/// below this so the periodic wrap never feeds back into the dynamics.
pub const TAIL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::NonPositiveParameter { name: "hbar", value: hbar });
        }
        if !(mass > 0.0) {
            return Err(Error::NonPositiveParameter { name: "mass", value: mass });
        }
        Ok(Self { hbar, mass })
    }
}

/// External potential kinds materialized on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Free,
    Harmonic { omega: f64 },
    /// `U = lambda x^4 + quadratic x^2`
    Quartic { lambda: f64, quadratic: f64 },
    /// `U = a (x^2 - b)^2`
    DoubleWell { a: f64, b: f64 },
    Custom,
}

/// A potential with its grid samples and cached derivatives up to order 5
/// (the quantum force series with k <= 2 needs the third and fifth
/// derivatives). Built-in kinds materialize derivatives analytically; custom
/// tabulated potentials fall back to spectral differentiation.
#[derive(Debug, Clone)]
pub struct Potential {
    kind: PotentialKind,
    constants: PhysicalConstants,
    values: RealField,
    derivatives: Vec<RealField>,
}

impl Potential {
    pub fn new(kind: PotentialKind, grid: Grid, constants: PhysicalConstants) -> Result<Self> {
        let m = constants.mass;
        let analytic: Option<[Box<dyn Fn(f64) -> f64>; 6]> = match kind {
            PotentialKind::Free => Some([
                Box::new(|_| 0.0),
                Box::new(|_| 0.0),
                Box::new(|_| 0.0),
                Box::new(|_| 0.0),
                Box::new(|_| 0.0),
                Box::new(|_| 0.0),
            ]),
            PotentialKind::Harmonic { omega } => Some([
                Box::new(move |x| 0.5 * m * omega * omega * x * x),
                Box::new(move |x| m * omega * omega * x),
                Box::new(move |_| m * omega * omega),
                Box::new(|_| 0.0),
                Box::new(|_| 0.0),
                Box::new(|_| 0.0),
            ]),
            PotentialKind::Quartic { lambda, quadratic } => Some([
                Box::new(move |x| lambda * x.powi(4) + quadratic * x * x),
                Box::new(move |x| 4.0 * lambda * x.powi(3) + 2.0 * quadratic * x),
                Box::new(move |x| 12.0 * lambda * x * x + 2.0 * quadratic),
                Box::new(move |x| 24.0 * lambda * x),
                Box::new(move |_| 24.0 * lambda),
                Box::new(|_| 0.0),
            ]),
            PotentialKind::DoubleWell { a, b } => Some([
                Box::new(move |x| a * (x * x - b) * (x * x - b)),
                Box::new(move |x| 4.0 * a * x * (x * x - b)),
                Box::new(move |x| 4.0 * a * (3.0 * x * x - b)),
                Box::new(move |x| 24.0 * a * x),
                Box::new(move |_| 24.0 * a),
                Box::new(|_| 0.0),
            ]),
            PotentialKind::Custom => None,
        };
        let fns = analytic.expect("custom potentials use from_samples");
        let values = RealField::from_fn(grid.clone(), &fns[0])?;
        let derivatives = (1..=5)
            .map(|o| RealField::from_fn(grid.clone(), &fns[o]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, constants, values, derivatives })
    }

    /// Tabulated potential; derivatives are computed spectrally, so the
    /// samples must be smooth and periodic on the grid.
    pub fn from_samples(values: RealField, constants: PhysicalConstants) -> Result<Self> {
        let derivatives = (1..=5)
            .map(|o| real_derivative(&values, o))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind: PotentialKind::Custom, constants, values, derivatives })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn values(&self) -> &RealField {
        &self.values
    }

    /// Cached derivative of the given order, 1 through 5.
    pub fn derivative(&self, order: usize) -> &RealField {
        assert!((1..=5).contains(&order), "derivative cache holds orders 1..=5");
        &self.derivatives[order - 1]
    }

    /// Potential value at an arbitrary point (analytic for built-in kinds).
    pub fn value_at(&self, x: f64) -> f64 {
        let m = self.constants.mass;
        match self.kind {
            PotentialKind::Free => 0.0,
            PotentialKind::Harmonic { omega } => 0.5 * m * omega * omega * x * x,
            PotentialKind::Quartic { lambda, quadratic } => lambda * x.powi(4) + quadratic * x * x,
            PotentialKind::DoubleWell { a, b } => a * (x * x - b) * (x * x - b),
            PotentialKind::Custom => interpolate(&self.values, x),
        }
    }

    /// Gradient at an arbitrary point (analytic for built-in kinds).
    pub fn gradient_at(&self, x: f64) -> f64 {
        let m = self.constants.mass;
        match self.kind {
            PotentialKind::Free => 0.0,
            PotentialKind::Harmonic { omega } => m * omega * omega * x,
            PotentialKind::Quartic { lambda, quadratic } => {
                4.0 * lambda * x.powi(3) + 2.0 * quadratic * x
            }
            PotentialKind::DoubleWell { a, b } => 4.0 * a * x * (x * x - b),
            PotentialKind::Custom => interpolate(&self.derivatives[0], x),
        }
    }
}

/// A wavefunction snapshot: complex samples, physical constants, and time.
#[derive(Debug, Clone)]
pub struct WaveField {
    psi: ComplexField,
    constants: PhysicalConstants,
    time: f64,
}

impl WaveField {
    pub fn new(psi: ComplexField, constants: PhysicalConstants, time: f64) -> Result<Self> {
        let state = Self { psi, constants, time };
        state.check_tails()?;
        Ok(state)
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    pub fn psi(&self) -> &ComplexField {
        &self.psi
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn norm(&self) -> f64 {
        let g = self.grid();
        g.spacing() * self.psi.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// |psi|^2 on the grid.
    pub fn density(&self) -> RealField {
        RealField::new(
            self.grid().clone(),
            self.psi.values().iter().map(|v| v.norm_sqr()).collect(),
        )
        .expect("density of a finite state is finite")
    }

    /// Overlap <self|other> on the shared grid.
    pub fn overlap(&self, other: &WaveField) -> Result<Complex64> {
        if self.grid() != other.grid() {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 = self
            .psi
            .values()
            .iter()
            .zip(other.psi.values())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid().spacing())
    }

    fn check_tails(&self) -> Result<()> {
        let v = self.psi.values();
        let edge = v[0].norm().max(v[v.len() - 1].norm());
        if edge >= TAIL_LIMIT {
            return Err(Error::TailContainment { edge, limit: TAIL_LIMIT });
        }
        Ok(())
    }
}

/// Initial state specifications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    /// `psi ~ exp(-(x-x0)^2 / 4 sigma^2 + i p0 x / hbar)`; the density is a
    /// Gaussian of standard deviation `sigma`.
    Gaussian { x0: f64, p0: f64, sigma: f64 },
    /// Eigenstate `n` of the harmonic well with frequency `omega`.
    HarmonicEigenstate { omega: f64, n: usize },
}

/// Build a normalized state on the grid; rejects under-resolved or
/// tail-violating states.
pub fn init_state(spec: StateSpec, grid: &Grid, constants: PhysicalConstants) -> Result<WaveField> {
    let raw = match spec {
        StateSpec::Gaussian { x0, p0, sigma } => {
            if !(sigma > 0.0) {
                return Err(Error::NonPositiveParameter { name: "sigma", value: sigma });
            }
            ComplexField::from_fn(grid.clone(), |x| {
                let envelope = (-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp();
                Complex64::from_polar(envelope, p0 * x / constants.hbar)
            })?
        }
        StateSpec::HarmonicEigenstate { omega, n } => {
            if !(omega > 0.0) {
                return Err(Error::NonPositiveParameter { name: "omega", value: omega });
            }
            let scale = (constants.mass * omega / constants.hbar).sqrt();
            ComplexField::from_fn(grid.clone(), |x| {
                let y = scale * x;
                Complex64::new(hermite(n, y) * (-0.5 * y * y).exp(), 0.0)
            })?
        }
    };
    let norm_sq = grid.spacing() * raw.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
    if !(norm_sq > 0.0) {
        return Err(Error::Invalid("state has zero norm on the grid".into()));
    }
    let scale = 1.0 / norm_sq.sqrt();
    let psi = ComplexField::new(grid.clone(), raw.values().iter().map(|v| v * scale).collect())?;
    WaveField::new(psi, constants, 0.0)
}

/// Physicists' Hermite polynomial by recurrence.
fn hermite(n: usize, y: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * y;
    for k in 1..n {
        let h2 = 2.0 * y * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Sanity bound on the split-step time step, `factor * m * spacing^2 / hbar`
/// with the recommended `factor = 0.5`.
pub fn recommended_max_dt(grid: &Grid, constants: PhysicalConstants, factor: f64) -> f64 {
    factor * constants.mass * grid.spacing() * grid.spacing() / constants.hbar
}

/// One Strang step: half potential phase, full kinetic step in Fourier
/// space, half potential phase. Unitary to roundoff; second order in `dt`.
pub fn step(state: &WaveField, potential: &Potential, dt: f64) -> Result<WaveField> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveTimeStep(dt));
    }
    if state.grid() != potential.grid() {
        return Err(Error::GridMismatch);
    }
    let mut next = state.clone();
    step_in_place(&mut next, potential, dt)?;
    Ok(next)
}

fn step_in_place(state: &mut WaveField, potential: &Potential, dt: f64) -> Result<()> {
    let hbar = state.constants.hbar;
    let mass = state.constants.mass;
    let grid = state.psi.grid().clone();
    let u = potential.values().values();
    let buf = state.psi.values_mut();
    for (v, &uj) in buf.iter_mut().zip(u) {
        *v *= Complex64::from_polar(1.0, -uj * dt / (2.0 * hbar));
    }
    grid.fft_forward(buf);
    for (j, v) in buf.iter_mut().enumerate() {
        let k = grid.wavenumbers()[j];
        *v *= Complex64::from_polar(1.0, -hbar * k * k * dt / (2.0 * mass));
    }
    grid.fft_inverse(buf);
    for (v, &uj) in buf.iter_mut().zip(u) {
        *v *= Complex64::from_polar(1.0, -uj * dt / (2.0 * hbar));
    }
    state.time += dt;
    state.check_tails()
}

/// Evolve by `n_steps` steps of size `dt`.
pub fn evolve(state: &WaveField, potential: &Potential, dt: f64, n_steps: usize) -> Result<WaveField> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveTimeStep(dt));
    }
    if state.grid() != potential.grid() {
        return Err(Error::GridMismatch);
    }
    let mut s = state.clone();
    for _ in 0..n_steps {
        step_in_place(&mut s, potential, dt)?;
    }
    Ok(s)
}

/// Standard expectation values over `rho = |psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub energy: f64,
    pub var_x: f64,
}

/// Compute norm, <x>, <p>, total energy, and Var(x).
///
/// `<p> = hbar Im integral(psi* d_x psi)`; kinetic energy uses the
/// integration-by-parts form `hbar^2/2m integral(|d_x psi|^2)`.
pub fn observables(state: &WaveField, potential: &Potential) -> Result<Observables> {
    if state.grid() != potential.grid() {
        return Err(Error::GridMismatch);
    }
    let hbar = state.constants.hbar;
    let mass = state.constants.mass;
    let rho = state.density();
    let norm = integrate(&rho);
    let mean_x = integrate_weighted(&rho, |x| x);
    let var_x = integrate_weighted(&rho, |x| (x - mean_x) * (x - mean_x));

    let dpsi = spectral_derivative(state.psi(), 1)?;
    let h = state.grid().spacing();
    let mut mean_p = 0.0;
    let mut kinetic = 0.0;
    for (p, d) in state.psi().values().iter().zip(dpsi.values()) {
        mean_p += (p.conj() * d).im;
        kinetic += d.norm_sqr();
    }
    mean_p *= hbar * h;
    kinetic *= hbar * hbar / (2.0 * mass) * h;
    let potential_energy = integrate(&RealField::new(
        state.grid().clone(),
        rho.values()
            .iter()
            .zip(potential.values().values())
            .map(|(&r, &u)| r * u)
            .collect(),
    )?);
    Ok(Observables {
        norm,
        mean_x,
        mean_p,
        energy: kinetic + potential_energy,
        var_x,
    })
}

/// Time series of observables plus `<dU/dx>`, recorded while evolving.
#[derive(Debug, Clone)]
pub struct ObservableTrace {
    pub times: Vec<f64>,
    pub records: Vec<Observables>,
    pub mean_grad_u: Vec<f64>,
    pub mass: f64,
}

/// Evolve while recording observables every `stride` steps (including the
/// initial state). Returns the final state and the trace.
pub fn evolve_traced(
    state: &WaveField,
    potential: &Potential,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<(WaveField, ObservableTrace)> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveTimeStep(dt));
    }
    if stride == 0 {
        return Err(Error::Invalid("trace stride must be nonzero".into()));
    }
    let mut s = state.clone();
    let mut trace = ObservableTrace {
        times: Vec::new(),
        records: Vec::new(),
        mean_grad_u: Vec::new(),
        mass: state.constants.mass,
    };
    let mut record = |s: &WaveField| -> Result<()> {
        trace.times.push(s.time());
        trace.records.push(observables(s, potential)?);
        let rho = s.density();
        let gu = potential.derivative(1);
        trace.mean_grad_u.push(
            s.grid().spacing()
                * rho
                    .values()
                    .iter()
                    .zip(gu.values())
                    .map(|(&r, &g)| r * g)
                    .sum::<f64>(),
        );
        Ok(())
    };
    record(&s)?;
    for i in 1..=n_steps {
        step_in_place(&mut s, potential, dt)?;
        if i % stride == 0 {
            record(&s)?;
        }
    }
    Ok((s, trace))
}

/// Ehrenfest residuals from a uniformly sampled trace:
/// `r1 = max |d<x>/dt - <p>/m|`, `r2 = max |d<p>/dt + <dU/dx>|`,
/// centered differences over interior points.
#[derive(Debug, Clone, Copy)]
pub struct EhrenfestResidual {
    pub r1: f64,
    pub r2: f64,
}

pub fn ehrenfest_residual(trace: &ObservableTrace) -> Result<EhrenfestResidual> {
    let n = trace.times.len();
    if n < 3 {
        return Err(Error::TooFewSamples { need: 3, got: n });
    }
    let dt = trace.times[1] - trace.times[0];
    for w in trace.times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-12) {
            return Err(Error::Invalid("trace times are not uniformly spaced".into()));
        }
    }
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    for i in 1..n - 1 {
        let dxdt = (trace.records[i + 1].mean_x - trace.records[i - 1].mean_x) / (2.0 * dt);
        let dpdt = (trace.records[i + 1].mean_p - trace.records[i - 1].mean_p) / (2.0 * dt);
        r1 = r1.max((dxdt - trace.records[i].mean_p / trace.mass).abs());
        r2 = r2.max((dpdt + trace.mean_grad_u[i]).abs());
    }
    Ok(EhrenfestResidual { r1, r2 })
}
