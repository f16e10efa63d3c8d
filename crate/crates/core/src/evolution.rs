//! Initial coherent state and time evolution under the interpolated Hamiltonian.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, HermitianOperator};
use crate::hamiltonian::{interpolate, CoherentParams, Schedule};
use crate::scalar::{creal, norm_sqr, Cplx, Real};
use crate::spectral::eigh;

/// Coherent-state tail mass beyond the cutoff that is still accepted.
pub const MAX_TAIL_MASS: f64 = 1e-6;
/// Fewest integration steps `evolve` accepts.
pub const MIN_STEPS: usize = 100;
/// Norm drift at which an evolution is aborted.
pub const ABORT_DRIFT: f64 = 1e-7;

/// Complex amplitudes over the flat Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: DVector<Cplx<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: DVector<Cplx<T>>) -> Self {
        Self { amplitudes }
    }

    /// `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut a = DVector::zeros(dim);
        a[index] = creal(T::one());
        Self { amplitudes: a }
    }

    pub fn amplitudes(&self) -> &DVector<Cplx<T>> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(norm_sqr).fold(T::zero(), |a, b| a + b).sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = creal(self.norm());
        self.amplitudes.iter_mut().for_each(|z| *z /= n);
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Cplx<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm();
        if !((n - T::one()).abs() <= T::tol(1e-9)) {
            return Err(Error::NotNormalized { norm: n.as_f64() });
        }
        Ok(())
    }
}

/// Truncated coherent state together with the probability lost to truncation.
#[derive(Debug, Clone)]
pub struct CoherentState<T: Real> {
    pub state: StateVector<T>,
    pub tail_mass: T,
}

/// `e^{−|α|²/2} α^n / √(n!)` for `n = 0..=n_max`, without renormalization.
pub fn coherent_amplitudes<T: Real>(alpha: Cplx<T>, n_max: usize) -> Vec<Cplx<T>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut amp = creal((-norm_sqr(&alpha) / T::lit(2.0)).exp());
    out.push(amp);
    for n in 1..=n_max {
        amp = amp * alpha / creal(T::lit(n as f64).sqrt());
        out.push(amp);
    }
    out
}

/// Poisson mass `Σ_{n > n_max} e^{−x} x^n / n!` with `x = |α|²`, summed directly.
fn poisson_tail<T: Real>(x: T, n_max: usize) -> T {
    let mut term = (-x).exp();
    for n in 1..=n_max + 1 {
        term = term * x / T::lit(n as f64);
    }
    let mut sum = T::zero();
    let mut n = n_max + 1;
    loop {
        sum += term;
        n += 1;
        term = term * x / T::lit(n as f64);
        if term <= sum * T::default_epsilon() || term == T::zero() || n > n_max + 100_000 {
            return sum;
        }
    }
}

/// Product of single-mode coherent states, renormalized after truncation.
pub fn coherent_state<T: Real>(space: &FockSpace<T>, params: &CoherentParams<T>) -> Result<CoherentState<T>> {
    params.check_arity(space)?;
    let mut log_kept = T::zero();
    let mut amps = DVector::from_element(1, creal(T::one()));
    for (alpha, &n_max) in params.alphas().iter().zip(space.cutoffs()) {
        log_kept += (-poisson_tail(norm_sqr(alpha), n_max)).ln_1p();
        let mode = DVector::from_vec(coherent_amplitudes(*alpha, n_max));
        amps = amps.kronecker(&mode);
    }
    let tail_mass = -log_kept.exp_m1();
    if tail_mass > T::lit(MAX_TAIL_MASS) {
        return Err(Error::TailMass { tail: tail_mass.as_f64(), limit: MAX_TAIL_MASS });
    }
    Ok(CoherentState { state: StateVector::new(amps).normalized(), tail_mass })
}

/// `|amplitude|²` at every label.
pub fn measure_probabilities<T: Real>(state: &StateVector<T>) -> Vec<T> {
    state.amplitudes.iter().map(norm_sqr).collect()
}

#[derive(Debug, Clone)]
pub struct Sample<T: Real> {
    pub s: T,
    pub state: StateVector<T>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub samples: Vec<Sample<T>>,
    pub final_state: StateVector<T>,
    /// `|‖ψ(T)‖ − 1|`.
    pub norm_drift: T,
}

/// Midpoint-exponential propagation of `psi0` under `H(t) = H_I + (t/T)(H_P − H_I)`.
///
/// Each step applies `exp(−i Δt H(s_{m+½}))` through the eigendecomposition of
/// the midpoint Hamiltonian. States are recorded at the step boundaries nearest
/// to each requested `s` in `sample_at`.
pub fn evolve<T: Real>(
    hi: &HermitianOperator<T>,
    hp: &HermitianOperator<T>,
    schedule: &Schedule<T>,
    psi0: &StateVector<T>,
    sample_at: &[T],
) -> Result<Trajectory<T>> {
    hi.check_same_dim(hp)?;
    if psi0.dim() != hi.dim() {
        return Err(Error::DimensionMismatch { left: psi0.dim(), right: hi.dim() });
    }
    if schedule.num_steps < MIN_STEPS {
        return Err(Error::InvalidSchedule(format!(
            "{} steps requested, at least {MIN_STEPS} required",
            schedule.num_steps
        )));
    }
    psi0.check_normalized()?;
    let steps = schedule.num_steps;
    let mut targets = Vec::with_capacity(sample_at.len());
    for &s in sample_at {
        if !(s >= T::zero() && s <= T::one()) {
            return Err(Error::InvalidParameter(format!("sample point {s} is outside [0, 1]")));
        }
        let m = (s * T::lit(steps as f64)).round().to_usize().unwrap_or(0).min(steps);
        targets.push(m);
    }
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by_key(|&i| (targets[i], i));

    let dt = schedule.step();
    let mut samples: Vec<Option<Sample<T>>> = vec![None; targets.len()];
    let mut next = 0;
    let mut record = |m: usize, psi: &DVector<Cplx<T>>, samples: &mut Vec<Option<Sample<T>>>| {
        while next < order.len() && targets[order[next]] == m {
            samples[order[next]] = Some(Sample {
                s: T::lit(m as f64) / T::lit(steps as f64),
                state: StateVector::new(psi.clone()),
            });
            next += 1;
        }
    };

    let mut psi = psi0.amplitudes.clone();
    record(0, &psi, &mut samples);
    for m in 0..steps {
        let h = interpolate(hi, hp, schedule.midpoint(m))?;
        let sys = eigh(h.matrix())?;
        let mut coeffs = sys.vectors.ad_mul(&psi);
        for (c, &e) in coeffs.iter_mut().zip(&sys.energies) {
            let theta = -(e * dt);
            *c *= Cplx::new(theta.cos(), theta.sin());
        }
        psi = &sys.vectors * coeffs;
        let drift = (psi.iter().map(norm_sqr).fold(T::zero(), |a, b| a + b).sqrt() - T::one()).abs();
        if drift > T::tol(ABORT_DRIFT) {
            return Err(Error::NormDrift { drift: drift.as_f64(), limit: ABORT_DRIFT, step: m + 1 });
        }
        record(m + 1, &psi, &mut samples);
    }
    let final_state = StateVector::new(psi);
    let norm_drift = (final_state.norm() - T::one()).abs();
    Ok(Trajectory {
        samples: samples.into_iter().map(|s| s.expect("every target step is visited")).collect(),
        final_state,
        norm_drift,
    })
}
