//! The initial, problem, and interpolated Hamiltonians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, HermitianOperator};
use crate::polynomial::DiophantinePolynomial;
use crate::scalar::{abs, creal, Cplx, Real};

/// Per-mode coherent amplitudes `α_i`, all non-zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentParams<T> {
    alphas: Vec<Cplx<T>>,
}

impl<T: Real> CoherentParams<T> {
    pub fn new(alphas: Vec<Cplx<T>>) -> Result<Self> {
        for (i, a) in alphas.iter().enumerate() {
            let m = abs(a);
            if !(m > T::lit(1e-12)) {
                return Err(Error::ZeroAlpha { index: i + 1, magnitude: m.as_f64() });
            }
        }
        Ok(Self { alphas })
    }

    /// The same real `α` on every mode.
    pub fn uniform_real(num_modes: usize, alpha: T) -> Result<Self> {
        Self::new(vec![creal(alpha); num_modes])
    }

    pub fn alphas(&self) -> &[Cplx<T>] {
        &self.alphas
    }

    pub(crate) fn check_arity(&self, space: &FockSpace<T>) -> Result<()> {
        if self.alphas.len() != space.num_modes() {
            return Err(Error::ArityMismatch { expected: space.num_modes(), got: self.alphas.len() });
        }
        Ok(())
    }
}

/// Total evolution time and number of integration steps (`ħ = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    pub total_time: T,
    pub num_steps: usize,
}

impl<T: Real> Schedule<T> {
    pub fn new(total_time: T, num_steps: usize) -> Result<Self> {
        if !(total_time > T::zero()) || !total_time.is_finite() {
            return Err(Error::InvalidSchedule(format!("total time must be positive, got {total_time}")));
        }
        if num_steps == 0 {
            return Err(Error::InvalidSchedule("at least one step is required".into()));
        }
        Ok(Self { total_time, num_steps })
    }

    pub fn step(&self) -> T {
        self.total_time / T::lit(self.num_steps as f64)
    }

    /// Dimensionless parameter `s = t / T` at the midpoint of step `m`.
    pub fn midpoint(&self, m: usize) -> T {
        (T::lit(m as f64) + T::lit(0.5)) / T::lit(self.num_steps as f64)
    }
}

/// `H_I = Σ_i (a†_i − α_i*)(a_i − α_i)` with the space's boundary ladders.
pub fn build_hi<T: Real>(space: &FockSpace<T>, params: &CoherentParams<T>) -> Result<HermitianOperator<T>> {
    params.check_arity(space)?;
    let dim = space.dimension();
    let mut h = DMatrix::<Cplx<T>>::zeros(dim, dim);
    for (i, alpha) in params.alphas().iter().enumerate() {
        let mut shifted = space.annihilation(i + 1)?;
        for d in 0..dim {
            shifted[(d, d)] -= *alpha;
        }
        h += shifted.ad_mul(&shifted);
    }
    HermitianOperator::new(h)
}

/// Diagonal `H_P` with `D(n_1, ..., n_K)^2` at each label.
pub fn build_hp<T: Real>(space: &FockSpace<T>, poly: &DiophantinePolynomial) -> Result<HermitianOperator<T>> {
    if poly.num_vars() != space.num_modes() {
        return Err(Error::ArityMismatch { expected: space.num_modes(), got: poly.num_vars() });
    }
    let diag = space
        .labels()
        .map(|l| {
            let point: Vec<u64> = l.iter().map(|&n| n as u64).collect();
            poly.squared_value::<T>(&point)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(HermitianOperator::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// `(1 − s)·H_I + s·H_P`.
pub fn interpolate<T: Real>(
    hi: &HermitianOperator<T>,
    hp: &HermitianOperator<T>,
    s: T,
) -> Result<HermitianOperator<T>> {
    hi.check_same_dim(hp)?;
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::InvalidParameter(format!("{s} is outside [0, 1]")));
    }
    let a = creal(T::one() - s);
    let b = creal(s);
    let m = hi.matrix().zip_map(hp.matrix(), |x, y| a * x + b * y);
    Ok(HermitianOperator::from_trusted(m))
}

/// Frobenius norm of `[H_I, H_P]`.
pub fn commutator_norm<T: Real>(hi: &HermitianOperator<T>, hp: &HermitianOperator<T>) -> Result<T> {
    hi.check_same_dim(hp)?;
    let c = hi.matrix() * hp.matrix() - hp.matrix() * hi.matrix();
    Ok(HermitianOperator::from_trusted(c).frobenius_norm())
}

/// `H_P − H_I`, the operator whose eigenpair matrix elements the scans track.
pub fn difference<T: Real>(hi: &HermitianOperator<T>, hp: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    hi.check_same_dim(hp)?;
    Ok(HermitianOperator::from_trusted(hp.matrix() - hi.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::BoundaryCondition;
    use crate::spectral::eigendecompose;

    type C = Cplx<f64>;

    fn abrupt(n: usize) -> FockSpace<f64> {
        FockSpace::uniform(1, n, BoundaryCondition::Abrupt).unwrap()
    }

    #[test]
    fn hi_small_entries() {
        let hi = build_hi(&abrupt(2), &CoherentParams::uniform_real(1, 1.0).unwrap()).unwrap();
        let m = hi.matrix();
        assert!((m[(0, 0)] - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(0, 1)] - C::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(m.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn hi_abrupt_tridiagonal_structure() {
        let alpha = C::new(0.7, -0.4);
        let n = 6;
        let hi = build_hi(&abrupt(n), &CoherentParams::new(vec![alpha]).unwrap()).unwrap();
        let m = hi.matrix();
        for i in 0..=n {
            for j in 0..=n {
                let expected = if i == j {
                    C::new(i as f64 + alpha.norm_sqr(), 0.0)
                } else if j == i + 1 {
                    -alpha.conj() * ((i + 1) as f64).sqrt()
                } else if i == j + 1 {
                    -alpha * (i as f64).sqrt()
                } else {
                    C::new(0.0, 0.0)
                };
                assert!((m[(i, j)] - expected).norm() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn hi_wrapped_adds_corners_and_vacuum_shift() {
        let alpha = C::new(1.0, 0.5);
        let c = C::new(0.5, 0.5);
        let n = 4;
        let wrapped = FockSpace::uniform(1, n, BoundaryCondition::antiperiodic(c).unwrap()).unwrap();
        let params = CoherentParams::new(vec![alpha]).unwrap();
        let hw = build_hi(&wrapped, &params).unwrap();
        let ha = build_hi(&abrupt(n), &params).unwrap();
        let diff = hw.matrix() - ha.matrix();
        // a|0> = -c*|N>, a†|N> = -c|0>: H_I gains -α a† - α* a corner terms and |c|^2 on |0><0|
        let mut expected = DMatrix::<C>::zeros(n + 1, n + 1);
        expected[(0, 0)] = C::new(c.norm_sqr(), 0.0);
        expected[(0, n)] = alpha * c;
        expected[(n, 0)] = alpha.conj() * c.conj();
        assert!((diff - expected).norm() < 1e-14);
    }

    #[test]
    fn hi_ground_state_is_coherent_at_large_cutoff() {
        let hi = build_hi(&abrupt(40), &CoherentParams::uniform_real(1, 1.0).unwrap()).unwrap();
        let sys = eigendecompose(&hi).unwrap();
        assert!(sys.energies[0] >= -1e-12 && sys.energies[0] <= 1e-8);
        // closed form amplitudes e^{-1/2}/sqrt(n!)
        let mut amp = (-0.5f64).exp();
        let mut overlap = C::new(0.0, 0.0);
        for k in 0..=40 {
            if k > 0 {
                amp /= (k as f64).sqrt();
            }
            overlap += sys.vectors[(k, 0)].conj() * amp;
        }
        assert!(overlap.norm_sqr() > 1.0 - 1e-8);
    }

    #[test]
    fn hi_rejects_bad_params() {
        assert!(matches!(CoherentParams::new(vec![C::new(0.0, 0.0)]), Err(Error::ZeroAlpha { index: 1, .. })));
        let p = CoherentParams::uniform_real(2, 1.0).unwrap();
        assert!(matches!(build_hi(&abrupt(2), &p), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn hp_diagonals() {
        let p = DiophantinePolynomial::parse("x1 - 2").unwrap();
        let hp = build_hp(&abrupt(4), &p).unwrap();
        assert!(hp.is_diagonal());
        assert_eq!(hp.diagonal_real().as_slice(), &[4.0, 1.0, 0.0, 1.0, 4.0]);

        let q = DiophantinePolynomial::parse("3*x1 - 1").unwrap();
        assert_eq!(build_hp(&abrupt(3), &q).unwrap().diagonal_real().as_slice(), &[1.0, 4.0, 25.0, 64.0]);

        let r = DiophantinePolynomial::parse("(x1+1)*(x2+1) - 6").unwrap();
        let s2 = FockSpace::<f64>::uniform(2, 3, BoundaryCondition::Abrupt).unwrap();
        let hr = build_hp(&s2, &r).unwrap();
        let zeros: Vec<Vec<usize>> = s2.labels().zip(hr.diagonal_real().iter()).filter(|(_, &v)| v == 0.0).map(|(l, _)| l).collect();
        assert_eq!(zeros, vec![vec![1, 2], vec![2, 1]]);

        assert!(matches!(build_hp(&abrupt(3), &r), Err(Error::ArityMismatch { .. })));
        let big = DiophantinePolynomial::parse("x1^9").unwrap();
        assert!(matches!(build_hp(&abrupt(60), &big), Err(Error::PrecisionGuard { .. })));
    }

    #[test]
    fn interpolation_endpoints_and_linearity() {
        let space = FockSpace::uniform(1, 3, BoundaryCondition::periodic(C::new(0.0, 1.0)).unwrap()).unwrap();
        let hi = build_hi(&space, &CoherentParams::new(vec![C::new(0.3, 0.9)]).unwrap()).unwrap();
        let hp = build_hp(&space, &DiophantinePolynomial::parse("x1^2 - 3").unwrap()).unwrap();
        assert_eq!(interpolate(&hi, &hp, 0.0).unwrap(), hi);
        assert_eq!(interpolate(&hi, &hp, 1.0).unwrap(), hp);
        let mid = interpolate(&hi, &hp, 0.5).unwrap();
        let expected = (hi.matrix() + hp.matrix()) * C::new(0.5, 0.0);
        assert!((mid.matrix() - expected).norm() < 1e-14);
        for (s1, s2) in [(0.1, 0.7), (0.0, 1.0), (0.25, 0.3)] {
            let lhs = interpolate(&hi, &hp, s1).unwrap().into_matrix() + interpolate(&hi, &hp, s2).unwrap().into_matrix();
            let rhs = interpolate(&hi, &hp, (s1 + s2) / 2.0).unwrap().into_matrix() * C::new(2.0, 0.0);
            assert!((lhs - rhs).norm() < 1e-12);
        }
        assert!(interpolate(&hi, &hp, 1.5).is_err());
        assert!(interpolate(&hi, &hp, f64::NAN).is_err());
        let other = build_hi(&abrupt(2), &CoherentParams::uniform_real(1, 1.0).unwrap()).unwrap();
        assert!(matches!(interpolate(&hi, &other, 0.5), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn commutator_examples() {
        let space = abrupt(2);
        let hi = build_hi(&space, &CoherentParams::uniform_real(1, 1.0).unwrap()).unwrap();
        let hc = build_hp(&space, &DiophantinePolynomial::parse("5").unwrap()).unwrap();
        assert_eq!(commutator_norm(&hi, &hc).unwrap(), 0.0);
        assert_eq!(commutator_norm(&hi, &hi).unwrap(), 0.0);
        let hp = build_hp(&space, &DiophantinePolynomial::parse("x1 - 2").unwrap()).unwrap();
        // hand-multiplied 3x3: H_I = [[1,-1,0],[-1,2,-√2],[0,-√2,3]], H_P = diag(4,1,0)
        // [H_I,H_P]_ij = H_I_ij (p_j - p_i): (0,1) = -1*(1-4) = 3, (1,2) = -√2*(0-1) = √2
        let expected = (2.0 * (9.0 + 2.0f64)).sqrt();
        assert!((commutator_norm(&hi, &hp).unwrap() - expected).abs() < 1e-13);
    }
}
