//! Truncated multi-mode Fock spaces and their ladder operators.
//!
//! Basis labels `(n_1, ..., n_K)` are flattened row-major with mode 1 varying
//! slowest, so a single-mode operator on mode `m` embeds as
//! `I ⊗ ... ⊗ A ⊗ ... ⊗ I`.
//!
//! Three boundary schemes close the ladder at the cutoff `N`:
//!
//! | scheme        | `a†|N⟩`  | `a|0⟩`    |
//! |---------------|----------|-----------|
//! | Abrupt        | `0`      | `0`       |
//! | Periodic      | `+c|0⟩`  | `+c*|N⟩`  |
//! | AntiPeriodic  | `-c|0⟩`  | `-c*|N⟩`  |

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{abs, creal, Cplx, Real};

/// Largest basis the dense builders accept.
pub const MAX_DIMENSION: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum BoundaryCondition<T> {
    Abrupt,
    Periodic { c: Cplx<T> },
    AntiPeriodic { c: Cplx<T> },
}

impl<T: Real> BoundaryCondition<T> {
    pub fn periodic(c: Cplx<T>) -> Result<Self> {
        Self::check_wrap(c)?;
        Ok(Self::Periodic { c })
    }

    pub fn antiperiodic(c: Cplx<T>) -> Result<Self> {
        Self::check_wrap(c)?;
        Ok(Self::AntiPeriodic { c })
    }

    fn check_wrap(c: Cplx<T>) -> Result<()> {
        if !(abs(&c) > T::zero()) {
            return Err(Error::BoundaryCondition(format!(
                "wrap coefficient must be non-zero, got {c}"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Abrupt => Ok(()),
            Self::Periodic { c } | Self::AntiPeriodic { c } => Self::check_wrap(*c),
        }
    }

    /// The signed amplitude of `a†|N⟩` on `|0⟩`, absent for the abrupt scheme.
    pub fn wrap_amplitude(&self) -> Option<Cplx<T>> {
        match *self {
            Self::Abrupt => None,
            Self::Periodic { c } => Some(c),
            Self::AntiPeriodic { c } => Some(-c),
        }
    }

    pub fn is_wrapped(&self) -> bool {
        !matches!(self, Self::Abrupt)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Abrupt => "abrupt",
            Self::Periodic { .. } => "periodic",
            Self::AntiPeriodic { .. } => "antiperiodic",
        }
    }
}

/// `K` bosonic modes truncated at per-mode cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace<T> {
    cutoffs: Vec<usize>,
    bc: BoundaryCondition<T>,
    dimension: usize,
}

impl<T: Real> FockSpace<T> {
    pub fn new(cutoffs: Vec<usize>, bc: BoundaryCondition<T>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidSpace("at least one mode is required".into()));
        }
        bc.validate()?;
        let dimension = cutoffs.iter().try_fold(1u128, |acc, &n| {
            let d = acc * (n as u128 + 1);
            (d <= MAX_DIMENSION as u128).then_some(d).ok_or(d)
        });
        let dimension = match dimension {
            Ok(d) => d as usize,
            Err(d) => return Err(Error::DimensionTooLarge { dimension: d, limit: MAX_DIMENSION }),
        };
        if bc.is_wrapped() && cutoffs.contains(&0) {
            return Err(Error::InvalidSpace("wrapped boundary conditions need a cutoff of at least 1".into()));
        }
        Ok(Self { cutoffs, bc, dimension })
    }

    /// `num_modes` modes sharing the cutoff `n_max`.
    pub fn uniform(num_modes: usize, n_max: usize, bc: BoundaryCondition<T>) -> Result<Self> {
        Self::new(vec![n_max; num_modes], bc)
    }

    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn boundary(&self) -> &BoundaryCondition<T> {
        &self.bc
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Occupation label of a flat index.
    pub fn label(&self, mut index: usize) -> Vec<usize> {
        assert!(index < self.dimension, "index {index} out of range");
        let mut label = vec![0; self.cutoffs.len()];
        for (slot, &n) in label.iter_mut().zip(&self.cutoffs).rev() {
            *slot = index % (n + 1);
            index /= n + 1;
        }
        label
    }

    /// Flat index of an occupation label.
    pub fn index(&self, label: &[usize]) -> Result<usize> {
        if label.len() != self.cutoffs.len() {
            return Err(Error::ArityMismatch { expected: self.cutoffs.len(), got: label.len() });
        }
        let mut index = 0;
        for (&n, &cut) in label.iter().zip(&self.cutoffs) {
            if n > cut {
                return Err(Error::InvalidSpace(format!("occupation {n} exceeds cutoff {cut}")));
            }
            index = index * (cut + 1) + n;
        }
        Ok(index)
    }

    pub fn labels(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.dimension).map(|i| self.label(i))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.cutoffs.len() {
            return Err(Error::ModeOutOfRange { mode, num_modes: self.cutoffs.len() });
        }
        Ok(())
    }

    /// Single-mode annihilator for `mode` (1-based), before embedding.
    fn single_mode_annihilation(&self, n_max: usize) -> DMatrix<Cplx<T>> {
        let d = n_max + 1;
        let mut a = DMatrix::zeros(d, d);
        for k in 1..d {
            a[(k - 1, k)] = creal(T::lit(k as f64).sqrt());
        }
        if let Some(w) = self.bc.wrap_amplitude() {
            a[(n_max, 0)] = w.conj();
        }
        a
    }

    fn embed(&self, mode: usize, local: &DMatrix<Cplx<T>>) -> DMatrix<Cplx<T>> {
        let before: usize = self.cutoffs[..mode - 1].iter().map(|n| n + 1).product();
        let after: usize = self.cutoffs[mode..].iter().map(|n| n + 1).product();
        let left = DMatrix::<Cplx<T>>::identity(before, before);
        let right = DMatrix::<Cplx<T>>::identity(after, after);
        left.kronecker(local).kronecker(&right)
    }

    /// Annihilation operator `a_mode` on the full space.
    pub fn annihilation(&self, mode: usize) -> Result<DMatrix<Cplx<T>>> {
        self.check_mode(mode)?;
        let local = self.single_mode_annihilation(self.cutoffs[mode - 1]);
        Ok(self.embed(mode, &local))
    }

    /// Creation operator, the adjoint of [`Self::annihilation`].
    pub fn creation(&self, mode: usize) -> Result<DMatrix<Cplx<T>>> {
        Ok(self.annihilation(mode)?.adjoint())
    }

    /// Occupation number of `mode` at each label (not the product `a†a`).
    pub fn number_diag(&self, mode: usize) -> Result<DVector<T>> {
        self.check_mode(mode)?;
        Ok(DVector::from_iterator(
            self.dimension,
            self.labels().map(|l| T::lit(l[mode - 1] as f64)),
        ))
    }
}

/// A dense complex Hermitian matrix over some basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: DMatrix<Cplx<T>>,
}

impl<T: Real> HermitianOperator<T> {
    /// Wraps `matrix` after checking `H = H†` to `1e-12 · max|H_ij|`.
    pub fn new(matrix: DMatrix<Cplx<T>>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { left: matrix.nrows(), right: matrix.ncols() });
        }
        let scale = matrix.iter().map(abs).fold(T::zero(), |a, b| if b > a { b } else { a });
        let tolerance = T::tol(1e-12) * scale;
        let deviation = hermitian_deviation(&matrix);
        if !(deviation <= tolerance) {
            return Err(Error::NotHermitian { deviation: deviation.as_f64(), tolerance: tolerance.as_f64() });
        }
        Ok(Self { matrix })
    }

    pub fn from_diagonal(diag: &DVector<T>) -> Self {
        Self { matrix: DMatrix::from_diagonal(&diag.map(creal)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Cplx<T>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Cplx<T>> {
        self.matrix
    }

    pub fn frobenius_norm(&self) -> T {
        self.matrix.iter().map(|z| z.re * z.re + z.im * z.im).fold(T::zero(), |a, b| a + b).sqrt()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == Cplx::new(T::zero(), T::zero())))
    }

    pub fn diagonal_real(&self) -> DVector<T> {
        self.matrix.diagonal().map(|z| z.re)
    }

    pub(crate) fn from_trusted(matrix: DMatrix<Cplx<T>>) -> Self {
        Self { matrix }
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }
}

/// Largest `|H_ij - conj(H_ji)|`.
pub fn hermitian_deviation<T: Real>(m: &DMatrix<Cplx<T>>) -> T {
    let n = m.nrows();
    let mut dev = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = abs(&(m[(i, j)] - m[(j, i)].conj()));
            if d > dev {
                dev = d;
            }
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use proptest::prelude::*;

    type C = Cplx<f64>;

    fn anti1() -> BoundaryCondition<f64> {
        BoundaryCondition::antiperiodic(C::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn abrupt_annihilation() {
        let s = FockSpace::<f64>::uniform(1, 2, BoundaryCondition::Abrupt).unwrap();
        let a = s.annihilation(1).unwrap();
        assert_eq!(a[(0, 1)], C::new(1.0, 0.0));
        assert_eq!(a[(1, 2)], C::new(2f64.sqrt(), 0.0));
        assert!(a.column(0).iter().all(|z| *z == C::new(0.0, 0.0)));
        assert_eq!(a.iter().filter(|z| **z != C::new(0.0, 0.0)).count(), 2);
    }

    #[test]
    fn wrapped_annihilation_corner() {
        let s = FockSpace::uniform(1, 2, anti1()).unwrap();
        assert_eq!(s.annihilation(1).unwrap()[(2, 0)], C::new(-1.0, 0.0));
        assert_eq!(s.creation(1).unwrap()[(0, 2)], C::new(-1.0, 0.0));

        let p = FockSpace::uniform(1, 2, BoundaryCondition::periodic(C::new(0.0, 2.0)).unwrap()).unwrap();
        assert_eq!(p.annihilation(1).unwrap()[(2, 0)], C::new(0.0, -2.0));
        assert_eq!(p.creation(1).unwrap()[(0, 2)], C::new(0.0, 2.0));
    }

    #[test]
    fn abrupt_creation() {
        let s = FockSpace::<f64>::uniform(1, 2, BoundaryCondition::Abrupt).unwrap();
        let ad = s.creation(1).unwrap();
        assert_eq!(ad[(1, 0)], C::new(1.0, 0.0));
        assert_eq!(ad[(2, 1)], C::new(2f64.sqrt(), 0.0));
        assert!(ad.column(2).iter().all(|z| *z == C::new(0.0, 0.0)));
    }

    #[test]
    fn zero_wrap_rejected() {
        assert!(BoundaryCondition::<f64>::periodic(C::new(0.0, 0.0)).is_err());
        assert!(BoundaryCondition::<f64>::AntiPeriodic { c: C::new(0.0, 0.0) }.validate().is_err());
        assert!(FockSpace::uniform(1, 0, anti1()).is_err());
    }

    #[test]
    fn mode_out_of_range() {
        let s = FockSpace::<f64>::uniform(2, 1, BoundaryCondition::Abrupt).unwrap();
        assert!(matches!(s.annihilation(0), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(s.creation(3), Err(Error::ModeOutOfRange { .. })));
        assert!(s.number_diag(3).is_err());
    }

    #[test]
    fn dimension_guard() {
        assert!(matches!(
            FockSpace::<f64>::uniform(3, 30, BoundaryCondition::Abrupt),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(FockSpace::<f64>::uniform(64, 9, BoundaryCondition::Abrupt).is_err());
        assert_eq!(FockSpace::<f64>::uniform(2, 140, BoundaryCondition::Abrupt).unwrap().dimension(), 141 * 141);
    }

    #[test]
    fn number_diagonals() {
        let s = FockSpace::<f64>::uniform(1, 3, BoundaryCondition::Abrupt).unwrap();
        assert_eq!(s.number_diag(1).unwrap().as_slice(), &[0.0, 1.0, 2.0, 3.0]);
        let t = FockSpace::<f64>::uniform(2, 1, BoundaryCondition::Abrupt).unwrap();
        assert_eq!(t.number_diag(2).unwrap().as_slice(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(t.number_diag(1).unwrap().as_slice(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn wrapped_number_product_differs_at_vacuum() {
        // multiply the wrapped ladders directly and compare with the label diagonal
        let c = cplx(1.2f64, -1.6);
        let s = FockSpace::uniform(1, 2, BoundaryCondition::antiperiodic(c).unwrap()).unwrap();
        let n = s.creation(1).unwrap() * s.annihilation(1).unwrap();
        let labels = s.number_diag(1).unwrap();
        assert_eq!(labels.as_slice(), &[0.0, 1.0, 2.0]);
        // |c|^2 = 4 where the label diagonal has 0
        assert!((n[(0, 0)].re - 4.0).abs() < 1e-14 && n[(0, 0)].im.abs() < 1e-15);
        for k in 1..3 {
            assert!((n[(k, k)] - C::new(k as f64, 0.0)).norm() < 1e-14);
        }
        let off: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| n[(i, j)].norm()).sum();
        assert!(off < 1e-15);
    }

    #[test]
    fn abrupt_number_product_matches_labels() {
        for nmax in [1usize, 4, 9] {
            let s = FockSpace::<f64>::uniform(1, nmax, BoundaryCondition::Abrupt).unwrap();
            let n = s.creation(1).unwrap() * s.annihilation(1).unwrap();
            let expected = DMatrix::from_diagonal(&s.number_diag(1).unwrap().map(|x| C::new(x, 0.0)));
            assert!((n - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn distinct_modes_commute() {
        for bc in [BoundaryCondition::Abrupt, anti1(), BoundaryCondition::periodic(C::new(0.3, 0.4)).unwrap()] {
            let s = FockSpace::new(vec![2, 3], bc).unwrap();
            let a1 = s.annihilation(1).unwrap();
            let a2 = s.annihilation(2).unwrap();
            let ad2 = s.creation(2).unwrap();
            assert_eq!(&a1 * &a2, &a2 * &a1);
            assert_eq!(&a1 * &ad2, &ad2 * &a1);
        }
    }

    #[test]
    fn hermitian_operator_validation() {
        let good = DMatrix::from_row_slice(2, 2, &[C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, -1.0), C::new(2.0, 0.0)]);
        assert!(HermitianOperator::new(good).is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 1.0), C::new(2.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(bad), Err(Error::NotHermitian { .. })));
        let rect = DMatrix::<C>::zeros(2, 3);
        assert!(HermitianOperator::new(rect).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let s = FockSpace::<f32>::uniform(1, 3, BoundaryCondition::Abrupt).unwrap();
        let a = s.annihilation(1).unwrap();
        assert!((a[(2, 3)].re - 3f32.sqrt()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn label_index_bijection(cuts in prop::collection::vec(0usize..4, 1..4)) {
            let s = FockSpace::<f64>::new(cuts, BoundaryCondition::Abrupt).unwrap();
            for i in 0..s.dimension() {
                prop_assert_eq!(s.index(&s.label(i)).unwrap(), i);
            }
        }

        #[test]
        fn creation_is_adjoint(nmax in 1usize..6, re in -2.0f64..2.0, im in -2.0f64..2.0, which in 0usize..3) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let c = C::new(re, im);
            let bc = match which {
                0 => BoundaryCondition::Abrupt,
                1 => BoundaryCondition::periodic(c).unwrap(),
                _ => BoundaryCondition::antiperiodic(c).unwrap(),
            };
            let s = FockSpace::new(vec![nmax, 1], bc).unwrap();
            for m in 1..=2 {
                prop_assert_eq!(s.creation(m).unwrap(), s.annihilation(m).unwrap().adjoint());
            }
        }
    }
}
