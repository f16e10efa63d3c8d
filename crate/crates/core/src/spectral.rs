//! Dense Hermitian eigensolves, the eigenpair matrix-element scan, and the
//! single-mode recurrence and partial-sum probes.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, HermitianOperator};
use crate::hamiltonian::{commutator_norm, difference, interpolate, CoherentParams};
use crate::polynomial::DiophantinePolynomial;
use crate::scalar::{abs, creal, norm_sqr, Cplx, Real};

/// Relative energy separation below which two eigenpairs count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Relative magnitude below which `⟨e|H_P − H_I|f⟩` counts as vanishing.
pub const VIOLATION_TOL: f64 = 1e-10;

/// Ascending energies with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: Real> {
    pub energies: Vec<T>,
    pub vectors: DMatrix<Cplx<T>>,
}

impl<T: Real> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `max_k ‖H v_k − E_k v_k‖₂`.
    pub fn max_residual(&self, h: &HermitianOperator<T>) -> T {
        let hv = h.matrix() * &self.vectors;
        (0..self.dim())
            .map(|k| {
                let e = creal(self.energies[k]);
                hv.column(k)
                    .iter()
                    .zip(self.vectors.column(k).iter())
                    .map(|(a, b)| norm_sqr(&(*a - e * *b)))
                    .fold(T::zero(), |x, y| x + y)
                    .sqrt()
            })
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Largest deviation of `V†V` from the identity.
    pub fn orthonormality_defect(&self) -> T {
        let g = self.vectors.ad_mul(&self.vectors);
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { creal(T::one()) } else { creal(T::zero()) };
                let d = abs(&(g[(i, j)] - target));
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Raw Hermitian eigensolve: sorted ascending, phases fixed, no verification.
pub(crate) fn eigh<T: Real>(h: &DMatrix<Cplx<T>>) -> Result<EigenSystem<T>> {
    let n = h.nrows();
    let max_iter = 1000 + 200 * n;
    let eig = SymmetricEigen::try_new(h.clone(), T::default_epsilon(), max_iter)
        .ok_or_else(|| Error::Solver(format!("no convergence in {max_iter} sweeps at dimension {n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let energies: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Solver("non-finite eigenvalue".into()));
    }
    let mut vectors = DMatrix::<Cplx<T>>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        // largest-magnitude component made real positive; first index wins ties
        let mut pivot = 0;
        let mut best = T::zero();
        for (i, z) in col.iter().enumerate() {
            let m = norm_sqr(z);
            if m > best {
                best = m;
                pivot = i;
            }
        }
        let p = col[pivot];
        let phase = p.conj() / creal(abs(&p));
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
        vectors[(pivot, dst)] = creal(abs(&p));
    }
    Ok(EigenSystem { energies, vectors })
}

/// Full spectrum of `h`, checked against the residual and orthonormality bounds.
pub fn eigendecompose<T: Real>(h: &HermitianOperator<T>) -> Result<EigenSystem<T>> {
    let sys = eigh(h.matrix())?;
    let scale = h.frobenius_norm();
    let residual = sys.max_residual(h);
    if residual > T::tol(1e-8) * scale {
        return Err(Error::Solver(format!("eigen residual {residual:e} exceeds 1e-8 * {scale:e}")));
    }
    let defect = sys.orthonormality_defect();
    if defect > T::tol(1e-10) {
        return Err(Error::Solver(format!("eigenvectors off orthonormal by {defect:e}")));
    }
    Ok(sys)
}

/// One `|⟨v_i|H_P − H_I|v_j⟩|` sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow<T> {
    pub s: T,
    pub pair_i: usize,
    pub pair_j: usize,
    pub abs_element: T,
    pub degenerate: bool,
}

/// Minimum over the grid for one eigenpair `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary<T> {
    pub pair_i: usize,
    pub pair_j: usize,
    /// Minimum over non-degenerate samples, with the `s` where it occurred.
    pub min: Option<(T, T)>,
    pub degenerate_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalMin<T> {
    pub value: T,
    pub s: T,
    pub pair_i: usize,
    pub pair_j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionScanReport<T> {
    pub grid: Vec<T>,
    pub rows: Vec<ScanRow<T>>,
    pub pairs: Vec<PairSummary<T>>,
    pub global_min: Option<GlobalMin<T>>,
    pub commutator_norm: T,
    pub difference_norm: T,
    /// `E_1 − E_0` at each grid point (absent at dimension 1).
    pub gaps: Vec<Option<T>>,
    /// Pairs flagged degenerate at one or more grid points.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

impl<T: Real> ConditionScanReport<T> {
    pub fn violation_threshold(&self) -> T {
        T::tol(VIOLATION_TOL) * self.difference_norm
    }

    /// True when some non-degenerate element falls below the vanishing threshold.
    pub fn violated(&self) -> bool {
        self.global_min.is_some_and(|g| g.value < self.violation_threshold())
    }

    pub fn min_gap(&self) -> Option<T> {
        self.gaps.iter().flatten().copied().fold(None, |acc, g| match acc {
            Some(a) if a <= g => Some(a),
            _ => Some(g),
        })
    }
}

struct GridSample<T> {
    rows: Vec<ScanRow<T>>,
    gap: Option<T>,
}

/// Scans `|⟨e(s)|H_P − H_I|f(s)⟩|` over every eigenpair at the interior grid
/// `s_g = g / (grid_points + 1)`, `g = 1..=grid_points`.
pub fn condition_scan<T: Real>(
    hi: &HermitianOperator<T>,
    hp: &HermitianOperator<T>,
    grid_points: usize,
) -> Result<ConditionScanReport<T>> {
    let delta = difference(hi, hp)?;
    if grid_points == 0 {
        return Err(Error::InvalidParameter("grid needs at least one point".into()));
    }
    let comm = commutator_norm(hi, hp)?;
    let grid: Vec<T> = (1..=grid_points)
        .map(|g| T::lit(g as f64) / T::lit((grid_points + 1) as f64))
        .collect();

    let samples: Vec<GridSample<T>> = grid
        .par_iter()
        .map(|&s| scan_point(hi, hp, &delta, s))
        .collect::<Result<_>>()?;

    let n = hi.dim();
    let mut pairs: Vec<PairSummary<T>> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(pair_i, pair_j)| PairSummary { pair_i, pair_j, min: None, degenerate_samples: 0 })
        .collect();
    let mut global_min: Option<GlobalMin<T>> = None;
    let mut rows = Vec::with_capacity(samples.len() * pairs.len());
    let mut gaps = Vec::with_capacity(samples.len());
    for sample in samples {
        gaps.push(sample.gap);
        for (row, pair) in sample.rows.iter().zip(pairs.iter_mut()) {
            if row.degenerate {
                pair.degenerate_samples += 1;
                continue;
            }
            if pair.min.is_none_or(|(m, _)| row.abs_element < m) {
                pair.min = Some((row.abs_element, row.s));
            }
            if global_min.is_none_or(|g| row.abs_element < g.value) {
                global_min = Some(GlobalMin { value: row.abs_element, s: row.s, pair_i: row.pair_i, pair_j: row.pair_j });
            }
        }
        rows.extend(sample.rows);
    }
    let degenerate_pairs = pairs
        .iter()
        .filter(|p| p.degenerate_samples > 0)
        .map(|p| (p.pair_i, p.pair_j))
        .collect();
    Ok(ConditionScanReport {
        grid,
        rows,
        pairs,
        global_min,
        commutator_norm: comm,
        difference_norm: delta.frobenius_norm(),
        gaps,
        degenerate_pairs,
    })
}

fn scan_point<T: Real>(
    hi: &HermitianOperator<T>,
    hp: &HermitianOperator<T>,
    delta: &HermitianOperator<T>,
    s: T,
) -> Result<GridSample<T>> {
    let h = interpolate(hi, hp, s)?;
    let sys = eigendecompose(&h)?;
    let elements = sys.vectors.ad_mul(&(delta.matrix() * &sys.vectors));
    let degeneracy = T::tol(DEGENERACY_TOL) * h.frobenius_norm();
    let n = sys.dim();
    let mut rows = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            rows.push(ScanRow {
                s,
                pair_i: i,
                pair_j: j,
                abs_element: abs(&elements[(i, j)]),
                degenerate: (sys.energies[j] - sys.energies[i]).abs() < degeneracy,
            });
        }
    }
    let gap = (n > 1).then(|| sys.energies[1] - sys.energies[0]);
    Ok(GridSample { rows, gap })
}

/// Componentwise residual of the single-mode three-term recurrence satisfied
/// by eigenvector `which` of `H(s)`:
///
/// `−(1−s)(α √k f_{k−1} + α* √(k+1) f_{k+1}) − [E − s D(k)² − (1−s)(k + |α|²)] f_k`
///
/// Wrapped schemes replace the out-of-range neighbours with the wrap terms
/// and use `|c|²` for the vacuum occupation; the abrupt scheme drops them.
pub fn recurrence_residual<T: Real>(
    system: &EigenSystem<T>,
    which: usize,
    s: T,
    params: &CoherentParams<T>,
    poly: &DiophantinePolynomial,
    space: &FockSpace<T>,
) -> Result<Vec<T>> {
    if space.num_modes() != 1 {
        return Err(Error::SingleModeOnly(space.num_modes()));
    }
    params.check_arity(space)?;
    if poly.num_vars() != 1 {
        return Err(Error::ArityMismatch { expected: 1, got: poly.num_vars() });
    }
    if system.dim() != space.dimension() {
        return Err(Error::DimensionMismatch { left: system.dim(), right: space.dimension() });
    }
    if which >= system.dim() {
        return Err(Error::EigenIndex { index: which, dimension: system.dim() });
    }
    if !(s >= T::zero() && s < T::one()) {
        return Err(Error::InvalidParameter(format!("recurrence needs 0 <= s < 1, got {s}")));
    }
    let n_max = space.cutoffs()[0];
    let f = system.vectors.column(which);
    let energy = creal(system.energies[which]);
    let alpha = params.alphas()[0];
    let alpha_sq = norm_sqr(&alpha);
    let wrap = space.boundary().wrap_amplitude();
    let one_minus_s = creal(T::one() - s);
    let s_c = creal(s);

    (0..=n_max)
        .map(|k| {
            let sqrt = |x: usize| creal(T::lit(x as f64).sqrt());
            let lower = if k >= 1 {
                sqrt(k) * f[k - 1]
            } else {
                wrap.map_or(creal(T::zero()), |w| w * f[n_max])
            };
            let upper = if k < n_max {
                sqrt(k + 1) * f[k + 1]
            } else {
                wrap.map_or(creal(T::zero()), |w| w.conj() * f[0])
            };
            let occupation = match wrap {
                Some(w) if k == 0 => norm_sqr(&w),
                _ => T::lit(k as f64),
            };
            let d_sq = creal(poly.squared_value::<T>(&[k as u64])?);
            let lhs = -one_minus_s * (alpha * lower + alpha.conj() * upper);
            let rhs = (energy - s_c * d_sq - one_minus_s * creal(occupation + alpha_sq)) * f[k];
            Ok(abs(&(lhs - rhs)))
        })
        .collect()
}

/// Truncated orthogonality sum, weighted sum, and the bounded-variation sum
/// of `D(n)²`, each over `n < upto`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSums<T> {
    /// `Σ e*_n f_n`
    pub overlap: Cplx<T>,
    /// `Σ D(n)² e*_n f_n`
    pub weighted: Cplx<T>,
    /// `Σ |D(n)² − D(n+1)²|`
    pub variation: T,
}

/// Partial sums for the eigenpair `(e, f) = (pair.0, pair.1)` of a single-mode system.
///
/// The first two sums stop at the basis dimension; the variation sum depends
/// only on `D` and runs to `upto` regardless.
pub fn partial_sum_probe<T: Real>(
    system: &EigenSystem<T>,
    pair: (usize, usize),
    poly: &DiophantinePolynomial,
    upto: usize,
) -> Result<PartialSums<T>> {
    if poly.num_vars() != 1 {
        return Err(Error::SingleModeOnly(poly.num_vars()));
    }
    let dim = system.dim();
    for idx in [pair.0, pair.1] {
        if idx >= dim {
            return Err(Error::EigenIndex { index: idx, dimension: dim });
        }
    }
    let e = system.vectors.column(pair.0);
    let f = system.vectors.column(pair.1);
    let mut overlap = creal(T::zero());
    let mut weighted = creal(T::zero());
    for n in 0..upto.min(dim) {
        let term = e[n].conj() * f[n];
        overlap += term;
        weighted += creal(poly.squared_value::<T>(&[n as u64])?) * term;
    }
    let mut variation = BigInt::zero();
    let mut prev = squared(poly, 0)?;
    for n in 0..upto {
        let next = squared(poly, n as u64 + 1)?;
        variation += (&prev - &next).abs();
        prev = next;
    }
    let variation = T::lit(variation.to_f64().unwrap_or(f64::INFINITY));
    Ok(PartialSums { overlap, weighted, variation })
}

fn squared(poly: &DiophantinePolynomial, n: u64) -> Result<BigInt> {
    let d = poly.evaluate(&[n])?;
    Ok(&d * &d)
}
