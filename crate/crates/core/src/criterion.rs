//! End-to-end identification-criterion experiments and the randomized search
//! for finite-truncation counterexamples.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{coherent_state, evolve, measure_probabilities, StateVector, MIN_STEPS};
use crate::fock::{BoundaryCondition, FockSpace};
use crate::hamiltonian::{build_hi, build_hp, CoherentParams, Schedule};
use crate::polynomial::DiophantinePolynomial;
use crate::scalar::{Cplx, Real};
use crate::spectral::{condition_scan, eigendecompose, ConditionScanReport};

/// Half-width of the band around 1/2 reported as inconclusive.
pub const TIE_BAND: f64 = 1e-9;
/// Relative tolerance for ties in the problem-Hamiltonian ground energy.
pub const GROUND_DEGENERACY_TOL: f64 = 1e-9;

/// Geometric sweep `T_k = t0 · ratio^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TSweep {
    pub t0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl TSweep {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.t0 * self.ratio.powi(k as i32)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::Config(format!("t0 must be positive, got {}", self.t0)));
        }
        if self.count == 0 {
            return Err(Error::Config("T sweep needs at least one point".into()));
        }
        if self.count > 1 && !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return Err(Error::Config(format!("T sweep must be strictly increasing, ratio {}", self.ratio)));
        }
        Ok(())
    }
}

/// What the evolution starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Truncated, renormalized coherent state `|α⟩`.
    #[default]
    Coherent,
    /// Exact ground state of the truncated `H_I`.
    HiGround,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub polynomial: String,
    /// Declared variable count; inferred from the polynomial when absent.
    pub num_vars: Option<usize>,
    pub alphas: Vec<Cplx<f64>>,
    pub cutoff: usize,
    pub boundary: BoundaryCondition<f64>,
    pub t_sweep: TSweep,
    pub steps_per_unit_time: f64,
    /// Interior grid size of the matrix-element scan; 0 skips the scan.
    pub scan_grid: usize,
    pub seed: u64,
    pub initial_state: InitialState,
}

impl ExperimentConfig {
    /// Single-mode config with the defaults used across the examples.
    pub fn single_mode(polynomial: &str, alpha: Cplx<f64>, cutoff: usize, boundary: BoundaryCondition<f64>) -> Self {
        Self {
            polynomial: polynomial.to_string(),
            num_vars: None,
            alphas: vec![alpha],
            cutoff,
            boundary,
            t_sweep: TSweep { t0: 1.0, ratio: 2.0, count: 8 },
            steps_per_unit_time: 20.0,
            scan_grid: 19,
            seed: 0,
            initial_state: InitialState::Coherent,
        }
    }

    pub fn parse_polynomial(&self) -> Result<DiophantinePolynomial> {
        match self.num_vars {
            Some(k) => DiophantinePolynomial::parse_with_vars(&self.polynomial, k),
            None => DiophantinePolynomial::parse(&self.polynomial),
        }
    }

    /// Steps used for total time `t`.
    pub fn steps_for(&self, t: f64) -> usize {
        ((self.steps_per_unit_time * t).ceil() as usize).max(MIN_STEPS)
    }

    pub fn validate(&self) -> Result<DiophantinePolynomial> {
        self.t_sweep.validate()?;
        if !(self.steps_per_unit_time > 0.0 && self.steps_per_unit_time.is_finite()) {
            return Err(Error::Config(format!("steps_per_unit_time must be positive, got {}", self.steps_per_unit_time)));
        }
        let poly = self.parse_polynomial()?;
        if self.alphas.len() != poly.num_vars() {
            return Err(Error::ArityMismatch { expected: poly.num_vars(), got: self.alphas.len() });
        }
        self.boundary.validate()?;
        Ok(poly)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    NoneIdentified,
    /// Ground state of `H_P` is degenerate; the criterion does not apply.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionVerdict {
    HasSolution,
    NoSolutionUnderCutoff,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub num_steps: usize,
    pub probabilities: Vec<f64>,
    /// Flat index of the unique label with probability above 1/2.
    pub identified: Option<usize>,
    /// Some label sits within the tie band of 1/2.
    pub inconclusive: bool,
    pub ground_probability: f64,
    pub verdict: Verdict,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dimension: usize,
    pub labels: Vec<Vec<usize>>,
    pub hp_diagonal: Vec<f64>,
    /// `argmin` of the `H_P` diagonal (first on ties).
    pub ground_index: usize,
    pub ground_label: Vec<usize>,
    pub ground_energy: f64,
    pub ground_degenerate: bool,
    pub initial_tail_mass: Option<f64>,
    pub initial_probabilities: Vec<f64>,
    pub max_excited_initial_probability: f64,
    pub sweep: Vec<SweepRow>,
    pub verdict: Verdict,
    pub scan: Option<ConditionScanReport<f64>>,
    pub min_gap: Option<f64>,
    pub solution: SolutionVerdict,
    /// Whether `D` vanishes at the identified label of the decisive row.
    pub identified_is_root: Option<bool>,
    pub brute_force_root: Option<Vec<u64>>,
}

impl ExperimentReport {
    pub fn label_string(&self, index: usize) -> String {
        self.labels[index].iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn last_row(&self) -> &SweepRow {
        self.sweep.last().expect("sweep has at least one row")
    }
}

fn identify(probabilities: &[f64]) -> (Option<usize>, bool) {
    let mut identified = None;
    let mut inconclusive = false;
    for (i, &p) in probabilities.iter().enumerate() {
        if (p - 0.5).abs() <= TIE_BAND {
            inconclusive = true;
        } else if p > 0.5 {
            identified = Some(i);
        }
    }
    (identified, inconclusive)
}

fn row_verdict(identified: Option<usize>, ground: usize, degenerate: bool) -> Verdict {
    match identified {
        _ if degenerate => Verdict::Skipped,
        Some(i) if i == ground => Verdict::Match,
        Some(_) => Verdict::Mismatch,
        None => Verdict::NoneIdentified,
    }
}

fn cast_vec<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn cast_scan<T: Real>(r: ConditionScanReport<T>) -> ConditionScanReport<f64> {
    use crate::spectral::{GlobalMin, PairSummary, ScanRow};
    ConditionScanReport {
        grid: cast_vec(&r.grid),
        rows: r
            .rows
            .iter()
            .map(|x| ScanRow { s: x.s.as_f64(), pair_i: x.pair_i, pair_j: x.pair_j, abs_element: x.abs_element.as_f64(), degenerate: x.degenerate })
            .collect(),
        pairs: r
            .pairs
            .iter()
            .map(|p| PairSummary {
                pair_i: p.pair_i,
                pair_j: p.pair_j,
                min: p.min.map(|(a, b)| (a.as_f64(), b.as_f64())),
                degenerate_samples: p.degenerate_samples,
            })
            .collect(),
        global_min: r.global_min.map(|g| GlobalMin { value: g.value.as_f64(), s: g.s.as_f64(), pair_i: g.pair_i, pair_j: g.pair_j }),
        commutator_norm: r.commutator_norm.as_f64(),
        difference_norm: r.difference_norm.as_f64(),
        gaps: r.gaps.iter().map(|g| g.map(|x| x.as_f64())).collect(),
        degenerate_pairs: r.degenerate_pairs,
    }
}

/// Runs the full pipeline for `config`: premise check, optional matrix-element
/// scan, one evolution per sweep time, and identification of the label above 1/2.
pub fn run_experiment<T: Real>(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let poly = config.validate()?;
    let to_c = |z: &Cplx<f64>| Cplx::new(T::lit(z.re), T::lit(z.im));
    let bc = match config.boundary {
        BoundaryCondition::Abrupt => BoundaryCondition::Abrupt,
        BoundaryCondition::Periodic { c } => BoundaryCondition::periodic(to_c(&c))?,
        BoundaryCondition::AntiPeriodic { c } => BoundaryCondition::antiperiodic(to_c(&c))?,
    };
    let space = FockSpace::<T>::uniform(poly.num_vars(), config.cutoff, bc)?;
    let params = CoherentParams::new(config.alphas.iter().map(to_c).collect())?;
    let hi = build_hi(&space, &params)?;
    let hp = build_hp(&space, &poly)?;

    // ground truth from exact integer values of D^2
    let labels: Vec<Vec<usize>> = space.labels().collect();
    let exact: Vec<BigInt> = labels
        .iter()
        .map(|l| {
            let d = poly.evaluate(&l.iter().map(|&n| n as u64).collect::<Vec<_>>())?;
            Ok(&d * &d)
        })
        .collect::<Result<_>>()?;
    let hp_diag = hp.diagonal_real();
    let ground_index = (0..exact.len()).fold(0, |best, i| if exact[i] < exact[best] { i } else { best });
    let ground_energy = hp_diag[ground_index];
    let tie = T::tol(GROUND_DEGENERACY_TOL) * (T::one() + hp.frobenius_norm());
    let ground_degenerate = (0..exact.len()).any(|i| i != ground_index && (hp_diag[i] - ground_energy).abs() <= tie);

    let (psi0, tail) = match config.initial_state {
        InitialState::Coherent => {
            let cs = coherent_state(&space, &params)?;
            (cs.state, Some(cs.tail_mass.as_f64()))
        }
        InitialState::HiGround => {
            let sys = eigendecompose(&hi)?;
            (StateVector::new(sys.vectors.column(0).into_owned()), None)
        }
    };
    let initial = measure_probabilities(&psi0);
    let mut max_excited = 0.0f64;
    for (i, p) in initial.iter().enumerate() {
        if (hp_diag[i] - ground_energy).abs() > tie {
            let p = p.as_f64();
            if p >= 0.5 {
                return Err(Error::PremiseViolation { label: labels[i].clone(), probability: p });
            }
            max_excited = max_excited.max(p);
        }
    }

    let scan = if config.scan_grid > 0 { Some(cast_scan(condition_scan(&hi, &hp, config.scan_grid)?)) } else { None };
    let min_gap = scan.as_ref().and_then(|s| s.min_gap());

    let sweep: Vec<SweepRow> = config
        .t_sweep
        .values()
        .into_par_iter()
        .map(|t| {
            let schedule = Schedule::new(T::lit(t), config.steps_for(t))?;
            let traj = evolve(&hi, &hp, &schedule, &psi0, &[])?;
            let probabilities = cast_vec(&measure_probabilities(&traj.final_state));
            let (identified, inconclusive) = identify(&probabilities);
            Ok(SweepRow {
                t,
                num_steps: schedule.num_steps,
                ground_probability: probabilities[ground_index],
                verdict: row_verdict(identified, ground_index, ground_degenerate),
                probabilities,
                identified,
                inconclusive,
                norm_drift: traj.norm_drift.as_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let verdict = if ground_degenerate {
        Verdict::Skipped
    } else if sweep.iter().any(|r| r.verdict == Verdict::Mismatch) {
        Verdict::Mismatch
    } else if sweep.iter().any(|r| r.verdict == Verdict::Match) {
        Verdict::Match
    } else {
        Verdict::NoneIdentified
    };
    let identified_is_root = match verdict {
        Verdict::Match | Verdict::Mismatch => sweep
            .iter()
            .rev()
            .find_map(|r| r.identified)
            .map(|i| exact[i].is_zero()),
        _ => None,
    };
    let solution = match (verdict, identified_is_root) {
        (Verdict::Match, Some(true)) => SolutionVerdict::HasSolution,
        (Verdict::Match, Some(false)) => SolutionVerdict::NoSolutionUnderCutoff,
        _ => SolutionVerdict::Undetermined,
    };
    let brute_force_root = poly.has_solution_under_cutoff(&vec![config.cutoff as u64; poly.num_vars()])?;

    Ok(ExperimentReport {
        config: config.clone(),
        dimension: space.dimension(),
        ground_label: labels[ground_index].clone(),
        labels,
        hp_diagonal: cast_vec(hp_diag.as_slice()),
        ground_index,
        ground_energy: ground_energy.as_f64(),
        ground_degenerate,
        initial_tail_mass: tail,
        initial_probabilities: cast_vec(&initial),
        max_excited_initial_probability: max_excited,
        sweep,
        verdict,
        scan,
        min_gap,
        solution,
        identified_is_root,
        brute_force_root,
    })
}

/// Sampling ranges for [`counterexample_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub coefficient_bound: i64,
    pub max_degree: u32,
    pub t_min: f64,
    pub t_max: f64,
    pub steps_per_unit_time: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            alpha_min: 0.3,
            alpha_max: 3.0,
            coefficient_bound: 5,
            max_degree: 2,
            t_min: 0.5,
            t_max: 64.0,
            steps_per_unit_time: 20.0,
        }
    }
}

/// A run in which an excited label of `H_P` ended above probability 1/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub trial: u64,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub violating_label: Vec<usize>,
    pub probability: f64,
    pub t: f64,
    /// Probability of the same label when re-run with four times the steps.
    pub refined_probability: f64,
    /// The refined run still puts the label above 1/2.
    pub confirmed: bool,
}

/// Factor applied to the step density when re-checking a hit.
pub const CONFIRM_REFINEMENT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub dimension: usize,
    pub boundary: BoundaryCondition<f64>,
    pub seed: u64,
    pub trials: u64,
    pub evaluated: u64,
    pub skipped_degenerate: u64,
    pub skipped_premise: u64,
    pub failed: u64,
    pub hits: Vec<SearchHit>,
}

impl SearchReport {
    pub fn confirmed_hits(&self) -> usize {
        self.hits.iter().filter(|h| h.confirmed).count()
    }
}

enum TrialOutcome {
    Clean,
    Hit(Box<SearchHit>),
    Degenerate,
    Premise,
    Failed,
}

/// Draws the replayable config for `trial` of a search seeded with `seed`.
pub fn search_trial_config(
    dimension: usize,
    boundary: BoundaryCondition<f64>,
    seed: u64,
    trial: u64,
    options: &SearchOptions,
) -> ExperimentConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    // uniform on the annulus by area
    let (r2_lo, r2_hi) = (options.alpha_min.powi(2), options.alpha_max.powi(2));
    let radius = rng.random_range(r2_lo..=r2_hi).sqrt();
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let alpha = Cplx::from_polar(radius, angle);
    let b = options.coefficient_bound;
    let terms: Vec<(i64, Vec<u32>)> = (0..=options.max_degree).map(|d| (rng.random_range(-b..=b), vec![d])).collect();
    let poly = DiophantinePolynomial::from_terms(1, terms).expect("single-variable terms");
    let t = (rng.random_range(options.t_min.ln()..=options.t_max.ln())).exp();
    ExperimentConfig {
        polynomial: poly.to_string(),
        num_vars: Some(1),
        alphas: vec![alpha],
        cutoff: dimension - 1,
        boundary,
        t_sweep: TSweep { t0: t, ratio: 2.0, count: 1 },
        steps_per_unit_time: options.steps_per_unit_time,
        scan_grid: 0,
        seed,
        initial_state: InitialState::HiGround,
    }
}

fn run_trial(dimension: usize, boundary: BoundaryCondition<f64>, seed: u64, trial: u64, options: &SearchOptions) -> TrialOutcome {
    let config = search_trial_config(dimension, boundary, seed, trial, options);
    match run_experiment::<f64>(&config) {
        Ok(report) if report.verdict == Verdict::Skipped => TrialOutcome::Degenerate,
        Ok(report) => {
            let row = report.last_row();
            match row.identified {
                Some(i) if i != report.ground_index => {
                    let mut refined = config.clone();
                    refined.steps_per_unit_time *= CONFIRM_REFINEMENT;
                    let refined_probability = match run_experiment::<f64>(&refined) {
                        Ok(r) => r.last_row().probabilities[i],
                        Err(_) => f64::NAN,
                    };
                    TrialOutcome::Hit(Box::new(SearchHit {
                        trial,
                        seed,
                        violating_label: report.labels[i].clone(),
                        probability: row.probabilities[i],
                        t: row.t,
                        refined_probability,
                        confirmed: refined_probability > 0.5 + TIE_BAND,
                        config,
                    }))
                }
                _ => TrialOutcome::Clean,
            }
        }
        Err(Error::PremiseViolation { .. }) => TrialOutcome::Premise,
        Err(_) => TrialOutcome::Failed,
    }
}

/// Randomized single-mode search for runs where an excited label of `H_P`
/// ends above probability 1/2.
///
/// Each trial starts from the ground state of the truncated `H_I` and draws
/// `α` on an annulus, integer coefficients of `D` up to `max_degree`, and a
/// log-uniform `T`. Trials use independent ChaCha streams keyed by the trial
/// index, so results do not depend on the worker count.
pub fn counterexample_search(
    dimension: usize,
    trials: u64,
    seed: u64,
    boundary: BoundaryCondition<f64>,
    options: &SearchOptions,
) -> Result<SearchReport> {
    if dimension < 2 {
        return Err(Error::Config(format!("search dimension must be at least 2, got {dimension}")));
    }
    boundary.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|trial| run_trial(dimension, boundary, seed, trial, options))
        .collect();
    let mut report = SearchReport {
        dimension,
        boundary,
        seed,
        trials,
        evaluated: 0,
        skipped_degenerate: 0,
        skipped_premise: 0,
        failed: 0,
        hits: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            TrialOutcome::Clean => report.evaluated += 1,
            TrialOutcome::Hit(hit) => {
                report.evaluated += 1;
                report.hits.push(*hit);
            }
            TrialOutcome::Degenerate => report.skipped_degenerate += 1,
            TrialOutcome::Premise => report.skipped_premise += 1,
            TrialOutcome::Failed => report.failed += 1,
        }
    }
    Ok(report)
}

/// True when `D` vanishes at `label`.
pub fn is_root(poly: &DiophantinePolynomial, label: &[usize]) -> Result<bool> {
    let point: Vec<u64> = label.iter().map(|&n| n as u64).collect();
    Ok(!poly.evaluate(&point)?.abs().is_positive())
}
