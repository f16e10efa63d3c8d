#![allow(dead_code)]

use adia_core::{Operator, State, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Classic fourth-order Runge-Kutta on `ψ' = −i H(t) ψ` with
/// `H(t) = H_I + (t/T)(H_P − H_I)`.
pub fn rk4_reference(hi: &Operator, hp: &Operator, total_time: f64, steps: usize, psi0: &State) -> DVector<C64> {
    let a = hi.matrix().clone();
    let b = hp.matrix() - hi.matrix();
    let h_at = |t: f64| &a + &b * C64::new(t / total_time, 0.0);
    let rhs = |t: f64, psi: &DVector<C64>| (h_at(t) * psi) * C64::new(0.0, -1.0);
    let dt = total_time / steps as f64;
    let mut psi = psi0.amplitudes().clone();
    for m in 0..steps {
        let t = m as f64 * dt;
        let k1 = rhs(t, &psi);
        let k2 = rhs(t + dt / 2.0, &(&psi + &k1 * C64::new(dt / 2.0, 0.0)));
        let k3 = rhs(t + dt / 2.0, &(&psi + &k2 * C64::new(dt / 2.0, 0.0)));
        let k4 = rhs(t + dt, &(&psi + &k3 * C64::new(dt, 0.0)));
        psi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    }
    psi
}

/// `D(n)^2` for single-variable integer coefficients, by Horner in i128.
pub fn naive_square(coeffs_low_first: &[i64], n: u64) -> i128 {
    let d = coeffs_low_first.iter().rev().fold(0i128, |acc, &c| acc * n as i128 + c as i128);
    d * d
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.random_range(-scale..scale), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Prints one acceptance line and fails the test when `ok` is false.
pub fn criterion_line(id: &str, title: &str, ok: bool, detail: &str) {
    println!("[{}] {id} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} {title} failed: {detail}");
}
