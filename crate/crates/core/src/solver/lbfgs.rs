use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when `‖g‖ ≤ gtol · ‖g₀‖` or `‖g‖ ≤ gtol_abs`.
    pub gtol: f64,
    pub gtol_abs: f64,
    /// Stop when the relative decrease over `ftol_window` iterations falls
    /// below this value (0 disables the test).
    pub ftol: f64,
    pub ftol_window: usize,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            max_iterations: 2000,
            gtol: 1e-8,
            gtol_abs: 1e-12,
            ftol: 1e-12,
            ftol_window: 10,
            c1: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LbfgsStatus {
    Converged,
    Stagnated,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbfgsReport {
    pub status: LbfgsStatus,
    pub iterations: usize,
    pub evaluations: usize,
    pub value: f64,
    pub grad_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two-loop recursion: `H g` for the stored pairs.
fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut r = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &r);
        for (ri, yi) in r.iter_mut().zip(y) {
            *ri -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        r.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &r);
        for (ri, si) in r.iter_mut().zip(s) {
            *ri += (a - b) * si;
        }
    }
    r
}

/// Minimizes `f` from `x0`. `f` returns `(value, gradient)`; a non-finite
/// value marks an infeasible point and is rejected by the line search, so
/// every accepted iterate has finite value.
pub fn lbfgs_minimize<F>(mut f: F, x0: Vec<f64>, opts: &LbfgsOptions) -> (Vec<f64>, LbfgsReport)
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut evaluations = 1;
    assert!(fx.is_finite(), "objective must be finite at the starting point");
    let g0 = norm(&g);
    let mut report = LbfgsReport {
        status: LbfgsStatus::MaxIterations,
        iterations: 0,
        evaluations,
        value: fx,
        grad_norm: g0,
    };
    if x.is_empty() || g0 <= opts.gtol_abs {
        report.status = LbfgsStatus::Converged;
        return (x, report);
    }
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut history: VecDeque<f64> = VecDeque::new();
    history.push_back(fx);

    for it in 0..opts.max_iterations {
        let gn = norm(&g);
        if gn <= opts.gtol * g0 || gn <= opts.gtol_abs {
            report.status = LbfgsStatus::Converged;
            report.iterations = it;
            break;
        }
        let mut d: Vec<f64> = two_loop(&g, &pairs).into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gn * gn;
        }
        let mut step = if pairs.is_empty() { (1.0 / gn).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for attempt in 0..2 {
            for _ in 0..opts.max_backtracks {
                let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
                let (fn_, gn_) = f(&xn);
                evaluations += 1;
                if fn_.is_finite() && fn_ <= fx + opts.c1 * step * slope {
                    accepted = Some((xn, fn_, gn_));
                    break;
                }
                step *= opts.backtrack;
            }
            if accepted.is_some() || attempt == 1 || pairs.is_empty() {
                break;
            }
            // retry along steepest descent with a fresh memory
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gn * gn;
            step = (1.0 / gn).min(1.0);
        }
        let Some((xn, fn_, gn_)) = accepted else {
            report.status = LbfgsStatus::LineSearchFailed;
            report.iterations = it;
            log::debug!("line search failed at iteration {it}: f = {fx:e}, |g| = {gn:e}");
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn_.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        fx = fn_;
        g = gn_;
        report.iterations = it + 1;

        history.push_back(fx);
        if history.len() > opts.ftol_window + 1 {
            history.pop_front();
        }
        if opts.ftol > 0.0 && history.len() == opts.ftol_window + 1 {
            let old = history[0];
            if (old - fx) <= opts.ftol * old.abs().max(f64::MIN_POSITIVE) {
                report.status = LbfgsStatus::Stagnated;
                break;
            }
        }
    }
    report.evaluations = evaluations;
    report.value = fx;
    report.grad_norm = norm(&g);
    (x, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let f = |x: &[f64]| {
            let v = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            (v, x.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect())
        };
        let (x, r) = lbfgs_minimize(f, vec![0.0; 4], &LbfgsOptions::default());
        assert!(r.iterations <= 50);
        for i in 0..4 {
            assert!((x[i] - c[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            (v, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)])
        };
        let opts = LbfgsOptions { gtol: 1e-12, ..Default::default() };
        let (x, r) = lbfgs_minimize(f, vec![-1.2, 1.0], &opts);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6, "{x:?} {r:?}");
    }

    #[test]
    fn never_enters_sentinel_region() {
        // minimum of the smooth part lies at x = -1, but x < 0.2 is forbidden
        let visited = std::cell::RefCell::new(Vec::new());
        let f = |x: &[f64]| {
            if x[0] < 0.2 {
                return (f64::INFINITY, vec![0.0]);
            }
            visited.borrow_mut().push(x[0]);
            ((x[0] + 1.0).powi(2), vec![2.0 * (x[0] + 1.0)])
        };
        let (x, _) = lbfgs_minimize(f, vec![3.0], &LbfgsOptions { max_iterations: 100, ..Default::default() });
        assert!(x[0] >= 0.2 && x[0] < 0.3);
        assert!(visited.borrow().iter().all(|v| *v >= 0.2));
    }
}
