//! BFGS with central-difference gradients for exact and shot-noise objectives.
//!
//! Objectives report a value and its standard error. With exact objectives
//! (zero error) the run stops when the gradient ∞-norm drops below `gtol`.
//! With noisy objectives each gradient component also carries an error
//! estimate, and the run stops once every component is statistically
//! indistinguishable from zero (|g_j| < 2σ_j), and the Armijo test accepts a
//! trial point that is worse by no more than the combined noise of the two
//! values (otherwise a lucky low sample at the current point blocks every
//! later step). The inverse-Hessian update is
//! skipped whenever the curvature condition `sᵀy > 0` fails, which noisy
//! gradients make common.

/// One objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Standard error of `value`; zero for exact objectives.
    pub std_error: f64,
    /// Cost of this evaluation in shots (zero for exact objectives).
    pub shots: u64,
}

impl Evaluation {
    pub fn exact(value: f64) -> Self {
        Evaluation {
            value,
            std_error: 0.0,
            shots: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop when every gradient component is below this magnitude.
    pub gtol: f64,
    /// Also stop when an accepted step lowers the objective by less than
    /// `ftol · max(1, |f|)`; finite-difference bias can keep the gradient
    /// just above `gtol` at a point the objective can no longer improve on.
    pub ftol: f64,
    /// Central-difference step.
    pub fd_step: f64,
    /// A noisy gradient component counts as zero below this many standard errors.
    pub noise_tolerance: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    pub max_backtracks: usize,
}

impl BfgsOptions {
    /// Settings for exact statevector energies.
    pub fn exact() -> Self {
        BfgsOptions {
            max_iterations: 1000,
            gtol: 1e-8,
            ftol: 1e-14,
            fd_step: 1e-4,
            noise_tolerance: 2.0,
            c1: 1e-4,
            max_backtracks: 30,
        }
    }

    /// Settings for shot-estimated energies.
    pub fn noisy() -> Self {
        BfgsOptions {
            max_iterations: 100,
            gtol: 1e-8,
            ftol: 0.0,
            fd_step: std::f64::consts::PI / 8.0,
            noise_tolerance: 2.0,
            c1: 1e-4,
            max_backtracks: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient small (or statistically zero), or the objective stalled.
    Converged,
    /// No step along the search direction decreased the objective.
    LineSearchFailed,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    /// Objective at `x` as last evaluated.
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub shots: u64,
    pub termination: Termination,
    /// Objective value after each accepted step, starting with the initial point.
    pub trace: Vec<f64>,
    pub gradient: Vec<f64>,
}

impl BfgsResult {
    /// True unless the iteration cap was hit.
    pub fn ok(&self) -> bool {
        self.termination != Termination::MaxIterations
    }
}

struct Counter<F> {
    f: F,
    evaluations: usize,
    shots: u64,
}

impl<F: FnMut(&[f64]) -> Evaluation> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> Evaluation {
        self.evaluations += 1;
        let e = (self.f)(x);
        self.shots += e.shots;
        e
    }

    /// Central differences; returns the gradient and per-component errors.
    fn gradient(&mut self, x: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
        let mut g = vec![0.0; x.len()];
        let mut se = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for j in 0..x.len() {
            probe[j] = x[j] + h;
            let up = self.eval(&probe);
            probe[j] = x[j] - h;
            let down = self.eval(&probe);
            probe[j] = x[j];
            g[j] = (up.value - down.value) / (2.0 * h);
            se[j] = (up.std_error.powi(2) + down.std_error.powi(2)).sqrt() / (2.0 * h);
        }
        (g, se)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn converged(g: &[f64], se: &[f64], opts: &BfgsOptions) -> bool {
    g.iter()
        .zip(se)
        .all(|(gj, sj)| gj.abs() < opts.gtol.max(opts.noise_tolerance * sj))
}

/// Minimizes `f` from `x0`.
pub fn minimize<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: FnMut(&[f64]) -> Evaluation,
{
    let n = x0.len();
    let mut obj = Counter {
        f,
        evaluations: 0,
        shots: 0,
    };
    let mut x = x0.to_vec();
    let first = obj.eval(&x);
    let mut fx = first.value;
    let mut fx_se = first.std_error;
    let mut trace = vec![fx];
    if n == 0 {
        return BfgsResult {
            x,
            value: fx,
            iterations: 0,
            evaluations: obj.evaluations,
            shots: obj.shots,
            termination: Termination::Converged,
            trace,
            gradient: Vec::new(),
        };
    }
    let (mut g, mut se) = obj.gradient(&x, opts.fd_step);
    // Inverse Hessian approximation, row-major.
    let mut hinv = identity(n);
    let mut first_update = true;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if converged(&g, &se, opts) {
            termination = Termination::Converged;
            break;
        }
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            hinv = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + alpha * pi).collect();
            let t = obj.eval(&trial);
            // Noise slack: a trial within the combined noise of both values
            // is not evidence against the step.
            let slack = opts.noise_tolerance * (fx_se * fx_se + t.std_error * t.std_error).sqrt();
            if t.value <= fx + opts.c1 * alpha * slope + slack {
                accepted = Some((trial, t.value, t.std_error));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new, f_new_se)) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };
        iterations += 1;

        let (g_new, se_new) = obj.gradient(&x_new, opts.fd_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if first_update {
                let scale = sy / dot(&y, &y);
                hinv.iter_mut()
                    .enumerate()
                    .for_each(|(k, v)| *v = if k % (n + 1) == 0 { scale } else { 0.0 });
                first_update = false;
            }
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        let stalled = fx - f_new <= opts.ftol * fx.abs().max(1.0);
        x = x_new;
        fx = f_new;
        fx_se = f_new_se;
        g = g_new;
        se = se_new;
        trace.push(fx);
        if stalled && opts.ftol > 0.0 {
            termination = Termination::Converged;
            break;
        }
    }

    if termination == Termination::MaxIterations && converged(&g, &se, opts) {
        termination = Termination::Converged;
    }
    BfgsResult {
        x,
        value: fx,
        iterations,
        evaluations: obj.evaluations,
        shots: obj.shots,
        termination,
        trace,
        gradient: g,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| Evaluation::exact((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2));
        let r = minimize(f, &[0.0, 0.0], &BfgsOptions::exact());
        assert_eq!(r.termination, Termination::Converged);
        assert!((r.x[0] - 1.0).abs() < 1e-7 && (r.x[1] + 2.0).abs() < 1e-7, "{:?}", r.x);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| Evaluation::exact((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let r = minimize(f, &[-1.2, 1.0], &BfgsOptions::exact());
        assert!(r.ok());
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r);
    }

    #[test]
    fn empty_parameter_vector() {
        let r = minimize(|_: &[f64]| Evaluation::exact(-1.5), &[], &BfgsOptions::exact());
        assert_eq!(r.value, -1.5);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn noisy_gradient_stops_statistically() {
        // A flat objective with large reported error converges immediately.
        let f = |_: &[f64]| Evaluation {
            value: 0.0,
            std_error: 1.0,
            shots: 10,
        };
        let r = minimize(f, &[0.3], &BfgsOptions::noisy());
        assert_eq!(r.termination, Termination::Converged);
        assert_eq!(r.shots, 30);
    }

    #[test]
    fn monotone_trace() {
        let f = |x: &[f64]| Evaluation::exact(x[0].cos() + 0.5 * x[1].sin());
        let r = minimize(f, &[0.4, 0.1], &BfgsOptions::exact());
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.value + 1.5).abs() < 1e-12);
    }
}
