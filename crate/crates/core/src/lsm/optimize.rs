//! Dense BFGS ascent with a backtracking (Armijo) line search.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsConfig {
    pub max_iterations: usize,
    /// Stop once the infinity norm of the gradient is at most this.
    pub gradient_tolerance: f64,
    /// Also stop once the relative objective gain stays below this for
    /// `stall_iterations` consecutive steps. Needed when the maximum sits on
    /// a kink, such as two latent positions coinciding.
    pub value_tolerance: f64,
    pub stall_iterations: usize,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5_000,
            gradient_tolerance: 1e-5,
            value_tolerance: 1e-12,
            stall_iterations: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stopped on objective stagnation rather than a small gradient.
    pub stalled: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `f`, which returns the objective and its gradient.
///
/// Accepted steps always satisfy the Armijo condition, so the objective is
/// non-decreasing along the returned path. When the line search fails with a
/// curvature estimate, the inverse Hessian is reset once before giving up.
pub fn maximize_bfgs<F>(mut f: F, x0: Vec<f64>, config: &BfgsConfig) -> Result<BfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    const ARMIJO: f64 = 1e-4;
    const MIN_STEP: f64 = 1e-14;
    let m = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x)?;
    // Inverse Hessian of the negated objective, dense row-major.
    let mut h = identity(m);
    let mut fresh = true;
    let mut iterations = 0;
    let mut flat = 0;
    let mut stalled = false;

    while iterations < config.max_iterations {
        if inf_norm(&g) <= config.gradient_tolerance {
            break;
        }
        // Ascent direction: H g.
        let dir: Vec<f64> = (0..m).map(|r| dot(&h[r * m..(r + 1) * m], &g)).collect();
        let mut slope = dot(&g, &dir);
        let dir = if slope <= 0.0 {
            h = identity(m);
            fresh = true;
            slope = dot(&g, &g);
            g.clone()
        } else {
            dir
        };

        let mut step = 1.0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            if let Ok((ft, gt)) = f(&trial) {
                if ft.is_finite() && ft >= fx + ARMIJO * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if fresh {
                break;
            }
            h = identity(m);
            fresh = true;
            continue;
        };
        iterations += 1;

        // BFGS update on the negated problem: s = dx, y = -(dg).
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..m {
                    h[i * m + i] = scale;
                }
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        if f_new - fx <= config.value_tolerance * (1.0 + fx.abs()) {
            flat += 1;
        } else {
            flat = 0;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if config.stall_iterations > 0 && flat >= config.stall_iterations {
            stalled = true;
            break;
        }
    }

    let gradient_norm = inf_norm(&g);
    Ok(BfgsOutcome {
        converged: gradient_norm <= config.gradient_tolerance || stalled,
        stalled,
        x,
        value: fx,
        gradient_norm,
        iterations,
    })
}

fn identity(m: usize) -> Vec<f64> {
    let mut h = vec![0.0; m * m];
    for i in 0..m {
        h[i * m + i] = 1.0;
    }
    h
}

/// `H <- (I - rho s y') H (I - rho y s') + rho s s'`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let m = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..m).map(|r| dot(&h[r * m..(r + 1) * m], y)).collect();
    let yhy = dot(y, &hy);
    let coef = (1.0 + rho * yhy) * rho;
    for r in 0..m {
        for c in 0..m {
            h[r * m + c] += coef * s[r] * s[c] - rho * (hy[r] * s[c] + s[r] * hy[c]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_a_concave_quadratic() {
        // f = -(x - 1)^2 - 10 (y + 2)^2 - (x - 1)(y + 2)
        let f = |v: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (a, b) = (v[0] - 1.0, v[1] + 2.0);
            Ok((
                -a * a - 10.0 * b * b - a * b,
                vec![-2.0 * a - b, -20.0 * b - a],
            ))
        };
        let cfg = BfgsConfig {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            ..BfgsConfig::default()
        };
        let out = maximize_bfgs(f, vec![5.0, 5.0], &cfg).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8);
        assert!((out.x[1] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let f = |v: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (x, y) = (v[0], v[1]);
            let val = (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2);
            let gx = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
            let gy = 200.0 * (y - x * x);
            Ok((-val, vec![-gx, -gy]))
        };
        let cfg = BfgsConfig {
            max_iterations: 1000,
            gradient_tolerance: 1e-8,
            ..BfgsConfig::default()
        };
        let out = maximize_bfgs(f, vec![-1.2, 1.0], &cfg).unwrap();
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reports_non_convergence() {
        let f = |v: &[f64]| -> Result<(f64, Vec<f64>)> { Ok((v[0], vec![1.0])) };
        let cfg = BfgsConfig {
            max_iterations: 5,
            gradient_tolerance: 1e-8,
            ..BfgsConfig::default()
        };
        let out = maximize_bfgs(f, vec![0.0], &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
        assert!(out.value > 0.0);
    }
}
