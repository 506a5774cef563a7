//! Derivative-free Nelder-Mead minimization with dimension-adaptive
//! coefficients and simplex restarts.

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy)]
pub struct NelderMead<T> {
    /// Edge length of the initial (axis-aligned) simplex.
    pub initial_step: T,
    /// Stop once every vertex lies within this distance of the best one...
    pub xtol: T,
    /// ...and the objective spread across the simplex is below this.
    pub ftol: T,
    pub max_evals: usize,
    /// Fresh simplices built around the incumbent after convergence.
    pub restarts: usize,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        Self {
            initial_step: lit(0.25),
            xtol: lit(1e-10),
            ftol: lit(1e-14),
            max_evals: 20_000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
    pub converged: bool,
}

impl<T: Real> NelderMead<T> {
    pub fn minimize<F>(&self, mut f: F, x0: &[T]) -> Minimum<T>
    where
        F: FnMut(&[T]) -> T,
    {
        let mut best = self.run(&mut f, x0, self.initial_step, self.max_evals);
        let mut step = self.initial_step;
        for _ in 0..self.restarts {
            if best.evals >= self.max_evals {
                break;
            }
            step *= lit(0.5);
            let budget = self.max_evals - best.evals;
            let next = self.run(&mut f, &best.x, step, budget);
            let evals = best.evals + next.evals;
            let improved = best.value - next.value;
            if next.value <= best.value {
                best = Minimum { evals, ..next };
            } else {
                best.evals = evals;
            }
            if improved <= self.ftol {
                break;
            }
        }
        best
    }

    fn run<F>(&self, f: &mut F, x0: &[T], step: T, budget: usize) -> Minimum<T>
    where
        F: FnMut(&[T]) -> T,
    {
        let n = x0.len();
        let nt: T = lit(n.max(1) as f64);
        let one = T::one();
        let two: T = lit(2.0);
        // Gao & Han adaptive coefficients.
        let alpha = one;
        let gamma = one + two / nt;
        let rho = lit::<T>(0.75) - one / (two * nt);
        let sigma = one - one / nt;

        let mut evals = 0usize;
        let mut eval = |x: &[T], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                T::max_value().unwrap_or_else(|| lit(1e300))
            }
        };

        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), v0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        let mut converged = false;
        while evals < budget {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let (best_x, best_v) = (&simplex[0].0, simplex[0].1);
            let worst_v = simplex[n].1;
            let spread_x = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(best_x).map(|(a, b)| (*a - *b).abs()))
                .fold(T::zero(), |m, d| if d > m { d } else { m });
            if spread_x <= self.xtol && (worst_v - best_v).abs() <= self.ftol {
                converged = true;
                break;
            }

            let mut centroid = vec![T::zero(); n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += *xi;
                }
            }
            for c in centroid.iter_mut() {
                *c /= nt;
            }
            let along = |t: T, worst: &[T]| -> Vec<T> {
                centroid
                    .iter()
                    .zip(worst)
                    .map(|(c, w)| *c + t * (*c - *w))
                    .collect()
            };

            let worst = simplex[n].0.clone();
            let xr = along(alpha, &worst);
            let vr = eval(&xr, &mut evals);
            if vr < simplex[0].1 {
                let xe = along(gamma, &worst);
                let ve = eval(&xe, &mut evals);
                simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
                continue;
            }
            if vr < simplex[n - 1].1 {
                simplex[n] = (xr, vr);
                continue;
            }
            let (xc, vc) = if vr < worst_v {
                let xc = along(rho, &worst);
                let vc = eval(&xc, &mut evals);
                (xc, vc)
            } else {
                let xc = along(-rho, &worst);
                let vc = eval(&xc, &mut evals);
                (xc, vc)
            };
            if vc < worst_v.min(vr) {
                simplex[n] = (xc, vc);
                continue;
            }
            // Shrink toward the best vertex.
            let anchor = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, ai) in x.iter_mut().zip(&anchor) {
                    *xi = *ai + sigma * (*xi - *ai);
                }
                *v = eval(x, &mut evals);
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            evals,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead::<f64> {
            max_evals: 50_000,
            ..Default::default()
        };
        let m = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-7, "{:?}", m.x);
        assert!((m.x[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn six_dim_quadratic_with_kink() {
        let nm = NelderMead::<f64>::default();
        let m = nm.minimize(
            |x| {
                x.iter()
                    .enumerate()
                    .map(|(i, v)| (i as f64 + 1.0) * (v - 0.3).powi(2))
                    .sum::<f64>()
                    + (x[0] - 0.3).abs()
            },
            &[0.0; 6],
        );
        for v in &m.x {
            assert!((v - 0.3).abs() < 1e-6, "{:?}", m.x);
        }
    }

    #[test]
    fn respects_budget() {
        let nm = NelderMead::<f64> {
            max_evals: 30,
            restarts: 0,
            ..Default::default()
        };
        let m = nm.minimize(|x| x[0].sin() + x[1].cos(), &[0.0, 0.0]);
        assert!(m.evals <= 40);
        assert!(!m.converged);
    }
}
