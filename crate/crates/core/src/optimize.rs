//! Derivative-free minimization for the small smooth problems in this crate:
//! the 3-angle fully-entangled-fraction search and the 6-angle likelihood
//! maximization.
//!
//! A Nelder-Mead simplex phase does the bulk of the work and a compass
//! (coordinate pattern) search polishes the result. The polish stops once a
//! full polling cycle at the finest step improves the objective by less than
//! `f_tol`.

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    /// Initial simplex edge and compass step.
    pub initial_step: f64,
    /// Minimum objective improvement over a full polling cycle.
    pub f_tol: f64,
    /// Smallest compass step before declaring convergence.
    pub x_tol: f64,
    pub max_evaluations: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            initial_step: 0.3,
            f_tol: 1e-12,
            x_tol: 1e-10,
            max_evaluations: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

pub fn minimize<F>(f: F, start: &[f64], settings: &Settings) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut obj = Counted { f, evaluations: 0 };
    let (x, value) = nelder_mead(&mut obj, start, settings);
    let (x, value, converged) = compass_polish(&mut obj, x, value, settings);
    Minimum {
        x,
        value,
        evaluations: obj.evaluations,
        converged,
    }
}

fn nelder_mead<F>(obj: &mut Counted<F>, start: &[f64], s: &Settings) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for k in 0..n {
        let mut v = start.to_vec();
        v[k] += s.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| obj.eval(v)).collect();
    let budget = s.max_evaluations / 2;

    while obj.evaluations < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.abs() <= s.f_tol * 0.1 && size <= s.x_tol * 100.0 {
            break;
        }
        if size <= s.x_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = obj.eval(&xr);
        if fr < values[0] {
            let xe = along(gamma);
            let fe = obj.eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(alpha * rho);
                let fc = obj.eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = obj.eval(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + sigma * (v - b))
                        .collect();
                    values[i] = obj.eval(&shrunk);
                    simplex[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("nonempty simplex");
    (simplex[best].clone(), values[best])
}

fn compass_polish<F>(
    obj: &mut Counted<F>,
    mut x: Vec<f64>,
    mut value: f64,
    s: &Settings,
) -> (Vec<f64>, f64, bool)
where
    F: FnMut(&[f64]) -> f64,
{
    let mut step = (s.initial_step * 0.01).max(s.x_tol * 4.0);
    loop {
        if obj.evaluations >= s.max_evaluations {
            return (x, value, false);
        }
        let cycle_start = value;
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[k] += dir * step;
                let v = obj.eval(&trial);
                if v < value {
                    x = trial;
                    value = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            if step <= s.x_tol {
                return (x, value, true);
            }
            step *= 0.5;
        } else if cycle_start - value < s.f_tol && step <= s.x_tol {
            return (x, value, true);
        } else {
            step *= 1.5;
        }
    }
}
