//! Derivative-free simplex maximization (Nelder-Mead) used by the
//! singlet-fraction search. The objective receives a mutable view of the
//! candidate point so it can project it back onto its feasible set (here:
//! the unit Hilbert-Schmidt sphere) before evaluation; the stored vertex is
//! the projected point.

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_iters: usize,
    /// Terminate when the simplex collapses below this diameter.
    pub xtol: f64,
    /// Terminate when best and worst values agree to this.
    pub ftol: f64,
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

struct Vertex {
    x: Vec<f64>,
    value: f64,
}

/// Maximize `objective` starting from `x0`, building the initial simplex by
/// stepping `step` along each coordinate.
pub fn maximize(
    objective: &mut dyn FnMut(&mut [f64]) -> f64,
    x0: Vec<f64>,
    step: f64,
    opts: &NmOptions,
) -> NmResult {
    let n = x0.len();
    assert!(n >= 1);
    let mut evals = 0usize;
    let mut eval = |x: &mut Vec<f64>, evals: &mut usize| -> f64 {
        *evals += 1;
        objective(x.as_mut_slice())
    };

    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    {
        let mut x = x0.clone();
        let value = eval(&mut x, &mut evals);
        simplex.push(Vertex { x, value });
    }
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += step;
        let value = eval(&mut x, &mut evals);
        simplex.push(Vertex { x, value });
    }

    // Descending by value: best first (we maximize).
    let sort = |s: &mut Vec<Vertex>| {
        s.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap_or(std::cmp::Ordering::Equal))
    };
    sort(&mut simplex);

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;

    for _iter in 0..opts.max_iters {
        let spread = simplex[0].value - simplex[n].value;
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.x.iter()
                    .zip(&simplex[0].x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread.abs() < opts.ftol || diameter < opts.xtol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v.x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].x.clone();

        let blend = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let mut reflected = blend(alpha);
        let f_reflected = eval(&mut reflected, &mut evals);

        if f_reflected > simplex[0].value {
            // Try to expand further along the same direction.
            let mut expanded = blend(gamma);
            let f_expanded = eval(&mut expanded, &mut evals);
            if f_expanded > f_reflected {
                simplex[n] = Vertex { x: expanded, value: f_expanded };
            } else {
                simplex[n] = Vertex { x: reflected, value: f_reflected };
            }
        } else if f_reflected > simplex[n - 1].value {
            simplex[n] = Vertex { x: reflected, value: f_reflected };
        } else {
            // Contract, inside or outside depending on the reflection.
            let outside = f_reflected > simplex[n].value;
            let mut contracted = blend(if outside { rho } else { -rho });
            let f_contracted = eval(&mut contracted, &mut evals);
            let accept = if outside {
                f_contracted >= f_reflected
            } else {
                f_contracted > simplex[n].value
            };
            if accept {
                simplex[n] = Vertex { x: contracted, value: f_contracted };
            } else {
                // Shrink everything toward the best vertex.
                let best = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> = v
                        .x
                        .iter()
                        .zip(&best)
                        .map(|(xi, bi)| bi + sigma * (xi - bi))
                        .collect();
                    let value = eval(&mut x, &mut evals);
                    *v = Vertex { x, value };
                }
            }
        }
        sort(&mut simplex);
    }

    NmResult {
        x: simplex[0].x.clone(),
        value: simplex[0].value,
        evals,
        converged,
    }
}
