//! Time integration of full and reduced models with an adaptive
//! Dormand-Prince 5(4) scheme sampled on a uniform grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub rtol: f64,
    pub atol: f64,
    pub samples: usize,
    pub max_steps: usize,
    /// State norm beyond which the run is flagged as diverged.
    pub blowup: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { rtol: 1e-8, atol: 1e-10, samples: 2000, max_steps: 2_000_000, blowup: 1e8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputSignal {
    Zero { m: usize },
    /// `amp * sin(freq * t)` on every channel.
    Sinusoid { m: usize, amp: f64, freq: f64 },
    /// Zero-order-hold Gaussian samples, one row per hold interval.
    WhiteNoise { hold_dt: f64, values: Vec<Vec<f64>> },
}

impl InputSignal {
    pub fn white_noise(m: usize, t_end: f64, hold_dt: f64, std: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = (t_end / hold_dt).ceil() as usize + 1;
        let values = (0..count)
            .map(|_| (0..m).map(|_| { let v: f64 = StandardNormal.sample(&mut rng); std * v }).collect::<Vec<f64>>())
            .collect();
        InputSignal::WhiteNoise { hold_dt, values }
    }

    pub fn m(&self) -> usize {
        match self {
            InputSignal::Zero { m } | InputSignal::Sinusoid { m, .. } => *m,
            InputSignal::WhiteNoise { values, .. } => values.first().map_or(0, |v| v.len()),
        }
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        match self {
            InputSignal::Zero { m } => vec![0.0; *m],
            InputSignal::Sinusoid { m, amp, freq } => vec![amp * (freq * t).sin(); *m],
            InputSignal::WhiteNoise { hold_dt, values } => {
                let i = ((t / hold_dt).floor().max(0.0) as usize).min(values.len() - 1);
                values[i].clone()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub diverged: bool,
}

const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    -71.0 / 57600.0,
    0.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
];
// Continuous extension, coefficients of θ, θ², θ³, θ⁴ per stage.
const P: [[f64; 4]; 7] = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
];

fn uniform_grid(t0: f64, t1: f64, samples: usize) -> Vec<f64> {
    let s = samples.max(2);
    (0..s).map(|i| t0 + (t1 - t0) * i as f64 / (s - 1) as f64).collect()
}

/// Integrate `x' = rhs(t, x)` over `[t0, t1]`; samples are returned on a
/// uniform grid. A non-finite state, a state norm above `opts.blowup`, or a
/// collapsing step size stops the run with `diverged = true`.
pub fn integrate<F>(mut rhs: F, x0: &[f64], t0: f64, t1: f64, opts: SimOptions) -> Trajectory
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let grid = uniform_grid(t0, t1, opts.samples);
    let mut out_t = vec![grid[0]];
    let mut out_x = vec![x0.to_vec()];
    let mut next = 1;
    let mut t = t0;
    let mut y = x0.to_vec();
    let mut f0 = rhs(t, &y);
    let scale0: f64 = y.iter().zip(&f0).map(|(a, b)| b.abs() / (opts.atol + opts.rtol * a.abs())).fold(0.0, f64::max);
    let mut h = if scale0 > 0.0 { (0.01 / scale0).min(t1 - t0) } else { (t1 - t0) * 1e-3 };
    h = h.max((t1 - t0) * 1e-12);
    let mut steps = 0;
    let mut diverged = false;
    let mut k = vec![vec![0.0; n]; 7];
    while next < grid.len() {
        if steps >= opts.max_steps {
            diverged = true;
            break;
        }
        steps += 1;
        h = h.min(t1 - t);
        k[0].clone_from(&f0);
        for s in 1..6 {
            let ys: Vec<f64> = (0..n)
                .map(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                .collect();
            k[s] = rhs(t + C[s] * h, &ys);
        }
        let ynew: Vec<f64> = (0..n).map(|i| y[i] + h * (0..6).map(|j| B[j] * k[j][i]).sum::<f64>()).collect();
        let fnew = rhs(t + h, &ynew);
        k[6].clone_from(&fnew);
        let mut err = 0.0;
        for i in 0..n {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            if h < 1e-14 * t.abs().max(1.0) {
                diverged = true;
                break;
            }
            continue;
        }
        if err <= 1.0 {
            while next < grid.len() && grid[next] <= t + h + 1e-12 * h {
                let theta = ((grid[next] - t) / h).clamp(0.0, 1.0);
                let pw = [theta, theta * theta, theta.powi(3), theta.powi(4)];
                let xi: Vec<f64> = (0..n)
                    .map(|i| {
                        let mut acc = 0.0;
                        for (j, kj) in k.iter().enumerate() {
                            let b: f64 = (0..4).map(|q| P[j][q] * pw[q]).sum();
                            acc += kj[i] * b;
                        }
                        y[i] + h * acc
                    })
                    .collect();
                out_t.push(grid[next]);
                out_x.push(xi);
                next += 1;
            }
            t += h;
            y = ynew;
            f0 = fnew;
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > opts.blowup {
                diverged = true;
                break;
            }
            let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h < 1e-14 * t.abs().max(1.0) {
            diverged = true;
            break;
        }
    }
    Trajectory { t: out_t, x: out_x, diverged }
}

/// State, output and input samples of one simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub diverged: bool,
}

/// Simulate `x' = rhs(x, u(t))`, `y = out(x)`.
pub fn simulate<R, O>(rhs: R, out: O, x0: &[f64], input: &InputSignal, t_end: f64, opts: SimOptions) -> SimResult
where
    R: Fn(&[f64], &[f64]) -> Vec<f64>,
    O: Fn(&[f64]) -> Vec<f64>,
{
    let traj = integrate(|t, x| rhs(x, &input.value(t)), x0, 0.0, t_end, opts);
    let y = traj.x.iter().map(|x| out(x)).collect();
    let u = traj.t.iter().map(|&t| input.value(t)).collect();
    SimResult { t: traj.t, x: traj.x, y, u, diverged: traj.diverged }
}

/// Per-channel `sqrt(∫ |y_a - y_b|^2 dt)` by the trapezoidal rule.
pub fn l2_error(ya: &[Vec<f64>], yb: &[Vec<f64>], t: &[f64]) -> Vec<f64> {
    let len = ya.len().min(yb.len()).min(t.len());
    let p = ya.first().map_or(0, |v| v.len());
    (0..p)
        .map(|c| {
            let mut acc = 0.0;
            for i in 1..len {
                let d0 = (ya[i - 1][c] - yb[i - 1][c]).powi(2);
                let d1 = (ya[i][c] - yb[i][c]).powi(2);
                acc += 0.5 * (d0 + d1) * (t[i] - t[i - 1]);
            }
            acc.sqrt()
        })
        .collect()
}

/// Per-channel Euclidean norm of the sampled differences, `sqrt(Σ_i |y_a(t_i) - y_b(t_i)|^2)`.
pub fn sampled_l2_error(ya: &[Vec<f64>], yb: &[Vec<f64>]) -> Vec<f64> {
    let len = ya.len().min(yb.len());
    let p = ya.first().map_or(0, |v| v.len());
    (0..p)
        .map(|c| (0..len).map(|i| (ya[i][c] - yb[i][c]).powi(2)).sum::<f64>().sqrt())
        .collect()
}

/// Number of grid points for step `dt` on `[0, t_end]`, endpoints included.
pub fn samples_for_step(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round() as usize + 1
}

/// Header `t,x1..xn,y1..yp,u1..um`.
pub fn csv_header(n: usize, p: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend((1..=p).map(|i| format!("y{i}")));
    h.extend((1..=m).map(|i| format!("u{i}")));
    h
}

/// One CSV row per sample, 17 significant digits.
pub fn csv_rows(res: &SimResult) -> Vec<Vec<String>> {
    let fmt = |v: f64| format!("{v:.16e}");
    (0..res.t.len())
        .map(|i| {
            let mut row = vec![fmt(res.t[i])];
            row.extend(res.x[i].iter().map(|&v| fmt(v)));
            row.extend(res.y[i].iter().map(|&v| fmt(v)));
            row.extend(res.u[i].iter().map(|&v| fmt(v)));
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let tr = integrate(|_, x| vec![-x[0]], &[1.0], 0.0, 2.0, SimOptions::default());
        assert!(!tr.diverged);
        assert_eq!(tr.t.len(), 2000);
        for (t, x) in tr.t.iter().zip(&tr.x) {
            assert!((x[0] - (-t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let opts = SimOptions { samples: 101, ..Default::default() };
        let tr = integrate(|_, x| vec![x[1], -x[0]], &[1.0, 0.0], 0.0, 10.0, opts);
        for (t, x) in tr.t.iter().zip(&tr.x) {
            assert!((x[0] - t.cos()).abs() < 1e-7);
        }
    }

    #[test]
    fn blowup_flagged() {
        let tr = integrate(|_, x| vec![x[0] * x[0]], &[1.0], 0.0, 2.0, SimOptions::default());
        assert!(tr.diverged);
        assert!(tr.t.len() < 2000);
    }

    #[test]
    fn l2_of_constant_gap() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let a: Vec<Vec<f64>> = t.iter().map(|_| vec![1.0]).collect();
        let b: Vec<Vec<f64>> = t.iter().map(|_| vec![0.0]).collect();
        assert!((l2_error(&a, &b, &t)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_norm_counts_points() {
        let a: Vec<Vec<f64>> = (0..4).map(|_| vec![1.0, 0.0]).collect();
        let b: Vec<Vec<f64>> = (0..4).map(|_| vec![0.0, 0.0]).collect();
        assert_eq!(sampled_l2_error(&a, &b), vec![2.0, 0.0]);
        assert_eq!(samples_for_step(5.0, 0.1), 51);
    }

    #[test]
    fn white_noise_is_seeded() {
        let a = InputSignal::white_noise(2, 1.0, 0.01, 1.0, 7);
        let b = InputSignal::white_noise(2, 1.0, 0.01, 1.0, 7);
        assert_eq!(a, b);
        assert_eq!(a.value(0.015), a.value(0.019));
    }
}
