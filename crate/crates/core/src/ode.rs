//! Classical fixed-step fourth-order Runge–Kutta.

/// Scratch buffers for [`rk4_step`], sized to the state dimension.
#[derive(Debug, Clone)]
pub struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

/// Advance `state` by one step `h` of `dy/dt = f(y)`.
///
/// `f(y, out)` writes the derivative at `y` into `out`. The system is
/// autonomous over the step; time-dependent forcing is held fixed by the
/// caller (zero-order hold).
pub fn rk4_step<F>(f: &mut F, state: &mut [f64], h: f64, ws: &mut Rk4Workspace)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = state.len();
    debug_assert_eq!(ws.k1.len(), n);

    f(state, &mut ws.k1);
    for i in 0..n {
        ws.tmp[i] = state[i] + 0.5 * h * ws.k1[i];
    }
    f(&ws.tmp, &mut ws.k2);
    for i in 0..n {
        ws.tmp[i] = state[i] + 0.5 * h * ws.k2[i];
    }
    f(&ws.tmp, &mut ws.k3);
    for i in 0..n {
        ws.tmp[i] = state[i] + h * ws.k3[i];
    }
    f(&ws.tmp, &mut ws.k4);
    for i in 0..n {
        state[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}
