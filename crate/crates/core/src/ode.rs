//! Dormand-Prince 5(4) integrator with dense output.
//!
//! Small fixed-size systems only: the state is a `[f64; N]` array. The driver
//! hands every accepted step to an observer, which may stop the integration;
//! event location is then done by the caller with [`Step::interpolate`] and
//! [`single_step`].

use crate::error::{Error, Result};

/// Right-hand side `y' = f(t, y)`.
pub trait System<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> System<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct Settings<const N: usize> {
    pub rtol: f64,
    /// Per-component absolute floor of the error scale.
    pub atol: [f64; N],
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl<const N: usize> Settings<N> {
    pub fn with_rtol(rtol: f64) -> Self {
        Settings {
            rtol,
            atol: [crate::tolerance::INTEGRATOR_ATOL; N],
            h_init: 1e-2,
            h_max: 0.5,
            max_steps: 200_000,
        }
    }

    /// Override the absolute floor of component `i`.
    pub fn with_atol(mut self, i: usize, atol: f64) -> Self {
        self.atol[i] = atol;
        self
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

impl<const N: usize> Default for Settings<N> {
    fn default() -> Self {
        Self::with_rtol(crate::tolerance::INTEGRATOR_RTOL)
    }
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub dy0: [f64; N],
    pub dy1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Fourth-order dense output on `[t0, t0 + h]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let c = &self.cont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = c[0][i]
                + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
        }
        out
    }
}

/// What the observer wants after seeing a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

struct Stages<const N: usize> {
    y1: [f64; N],
    k: [[f64; N]; 7],
    err: [f64; N],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

fn stages<const N: usize, S: System<N>>(sys: &S, t: f64, y: &[f64; N], k1: [f64; N], h: f64) -> Stages<N> {
    let k2 = sys.rhs(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = sys.rhs(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = sys.rhs(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = sys.rhs(
        t + C5 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = sys.rhs(
        t + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y1 = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = sys.rhs(t + h, &y1);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Stages { y1, k: [k1, k2, k3, k4, k5, k6, k7], err }
}

/// A single fifth-order step of size `h` without error control.
///
/// Used to land exactly on event times inside an accepted step.
pub fn single_step<const N: usize, S: System<N>>(sys: &S, t: f64, y: &[f64; N], h: f64) -> [f64; N] {
    if h == 0.0 {
        return *y;
    }
    let k1 = sys.rhs(t, y);
    stages(sys, t, y, k1, h).y1
}

/// Integrate from `t0` towards `t_end`, handing each accepted step to
/// `observer`. Returns the final time and state (either `t_end` or where the
/// observer stopped).
pub fn integrate<const N: usize, S, O>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    settings: &Settings<N>,
    mut observer: O,
) -> Result<(f64, [f64; N])>
where
    S: System<N>,
    O: FnMut(&Step<N>) -> Control,
{
    let span = t_end - t0;
    if span <= 0.0 {
        return Ok((t0, y0));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    let mut h = settings.h_init.min(settings.h_max).min(span);
    let mut rejected_last = false;
    for _ in 0..settings.max_steps {
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-14);
        if last {
            h = remaining;
        }
        let st = stages(sys, t, &y, k1, h);
        let mut norm = 0.0;
        for i in 0..N {
            let scale = settings.atol[i] + settings.rtol * y[i].abs().max(st.y1[i].abs());
            let r = st.err[i] / scale;
            norm += r * r;
        }
        let norm = (norm / N as f64).sqrt();
        if !norm.is_finite() {
            h *= 0.1;
            rejected_last = true;
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::Integration(format!("non-finite state near t = {t}")));
            }
            continue;
        }
        if norm <= 1.0 {
            let k = &st.k;
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = st.y1[i] - y[i];
                let bspl = h * k[0][i] - dy;
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = bspl;
                cont[3][i] = dy - h * k[6][i] - bspl;
                cont[4][i] = h
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            let step = Step { t0: t, h, y0: y, y1: st.y1, dy0: k[0], dy1: k[6], cont };
            t = if last { t_end } else { t + h };
            y = st.y1;
            k1 = k[6];
            if observer(&step) == Control::Stop || last {
                return Ok((t, y));
            }
            let mut fac = 0.9 * norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 5.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(settings.h_max);
            rejected_last = false;
        } else {
            let fac = (0.9 * norm.powf(-0.2)).max(0.2);
            h *= fac;
            rejected_last = true;
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::Integration(format!("step size underflow near t = {t}")));
            }
        }
    }
    Err(Error::Integration(format!(
        "exceeded {} steps before reaching t = {t_end}",
        settings.max_steps
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let (t, y) = integrate(&sys, 0.0, [1.0, 0.0], 10.0, &Settings::default(), |_| Control::Continue).unwrap();
        assert_eq!(t, 10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-10, "{}", y[0] - 10f64.cos());
        assert!((y[1] + 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn dense_output_tracks_solution_inside_steps() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let mut worst: f64 = 0.0;
        integrate(&sys, 0.0, [1.0], 3.0, &Settings::with_rtol(1e-10), |step| {
            for j in 1..10 {
                let t = step.t0 + step.h * j as f64 / 10.0;
                worst = worst.max((step.interpolate(t)[0] - t.exp()).abs() / t.exp());
            }
            Control::Continue
        })
        .unwrap();
        assert!(worst < 1e-8, "dense output error {worst}");
    }

    #[test]
    fn observer_can_stop_early() {
        let sys = |_t: f64, _y: &[f64; 1]| [1.0];
        let (t, y) = integrate(&sys, 0.0, [0.0], 100.0, &Settings::default(), |step| {
            if step.y1[0] > 1.0 { Control::Stop } else { Control::Continue }
        })
        .unwrap();
        assert!(t < 100.0 && y[0] > 1.0);
        assert!((y[0] - t).abs() < 1e-12);
    }

    #[test]
    fn single_step_is_fifth_order_accurate() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let y = single_step(&sys, 0.0, &[1.0], 0.01);
        assert!((y[0] - 0.01f64.exp()).abs() < 1e-15);
    }
}
