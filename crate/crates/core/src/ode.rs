//! Dormand-Prince 5(4) stepper with the Hairer continuous extension,
//! specialised to the planar systems solved in this crate.

use crate::{Error, Result};

pub(crate) type State = [f64; 2];

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

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One accepted step together with its dense-output polynomial.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub t0: f64,
    pub h: f64,
    pub y1: State,
    pub dy1: State,
    rcont: [State; 5],
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Dense output at `t ∈ [t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> State {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let r = &self.rcont;
            *o = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

pub(crate) struct DormandPrince<F> {
    rhs: F,
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_min: f64,
}

impl<F> DormandPrince<F>
where
    F: Fn(f64, &State) -> Result<State>,
{
    pub fn new(rhs: F, rtol: f64, atol: f64, h_max: f64) -> Self {
        Self {
            rhs,
            rtol,
            atol,
            h_max,
            h_min: 1e-14,
        }
    }

    pub fn rhs(&self, t: f64, y: &State) -> Result<State> {
        (self.rhs)(t, y)
    }

    /// Attempts steps from `(t, y)` with derivative `dy` until one is
    /// accepted. Returns the step and the proposed next step size.
    pub fn advance(&self, t: f64, y: &State, dy: &State, h_try: f64) -> Result<(Step, f64)> {
        let mut h = h_try.min(self.h_max);
        loop {
            if h < self.h_min * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { s: t, step: h });
            }
            let k1 = *dy;
            let k2 = self.rhs(t + C2 * h, &axpy(y, &[(A21, &k1)], h))?;
            let k3 = self.rhs(t + C3 * h, &axpy(y, &[(A31, &k1), (A32, &k2)], h))?;
            let k4 = self.rhs(
                t + C4 * h,
                &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
            )?;
            let k5 = self.rhs(
                t + C5 * h,
                &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            )?;
            let k6 = self.rhs(
                t + h,
                &axpy(
                    y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h,
                ),
            )?;
            let y1 = axpy(
                y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                h,
            );
            let k7 = self.rhs(t + h, &y1)?;

            let mut err = 0.0f64;
            for i in 0..2 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                let q = e / sc;
                err += q * q;
            }
            let err = libm::sqrt(err / 2.0);
            if !err.is_finite() {
                h *= 0.2;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                let mut rcont = [[0.0; 2]; 5];
                for i in 0..2 {
                    let ydiff = y1[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[0][i] = y[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let step = Step {
                    t0: t,
                    h,
                    y1,
                    dy1: k7,
                    rcont,
                };
                return Ok((step, (h * factor).min(self.h_max)));
            }
            h *= factor.min(1.0);
        }
    }
}
