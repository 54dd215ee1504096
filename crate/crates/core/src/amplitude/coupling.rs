use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ChainParams;
use crate::spectrum::{wrap_angle, Branch, Vec2, Wave};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Carriers produced by two base waves `e_1, e_2` up to quadratic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CarrierIndex {
    /// `e_1`
    First,
    /// `e_2`
    Second,
    /// `e_1^2`
    DoubleFirst,
    /// `e_2^2`
    DoubleSecond,
    /// `e_1 e_2`
    Sum,
    /// `e_1 conj(e_2)`
    Difference,
    /// the non-oscillating part
    Mean,
}

impl CarrierIndex {
    pub const ALL: [CarrierIndex; 7] = [
        CarrierIndex::First,
        CarrierIndex::Second,
        CarrierIndex::DoubleFirst,
        CarrierIndex::DoubleSecond,
        CarrierIndex::Sum,
        CarrierIndex::Difference,
        CarrierIndex::Mean,
    ];

    /// Powers `(m1, m2)` with carrier `e_1^{m1} e_2^{m2}`.
    pub fn multiples(self) -> (i64, i64) {
        match self {
            CarrierIndex::First => (1, 0),
            CarrierIndex::Second => (0, 1),
            CarrierIndex::DoubleFirst => (2, 0),
            CarrierIndex::DoubleSecond => (0, 2),
            CarrierIndex::Sum => (1, 1),
            CarrierIndex::Difference => (1, -1),
            CarrierIndex::Mean => (0, 0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CarrierIndex::First => "1",
            CarrierIndex::Second => "2",
            CarrierIndex::DoubleFirst => "(1,1)",
            CarrierIndex::DoubleSecond => "(2,2)",
            CarrierIndex::Sum => "(1,2)",
            CarrierIndex::Difference => "(1,-2)",
            CarrierIndex::Mean => "(1,-1)",
        }
    }
}

impl fmt::Display for CarrierIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CarrierIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        CarrierIndex::ALL
            .into_iter()
            .find(|c| c.label() == t)
            .ok_or_else(|| Error::UnknownIndex(s.to_string()))
    }
}

fn ex(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x) - 1.0
}

/// Quadratic source `K_iota` at one point, from the first-order amplitude
/// vectors `a[n] = A_{1,n}` of carriers with wavenumbers `theta[n]`.
///
/// Row 1 uses the upper signs, row 2 the lower ones; `K_(1,-1)` is half of
/// the non-oscillating force.
pub fn compute_k(
    index: CarrierIndex,
    a: &[Vec2; 2],
    p: &ChainParams,
    theta: [f64; 2],
) -> Result<Vec2> {
    let v = [p.v1.k2, p.v2.k2];
    let w = [p.w1.k2, p.w2.k2];
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (i, slot) in out.iter_mut().enumerate() {
        let s = if i == 0 { 1.0 } else { -1.0 };
        let o = 1 - i;
        *slot = match index {
            CarrierIndex::DoubleFirst | CarrierIndex::DoubleSecond => {
                let n = if index == CarrierIndex::DoubleFirst {
                    0
                } else {
                    1
                };
                let (x, th) = (a[n], theta[n]);
                s * v[i] * (x[o] * x[o] * ex(2.0 * s * th) - 2.0 * x[0] * x[1] * ex(s * th))
                    - w[i] * x[i] * x[i]
            }
            CarrierIndex::Sum => {
                let (x, y) = (a[0], a[1]);
                s * 2.0
                    * v[i]
                    * (x[o] * y[o] * ex(s * (theta[0] + theta[1]))
                        - x[i] * y[o] * ex(s * theta[1])
                        - x[o] * y[i] * ex(s * theta[0]))
                    - 2.0 * w[i] * x[i] * y[i]
            }
            CarrierIndex::Difference => {
                let x = a[0];
                let y = [a[1][0].conj(), a[1][1].conj()];
                s * 2.0
                    * v[i]
                    * (x[o] * y[o] * ex(s * (theta[0] - theta[1]))
                        - x[i] * y[o] * ex(-s * theta[1])
                        - x[o] * y[i] * ex(s * theta[0]))
                    - 2.0 * w[i] * x[i] * y[i]
            }
            CarrierIndex::Mean => (0..2)
                .map(|n| {
                    let x = a[n];
                    -s * 2.0 * v[i] * x[i].conj() * x[o] * ex(s * theta[n]) - w[i] * x[i].norm_sqr()
                })
                .sum(),
            CarrierIndex::First | CarrierIndex::Second => {
                return Err(Error::UnknownIndex(format!(
                    "{index} carries no quadratic source of its own"
                )))
            }
        };
    }
    Ok(out)
}

/// Interaction regime of the first-order envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MacroMode {
    NonResonant,
    ResonantGeneric,
    ResonantHalfPi,
    ResonantPi,
}

/// Closed-form coefficients of a resonant pair. `d` is only defined for
/// generic wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingCoefficients {
    pub mode: MacroMode,
    pub d1: Complex64,
    /// Absent at `theta_1 = +-pi/2`, where the second equation has its own
    /// closed-form coefficient.
    pub d2: Option<Complex64>,
    pub d: Option<f64>,
    pub k1: Complex64,
    pub k2: Complex64,
}

fn resonant_mode(w1: &Wave, w2: &Wave) -> Result<MacroMode> {
    if w1.branch != Branch::Acoustic || w2.branch != Branch::Optical {
        return Err(Error::NotResonant(
            "need an acoustic first and an optical second carrier".into(),
        ));
    }
    let dtheta = wrap_angle(w2.theta - 2.0 * w1.theta);
    let domega = w2.omega - 2.0 * w1.omega;
    if dtheta.abs() > 1e-10 || domega.abs() > 1e-10 * (1.0 + w2.omega) {
        return Err(Error::NotResonant(format!(
            "dtheta = {dtheta:e}, domega = {domega:e}"
        )));
    }
    Ok(if w1.is_degenerate() {
        MacroMode::ResonantPi
    } else if (w1.theta.abs() - FRAC_PI_2).abs() < 1e-10 {
        MacroMode::ResonantHalfPi
    } else {
        MacroMode::ResonantGeneric
    })
}

/// Coefficients of the coupled envelope equations of a resonant pair, in
/// the closed forms of the three regimes.
pub fn coupling_coefficients(
    p: &ChainParams,
    w1: &Wave,
    w2: &Wave,
) -> Result<CouplingCoefficients> {
    let mode = resonant_mode(w1, w2)?;
    let (c1, c2) = (p.c1(), p.c2());
    let (v11, v21) = (p.v1.k1, p.v2.k1);
    let (v12, v22, w12, w22) = (p.v1.k2, p.v2.k2, p.w1.k2, p.w2.k2);
    let (om1, om2) = (w1.omega, w2.omega);
    let (q1, q2) = (om1 * om1, om2 * om2);
    let lead1 = |d1: Complex64| d1 / (I * om1) * (q1 - c2) / ((q1 - c1) + (q1 - c2));
    let lead2 = |d2: Complex64| d2 / (2.0 * I * om2) * (q2 - c2) / ((q2 - c1) + (q2 - c2));
    match mode {
        MacroMode::ResonantPi => {
            let d1 = Complex64::new(-w12, 0.0);
            Ok(CouplingCoefficients {
                mode,
                d1,
                d2: Some(d1),
                d: None,
                k1: lead1(d1),
                k2: lead2(d1),
            })
        }
        MacroMode::ResonantHalfPi => {
            let rho1 = w1.rho().expect("generic polarization");
            let sg = w1.theta.signum();
            let pm = Complex64::new(1.0, sg);
            let d1 = (v22 / v21 - sg * I * w22 / (q1 - c2)) * (q1 - c1) + v12 * (rho1 * pm + 2.0);
            let k2 = (2.0 * v22 * (1.0 + rho1 * pm) - w22 * rho1 * rho1) / (2.0 * I * om2);
            Ok(CouplingCoefficients {
                mode,
                d1,
                d2: None,
                d: None,
                k1: lead1(d1),
                k2,
            })
        }
        MacroMode::ResonantGeneric => {
            let rho1 = w1.rho().expect("generic polarization");
            let rho2 = w2.rho().expect("generic polarization");
            let (t1, t2) = (w1.theta, w2.theta);
            let d = v11 * v21 * v21 * (2.0 + 4.0 * t1.cos() + 2.0 * t2.cos())
                / ((q1 - c2).powi(2) * (q2 - c2));
            let rb1 = rho1.conj();
            let d1 = d * v22 * (ex(-t1) / (rb1 * rho2) + ex(-2.0 * t1) / rho2 + ex(t1) / rb1)
                + v12 * (rb1 * rho2 * ex(t1) + rho2 * ex(2.0 * t1) + rb1 * ex(-t1))
                + d * w22
                - w12;
            let d2 = d * v22 * (ex(-2.0 * t1) / (rho1 * rho1) + 2.0 * ex(-t1) / rho1)
                + v12 * (rho1 * rho1 * ex(2.0 * t1) + 2.0 * rho1 * ex(t1))
                + d * w22
                - w12;
            Ok(CouplingCoefficients {
                mode,
                d1,
                d2: Some(d2),
                d: Some(d),
                k1: lead1(d1),
                k2: lead2(d2),
            })
        }
        MacroMode::NonResonant => unreachable!(),
    }
}

/// Coupling constants obtained by projecting the resonant sources onto the
/// left null vectors. Valid in every resonant regime.
pub fn projected_coupling(p: &ChainParams, w1: &Wave, w2: &Wave) -> Result<(Complex64, Complex64)> {
    let theta = [w1.theta, w2.theta];
    let amps = [w1.right, w2.right];
    let kd = compute_k(CarrierIndex::Difference, &amps, p, theta)?;
    let kk = compute_k(CarrierIndex::DoubleFirst, &amps, p, theta)?;
    let s1 = [kd[0].conj(), kd[1].conj()];
    let proj = |w: &Wave, s: Vec2| {
        (w.left[0] * s[0] + w.left[1] * s[1]) / (2.0 * I * w.omega * w.left_dot_right())
    };
    Ok((proj(w1, s1), proj(w2, kk)))
}

/// Transport velocity of the lead amplitude from the solvability condition;
/// agrees with the group velocity.
pub fn projected_velocity(p: &ChainParams, w: &Wave) -> f64 {
    let e = Complex64::from_polar(1.0, w.theta);
    let num = w.left[0] * p.v1.k1 * e * w.right[1] - w.left[1] * p.v2.k1 * e.conj() * w.right[0];
    (num / (2.0 * I * w.omega * w.left_dot_right())).re
}

/// First-order envelope dynamics `d_tau a_n = V_n d_y a_n + coupling_n(a)`
/// for the lead amplitudes `a_n` of one or two carriers.
#[derive(Debug, Clone)]
pub struct MacroSystem {
    pub params: ChainParams,
    pub mode: MacroMode,
    pub waves: Vec<Wave>,
    pub velocities: Vec<f64>,
    pub k1: Complex64,
    pub k2: Complex64,
    pub coefficients: Option<CouplingCoefficients>,
}

impl MacroSystem {
    /// Uncoupled transport of one or two carriers at their group velocities.
    pub fn non_resonant(p: &ChainParams, waves: Vec<Wave>) -> Result<Self> {
        if waves.is_empty() || waves.len() > 2 {
            return Err(Error::Config(format!(
                "expected one or two carriers, got {}",
                waves.len()
            )));
        }
        let velocities = waves
            .iter()
            .map(|w| {
                if w.is_degenerate() {
                    0.0
                } else {
                    w.group_velocity(p)
                }
            })
            .collect();
        Ok(Self {
            params: *p,
            mode: MacroMode::NonResonant,
            waves,
            velocities,
            k1: Complex64::new(0.0, 0.0),
            k2: Complex64::new(0.0, 0.0),
            coefficients: None,
        })
    }

    /// Coupled envelopes of an acoustic carrier and the optical carrier it
    /// drives at twice its frequency.
    pub fn resonant(p: &ChainParams, w1: Wave, w2: Wave) -> Result<Self> {
        let coeffs = coupling_coefficients(p, &w1, &w2)?;
        let velocities = if coeffs.mode == MacroMode::ResonantPi {
            vec![0.0, 0.0]
        } else {
            [&w1, &w2]
                .iter()
                .map(|w| {
                    if w.is_degenerate() {
                        0.0
                    } else {
                        w.group_velocity(p)
                    }
                })
                .collect()
        };
        Ok(Self {
            params: *p,
            mode: coeffs.mode,
            waves: vec![w1, w2],
            velocities,
            k1: coeffs.k1,
            k2: coeffs.k2,
            coefficients: Some(coeffs),
        })
    }

    pub fn is_resonant(&self) -> bool {
        self.mode != MacroMode::NonResonant
    }

    pub fn wave_count(&self) -> usize {
        self.waves.len()
    }

    /// Pointwise interaction terms `(k1 conj(a_1) a_2, k2 a_1^2)`.
    #[inline]
    pub fn coupling(&self, a: [Complex64; 2]) -> [Complex64; 2] {
        if self.is_resonant() {
            [self.k1 * a[0].conj() * a[1], self.k2 * a[0] * a[0]]
        } else {
            [Complex64::new(0.0, 0.0); 2]
        }
    }

    /// `d_tau a` from the envelope values and their `y`-derivatives.
    #[inline]
    pub fn tau_derivative(&self, a: [Complex64; 2], da: [Complex64; 2]) -> [Complex64; 2] {
        let c = self.coupling(a);
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for n in 0..self.waves.len() {
            out[n] = self.velocities[n] * da[n] + c[n];
        }
        out
    }
}
