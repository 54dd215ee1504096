use num_complex::Complex64;

use super::coupling::{compute_k, CarrierIndex, MacroMode, MacroSystem};
use super::field::AmplitudeField;
use crate::error::{Error, Result};
use crate::resonance::resonance_tolerance;
use crate::spectrum::{det2, dispersion_matrix, solve2, Branch, Mat2, Vec2};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Second-order amplitude vectors `A_{2,iota}` sampled on a grid, one entry
/// per carrier index.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderSet {
    entries: Vec<(CarrierIndex, Vec<Vec2>)>,
}

impl SecondOrderSet {
    pub fn get(&self, index: CarrierIndex) -> Option<&[Vec2]> {
        self.entries
            .iter()
            .find(|(i, _)| *i == index)
            .map(|(_, v)| v.as_slice())
    }

    pub fn indices(&self) -> Vec<CarrierIndex> {
        self.entries.iter().map(|(i, _)| *i).collect()
    }

    pub fn entries(&self) -> &[(CarrierIndex, Vec<Vec2>)] {
        &self.entries
    }
}

#[derive(Debug, Clone)]
enum Item {
    Lead(usize),
    Combination { h: Mat2, factor: f64 },
}

/// Pointwise recipe for the second-order amplitudes of one envelope system.
#[derive(Debug, Clone)]
pub struct CorrectorPlan {
    system: MacroSystem,
    items: Vec<(CarrierIndex, Item)>,
}

impl CorrectorPlan {
    /// Fixes the index set of the regime and checks that every combination
    /// carrier stays off the dispersion relation.
    pub fn new(sys: &MacroSystem) -> Result<Self> {
        use CarrierIndex::*;
        let indices: &[CarrierIndex] = match (sys.mode, sys.wave_count()) {
            (MacroMode::NonResonant, 1) => &[First, DoubleFirst, Mean],
            (MacroMode::NonResonant, _) => &[
                First,
                Second,
                DoubleFirst,
                DoubleSecond,
                Sum,
                Difference,
                Mean,
            ],
            _ => &[First, Second, DoubleSecond, Sum, Mean],
        };
        let mut items = Vec::with_capacity(indices.len());
        for &idx in indices {
            let item = match idx {
                First => Item::Lead(0),
                Second => Item::Lead(1),
                _ => {
                    let (om, th) = carrier_of(sys, idx);
                    let h = dispersion_matrix(&sys.params, om, th);
                    let det = det2(&h).norm();
                    let tol = resonance_tolerance(om);
                    if det < tol {
                        return Err(Error::NearResonance {
                            index: idx.label().to_string(),
                            det,
                            tol,
                        });
                    }
                    Item::Combination {
                        h,
                        factor: if idx == Mean { 2.0 } else { 1.0 },
                    }
                }
            };
            items.push((idx, item));
        }
        Ok(Self {
            system: sys.clone(),
            items,
        })
    }

    pub fn system(&self) -> &MacroSystem {
        &self.system
    }

    pub fn indices(&self) -> Vec<CarrierIndex> {
        self.items.iter().map(|(i, _)| *i).collect()
    }

    /// Frequency and wavenumber of the carrier `e_1^{m1} e_2^{m2}`.
    pub fn carrier(&self, index: CarrierIndex) -> (f64, f64) {
        carrier_of(&self.system, index)
    }

    /// Second-order amplitudes at one point, in the order of
    /// [`Self::indices`], from the lead amplitudes and their derivatives.
    pub fn point(&self, a: [Complex64; 2], da: [Complex64; 2]) -> Vec<Vec2> {
        let sys = &self.system;
        let p = &sys.params;
        let zero = Complex64::new(0.0, 0.0);
        let waves = &sys.waves;
        let theta = [waves[0].theta, waves.get(1).map_or(0.0, |w| w.theta)];
        let amp = |n: usize| -> Vec2 {
            waves
                .get(n)
                .map_or([zero; 2], |w| [a[n] * w.right[0], a[n] * w.right[1]])
        };
        let amps = [amp(0), amp(1)];
        let dt = sys.tau_derivative(a, da);
        let k_of = |idx| compute_k(idx, &amps, p, theta).expect("combination index");
        self.items
            .iter()
            .map(|(idx, item)| match item {
                Item::Combination { h, factor } => {
                    let k = k_of(*idx);
                    let x = solve2(h, &k).expect("checked non-singular");
                    [-factor * x[0], -factor * x[1]]
                }
                Item::Lead(n) => {
                    let w = &waves[*n];
                    let r = w.right;
                    let e = Complex64::from_polar(1.0, w.theta);
                    let g = [
                        -2.0 * I * w.omega * dt[*n] * r[0] + p.v1.k1 * e * da[*n] * r[1],
                        -2.0 * I * w.omega * dt[*n] * r[1] - p.v2.k1 * e.conj() * da[*n] * r[0],
                    ];
                    let s = if !sys.is_resonant() {
                        [zero; 2]
                    } else if *n == 0 {
                        let kd = k_of(CarrierIndex::Difference);
                        [kd[0].conj(), kd[1].conj()]
                    } else {
                        k_of(CarrierIndex::DoubleFirst)
                    };
                    let (c1, c2) = (p.c1(), p.c2());
                    if !w.is_degenerate() {
                        [zero, -(g[0] + s[0]) / (p.v1.k1 * (e + 1.0))]
                    } else if w.branch == Branch::Acoustic {
                        [zero, -(g[1] + s[1]) / (c1 - c2)]
                    } else {
                        [-(g[0] + s[0]) / (c2 - c1), zero]
                    }
                }
            })
            .collect()
    }
}

fn carrier_of(sys: &MacroSystem, index: CarrierIndex) -> (f64, f64) {
    let (m1, m2) = index.multiples();
    let w = &sys.waves;
    let (o2, t2) = w.get(1).map_or((0.0, 0.0), |w| (w.omega, w.theta));
    (
        m1 as f64 * w[0].omega + m2 as f64 * o2,
        m1 as f64 * w[0].theta + m2 as f64 * t2,
    )
}

/// Second-order amplitudes on the grid of the first-order fields `a1`, with
/// their `y`-derivatives `da1`; `tau`-derivatives come from the envelope
/// equations of `sys`.
pub fn second_order_amplitudes(
    sys: &MacroSystem,
    a1: &[AmplitudeField],
    da1: &[AmplitudeField],
) -> Result<SecondOrderSet> {
    let nw = sys.wave_count();
    if a1.len() != nw || da1.len() != nw {
        return Err(Error::LengthMismatch {
            expected: nw,
            got: a1.len().min(da1.len()),
        });
    }
    let n = a1[0].len();
    if a1.iter().chain(da1).any(|f| f.len() != n) {
        return Err(Error::Grid("amplitude fields on different grids".into()));
    }
    let plan = CorrectorPlan::new(sys)?;
    let idx = plan.indices();
    let mut entries: Vec<(CarrierIndex, Vec<Vec2>)> =
        idx.iter().map(|&i| (i, Vec::with_capacity(n))).collect();
    let zero = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let get = |f: &[AmplitudeField], k: usize| f.get(k).map_or(zero, |f| f.values()[j]);
        let a = [get(a1, 0), get(a1, 1)];
        let da = [get(da1, 0), get(da1, 1)];
        for (slot, v) in entries.iter_mut().zip(plan.point(a, da)) {
            slot.1.push(v);
        }
    }
    Ok(SecondOrderSet { entries })
}
