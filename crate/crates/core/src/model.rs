//! Chain parameters, the paired-cell lattice operators and the norms used to
//! measure approximation errors.
//!
//! Cell `j` holds the pair `u_j = (u_{j,1}, u_{j,2}) = (x_{2j+1}, x_{2j})` of the
//! original alternating chain. All lattices are periodic in `j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial force `F(x) = k1 x + k2 x^2 + k3 x^3` of one interaction or
/// on-site potential.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialCoeffs {
    pub k1: f64,
    #[serde(default)]
    pub k2: f64,
    #[serde(default)]
    pub k3: f64,
}

impl PotentialCoeffs {
    pub const fn new(k1: f64, k2: f64, k3: f64) -> Self {
        Self { k1, k2, k3 }
    }

    pub const fn harmonic(k1: f64) -> Self {
        Self {
            k1,
            k2: 0.0,
            k3: 0.0,
        }
    }

    #[inline]
    pub fn force(&self, x: f64) -> f64 {
        x * (self.k1 + x * (self.k2 + x * self.k3))
    }

    /// Force without its linear part.
    #[inline]
    pub fn nonlinear_force(&self, x: f64) -> f64 {
        x * x * (self.k2 + x * self.k3)
    }

    /// Derivative of [`Self::nonlinear_force`].
    #[inline]
    pub fn nonlinear_stiffness(&self, x: f64) -> f64 {
        x * (2.0 * self.k2 + 3.0 * self.k3 * x)
    }

    /// Antiderivative of the force, vanishing at zero.
    #[inline]
    pub fn potential(&self, x: f64) -> f64 {
        x * x * (0.5 * self.k1 + x * (self.k2 / 3.0 + 0.25 * self.k3 * x))
    }

    fn is_finite(&self) -> bool {
        self.k1.is_finite() && self.k2.is_finite() && self.k3.is_finite()
    }
}

/// Coefficients of the two interaction potentials `V1, V2` and the two
/// on-site potentials `W1, W2`.
///
/// `V1, W1` act on the odd sublattice (`u_{j,1}`), `V2, W2` on the even one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub v1: PotentialCoeffs,
    pub v2: PotentialCoeffs,
    pub w1: PotentialCoeffs,
    pub w2: PotentialCoeffs,
}

impl ChainParams {
    pub fn harmonic(v11: f64, v21: f64, w11: f64, w21: f64) -> Self {
        Self {
            v1: PotentialCoeffs::harmonic(v11),
            v2: PotentialCoeffs::harmonic(v21),
            w1: PotentialCoeffs::harmonic(w11),
            w2: PotentialCoeffs::harmonic(w21),
        }
    }

    /// Same harmonic part, all nonlinear coefficients set to zero.
    pub fn linearized(&self) -> Self {
        Self::harmonic(self.v1.k1, self.v2.k1, self.w1.k1, self.w2.k1)
    }

    pub fn c1(&self) -> f64 {
        2.0 * self.v1.k1 + self.w1.k1
    }

    pub fn c2(&self) -> f64 {
        2.0 * self.v2.k1 + self.w2.k1
    }

    /// Reference interaction stiffness of the energy norm, `v_ref = v_{2,1}`.
    pub fn v_ref(&self) -> f64 {
        self.v2.k1
    }

    /// Mass weights `(M, m)` with `v_{1,1} = v_ref / M`, `v_{2,1} = v_ref / m`.
    pub fn mass_weights(&self) -> (f64, f64) {
        (self.v_ref() / self.v1.k1, self.v_ref() / self.v2.k1)
    }

    /// Checks the positivity and branch-separation inequalities, reporting the
    /// first one that fails.
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("v_1", &self.v1),
            ("v_2", &self.v2),
            ("w_1", &self.w1),
            ("w_2", &self.w2),
        ] {
            if !c.is_finite() {
                return Err(Error::Stability(format!(
                    "coefficients of {name} must be finite"
                )));
            }
        }
        let checks = [
            (self.v1.k1 > 0.0, "v_{1,1}>0 violated"),
            (self.v2.k1 > 0.0, "v_{2,1}>0 violated"),
            (self.w1.k1 > 0.0, "w_{1,1}>0 violated"),
            (self.w2.k1 > 0.0, "w_{2,1}>0 violated"),
            (
                4.0 * self.v1.k1 + self.w1.k1 > 0.0,
                "4v_{1,1}+w_{1,1}>0 violated",
            ),
            (
                4.0 * self.v2.k1 + self.w2.k1 > 0.0,
                "4v_{2,1}+w_{2,1}>0 violated",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Stability(msg.to_string()));
            }
        }
        let (c1, c2) = (self.c1(), self.c2());
        if c2 <= c1 {
            return Err(Error::Stability(format!(
                "c2>c1 violated (c1={c1}, c2={c2})"
            )));
        }
        if c1 * c2 <= 4.0 * self.v1.k1 * self.v2.k1 {
            return Err(Error::Stability(format!(
                "c1*c2>4*v_{{1,1}}*v_{{2,1}} violated (c1*c2={}, 4*v11*v21={})",
                c1 * c2,
                4.0 * self.v1.k1 * self.v2.k1
            )));
        }
        Ok(())
    }

    /// True when the interaction forces derive from one bond potential once the
    /// sublattice masses are taken into account (`V1 = (v11/v21) V2`).
    pub fn is_hamiltonian(&self) -> bool {
        let mu = self.v1.k1 / self.v2.k1;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        close(self.v1.k2, mu * self.v2.k2) && close(self.v1.k3, mu * self.v2.k3)
    }
}

/// Positions and velocities of `N` cells at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub pos: Vec<[f64; 2]>,
    pub vel: Vec<[f64; 2]>,
    pub t: f64,
}

impl LatticeState {
    pub fn zeros(cells: usize) -> Self {
        Self {
            pos: vec![[0.0; 2]; cells],
            vel: vec![[0.0; 2]; cells],
            t: 0.0,
        }
    }

    pub fn new(pos: Vec<[f64; 2]>, vel: Vec<[f64; 2]>, t: f64) -> Result<Self> {
        if pos.len() != vel.len() {
            return Err(Error::LengthMismatch {
                expected: pos.len(),
                got: vel.len(),
            });
        }
        Ok(Self { pos, vel, t })
    }

    pub fn cells(&self) -> usize {
        self.pos.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .pos
                .iter()
                .chain(&self.vel)
                .all(|p| p[0].is_finite() && p[1].is_finite())
    }
}

/// Packs an alternating chain `x_0, x_1, ...` into cells `(x_{2j+1}, x_{2j})`.
pub fn cell_pack(x: &[f64]) -> Result<Vec<[f64; 2]>> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::LengthMismatch {
            expected: x.len() + 1,
            got: x.len(),
        });
    }
    Ok(x.chunks_exact(2).map(|c| [c[1], c[0]]).collect())
}

/// Inverse of [`cell_pack`].
pub fn cell_unpack(u: &[[f64; 2]]) -> Vec<f64> {
    u.iter().flat_map(|c| [c[1], c[0]]).collect()
}

#[inline]
fn neighbours(j: usize, n: usize) -> (usize, usize) {
    let left = if j == 0 { n - 1 } else { j - 1 };
    let right = if j + 1 == n { 0 } else { j + 1 };
    (left, right)
}

#[inline]
fn linear_row(p: &ChainParams, left: [f64; 2], here: [f64; 2], right: [f64; 2]) -> [f64; 2] {
    [
        p.v1.k1 * (right[1] - 2.0 * here[0] + here[1]) - p.w1.k1 * here[0],
        p.v2.k1 * (here[0] - 2.0 * here[1] + left[0]) - p.w2.k1 * here[1],
    ]
}

#[inline]
fn nonlinear_row(p: &ChainParams, left: [f64; 2], here: [f64; 2], right: [f64; 2]) -> [f64; 2] {
    let inner = here[0] - here[1];
    [
        p.v1.nonlinear_force(right[1] - here[0])
            - p.v1.nonlinear_force(inner)
            - p.w1.nonlinear_force(here[0]),
        p.v2.nonlinear_force(inner)
            - p.v2.nonlinear_force(here[1] - left[0])
            - p.w2.nonlinear_force(here[1]),
    ]
}

/// `(Lu)_j`, the harmonic part of the lattice force.
pub fn linear_apply(p: &ChainParams, pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; pos.len()];
    linear_apply_into(p, pos, &mut out);
    out
}

pub fn linear_apply_into(p: &ChainParams, pos: &[[f64; 2]], out: &mut [[f64; 2]]) {
    let n = pos.len();
    for j in 0..n {
        let (l, r) = neighbours(j, n);
        out[j] = linear_row(p, pos[l], pos[j], pos[r]);
    }
}

/// `(M(u))_j`, the quadratic and cubic force terms.
pub fn nonlinear_apply(p: &ChainParams, pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = pos.len();
    (0..n)
        .map(|j| {
            let (l, r) = neighbours(j, n);
            nonlinear_row(p, pos[l], pos[j], pos[r])
        })
        .collect()
}

/// `Lu + M(u)` written into `out`. Each entry is the sum of exactly the values
/// returned by [`linear_apply`] and [`nonlinear_apply`].
pub fn acceleration_into(p: &ChainParams, pos: &[[f64; 2]], out: &mut [[f64; 2]]) {
    let n = pos.len();
    for j in 0..n {
        let (l, r) = neighbours(j, n);
        let lin = linear_row(p, pos[l], pos[j], pos[r]);
        let nl = nonlinear_row(p, pos[l], pos[j], pos[r]);
        out[j] = [lin[0] + nl[0], lin[1] + nl[1]];
    }
}

/// Directional derivative of `u -> Lu + M(u)` at `pos` along `dir`.
pub fn jacobian_apply(p: &ChainParams, pos: &[[f64; 2]], dir: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = pos.len();
    (0..n)
        .map(|j| {
            let (l, r) = neighbours(j, n);
            let lin = linear_row(p, dir[l], dir[j], dir[r]);
            let (u, w) = (pos[j], dir[j]);
            let s_right = pos[r][1] - u[0];
            let s_inner = u[0] - u[1];
            let s_left = u[1] - pos[l][0];
            let d_right = dir[r][1] - w[0];
            let d_inner = w[0] - w[1];
            let d_left = w[1] - dir[l][0];
            [
                lin[0] + p.v1.nonlinear_stiffness(s_right) * d_right
                    - p.v1.nonlinear_stiffness(s_inner) * d_inner
                    - p.w1.nonlinear_stiffness(u[0]) * w[0],
                lin[1] + p.v2.nonlinear_stiffness(s_inner) * d_inner
                    - p.v2.nonlinear_stiffness(s_left) * d_left
                    - p.w2.nonlinear_stiffness(u[1]) * w[1],
            ]
        })
        .collect()
}

/// Energy norm `||(u, u')||_Y`, preserved by the linear flow.
pub fn energy_norm(s: &LatticeState, p: &ChainParams) -> f64 {
    energy_norm_sq(&s.pos, &s.vel, p).sqrt()
}

pub(crate) fn energy_norm_sq(pos: &[[f64; 2]], vel: &[[f64; 2]], p: &ChainParams) -> f64 {
    let n = pos.len();
    let v_ref = p.v_ref();
    let (m_big, m_small) = p.mass_weights();
    let mut acc = 0.0;
    for j in 0..n {
        let (_, r) = neighbours(j, n);
        let u = pos[j];
        let bond_right = pos[r][1] - u[0];
        let bond_inner = u[0] - u[1];
        acc += v_ref * (bond_right * bond_right + bond_inner * bond_inner)
            + m_big * p.w1.k1 * u[0] * u[0]
            + m_small * p.w2.k1 * u[1] * u[1];
        acc += m_big * vel[j][0] * vel[j][0] + m_small * vel[j][1] * vel[j][1];
    }
    acc
}

/// Plain `(l^2)^4` norm of a position/velocity pair.
pub fn l2_norm(pos: &[[f64; 2]], vel: &[[f64; 2]]) -> f64 {
    pos.iter()
        .chain(vel)
        .map(|c| c[0] * c[0] + c[1] * c[1])
        .sum::<f64>()
        .sqrt()
}

/// Mass-weighted `l^2` norm of a force-like field.
pub fn mass_norm(field: &[[f64; 2]], p: &ChainParams) -> f64 {
    let (m_big, m_small) = p.mass_weights();
    field
        .iter()
        .map(|c| m_big * c[0] * c[0] + m_small * c[1] * c[1])
        .sum::<f64>()
        .sqrt()
}

/// Total energy with the odd sublattice as mass reference.
///
/// Every bond carries `V1`; the even sublattice is weighted by
/// `mu = v_{1,1}/v_{2,1}`. This is the conserved energy of the lattice
/// whenever [`ChainParams::is_hamiltonian`] holds.
pub fn hamiltonian_energy(s: &LatticeState, p: &ChainParams) -> f64 {
    let n = s.cells();
    let mu = p.v1.k1 / p.v2.k1;
    let mut acc = 0.0;
    for j in 0..n {
        let (_, r) = neighbours(j, n);
        let u = s.pos[j];
        let v = s.vel[j];
        acc += 0.5 * v[0] * v[0] + 0.5 * mu * v[1] * v[1];
        acc += p.v1.potential(s.pos[r][1] - u[0]) + p.v1.potential(u[0] - u[1]);
        acc += p.w1.potential(u[0]) + mu * p.w2.potential(u[1]);
    }
    acc
}

/// Constants `(kappa_lo, kappa_hi)` with
/// `kappa_lo ||.||_{(l^2)^4} <= ||.||_Y <= kappa_hi ||.||_{(l^2)^4}`,
/// from the extreme eigenvalues of the energy-norm symbol.
pub fn norm_equivalence_bounds(p: &ChainParams) -> (f64, f64) {
    let v_ref = p.v_ref();
    let (m_big, m_small) = p.mass_weights();
    let a = 2.0 * v_ref + m_big * p.w1.k1;
    let d = 2.0 * v_ref + m_small * p.w2.k1;
    // |e^{i theta} + 1| peaks at theta = 0, where both eigenvalues are extreme.
    let b = 2.0 * v_ref;
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let lo = (mean - rad).min(m_big).min(m_small);
    let hi = (mean + rad).max(m_big).max(m_small);
    (lo.sqrt(), hi.sqrt())
}

/// Constant `C` with `||M(u) - M(w)|| <= C (|u|_inf + |w|_inf) ||u - w||` in
/// `(l^2)^2` whenever both sup norms are at most `c0`.
pub fn nonlinear_lipschitz(p: &ChainParams, c0: f64) -> f64 {
    let bond = |c: &PotentialCoeffs| c.k2.abs() + 4.0 * c0 * c.k3.abs();
    let site = |c: &PotentialCoeffs| c.k2.abs() + 2.0 * c0 * c.k3.abs();
    let row1 = 4.0 * std::f64::consts::SQRT_2 * bond(&p.v1) + site(&p.w1);
    let row2 = 4.0 * std::f64::consts::SQRT_2 * bond(&p.v2) + site(&p.w2);
    (row1 * row1 + row2 * row2).sqrt()
}
