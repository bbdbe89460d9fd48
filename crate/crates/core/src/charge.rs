//! Charge matrices and Fayet–Iliopoulos parameters of the U(1)² theory.
//!
//! Rows of `Q` are Higgs flavours `A`, columns are gauge groups `a`. The
//! covariant derivative is `dφ_A - i Σ_a Q_{Aa} A^a φ_A`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};

pub type Mat2 = [[f64; 2]; 2];
pub type Vec2 = [f64; 2];

/// Tolerance of the geometric compatibility condition `Q r = (1, 1)`.
pub const COMPATIBILITY_TOL: f64 = 1e-12;
const LEAST_SQUARES_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeData {
    q: Mat2,
    r: Vec2,
}

impl ChargeData {
    pub fn new(q: Mat2, r: Vec2) -> Result<Self> {
        if q.iter().flatten().chain(r.iter()).any(|x| !x.is_finite()) {
            return Err(VortexError::InvalidInput(
                "charge data must be finite".into(),
            ));
        }
        if let Some(row) = q.iter().position(|row| row[0] == 0.0 && row[1] == 0.0) {
            return Err(VortexError::InvalidInput(format!(
                "flavour {} is uncharged (zero row in Q)",
                row + 1
            )));
        }
        Ok(Self { q, r })
    }

    pub fn identity(r: Vec2) -> Self {
        Self {
            q: [[1.0, 0.0], [0.0, 1.0]],
            r,
        }
    }

    pub fn q(&self) -> &Mat2 {
        &self.q
    }

    pub fn r(&self) -> &Vec2 {
        &self.r
    }

    pub fn det(&self) -> f64 {
        det(&self.q)
    }

    /// `(Q r)_A = Σ_a Q_{Aa} r_a`.
    pub fn q_times_r(&self) -> Vec2 {
        mat_vec(&self.q, &self.r)
    }

    /// `(Q Qᵀ)_{AB} = Σ_a Q_{Aa} Q_{Ba}`, the coupling between flavours.
    pub fn gram(&self) -> Mat2 {
        let q = &self.q;
        let mut g = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                g[a][b] = q[a][0] * q[b][0] + q[a][1] * q[b][1];
            }
        }
        g
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.q[1][0] == 0.0
    }
}

/// The SU(3) Cartan matrix `[[2, -1], [-1, 2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartanSU3;

impl CartanSU3 {
    pub const MATRIX: Mat2 = [[2.0, -1.0], [-1.0, 2.0]];

    pub fn matrix(&self) -> Mat2 {
        Self::MATRIX
    }
}

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Inverse of a 2×2 matrix, `None` when singular.
pub fn inverse(m: &Mat2) -> Option<Mat2> {
    let d = det(m);
    let scale = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if d.abs() <= 1e-14 * scale * scale {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

/// The one-parameter family of charge matrices with `Q Qᵀ = K` and the
/// matching Fayet–Iliopoulos vector solving `Q r = (1, 1)`.
///
/// `sign` and `sign_prime` are the two independent branch signs (`±`, `±′`);
/// `d ∈ [-√2, √2]`.
pub fn toda_charge_family(d: f64, sign: i8, sign_prime: i8) -> Result<ChargeData> {
    if !(d.is_finite() && d.abs() <= std::f64::consts::SQRT_2 * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(VortexError::InvalidInput(format!(
            "family parameter d must lie in [-√2, √2], got {d}"
        )));
    }
    if sign.abs() != 1 || sign_prime.abs() != 1 {
        return Err(VortexError::InvalidInput(
            "branch signs must be +1 or -1".into(),
        ));
    }
    let s = f64::from(sign);
    let sp = f64::from(sign_prime);
    let root = (2.0 - d * d).max(0.0).sqrt();
    let sqrt3 = 3.0f64.sqrt();
    let q = [
        [-sp * (root + s * sqrt3 * d) / 2.0, (-d + s * sqrt3 * root) / 2.0],
        [sp * root, d],
    ];
    let r = [sp * (root - s * sqrt3 * d) / 2.0, (s * sqrt3 * root + d) / 2.0];
    ChargeData::new(q, r)
}

/// Whether `Σ_a Q_{Aa} r_a = 1` for both flavours (within 1e-12).
pub fn check_compatibility(cd: &ChargeData) -> bool {
    cd.q_times_r()
        .iter()
        .all(|x| (x - 1.0).abs() <= COMPATIBILITY_TOL)
}

/// Winding numbers from fluxes, `N_A = -Σ_a Q_{Aa} k^a`.
pub fn winding_from_flux(cd: &ChargeData, k: &Vec2) -> Vec2 {
    let qk = mat_vec(&cd.q, k);
    [-qk[0], -qk[1]]
}

/// Vacuum values `v_A = |φ_A|²` solving `λ Σ_A v_A Q_{Aa} = λ₀ r_a`.
pub fn vacuum_moduli(cd: &ChargeData, lambda0: f64, lambda: f64) -> Result<Vec2> {
    let rhs = [lambda0 * cd.r[0], lambda0 * cd.r[1]];
    vacuum_with_rhs(cd, lambda, rhs)
}

/// Solves `λ Qᵀ v = rhs` for a non-negative `v`, falling back to the
/// minimum-norm least-squares solution when `Q` is singular.
pub(crate) fn vacuum_with_rhs(cd: &ChargeData, lambda: f64, rhs: Vec2) -> Result<Vec2> {
    if lambda == 0.0 {
        if rhs.iter().all(|x| *x == 0.0) {
            return Err(VortexError::NoVacuum(
                "λ = 0 leaves the vacuum undetermined".into(),
            ));
        }
        return Err(VortexError::NoVacuum(
            "λ = 0 forces λ₀ r = 0, which does not hold".into(),
        ));
    }
    let a = transpose(&cd.q).map(|row| row.map(|x| lambda * x));
    let v = match inverse(&a) {
        Some(inv) => mat_vec(&inv, &rhs),
        None => {
            // Minimum-norm solution of a rank-one system: v = aᵀ (a aᵀ)⁺ rhs.
            let norm2: f64 = a.iter().flatten().map(|x| x * x).sum();
            let at = transpose(&a);
            let p = mat_vec(&at, &rhs);
            let v = [p[0] / norm2, p[1] / norm2];
            let back = mat_vec(&a, &v);
            let resid = ((back[0] - rhs[0]).powi(2) + (back[1] - rhs[1]).powi(2)).sqrt();
            if resid > LEAST_SQUARES_TOL {
                return Err(VortexError::NoVacuum(format!(
                    "Fayet–Iliopoulos vector is not in the range of λQᵀ (residual {resid:e})"
                )));
            }
            v
        }
    };
    if v.iter().any(|x| *x < 0.0) {
        return Err(VortexError::NoVacuum(format!(
            "vacuum would need negative |φ|² = ({}, {}); D-term breaking",
            v[0], v[1]
        )));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn family_at_d_zero_upper_signs() {
        let cd = toda_charge_family(0.0, 1, 1).unwrap();
        let s = 1.0 / SQRT_2;
        let q_expected = [[-s, 3f64.sqrt() * s], [2.0 * s, 0.0]];
        assert!(max_abs_diff(cd.q(), &q_expected) < 1e-15);
        assert!((cd.r()[0] - s).abs() < 1e-15);
        assert!((cd.r()[1] - 3f64.sqrt() * s).abs() < 1e-15);
        assert!(max_abs_diff(&cd.gram(), &CartanSU3::MATRIX) < 1e-12);
        assert!(check_compatibility(&cd));
    }

    #[test]
    fn family_determinant() {
        for (s, sp) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let cd = toda_charge_family(1.0, s, sp).unwrap();
            assert!((cd.det().abs() - 3f64.sqrt()).abs() < 1e-12);
            // det Q = ∓′± √3.
            assert!((cd.det() + f64::from(s * sp) * 3f64.sqrt()).abs() < 1e-12);
        }
        assert!(toda_charge_family(1.5, 1, 1).is_err());
        assert!(toda_charge_family(0.0, 2, 1).is_err());
    }

    #[test]
    fn family_sweep() {
        for k in 0..100 {
            let d = -SQRT_2 + 2.0 * SQRT_2 * k as f64 / 99.0;
            for (s, sp) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let cd = toda_charge_family(d, s, sp).unwrap();
                assert!(max_abs_diff(&cd.gram(), &CartanSU3::MATRIX) < 1e-12);
                assert!((cd.det().abs() - 3f64.sqrt()).abs() < 1e-12);
                assert!(check_compatibility(&cd));
            }
        }
    }

    #[test]
    fn compatibility_examples() {
        let quiver = ChargeData::new([[1.0, -1.0], [0.0, 1.0]], [1.0, 1.0]).unwrap();
        assert!(!check_compatibility(&quiver));
        assert!(check_compatibility(&ChargeData::identity([1.0, 1.0])));
    }

    #[test]
    fn winding_examples() {
        let quiver = ChargeData::new([[1.0, -1.0], [0.0, 1.0]], [1.0, 1.0]).unwrap();
        assert_eq!(winding_from_flux(&quiver, &[-3.0, -2.0]), [1.0, 2.0]);
        assert_eq!(winding_from_flux(&quiver, &[0.0, 0.0]), [-0.0, -0.0]);
        let id = ChargeData::identity([1.0, 1.0]);
        assert_eq!(winding_from_flux(&id, &[-5.0, -7.0]), [5.0, 7.0]);
    }

    #[test]
    fn vacuum_examples() {
        let quiver = ChargeData::new([[1.0, -1.0], [0.0, 1.0]], [1.0, 1.0]).unwrap();
        assert_eq!(vacuum_moduli(&quiver, 1.0, 1.0).unwrap(), [1.0, 2.0]);
        assert_eq!(
            vacuum_moduli(&ChargeData::identity([1.0, 1.0]), 1.0, 1.0).unwrap(),
            [1.0, 1.0]
        );
        assert!(matches!(
            vacuum_moduli(&quiver, 1.0, -1.0),
            Err(VortexError::NoVacuum(_))
        ));
        assert!(matches!(
            vacuum_moduli(&quiver, 1.0, 0.0),
            Err(VortexError::NoVacuum(_))
        ));
    }

    #[test]
    fn vacuum_with_singular_charges() {
        let consistent = ChargeData::new([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0]).unwrap();
        let v = vacuum_moduli(&consistent, 1.0, 1.0).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
        let inconsistent = ChargeData::new([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0]).unwrap();
        assert!(matches!(
            vacuum_moduli(&inconsistent, 1.0, 1.0),
            Err(VortexError::NoVacuum(_))
        ));
    }

    #[test]
    fn uncharged_flavour_is_rejected() {
        assert!(ChargeData::new([[0.0, 0.0], [0.0, 1.0]], [1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn winding_is_linear(
            q in prop::array::uniform4(-3.0f64..3.0),
            k1 in prop::array::uniform2(-5i32..5),
            k2 in prop::array::uniform2(-5i32..5),
        ) {
            prop_assume!(q[0] != 0.0 || q[1] != 0.0);
            prop_assume!(q[2] != 0.0 || q[3] != 0.0);
            let cd = ChargeData::new([[q[0], q[1]], [q[2], q[3]]], [1.0, 1.0]).unwrap();
            // Integer-valued fluxes keep the arithmetic exact.
            let a = [f64::from(k1[0]), f64::from(k1[1])];
            let b = [f64::from(k2[0]), f64::from(k2[1])];
            let sum = winding_from_flux(&cd, &[a[0] + b[0], a[1] + b[1]]);
            let na = winding_from_flux(&cd, &a);
            let nb = winding_from_flux(&cd, &b);
            for i in 0..2 {
                prop_assert!((sum[i] - (na[i] + nb[i])).abs() <= 1e-12 * (1.0 + sum[i].abs()));
            }
        }
    }
}
