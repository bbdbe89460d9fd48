//! Constant-curvature background surfaces and their Cartesian sampling grids.
//!
//! A surface is fixed by the sign `λ₀ ∈ {-1, 0, 1}`. Its metric in the local
//! coordinate `z` is `Ω₀ |dz|²` with `Ω₀ = 4 / (1 - λ₀|z|²)²`, so the Gauss
//! curvature is `K₀ = -λ₀`: the Poincaré disk for `λ₀ = 1`, the plane for
//! `λ₀ = 0` and the stereographic sphere patch for `λ₀ = -1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};

/// Default truncation radius of the Poincaré disk.
pub const DISK_DEFAULT_RADIUS: f64 = 0.95;
/// Default truncation radius of the plane and the sphere patch.
pub const OPEN_DEFAULT_RADIUS: f64 = 4.0;
/// Smallest admissible grid parameter `n`.
pub const MIN_GRID_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    lambda0: i8,
    radius_cutoff: f64,
}

impl Surface {
    /// Surface with the default truncation radius for its curvature sign.
    pub fn new(lambda0: i8) -> Result<Self> {
        let radius = if lambda0 == 1 {
            DISK_DEFAULT_RADIUS
        } else {
            OPEN_DEFAULT_RADIUS
        };
        Self::with_radius(lambda0, radius)
    }

    /// Surface truncated at `radius_cutoff`.
    ///
    /// For the disk the cutoff may equal 1: grid nodes are always taken
    /// strictly inside `|z| < radius_cutoff`, so every sampled point lies in
    /// the open disk.
    pub fn with_radius(lambda0: i8, radius_cutoff: f64) -> Result<Self> {
        if !matches!(lambda0, -1..=1) {
            return Err(VortexError::InvalidInput(format!(
                "lambda0 must be -1, 0 or 1, got {lambda0}"
            )));
        }
        if !(radius_cutoff.is_finite() && radius_cutoff > 0.0) {
            return Err(VortexError::InvalidInput(format!(
                "radius cutoff must be positive, got {radius_cutoff}"
            )));
        }
        if lambda0 == 1 && radius_cutoff > 1.0 {
            return Err(VortexError::InvalidInput(format!(
                "the Poincaré disk needs radius cutoff <= 1, got {radius_cutoff}"
            )));
        }
        Ok(Self {
            lambda0,
            radius_cutoff,
        })
    }

    pub fn lambda0(&self) -> i8 {
        self.lambda0
    }

    pub fn lambda0_f64(&self) -> f64 {
        f64::from(self.lambda0)
    }

    pub fn radius_cutoff(&self) -> f64 {
        self.radius_cutoff
    }

    /// Gauss curvature `K₀ = -λ₀`.
    pub fn gauss_curvature(&self) -> f64 {
        -self.lambda0_f64()
    }

    pub fn is_disk(&self) -> bool {
        self.lambda0 == 1
    }

    /// Whether `z` lies in the model domain (the open unit disk for `λ₀ = 1`,
    /// everywhere otherwise).
    pub fn contains(&self, z: Complex64) -> bool {
        z.re.is_finite() && z.im.is_finite() && (!self.is_disk() || z.norm_sqr() < 1.0)
    }

    /// `1 - λ₀|z|²`, the factor relating `h` to `g`.
    pub fn metric_factor(&self, z: Complex64) -> f64 {
        1.0 - self.lambda0_f64() * z.norm_sqr()
    }

    /// Conformal factor `Ω₀(z) = 4 / (1 - λ₀|z|²)²`.
    pub fn conformal_factor(&self, z: Complex64) -> Result<f64> {
        if !self.contains(z) {
            return Err(VortexError::InvalidInput(format!(
                "z = {z} lies outside the model domain of the λ₀ = {} surface",
                self.lambda0
            )));
        }
        Ok(self.conformal_factor_unchecked(z))
    }

    #[inline]
    pub(crate) fn conformal_factor_unchecked(&self, z: Complex64) -> f64 {
        let m = self.metric_factor(z);
        4.0 / (m * m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    Boundary,
    Excluded,
}

/// Uniform `(2n+1)²` lattice over `[-R, R]²`, masked to the disk `|z| < R`.
///
/// Nodes strictly inside the disk whose four axis neighbours are also inside
/// are interior; the remaining inside nodes are boundary nodes and carry
/// Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    radius: f64,
    spacing: f64,
    classes: Vec<NodeClass>,
}

impl Grid {
    pub fn new(surface: &Surface, n: usize) -> Result<Self> {
        if n < MIN_GRID_N {
            return Err(VortexError::InvalidInput(format!(
                "grid parameter n must be at least {MIN_GRID_N}, got {n}"
            )));
        }
        let radius = surface.radius_cutoff();
        let spacing = radius / n as f64;
        let side = 2 * n + 1;
        // Integer-exact membership test: |z| < R  <=>  i² + j² < n² in lattice units.
        let inside = |i: isize, j: isize| -> bool {
            let (di, dj) = (i - n as isize, j - n as isize);
            i >= 0
                && j >= 0
                && (i as usize) < side
                && (j as usize) < side
                && di * di + dj * dj < (n * n) as isize
        };
        let mut classes = Vec::with_capacity(side * side);
        for j in 0..side as isize {
            for i in 0..side as isize {
                let class = if !inside(i, j) {
                    NodeClass::Excluded
                } else if inside(i + 1, j) && inside(i - 1, j) && inside(i, j + 1) && inside(i, j - 1)
                {
                    NodeClass::Interior
                } else {
                    NodeClass::Boundary
                };
                classes.push(class);
            }
        }
        Ok(Self {
            n,
            radius,
            spacing,
            classes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of lattice points per side, `2n + 1`.
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Row-major index of lattice point `(i, j)`, `i` along x.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.side() + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.side(), idx / self.side())
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Complex64 {
        let (i, j) = self.coords(idx);
        let offset = self.n as f64;
        Complex64::new(
            (i as f64 - offset) * self.spacing,
            (j as f64 - offset) * self.spacing,
        )
    }

    #[inline]
    pub fn class(&self, idx: usize) -> NodeClass {
        self.classes[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    /// Indices of the four axis neighbours (east, west, north, south).
    /// Only meaningful for interior nodes.
    #[inline]
    pub fn neighbours(&self, idx: usize) -> [usize; 4] {
        let side = self.side();
        [idx + 1, idx - 1, idx + side, idx - side]
    }

    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices_of(NodeClass::Interior)
    }

    pub fn boundary_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices_of(NodeClass::Boundary)
    }

    /// Interior and boundary nodes, in row-major order.
    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != NodeClass::Excluded)
            .map(|(k, _)| k)
    }

    fn indices_of(&self, class: NodeClass) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == class)
            .map(|(k, _)| k)
    }

    /// Five-point discrete Laplacian `∂ₓ² + ∂ᵧ²` of `field` at an interior node.
    #[inline]
    pub fn laplacian_at(&self, field: &[f64], idx: usize) -> f64 {
        let [e, w, n, s] = self.neighbours(idx);
        (field[e] + field[w] + field[n] + field[s] - 4.0 * field[idx]) / (self.spacing * self.spacing)
    }

    /// Whether two grids sample the same lattice.
    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.n == other.n && self.radius.to_bits() == other.radius.to_bits()
    }
}

/// Builds the sampling grid of `surface` with parameter `n` (`n >= 16`).
pub fn build_grid(surface: &Surface, n: usize) -> Result<Grid> {
    Grid::new(surface, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conformal_factor_examples() {
        let disk = Surface::new(1).unwrap();
        assert_eq!(disk.conformal_factor(Complex64::new(0.0, 0.0)).unwrap(), 4.0);
        let flat = Surface::new(0).unwrap();
        assert_eq!(flat.conformal_factor(Complex64::new(7.0, 2.0)).unwrap(), 4.0);
        assert_relative_eq!(
            disk.conformal_factor(Complex64::new(0.5, 0.0)).unwrap(),
            4.0 / 0.5625,
            max_relative = 1e-15
        );
    }

    #[test]
    fn conformal_factor_rejects_points_off_the_disk() {
        let disk = Surface::new(1).unwrap();
        assert!(matches!(
            disk.conformal_factor(Complex64::new(1.0, 0.0)),
            Err(VortexError::InvalidInput(_))
        ));
        // The sphere patch accepts any finite point.
        let sphere = Surface::new(-1).unwrap();
        assert_relative_eq!(
            sphere.conformal_factor(Complex64::new(1.0, 0.0)).unwrap(),
            1.0
        );
    }

    #[test]
    fn curvature_is_minus_lambda0() {
        for l0 in [-1, 0, 1] {
            assert_eq!(Surface::new(l0).unwrap().gauss_curvature(), -f64::from(l0));
        }
        assert!(Surface::new(2).is_err());
        assert!(Surface::with_radius(1, 1.2).is_err());
    }

    #[test]
    fn grid_spacing_examples() {
        let disk = Surface::with_radius(1, 0.95).unwrap();
        assert_eq!(build_grid(&disk, 16).unwrap().spacing(), 0.95 / 16.0);
        let flat = Surface::with_radius(0, 4.0).unwrap();
        assert_eq!(build_grid(&flat, 64).unwrap().spacing(), 0.0625);
        assert!(matches!(
            build_grid(&flat, 15),
            Err(VortexError::InvalidInput(_))
        ));
    }

    #[test]
    fn grid_classification_invariants() {
        let s = Surface::with_radius(1, 0.9).unwrap();
        let g = build_grid(&s, 40).unwrap();
        for k in g.interior_indices() {
            for nb in g.neighbours(k) {
                assert_ne!(g.class(nb), NodeClass::Excluded);
            }
        }
        for k in g.boundary_indices() {
            let r = g.point(k).norm();
            assert!(r < g.radius() && r > g.radius() - g.spacing() - 1e-12);
        }
        for k in 0..g.len() {
            if g.class(k) == NodeClass::Excluded {
                assert!(g.point(k).norm() >= g.radius() - 1e-12);
            }
        }
        // Deterministic.
        assert_eq!(g, build_grid(&s, 40).unwrap());
    }

    #[test]
    fn rotation_invariance_of_conformal_factor() {
        let s = Surface::with_radius(1, 0.95).unwrap();
        let g = build_grid(&s, 32).unwrap();
        for k in g.active_indices() {
            let z = g.point(k);
            let radial = Complex64::new(z.norm(), 0.0);
            let a = s.conformal_factor(z).unwrap();
            let b = s.conformal_factor(radial).unwrap();
            assert!((a - b).abs() <= 1e-13 * a);
        }
    }

    /// `∇² log((1 - λ₀|z|²)/2) = -λ₀ Ω₀`, the identity that turns the equation
    /// for `h` into the Liouville equation for `g`.
    #[test]
    fn metric_log_laplacian_identity() {
        for l0 in [-1i8, 0, 1] {
            let s = Surface::with_radius(l0, 0.9).unwrap();
            let mut errs = Vec::new();
            for n in [32usize, 64] {
                let g = build_grid(&s, n).unwrap();
                let field: Vec<f64> = (0..g.len())
                    .map(|k| (s.metric_factor(g.point(k)).abs() / 2.0).ln())
                    .collect();
                let err = g
                    .interior_indices()
                    .filter(|&k| g.point(k).norm() < 0.5)
                    .map(|k| {
                        let lhs = g.laplacian_at(&field, k);
                        let rhs = -s.lambda0_f64() * s.conformal_factor(g.point(k)).unwrap();
                        (lhs - rhs).abs()
                    })
                    .fold(0.0, f64::max);
                errs.push(err);
            }
            if l0 == 0 {
                assert!(errs[1] < 1e-10);
            } else {
                // Second order: halving the spacing cuts the error about 4x.
                let ratio = errs[0] / errs[1];
                assert!((3.0..5.0).contains(&ratio), "λ₀={l0} ratio {ratio}");
            }
        }
    }
}
