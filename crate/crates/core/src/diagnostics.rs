//! Flux integrals, Bogomol'nyi energies, vortex location and field norms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charge::Mat2;
use crate::error::{Result, VortexError};
use crate::integrable::{SingleFieldSolution, TodaSolution};
use crate::solver::{Boundary, Charges, FieldSet, ImpuritySpec, ProblemSpec};
use crate::surface::{build_grid, Grid, NodeClass};

/// Minimum distance, in spacings, between residual nodes and vortex centres
/// or the outer boundary.
pub const ANNULUS_MARGIN: f64 = 5.0;

/// `|φ|²` below this fraction of the field maximum counts as a vortex core.
const ZERO_DEPTH: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    /// Fluxes `k^a` including the truncation correction.
    pub k: Vec<f64>,
    /// Fluxes from the lattice sum over all interior nodes.
    pub k_raw: Vec<f64>,
    /// `k - k_raw`.
    pub tail_correction: Vec<f64>,
    /// Exponent `p` of the vacuum approach `|φ|² - v ~ (1 - |z|)^p` used for
    /// the disk tail; `None` when the flat edge estimate was used.
    pub decay_exponent: Option<f64>,
    /// `Σ_a Q_{Aa} k^a` per flavour.
    pub contracted: Vec<f64>,
    pub contracted_abs: Vec<f64>,
    /// `N_A = -Σ_a Q_{Aa} k^a`.
    pub n_inferred: Vec<f64>,
    /// `2πλ₀ Σ_a r_a k^a`.
    pub v_bps: f64,
}

/// Distance from the outer edge, in spacings, of the shell that fixes the
/// amplitude of the disk tail.
pub const TAIL_SHELL: f64 = 4.0;

/// Exponent `p` with `p(p - 1) = m²`, `m²` the smallest eigenvalue of the
/// linearised mass matrix `2λ QQᵀ diag(v)` at the vacuum `v`.
fn decay_exponent(spec: &ProblemSpec) -> Option<f64> {
    let vacuum = match &spec.boundary {
        Boundary::Explicit(v) => v.clone(),
        Boundary::Vacuum => {
            let sigma = match spec.impurity {
                ImpuritySpec::Constant(c) => c,
                _ => 0.0,
            };
            spec.vacuum(sigma).ok()?
        }
    };
    let g = spec.charges.gram();
    let lambda = f64::from(spec.lambda);
    let m2 = if vacuum.len() == 1 {
        2.0 * lambda * g[0][0] * vacuum[0]
    } else {
        let m = [
            [g[0][0] * vacuum[0], g[0][1] * vacuum[1]],
            [g[1][0] * vacuum[0], g[1][1] * vacuum[1]],
        ];
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            return None;
        }
        let eig = if lambda > 0.0 {
            0.5 * (tr - disc.sqrt())
        } else {
            0.5 * (tr + disc.sqrt())
        };
        2.0 * lambda * eig
    };
    (m2 > 0.0).then(|| 0.5 * (1.0 + (1.0 + 4.0 * m2).sqrt()))
}

/// Magnetic fluxes `k^a = (1/2π) ∫ F^a` with `F^a` read off the Bogomol'nyi
/// equation `F^a/Ω₀ = λ₀r_a - λ Σ_A |φ_A|² Q_{Aa} - δ_{a1} σ`.
///
/// Interior nodes are summed with weight `h²`. On the disk the flux density
/// near `|z| = 1` behaves like `C u^{p-2}` with `u = 1 - |z|`; nodes closer
/// than [`TAIL_SHELL`] spacings to the edge are replaced by that power law,
/// with `C` fitted on the shell. On open surfaces the uncovered area is
/// filled with the mean density of the nodes next to the boundary.
pub fn magnetic_flux(spec: &ProblemSpec, fields: &FieldSet) -> Result<FluxReport> {
    if !fields.converged {
        return Err(VortexError::InvalidInput(
            "flux needs converged fields".into(),
        ));
    }
    let grid = spec.grid()?;
    if !grid.same_lattice(fields.grid()) || fields.flavours() != spec.flavours() {
        return Err(VortexError::GridMismatch(
            "fields do not belong to this problem's grid".into(),
        ));
    }
    let groups = match spec.charges {
        Charges::Single { .. } => 1,
        Charges::Pair(_) => 2,
    };
    let q = spec.charges.q();
    let r = spec.charges.r();
    let l0 = spec.potential_lambda0();
    let lambda = f64::from(spec.lambda);
    let phi: Vec<Vec<f64>> = (0..spec.flavours()).map(|a| fields.phi_sq(a)).collect();
    let sigma = |k: usize| match &spec.impurity {
        ImpuritySpec::Constant(c) => *c,
        ImpuritySpec::Sampled(values) => values[k],
        ImpuritySpec::None | ImpuritySpec::Delta(_) => 0.0,
    };
    let delta_strength: f64 = match &spec.impurity {
        ImpuritySpec::Delta(list) => list.iter().map(|(_, alpha)| alpha).sum(),
        _ => 0.0,
    };
    let spacing = grid.spacing();
    let h2 = spacing * spacing;
    let side = grid.side();
    let density = |a: usize, k: usize| -> f64 {
        let mut f = l0 * r[a];
        for (b, phi_b) in phi.iter().enumerate() {
            f -= lambda * phi_b[k] * q[b][a];
        }
        if a == 0 {
            f -= sigma(k);
        }
        spec.surface.conformal_factor_unchecked(grid.point(k)) * f
    };
    let interior: Vec<usize> = grid.interior_indices().collect();
    let exponent = if spec.surface.is_disk() {
        decay_exponent(spec)
    } else {
        None
    };
    let mut k_raw = vec![0.0; groups];
    let mut k = vec![0.0; groups];
    for a in 0..groups {
        let raw: f64 = interior.iter().map(|&j| density(a, j)).sum::<f64>() * h2;
        let corrected = match exponent {
            Some(p) => {
                let u_s = (1.0 - grid.radius()) + TAIL_SHELL * spacing;
                let mut inner = 0.0;
                let mut amp = 0.0;
                let mut count = 0usize;
                for &j in &interior {
                    let u = 1.0 - grid.point(j).norm();
                    if u < u_s {
                        continue;
                    }
                    let d = density(a, j);
                    inner += d;
                    if u < u_s + spacing {
                        amp += d * u.powf(2.0 - p);
                        count += 1;
                    }
                }
                let c = if count > 0 { amp / count as f64 } else { 0.0 };
                let tail = 2.0 * PI * c * (u_s.powf(p - 1.0) / (p - 1.0) - u_s.powf(p) / p);
                inner * h2 + tail
            }
            None => {
                let radius = grid.radius();
                let missing = (PI * radius * radius - interior.len() as f64 * h2).max(0.0);
                let edge: Vec<f64> = interior
                    .iter()
                    .filter(|&&j| {
                        [j + 1, j - 1, j + side, j - side]
                            .iter()
                            .any(|&i| grid.class(i) == NodeClass::Boundary)
                    })
                    .map(|&j| density(a, j))
                    .collect();
                let mean = if edge.is_empty() {
                    0.0
                } else {
                    edge.iter().sum::<f64>() / edge.len() as f64
                };
                raw + mean * missing
            }
        };
        let shift = if a == 0 { delta_strength } else { 0.0 };
        k_raw[a] = raw / (2.0 * PI) - shift;
        k[a] = corrected / (2.0 * PI) - shift;
    }
    let contracted: Vec<f64> = (0..spec.flavours())
        .map(|f| (0..groups).map(|a| q[f][a] * k[a]).sum())
        .collect();
    Ok(FluxReport {
        tail_correction: k.iter().zip(&k_raw).map(|(a, b)| a - b).collect(),
        decay_exponent: exponent,
        contracted_abs: contracted.iter().map(|x| x.abs()).collect(),
        n_inferred: contracted.iter().map(|x| -x).collect(),
        v_bps: bogomolny_energy(l0, &r[..groups], &k),
        contracted,
        k_raw,
        k,
    })
}

/// `2πλ₀ Σ_a r_a k^a`.
pub fn bogomolny_energy(lambda0: f64, r: &[f64], k: &[f64]) -> f64 {
    2.0 * PI * lambda0 * r.iter().zip(k).map(|(a, b)| a * b).sum::<f64>()
}

/// The same energy split into the frozen-flavour degree
/// `k = k¹ + (Q₁₂/Q₁₁) k²` and the remaining flavour-2 term:
/// `2πλ₀ r₁ k + 2πλ₀ (r₂ - (Q₁₂/Q₁₁) r₁) k²`.
pub fn bogomolny_energy_split(lambda0: f64, q: &Mat2, r: &[f64; 2], k: &[f64; 2]) -> f64 {
    let ratio = q[0][1] / q[0][0];
    let frozen = k[0] + ratio * k[1];
    bogomolny_energy(lambda0, &[r[0], r[1] - ratio * r[0]], &[frozen, k[1]])
}

/// Vortex cores of one flavour: local minima of `h_A` whose `|φ_A|²` is below
/// 1% of the field maximum, refined by a parabola through `|φ_A|²` along each
/// axis.
pub fn locate_zeros(fields: &FieldSet, flavour: usize) -> Vec<Complex64> {
    let grid = fields.grid();
    let h = fields.h(flavour);
    let phi: Vec<f64> = h.iter().map(|x| (2.0 * x).exp()).collect();
    let side = grid.side();
    let peak = grid.interior_indices().map(|k| phi[k]).fold(0.0f64, f64::max);
    let spacing = grid.spacing();
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for k in grid.interior_indices() {
        if phi[k] >= ZERO_DEPTH * peak {
            continue;
        }
        let ring = [
            k + 1,
            k - 1,
            k + side,
            k - side,
            k + side + 1,
            k + side - 1,
            k - side + 1,
            k - side - 1,
        ];
        if ring
            .iter()
            .all(|&j| grid.class(j) == NodeClass::Excluded || h[k] <= h[j])
        {
            candidates.push((h[k], k));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut zeros: Vec<Complex64> = Vec::new();
    for (_, k) in candidates {
        let z = grid.point(k);
        if zeros.iter().any(|w| (w - z).norm() < 1.5 * spacing) {
            continue;
        }
        let vertex = |minus: f64, centre: f64, plus: f64| -> f64 {
            let curvature = plus - 2.0 * centre + minus;
            if curvature > 0.0 {
                (0.5 * (minus - plus) / curvature).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        };
        let dx = vertex(phi[k - 1], phi[k], phi[k + 1]);
        let dy = vertex(phi[k - side], phi[k], phi[k + side]);
        zeros.push(z + Complex64::new(dx, dy) * spacing);
    }
    zeros
}

/// Node selection for [`compare_fields`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    AllInterior,
    /// Interior nodes at least `core_radius` away from every centre.
    Annulus {
        centres: Vec<Complex64>,
        core_radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldComparison {
    pub l_inf: f64,
    /// Area-weighted `(Σ d² h²)^{1/2}`.
    pub l2: f64,
    pub nodes: usize,
}

/// Max and L² norms of `a - b` over the selected interior nodes. Equal
/// values (including equal infinities and two NaNs) count as zero
/// difference; a NaN against a number counts as infinite.
pub fn compare_fields(
    grid_a: &Grid,
    a: &[f64],
    grid_b: &Grid,
    b: &[f64],
    region: &Region,
) -> Result<FieldComparison> {
    if !grid_a.same_lattice(grid_b) || a.len() != grid_a.len() || b.len() != grid_b.len() {
        return Err(VortexError::GridMismatch(
            "fields are sampled on different lattices".into(),
        ));
    }
    let mut l_inf = 0.0f64;
    let mut sum = 0.0;
    let mut nodes = 0;
    for k in grid_a.interior_indices() {
        if let Region::Annulus {
            centres,
            core_radius,
        } = region
        {
            let z = grid_a.point(k);
            if centres.iter().any(|c| (z - c).norm() < *core_radius) {
                continue;
            }
        }
        let d = if a[k] == b[k] || (a[k].is_nan() && b[k].is_nan()) {
            0.0
        } else {
            let d = (a[k] - b[k]).abs();
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        };
        l_inf = l_inf.max(d);
        sum += d * d;
        nodes += 1;
    }
    let h = grid_a.spacing();
    Ok(FieldComparison {
        l_inf,
        l2: (sum * h * h).sqrt(),
        nodes,
    })
}

/// Largest discrete residual over an annulus of lattice nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `None` when no node qualifies.
    pub max: Option<f64>,
    pub nodes: usize,
    pub spacing: f64,
}

fn five_point(values: &[f64; 5], spacing: f64) -> f64 {
    let c = values[0];
    ((values[1] - c) + (values[2] - c) + (values[3] - c) + (values[4] - c)) / (spacing * spacing)
}

fn stencil(grid: &Grid, k: usize) -> [usize; 5] {
    let [e, w, n, s] = grid.neighbours(k);
    [k, e, w, n, s]
}

fn in_annulus(grid: &Grid, z: Complex64, centres: &[Complex64]) -> bool {
    let margin = ANNULUS_MARGIN * grid.spacing();
    z.norm() < grid.radius() - margin && centres.iter().all(|c| (z - c).norm() >= margin)
}

/// Residual of `4∂∂̄g = λe^{2g}` for a single-field solution sampled on its
/// surface's grid with parameter `n`.
///
/// The logarithmic part `Σ m log|z - c|` over the ramification points is
/// harmonic and subtracted before differencing; nodes closer than
/// [`ANNULUS_MARGIN`] spacings to a ramification point or the outer edge, or
/// whose stencil leaves the region `1 - λ|f|² > 0`, are skipped.
pub fn liouville_residual(sol: &SingleFieldSolution, n: usize) -> Result<ResidualReport> {
    let grid = build_grid(sol.surface(), n)?;
    let divisor = sol.vortex_divisor()?;
    let centres: Vec<Complex64> = divisor.iter().map(|(c, _)| *c).collect();
    let lambda = f64::from(sol.lambda());
    let regular = |z: Complex64| -> Option<(f64, f64)> {
        let p = sol.eval(z).ok()?;
        let s: f64 = divisor
            .iter()
            .map(|(c, m)| *m as f64 * (z - c).norm().ln())
            .sum();
        let v = p.g - s;
        v.is_finite().then_some((v, p.g))
    };
    let mut max = None::<f64>;
    let mut nodes = 0;
    for k in grid.interior_indices() {
        let z = grid.point(k);
        if !in_annulus(&grid, z, &centres) {
            continue;
        }
        let mut vals = [0.0; 5];
        let mut g0 = 0.0;
        let mut ok = true;
        for (slot, idx) in stencil(&grid, k).into_iter().enumerate() {
            match regular(grid.point(idx)) {
                Some((v, g)) => {
                    vals[slot] = v;
                    if slot == 0 {
                        g0 = g;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let res = (five_point(&vals, grid.spacing()) - lambda * (2.0 * g0).exp()).abs();
        max = Some(max.map_or(res, |m| m.max(res)));
        nodes += 1;
    }
    Ok(ResidualReport {
        max,
        nodes,
        spacing: grid.spacing(),
    })
}

/// Residual of the Toda system `4∂∂̄g_A = λ Σ_B K_{AB} e^{2g_B}` on `grid`.
///
/// Nodes must lie in the annulus (as for [`liouville_residual`], with both
/// flavours' vortex divisors as centres) and have both `e^{2g_A} > 0` on the
/// whole stencil; `min_det`, when given, further requires
/// `|det(M_A†W_A)| > min_det` there. `positive_det` instead requires
/// `det(M_A†W_A) > min_det` with the sign.
pub fn toda_residual(
    sol: &TodaSolution,
    grid: &Grid,
    min_det: Option<f64>,
    positive_det: bool,
) -> Result<ResidualReport> {
    let search = grid.radius() * 2.0;
    let d1 = sol.vortex_divisor(1, search)?;
    let d2 = sol.vortex_divisor(2, search)?;
    let centres: Vec<Complex64> = d1.iter().chain(&d2).map(|(c, _)| *c).collect();
    let lambda = f64::from(sol.lambda());
    let k_matrix = crate::charge::CartanSU3::MATRIX;
    let sample = |z: Complex64| -> Option<([f64; 2], [f64; 2])> {
        let p = sol.eval(z).ok()?;
        if p.e2g.iter().any(|e| !(*e > 0.0)) {
            return None;
        }
        if let Some(t) = min_det {
            let ok = p
                .det
                .iter()
                .all(|d| if positive_det { *d > t } else { d.abs() > t });
            if !ok {
                return None;
            }
        }
        let mut v = [0.0; 2];
        for (a, div) in [&d1, &d2].into_iter().enumerate() {
            let s: f64 = div
                .iter()
                .map(|(c, m)| *m as f64 * (z - c).norm().ln())
                .sum();
            v[a] = 0.5 * p.e2g[a].ln() - s;
        }
        v.iter().all(|x| x.is_finite()).then_some((v, p.e2g))
    };
    let mut max = None::<f64>;
    let mut nodes = 0;
    for k in grid.interior_indices() {
        let z = grid.point(k);
        if !in_annulus(grid, z, &centres) {
            continue;
        }
        let mut vals = [[0.0; 5]; 2];
        let mut e0 = [0.0; 2];
        let mut ok = true;
        for (slot, idx) in stencil(grid, k).into_iter().enumerate() {
            match sample(grid.point(idx)) {
                Some((v, e)) => {
                    vals[0][slot] = v[0];
                    vals[1][slot] = v[1];
                    if slot == 0 {
                        e0 = e;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        for a in 0..2 {
            let rhs = lambda * (k_matrix[a][0] * e0[0] + k_matrix[a][1] * e0[1]);
            let res = (five_point(&vals[a], grid.spacing()) - rhs).abs();
            max = Some(max.map_or(res, |m| m.max(res)));
        }
        nodes += 1;
    }
    Ok(ResidualReport {
        max,
        nodes,
        spacing: grid.spacing(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charge::ChargeData;
    use crate::holomorphic::{HoloMap, Poly};
    use crate::solver::{newton_solve, NewtonConfig};
    use crate::surface::Surface;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_disk() -> Surface {
        Surface::with_radius(1, 1.0).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert!((bogomolny_energy(1.0, &[1.0], &[1.0]) - 2.0 * PI).abs() < 1e-15);
        assert_eq!(bogomolny_energy(0.0, &[3.0, 1.0], &[2.0, -5.0]), 0.0);
    }

    proptest! {
        #[test]
        fn energy_split_identity(q11 in 0.1f64..3.0, q12 in -3.0f64..3.0, r1 in -2.0f64..2.0, r2 in -2.0f64..2.0,
                                 k1 in -5.0f64..5.0, k2 in -5.0f64..5.0) {
            let q = [[q11, q12], [0.0, 1.0]];
            let whole = bogomolny_energy(1.0, &[r1, r2], &[k1, k2]);
            let split = bogomolny_energy_split(1.0, &q, &[r1, r2], &[k1, k2]);
            prop_assert!((whole - split).abs() <= 1e-10 * (1.0 + whole.abs()));
        }

        #[test]
        fn energy_is_linear(r in proptest::array::uniform2(-3.0f64..3.0), k1 in proptest::array::uniform2(-3.0f64..3.0),
                            k2 in proptest::array::uniform2(-3.0f64..3.0)) {
            let sum = [k1[0] + k2[0], k1[1] + k2[1]];
            let lhs = bogomolny_energy(1.0, &r, &sum);
            let rhs = bogomolny_energy(1.0, &r, &k1) + bogomolny_energy(1.0, &r, &k2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn compare_examples() {
        let grid = build_grid(&unit_disk(), 16).unwrap();
        let x: Vec<f64> = (0..grid.len()).map(|k| grid.point(k).re).collect();
        let same = compare_fields(&grid, &x, &grid, &x, &Region::AllInterior).unwrap();
        assert_eq!((same.l_inf, same.l2), (0.0, 0.0));
        let mut y = x.clone();
        let k = grid.index(16, 16);
        y[k] += 0.5;
        let one = compare_fields(&grid, &x, &grid, &y, &Region::AllInterior).unwrap();
        assert_eq!(one.l_inf, 0.5);
        let cored = compare_fields(&grid, &x, &grid, &y, &Region::Annulus { centres: vec![c(0.0, 0.0)], core_radius: 0.1 }).unwrap();
        assert_eq!(cored.l_inf, 0.0);
        let other = build_grid(&unit_disk(), 17).unwrap();
        let z = vec![0.0; other.len()];
        assert!(matches!(compare_fields(&grid, &x, &other, &z, &Region::AllInterior), Err(VortexError::GridMismatch(_))));
    }

    #[test]
    fn taubes_flux_is_quantized() {
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Single { q: 1.0, r: 1.0 }, 128)
            .with_vortices(0, vec![c(0.0, 0.0)]);
        let fields = newton_solve(&spec, &NewtonConfig::default()).unwrap();
        let report = magnetic_flux(&spec, &fields).unwrap();
        assert!((report.contracted_abs[0] - 1.0).abs() < 0.02, "{report:?}");
        assert!((report.v_bps - 2.0 * PI * report.k[0]).abs() < 1e-12);
        let zeros = locate_zeros(&fields, 0);
        assert_eq!(zeros.len(), 1);
        assert!(zeros[0].norm() < fields.grid().spacing());
    }

    #[test]
    fn flux_doubles_with_multiplicity() {
        let single = ProblemSpec::new(unit_disk(), 1, Charges::Single { q: 1.0, r: 1.0 }, 96)
            .with_vortices(0, vec![c(0.1, 0.05)]);
        let double = single.clone().with_vortices(0, vec![c(0.1, 0.05), c(0.1, 0.05)]);
        let k1 = magnetic_flux(&single, &newton_solve(&single, &NewtonConfig::default()).unwrap()).unwrap();
        let k2 = magnetic_flux(&double, &newton_solve(&double, &NewtonConfig::default()).unwrap()).unwrap();
        let ratio = k2.contracted_abs[0] / k1.contracted_abs[0];
        assert!((ratio - 2.0).abs() < 0.06, "ratio {ratio}");
    }

    #[test]
    fn vacuum_has_no_flux_and_no_zeros() {
        let cd = ChargeData::new([[1.0, -1.0], [0.0, 1.0]], [1.0, 1.0]).unwrap();
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Pair(cd), 32);
        let fields = newton_solve(&spec, &NewtonConfig::default()).unwrap();
        let report = magnetic_flux(&spec, &fields).unwrap();
        assert!(report.k.iter().all(|k| k.abs() < 1e-12), "{report:?}");
        assert!(locate_zeros(&fields, 0).is_empty());
        assert!(locate_zeros(&fields, 1).is_empty());
    }

    #[test]
    fn bradlow_residual_is_tiny() {
        let sol = SingleFieldSolution::new(Surface::new(1).unwrap(), 0, HoloMap::polynomial(Poly::from_real(&[0.0, 0.0, 1.0]))).unwrap();
        let report = liouville_residual(&sol, 64).unwrap();
        assert!(report.nodes > 1000);
        assert!(report.max.unwrap() < 1e-9);
    }

    #[test]
    fn liouville_residual_is_second_order() {
        let sol = SingleFieldSolution::new(Surface::new(-1).unwrap(), -1, HoloMap::polynomial(Poly::from_real(&[0.0, 0.3, 1.0]))).unwrap();
        let coarse = liouville_residual(&sol, 64).unwrap().max.unwrap();
        let fine = liouville_residual(&sol, 128).unwrap().max.unwrap();
        let ratio = coarse / fine;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }
}
