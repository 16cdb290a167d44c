//! Browser bindings: thin wrappers that move numbers across the JS boundary
//! and keep all numerics in the core library. Build with
//! `wasm-pack build --target web`; the crate also compiles natively so the
//! workspace test suite covers the wrapper logic.

use wasm_bindgen::prelude::*;

use fockproj::dynamics::{classical_flow, evolve_projector};
use fockproj::phase_space::{husimi_grid, linspace, wigner_grid, PhaseGrid};
use fockproj::projector::{displaced_projector, lambda_profile};
use fockproj::{FockDim, PhasePoint};

const MAX_DIM: usize = 256;
const MAX_RESOLUTION: usize = 161;
const MAX_COUNT: usize = 2048;

fn weights_impl(radius: f64, count: usize) -> Result<Vec<f64>, String> {
    if count > MAX_COUNT {
        return Err(format!("count must be at most {MAX_COUNT}"));
    }
    let profile = lambda_profile(radius, count).map_err(|e| e.to_string())?;
    Ok(profile.values().to_vec())
}

/// Shared setup: the rank n_max + 1 disc projector at `center`, transported
/// to time t, sampled on the square grid of the given half-width.
fn transported_grid(
    n_max: usize,
    center: PhasePoint,
    time: f64,
    d: usize,
    half_width: f64,
    resolution: usize,
    wigner: bool,
) -> Result<PhaseGrid, String> {
    if d == 0 || d > MAX_DIM {
        return Err(format!("dim must lie in 1..={MAX_DIM}"));
    }
    if !(3..=MAX_RESOLUTION).contains(&resolution) {
        return Err(format!("resolution must lie in 3..={MAX_RESOLUTION}"));
    }
    if !(half_width.is_finite() && half_width > 0.0 && half_width <= 12.0) {
        return Err("half_width must lie in (0, 12]".to_string());
    }
    // Flow preserves the center energy, so one check covers every time.
    let needed = n_max as f64 + (4.0 * center.energy()).max(25.0);
    if (d as f64) < needed {
        return Err(format!(
            "dim {d} is below the truncation bound {} for rank {} at this center",
            needed.ceil(),
            n_max + 1
        ));
    }
    let dim = FockDim::new(d).map_err(|e| e.to_string())?;
    let e = displaced_projector(n_max, center, dim).map_err(|e| e.to_string())?;
    // Conjugation by U(t) moves a region to classical_flow(center, -t);
    // negate so the displayed region rides the flow forward, matching
    // [`flowed_center`] overlays.
    let e = evolve_projector(&e, -time).map_err(|e| e.to_string())?;
    let axis = linspace(-half_width, half_width, resolution).map_err(|e| e.to_string())?;
    let grid = if wigner {
        wigner_grid(&e, &axis, &axis)
    } else {
        husimi_grid(&e, &axis, &axis)
    };
    grid.map_err(|e| e.to_string())
}

fn grid_values(grid: &PhaseGrid) -> Vec<f64> {
    let (np, nq) = (grid.p_axis().len(), grid.q_axis().len());
    let mut out = Vec::with_capacity(np * nq);
    for i in 0..np {
        for j in 0..nq {
            out.push(grid.values()[(i, j)]);
        }
    }
    out
}

/// Disc projection weights lambda_0..lambda_{count-1} for radius R.
#[wasm_bindgen]
pub fn disc_weights(radius: f64, count: usize) -> Result<Vec<f64>, JsError> {
    weights_impl(radius, count).map_err(|e| JsError::new(&e))
}

/// Wigner map of the transported disc projector, row-major over
/// (p row, q column), both axes spanning [-half_width, half_width].
#[wasm_bindgen]
pub fn wigner_map(
    n_max: usize,
    center_p: f64,
    center_q: f64,
    time: f64,
    dim: usize,
    half_width: f64,
    resolution: usize,
) -> Result<Vec<f64>, JsError> {
    transported_grid(
        n_max,
        PhasePoint::new(center_p, center_q),
        time,
        dim,
        half_width,
        resolution,
        true,
    )
    .map(|g| grid_values(&g))
    .map_err(|e| JsError::new(&e))
}

/// Husimi map with the same layout as [`wigner_map`].
#[wasm_bindgen]
pub fn husimi_map(
    n_max: usize,
    center_p: f64,
    center_q: f64,
    time: f64,
    dim: usize,
    half_width: f64,
    resolution: usize,
) -> Result<Vec<f64>, JsError> {
    transported_grid(
        n_max,
        PhasePoint::new(center_p, center_q),
        time,
        dim,
        half_width,
        resolution,
        false,
    )
    .map(|g| grid_values(&g))
    .map_err(|e| JsError::new(&e))
}

/// Classical harmonic flow of (p, q) after time t, as [p, q].
#[wasm_bindgen]
pub fn flowed_center(p: f64, q: f64, time: f64) -> Vec<f64> {
    let x = classical_flow(PhasePoint::new(p, q), time);
    vec![x.p, x.q]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_decrease_and_start_near_one() {
        let w = weights_impl(3.0, 16).unwrap();
        assert_eq!(w.len(), 16);
        assert!(w[0] > 0.99);
        for pair in w.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-14);
        }
        assert!(weights_impl(3.0, MAX_COUNT + 1).is_err());
    }

    #[test]
    fn maps_track_the_flowed_center() {
        let (n_max, d, half, res) = (2usize, 48usize, 5.0, 41usize);
        let center = PhasePoint::new(0.0, 1.4);
        let t = std::f64::consts::FRAC_PI_2;
        let vals =
            transported_grid(n_max, center, t, d, half, res, true).map(|g| grid_values(&g));
        let vals = vals.unwrap();
        assert_eq!(vals.len(), res * res);
        // The blob peak must sit near the flowed center, not the original.
        let axis = linspace(-half, half, res).unwrap();
        let (mut best, mut best_val) = ((0, 0), f64::NEG_INFINITY);
        for i in 0..res {
            for j in 0..res {
                if vals[i * res + j] > best_val {
                    best_val = vals[i * res + j];
                    best = (i, j);
                }
            }
        }
        let moved = flowed_center(center.p, center.q, t);
        assert!((axis[best.0] - moved[0]).abs() < 0.5);
        assert!((axis[best.1] - moved[1]).abs() < 0.5);
    }

    #[test]
    fn guards_reject_out_of_range_requests() {
        let c = PhasePoint::new(0.0, 1.0);
        assert!(transported_grid(2, c, 0.0, 0, 5.0, 41, true).is_err());
        assert!(transported_grid(2, c, 0.0, 512, 5.0, 41, true).is_err());
        assert!(transported_grid(2, c, 0.0, 48, 5.0, 2, true).is_err());
        assert!(transported_grid(2, c, 0.0, 48, -1.0, 41, true).is_err());
        // Center too energetic for the requested dimension.
        assert!(transported_grid(4, PhasePoint::new(6.0, 6.0), 0.0, 48, 5.0, 41, true).is_err());
        assert!(transported_grid(2, c, 0.0, 48, 5.0, 41, false).is_ok());
    }
}
