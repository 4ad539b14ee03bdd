//! Bounded Voronoi diagrams over agent positions, cell areas, and grid-based
//! sensory-coverage estimation.
//!
//! Cells are computed by clipping the domain square against every bisector
//! half-plane. With at most a couple dozen seeds the O(N^2) cost is
//! negligible and the approach is robust against the degeneracies that sweep
//! algorithms have to special-case.

use crate::error::GeometryError;
use crate::vec2::Vec2;

/// Seeds closer than this are treated as coincident and perturbed apart.
pub const COINCIDENCE_EPS: f64 = 1e-9;
/// Magnitude of the deterministic perturbation applied to coincident seeds.
pub const PERTURBATION: f64 = 1e-6;
/// Default grid resolution for coverage estimates (90k samples).
pub const DEFAULT_COVERAGE_RESOLUTION: usize = 300;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Convex polygon with counter-clockwise vertices. May be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    pub vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    /// The axis-aligned square `[-h, h]^2`, counter-clockwise.
    pub fn square(half_extent: f64) -> ConvexPolygon {
        let h = half_extent;
        ConvexPolygon {
            vertices: vec![
                Vec2::new(-h, -h),
                Vec2::new(h, -h),
                Vec2::new(h, h),
                Vec2::new(-h, h),
            ],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area; zero for degenerate polygons.
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let mut twice = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            let b = self.vertices[(i + 1) % self.vertices.len()];
            twice += a.cross(b);
        }
        0.5 * twice
    }

    /// Keep the part of the polygon satisfying `p . normal <= offset`
    /// (Sutherland-Hodgman against a single half-plane).
    pub fn clip_half_plane(&self, normal: Vec2, offset: f64) -> ConvexPolygon {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let fa = a.dot(normal) - offset;
            let fb = b.dot(normal) - offset;
            if fa <= 0.0 {
                out.push(a);
            }
            if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb <= 0.0) {
                let t = fa / (fa - fb);
                out.push(a + (b - a) * t);
            }
        }
        ConvexPolygon { vertices: out }
    }

    /// Point membership with tolerance, for boundary cases.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= -tol
        })
    }
}

/// Voronoi partition of `[-h, h]^2`. `seeds` holds the effective seed
/// positions (after any coincidence perturbation), so every non-empty cell
/// contains its seed. Seeds outside the domain are allowed; their cells may
/// be empty.
#[derive(Debug, Clone)]
pub struct VoronoiDiagram {
    pub seeds: Vec<Vec2>,
    pub cells: Vec<ConvexPolygon>,
    pub areas: Vec<f64>,
    pub half_extent: f64,
}

impl VoronoiDiagram {
    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }
}

/// Move coincident seeds apart by `PERTURBATION` along a seed-indexed
/// direction (golden-angle spacing keeps any cluster's directions distinct).
/// Deterministic; untouched seeds pass through bit-exactly.
fn separate_coincident(seeds: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = seeds.to_vec();
    let mut magnitude = PERTURBATION;
    for _ in 0..64 {
        let mut clashing = vec![false; out.len()];
        for i in 0..out.len() {
            for j in (i + 1)..out.len() {
                if out[i].distance(out[j]) < COINCIDENCE_EPS {
                    clashing[i] = true;
                    clashing[j] = true;
                }
            }
        }
        if !clashing.iter().any(|&c| c) {
            return out;
        }
        for (i, seed) in out.iter_mut().enumerate() {
            if clashing[i] {
                let angle = GOLDEN_ANGLE * i as f64;
                *seed = seeds[i] + Vec2::new(angle.cos(), angle.sin()) * magnitude;
            }
        }
        magnitude *= 2.0;
    }
    out
}

/// Clip-based bounded Voronoi diagram. Each cell is the domain square
/// intersected with all bisector half-planes of its seed.
pub fn bounded_voronoi(seeds: &[Vec2], half_extent: f64) -> Result<VoronoiDiagram, GeometryError> {
    if seeds.is_empty() {
        return Err(GeometryError::EmptySeeds);
    }
    for (index, s) in seeds.iter().enumerate() {
        if !s.is_finite() {
            return Err(GeometryError::NonFiniteSeed { index });
        }
    }
    let effective = separate_coincident(seeds);
    let mut cells = Vec::with_capacity(effective.len());
    let mut areas = Vec::with_capacity(effective.len());
    for (i, &si) in effective.iter().enumerate() {
        let mut cell = ConvexPolygon::square(half_extent);
        for (j, &sj) in effective.iter().enumerate() {
            if i == j {
                continue;
            }
            // Points no farther from s_i than from s_j: (p - mid) . (s_j - s_i) <= 0.
            let normal = sj - si;
            let mid = (si + sj) * 0.5;
            cell = cell.clip_half_plane(normal, normal.dot(mid));
            if cell.is_empty() {
                break;
            }
        }
        areas.push(cell.area());
        cells.push(cell);
    }
    Ok(VoronoiDiagram {
        seeds: effective,
        cells,
        areas,
        half_extent,
    })
}

/// Largest cell area of the diagram (the scouts' exploration objective).
pub fn max_cell_area(diagram: &VoronoiDiagram) -> f64 {
    diagram.areas.iter().copied().fold(0.0, f64::max)
}

/// Fraction of the arena within `sensor_range` of any position, estimated on
/// a `grid_resolution^2` lattice of cell centers.
pub fn coverage_fraction(
    positions: &[Vec2],
    sensor_range: f64,
    half_extent: f64,
    grid_resolution: usize,
) -> f64 {
    if positions.is_empty() {
        return 0.0;
    }
    let res = grid_resolution.max(1);
    let cell = 2.0 * half_extent / res as f64;
    let range_sq = sensor_range * sensor_range;
    let mut covered = 0usize;
    for iy in 0..res {
        let y = -half_extent + (iy as f64 + 0.5) * cell;
        for ix in 0..res {
            let x = -half_extent + (ix as f64 + 0.5) * cell;
            let p = Vec2::new(x, y);
            if positions.iter().any(|&q| (p - q).norm_sq() <= range_sq) {
                covered += 1;
            }
        }
    }
    covered as f64 / (res * res) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force raster oracle: nearest-seed rasterization of the domain.
    /// Independent of the clipping implementation.
    pub fn raster_cell_areas(seeds: &[Vec2], half_extent: f64, resolution: usize) -> Vec<f64> {
        let cell = 2.0 * half_extent / resolution as f64;
        let pixel_area = cell * cell;
        let mut areas = vec![0.0; seeds.len()];
        for iy in 0..resolution {
            let y = -half_extent + (iy as f64 + 0.5) * cell;
            for ix in 0..resolution {
                let x = -half_extent + (ix as f64 + 0.5) * cell;
                let p = Vec2::new(x, y);
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (k, &s) in seeds.iter().enumerate() {
                    let d = (p - s).norm_sq();
                    if d < best_d {
                        best_d = d;
                        best = k;
                    }
                }
                areas[best] += pixel_area;
            }
        }
        areas
    }

    #[test]
    fn single_seed_owns_the_square() {
        let d = bounded_voronoi(&[Vec2::new(0.7, -1.2)], 3.0).unwrap();
        assert!((d.areas[0] - 36.0).abs() < 1e-12);
        assert!((max_cell_area(&d) - 36.0).abs() < 1e-12);
    }

    #[test]
    fn four_symmetric_seeds_split_into_nine_square_cells() {
        let seeds = [
            Vec2::new(-1.5, -1.5),
            Vec2::new(1.5, -1.5),
            Vec2::new(1.5, 1.5),
            Vec2::new(-1.5, 1.5),
        ];
        let d = bounded_voronoi(&seeds, 3.0).unwrap();
        for a in &d.areas {
            assert!((a - 9.0).abs() < 1e-12);
        }
        assert!((max_cell_area(&d) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn two_seeds_bisect_the_square() {
        let d = bounded_voronoi(&[Vec2::new(-1.5, 0.0), Vec2::new(1.5, 0.0)], 3.0).unwrap();
        assert!((d.areas[0] - 18.0).abs() < 1e-12);
        assert!((d.areas[1] - 18.0).abs() < 1e-12);
    }

    #[test]
    fn empty_seed_list_is_an_error() {
        assert!(matches!(
            bounded_voronoi(&[], 3.0),
            Err(GeometryError::EmptySeeds)
        ));
    }

    #[test]
    fn areas_conserve_and_contain_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.gen_range(1..=20);
            let seeds: Vec<Vec2> = (0..n)
                .map(|_| Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect();
            let d = bounded_voronoi(&seeds, 3.0).unwrap();
            assert!((d.total_area() - 36.0).abs() <= 1e-9 * 36.0);
            for (cell, &seed) in d.cells.iter().zip(&d.seeds) {
                assert!(cell.contains(seed, 1e-9));
            }
        }
    }

    #[test]
    fn areas_match_raster_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let n = rng.gen_range(2..=10);
            let seeds: Vec<Vec2> = (0..n)
                .map(|_| Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect();
            let d = bounded_voronoi(&seeds, 3.0).unwrap();
            let oracle = raster_cell_areas(&seeds, 3.0, 2000);
            for (a, r) in d.areas.iter().zip(&oracle) {
                assert!(
                    (a - r).abs() <= 0.005 * r.max(1e-6),
                    "cell area {a} vs raster {r}"
                );
            }
        }
    }

    #[test]
    fn permuting_seeds_permutes_cells() {
        let seeds = vec![
            Vec2::new(-2.0, 1.0),
            Vec2::new(0.3, -0.4),
            Vec2::new(1.8, 2.2),
            Vec2::new(-0.9, -2.6),
        ];
        let d = bounded_voronoi(&seeds, 3.0).unwrap();
        let perm = [2usize, 0, 3, 1];
        let permuted: Vec<Vec2> = perm.iter().map(|&i| seeds[i]).collect();
        let dp = bounded_voronoi(&permuted, 3.0).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(dp.areas[k], d.areas[i]);
            assert_eq!(dp.cells[k].vertices.len(), d.cells[i].vertices.len());
        }
    }

    #[test]
    fn coincident_seeds_are_separated_deterministically() {
        let p = Vec2::new(0.4, -0.2);
        let seeds = vec![p; 12];
        let d1 = bounded_voronoi(&seeds, 3.0).unwrap();
        let d2 = bounded_voronoi(&seeds, 3.0).unwrap();
        assert_eq!(d1.seeds, d2.seeds);
        assert!((d1.total_area() - 36.0).abs() <= 1e-9 * 36.0);
        for cell in &d1.cells {
            assert!(!cell.is_empty());
        }
        // Perturbed seeds moved by about the documented magnitude.
        for (s, orig) in d1.seeds.iter().zip(&seeds) {
            let moved = s.distance(*orig);
            assert!(moved > 0.0 && moved < 1e-4);
        }
        // Analytic areas on the perturbed cluster still match the raster oracle
        // computed over the same effective seeds.
        let oracle = raster_cell_areas(&d1.seeds, 3.0, 2000);
        for (a, r) in d1.areas.iter().zip(&oracle) {
            assert!((a - r).abs() <= 0.005 * r.max(0.05), "cell {a} vs raster {r}");
        }
    }

    #[test]
    fn outside_seed_gets_clipped_cell() {
        // Bisector at x = 2: the outside seed owns the strip x in [2, 3].
        let d = bounded_voronoi(&[Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0)], 3.0).unwrap();
        assert!((d.total_area() - 36.0).abs() <= 1e-9 * 36.0);
        assert!((d.areas[1] - 6.0).abs() < 1e-12);
        // A seed far outside loses its whole cell to the clip.
        let d = bounded_voronoi(&[Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)], 3.0).unwrap();
        assert_eq!(d.areas[1], 0.0);
        assert!((d.total_area() - 36.0).abs() <= 1e-9 * 36.0);
    }

    #[test]
    fn coverage_fraction_examples() {
        assert_eq!(coverage_fraction(&[], 0.5, 3.0, 300), 0.0);
        // One agent, range covering the whole square.
        let full = coverage_fraction(&[Vec2::ZERO], 3.0 * std::f64::consts::SQRT_2, 3.0, 200);
        assert_eq!(full, 1.0);
        // Disc of radius 0.5 at the origin: pi * 0.25 / 36.
        let disc = coverage_fraction(&[Vec2::ZERO], 0.5, 3.0, 300);
        let exact = std::f64::consts::PI * 0.25 / 36.0;
        assert!((disc - exact).abs() < 0.002, "got {disc}, want about {exact}");
    }
}
