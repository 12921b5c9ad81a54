//! Voronoi cell areas clipped to the unit square, by half-plane clipping.
//!
//! Each site's cell is the intersection of the square [-0.5, 0.5]^2 with the
//! half-planes closer to the site than to every other site. Sites are visited
//! in order of increasing distance so clipping can stop once no remaining
//! bisector can cut the current polygon.

use rayon::prelude::*;

type Point = [f64; 2];

fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Clips `poly` to the half-plane of points at least as close to `site` as to
/// `other` (Sutherland-Hodgman against the perpendicular bisector).
fn clip_bisector(poly: &[Point], site: Point, other: Point) -> Vec<Point> {
    let mid = [(site[0] + other[0]) / 2.0, (site[1] + other[1]) / 2.0];
    let dir = [other[0] - site[0], other[1] - site[1]];
    let side = |p: Point| (p[0] - mid[0]) * dir[0] + (p[1] - mid[1]) * dir[1];

    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let sp = side(p);
        let sq = side(q);
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    twice.abs() / 2.0
}

/// Area of the Voronoi cell of each (distinct) site, clipped to the unit
/// square. The sites must be pairwise distinct.
pub(crate) fn cell_areas_unit_square(sites: &[Point]) -> Vec<f64> {
    let square = vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]];
    sites
        .par_iter()
        .enumerate()
        .map(|(i, &site)| {
            let mut order: Vec<(f64, usize)> = sites
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, &p)| (dist2(site, p), j))
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let mut poly = square.clone();
            for &(d2, j) in &order {
                // A bisector at distance d/2 cannot cut a polygon whose
                // farthest vertex is closer than d/2 to the site.
                let reach2 = poly.iter().map(|&v| dist2(v, site)).fold(0.0f64, f64::max);
                if d2 > 4.0 * reach2 {
                    break;
                }
                poly = clip_bisector(&poly, site, sites[j]);
                if poly.len() < 3 {
                    break;
                }
            }
            polygon_area(&poly)
        })
        .collect()
}
