//! Feasible-move regions for two-state menus.
//!
//! For a chosen action of a two-state menu, the region of post-transformation
//! payoff points `(x, y)` that keep the whole transformation action-reducing
//! against every other (already fixed) post payoff. The boundary mixes
//! half-planes with a hyperbolic steepness-ratio arc, so the region is traced
//! numerically: the membership predicate is contoured on a fixed grid and the
//! boundary refined by bisection along cell edges.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmp::EPS;
use crate::genprefs::made_commonly_steeper;
use crate::problem::{validate_transformation, CoreError, MonotoneProblem};
use crate::steepening::made_steeper;

/// Which pairwise condition the region enforces against the other actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionCondition {
    /// Made steeper: the expected-utility conditions.
    Eu,
    /// Made commonly steeper: the regular-preference conditions.
    Regular,
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("expected a two-state problem, got {0} states")]
    DimensionError(usize),
    #[error("target action index {0} out of range")]
    BadTarget(usize),
    #[error("moved table must have one optional row per action")]
    BadMovedTable,
    #[error("the feasible region is empty at the sampled resolution")]
    EmptyRegion,
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Closed polygon of feasible `(low-state, high-state)` payoff points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionPolygon {
    pub action: String,
    pub vertices: Vec<[f64; 2]>,
}

impl RegionPolygon {
    /// Even-odd ray-casting containment test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut inside = false;
        for i in 0..n {
            let [x1, y1] = v[i];
            let [x2, y2] = v[(i + 1) % n];
            if (y1 > y) != (y2 > y) {
                let t = (y - y1) / (y2 - y1);
                if x < x1 + t * (x2 - x1) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Signed area via the shoelace formula.
    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            let [x1, y1] = v[i];
            let [x2, y2] = v[(i + 1) % n];
            acc += x1 * y2 - x2 * y1;
        }
        acc / 2.0
    }
}

/// Number of contour cells per axis; the emitted polyline resolves the curved
/// boundary at this fidelity.
pub const CONTOUR_CELLS: usize = 256;

fn full_post_table(
    problem: &MonotoneProblem,
    moved: &[Option<Vec<f64>>],
    target: usize,
    x: f64,
    y: f64,
) -> Vec<Vec<f64>> {
    problem
        .actions()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if i == target {
                vec![x, y]
            } else {
                moved[i].clone().unwrap_or_else(|| a.payoffs.clone())
            }
        })
        .collect()
}

/// Whether moving `target` to `(x, y)` keeps the transformation valid and
/// pairwise steeper (in the selected sense) against every other action.
pub fn region_membership(
    problem: &MonotoneProblem,
    moved: &[Option<Vec<f64>>],
    target: usize,
    condition: RegionCondition,
    x: f64,
    y: f64,
) -> bool {
    let post = full_post_table(problem, moved, target, x, y);
    let Ok(t) = validate_transformation(problem.clone(), post) else {
        return false;
    };
    let n = problem.n_actions();
    for other in 0..n {
        if other == target {
            continue;
        }
        let (lo, hi) = if target < other {
            (target, other)
        } else {
            (other, target)
        };
        let ok = match condition {
            RegionCondition::Eu => {
                made_steeper(t.pre(lo), t.pre(hi), t.post(lo), t.post(hi), EPS)
            }
            RegionCondition::Regular => {
                made_commonly_steeper(t.pre(lo), t.pre(hi), t.post(lo), t.post(hi), EPS)
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

fn bounding_box(problem: &MonotoneProblem) -> (f64, f64, f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in problem.actions() {
        for &x in &a.payoffs {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let pad = 0.75 * (hi - lo) + 1.0;
    (lo - pad, hi + pad, lo - pad, hi + pad)
}

/// Traces the feasible region for `target` as a closed polygon.
///
/// `moved` holds the already-fixed post payoffs of the other actions (`None`
/// means unchanged). With several disconnected components only the largest is
/// returned.
pub fn two_state_feasible_region(
    problem: &MonotoneProblem,
    moved: &[Option<Vec<f64>>],
    target: usize,
    condition: RegionCondition,
) -> Result<RegionPolygon, RegionError> {
    if problem.n_states() != 2 {
        return Err(RegionError::DimensionError(problem.n_states()));
    }
    if target >= problem.n_actions() {
        return Err(RegionError::BadTarget(target));
    }
    if moved.len() != problem.n_actions() {
        return Err(RegionError::BadMovedTable);
    }
    let (x0, x1, y0, y1) = bounding_box(problem);
    let cells = CONTOUR_CELLS;
    let dx = (x1 - x0) / cells as f64;
    let dy = (y1 - y0) / cells as f64;
    let inside = |x: f64, y: f64| region_membership(problem, moved, target, condition, x, y);

    let mut grid = vec![vec![false; cells + 1]; cells + 1];
    let mut any = false;
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = inside(x0 + i as f64 * dx, y0 + j as f64 * dy);
            any |= *cell;
        }
    }
    if !any {
        return Err(RegionError::EmptyRegion);
    }

    // Bisection along a grid edge whose endpoints straddle the boundary.
    let refine = |xa: f64, ya: f64, xb: f64, yb: f64| -> [f64; 2] {
        let (mut ax, mut ay, mut bx, mut by) = (xa, ya, xb, yb);
        let a_in = inside(ax, ay);
        for _ in 0..24 {
            let (mx, my) = (0.5 * (ax + bx), 0.5 * (ay + by));
            if inside(mx, my) == a_in {
                ax = mx;
                ay = my;
            } else {
                bx = mx;
                by = my;
            }
        }
        [0.5 * (ax + bx), 0.5 * (ay + by)]
    };

    // Marching squares: one or two boundary segments per mixed cell.
    let mut segments: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for i in 0..cells {
        for j in 0..cells {
            let (xa, ya) = (x0 + i as f64 * dx, y0 + j as f64 * dy);
            let (xb, yb) = (xa + dx, ya + dy);
            let c = [grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]];
            let code = (c[0] as u8) | (c[1] as u8) << 1 | (c[2] as u8) << 2 | (c[3] as u8) << 3;
            if code == 0 || code == 15 {
                continue;
            }
            let bottom = || refine(xa, ya, xb, ya);
            let right = || refine(xb, ya, xb, yb);
            let top = || refine(xa, yb, xb, yb);
            let left = || refine(xa, ya, xa, yb);
            let mut push = |p: [f64; 2], q: [f64; 2]| segments.push((p, q));
            match code {
                1 | 14 => push(left(), bottom()),
                2 | 13 => push(bottom(), right()),
                4 | 11 => push(right(), top()),
                8 | 7 => push(left(), top()),
                3 | 12 => push(left(), right()),
                6 | 9 => push(bottom(), top()),
                5 | 10 => {
                    push(left(), bottom());
                    push(right(), top());
                }
                _ => unreachable!(),
            }
        }
    }

    // Chain segments into loops by snapping endpoints to a coarse key.
    let key = |p: [f64; 2]| -> (i64, i64) {
        (
            ((p[0] - x0) / dx * 8.0).round() as i64,
            ((p[1] - y0) / dy * 8.0).round() as i64,
        )
    };
    let mut unused: Vec<bool> = vec![true; segments.len()];
    let mut loops: Vec<Vec<[f64; 2]>> = Vec::new();
    for start in 0..segments.len() {
        if !unused[start] {
            continue;
        }
        unused[start] = false;
        let mut path = vec![segments[start].0, segments[start].1];
        loop {
            let tail = key(*path.last().unwrap());
            let mut advanced = false;
            for (s, seg) in segments.iter().enumerate() {
                if !unused[s] {
                    continue;
                }
                if key(seg.0) == tail {
                    path.push(seg.1);
                    unused[s] = false;
                    advanced = true;
                    break;
                }
                if key(seg.1) == tail {
                    path.push(seg.0);
                    unused[s] = false;
                    advanced = true;
                    break;
                }
            }
            if !advanced || key(*path.last().unwrap()) == key(path[0]) {
                break;
            }
        }
        if path.len() >= 3 {
            loops.push(path);
        }
    }
    let polygon = loops
        .into_iter()
        .map(|vertices| RegionPolygon {
            action: problem.actions()[target].name.clone(),
            vertices,
        })
        .max_by(|a, b| {
            a.area()
                .abs()
                .partial_cmp(&b.area().abs())
                .expect("areas are finite")
        })
        .ok_or(RegionError::EmptyRegion)?;
    Ok(polygon)
}

/// JSON encoding of one region: `{ "action": name, "vertices": [[x,y],..] }`.
pub fn region_to_json(region: &RegionPolygon) -> String {
    serde_json::to_string(region).expect("region serializes")
}

/// Deterministic SVG rendering: 512x512 viewbox, horizontal axis = low-state
/// payoff, vertical axis = high-state payoff (up), one path per region.
pub fn regions_to_svg(regions: &[RegionPolygon]) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in regions {
        for v in &r.vertices {
            lo = lo.min(v[0]).min(v[1]);
            hi = hi.max(v[0]).max(v[1]);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let span = (hi - lo).max(1e-9);
    let map = |x: f64, y: f64| -> (f64, f64) {
        (
            (x - lo) / span * 512.0,
            512.0 - (y - lo) / span * 512.0,
        )
    };
    let palette = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 512 512\" \
         width=\"512\" height=\"512\">\n",
    );
    for (k, r) in regions.iter().enumerate() {
        let mut d = String::new();
        for (i, v) in r.vertices.iter().enumerate() {
            let (px, py) = map(v[0], v[1]);
            let cmd = if i == 0 { 'M' } else { 'L' };
            d.push_str(&format!("{cmd}{px:.6} {py:.6} "));
        }
        d.push('Z');
        out.push_str(&format!(
            "<path d=\"{d}\" fill=\"{}\" fill-opacity=\"0.45\" stroke=\"{}\"><title>{}</title></path>\n",
            palette[k % palette.len()],
            palette[k % palette.len()],
            r.action
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{validate_problem, ActionPayoffs, StateGrid};

    fn chain3() -> MonotoneProblem {
        validate_problem(
            StateGrid::new(vec![0.0, 1.0]).unwrap(),
            vec![
                ActionPayoffs::new("a1", vec![2.0, 3.0]),
                ActionPayoffs::new("a2", vec![1.0, 5.0]),
                ActionPayoffs::new("a3", vec![0.0, 6.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_point_is_inside() {
        let p = chain3();
        let moved = vec![None, None, None];
        // The pre point itself sits on the region boundary (identity is an
        // extreme feasible move), so the polygon is checked at a strictly
        // interior offset instead: lower actions steepen by rising, higher
        // ones by falling.
        let interior = [[0.1, 0.1], [-0.1, 0.1], [-0.1, 0.0]];
        for target in 0..3 {
            let pre = p.payoffs(target).to_vec();
            assert!(region_membership(
                &p,
                &moved,
                target,
                RegionCondition::Eu,
                pre[0],
                pre[1]
            ));
            let (x, y) = (pre[0] + interior[target][0], pre[1] + interior[target][1]);
            assert!(region_membership(&p, &moved, target, RegionCondition::Eu, x, y));
            let region =
                two_state_feasible_region(&p, &moved, target, RegionCondition::Eu).unwrap();
            assert!(
                region.contains(x, y),
                "target {target} lost its interior point"
            );
        }
    }

    #[test]
    fn membership_matches_polygon_with_guard_band() {
        let p = chain3();
        let moved = vec![None, None, None];
        let region = two_state_feasible_region(&p, &moved, 1, RegionCondition::Eu).unwrap();
        let mut rng = crate::oracle::rng_from_seed(11);
        use rand::Rng;
        let mut checked = 0;
        let band = 0.1;
        for _ in 0..2000 {
            let x = rng.gen_range(-2.0..4.0);
            let y = rng.gen_range(0.0..8.0);
            let near_boundary = [
                (x + band, y),
                (x - band, y),
                (x, y + band),
                (x, y - band),
            ]
            .iter()
            .any(|&(px, py)| {
                region_membership(&p, &moved, 1, RegionCondition::Eu, px, py)
                    != region_membership(&p, &moved, 1, RegionCondition::Eu, x, y)
            });
            if near_boundary {
                continue;
            }
            assert_eq!(
                region.contains(x, y),
                region_membership(&p, &moved, 1, RegionCondition::Eu, x, y),
                "mismatch at ({x}, {y})"
            );
            checked += 1;
        }
        assert!(checked > 1000, "only {checked} points away from the boundary");
    }

    #[test]
    fn regular_region_contains_eu_region_samples() {
        let p = chain3();
        let moved = vec![None, None, None];
        let mut rng = crate::oracle::rng_from_seed(12);
        use rand::Rng;
        for _ in 0..500 {
            let x = rng.gen_range(-2.0..4.0);
            let y = rng.gen_range(0.0..8.0);
            if region_membership(&p, &moved, 1, RegionCondition::Eu, x, y) {
                assert!(region_membership(&p, &moved, 1, RegionCondition::Regular, x, y));
            }
        }
    }

    #[test]
    fn four_action_menu_has_four_nonempty_regions() {
        let p = validate_problem(
            StateGrid::new(vec![0.0, 1.0]).unwrap(),
            vec![
                ActionPayoffs::new("a1", vec![3.0, 4.0]),
                ActionPayoffs::new("a2", vec![2.0, 6.0]),
                ActionPayoffs::new("a3", vec![1.0, 7.5]),
                ActionPayoffs::new("a4", vec![0.0, 8.5]),
            ],
        )
        .unwrap();
        let moved = vec![None, None, None, None];
        let mut regions = Vec::new();
        for target in 0..4 {
            let r = two_state_feasible_region(&p, &moved, target, RegionCondition::Eu).unwrap();
            assert!(r.area().abs() > 1e-3, "region {target} degenerate");
            regions.push(r);
        }
        // Regions live around their own action's pre point and stay disjoint:
        // no region contains another action's pre point.
        for (t, r) in regions.iter().enumerate() {
            for other in 0..4 {
                if other != t {
                    let q = p.payoffs(other);
                    assert!(!r.contains(q[0], q[1]));
                }
            }
        }
        let svg = regions_to_svg(&regions);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<path").count(), 4);
        assert_eq!(svg, regions_to_svg(&regions), "SVG emission must be deterministic");
    }

    #[test]
    fn dimension_error_for_three_states() {
        let p = validate_problem(
            StateGrid::new(vec![0.0, 1.0, 2.0]).unwrap(),
            vec![
                ActionPayoffs::new("a", vec![1.0, 1.5, 2.0]),
                ActionPayoffs::new("b", vec![0.0, 1.0, 4.0]),
            ],
        )
        .unwrap();
        let moved = vec![None, None];
        match two_state_feasible_region(&p, &moved, 0, RegionCondition::Eu) {
            Err(RegionError::DimensionError(3)) => {}
            other => panic!("expected DimensionError, got {other:?}"),
        }
    }

    #[test]
    fn json_shape() {
        let r = RegionPolygon {
            action: "a".into(),
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
        };
        let json = region_to_json(&r);
        assert!(json.contains("\"action\":\"a\""));
        assert!(json.contains("\"vertices\":[[0.0,0.0],[1.0,0.0],[1.0,1.0]]"));
        assert!(r.contains(0.7, 0.2));
        assert!(!r.contains(0.2, 0.7));
    }
}
