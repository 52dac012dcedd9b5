//! Planar convex hull (Andrew's monotone chain).

/// Sine of the turning angle below which consecutive hull edges count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// True when `o -> a -> b` turns strictly left, beyond the collinearity tolerance.
fn left_turn(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let la = (a[0] - o[0]).hypot(a[1] - o[1]);
    let lb = (b[0] - o[0]).hypot(b[1] - o[1]);
    cross(o, a, b) > COLLINEAR_TOL * la * lb
}

/// Indices of the extreme points of `points`, counter-clockwise, starting
/// from the lowest-leftmost point. Collinear boundary points are dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].total_cmp(&points[j][1]))
            .then(i.cmp(&j))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in idx.iter() {
        while hull.len() >= 2
            && !left_turn(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i])
        {
            hull.pop();
        }
        hull.push(i);
    }
    let lower = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower
            && !left_turn(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i])
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

/// Interior angle of the hull polygon at each vertex, in hull order.
pub fn interior_angles(points: &[[f64; 2]], hull: &[usize]) -> Vec<f64> {
    let m = hull.len();
    (0..m)
        .map(|k| {
            let v = points[hull[k]];
            let prev = points[hull[(k + m - 1) % m]];
            let next = points[hull[(k + 1) % m]];
            let a = [prev[0] - v[0], prev[1] - v[1]];
            let b = [next[0] - v[0], next[1] - v[1]];
            let c = a[0] * b[1] - a[1] * b[0];
            let d = a[0] * b[0] + a[1] * b[1];
            c.abs().atan2(d)
        })
        .collect()
}
