//! Closed-form distance routines between segments, points, spheres and boxes.

use nalgebra::{Point3, Vector3};

const EPS: f64 = 1e-15;

/// Distance from point `p` to segment `a`–`b`.
pub fn point_segment_distance(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 <= EPS {
        0.0
    } else {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

/// Minimum distance between segments `p1`–`q1` and `p2`–`q2`.
pub fn segment_segment_distance(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    let (s, t) = if a <= EPS && e <= EPS {
        (0.0, 0.0)
    } else if a <= EPS {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > EPS {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm()
}

/// Distance from a point to an axis-aligned box centered at the origin.
pub fn point_aabb_distance(p: &Vector3<f64>, half: &Vector3<f64>) -> f64 {
    let mut sq = 0.0;
    for i in 0..3 {
        let excess = p[i].abs() - half[i];
        if excess > 0.0 {
            sq += excess * excess;
        }
    }
    sq.sqrt()
}

/// Exact distance between segment `a`–`b` and an origin-centered box with
/// half-extents `half`, both in the box frame.
///
/// The squared distance along the segment is a convex piecewise quadratic;
/// its pieces change where a coordinate crosses a face plane. Each piece is
/// minimized in closed form.
pub fn segment_aabb_distance(a: &Vector3<f64>, b: &Vector3<f64>, half: &Vector3<f64>) -> f64 {
    let d = b - a;
    let mut breaks = [0.0f64; 8];
    let mut n = 0;
    breaks[n] = 0.0;
    n += 1;
    for i in 0..3 {
        if d[i].abs() > EPS {
            for plane in [-half[i], half[i]] {
                let t = (plane - a[i]) / d[i];
                if t > 0.0 && t < 1.0 {
                    breaks[n] = t;
                    n += 1;
                }
            }
        }
    }
    breaks[n] = 1.0;
    n += 1;
    let breaks = &mut breaks[..n];
    breaks.sort_by(f64::total_cmp);

    let eval = |t: f64| point_aabb_distance(&(a + d * t), half);
    let mut best = eval(0.0).min(eval(1.0));
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mid = a + d * (0.5 * (lo + hi));
        // Within the piece each coordinate is either inside its slab or
        // pinned to one face.
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..3 {
            let face = if mid[i] > half[i] {
                half[i]
            } else if mid[i] < -half[i] {
                -half[i]
            } else {
                continue;
            };
            num += d[i] * (a[i] - face);
            den += d[i] * d[i];
        }
        let t = if den > EPS {
            (-num / den).clamp(lo, hi)
        } else {
            lo
        };
        best = best.min(eval(t));
    }
    best
}

/// Separating-axis overlap test between two oriented boxes.
///
/// `rot_*` columns are the box axes in a common frame.
pub fn obb_overlap(
    center_a: &Vector3<f64>,
    half_a: &Vector3<f64>,
    rot_a: &nalgebra::Matrix3<f64>,
    center_b: &Vector3<f64>,
    half_b: &Vector3<f64>,
    rot_b: &nalgebra::Matrix3<f64>,
) -> bool {
    let axes_a: [Vector3<f64>; 3] = [rot_a.column(0).into(), rot_a.column(1).into(), rot_a.column(2).into()];
    let axes_b: [Vector3<f64>; 3] = [rot_b.column(0).into(), rot_b.column(1).into(), rot_b.column(2).into()];
    let delta = center_b - center_a;
    let separated = |axis: &Vector3<f64>| -> bool {
        let len2 = axis.norm_squared();
        if len2 < 1e-18 {
            return false;
        }
        let ra: f64 = (0..3).map(|i| half_a[i] * axes_a[i].dot(axis).abs()).sum();
        let rb: f64 = (0..3).map(|i| half_b[i] * axes_b[i].dot(axis).abs()).sum();
        delta.dot(axis).abs() > ra + rb
    };
    for axis in axes_a.iter().chain(axes_b.iter()) {
        if separated(axis) {
            return false;
        }
    }
    for ea in &axes_a {
        for eb in &axes_b {
            if separated(&ea.cross(eb)) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    #[test]
    fn parallel_segments() {
        let d = segment_segment_distance(&p(0., 0., 0.), &p(1., 0., 0.), &p(0., 1., 0.), &p(1., 1., 0.));
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments() {
        let d = segment_segment_distance(&p(-1., 0., 0.), &p(1., 0., 0.), &p(0., -1., 0.5), &p(0., 1., 0.5));
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn skew_segments_closest_at_endpoints() {
        // closest pair: (1,0,0) and (2,0,1) -> sqrt(2)
        let d = segment_segment_distance(&p(0., 0., 0.), &p(1., 0., 0.), &p(2., 0., 1.), &p(2., 5., 1.));
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_segments_are_points() {
        let d = segment_segment_distance(&p(0., 0., 0.), &p(0., 0., 0.), &p(3., 4., 0.), &p(3., 4., 0.));
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn point_segment() {
        assert!((point_segment_distance(&p(0.5, 2., 0.), &p(0., 0., 0.), &p(1., 0., 0.)) - 2.0).abs() < 1e-12);
        assert!((point_segment_distance(&p(4., 4., 0.), &p(0., 0., 0.), &p(1., 0., 0.)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn segment_box_face_and_edge() {
        let half = Vector3::new(1.0, 1.0, 1.0);
        // parallel to a face at distance 2
        let d = segment_aabb_distance(&Vector3::new(-5., 3., 0.), &Vector3::new(5., 3., 0.), &half);
        assert!((d - 2.0).abs() < 1e-12);
        // passing diagonally near the (1,1,z) edge
        let d = segment_aabb_distance(&Vector3::new(3., 1., 0.), &Vector3::new(1., 3., 0.), &half);
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        // through the box
        let d = segment_aabb_distance(&Vector3::new(-3., 0., 0.), &Vector3::new(3., 0.2, 0.1), &half);
        assert_eq!(d, 0.0);
        // corner region: closest to (1,1,1)
        let d = segment_aabb_distance(&Vector3::new(2., 2., 2.), &Vector3::new(2., 2., 2.), &half);
        assert!((d - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn obb_separation() {
        let id = nalgebra::Matrix3::identity();
        let h = Vector3::new(0.5, 0.5, 0.5);
        assert!(obb_overlap(&Vector3::zeros(), &h, &id, &Vector3::new(0.9, 0., 0.), &h, &id));
        assert!(!obb_overlap(&Vector3::zeros(), &h, &id, &Vector3::new(1.1, 0., 0.), &h, &id));
        // rotated 45 degrees about z: corner reaches sqrt(0.5) ~ 0.707
        let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_4);
        let r = *rot.matrix();
        assert!(obb_overlap(&Vector3::zeros(), &h, &id, &Vector3::new(1.15, 0., 0.), &h, &r));
        assert!(!obb_overlap(&Vector3::zeros(), &h, &id, &Vector3::new(1.25, 0., 0.), &h, &r));
    }
}
