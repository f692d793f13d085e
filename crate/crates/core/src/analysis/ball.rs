//! Exact smallest enclosing ball by move-to-front Welzl recursion.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::dist;

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &[f64]) -> bool {
        dist(p, &self.center) <= self.radius * (1.0 + 1e-12) + 1e-14
    }
}

/// Smallest ball containing every point. Exact up to rounding in any dimension;
/// expected linear time thanks to a fixed-seed shuffle.
pub fn smallest_enclosing_ball(points: &[Vec<f64>]) -> Ball {
    assert!(!points.is_empty(), "need at least one point");
    let dim = points[0].len();
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let mut boundary = Vec::with_capacity(dim + 1);
    mtf(&mut pts, None, &mut boundary, dim)
}

fn mtf(pts: &mut [Vec<f64>], end: Option<usize>, boundary: &mut Vec<Vec<f64>>, dim: usize) -> Ball {
    let mut ball = ball_on(boundary, dim);
    if boundary.len() == dim + 1 {
        return ball;
    }
    let n = end.unwrap_or(pts.len());
    for i in 0..n {
        if ball.center.is_empty() || !ball.contains(&pts[i]) {
            boundary.push(pts[i].clone());
            ball = mtf(pts, Some(i), boundary, dim);
            boundary.pop();
            pts[..=i].rotate_right(1);
        }
    }
    ball
}

/// Smallest ball with all of `boundary` on its sphere (circumball in the affine hull).
fn ball_on(boundary: &[Vec<f64>], dim: usize) -> Ball {
    match boundary.len() {
        0 => Ball { center: Vec::new(), radius: 0.0 },
        1 => Ball { center: boundary[0].clone(), radius: 0.0 },
        k => {
            let p0 = &boundary[0];
            let v: Vec<Vec<f64>> = boundary[1..]
                .iter()
                .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
                .collect();
            let m = k - 1;
            // Gram system 2 (v_i . v_j) λ_j = |v_i|^2
            let mut a = vec![vec![0.0; m + 1]; m];
            for i in 0..m {
                for j in 0..m {
                    a[i][j] = 2.0 * dot(&v[i], &v[j]);
                }
                a[i][m] = dot(&v[i], &v[i]);
            }
            let lambda = solve(a, m);
            let mut center = p0.clone();
            for (l, vi) in lambda.iter().zip(&v) {
                for c in 0..dim {
                    center[c] += l * vi[c];
                }
            }
            let radius = boundary.iter().map(|p| dist(p, &center)).fold(0.0, f64::max);
            Ball { center, radius }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; degenerate directions get 0.
fn solve(mut a: Vec<Vec<f64>>, m: usize) -> Vec<f64> {
    let scale = a.iter().flat_map(|r| r[..m].iter()).fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let mut pivots = vec![None; m];
    let mut row = 0;
    for col in 0..m {
        let Some(best) = (row..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())) else {
            break;
        };
        if a[best][col].abs() <= 1e-12 * scale {
            continue;
        }
        a.swap(row, best);
        for r in 0..m {
            if r != row {
                let f = a[r][col] / a[row][col];
                let pivot = a[row].clone();
                for (x, p) in a[r][col..=m].iter_mut().zip(&pivot[col..=m]) {
                    *x -= f * p;
                }
            }
        }
        pivots[col] = Some(row);
        row += 1;
    }
    (0..m)
        .map(|c| pivots[c].map_or(0.0, |r| a[r][m] / a[r][c]))
        .collect()
}
