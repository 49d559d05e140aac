//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and on `[0, 1]`.

use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("no triangle rule for degree {0} (supported: 1..=6)")]
    UnsupportedDegree(usize),
    #[error("no Gauss-Legendre rule with {0} points (supported: 1..=5)")]
    UnsupportedPoints(usize),
}

/// Points and weights on the reference triangle; weights sum to 1/2.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Barycentric coordinates `(1 - x - y, x, y)` of every point.
    pub fn barycentric(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&[x, y], &w)| ([1.0 - x - y, x, y], w))
    }

    /// Integrates `f` over the triangle `(a, b, c)`.
    pub fn integrate(&self, [a, b, c]: [Vec2; 3], mut f: impl FnMut(Vec2) -> f64) -> f64 {
        let jac = (b - a).cross(c - a).abs();
        self.barycentric()
            .map(|(l, w)| w * f(a * l[0] + b * l[1] + c * l[2]))
            .sum::<f64>()
            * jac
    }
}

/// Builds a fully symmetric rule from orbits given with weights normalized
/// to the triangle area (sum 1).
fn symmetric_rule(orbits: &[(f64, [f64; 3])]) -> TriangleRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for &(w, [a, b, c]) in orbits {
        let perms = [
            [a, b, c],
            [b, c, a],
            [c, a, b],
            [a, c, b],
            [c, b, a],
            [b, a, c],
        ];
        let mut unique: Vec<[f64; 3]> = Vec::new();
        for p in perms {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        for p in unique {
            points.push([p[1], p[2]]);
            weights.push(0.5 * w);
        }
    }
    TriangleRule { points, weights }
}

/// Symmetric rule exact for polynomials of total degree `degree` (1 to 6);
/// all weights are positive.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule, QuadratureError> {
    let third = 1.0 / 3.0;
    let rule = match degree {
        1 => symmetric_rule(&[(1.0, [third, third, third])]),
        2 => {
            let a = 1.0 / 6.0;
            symmetric_rule(&[(third, [1.0 - 2.0 * a, a, a])])
        }
        3 | 4 => {
            let (a1, w1) = (0.445_948_490_915_964_9, 0.223_381_589_678_011_47);
            let (a2, w2) = (0.091_576_213_509_770_74, 0.109_951_743_655_321_87);
            symmetric_rule(&[
                (w1, [1.0 - 2.0 * a1, a1, a1]),
                (w2, [1.0 - 2.0 * a2, a2, a2]),
            ])
        }
        5 => {
            let s = 15.0_f64.sqrt();
            let (a1, a2) = ((6.0 - s) / 21.0, (6.0 + s) / 21.0);
            let (w1, w2) = ((155.0 - s) / 1200.0, (155.0 + s) / 1200.0);
            symmetric_rule(&[
                (9.0 / 40.0, [third, third, third]),
                (w1, [1.0 - 2.0 * a1, a1, a1]),
                (w2, [1.0 - 2.0 * a2, a2, a2]),
            ])
        }
        6 => {
            let (a1, w1) = (0.249_286_745_170_910_43, 0.116_786_275_726_379_37);
            let (a2, w2) = (0.063_089_014_491_502_23, 0.050_844_906_370_206_82);
            let (b, c, w3) = (
                0.053_145_049_844_816_945,
                0.310_352_451_033_784_4,
                0.082_851_075_618_373_57,
            );
            symmetric_rule(&[
                (w1, [1.0 - 2.0 * a1, a1, a1]),
                (w2, [1.0 - 2.0 * a2, a2, a2]),
                (w3, [1.0 - b - c, b, c]),
            ])
        }
        d => return Err(QuadratureError::UnsupportedDegree(d)),
    };
    Ok(rule)
}

/// Gauss-Legendre points and weights on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(points: usize) -> Result<Vec<(f64, f64)>, QuadratureError> {
    let sym: &[(f64, f64)] = match points {
        1 => &[(0.0, 2.0)],
        2 => &[(0.577_350_269_189_625_7, 1.0)],
        3 => &[(0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)],
        4 => &[
            (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
        ],
        5 => &[
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
            (0.906_179_845_938_664, 0.236_926_885_056_189_08),
        ],
        n => return Err(QuadratureError::UnsupportedPoints(n)),
    };
    let mut out = Vec::with_capacity(points);
    for &(x, w) in sym {
        if x == 0.0 {
            out.push((0.5, 0.5 * w));
        } else {
            out.push((0.5 * (1.0 - x), 0.5 * w));
            out.push((0.5 * (1.0 + x), 0.5 * w));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}
