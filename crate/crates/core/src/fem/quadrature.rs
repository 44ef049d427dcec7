use crate::error::{Error, Result};

/// A quadrature rule on the reference simplex `{ξ ≥ 0, Σξ ≤ 1}`.
///
/// `degree` is the total polynomial degree integrated exactly; weights sum to
/// the reference volume `1/dim!`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub degree: usize,
    /// Reference coordinates, `dim` per point.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, q: usize) -> &[f64] {
        &self.points[q * self.dim..(q + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }
}

/// Builds rules from barycentric orbits.
struct Builder {
    dim: usize,
    degree: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Builder {
    fn new(dim: usize, degree: usize) -> Self {
        Self { dim, degree, points: Vec::new(), weights: Vec::new() }
    }

    /// Adds every distinct permutation of the barycentric tuple `bary`.
    fn orbit(mut self, bary: &[f64], weight: f64) -> Self {
        let mut seen: Vec<Vec<f64>> = Vec::new();
        let mut perm: Vec<usize> = (0..bary.len()).collect();
        loop {
            let p: Vec<f64> = perm.iter().map(|&k| bary[k]).collect();
            if !seen.contains(&p) {
                self.points.extend_from_slice(&p[1..]);
                self.weights.push(weight);
                seen.push(p);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        self
    }

    fn build(self) -> QuadratureRule {
        debug_assert_eq!(self.points.len(), self.dim * self.weights.len());
        QuadratureRule { dim: self.dim, degree: self.degree, points: self.points, weights: self.weights }
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
        return false;
    };
    let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

fn triangle_rule(degree: usize) -> Option<QuadratureRule> {
    let rule = match degree {
        0 | 1 => Builder::new(2, 1).orbit(&[1.0 / 3.0; 3], 0.5),
        2 => Builder::new(2, 2).orbit(&[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 6.0),
        3 | 4 => {
            let (a1, w1) = (0.445_948_490_915_964_886_32, 0.111_690_794_839_005_732_85);
            let (a2, w2) = (0.091_576_213_509_770_743_46, 0.054_975_871_827_660_933_819);
            Builder::new(2, 4)
                .orbit(&[a1, a1, 1.0 - 2.0 * a1], w1)
                .orbit(&[a2, a2, 1.0 - 2.0 * a2], w2)
        }
        5 => {
            let s = 15f64.sqrt();
            let (a1, w1) = ((6.0 - s) / 21.0, (155.0 - s) / 2400.0);
            let (a2, w2) = ((6.0 + s) / 21.0, (155.0 + s) / 2400.0);
            Builder::new(2, 5)
                .orbit(&[1.0 / 3.0; 3], 9.0 / 80.0)
                .orbit(&[a1, a1, 1.0 - 2.0 * a1], w1)
                .orbit(&[a2, a2, 1.0 - 2.0 * a2], w2)
        }
        _ => return None,
    };
    Some(rule.build())
}

fn tetrahedron_rule(degree: usize) -> Option<QuadratureRule> {
    let rule = match degree {
        0 | 1 => Builder::new(3, 1).orbit(&[0.25; 4], 1.0 / 6.0),
        2 => {
            let a = (5.0 - 5f64.sqrt()) / 20.0;
            Builder::new(3, 2).orbit(&[a, a, a, 1.0 - 3.0 * a], 1.0 / 24.0)
        }
        // 14-point positive-weight rule; exact to degree 5.
        3..=5 => {
            let (a1, w1) = (0.092_735_250_310_891_226_402, 0.012_248_840_519_393_658_257);
            let (a2, w2) = (0.310_885_919_263_300_609_8, 0.018_781_320_953_002_641_8);
            let (b, w3) = (0.045_503_704_125_649_649_492, 0.007_091_003_462_846_911_073);
            Builder::new(3, 5)
                .orbit(&[a1, a1, a1, 1.0 - 3.0 * a1], w1)
                .orbit(&[a2, a2, a2, 1.0 - 3.0 * a2], w2)
                .orbit(&[b, b, 0.5 - b, 0.5 - b], w3)
        }
        _ => return None,
    };
    Some(rule.build())
}

/// Returns a rule on the reference simplex of dimension `dim` that is exact
/// for polynomials of total degree `degree`.
pub fn quadrature(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if degree == 0 {
        return Err(Error::InvalidArgument("quadrature degree must be at least 1".into()));
    }
    let rule = match dim {
        2 => triangle_rule(degree),
        3 => tetrahedron_rule(degree),
        _ => return Err(Error::InvalidArgument(format!("no quadrature on simplices of dimension {dim}"))),
    };
    rule.ok_or_else(|| Error::InvalidArgument(format!("unsupported quadrature degree {degree} in dimension {dim}")))
}

/// Degree-5 rule on a boundary facet of a `simplex_dim`-dimensional cell:
/// three-point Gauss-Legendre on `[0, 1]` for segments, the seven-point rule
/// for triangles.
pub fn facet_quadrature(simplex_dim: usize) -> Result<QuadratureRule> {
    match simplex_dim {
        2 => {
            let r = 0.5 * (0.6f64).sqrt();
            Ok(QuadratureRule {
                dim: 1,
                degree: 5,
                points: vec![0.5 - r, 0.5, 0.5 + r],
                weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
            })
        }
        3 => quadrature(2, 5),
        _ => Err(Error::InvalidArgument(format!("no facet quadrature for simplices of dimension {simplex_dim}"))),
    }
}
