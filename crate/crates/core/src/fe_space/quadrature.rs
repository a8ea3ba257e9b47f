//! Gauss-Legendre rules on [0, 1] and symmetric rules on the reference
//! triangle (0,0), (1,0), (0,1).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellType {
    Interval,
    Triangle,
}

impl CellType {
    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(CellType::Interval),
            2 => Ok(CellType::Triangle),
            d => Err(Error::config(format!("no reference cell for dimension {d}"))),
        }
    }

    pub fn reference_measure(self) -> f64 {
        match self {
            CellType::Interval => 1.0,
            CellType::Triangle => 0.5,
        }
    }
}

/// Highest exactness order available per cell type.
pub const MAX_ORDER: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub cell: CellType,
    /// Polynomial degree integrated exactly.
    pub order: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Rule on the reference cell exact for polynomials of total degree
/// `exactness_order`.
pub fn quadrature_rule(cell: CellType, exactness_order: usize) -> Result<QuadratureRule> {
    if exactness_order > MAX_ORDER {
        return Err(Error::config(format!(
            "quadrature order {exactness_order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let (points, weights) = match cell {
        CellType::Interval => {
            let n = exactness_order / 2 + 1;
            let (x, w) = gauss_legendre(n);
            (x.into_iter().map(|x| [x, 0.0]).collect(), w)
        }
        CellType::Triangle => triangle_rule(exactness_order),
    };
    Ok(QuadratureRule {
        cell,
        order: exactness_order,
        points,
        weights,
    })
}

/// n-point Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * weight;
        w[n - 1 - i] = 0.5 * weight;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn triangle_rule(order: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut b = SymmetricRule::default();
    match order {
        0 | 1 => b.centroid(1.0),
        2 => b.orbit3(1.0 / 6.0, 1.0 / 3.0),
        3 | 4 => {
            b.orbit3(0.445948490915965, 0.223381589678011);
            b.orbit3(0.091576213509771, 0.109951743655322);
        }
        5 => {
            b.centroid(0.225);
            b.orbit3(0.470142064105115, 0.132394152788506);
            b.orbit3(0.101286507323456, 0.125939180544827);
        }
        6 => {
            b.orbit3(0.249286745170910, 0.116786275726379);
            b.orbit3(0.063089014491502, 0.050844906370207);
            b.orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374);
        }
        7 | 8 => {
            b.centroid(0.144315607677787);
            b.orbit3(0.459292588292723, 0.095091634267285);
            b.orbit3(0.170569307751760, 0.103217370534718);
            b.orbit3(0.050547228317031, 0.032458497623198);
            b.orbit6(0.008394777409958, 0.263112829634638, 0.027230314174435);
        }
        _ => return collapsed_rule(order),
    }
    (b.points, b.weights)
}

#[derive(Default)]
struct SymmetricRule {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

// Weights are given for unit area and halved for the reference triangle.
impl SymmetricRule {
    fn push(&mut self, l: [f64; 3], w: f64) {
        self.points.push([l[1], l[2]]);
        self.weights.push(0.5 * w);
    }

    fn centroid(&mut self, w: f64) {
        let c = 1.0 / 3.0;
        self.push([c, c, c], w);
    }

    fn orbit3(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        self.push([b, a, a], w);
        self.push([a, b, a], w);
        self.push([a, a, b], w);
    }

    fn orbit6(&mut self, a: f64, b: f64, w: f64) {
        let c = 1.0 - a - b;
        for l in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.push(l, w);
        }
    }
}

// Tensor Gauss rule mapped onto the triangle by collapsing one edge.
fn collapsed_rule(order: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let (s, ws) = gauss_legendre(order / 2 + 2);
    let (t, wt) = gauss_legendre(order / 2 + 1);
    let mut points = Vec::with_capacity(s.len() * t.len());
    let mut weights = Vec::with_capacity(s.len() * t.len());
    for (&si, &wi) in s.iter().zip(&ws) {
        for (&tj, &wj) in t.iter().zip(&wt) {
            points.push([si, tj * (1.0 - si)]);
            weights.push(wi * wj * (1.0 - si));
        }
    }
    (points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // ∫_T x^a y^b = a! b! / (a + b + 2)!
    fn triangle_monomial(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn midpoint_rule() {
        let q = quadrature_rule(CellType::Interval, 1).unwrap();
        assert_eq!(q.points, vec![[0.5, 0.0]]);
        assert_eq!(q.weights, vec![1.0]);
    }

    #[test]
    fn three_point_triangle_rule() {
        let q = quadrature_rule(CellType::Triangle, 2).unwrap();
        assert_eq!(q.len(), 3);
        assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn four_point_gauss_integrates_x7() {
        let q = quadrature_rule(CellType::Interval, 7).unwrap();
        assert_eq!(q.len(), 4);
        assert!((q.integrate(|p| p[0].powi(7)) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn interval_rules_exact_for_monomials() {
        for order in 0..=MAX_ORDER {
            let q = quadrature_rule(CellType::Interval, order).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for a in 0..=order as i32 {
                let exact = 1.0 / (a as f64 + 1.0);
                let got = q.integrate(|p| p[0].powi(a));
                assert!((got - exact).abs() <= 1e-13 * exact, "order {order} x^{a}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn triangle_rules_exact_for_monomials() {
        for order in 0..=20 {
            let q = quadrature_rule(CellType::Triangle, order).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0), "order {order}");
            for &[x, y] in &q.points {
                assert!(x >= 0.0 && y >= 0.0 && x + y <= 1.0);
            }
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let exact = triangle_monomial(a, b);
                    let got = q.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    assert!(
                        (got - exact).abs() <= 1e-13 * exact,
                        "order {order} x^{a} y^{b}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn unsupported_order_is_rejected() {
        assert!(matches!(quadrature_rule(CellType::Triangle, MAX_ORDER + 1), Err(Error::Config(_))));
        assert!(CellType::for_dim(3).is_err());
    }
}
