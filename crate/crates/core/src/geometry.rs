//! The two implemented commutative spaces: Euclidean space of dimension at
//! most four and the Poincaré disk with the invariant measure
//! dA / (π (1 - |z|²)²).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Euclidean { d: u32 },
    HyperbolicDisk,
}

impl Space {
    pub fn euclidean(d: u32) -> Result<Space> {
        if !(1..=4).contains(&d) {
            return Err(Error::validation(format!("Euclidean dimension must be in 1..=4, got {d}")));
        }
        Ok(Space::Euclidean { d })
    }

    pub fn dimension(&self) -> u32 {
        match self {
            Space::Euclidean { d } => *d,
            Space::HyperbolicDisk => 2,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, Space::HyperbolicDisk)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Space::Euclidean { d } => Space::euclidean(*d).map(|_| ()),
            Space::HyperbolicDisk => Ok(()),
        }
    }

    /// Density of the invariant measure in geodesic polar coordinates,
    /// so that m(B_r) = ∫₀^r radial_volume_element(s) ds.
    pub fn radial_volume_element(&self, s: f64) -> f64 {
        match self {
            Space::Euclidean { d } => sphere_area(*d) * s.powi(*d as i32 - 1),
            Space::HyperbolicDisk => 0.5 * s.sinh(),
        }
    }

    /// Short label used in file names and JSON.
    pub fn label(&self) -> String {
        match self {
            Space::Euclidean { d } => format!("euclidean{d}"),
            Space::HyperbolicDisk => "hyperbolic".to_string(),
        }
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Space> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "hyperbolic" | "disk" | "h2" | "hyperbolic_disk" => Ok(Space::HyperbolicDisk),
            _ => {
                let digits = t
                    .strip_prefix("euclidean")
                    .or_else(|| t.strip_prefix("r"))
                    .ok_or_else(|| Error::validation(format!("unknown space '{s}'")))?;
                let d: u32 = digits
                    .trim_start_matches(['(', ':'])
                    .trim_end_matches(')')
                    .parse()
                    .map_err(|_| Error::validation(format!("unknown space '{s}'")))?;
                Space::euclidean(d)
            }
        }
    }
}

/// Surface area of the unit sphere S^{d-1} in R^d.
pub fn sphere_area(d: u32) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => {
            let h = d as f64 / 2.0;
            2.0 * PI.powf(h) / statrs::function::gamma::gamma(h)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Euclidean(Vec<f64>),
    Disk(Complex64),
}

impl Point {
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Point::Euclidean(v) => v.clone(),
            Point::Disk(z) => vec![z.re, z.im],
        }
    }
}

fn check_point(space: &Space, p: &Point) -> Result<()> {
    match (space, p) {
        (Space::Euclidean { d }, Point::Euclidean(v)) if v.len() == *d as usize => Ok(()),
        (Space::HyperbolicDisk, Point::Disk(z)) => {
            if z.norm_sqr() < 1.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("disk point {z} is not inside the unit disk")))
            }
        }
        _ => Err(Error::domain("point does not belong to the space")),
    }
}

/// Geodesic distance between two points of the space.
pub fn distance(space: &Space, p: &Point, q: &Point) -> Result<f64> {
    check_point(space, p)?;
    check_point(space, q)?;
    Ok(match (p, q) {
        (Point::Euclidean(a), Point::Euclidean(b)) => {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        }
        (Point::Disk(a), Point::Disk(b)) => disk_distance(*a, *b),
        _ => unreachable!("checked above"),
    })
}

/// Poincaré distance, written with asinh to stay accurate for nearby points.
pub fn disk_distance(a: Complex64, b: Complex64) -> f64 {
    let num = (a - b).norm_sqr();
    let den = (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr());
    // arccosh(1 + 2x) = 2 asinh(sqrt(x))
    2.0 * (num / den).sqrt().asinh()
}

/// Distance from the origin of a disk point: 2 artanh |z|.
pub fn disk_radius(z: Complex64) -> f64 {
    2.0 * z.norm().atanh()
}

/// Distance from the base point for any point of the space.
pub fn distance_from_origin(p: &Point) -> f64 {
    match p {
        Point::Euclidean(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        Point::Disk(z) => disk_radius(*z),
    }
}

/// Invariant volume of a geodesic ball.
pub fn ball_volume(space: &Space, r: f64) -> f64 {
    match space {
        Space::Euclidean { d } => sphere_area(*d) * r.powi(*d as i32) / *d as f64,
        Space::HyperbolicDisk => (0.5 * r).sinh().powi(2),
    }
}

/// Centered observation ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub space: Space,
    pub radius: f64,
}

impl Window {
    pub fn new(space: Space, radius: f64) -> Result<Window> {
        space.validate()?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::validation(format!("window radius must be positive and finite, got {radius}")));
        }
        if space.is_hyperbolic() && (0.5 * radius).tanh() >= 1.0 {
            return Err(Error::validation("window radius too large for double precision on the disk"));
        }
        Ok(Window { space, radius })
    }

    /// Euclidean radius of the window in the model (tanh(R/2) on the disk).
    pub fn model_radius(&self) -> f64 {
        match self.space {
            Space::Euclidean { .. } => self.radius,
            Space::HyperbolicDisk => (0.5 * self.radius).tanh(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        distance_from_origin(p) <= self.radius
    }
}

/// Element of SU(1,1) in the form [[u, v], [conj v, conj u]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su11 {
    pub u: Complex64,
    pub v: Complex64,
}

impl Su11 {
    pub fn new(u: Complex64, v: Complex64) -> Result<Su11> {
        let det = u.norm_sqr() - v.norm_sqr();
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::validation(format!("|u|^2 - |v|^2 = {det}, expected 1")));
        }
        Ok(Su11 { u, v })
    }

    pub fn identity() -> Su11 {
        Su11 { u: Complex64::new(1.0, 0.0), v: Complex64::new(0.0, 0.0) }
    }

    /// Hyperbolic translation along the real axis by distance t.
    pub fn translation(t: f64) -> Su11 {
        Su11 {
            u: Complex64::new((0.5 * t).cosh(), 0.0),
            v: Complex64::new((0.5 * t).sinh(), 0.0),
        }
    }

    pub fn rotation(theta: f64) -> Su11 {
        Su11 { u: Complex64::from_polar(1.0, 0.5 * theta), v: Complex64::new(0.0, 0.0) }
    }
}

/// Möbius action z ↦ (uz + v)/(conj(v) z + conj(u)).
pub fn mobius_apply(g: &Su11, z: Complex64) -> Result<Complex64> {
    Su11::new(g.u, g.v)?;
    check_point(&Space::HyperbolicDisk, &Point::Disk(z))?;
    let w = (g.u * z + g.v) / (g.v.conj() * z + g.u.conj());
    if w.norm_sqr() >= 1.0 {
        return Err(Error::numeric("Möbius image left the unit disk through rounding", w.norm() - 1.0));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_distance() {
        let s = Space::euclidean(2).unwrap();
        let d = distance(&s, &Point::Euclidean(vec![0.0, 0.0]), &Point::Euclidean(vec![3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn disk_distance_inverts_tanh() {
        let s = Space::HyperbolicDisk;
        let o = Point::Disk(Complex64::new(0.0, 0.0));
        assert_eq!(distance(&s, &o, &o).unwrap(), 0.0);
        let q = Point::Disk(Complex64::new(1f64.tanh(), 0.0));
        assert!((distance(&s, &o, &q).unwrap() - 2.0).abs() < 1e-12);
        assert!(distance(&s, &o, &Point::Disk(Complex64::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn ball_volumes() {
        let e2 = Space::euclidean(2).unwrap();
        assert!((ball_volume(&e2, 1.0) - PI).abs() < 1e-15);
        assert_eq!(ball_volume(&Space::HyperbolicDisk, 0.0), 0.0);
        assert!((ball_volume(&Space::HyperbolicDisk, 2.0) - 1f64.sinh().powi(2)).abs() < 1e-14);
        for d in 1..=4 {
            let s = Space::euclidean(d).unwrap();
            let ratio = ball_volume(&s, 2.6) / ball_volume(&s, 1.3);
            assert!((ratio - 2f64.powi(d as i32)).abs() < 1e-12);
        }
        assert!(Space::euclidean(5).is_err());
    }

    #[test]
    fn hyperbolic_volume_matches_planar_quadrature() {
        let rho = 1f64.tanh();
        let v = crate::quad::composite(|r| 2.0 * r / (1.0 - r * r).powi(2), 0.0, rho, 40);
        assert!((v - ball_volume(&Space::HyperbolicDisk, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_volume_grows_exponentially() {
        for i in 0..=20 {
            let r = 5.0 + 0.5 * i as f64;
            let q = ball_volume(&Space::HyperbolicDisk, r) / r.exp();
            assert!(q > 0.2 && q < 0.3);
        }
    }

    #[test]
    fn mobius_examples() {
        let z = Complex64::new(0.3, 0.1);
        assert_eq!(mobius_apply(&Su11::identity(), z).unwrap(), z);
        let w = mobius_apply(&Su11::translation(1.0), Complex64::new(0.0, 0.0)).unwrap();
        assert!((w - Complex64::new(0.5f64.tanh(), 0.0)).norm() < 1e-15);
        assert!(Su11::new(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn space_parsing() {
        assert_eq!("hyperbolic".parse::<Space>().unwrap(), Space::HyperbolicDisk);
        assert_eq!("euclidean2".parse::<Space>().unwrap(), Space::Euclidean { d: 2 });
        assert_eq!("r3".parse::<Space>().unwrap(), Space::Euclidean { d: 3 });
        assert!("euclidean7".parse::<Space>().is_err());
    }
}
