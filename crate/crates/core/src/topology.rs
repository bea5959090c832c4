//! Network geometry, path loss and expectations over relay placement.
//!
//! Relays are placed i.i.d. with a uniform density over either an interval
//! on the source–destination line or an axis-aligned rectangle. A dead zone
//! of radius `s0` around both terminals keeps every path gain bounded by
//! `s0^-theta`, which is what lets every expectation below be computed by
//! plain adaptive quadrature.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub const fn on_line(x: f64) -> Self {
        Self { x, y: 0.0 }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Interval { min: f64, max: f64 },
    Rectangle { min: Point, max: Point },
}

impl Region {
    pub fn dimension(&self) -> Dimension {
        match self {
            Region::Interval { .. } => Dimension::One,
            Region::Rectangle { .. } => Dimension::Two,
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Region::Interval { min, max } => max - min,
            Region::Rectangle { min, max } => (max.x - min.x) * (max.y - min.y),
        }
    }

    fn is_degenerate(&self) -> bool {
        let m = self.measure();
        !(m.is_finite() && m > 0.0)
    }

    /// Euclidean distance from `p` to the closest point of the region.
    pub fn distance_to(&self, p: &Point) -> f64 {
        let closest = match *self {
            Region::Interval { min, max } => Point::on_line(p.x.clamp(min, max)),
            Region::Rectangle { min, max } => {
                Point::new(p.x.clamp(min.x, max.x), p.y.clamp(min.y, max.y))
            }
        };
        p.distance(&closest)
    }

    /// Distance from `p` to the farthest point of the region.
    pub fn farthest_distance(&self, p: &Point) -> f64 {
        match *self {
            Region::Interval { min, max } => p
                .distance(&Point::on_line(min))
                .max(p.distance(&Point::on_line(max))),
            Region::Rectangle { min, max } => [
                Point::new(min.x, min.y),
                Point::new(min.x, max.y),
                Point::new(max.x, min.y),
                Point::new(max.x, max.y),
            ]
            .iter()
            .map(|c| p.distance(c))
            .fold(0.0, f64::max),
        }
    }

    fn intersect(&self, other: &Region) -> Option<Region> {
        match (*self, *other) {
            (Region::Interval { min: a, max: b }, Region::Interval { min: c, max: d }) => {
                let (lo, hi) = (a.max(c), b.min(d));
                (hi > lo).then_some(Region::Interval { min: lo, max: hi })
            }
            (Region::Rectangle { min: a, max: b }, Region::Rectangle { min: c, max: d }) => {
                let lo = Point::new(a.x.max(c.x), a.y.max(c.y));
                let hi = Point::new(b.x.min(d.x), b.y.min(d.y));
                (hi.x > lo.x && hi.y > lo.y).then_some(Region::Rectangle { min: lo, max: hi })
            }
            _ => None,
        }
    }
}

/// Path gains of a relay position towards both terminals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGains {
    /// ρ_Si, source to relay.
    pub source: f64,
    /// ρ_iD, relay to destination.
    pub dest: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryViolation {
    SourceDeadZone { distance: f64, s0: f64 },
    DestinationDeadZone { distance: f64, s0: f64 },
    DensityNormalization { integral: f64 },
    NonPositiveTheta(f64),
    NonPositiveDeadZone(f64),
    DegenerateRegion,
    OffLine,
}

impl fmt::Display for GeometryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SourceDeadZone { distance, s0 } => write!(
                f,
                "source dead zone: region is {distance} from the source, less than s0 = {s0}"
            ),
            Self::DestinationDeadZone { distance, s0 } => write!(
                f,
                "destination dead zone: region is {distance} from the destination, less than s0 = {s0}"
            ),
            Self::DensityNormalization { integral } => {
                write!(f, "relay density integrates to {integral}, not 1")
            }
            Self::NonPositiveTheta(t) => write!(f, "path-loss exponent must be positive, got {t}"),
            Self::NonPositiveDeadZone(s) => write!(f, "dead-zone radius must be positive, got {s}"),
            Self::DegenerateRegion => write!(f, "relay region has zero or non-finite measure"),
            Self::OffLine => write!(f, "1-D geometry requires terminals on the line (y = 0)"),
        }
    }
}

/// Result of [`validate_geometry`]; empty means valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeometryReport {
    pub violations: Vec<GeometryViolation>,
}

impl GeometryReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for GeometryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    source: Point,
    dest: Point,
    region: Region,
    theta: f64,
    s0: f64,
}

impl NetworkGeometry {
    /// Builds and validates a geometry.
    pub fn new(source: Point, dest: Point, region: Region, theta: f64, s0: f64) -> Result<Self> {
        let g = Self::new_unchecked(source, dest, region, theta, s0);
        let report = validate_geometry(&g);
        if report.is_ok() {
            Ok(g)
        } else {
            Err(Error::Geometry(report))
        }
    }

    pub fn new_unchecked(source: Point, dest: Point, region: Region, theta: f64, s0: f64) -> Self {
        Self {
            source,
            dest,
            region,
            theta,
            s0,
        }
    }

    /// Relays on the segment `[min, max]` of the line through both terminals.
    pub fn line(source: f64, dest: f64, min: f64, max: f64, theta: f64, s0: f64) -> Result<Self> {
        Self::new(
            Point::on_line(source),
            Point::on_line(dest),
            Region::Interval { min, max },
            theta,
            s0,
        )
    }

    /// Source at 0, destination at 12, relays uniform on [1, 11], θ = 2, s0 = 1.
    pub fn default_line() -> Self {
        Self::new_unchecked(
            Point::on_line(0.0),
            Point::on_line(12.0),
            Region::Interval { min: 1.0, max: 11.0 },
            2.0,
            1.0,
        )
    }

    pub fn source(&self) -> Point {
        self.source
    }

    pub fn dest(&self) -> Point {
        self.dest
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn dimension(&self) -> Dimension {
        self.region.dimension()
    }

    /// Uniform relay density.
    pub fn density(&self, p: &Point) -> f64 {
        let inside = match self.region {
            Region::Interval { min, max } => p.x >= min && p.x <= max,
            Region::Rectangle { min, max } => {
                p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y
            }
        };
        if inside {
            1.0 / self.region.measure()
        } else {
            0.0
        }
    }

    /// Path gains at `p`. Infinite only at the terminals themselves, which
    /// the dead zone keeps out of a validated region.
    pub fn gains(&self, p: &Point) -> PathGains {
        PathGains {
            source: self.source.distance(p).powf(-self.theta),
            dest: self.dest.distance(p).powf(-self.theta),
        }
    }

    /// Upper bound on every path gain, `s0^-theta`.
    pub fn max_gain(&self) -> f64 {
        self.s0.powf(-self.theta)
    }

    /// Smallest source gain over the region (farthest relay from the source).
    pub fn min_source_gain(&self) -> f64 {
        self.region.farthest_distance(&self.source).powf(-self.theta)
    }

    /// `E[f(ρ_S(s), ρ_D(s))]` over the relay density.
    pub fn expect<F: Fn(PathGains) -> f64>(&self, f: F) -> Result<f64> {
        self.expect_on(&self.region, f)
    }

    /// `∫_sub f(ρ_S(s), ρ_D(s)) p(s) ds` over the part of `sub` inside the
    /// relay region.
    pub fn expect_on<F: Fn(PathGains) -> f64>(&self, sub: &Region, f: F) -> Result<f64> {
        let Some(part) = self.region.intersect(sub) else {
            return Ok(0.0);
        };
        let q = Quadrature::default();
        let density = 1.0 / self.region.measure();
        match part {
            Region::Interval { min, max } => {
                let v = q.integrate(|x| f(self.gains(&Point::on_line(x))), min, max)?;
                Ok(v * density)
            }
            Region::Rectangle { min, max } => {
                let v = q.integrate_2d(
                    |x, y| f(self.gains(&Point::new(x, y))),
                    (min.x, max.x),
                    (min.y, max.y),
                )?;
                Ok(v * density)
            }
        }
    }

    /// Draws one relay position from the density.
    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.region {
            Region::Interval { min, max } => Point::on_line(min + (max - min) * rng.random::<f64>()),
            Region::Rectangle { min, max } => {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                Point::new(min.x + (max.x - min.x) * u, min.y + (max.y - min.y) * v)
            }
        }
    }
}

/// Path gain `‖a − b‖^−θ`.
pub fn pathloss(a: &Point, b: &Point, theta: f64) -> Result<f64> {
    let d = a.distance(b);
    if d == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(d.powf(-theta))
}

/// Checks the dead zones, the exponent, the region and the density
/// normalization, reporting every violated constraint.
pub fn validate_geometry(g: &NetworkGeometry) -> GeometryReport {
    let mut violations = Vec::new();
    if !(g.theta > 0.0 && g.theta.is_finite()) {
        violations.push(GeometryViolation::NonPositiveTheta(g.theta));
    }
    if !(g.s0 > 0.0 && g.s0.is_finite()) {
        violations.push(GeometryViolation::NonPositiveDeadZone(g.s0));
    }
    if g.region.is_degenerate() {
        violations.push(GeometryViolation::DegenerateRegion);
        return GeometryReport { violations };
    }
    if g.dimension() == Dimension::One && (g.source.y != 0.0 || g.dest.y != 0.0) {
        violations.push(GeometryViolation::OffLine);
    }
    let ds = g.region.distance_to(&g.source);
    if !(ds >= g.s0) {
        violations.push(GeometryViolation::SourceDeadZone {
            distance: ds,
            s0: g.s0,
        });
    }
    let dd = g.region.distance_to(&g.dest);
    if !(dd >= g.s0) {
        violations.push(GeometryViolation::DestinationDeadZone {
            distance: dd,
            s0: g.s0,
        });
    }
    if violations.is_empty() {
        let integral = g.expect(|_| 1.0).unwrap_or(f64::NAN);
        if !((integral - 1.0).abs() <= 1e-9) {
            violations.push(GeometryViolation::DensityNormalization { integral });
        }
    }
    GeometryReport { violations }
}

/// Draws `n` i.i.d. relay positions.
pub fn sample_positions<R: Rng + ?Sized>(g: &NetworkGeometry, n: usize, rng: &mut R) -> Vec<Point> {
    (0..n).map(|_| g.sample_position(rng)).collect()
}

/// Path-gain moments over relay placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyMoments {
    /// E(ρ_iD)
    pub e_rho_d: f64,
    /// E(ρ_Si)
    pub e_rho_s: f64,
    /// E(ρ_iD / ρ_Si)
    pub e_ratio: f64,
    /// E(ρ_Si · ρ_iD)
    pub e_product: f64,
    /// min over the region of ρ_Si
    pub rho_s_floor: f64,
}

impl TopologyMoments {
    pub fn compute(g: &NetworkGeometry) -> Result<Self> {
        Ok(Self {
            e_rho_d: g.expect(|r| r.dest)?,
            e_rho_s: g.expect(|r| r.source)?,
            e_ratio: g.expect(|r| r.dest / r.source)?,
            e_product: g.expect(|r| r.source * r.dest)?,
            rho_s_floor: g.min_source_gain(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pathloss_examples() {
        let o = Point::on_line(0.0);
        assert_eq!(pathloss(&o, &Point::on_line(1.0), 2.0).unwrap(), 1.0);
        assert!(rel(pathloss(&o, &Point::on_line(12.0), 2.0).unwrap(), 1.0 / 144.0) < 1e-15);
        assert_eq!(pathloss(&o, &Point::on_line(2.0), 3.0).unwrap(), 0.125);
        assert_eq!(pathloss(&o, &o, 2.0), Err(Error::CoincidentPoints));
    }

    #[test]
    fn default_geometry_is_valid() {
        assert!(validate_geometry(&NetworkGeometry::default_line()).is_ok());
        assert!(NetworkGeometry::line(0.0, 12.0, 1.0, 11.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn dead_zone_violations_are_named() {
        let g = NetworkGeometry::new_unchecked(
            Point::on_line(0.0),
            Point::on_line(12.0),
            Region::Interval { min: 0.5, max: 11.0 },
            2.0,
            1.0,
        );
        let r = validate_geometry(&g);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], GeometryViolation::SourceDeadZone { .. }));
        assert!(r.to_string().contains("source dead zone"));

        let g = NetworkGeometry::new_unchecked(
            Point::on_line(0.0),
            Point::on_line(12.0),
            Region::Interval { min: 1.0, max: 11.5 },
            2.0,
            1.0,
        );
        let r = validate_geometry(&g);
        assert!(matches!(
            r.violations.as_slice(),
            [GeometryViolation::DestinationDeadZone { .. }]
        ));
    }

    #[test]
    fn bad_parameters() {
        let r = validate_geometry(&NetworkGeometry::new_unchecked(
            Point::on_line(0.0),
            Point::on_line(12.0),
            Region::Interval { min: 5.0, max: 5.0 },
            -1.0,
            0.0,
        ));
        assert!(r.violations.contains(&GeometryViolation::NonPositiveTheta(-1.0)));
        assert!(r.violations.contains(&GeometryViolation::NonPositiveDeadZone(0.0)));
        assert!(r.violations.contains(&GeometryViolation::DegenerateRegion));
    }

    #[test]
    fn moments_of_default_line() {
        let m = TopologyMoments::compute(&NetworkGeometry::default_line()).unwrap();
        assert!(rel(m.e_rho_d, 1.0 / 11.0) < 1e-9);
        assert!(rel(m.e_rho_s, 1.0 / 11.0) < 1e-9);
        assert!(rel(m.e_ratio, 8.335_960_436_193_002) < 1e-9);
        assert!(rel(m.e_product, 1.817_694_612_811_070_6e-3) < 1e-9);
        assert_eq!(m.rho_s_floor, 1.0 / 121.0);
    }

    #[test]
    fn constant_expectation() {
        let g = NetworkGeometry::default_line();
        assert!(rel(g.expect(|_| 1.0).unwrap(), 1.0) < 1e-12);
        assert!(rel(g.expect(|_| -3.5).unwrap(), -3.5) < 1e-12);
    }

    #[test]
    fn partial_region() {
        let g = NetworkGeometry::default_line();
        let half = g
            .expect_on(&Region::Interval { min: 1.0, max: 6.0 }, |_| 1.0)
            .unwrap();
        assert!(rel(half, 0.5) < 1e-12);
        let outside = g
            .expect_on(&Region::Interval { min: 20.0, max: 30.0 }, |_| 1.0)
            .unwrap();
        assert_eq!(outside, 0.0);
    }

    #[test]
    fn rectangle_geometry() {
        let g = NetworkGeometry::new(
            Point::new(0.0, 0.0),
            Point::new(12.0, 0.0),
            Region::Rectangle {
                min: Point::new(2.0, -3.0),
                max: Point::new(10.0, 3.0),
            },
            2.0,
            1.0,
        )
        .unwrap();
        assert!(rel(g.expect(|_| 1.0).unwrap(), 1.0) < 1e-10);
        // Symmetric about x = 6, so both gain moments coincide.
        let m = TopologyMoments::compute(&g).unwrap();
        assert!(rel(m.e_rho_s, m.e_rho_d) < 1e-9);
        assert!(m.e_rho_d < g.max_gain());
        // Farthest corner from the source is (10, ±3).
        assert!(rel(m.rho_s_floor, 1.0 / 109.0) < 1e-12);
    }

    #[test]
    fn sampling() {
        let g = NetworkGeometry::default_line();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_positions(&g, 0, &mut rng).is_empty());

        let n = 100_000;
        let xs = sample_positions(&g, n, &mut rng);
        assert!(xs.iter().all(|p| (1.0..=11.0).contains(&p.x) && p.y == 0.0));
        let mean = xs.iter().map(|p| p.x).sum::<f64>() / n as f64;
        // Uniform on [1, 11]: σ = 10/√12.
        let se = 10.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 6.0).abs() < 3.0 * se, "mean {mean}");

        let a = sample_positions(&g, 50, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_positions(&g, 50, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
