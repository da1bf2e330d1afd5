//! Declared spectral sets in the complex plane and their areas.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::matrix::C64;

const SET_TOL: f64 = 1e-12;

/// Dimension or multiplicity that may be infinite. Serialises as a number or `"infinite"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    Finite(usize),
    Infinite,
}

impl Default for Dim {
    fn default() -> Self {
        Dim::Finite(0)
    }
}

impl Dim {
    pub fn finite(k: usize) -> Self {
        Dim::Finite(k)
    }

    pub fn is_finite(self) -> bool {
        !matches!(self, Dim::Infinite)
    }

    pub fn value(self) -> Option<usize> {
        match self {
            Dim::Finite(k) => Some(k),
            Dim::Infinite => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(k) => write!(f, "{k}"),
            None => write!(f, "infinite"),
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.value() {
            Some(k) => s.serialize_u64(k as u64),
            None => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(k) => Ok(Dim::finite(k as usize)),
            Raw::S(s) if s == "infinite" => Ok(Dim::Infinite),
            Raw::S(s) => Err(de::Error::custom(format!("expected a count or \"infinite\", got {s:?}"))),
        }
    }
}

/// Region centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    /// The circle C(0, r).
    Circle { radius: f64 },
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Region {
    pub fn area_over_pi(&self) -> f64 {
        match *self {
            Region::Circle { .. } => 0.0,
            Region::Disk { radius } => radius * radius,
            Region::Annulus { inner, outer } => outer * outer - inner * inner,
        }
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.area_over_pi()
    }

    /// Radial extent `[lo, hi]` and whether the set is the full radial band.
    fn band(&self) -> (f64, f64) {
        match *self {
            Region::Circle { radius } => (radius, radius),
            Region::Disk { radius } => (0.0, radius),
            Region::Annulus { inner, outer } => (inner, outer),
        }
    }

    pub fn contains_point(&self, z: C64) -> bool {
        let (lo, hi) = self.band();
        let r = z.norm();
        r >= lo - SET_TOL && r <= hi + SET_TOL
    }

    pub fn contains(&self, other: &Region) -> bool {
        let (lo, hi) = self.band();
        let (olo, ohi) = other.band();
        olo >= lo - SET_TOL && ohi <= hi + SET_TOL
    }

    fn is_well_formed(&self) -> bool {
        let (lo, hi) = self.band();
        lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo
    }

    fn sort_key(&self) -> (u8, f64, f64) {
        let (lo, hi) = self.band();
        let tag = match self {
            Region::Circle { .. } => 0,
            Region::Disk { .. } => 1,
            Region::Annulus { .. } => 2,
        };
        (tag, lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub value: C64,
    #[serde(default = "one")]
    pub multiplicity: Dim,
}

fn one() -> Dim {
    Dim::Finite(1)
}

/// Points plus region primitives; regions are assumed disjoint by construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDescription {
    #[serde(default)]
    pub discrete_points: Vec<SpectrumPoint>,
    #[serde(default)]
    pub regions: Vec<Region>,
}

impl SpectrumDescription {
    pub fn points(values: &[C64]) -> Self {
        Self {
            discrete_points: values.iter().map(|&value| SpectrumPoint { value, multiplicity: one() }).collect(),
            regions: Vec::new(),
        }
    }

    pub fn region(region: Region) -> Self {
        Self { discrete_points: Vec::new(), regions: vec![region] }
    }

    pub fn is_well_formed(&self) -> bool {
        self.regions.iter().all(Region::is_well_formed)
            && self.discrete_points.iter().all(|p| p.value.re.is_finite() && p.value.im.is_finite())
    }

    pub fn is_empty(&self) -> bool {
        self.discrete_points.is_empty() && self.regions.is_empty()
    }

    /// Area of the set; points and circles have measure zero.
    pub fn area(&self) -> f64 {
        self.regions.iter().map(Region::area).sum()
    }

    /// Area / pi, accumulated without the factor pi so disks and annuli with
    /// representable radii give exact results.
    pub fn area_over_pi(&self) -> f64 {
        self.regions.iter().map(Region::area_over_pi).sum()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.discrete_points.extend(other.discrete_points.iter().copied());
        out.regions.extend(other.regions.iter().copied());
        out.normalized()
    }

    /// Canonical form: contained regions and covered points dropped, duplicates merged, sorted.
    pub fn normalized(&self) -> Self {
        let mut regions: Vec<Region> = Vec::new();
        let mut sorted = self.regions.clone();
        // larger regions first so containment removes the smaller ones
        sorted.sort_by(|a, b| {
            let (alo, ahi) = a.band();
            let (blo, bhi) = b.band();
            (bhi - blo).total_cmp(&(ahi - alo)).then(alo.total_cmp(&blo))
        });
        for r in sorted {
            if !regions.iter().any(|kept| kept.contains(&r)) {
                regions.push(r);
            }
        }
        regions.sort_by(|a, b| a.sort_key().partial_cmp(&b.sort_key()).unwrap_or(std::cmp::Ordering::Equal));
        let mut points: Vec<SpectrumPoint> = Vec::new();
        for p in &self.discrete_points {
            if regions.iter().any(|r| r.contains_point(p.value)) {
                continue;
            }
            match points.iter_mut().find(|q| (q.value - p.value).norm() <= SET_TOL) {
                Some(q) => q.multiplicity = q.multiplicity.max(p.multiplicity),
                None => points.push(*p),
            }
        }
        points.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
        Self { discrete_points: points, regions }
    }

    /// Set equality after normalisation (multiplicities ignored).
    pub fn same_set(&self, other: &Self) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        a.regions.len() == b.regions.len()
            && a.discrete_points.len() == b.discrete_points.len()
            && a.regions.iter().zip(&b.regions).all(|(x, y)| {
                let (xl, xh) = x.band();
                let (yl, yh) = y.band();
                x.sort_key().0 == y.sort_key().0 && (xl - yl).abs() <= SET_TOL && (xh - yh).abs() <= SET_TOL
            })
            && a.discrete_points.iter().zip(&b.discrete_points).all(|(x, y)| (x.value - y.value).norm() <= SET_TOL)
    }
}

/// An isolated point of sigma(T) outside the essential spectrum, with its Fredholm index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretePoint {
    pub value: C64,
    pub multiplicity: Dim,
    #[serde(default)]
    pub index: i64,
}

/// Region of the resolvent-of-essential-spectrum where `T - lambda` is Fredholm with the given index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexedRegion {
    pub region: Region,
    pub index: i64,
}

/// Declared spectral sets of T itself (not of |T|).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeclaredSpectrum {
    pub spectrum: SpectrumDescription,
    pub essential: SpectrumDescription,
    #[serde(default)]
    pub index_regions: Vec<IndexedRegion>,
    #[serde(default)]
    pub discrete: Vec<DiscretePoint>,
}

impl DeclaredSpectrum {
    /// Weyl spectrum: the essential spectrum together with every point where
    /// `T - lambda` is Fredholm of nonzero index, or an eigenvalue of infinite multiplicity.
    pub fn weyl(&self) -> SpectrumDescription {
        let mut w = self.essential.clone();
        w.regions.extend(self.index_regions.iter().filter(|r| r.index != 0).map(|r| r.region));
        w.discrete_points.extend(
            self.discrete
                .iter()
                .filter(|p| p.index != 0 || !p.multiplicity.is_finite())
                .map(|p| SpectrumPoint { value: p.value, multiplicity: p.multiplicity }),
        );
        w.normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_serde() {
        assert_eq!(serde_json::to_string(&Dim::Infinite).unwrap(), "\"infinite\"");
        assert_eq!(serde_json::from_str::<Dim>("3").unwrap(), Dim::Finite(3));
        assert_eq!(serde_json::from_str::<Dim>("0").unwrap(), Dim::Finite(0));
        assert!(serde_json::from_str::<Dim>("\"lots\"").is_err());
    }

    #[test]
    fn areas() {
        assert_eq!(SpectrumDescription::region(Region::Disk { radius: 1.0 }).area_over_pi(), 1.0);
        assert_eq!(SpectrumDescription::region(Region::Annulus { inner: 0.5, outer: 1.0 }).area_over_pi(), 0.75);
        assert_eq!(SpectrumDescription::region(Region::Circle { radius: 2.0 }).area(), 0.0);
    }

    #[test]
    fn normalisation_absorbs_circle_into_disk() {
        let s = SpectrumDescription::region(Region::Circle { radius: 1.0 })
            .union(&SpectrumDescription::region(Region::Disk { radius: 1.0 }));
        assert_eq!(s.regions, vec![Region::Disk { radius: 1.0 }]);
        assert!(!s.same_set(&SpectrumDescription::region(Region::Circle { radius: 1.0 })));
        let p = SpectrumDescription::points(&[C64::new(0.5, 0.0), C64::new(0.5, 0.0)]);
        assert_eq!(p.normalized().discrete_points.len(), 1);
    }

    #[test]
    fn weyl_of_shift_is_disk() {
        let d = DeclaredSpectrum {
            spectrum: SpectrumDescription::region(Region::Disk { radius: 1.0 }),
            essential: SpectrumDescription::region(Region::Circle { radius: 1.0 }),
            index_regions: vec![IndexedRegion { region: Region::Disk { radius: 1.0 }, index: -1 }],
            discrete: vec![],
        };
        assert!(d.weyl().same_set(&SpectrumDescription::region(Region::Disk { radius: 1.0 })));
    }
}
