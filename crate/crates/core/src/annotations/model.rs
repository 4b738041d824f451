//! Crowd annotation records and their JSON form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in normalized image coordinates, `(x, y)` in [0, 1]².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormPoint(pub f64, pub f64);

impl NormPoint {
    pub fn x(&self) -> f64 {
        self.0
    }

    pub fn y(&self) -> f64 {
        self.1
    }

    pub fn is_inside_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.0) && (0.0..=1.0).contains(&self.1)
    }

    /// Pixel whose centre is nearest to this point in a `width`x`height`
    /// image. Pixel `i` covers `[i, i + 1)` with its centre at `i + 0.5`.
    pub fn nearest_pixel(&self, width: usize, height: usize) -> (usize, usize) {
        let snap = |v: f64, n: usize| ((v * n as f64 - 0.5).round().max(0.0) as usize).min(n.saturating_sub(1));
        (snap(self.0, width), snap(self.1, height))
    }

    fn check(&self, what: &str) -> Result<()> {
        if !self.is_inside_unit_square() {
            return Err(Error::InvalidAnnotation(format!(
                "{what} ({}, {}) lies outside [0,1]^2",
                self.0, self.1
            )));
        }
        Ok(())
    }
}

/// A polygon drawn around an area of approximately constant shading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantShadingRegion {
    pub vertices: Vec<NormPoint>,
}

impl ConstantShadingRegion {
    pub fn new(vertices: Vec<NormPoint>) -> Result<Self> {
        let region = Self { vertices };
        region.validate()?;
        Ok(region)
    }

    /// At least 3 vertices, all inside the unit square, no two non-adjacent
    /// edges crossing.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::InvalidAnnotation(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        for v in &self.vertices {
            v.check("polygon vertex")?;
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidAnnotation(format!(
                        "polygon edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn orient(a: NormPoint, b: NormPoint, c: NormPoint) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: NormPoint, b: NormPoint, p: NormPoint) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_intersect(a: NormPoint, b: NormPoint, c: NormPoint, d: NormPoint) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// One worker's answer to "which point has darker shading?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Judgment {
    #[serde(rename = "P1")]
    Point1Darker,
    #[serde(rename = "P2")]
    Point2Darker,
    #[serde(rename = "E")]
    Equal,
}

/// A relative shading comparison between two points with its votes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointComparison {
    pub p1: NormPoint,
    pub p2: NormPoint,
    pub votes: Vec<Judgment>,
}

impl PointComparison {
    pub fn validate(&self) -> Result<()> {
        self.p1.check("comparison point")?;
        self.p2.check("comparison point")?;
        if self.votes.is_empty() {
            return Err(Error::InvalidAnnotation("comparison has no votes".into()));
        }
        Ok(())
    }
}

/// A candidate shadow-boundary location and whether the crowd confirmed it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowBoundaryPoint {
    pub pos: NormPoint,
    pub validated: bool,
}

/// All annotations collected for one photo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub photo_id: String,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub regions: Vec<ConstantShadingRegion>,
    #[serde(default)]
    pub comparisons: Vec<PointComparison>,
    #[serde(default)]
    pub shadow_points: Vec<ShadowBoundaryPoint>,
}

impl AnnotationSet {
    pub fn empty(photo_id: impl Into<String>, width: usize, height: usize) -> Self {
        Self {
            photo_id: photo_id.into(),
            width,
            height,
            regions: Vec::new(),
            comparisons: Vec::new(),
            shadow_points: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidAnnotation(format!(
                "photo {} has zero size {}x{}",
                self.photo_id, self.width, self.height
            )));
        }
        for r in &self.regions {
            r.validate()?;
        }
        for c in &self.comparisons {
            c.validate()?;
        }
        for p in &self.shadow_points {
            p.pos.check("shadow point")?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validated_points(&self) -> impl Iterator<Item = &ShadowBoundaryPoint> {
        self.shadow_points.iter().filter(|p| p.validated)
    }
}
