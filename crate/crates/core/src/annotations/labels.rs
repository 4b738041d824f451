use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::ShadowBoundaryPoint;
use crate::imgcore::{binary_dilation, ensure_same_dims, BinaryMask};
use crate::{io, Error, Result};

/// Neighbourhood used when dilating non-smooth labels for training.
pub const LABEL_DILATION_WINDOW: usize = 5;

/// Per-pixel shading class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShadingClass {
    Unlabeled,
    /// Smooth shading.
    Smooth,
    /// Non-smooth: normal or depth discontinuity.
    NsNd,
    /// Non-smooth: shadow boundary.
    NsSb,
}

impl ShadingClass {
    pub fn code(self) -> u8 {
        match self {
            ShadingClass::Unlabeled => 0,
            ShadingClass::Smooth => 1,
            ShadingClass::NsNd => 2,
            ShadingClass::NsSb => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => ShadingClass::Unlabeled,
            1 => ShadingClass::Smooth,
            2 => ShadingClass::NsNd,
            3 => ShadingClass::NsSb,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ShadingClass::Unlabeled => "unlabeled",
            ShadingClass::Smooth => "S",
            ShadingClass::NsNd => "NS-ND",
            ShadingClass::NsSb => "NS-SB",
        }
    }
}

/// Labelled pixel counts of a map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub smooth: usize,
    pub nsnd: usize,
    pub nssb: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.smooth + self.nsnd + self.nssb
    }
}

impl std::ops::AddAssign for ClassCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.smooth += rhs.smooth;
        self.nsnd += rhs.nsnd;
        self.nssb += rhs.nssb;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadingLabelMap {
    width: usize,
    height: usize,
    labels: Vec<ShadingClass>,
}

impl ShadingLabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<ShadingClass>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} label map needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self { width, height, labels })
    }

    pub fn unlabeled(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            labels: vec![ShadingClass::Unlabeled; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[ShadingClass] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> ShadingClass {
        self.labels[y * self.width + x]
    }

    pub fn counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for l in &self.labels {
            match l {
                ShadingClass::Smooth => c.smooth += 1,
                ShadingClass::NsNd => c.nsnd += 1,
                ShadingClass::NsSb => c.nssb += 1,
                ShadingClass::Unlabeled => {}
            }
        }
        c
    }

    pub fn to_codes(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.code()).collect()
    }

    pub fn from_codes(width: usize, height: usize, codes: &[u8]) -> Result<Self> {
        let labels = codes
            .iter()
            .map(|&c| ShadingClass::from_code(c).ok_or_else(|| Error::InvalidValue(format!("label code {c}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, labels)
    }

    /// Writes the map as a single-channel 8-bit PNG of class codes.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_png_codes(path, self.width, self.height, self.to_codes())
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let (w, h, codes) = io::read_png_codes(path)?;
        Self::from_codes(w, h, &codes)
    }
}

/// Combines the per-class masks into one label map.
///
/// Validated shadow points are stamped at their nearest pixel. With
/// `dilate_ns` both non-smooth masks are dilated over a 5x5 neighbourhood
/// (training labels only). Conflicts resolve as NS-SB > NS-ND > S.
pub fn build_label_map(
    smooth: &BinaryMask,
    nsnd: &BinaryMask,
    nssb_points: &[ShadowBoundaryPoint],
    dilate_ns: bool,
) -> Result<ShadingLabelMap> {
    ensure_same_dims(smooth.dims(), nsnd.dims())?;
    let (w, h) = smooth.dims();
    let mut nssb = BinaryMask::filled(w, h, false);
    for p in nssb_points {
        if !p.validated {
            return Err(Error::InvalidAnnotation(format!(
                "shadow point ({}, {}) is not validated",
                p.pos.x(),
                p.pos.y()
            )));
        }
        if w > 0 && h > 0 {
            let (x, y) = p.pos.nearest_pixel(w, h);
            nssb.set(x, y, true);
        }
    }
    let (nsnd, nssb) = if dilate_ns {
        (
            binary_dilation(nsnd, LABEL_DILATION_WINDOW)?,
            binary_dilation(&nssb, LABEL_DILATION_WINDOW)?,
        )
    } else {
        (nsnd.clone(), nssb)
    };
    let labels = (0..w * h)
        .map(|i| {
            if nssb.data()[i] {
                ShadingClass::NsSb
            } else if nsnd.data()[i] {
                ShadingClass::NsNd
            } else if smooth.data()[i] {
                ShadingClass::Smooth
            } else {
                ShadingClass::Unlabeled
            }
        })
        .collect();
    ShadingLabelMap::new(w, h, labels)
}
