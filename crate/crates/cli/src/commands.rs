//! Per-photo work for the `labelgen`, `decompose` and `classify` commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use shading_core::annotations::{
    generate_labels, shadow_candidates, AnnotationSet, ClassCounts, DepthMap, Geometry, LabelGenOptions, NormalMap,
    ShadowCandidate,
};
use shading_core::classify::{constant_reflectance_scores, score_from_heatmap, score_from_shading, ScoreKind};
use shading_core::decompose::{decompose_retinex, HeatMap, RetinexParams};
use shading_core::imgcore::{resize_field_to, resize_max_dim, BinaryMask, LinearImage};
use shading_core::io;

use crate::batch::{find_file, Failure};

pub const IMAGE_EXTS: [&str; 2] = [".png", ".pfm"];
pub const FIELD_EXTS: [&str; 2] = [".pfm", ".png"];

/// Input root layout shared by every command.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn annotations(&self) -> PathBuf {
        self.root.join("annotations")
    }

    pub fn images(&self) -> PathBuf {
        self.root.join("images")
    }

    fn optional(&self, dir: &str, id: &str) -> Option<PathBuf> {
        let p = self.root.join(dir).join(format!("{id}.pfm"));
        p.is_file().then_some(p)
    }

    /// Depth and normals must come together; the mask is optional.
    pub fn geometry(&self, id: &str) -> Result<Option<Geometry>> {
        let (depth, normals) = match (self.optional("depth", id), self.optional("normals", id)) {
            (None, None) => return Ok(None),
            (Some(d), Some(n)) => (d, n),
            (Some(_), None) => bail!("depth map present but normals/{id}.pfm missing"),
            (None, Some(_)) => bail!("normal map present but depth/{id}.pfm missing"),
        };
        let depth = DepthMap::new(io::read_pfm_field(&depth)?);
        let n = io::read_pfm_image(&normals)?;
        if n.channels() != 3 {
            bail!("normal map {} must have 3 channels", normals.display());
        }
        let normals = NormalMap::from_interleaved_normalized(n.width(), n.height(), n.data())?;
        if normals.dims() != depth.dims() {
            bail!("depth {:?} and normal {:?} sizes differ", depth.dims(), normals.dims());
        }
        let mask = match self.optional("masks", id) {
            Some(p) => {
                let m = io::read_pfm_field(&p)?;
                Some(BinaryMask::from_fn(m.width(), m.height(), |x, y| m.get(x, y) > 0.5))
            }
            None => None,
        };
        Ok(Some(Geometry { depth, normals, mask }))
    }

    pub fn image(&self, id: &str, max_dim: usize) -> Result<LinearImage> {
        let path = find_file(&self.images(), id, &IMAGE_EXTS)?;
        let img = io::read_image(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(resize_max_dim(&img, max_dim)?)
    }
}

/// Loads a heatmap and resamples it to `dims`.
pub fn load_heatmap(dir: &Path, id: &str, dims: (usize, usize)) -> Result<HeatMap> {
    let path = find_file(dir, id, &FIELD_EXTS)?;
    let field = io::read_field(&path).with_context(|| format!("reading {}", path.display()))?;
    let field = resize_field_to(&field, dims)?.map(|v| v.clamp(0.0, 1.0))?;
    Ok(HeatMap::new(field)?)
}

pub struct LabelJob {
    pub layout: Layout,
    pub output: PathBuf,
    pub options: LabelGenOptions,
    pub candidates: bool,
}

#[derive(Debug, Serialize)]
pub struct LabelSummary {
    pub command: &'static str,
    pub photos: usize,
    pub succeeded: usize,
    pub options: LabelGenOptions,
    pub totals: ClassCounts,
    pub counts: BTreeMap<String, ClassCounts>,
    pub failures: Vec<Failure>,
}

impl LabelJob {
    pub fn run(&self, id: &str) -> Result<ClassCounts> {
        let ann_path = self.layout.annotations().join(format!("{id}.json"));
        let ann = AnnotationSet::load(&ann_path).with_context(|| format!("loading {}", ann_path.display()))?;
        let geometry = self.layout.geometry(id)?;
        let labels = generate_labels(&ann, geometry.as_ref(), &self.options)?;
        labels.save_png(self.output.join(format!("{id}.png")))?;
        if self.candidates && !ann.comparisons.is_empty() {
            let img = self.layout.image(id, usize::MAX)?;
            let cands: Vec<ShadowCandidate> = shadow_candidates(&img, &ann, self.options.max_dim)?;
            crate::batch::write_json(&self.output.join(format!("{id}_candidates.json")), &cands)?;
        }
        let counts = labels.counts();
        log::info!("{id}: S={} NS-ND={} NS-SB={}", counts.smooth, counts.nsnd, counts.nssb);
        Ok(counts)
    }
}

pub struct DecomposeJob {
    pub layout: Layout,
    pub output: PathBuf,
    pub params: RetinexParams,
    pub heatmaps: Option<PathBuf>,
    pub max_dim: usize,
}

#[derive(Debug, Serialize)]
pub struct DecomposeResult {
    pub width: usize,
    pub height: usize,
    pub energy: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct DecomposeSummary {
    pub command: &'static str,
    pub photos: usize,
    pub succeeded: usize,
    pub params: RetinexParams,
    pub results: BTreeMap<String, DecomposeResult>,
    pub failures: Vec<Failure>,
}

impl DecomposeJob {
    pub fn run(&self, id: &str) -> Result<DecomposeResult> {
        let img = self.layout.image(id, self.max_dim)?;
        let heat = match (&self.heatmaps, self.params.use_prior) {
            (Some(dir), true) => Some(load_heatmap(dir, id, img.dims())?),
            (None, true) => bail!("--use-prior needs --heatmaps"),
            (_, false) => None,
        };
        let d = decompose_retinex(&img, &self.params, heat.as_ref())?;
        let out = |suffix: &str| self.output.join(format!("{id}{suffix}"));
        io::write_pfm_image(out("_reflectance.pfm"), &d.reflectance)?;
        io::write_pfm_field(out("_shading.pfm"), &d.shading)?;
        io::write_png_srgb(out("_reflectance.png"), &normalized(&d.reflectance)?)?;
        log::info!(
            "{id}: energy {:.6e}, {} CG iterations, residual {:.2e}",
            d.energy,
            d.stats.iterations,
            d.stats.relative_residual
        );
        Ok(DecomposeResult {
            width: img.width(),
            height: img.height(),
            energy: d.energy,
            iterations: d.stats.iterations,
            relative_residual: d.stats.relative_residual,
        })
    }
}

/// Scales an image so its largest value is 1, for PNG previews.
fn normalized(img: &LinearImage) -> Result<LinearImage> {
    let max = img.data().iter().copied().fold(0.0, f64::max);
    let k = if max > 0.0 { 1.0 / max } else { 1.0 };
    Ok(LinearImage::new(img.width(), img.height(), img.channels(), img.data().iter().map(|v| v * k).collect())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Input luminance used as shading.
    ConstantR,
    /// Shading layers written by `decompose`.
    Shading,
    /// Smooth-shading probability maps used directly.
    Heatmap,
}

pub struct ClassifyJob {
    pub layout: Layout,
    pub output: PathBuf,
    pub method: Method,
    pub source: PathBuf,
    pub max_dim: usize,
}

#[derive(Debug, Serialize)]
pub struct ClassifySummary {
    pub command: &'static str,
    pub method: Method,
    pub kind: ScoreKind,
    pub photos: usize,
    pub succeeded: usize,
    pub failures: Vec<Failure>,
}

impl ClassifyJob {
    /// Directory and file suffix holding this method's inputs.
    pub fn source_suffix(method: Method) -> &'static str {
        match method {
            Method::ConstantR => ".png",
            Method::Shading => "_shading.pfm",
            Method::Heatmap => ".pfm",
        }
    }

    pub fn kind(&self) -> ScoreKind {
        match self.method {
            Method::Heatmap => ScoreKind::Probability,
            _ => ScoreKind::NegGradient,
        }
    }

    pub fn run(&self, id: &str) -> Result<()> {
        let scores = match self.method {
            Method::ConstantR => constant_reflectance_scores(&self.layout.image(id, self.max_dim)?)?,
            Method::Shading => {
                let path = self.source.join(format!("{id}_shading.pfm"));
                let s = io::read_pfm_field(&path).with_context(|| format!("reading {}", path.display()))?;
                score_from_shading(&s)?
            }
            Method::Heatmap => {
                let path = find_file(&self.source, id, &FIELD_EXTS)?;
                let field = io::read_field(&path).with_context(|| format!("reading {}", path.display()))?;
                score_from_heatmap(&HeatMap::new(field)?)
            }
        };
        scores.save_pfm(self.output.join(format!("{id}.pfm")))?;
        Ok(())
    }
}
