//! Scene directories: the fixed file names the CLI reads and writes.

use std::path::{Path, PathBuf};

use cosparse_core::simulate::Scene;
use cosparse_core::{AnalysisOperator, Modality, ScalarField, SemanticField};

use crate::error::{Error, Result};
use crate::pgm::{normalize_for_display, write_pgm};
use crate::tensor::{read_tensor, write_tensor, Tensor};

pub const INTENSITY: &str = "intensity.csaf";
pub const DEPTH: &str = "depth.csaf";
pub const SEMANTICS: &str = "semantics.csaf";
pub const MASK: &str = "mask.csaf";
pub const INTENSITY_PGM: &str = "intensity.pgm";
pub const DEPTH_PGM: &str = "depth.pgm";

pub fn operator_file(modality: Modality) -> String {
    format!("omega_{}.csaf", modality.short_name())
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn existing(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingFile(path))
    }
}

pub fn load_scalar(path: &Path) -> Result<ScalarField> {
    read_tensor(&existing(path.to_path_buf())?)?.to_scalar_field()
}

pub fn load_semantic(path: &Path) -> Result<SemanticField> {
    read_tensor(&existing(path.to_path_buf())?)?.to_semantic_field()
}

pub fn load_mask(path: &Path) -> Result<(usize, usize, Vec<bool>)> {
    read_tensor(&existing(path.to_path_buf())?)?.to_mask()
}

/// Writes the three modalities plus PGM previews; depth is shown over
/// `depth_range`.
pub fn write_scene(dir: &Path, scene: &Scene, depth_range: (f64, f64)) -> Result<()> {
    ensure_dir(dir)?;
    write_tensor(&dir.join(INTENSITY), &Tensor::from_scalar_field(&scene.intensity))?;
    write_tensor(&dir.join(DEPTH), &Tensor::from_scalar_field(&scene.depth))?;
    write_tensor(&dir.join(SEMANTICS), &Tensor::from_semantic_field(&scene.semantics))?;
    write_pgm(&dir.join(INTENSITY_PGM), &scene.intensity, 255)?;
    let shown = normalize_for_display(&scene.depth, depth_range.0, depth_range.1);
    write_pgm(&dir.join(DEPTH_PGM), &shown, 255)
}

/// A registered training or test image read from a scene directory.
#[derive(Debug, Clone)]
pub struct SceneData {
    pub intensity: ScalarField,
    pub depth: ScalarField,
    pub semantics: SemanticField,
    /// Observation mask, when the directory carries one.
    pub mask: Option<Vec<bool>>,
}

impl SceneData {
    pub fn load(dir: &Path) -> Result<Self> {
        let intensity = load_scalar(&dir.join(INTENSITY))?;
        let depth = load_scalar(&dir.join(DEPTH))?;
        let semantics = load_semantic(&dir.join(SEMANTICS))?;
        let dims = (intensity.width(), intensity.height());
        if (depth.width(), depth.height()) != dims || (semantics.width(), semantics.height()) != dims {
            return Err(Error::Shape(format!("{}: modalities are not on one grid", dir.display())));
        }
        let mask_path = dir.join(MASK);
        let mask = if mask_path.is_file() {
            let (w, h, m) = load_mask(&mask_path)?;
            if (w, h) != dims {
                return Err(Error::Shape(format!("{}: mask grid differs from the image", mask_path.display())));
            }
            Some(m)
        } else {
            None
        };
        Ok(Self {
            intensity,
            depth,
            semantics,
            mask,
        })
    }
}

pub fn write_operators(dir: &Path, ops: &[AnalysisOperator; 3]) -> Result<()> {
    ensure_dir(dir)?;
    for op in ops {
        write_tensor(&dir.join(operator_file(op.modality())), &Tensor::from_operator(op))?;
    }
    Ok(())
}

pub fn load_operators(dir: &Path) -> Result<[AnalysisOperator; 3]> {
    let load = |m: Modality| -> Result<AnalysisOperator> { read_tensor(&existing(dir.join(operator_file(m)))?)?.to_operator(m) };
    Ok([load(Modality::Intensity)?, load(Modality::Depth)?, load(Modality::Semantics)?])
}
