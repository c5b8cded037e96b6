use std::path::Path;

use mflab_core::homalg::{ModuleFile, ModulePresentation};
use mflab_core::matfac::MfFile;
use mflab_core::rings::{parse_descriptor, CurveDescriptor, RingDescriptor};
use mflab_core::{HypersurfaceRing, MatrixFactorization, MonomialCurveRing};

use crate::{CliError, CliResult};

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn ring_descriptor(path: &Path) -> CliResult<RingDescriptor> {
    parse_descriptor(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn ring(path: &Path, trunc: Option<usize>) -> CliResult<HypersurfaceRing> {
    let mut d = ring_descriptor(path)?;
    if let Some(t) = trunc {
        d.trunc = t;
    }
    Ok(HypersurfaceRing::from_descriptor(&d)?)
}

pub enum Descriptor {
    Ring(RingDescriptor),
    Curve(CurveDescriptor),
}

pub fn descriptor(path: &Path) -> CliResult<Descriptor> {
    let text = read(path)?;
    if let Ok(c) = parse_descriptor::<CurveDescriptor>(&text) {
        return Ok(Descriptor::Curve(c));
    }
    parse_descriptor(&text)
        .map(Descriptor::Ring)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn mf_file(path: &Path) -> CliResult<MfFile> {
    json(path)
}

/// A factorization at truncation `trunc`, or at the file's own when `None`.
pub fn mf(path: &Path, trunc: Option<usize>) -> CliResult<MatrixFactorization> {
    let mut file = mf_file(path)?;
    if let Some(t) = trunc {
        file.ring.trunc = t;
    }
    Ok(MatrixFactorization::from_file(&file)?)
}

/// Either kind of module file: a factorization (Coker phi) or a presentation matrix.
pub enum ModuleInput {
    Mf(MatrixFactorization),
    Presentation(ModulePresentation),
}

impl ModuleInput {
    pub fn presentation(&self, trunc: usize) -> CliResult<ModulePresentation> {
        Ok(match self {
            ModuleInput::Mf(m) => ModulePresentation::from_mf(m, trunc)?,
            ModuleInput::Presentation(p) => p.with_trunc(trunc)?,
        })
    }

    pub fn ring(&self) -> &HypersurfaceRing {
        match self {
            ModuleInput::Mf(m) => m.ring(),
            ModuleInput::Presentation(p) => p.ring(),
        }
    }
}

pub fn file_trunc(path: &Path) -> CliResult<Option<usize>> {
    let v: serde_json::Value = match json(path) {
        Ok(v) => v,
        Err(_) => return Ok(ring_descriptor(path).ok().map(|d| d.trunc)),
    };
    Ok(v.get("ring")
        .and_then(|r| r.get("trunc"))
        .or_else(|| v.get("trunc"))
        .and_then(|t| t.as_u64())
        .map(|t| t as usize))
}

pub fn module(path: &Path, trunc: usize) -> CliResult<ModuleInput> {
    let v: serde_json::Value = json(path)?;
    if v.get("phi").is_some() {
        let mut file: MfFile =
            serde_json::from_value(v).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        file.ring.trunc = trunc;
        Ok(ModuleInput::Mf(MatrixFactorization::from_file(&file)?))
    } else {
        let file: ModuleFile =
            serde_json::from_value(v).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(ModuleInput::Presentation(ModulePresentation::from_file(
            &file,
            Some(trunc),
        )?))
    }
}

pub fn curve(generators: &[u32], field: u64, trunc: usize) -> CliResult<MonomialCurveRing> {
    Ok(MonomialCurveRing::new(
        mflab_core::Field::fp(field)?,
        generators,
        trunc,
    )?)
}

pub fn write_mf(path: &Path, mf: &MatrixFactorization) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&mf.to_file()).map_err(|e| CliError::Input(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
