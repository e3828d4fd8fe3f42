use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use eigentomo::cosine::{assemble_constraints, coeffs_from_generator, null_basis, StressSeries};
use eigentomo::field::read_field_csv;
use eigentomo::{CosinePotential, ElasticConstants, NullGenerator, SymTensorField3};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::args::{Global, SourceArgs};
use crate::failure::Failure;

pub enum FieldSource {
    /// Exact series with the constants it was built for.
    Series {
        potential: CosinePotential,
        constants: ElasticConstants,
        label: String,
    },
    Sampled {
        field: SymTensorField3,
        label: String,
    },
}

impl FieldSource {
    pub fn label(&self) -> &str {
        match self {
            FieldSource::Series { label, .. } | FieldSource::Sampled { label, .. } => label,
        }
    }

    pub fn series(&self) -> Option<StressSeries> {
        match self {
            FieldSource::Series { potential, .. } => Some(potential.stress_series()),
            FieldSource::Sampled { .. } => None,
        }
    }
}

/// Generator file; `nu` overrides `--nu` when present.
#[derive(Deserialize)]
struct GeneratorFile {
    #[serde(rename = "N")]
    n: usize,
    nu: Option<f64>,
    b: Vec<f64>,
}

pub fn constants(g: &Global) -> Result<ElasticConstants, Failure> {
    Ok(ElasticConstants::new(g.e, g.nu)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let f = File::open(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))
}

pub fn resolve(src: &SourceArgs, g: &Global) -> Result<FieldSource, Failure> {
    let c = constants(g)?;
    if let Some(path) = &src.generator {
        let file: GeneratorFile = read_json(path)?;
        let constants = ElasticConstants::new(g.e, file.nu.unwrap_or(g.nu))?;
        let gen = NullGenerator::new(file.n, file.b)?;
        let potential = coeffs_from_generator(&gen, &constants)?;
        return Ok(FieldSource::Series { potential, constants, label: format!("generator {}", path.display()) });
    }
    if let Some(path) = &src.potential {
        let potential: CosinePotential = read_json(path)?;
        potential.validate()?;
        return Ok(FieldSource::Series { potential, constants: c, label: format!("potential {}", path.display()) });
    }
    if let Some(path) = &src.field {
        let f = File::open(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
        let field = read_field_csv(BufReader::new(f))?;
        return Ok(FieldSource::Sampled { field, label: format!("field {}", path.display()) });
    }
    if src.zero {
        return Ok(FieldSource::Series {
            potential: CosinePotential::zeros(g.n.max(1)),
            constants: c,
            label: "zero".into(),
        });
    }
    let q = src.basis_index.unwrap_or(0);
    let nb = null_basis(&assemble_constraints(g.n, &c)?, g.tol.null)?;
    let gen = nb.generator(q)?;
    let potential = coeffs_from_generator(&gen, &c)?;
    Ok(FieldSource::Series {
        potential,
        constants: c,
        label: format!("null basis field {q} of {} at N = {}", nb.dim(), g.n),
    })
}
