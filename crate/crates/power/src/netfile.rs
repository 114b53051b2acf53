//! `itflow-net/1` model files: TOML with a `format` key and the fields of
//! [`PowerNetworkModel`], nothing else.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Branch, Bus, Generator, PowerNetworkModel, Pss};

pub const FORMAT_VERSION: &str = "itflow-net/1";

pub const IEEE39: &str = include_str!("../data/ieee39.net");
pub const THREE_BUS: &str = include_str!("../data/threebus.net");

#[derive(Deserialize)]
struct Header {
    format: Option<toml::Spanned<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    base_mva: f64,
    #[serde(default = "sixty")]
    frequency_hz: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    generators: Vec<Generator>,
    #[serde(default)]
    pss: Vec<Pss>,
}

fn sixty() -> f64 {
    60.0
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

fn parse_error(text: &str, e: toml::de::Error) -> Error {
    let line = e.span().map_or(0, |s| line_of(text, s.start));
    Error::Parse {
        line,
        message: e.message().trim().to_string(),
    }
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<PowerNetworkModel> {
    let header: Header = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    match header.format {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing `format` key".into(),
            })
        }
        Some(f) if f.get_ref() != FORMAT_VERSION => {
            return Err(Error::Parse {
                line: line_of(text, f.span().start),
                message: format!(
                    "unsupported format {:?}, expected {FORMAT_VERSION:?}",
                    f.get_ref()
                ),
            })
        }
        Some(_) => {}
    }
    let doc: Document = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let model = PowerNetworkModel {
        base_mva: doc.base_mva,
        frequency_hz: doc.frequency_hz,
        buses: doc.buses,
        branches: doc.branches,
        generators: doc.generators,
        pss: doc.pss,
    };
    model.validate()?;
    Ok(model)
}

pub fn parse_model_file(path: impl AsRef<Path>) -> Result<PowerNetworkModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_model(&text)
}

pub fn write_model(model: &PowerNetworkModel) -> String {
    let doc = Document {
        format: FORMAT_VERSION.into(),
        base_mva: model.base_mva,
        frequency_hz: model.frequency_hz,
        buses: model.buses.clone(),
        branches: model.branches.clone(),
        generators: model.generators.clone(),
        pss: model.pss.clone(),
    };
    toml::to_string(&doc).expect("model fields are all TOML-representable")
}

/// The shipped New England 39-bus, 10-machine system.
pub fn ieee39() -> PowerNetworkModel {
    parse_model(IEEE39).expect("shipped data file is valid")
}
