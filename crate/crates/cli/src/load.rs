//! Input files, with the path attached to every error.

use std::fs;
use std::path::Path;

use flexreg::io::{parse_classification, parse_network, parse_region, parse_resources, RegionDocument};
use flexreg::{FlexResource, InjectionClassification, Network, Scalar};

use crate::error::CliError;
use crate::NetworkInput;

/// Networks up to this many buses run in exact rational arithmetic.
pub const EXACT_BUS_LIMIT: usize = 12;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, &e))
}

pub struct Problem<S> {
    pub network: Network<S>,
    pub classification: InjectionClassification<S>,
    pub resources: Vec<FlexResource<S>>,
}

pub fn network<S: Scalar>(path: &Path) -> Result<(Network<S>, Option<InjectionClassification<S>>), CliError> {
    parse_network(&read(path)?).map_err(|e| CliError::format(path, e))
}

/// Whether the network is small enough for exact arithmetic.
pub fn exact_mode(path: &Path) -> Result<bool, CliError> {
    let (net, _) = network::<f64>(path)?;
    log::info!(
        "{} buses, {} arithmetic",
        net.buses.len(),
        if net.buses.len() <= EXACT_BUS_LIMIT { "exact" } else { "floating point" }
    );
    Ok(net.buses.len() <= EXACT_BUS_LIMIT)
}

pub fn problem<S: Scalar>(input: &NetworkInput) -> Result<Problem<S>, CliError> {
    let (net, embedded) = network::<S>(&input.network)?;
    let classification = match &input.classification {
        Some(p) => parse_classification(&read(p)?).map_err(|e| CliError::format(p, e))?,
        None => embedded.ok_or_else(|| {
            CliError::input("no classification: embed one in the network or pass --classification").at(&input.network)
        })?,
    };
    let resources = match &input.resources {
        Some(p) => parse_resources(&read(p)?).map_err(|e| CliError::format(p, e))?,
        None => vec![],
    };
    Ok(Problem { network: net, classification, resources })
}

pub fn region<S: Scalar>(path: &Path) -> Result<RegionDocument<S>, CliError> {
    parse_region(&read(path)?).map_err(|e| CliError::format(path, e))
}

/// Comma-separated list; empty entries are rejected.
pub fn list(flag: &str, text: &str) -> Result<Vec<String>, CliError> {
    let items: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
    if items.iter().any(String::is_empty) {
        return Err(CliError::input(format!("--{flag} needs a comma-separated list of names")));
    }
    Ok(items)
}
