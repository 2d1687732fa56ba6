//! CSV ingestion and the JSON report and parameter files.
//!
//! Both files carry a `format_version` that is checked before anything
//! else is parsed. Floats are written in the shortest form that parses back
//! to the same bits, so serialize, parse, serialize is byte-identical.

mod params;
mod report;
mod table;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use params::{AchievedEpsilon, FitManifest, ParamsFile, SubgroupParams, PARAMS_VERSION};
pub use report::{
    run_audit, AuditReport, AuditSettings, EstimateRecord, InputManifest, REPORT_VERSION,
};
pub use table::{load_csv, CsvTable};

pub(crate) const TOOL: &str = concat!("fairsect ", env!("CARGO_PKG_VERSION"));

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(serde::Deserialize)]
struct VersionProbe {
    format_version: u32,
}

fn check_version(text: &str, expected: u32) -> Result<()> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.format_version != expected {
        return Err(Error::VersionMismatch {
            found: probe.format_version,
            expected,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
