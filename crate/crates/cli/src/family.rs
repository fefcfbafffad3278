use s2s2::catalog::{FamilyKind, FamilySpec};
use serde::Serialize;

use crate::args::FamilyName;
use crate::error::{CliError, CliResult};

/// Family name and parameters as they appear in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyId {
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl FamilyId {
    pub fn label(&self) -> String {
        match (self.t, self.r) {
            (Some(t), _) => format!("{} t={t}", self.name),
            (_, Some(r)) => format!("{} r={r}", self.name),
            _ => self.name.to_string(),
        }
    }
}

pub fn kind(name: FamilyName, t: Option<f64>, r: Option<f64>) -> CliResult<FamilyKind<f64>> {
    let reject = |flag: &str| Err(CliError::Usage(format!("--{flag} does not apply to {}", name_str(name))));
    match name {
        FamilyName::Mt => {
            if r.is_some() {
                return reject("r");
            }
            let t = t.ok_or_else(|| CliError::Usage("mt needs --t".into()))?;
            Ok(FamilyKind::Mt { t })
        }
        FamilyName::S1rxs2 => {
            if t.is_some() {
                return reject("t");
            }
            let r = r.ok_or_else(|| CliError::Usage("s1rxs2 needs --r".into()))?;
            Ok(FamilyKind::S1rxS2 { r })
        }
        FamilyName::Mab | FamilyName::Mhat => {
            if t.is_some() {
                return reject("t");
            }
            if r.is_some() {
                return reject("r");
            }
            Ok(if name == FamilyName::Mab { FamilyKind::Mab } else { FamilyKind::MhatAb })
        }
    }
}

pub fn name_str(name: FamilyName) -> &'static str {
    match name {
        FamilyName::S1rxs2 => "s1rxs2",
        FamilyName::Mt => "mt",
        FamilyName::Mab => "mab",
        FamilyName::Mhat => "mhat",
    }
}

/// Builds the family, reporting out-of-range parameters as domain errors.
pub fn build(name: FamilyName, t: Option<f64>, r: Option<f64>) -> CliResult<(FamilySpec<f64>, FamilyId)> {
    let kind = kind(name, t, r)?;
    let spec = FamilySpec::new(kind)?;
    Ok((spec, id_of(&kind)))
}

pub fn id_of(kind: &FamilyKind<f64>) -> FamilyId {
    let (t, r) = match *kind {
        FamilyKind::Mt { t } => (Some(t), None),
        FamilyKind::S1rxS2 { r } => (None, Some(r)),
        _ => (None, None),
    };
    FamilyId { name: kind.name(), t, r }
}
