//! JSON form of an ensemble.

use annulus_gas::{
    AnnulusGeometry, ChargeConfiguration, EnsembleSpec, FamilySelector, RadialProfile,
    TabulatedProfile,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDto {
    pub n: usize,
    #[serde(default = "two")]
    pub beta: f64,
    #[serde(default)]
    pub inner_radius: f64,
    /// `null` for the exterior of a disc.
    pub outer_radius: Option<f64>,
    #[serde(default)]
    pub profile: ProfileDto,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub m_charges: u32,
    #[serde(default = "class_i")]
    pub family: String,
}

fn two() -> f64 {
    2.0
}

fn class_i() -> String {
    "class_i".into()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileDto {
    #[default]
    Flat,
    Power { alpha: f64 },
    Tabulated { table: TableDto },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDto {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub reciprocal: bool,
}

pub fn family_from_name(s: &str) -> Option<FamilySelector> {
    [
        FamilySelector::ClassI,
        FamilySelector::ClassIIExteriorTypeA,
        FamilySelector::ClassIIInteriorTypeB,
    ]
    .into_iter()
    .find(|f| f.name() == s)
}

impl ProfileDto {
    pub fn to_profile(&self) -> Result<RadialProfile, CliError> {
        Ok(match self {
            ProfileDto::Flat => RadialProfile::Flat,
            ProfileDto::Power { alpha } => RadialProfile::Power { alpha: *alpha },
            ProfileDto::Tabulated { table } => RadialProfile::Tabulated(
                TabulatedProfile::new(table.radii.clone(), table.values.clone())?
                    .with_reciprocal(table.reciprocal),
            ),
        })
    }

    pub fn from_profile(p: &RadialProfile) -> Self {
        match p {
            RadialProfile::Flat => ProfileDto::Flat,
            RadialProfile::Power { alpha } => ProfileDto::Power { alpha: *alpha },
            RadialProfile::Tabulated(t) => ProfileDto::Tabulated {
                table: TableDto {
                    radii: t.radii().to_vec(),
                    values: t.values().to_vec(),
                    reciprocal: t.is_reciprocal(),
                },
            },
        }
    }
}

impl SpecDto {
    pub fn to_spec(&self) -> Result<EnsembleSpec, CliError> {
        let geometry = match self.outer_radius {
            Some(v) => AnnulusGeometry::new(self.inner_radius, v)?,
            None => AnnulusGeometry::exterior_disc(self.inner_radius)?,
        };
        let family = family_from_name(&self.family).ok_or_else(|| {
            CliError::Validation(format!(
                "unknown family {:?} (expected class_i, class_ii_exterior_type_a or class_ii_interior_type_b)",
                self.family
            ))
        })?;
        Ok(EnsembleSpec::build(
            self.n,
            self.beta,
            geometry,
            self.profile.to_profile()?,
            ChargeConfiguration::new(self.gamma, self.m_charges),
            family,
        )?)
    }

    #[cfg(test)]
    pub fn from_spec(spec: &EnsembleSpec) -> Self {
        let g = spec.geometry();
        SpecDto {
            n: spec.n(),
            beta: spec.beta(),
            inner_radius: g.inner_radius(),
            outer_radius: g.outer_radius().is_finite().then(|| g.outer_radius()),
            profile: ProfileDto::from_profile(spec.profile()),
            gamma: spec.gamma(),
            m_charges: spec.m(),
            family: spec.family().name().into(),
        }
    }

    pub fn read(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad spec {}: {e}", path.display())))
    }
}
