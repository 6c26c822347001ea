use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SolutionId;
use crate::assembly::CoefficientSpec;
use crate::error::{Error, Result};
use crate::hodge::{SolverKind, Variant};
use crate::mesh::{Domain, MeshKind};

fn default_seed() -> u64 {
    2024
}

/// One batch study, readable from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub domain: Domain,
    pub kind: MeshKind,
    pub k: usize,
    pub variant: Variant,
    pub levels: Vec<usize>,
    #[serde(default)]
    pub solution: SolutionId,
    #[serde(default)]
    pub coefficient: CoefficientSpec,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Report path without extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(domain: Domain, kind: MeshKind, k: usize, variant: Variant, levels: Vec<usize>) -> Self {
        StudyConfig {
            domain,
            kind,
            k,
            variant,
            levels,
            solution: SolutionId::Auto,
            coefficient: CoefficientSpec::Identity,
            solver: SolverKind::Auto,
            seed: default_seed(),
            out: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Degree range, mesh support and at least `min_levels` distinct levels.
    pub fn validate(&self, min_levels: usize) -> Result<()> {
        let n = self.dim();
        if self.k == 0 || self.k > n {
            return Err(Error::Config(format!("k = {} is not in 1..={n} for {}", self.k, self.domain)));
        }
        if self.domain == Domain::SquareWithHole && self.kind == MeshKind::Cubical {
            return Err(Error::Config("square_with_hole is only meshed with simplices".into()));
        }
        if self.levels.len() < min_levels {
            return Err(Error::Config(format!("{} level(s) given, at least {min_levels} needed", self.levels.len())));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("levels {:?} must be strictly increasing", self.levels)));
        }
        Ok(())
    }
}

/// "2,3,4" or an inclusive range "2-6".
pub fn parse_levels(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse levels {s:?}"));
    if let Some((a, b)) = s.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_with_defaults() {
        let c = StudyConfig::from_json_str(
            r#"{"domain":"unit_square","kind":"cubical","k":2,"variant":"lumped","levels":[2,3],
                "coefficient":{"type":"scalar","value":2.0}}"#,
        )
        .unwrap();
        assert_eq!(c.seed, 2024);
        assert_eq!(c.solution, SolutionId::Auto);
        assert_eq!(c.coefficient, CoefficientSpec::Scalar { value: 2.0 });
        let back = StudyConfig::from_json_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(StudyConfig::from_json_str(r#"{"domain":"unit_square","kind":"cubical","k":2,"variant":"lumped","levels":[2],"bogus":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = StudyConfig::new(Domain::UnitSquare, MeshKind::Simplicial, 3, Variant::Lumped, vec![2, 3]);
        assert!(c.validate(2).is_err());
        c.k = 2;
        assert!(c.validate(2).is_ok());
        assert!(c.validate(3).is_err());
        c.levels = vec![3, 2];
        assert!(c.validate(2).is_err());
        c.levels = vec![2, 3];
        c.domain = Domain::SquareWithHole;
        c.kind = MeshKind::Cubical;
        assert!(c.validate(1).is_err());
    }

    #[test]
    fn level_syntax() {
        assert_eq!(parse_levels("2-5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_levels("1, 3").unwrap(), vec![1, 3]);
        assert!(parse_levels("5-2").is_err());
        assert!(parse_levels("x").is_err());
    }
}
