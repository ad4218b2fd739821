//! Size and time bounds. Defaults can be overridden with the `ASPIR_LIMITS`
//! environment variable, a comma-separated `key=value` list.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of atoms for brute-force answer-set enumeration.
    pub bruteforce_atoms: usize,
    /// Maximum domain size for brute-force IR enumeration.
    pub ir_domain: usize,
    /// Maximum number of ground rules produced by any grounding.
    pub ground_rules: usize,
    /// Maximum nesting depth of function terms produced during grounding.
    pub term_depth: usize,
    /// Maximum number of external evaluations during a single grounding.
    pub grounding_evals: usize,
    /// Maximum number of candidate checks in one minimality search.
    pub minimality_checks: usize,
    /// Maximum number of conflicts in a single solver run (0 = unbounded).
    pub conflicts: usize,
    /// Maximum number of answer sets to enumerate (0 = unbounded).
    pub models: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            bruteforce_atoms: 20,
            ir_domain: 12,
            ground_rules: 2_000_000,
            term_depth: 4,
            grounding_evals: 1 << 16,
            minimality_checks: 1_000_000,
            conflicts: 0,
            models: 0,
        }
    }
}

impl Limits {
    pub fn from_env() -> Result<Limits> {
        match std::env::var("ASPIR_LIMITS") {
            Ok(spec) => Limits::default().with_overrides(&spec),
            Err(_) => Ok(Limits::default()),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Result<Limits> {
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("ASPIR_LIMITS entry `{part}` is not key=value")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("ASPIR_LIMITS value for `{k}` is not a number")))?;
            let slot = match k.trim() {
                "bruteforce_atoms" => &mut self.bruteforce_atoms,
                "ir_domain" => &mut self.ir_domain,
                "ground_rules" => &mut self.ground_rules,
                "term_depth" => &mut self.term_depth,
                "grounding_evals" => &mut self.grounding_evals,
                "minimality_checks" => &mut self.minimality_checks,
                "conflicts" => &mut self.conflicts,
                "models" => &mut self.models,
                other => return Err(Error::Invalid(format!("unknown ASPIR_LIMITS key `{other}`"))),
            };
            *slot = v;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let l = Limits::default().with_overrides("bruteforce_atoms=8, term_depth=2").unwrap();
        assert_eq!(l.bruteforce_atoms, 8);
        assert_eq!(l.term_depth, 2);
        assert_eq!(l.ir_domain, 12);
    }

    #[test]
    fn overrides_reject_garbage() {
        assert!(Limits::default().with_overrides("nope=1").is_err());
        assert!(Limits::default().with_overrides("models").is_err());
        assert!(Limits::default().with_overrides("models=x").is_err());
    }
}
