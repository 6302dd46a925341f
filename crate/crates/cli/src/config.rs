//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use lsnet::lpcm::{McmcConfig, Priors};
use lsnet::{Error, Result};
use serde::{Deserialize, Serialize};

/// Every setting a command may use. Unset fields fall back to command
/// defaults; the file is read first and flags overwrite it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    /// Pair matrices as `name=path` or a bare path named by its file stem.
    pub pairs: Vec<String>,
    pub trials: Option<u32>,
    pub clamp: Option<bool>,

    pub dim: Option<usize>,
    pub groups: Option<usize>,
    pub groups_range: Option<String>,
    pub covariates: Option<Vec<String>>,
    pub control: Option<Vec<String>>,
    pub mode: Option<String>,

    pub preset: Option<String>,
    pub burnin: Option<usize>,
    pub iterations: Option<usize>,
    pub thin: Option<usize>,
    pub chains: Option<usize>,
    pub seed: Option<u64>,
    pub priors: Option<Priors>,

    pub out: Option<PathBuf>,
    pub fit: Option<PathBuf>,
    pub replicates: Option<usize>,
    pub threshold: Option<f64>,
    pub response: Option<String>,
    pub count_degree: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Copies every field set in `flags` over `self`.
    pub fn overlay(&mut self, flags: &RunConfig) {
        overlay!(self, flags;
            nodes, edges, trials, clamp, dim, groups, groups_range, covariates, control,
            mode, preset, burnin, iterations, thin, chains, seed, priors, out, fit,
            replicates, threshold, response, count_degree);
        if !flags.pairs.is_empty() {
            self.pairs = flags.pairs.clone();
        }
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(2)
    }

    pub fn trials(&self) -> u32 {
        self.trials.unwrap_or(3)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("sampling commands need --seed".into()))
    }

    pub fn out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| Error::Config("missing --out directory".into()))
    }

    pub fn groups(&self) -> Result<usize> {
        self.groups
            .ok_or_else(|| Error::Config("missing --groups".into()))
    }

    /// Candidate group counts from `--groups-range` (`a..b`, `a-b` or a
    /// comma list), else `--groups`, else `default`.
    pub fn group_range(&self, default: &[usize]) -> Result<Vec<usize>> {
        match (&self.groups_range, self.groups) {
            (Some(r), _) => parse_range(r),
            (None, Some(g)) => Ok(vec![g]),
            (None, None) => Ok(default.to_vec()),
        }
    }

    pub fn mcmc(&self) -> Result<McmcConfig> {
        let seed = self.seed()?;
        let mut cfg = match self.preset.as_deref().unwrap_or("fast") {
            "fast" => McmcConfig::fast(seed),
            "paper" => McmcConfig::paper(seed),
            other => return Err(Error::Config(format!("unknown preset `{other}`"))),
        };
        if let Some(v) = self.burnin {
            cfg.burn_in = v;
        }
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = self.thin {
            cfg.thin = v;
        }
        if let Some(v) = self.chains {
            cfg.chains = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn priors(&self) -> Result<Priors> {
        let p = self.priors.unwrap_or_default();
        p.validate()?;
        Ok(p)
    }
}

pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot read group range `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        (num(a)?..=num(b.trim_start_matches('='))?).collect()
    } else if let Some((a, b)) = s.split_once('-') {
        (num(a)?..=num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_range("2-4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("3,1").unwrap(), vec![3, 1]);
        assert!(parse_range("5..1").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let mut file: RunConfig = toml::from_str("dim = 3\nseed = 1\npairs = [\"a.csv\"]").unwrap();
        let flags = RunConfig {
            seed: Some(9),
            ..RunConfig::default()
        };
        file.overlay(&flags);
        assert_eq!(file.dim(), 3);
        assert_eq!(file.seed, Some(9));
        assert_eq!(file.pairs, vec!["a.csv".to_string()]);
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }
}
