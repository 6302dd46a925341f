//! Loading the network, node table and pair matrices named in a run config.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use lsnet::network::{
    build_dyad_design, load_network_path, DyadDesign, EdgeOptions, Network, NodeTable, PairMatrix,
    UnitScales,
};
use lsnet::{Error, Result};

use crate::config::RunConfig;

pub struct Dataset {
    pub network: Network,
    pub nodes: Option<NodeTable>,
    pub pairs: Vec<PairMatrix>,
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        })
    }
}

/// Splits `name=path`, or names a bare path by its file stem.
fn pair_spec(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) => (name.trim().to_string(), PathBuf::from(path.trim())),
        None => {
            let path = PathBuf::from(spec);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            (name, path)
        }
    }
}

/// Sorted distinct labels appearing in an edge file.
fn labels_from_edges(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Csv(e),
        })?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(s), Some(d)) = (col("src"), col("dst")) else {
        return Err(Error::Load {
            row: 0,
            message: "edge header must contain `src` and `dst`".into(),
        });
    };
    let mut set = BTreeSet::new();
    for r in rdr.records() {
        let r = r?;
        for c in [s, d] {
            set.insert(r.get(c).unwrap_or("").to_string());
        }
    }
    Ok(set.into_iter().collect())
}

impl Dataset {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let edges = cfg
            .edges
            .as_deref()
            .ok_or_else(|| Error::Config("missing --edges".into()))?;
        let nodes = match &cfg.nodes {
            Some(p) => {
                require_file(p)?;
                Some(NodeTable::from_path(p, &UnitScales::default())?)
            }
            None => None,
        };
        require_file(edges)?;
        let labels = match &nodes {
            Some(t) => t.labels.clone(),
            None => labels_from_edges(edges)?,
        };
        let options = EdgeOptions {
            clamp: cfg.clamp.unwrap_or(true),
        };
        let network = load_network_path(edges, &labels, cfg.trials(), options)?;
        let mut pairs = Vec::new();
        for spec in &cfg.pairs {
            let (name, path) = pair_spec(spec);
            require_file(&path)?;
            pairs.push(PairMatrix::from_path(&path, &name, &labels)?);
        }
        Ok(Self {
            network,
            nodes,
            pairs,
        })
    }

    /// Every covariate that can enter a design: node columns, then pair
    /// matrices.
    pub fn available(&self) -> Vec<String> {
        let mut out = self
            .nodes
            .as_ref()
            .map(NodeTable::covariate_names)
            .unwrap_or_default();
        out.extend(self.pairs.iter().map(|p| p.name.clone()));
        out
    }

    /// Resolves a covariate list; `all` expands to [`Self::available`].
    pub fn resolve(&self, names: &[String]) -> Vec<String> {
        if names.len() == 1 && names[0] == "all" {
            self.available()
        } else {
            names.to_vec()
        }
    }

    pub fn design(&self, names: &[String]) -> Result<DyadDesign> {
        if names.is_empty() {
            return Ok(DyadDesign::empty(self.network.n_nodes()));
        }
        let empty = NodeTable {
            labels: self.network.labels().to_vec(),
            columns: Vec::new(),
            latitude: None,
            longitude: None,
        };
        let nodes = self.nodes.as_ref().unwrap_or(&empty);
        build_dyad_design(self.network.labels(), nodes, &self.pairs, names)
    }
}
