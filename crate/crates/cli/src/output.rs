//! CSV tables with a one-line JSON header, written atomically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

/// Bumped whenever a column set changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub columns: &'static [&'static str],
    pub units: &'static [(&'static str, &'static str)],
}

const PERIODS: &str = "drive periods";
const ANGULAR: &str = "rad per drive period";

pub const TIME_SERIES: Schema = Schema {
    name: "time-series",
    columns: &["t", "mx", "my", "mz"],
    units: &[("t", PERIODS), ("mx", "S"), ("my", "S"), ("mz", "S")],
};
pub const ENSEMBLE: Schema = Schema {
    name: "ensemble",
    columns: &["t", "mx", "my", "mz", "my_stderr"],
    units: &[("t", PERIODS), ("mx", "S"), ("my", "S"), ("mz", "S"), ("my_stderr", "S")],
};
pub const SPECTRUM: Schema = Schema {
    name: "spectrum",
    columns: &["freq", "amplitude", "m_label", "n_label"],
    units: &[("freq", ANGULAR), ("amplitude", "arb")],
};
pub const GRID_PHASE: Schema = Schema {
    name: "grid-phase",
    columns: &["omega_z", "omega1", "eta", "phase_label"],
    units: &[("omega_z", "kappa"), ("omega1", "rad"), ("eta", "per drive period")],
};
pub const GRID_LOCK: Schema = Schema {
    name: "grid-lock",
    columns: &["omega_z", "omega1", "locked", "p", "q", "f_mod"],
    units: &[("omega_z", "kappa"), ("omega1", "rad"), ("f_mod", ANGULAR)],
};
pub const EIGENVALUES: Schema = Schema {
    name: "eigenvalues",
    columns: &["re", "im", "modulus", "arg", "S", "method"],
    units: &[("arg", "rad")],
};
pub const AUTOCORR: Schema = Schema {
    name: "autocorr",
    columns: &["t", "G", "S"],
    units: &[("t", PERIODS)],
};
pub const JUMPS: Schema = Schema {
    name: "jumps",
    columns: &["timestamp"],
    units: &[("timestamp", PERIODS)],
};
pub const BIFURCATION: Schema = Schema {
    name: "bifurcation",
    columns: &["param", "my", "eta", "phase_label"],
    units: &[("my", "S"), ("eta", "per drive period")],
};
pub const POINCARE: Schema = Schema {
    name: "poincare",
    columns: &["set", "q", "p", "mx", "my", "mz"],
    units: &[("mx", "S"), ("my", "S"), ("mz", "S")],
};
pub const SHIFT_CURVE: Schema = Schema {
    name: "shift-curve",
    columns: &["omega1", "omega_eff", "eta", "locked", "p", "q", "f_mod"],
    units: &[("omega1", "rad"), ("omega_eff", ANGULAR), ("f_mod", ANGULAR)],
};
pub const ZGEOM: Schema = Schema {
    name: "zgeom",
    columns: &["theta", "z_geom", "theta_dot"],
    units: &[("theta", "rad"), ("theta_dot", "rad per unit time")],
};
pub const STEADY: Schema = Schema {
    name: "steady",
    columns: &["S", "mx", "my", "mz", "residual", "iterations"],
    units: &[("mx", "S"), ("my", "S"), ("mz", "S")],
};
pub const VERIFY: Schema = Schema {
    name: "verify",
    columns: &["criterion", "status", "detail"],
    units: &[],
};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub schema: Schema,
    pub rows: Vec<Vec<String>>,
    /// Extra header fields (scalars that belong with the table).
    pub meta: BTreeMap<String, Value>,
}

impl Table {
    pub fn new(name: impl Into<String>, schema: Schema) -> Self {
        Table {
            name: name.into(),
            schema,
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.schema.columns.len());
        self.rows.push(row);
    }

    pub fn with_meta(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), v.into());
        self
    }

    fn header(&self, command: &str, digest: &str) -> String {
        let units: BTreeMap<&str, &str> = self.schema.units.iter().copied().collect();
        let h = json!({
            "schema": self.schema.name,
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config_sha256": digest,
            "units": units,
            "meta": self.meta,
        });
        format!("# {h}\n")
    }

    pub fn render(&self, command: &str, digest: &str) -> String {
        let mut s = self.header(command, digest);
        s.push_str(&self.schema.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip form; `NaN` for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// Writes every table to `dir/<name>.csv` via a temporary file and rename.
pub fn write_tables(dir: &Path, tables: &[Table], command: &str, digest: &str) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(tables.len());
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(t.render(command, digest).as_bytes())?;
        tmp.flush()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        written.push(path);
    }
    Ok(written)
}
