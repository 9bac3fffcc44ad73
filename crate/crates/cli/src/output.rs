//! Run directories: CSV tables, plot descriptions, snapshots and the
//! manifest that ties them to the configuration.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rns_core::randomizer::rng::{HASH_ID, TRANSFORM_ID};
use rns_core::spectral::write_snapshot;
use rns_core::SpectralField;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RNS_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "rns-out";
pub const MANIFEST: &str = "manifest.toml";

/// Flag, then config, then environment, then [`DEFAULT_OUT_DIR`].
pub fn resolve_out_dir(flag: Option<&Path>, cfg: Option<&RunConfig>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = cfg.and_then(|c| c.output_dir.clone()) {
        return p;
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT_DIR),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConfigError,
    NumericalFailure,
    InvariantFailure,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    created_unix: u64,
    master_seed: Option<u64>,
    draw_seed: Option<u64>,
    rng_hash: &'static str,
    gaussian_transform: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<Scheme>,
    files: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a RunConfig>,
}

/// Numerical scheme identifiers of the solver commands.
#[derive(Serialize)]
struct Scheme {
    integrator: &'static str,
    dealias: &'static str,
    ledger_quadrature: &'static str,
}

/// Axis of a plot description.
pub struct Axis<'a> {
    pub column: &'a str,
    pub label: &'a str,
    pub log: bool,
}

/// Output directory of one subcommand invocation.
pub struct RunOutput {
    dir: PathBuf,
    command: String,
    files: Vec<String>,
}

fn fmt(v: f64) -> String {
    // shortest round-trip representation keeps reruns byte-identical
    format!("{v}")
}

impl RunOutput {
    pub fn create(root: &Path, command: &str) -> io::Result<Self> {
        let dir = root.join(command);
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            command: command.to_string(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn register(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            let _ = fs::create_dir_all(parent);
        }
        path
    }

    /// Writes a numeric table.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        self.csv_text(name, header, rows.into_iter().map(|r| r.into_iter().map(fmt).collect()))
    }

    /// Writes a table whose cells are already formatted.
    pub fn csv_text<I>(&mut self, name: &str, header: &[&str], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.register(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) -> io::Result<()> {
        let path = self.register(name);
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()
    }

    /// Line plot of `ys` against `x` from the CSV `data`, optionally one
    /// series per distinct value of `group`.
    pub fn plot(
        &mut self,
        name: &str,
        title: &str,
        data: &str,
        x: Axis,
        ys: &[Axis],
        group: Option<&str>,
    ) -> io::Result<()> {
        let axis = |a: &Axis| json!({"column": a.column, "label": a.label, "scale": if a.log { "log" } else { "linear" }});
        let spec = json!({
            "title": title,
            "kind": "line",
            "data": data,
            "x": axis(&x),
            "y": ys.iter().map(axis).collect::<Vec<_>>(),
            "group_by": group,
        });
        self.json(name, &spec)
    }

    pub fn snapshot(&mut self, name: &str, field: &SpectralField) -> io::Result<()> {
        let path = self.register(name);
        let mut w = BufWriter::new(File::create(path)?);
        write_snapshot(field, &mut w).map_err(io::Error::other)?;
        w.flush()
    }

    fn scheme(&self, cfg: Option<&RunConfig>) -> Option<Scheme> {
        if !matches!(self.command.as_str(), "solve" | "restart" | "energy-report") {
            return None;
        }
        let picard = self.command == "solve"
            && cfg.is_some_and(|c| c.solver.integrator == crate::config::IntegratorKind::Picard);
        Some(Scheme {
            integrator: if picard { "picard-duhamel" } else { "lawson-if-rk4" },
            dealias: "two-thirds",
            ledger_quadrature: "trapezoid; exponentially fitted for the restart ratio",
        })
    }

    /// Writes the manifest; called on success and on failure alike.
    pub fn finish(&self, cfg: Option<&RunConfig>, status: Status, error: Option<&str>) -> io::Result<()> {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let manifest = Manifest {
            tool: "rns",
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            status,
            error,
            created_unix,
            master_seed: cfg.map(|c| c.seed),
            draw_seed: cfg.map(|c| c.draw_seed()),
            rng_hash: HASH_ID,
            gaussian_transform: TRANSFORM_ID,
            scheme: self.scheme(cfg),
            files: &self.files,
            config: cfg,
        };
        let text = toml::to_string(&manifest).map_err(io::Error::other)?;
        fs::write(self.dir.join(MANIFEST), text)
    }
}
