//! Artifact writers: JSON run manifest, CSV tables tagged with the manifest
//! hash and column units, and gnuplot scripts for plottable tables.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub package_version: String,
    pub workers: usize,
    pub elapsed_seconds: f64,
}

pub struct RunOutput {
    pub dir: PathBuf,
    pub hash: String,
}

/// Hash covers the subcommand and the full effective config, so two CSVs
/// with the same tag are guaranteed to come from identical run parameters.
pub fn manifest_hash(m: &Manifest) -> String {
    let mut payload = serde_json::to_vec(&m.config).expect("config serializes");
    payload.extend_from_slice(m.subcommand.as_bytes());
    let digest = Sha256::digest(&payload);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn prepare(dir: &Path, manifest: &Manifest) -> std::io::Result<RunOutput> {
    std::fs::create_dir_all(dir)?;
    let hash = manifest_hash(manifest);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(RunOutput {
        dir: dir.to_path_buf(),
        hash,
    })
}

impl RunOutput {
    /// CSV with a `# manifest:` tag and a `# units:` row ahead of the header.
    pub fn write_csv(
        &self,
        name: &str,
        columns: &[(&str, &str)],
        rows: &[Vec<String>],
    ) -> std::io::Result<PathBuf> {
        let mut text = String::new();
        text.push_str(&format!("# manifest: {}\n", self.hash));
        let units: Vec<&str> = columns.iter().map(|c| c.1).collect();
        text.push_str(&format!("# units: {}\n", units.join(",")));
        let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
        text.push_str(&names.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let path = self.dir.join(name);
        std::fs::write(&path, text)?;
        Ok(path)
    }

    /// Companion gnuplot script: plots `y_col` against `x_col` (1-based).
    pub fn write_plot_script(
        &self,
        csv_name: &str,
        x_col: usize,
        y_col: usize,
        title: &str,
        logscale: bool,
    ) -> std::io::Result<PathBuf> {
        let stem = csv_name.trim_end_matches(".csv");
        let mut script = String::new();
        script.push_str("set datafile separator \",\"\n");
        script.push_str("set datafile commentschars \"#\"\n");
        script.push_str("set key off\n");
        if logscale {
            script.push_str("set logscale xy\n");
        }
        script.push_str(&format!("set title \"{title}\"\n"));
        script.push_str(&format!("set output \"{stem}.png\"\nset terminal pngcairo\n"));
        script.push_str(&format!(
            "plot \"{csv_name}\" every ::1 using {x_col}:{y_col} with linespoints\n"
        ));
        let path = self.dir.join(format!("{stem}.gp"));
        std::fs::write(&path, script)?;
        Ok(path)
    }
}

/// Shortest round-trip float formatting: deterministic and re-parseable.
pub fn fmt(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_carries_hash_and_units() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = Manifest {
            subcommand: "spectrum".into(),
            config: serde_json::json!({"k": 2}),
            package_version: "0.0.0".into(),
            workers: 1,
            elapsed_seconds: 0.0,
        };
        let out = prepare(dir.path(), &manifest).unwrap();
        let path = out
            .write_csv(
                "t.csv",
                &[("x", "dimensionless"), ("y", "dimensionless")],
                &[vec!["1".into(), "2".into()]],
            )
            .unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with(&format!("# manifest: {}\n# units: ", out.hash)));
        assert!(text.ends_with("x,y\n1,2\n"));
        assert_eq!(out.hash.len(), 16);
    }

    #[test]
    fn hash_tracks_config_changes() {
        let base = Manifest {
            subcommand: "spectrum".into(),
            config: serde_json::json!({"k": 2}),
            package_version: "0.0.0".into(),
            workers: 1,
            elapsed_seconds: 0.0,
        };
        let changed = Manifest {
            config: serde_json::json!({"k": 3}),
            subcommand: "spectrum".into(),
            package_version: "0.0.0".into(),
            workers: 4,
            elapsed_seconds: 9.0,
        };
        let same_but_timing = Manifest {
            elapsed_seconds: 123.0,
            workers: 4,
            subcommand: "spectrum".into(),
            config: serde_json::json!({"k": 2}),
            package_version: "0.0.0".into(),
        };
        assert_ne!(manifest_hash(&base), manifest_hash(&changed));
        // timings and worker count are reporting-only: not part of the hash
        assert_eq!(manifest_hash(&base), manifest_hash(&same_but_timing));
    }
}
