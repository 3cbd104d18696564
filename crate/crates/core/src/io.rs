//! Artifact persistence: snapshots, monitor and sweep tables, manifests.
//!
//! Formats are frozen for downstream plotting. CSV column orders come from
//! the header registries ([`MONITOR_COLUMNS`](crate::invariants::MONITOR_COLUMNS),
//! [`SWEEP_COLUMNS`](crate::sweep::SWEEP_COLUMNS), [`SNAPSHOT_FIELDS`]) and
//! only ever grow by appending; floats are written with 17 significant
//! digits, enough to reproduce every double exactly on re-read, so repeated
//! runs of one configuration produce byte-identical tables. Snapshots are
//! either a one-line JSON header followed by flat little-endian doubles
//! (bit-exact round trip) or plain CSV, chosen in the configuration.
//!
//! Each writer owns its file for the duration of the write; concurrent
//! producers (the sweep's worker pool) funnel through a single table writer.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::FieldSnapshot;
use crate::invariants::{MonitorRecord, MONITOR_COLUMNS};
use crate::sweep::{SweepTable, SWEEP_COLUMNS};

/// Environment variable naming the root under which relative output
/// directories are created.
pub const OUTPUT_ROOT_ENV: &str = "SWMHD_OUTPUT_ROOT";

/// Snapshot payloads in on-disk order. The envelope is stored as two real
/// columns; everything else is a real nodal field on the shared grid.
pub const SNAPSHOT_FIELDS: [&str; 11] = [
    "y", "v", "rho", "u", "w0", "w1", "h0", "h1", "theta", "psi_re", "psi_im",
];

const SNAPSHOT_FORMAT_NAME: &str = "field-snapshot";
const SNAPSHOT_VERSION: u32 = 1;
const SNAPSHOT_ENCODING: &str = "f64-le";

/// Resolve the artifact directory: relative paths land under the
/// [`OUTPUT_ROOT_ENV`] root when that variable is set, otherwise under the
/// working directory; absolute paths are used as given.
pub fn resolve_output_dir(configured: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if configured.is_relative() => PathBuf::from(root).join(configured),
        _ => configured.to_path_buf(),
    }
}

/// Fixed 17-significant-digit scientific form; parsing the text recovers
/// the identical bit pattern for every finite double, signed zeros and
/// subnormals included.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quote a CSV field when it holds a separator, quote, or line break;
/// inner quotes are doubled.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Hex SHA-256 of a byte string; manifests use it to fingerprint the
/// configuration document.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Self-describing first line of a binary snapshot file. The time is
/// carried twice: a display copy (JSON numbers cannot express non-finite
/// doubles) and the authoritative bit pattern.
#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    format: String,
    version: u32,
    t: Option<f64>,
    t_bits: u64,
    points: usize,
    fields: Vec<String>,
    encoding: String,
}

fn snapshot_columns(s: &FieldSnapshot) -> Vec<Vec<f64>> {
    vec![
        s.y.clone(),
        s.v.clone(),
        s.rho.clone(),
        s.u.clone(),
        s.w[0].clone(),
        s.w[1].clone(),
        s.h[0].clone(),
        s.h[1].clone(),
        s.theta.clone(),
        s.psi.iter().map(|c| c.re).collect(),
        s.psi.iter().map(|c| c.im).collect(),
    ]
}

fn check_snapshot_shape(cols: &[Vec<f64>]) -> Result<usize> {
    let points = cols[0].len();
    for (name, col) in SNAPSHOT_FIELDS.iter().zip(cols) {
        if col.len() != points {
            return Err(Error::Shape {
                what: match *name {
                    "v" => "snapshot field v",
                    "rho" => "snapshot field rho",
                    "u" => "snapshot field u",
                    "w0" => "snapshot field w0",
                    "w1" => "snapshot field w1",
                    "h0" => "snapshot field h0",
                    "h1" => "snapshot field h1",
                    "theta" => "snapshot field theta",
                    "psi_re" => "snapshot field psi_re",
                    "psi_im" => "snapshot field psi_im",
                    _ => "snapshot field y",
                },
                expected: points,
                got: col.len(),
            });
        }
    }
    Ok(points)
}

/// Write a snapshot as a one-line JSON header plus flat little-endian f64
/// payloads, one block per entry of [`SNAPSHOT_FIELDS`]. Reading the file
/// back reproduces the snapshot bit for bit.
pub fn write_snapshot_binary(path: &Path, snap: &FieldSnapshot) -> Result<()> {
    let cols = snapshot_columns(snap);
    let points = check_snapshot_shape(&cols)?;
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT_NAME.into(),
        version: SNAPSHOT_VERSION,
        t: Some(snap.t),
        t_bits: snap.t.to_bits(),
        points,
        fields: SNAPSHOT_FIELDS.iter().map(|s| s.to_string()).collect(),
        encoding: SNAPSHOT_ENCODING.into(),
    };
    let mut bytes = serde_json::to_string(&header)
        .map_err(|e| Error::Format(format!("snapshot header serialization: {e}")))?
        .into_bytes();
    bytes.push(b'\n');
    bytes.reserve(cols.len() * points * 8);
    for col in &cols {
        for &x in col {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    write_bytes(path, &bytes)
}

/// Write a snapshot as plain CSV: a `t` column followed by the
/// [`SNAPSHOT_FIELDS`] columns, one grid point per row, floats at 17
/// significant digits (also an exact round trip).
pub fn write_snapshot_csv(path: &Path, snap: &FieldSnapshot) -> Result<()> {
    let cols = snapshot_columns(snap);
    let points = check_snapshot_shape(&cols)?;
    let mut text = String::from("t,");
    text.push_str(&SNAPSHOT_FIELDS.join(","));
    text.push('\n');
    let t_cell = format_float(snap.t);
    for i in 0..points {
        text.push_str(&t_cell);
        for col in &cols {
            text.push(',');
            text.push_str(&format_float(col[i]));
        }
        text.push('\n');
    }
    write_bytes(path, text.as_bytes())
}

fn assemble_snapshot(t: f64, cols: Vec<Vec<f64>>) -> FieldSnapshot {
    let mut it = cols.into_iter();
    let y = it.next().unwrap_or_default();
    let v = it.next().unwrap_or_default();
    let rho = it.next().unwrap_or_default();
    let u = it.next().unwrap_or_default();
    let w0 = it.next().unwrap_or_default();
    let w1 = it.next().unwrap_or_default();
    let h0 = it.next().unwrap_or_default();
    let h1 = it.next().unwrap_or_default();
    let theta = it.next().unwrap_or_default();
    let re = it.next().unwrap_or_default();
    let im = it.next().unwrap_or_default();
    let psi = re
        .iter()
        .zip(&im)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    FieldSnapshot { t, y, v, rho, u, w: [w0, w1], h: [h0, h1], theta, psi }
}

/// Read a snapshot written in either format, detected by content: binary
/// files open with a JSON header line, CSV files with the column header.
pub fn read_snapshot(path: &Path) -> Result<FieldSnapshot> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.first() == Some(&b'{') {
        read_snapshot_binary(path, &bytes)
    } else {
        read_snapshot_csv(path, &bytes)
    }
}

fn read_snapshot_binary(path: &Path, bytes: &[u8]) -> Result<FieldSnapshot> {
    let bad = |what: &str| Error::Format(format!("{}: {what}", path.display()));
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line"))?;
    let header: SnapshotHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| bad(&format!("unreadable header: {e}")))?;
    if header.format != SNAPSHOT_FORMAT_NAME || header.version != SNAPSHOT_VERSION {
        return Err(bad(&format!(
            "unsupported format {} version {}",
            header.format, header.version
        )));
    }
    if header.encoding != SNAPSHOT_ENCODING {
        return Err(bad(&format!("unsupported encoding {}", header.encoding)));
    }
    if header.fields != SNAPSHOT_FIELDS {
        return Err(bad("field list does not match the snapshot registry"));
    }
    let payload = &bytes[newline + 1..];
    let expected = SNAPSHOT_FIELDS.len() * header.points * 8;
    if payload.len() != expected {
        return Err(bad(&format!(
            "payload holds {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let cols: Vec<Vec<f64>> = (0..SNAPSHOT_FIELDS.len())
        .map(|f| {
            let start = f * header.points * 8;
            (0..header.points)
                .map(|i| {
                    let o = start + i * 8;
                    f64::from_le_bytes(payload[o..o + 8].try_into().expect("8-byte chunk"))
                })
                .collect()
        })
        .collect();
    Ok(assemble_snapshot(f64::from_bits(header.t_bits), cols))
}

fn read_snapshot_csv(path: &Path, bytes: &[u8]) -> Result<FieldSnapshot> {
    let bad = |what: String| Error::Format(format!("{}: {what}", path.display()));
    let text = std::str::from_utf8(bytes).map_err(|_| bad("not UTF-8".into()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let mut expected = String::from("t,");
    expected.push_str(&SNAPSHOT_FIELDS.join(","));
    if header != expected {
        return Err(bad(format!("header \"{header}\" does not match \"{expected}\"")));
    }
    let mut t = None;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); SNAPSHOT_FIELDS.len()];
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != SNAPSHOT_FIELDS.len() + 1 {
            return Err(bad(format!(
                "row {} holds {} cells, expected {}",
                lineno + 2,
                cells.len(),
                SNAPSHOT_FIELDS.len() + 1
            )));
        }
        let mut parsed = cells.iter().map(|c| {
            c.parse::<f64>()
                .map_err(|e| bad(format!("row {}: {c:?}: {e}", lineno + 2)))
        });
        let row_t = parsed.next().expect("t cell")?;
        t.get_or_insert(row_t);
        for col in cols.iter_mut() {
            col.push(parsed.next().expect("field cell")?);
        }
    }
    let t = t.ok_or_else(|| bad("snapshot holds no rows".into()))?;
    Ok(assemble_snapshot(t, cols))
}

/// Write the monitor stream as CSV in
/// [`MONITOR_COLUMNS`](crate::invariants::MONITOR_COLUMNS) order. An empty
/// stream leaves a header-only file.
pub fn write_monitors(path: &Path, records: &[MonitorRecord]) -> Result<()> {
    let mut text = MONITOR_COLUMNS.join(",");
    text.push('\n');
    for r in records {
        let cells: Vec<String> = r.to_row().iter().map(|&x| format_float(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    write_bytes(path, text.as_bytes())
}

/// Write a sweep table as CSV in [`SWEEP_COLUMNS`](crate::sweep::SWEEP_COLUMNS)
/// order: the numeric distance and monitor columns at 17 significant digits,
/// the status text last. Wall-clock times stay out of the table (they belong
/// to the manifest) so identical configurations yield identical bytes.
pub fn write_sweep(path: &Path, table: &SweepTable) -> Result<()> {
    let mut text = SWEEP_COLUMNS.join(",");
    text.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = SWEEP_COLUMNS
            .iter()
            .map(|col| match row.value(col) {
                Some(x) => format_float(x),
                None => csv_field(&row.status),
            })
            .collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    write_bytes(path, text.as_bytes())
}

/// Provenance record of one artifact directory. Everything here except
/// `wall_seconds` is a pure function of the configuration and the build.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    /// Subcommand that produced the directory.
    pub command: String,
    /// Hex SHA-256 of the configuration document text.
    pub config_sha256: String,
    /// Version of the producing package.
    pub package_version: String,
    /// Files written, in creation order, relative to the directory.
    pub outputs: Vec<String>,
    /// Wall-clock duration of the command; the one nondeterministic entry.
    pub wall_seconds: f64,
    /// Command-specific bookkeeping (step counts, statuses, scales).
    pub details: serde_json::Value,
}

/// Write the manifest as pretty-printed JSON with a trailing newline.
pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Format(format!("manifest serialization: {e}")))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{RungSettings, SweepRow};
    use proptest::prelude::*;

    fn sample_snapshot(points: usize) -> FieldSnapshot {
        let grid: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
        let f = |k: f64| -> Vec<f64> {
            grid.iter().map(|&y| (k * y + 0.1 * k).sin() * (1.0 + k)).collect()
        };
        FieldSnapshot {
            t: 0.375,
            y: grid.clone(),
            v: f(1.0),
            rho: f(2.0),
            u: f(3.0),
            w: [f(4.0), f(5.0)],
            h: [f(6.0), f(7.0)],
            theta: f(8.0),
            psi: f(9.0)
                .iter()
                .zip(f(10.0))
                .map(|(&a, b)| Complex64::new(a, b))
                .collect(),
        }
    }

    fn bits_equal(a: &FieldSnapshot, b: &FieldSnapshot) -> bool {
        let vecs = |s: &FieldSnapshot| snapshot_columns(s);
        a.t.to_bits() == b.t.to_bits()
            && vecs(a)
                .iter()
                .zip(vecs(b))
                .all(|(x, y)| x.iter().zip(&y).all(|(p, q)| p.to_bits() == q.to_bits()))
    }

    #[test]
    fn float_formatting_recovers_every_bit() {
        for &x in &[
            0.0,
            -0.0,
            1.0,
            -1.0,
            std::f64::consts::PI,
            1e-308,
            5e-324,
            f64::MAX,
            f64::MIN_POSITIVE,
            -2.2250738585072014e-308,
            0.1,
            1.0 / 3.0,
        ] {
            let text = format_float(x);
            let back: f64 = text.parse().expect("parseable");
            assert_eq!(back.to_bits(), x.to_bits(), "{text}");
        }
    }

    #[test]
    fn csv_fields_are_quoted_only_when_needed() {
        assert_eq!(csv_field("ok"), "ok");
        assert_eq!(csv_field("stopped, then failed"), "\"stopped, then failed\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("two\nlines"), "\"two\nlines\"");
    }

    #[test]
    fn binary_snapshot_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("snap.bin");
        let snap = sample_snapshot(17);
        write_snapshot_binary(&path, &snap).expect("write");
        let back = read_snapshot(&path).expect("read");
        assert!(bits_equal(&snap, &back));
    }

    #[test]
    fn csv_snapshot_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("snap.csv");
        let snap = sample_snapshot(9);
        write_snapshot_csv(&path, &snap).expect("write");
        let back = read_snapshot(&path).expect("read");
        assert!(bits_equal(&snap, &back));
    }

    #[test]
    fn corrupt_snapshots_are_reported_as_malformed() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("snap.bin");
        let snap = sample_snapshot(5);
        write_snapshot_binary(&path, &snap).expect("write");
        let mut bytes = std::fs::read(&path).expect("read bytes");
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, &bytes).expect("rewrite");
        match read_snapshot(&path) {
            Err(Error::Format(msg)) => assert!(msg.contains("bytes"), "{msg}"),
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn empty_monitor_stream_writes_a_header_only_table() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("monitors.csv");
        write_monitors(&path, &[]).expect("write");
        let text = std::fs::read_to_string(&path).expect("read");
        let mut expected = MONITOR_COLUMNS.join(",");
        expected.push('\n');
        assert_eq!(text, expected);
    }

    fn sample_row(eps: f64, status: &str) -> SweepRow {
        SweepRow {
            eps,
            alpha: eps.powf(0.75),
            beta: eps.powf(1.5),
            delta: eps.powf(1.5),
            l1_fluid: 2.0 * eps,
            w_weak: 1e-4,
            sup_beta_h: eps * eps,
            beta_sqrt_h_l2: eps,
            psi_l4: 0.5 * eps,
            unif: [1.0, 2.0, 3.0, 4.0, 5.0],
            thermal_residual: -1e-5,
            thermal_scale: 3.0,
            energy_ratio: 1.0,
            wall_seconds: 0.25,
            status: status.to_string(),
        }
    }

    #[test]
    fn sweep_tables_carry_one_line_per_rung_plus_the_header() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("sweep.csv");
        let table = SweepTable {
            rows: vec![
                sample_row(0.1, "ok"),
                sample_row(0.05, "ok"),
                sample_row(0.025, "stopped after 3 steps: positivity failure"),
            ],
            comparison_times: vec![0.0, 0.25],
            reference_euler_steps: 10,
            reference_nls_steps: 5,
        };
        write_sweep(&path, &table).expect("write");
        let text = std::fs::read_to_string(&path).expect("read");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], SWEEP_COLUMNS.join(","));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), SWEEP_COLUMNS.len());
        }
        assert!(lines[3].ends_with("stopped after 3 steps: positivity failure"));
    }

    #[test]
    fn sweep_statuses_with_separators_are_quoted() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("sweep.csv");
        let table = SweepTable {
            rows: vec![sample_row(0.1, "diverged, then gave up")],
            comparison_times: vec![0.0],
            reference_euler_steps: 0,
            reference_nls_steps: 0,
        };
        write_sweep(&path, &table).expect("write");
        let text = std::fs::read_to_string(&path).expect("read");
        assert!(text.contains("\"diverged, then gave up\""));
    }

    #[test]
    fn manifests_serialize_with_stable_key_order() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("manifest.json");
        let manifest = Manifest {
            command: "sweep".into(),
            config_sha256: sha256_hex(b"x"),
            package_version: "0.1.0".into(),
            outputs: vec!["sweep.csv".into()],
            wall_seconds: 1.5,
            details: serde_json::json!({ "rungs": 4 }),
        };
        write_manifest(&path, &manifest).expect("write");
        let text = std::fs::read_to_string(&path).expect("read");
        let cmd = text.find("\"command\"").expect("command key");
        let sha = text.find("\"config_sha256\"").expect("sha key");
        let wall = text.find("\"wall_seconds\"").expect("wall key");
        assert!(cmd < sha && sha < wall);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn sha256_matches_a_known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    proptest! {
        /// Every double, including signed zeros, subnormals, and arbitrary
        /// NaN payloads, survives the binary snapshot encoding bit for bit.
        #[test]
        fn binary_payloads_preserve_arbitrary_bit_patterns(bits in proptest::collection::vec(any::<u64>(), 1..20)) {
            let vals: Vec<f64> = bits.iter().map(|&b| f64::from_bits(b)).collect();
            let n = vals.len();
            let snap = FieldSnapshot {
                t: vals[0],
                y: vals.clone(),
                v: vals.clone(),
                rho: vals.clone(),
                u: vals.clone(),
                w: [vals.clone(), vals.clone()],
                h: [vals.clone(), vals.clone()],
                theta: vals.clone(),
                psi: vals.iter().map(|&x| Complex64::new(x, -x)).collect(),
            };
            let dir = tempfile::tempdir().expect("tempdir");
            let path = dir.path().join("snap.bin");
            write_snapshot_binary(&path, &snap).expect("write");
            let back = read_snapshot(&path).expect("read");
            prop_assert_eq!(back.y.len(), n);
            for (a, b) in snapshot_columns(&snap).iter().zip(snapshot_columns(&back)) {
                for (p, q) in a.iter().zip(&b) {
                    prop_assert_eq!(p.to_bits(), q.to_bits());
                }
            }
        }

        /// 17-significant-digit text recovers every finite double exactly.
        #[test]
        fn float_text_round_trips_finite_doubles(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_float(x).parse().expect("parseable");
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
