//! CSV and JSON emission with fixed, documented column sets.
//!
//! Every emitter sorts rows by a deterministic key (bit index, sample count,
//! claim id) before writing, and float formatting uses Rust's shortest
//! round-trip representation, so a re-run with the same master seed produces
//! byte-identical files. Appending never reorders existing rows: `--append`
//! writes new rows after whatever is already there.
//!
//! Column sets:
//!
//! - `records.csv` (simulate-kljn): `bit_index, alice_bit, bob_bit, class,
//!   u_w_mean_square, i_w_mean_square, level, alice_decoded_bob,
//!   bob_decoded_alice, decode_ok, eve_guess_alice, eve_guess_bob,
//!   eve_certain, eve_correct`
//! - `records.csv` (simulate-thermod): `bit_index, tx_bit, rx_bit, rx_margin,
//!   rx_correct, eve_bit, eve_margin, eve_correct`
//! - `summary.csv` (simulate-*): `metric, value`
//! - `attack.csv`: `system, bits_attacked, bits_correct, accuracy,
//!   certain_fraction`
//! - `amplify.csv`: `iteration, key_length, eve_correct_prob, leakage_bits,
//!   cycle_multiplier`
//! - `ber_curve.csv`: `samples_per_bit, ber_analytic, ber_monte_carlo,
//!   trials, variance_ratio`
//! - `power_components.csv`: `name, watts`
//! - `power_energy.csv`: `system, pa_iterations, secure_fraction,
//!   cycle_multiplier, joules_per_final_bit`
//! - `claims.csv`: `claim_id, paper_anchor, measured, expected, tolerance,
//!   comparison, pass`

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::adversary::AttackSummary;
use crate::errstat::BerCurvePoint;
use crate::harness::claims::ClaimResult;
use crate::harness::scenario::{AmplifyRow, PowerReport, ScenarioOutcome, ScenarioRecords};
use crate::SystemKind;

/// Output encoding for emitted files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}', expected csv or json")),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_bit(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn fmt_opt_bit(b: Option<bool>) -> String {
    match b {
        Some(b) => fmt_bit(b),
        None => String::new(),
    }
}

/// Writes one CSV file. With `append` set and a non-empty existing file the
/// header is skipped and rows are added after the existing content.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
    append: bool,
) -> std::io::Result<()> {
    let exists_nonempty = append
        && path
            .metadata()
            .map(|m| m.len() > 0)
            .unwrap_or(false);
    let file = if append {
        OpenOptions::new().create(true).append(true).open(path)?
    } else {
        File::create(path)?
    };
    let mut w = BufWriter::new(file);
    if !exists_nonempty {
        writeln!(w, "{}", header.join(","))?;
    }
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Writes a value as pretty JSON (with a trailing newline).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

/// Emits a scenario outcome into `dir`, returning the written paths.
/// CSV format writes `records.csv` + `summary.csv`; JSON writes a single
/// `outcome.json`.
pub fn emit_outcome(
    outcome: &ScenarioOutcome,
    dir: &Path,
    format: OutputFormat,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Json => {
            let path = dir.join("outcome.json");
            write_json(&path, outcome)?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let records_path = dir.join("records.csv");
            match &outcome.records {
                ScenarioRecords::Kljn(records) => {
                    let header = [
                        "bit_index",
                        "alice_bit",
                        "bob_bit",
                        "class",
                        "u_w_mean_square",
                        "i_w_mean_square",
                        "level",
                        "alice_decoded_bob",
                        "bob_decoded_alice",
                        "decode_ok",
                        "eve_guess_alice",
                        "eve_guess_bob",
                        "eve_certain",
                        "eve_correct",
                    ];
                    let rows: Vec<Vec<String>> = records
                        .iter()
                        .map(|r| {
                            vec![
                                r.index.to_string(),
                                fmt_bit(r.alice_bit),
                                fmt_bit(r.bob_bit),
                                format!("{:?}", r.class),
                                fmt_f64(r.u_w_mean_square),
                                fmt_f64(r.i_w_mean_square),
                                format!("{:?}", r.level),
                                fmt_opt_bit(r.alice_decoded_bob),
                                fmt_opt_bit(r.bob_decoded_alice),
                                fmt_bit(r.decode_ok),
                                fmt_bit(r.eve_guess_alice),
                                fmt_bit(r.eve_guess_bob),
                                fmt_bit(r.eve_certain),
                                fmt_bit(r.eve_correct),
                            ]
                        })
                        .collect();
                    write_csv(&records_path, &header, &rows, false)?;
                }
                ScenarioRecords::Thermod(records) => {
                    let header = [
                        "bit_index",
                        "tx_bit",
                        "rx_bit",
                        "rx_margin",
                        "rx_correct",
                        "eve_bit",
                        "eve_margin",
                        "eve_correct",
                    ];
                    let rows: Vec<Vec<String>> = records
                        .iter()
                        .map(|r| {
                            vec![
                                r.index.to_string(),
                                fmt_bit(r.tx_bit),
                                fmt_bit(r.rx_bit),
                                fmt_f64(r.rx_margin),
                                fmt_bit(r.rx_correct),
                                fmt_bit(r.eve_bit),
                                fmt_f64(r.eve_margin),
                                fmt_bit(r.eve_correct),
                            ]
                        })
                        .collect();
                    write_csv(&records_path, &header, &rows, false)?;
                }
            }
            let summary_path = dir.join("summary.csv");
            write_csv(&summary_path, &["metric", "value"], &summary_rows(outcome), false)?;
            Ok(vec![records_path, summary_path])
        }
    }
}

fn summary_rows(outcome: &ScenarioOutcome) -> Vec<Vec<String>> {
    let mut rows = vec![
        vec!["system".into(), outcome.system.to_string()],
        vec!["master_seed".into(), outcome.master_seed.to_string()],
        vec!["n_bits".into(), outcome.n_bits.to_string()],
        vec!["legit_errors".into(), outcome.legit_errors.to_string()],
        vec!["legit_error_rate".into(), fmt_f64(outcome.legit_error_rate)],
        vec!["eve_accuracy".into(), fmt_f64(outcome.attack.accuracy)],
        vec![
            "eve_certain_fraction".into(),
            fmt_f64(outcome.attack.certain_fraction),
        ],
        vec![
            "eve_key_bit_accuracy".into(),
            fmt_f64(outcome.eve_key_bit_accuracy),
        ],
    ];
    if let Some(counts) = &outcome.class_counts {
        rows.push(vec!["level_low_low".into(), counts.low_low.to_string()]);
        rows.push(vec!["level_mixed".into(), counts.mixed.to_string()]);
        rows.push(vec!["level_high_high".into(), counts.high_high.to_string()]);
    }
    rows.extend([
        vec!["pa_iterations".into(), outcome.pa.iterations.to_string()],
        vec!["pa_input_bits".into(), outcome.pa.input_bits.to_string()],
        vec!["pa_output_bits".into(), outcome.pa.output_bits.to_string()],
        vec!["pa_input_eve_prob".into(), fmt_f64(outcome.pa.input_eve_prob)],
        vec!["pa_output_eve_prob".into(), fmt_f64(outcome.pa.output_eve_prob)],
        vec![
            "pa_output_leakage_bits".into(),
            fmt_f64(outcome.pa.output_leakage_bits),
        ],
        vec![
            "pa_cycle_multiplier".into(),
            fmt_f64(outcome.pa.pa_cycle_multiplier),
        ],
        vec!["retained_fraction".into(), fmt_f64(outcome.pa.retained_fraction)],
        vec![
            "raw_cost_per_final_bit".into(),
            fmt_f64(outcome.pa.raw_cost_per_final_bit),
        ],
        vec!["p_kljn_watts".into(), fmt_f64(outcome.power.p_kljn_watts)],
        vec!["p_thermod_watts".into(), fmt_f64(outcome.power.p_thermod_watts)],
    ]);
    rows
}

/// Emits an attack summary as `attack.csv` or `attack.json`.
pub fn emit_attack(
    summary: &AttackSummary,
    system: SystemKind,
    dir: &Path,
    format: OutputFormat,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct AttackFile<'a> {
                system: SystemKind,
                #[serde(flatten)]
                summary: &'a AttackSummary,
            }
            let path = dir.join("attack.json");
            write_json(&path, &AttackFile { system, summary })?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let path = dir.join("attack.csv");
            write_csv(
                &path,
                &["system", "bits_attacked", "bits_correct", "accuracy", "certain_fraction"],
                &[vec![
                    system.to_string(),
                    summary.bits_attacked.to_string(),
                    summary.bits_correct.to_string(),
                    fmt_f64(summary.accuracy),
                    fmt_f64(summary.certain_fraction),
                ]],
                false,
            )?;
            Ok(vec![path])
        }
    }
}

/// Emits an amplification table as `amplify.csv` or `amplify.json`.
pub fn emit_amplify(
    rows: &[AmplifyRow],
    dir: &Path,
    format: OutputFormat,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Json => {
            let path = dir.join("amplify.json");
            write_json(&path, &rows)?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let path = dir.join("amplify.csv");
            write_csv(
                &path,
                &["iteration", "key_length", "eve_correct_prob", "leakage_bits", "cycle_multiplier"],
                &rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.iteration.to_string(),
                            r.key_length.to_string(),
                            fmt_f64(r.eve_correct_prob),
                            fmt_f64(r.leakage_bits),
                            fmt_f64(r.cycle_multiplier),
                        ]
                    })
                    .collect::<Vec<_>>(),
                false,
            )?;
            Ok(vec![path])
        }
    }
}

/// One emitted BER-curve row: a curve point plus the variance contrast it was
/// computed at.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BerCurveRow {
    #[serde(flatten)]
    pub point: BerCurvePoint,
    pub variance_ratio: f64,
}

/// Emits a BER curve as `ber_curve.csv` (optionally appending) or
/// `ber_curve.json`. Rows are sorted by sample count before writing.
pub fn emit_ber_curve(
    rows: &[BerCurveRow],
    dir: &Path,
    format: OutputFormat,
    append: bool,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| r.point.samples_per_bit);
    match format {
        OutputFormat::Json => {
            let path = dir.join("ber_curve.json");
            write_json(&path, &rows)?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let path = dir.join("ber_curve.csv");
            write_csv(
                &path,
                &["samples_per_bit", "ber_analytic", "ber_monte_carlo", "trials", "variance_ratio"],
                &rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.point.samples_per_bit.to_string(),
                            fmt_f64(r.point.ber_analytic),
                            r.point.ber_monte_carlo.map(fmt_f64).unwrap_or_default(),
                            r.point.trials.to_string(),
                            fmt_f64(r.variance_ratio),
                        ]
                    })
                    .collect::<Vec<_>>(),
                append,
            )?;
            Ok(vec![path])
        }
    }
}

/// Emits a power report as `power_components.csv` + `power_energy.csv`, or
/// `power.json`.
pub fn emit_power(
    report: &PowerReport,
    components: &[crate::power::ComponentPower],
    dir: &Path,
    format: OutputFormat,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Json => {
            let path = dir.join("power.json");
            write_json(&path, report)?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let comp_path = dir.join("power_components.csv");
            let mut rows: Vec<Vec<String>> = components
                .iter()
                .map(|c| vec![c.name.clone(), fmt_f64(c.watts)])
                .collect();
            rows.push(vec!["p_kljn_total".into(), fmt_f64(report.p_kljn_watts)]);
            rows.push(vec!["p_thermod_total".into(), fmt_f64(report.p_thermod_watts)]);
            write_csv(&comp_path, &["name", "watts"], &rows, false)?;

            let energy_path = dir.join("power_energy.csv");
            write_csv(
                &energy_path,
                &["system", "pa_iterations", "secure_fraction", "cycle_multiplier", "joules_per_final_bit"],
                &report
                    .energy
                    .iter()
                    .map(|e| {
                        vec![
                            e.system.to_string(),
                            e.pa_iterations.to_string(),
                            fmt_f64(e.secure_fraction),
                            fmt_f64(e.cycle_multiplier),
                            fmt_f64(e.joules),
                        ]
                    })
                    .collect::<Vec<_>>(),
                false,
            )?;
            Ok(vec![comp_path, energy_path])
        }
    }
}

/// Emits claim results as `claims.csv` or `claims.json`, sorted by claim id.
pub fn emit_claims(
    claims: &[ClaimResult],
    dir: &Path,
    format: OutputFormat,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut claims = claims.to_vec();
    claims.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
    match format {
        OutputFormat::Json => {
            let path = dir.join("claims.json");
            write_json(&path, &claims)?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let path = dir.join("claims.csv");
            write_csv(
                &path,
                &["claim_id", "paper_anchor", "measured", "expected", "tolerance", "comparison", "pass"],
                &claims
                    .iter()
                    .map(|c| {
                        vec![
                            c.claim_id.clone(),
                            c.paper_anchor.clone(),
                            fmt_f64(c.measured),
                            fmt_f64(c.expected),
                            fmt_f64(c.tolerance),
                            c.comparison.to_string(),
                            fmt_bit(c.pass),
                        ]
                    })
                    .collect::<Vec<_>>(),
                false,
            )?;
            Ok(vec![path])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_preserves_existing_rows_and_skips_header() {
        let dir = std::env::temp_dir().join(format!("noisekex-report-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("curve.csv");
        write_csv(&path, &["a", "b"], &[vec!["1".into(), "2".into()]], false).unwrap();
        write_csv(&path, &["a", "b"], &[vec!["3".into(), "4".into()]], true).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n3,4\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn float_formatting_round_trips() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1.6567788e-13), "0.00000000000016567788");
        let v: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }
}
