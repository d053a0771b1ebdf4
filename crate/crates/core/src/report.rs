//! CSV row helpers shared by the workflows and the FFI layer.

use std::io::Write;

use crate::definetti::ReductionReport;
use crate::error::Result;
use crate::finite_key::KeyLengthReport;

/// Shortest round-trip decimal, switching to exponent form outside
/// [1e-4, 1e15) so tiny epsilons stay readable.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub const KEY_COLUMNS: [&str; 12] = [
    "n", "raw_bits", "h_mle", "holevo_f", "entropy_term", "holevo_term", "leak_ec",
    "delta_aep", "delta_ent", "l", "eps_total", "feasible",
];

pub fn key_fields(r: &KeyLengthReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        fmt_f64(r.raw_bits),
        fmt_f64(r.h_mle),
        fmt_f64(r.holevo_f),
        fmt_f64(r.entropy_term),
        fmt_f64(r.holevo_term),
        fmt_f64(r.leak_ec),
        fmt_f64(r.delta_aep),
        fmt_f64(r.delta_ent),
        fmt_f64(r.l),
        fmt_f64(r.eps_total),
        r.feasible.to_string(),
    ]
}

pub const REDUCTION_COLUMNS: [&str; 13] = [
    "n", "k", "d_a", "d_b", "eta", "photon_cutoff", "t_n_eta", "t_k4_bound", "truncation_eps",
    "eps_collective", "eps_general", "vacuous", "key_reduction",
];

pub fn reduction_fields(r: &ReductionReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.k.to_string(),
        fmt_f64(r.d_a),
        fmt_f64(r.d_b),
        fmt_f64(r.eta),
        r.photon_cutoff.to_string(),
        fmt_f64(r.t_n_eta),
        fmt_f64(r.t_k4_bound),
        fmt_f64(r.truncation_eps),
        fmt_f64(r.eps_collective),
        fmt_f64(r.eps_general),
        r.vacuous.to_string(),
        r.key_reduction.to_string(),
    ]
}

/// Writes a header and rows.
pub fn write_table<W: Write, S: AsRef<str>>(out: W, header: &[S], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header.iter().map(|h| h.as_ref()))?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Single-row CSV for one key-length report.
pub fn key_report_csv(r: &KeyLengthReport) -> Result<String> {
    let mut buf = Vec::new();
    write_table(&mut buf, &KEY_COLUMNS, &[key_fields(r)])?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, 1.5, -2.25, 1e-10, 3.0e20, 123456.789, 4e-10] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1e-10), "1e-10");
        assert_eq!(fmt_f64(0.5), "0.5");
    }
}
