use std::io::{self, Write};

use idca::TraceRecord;

use crate::fmt_number;

/// Header for an `n`-dimensional trace.
pub fn header(n: usize) -> String {
    let mut cols = vec!["k".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend(
        [
            "step_norm",
            "d_norm",
            "f",
            "energy",
            "inclusion_residual",
            "active_set",
        ]
        .map(String::from),
    );
    cols.join(",")
}

/// Writes one row per record (including `k = 0`). Active rows are listed 1-based and separated
/// by spaces; numbers use the shortest round-trip decimal form.
pub fn write_trace<W: Write>(out: &mut W, n: usize, trace: &[TraceRecord]) -> io::Result<()> {
    writeln!(out, "{}", header(n))?;
    for rec in trace {
        write!(out, "{}", rec.k)?;
        for &v in rec.x.iter() {
            write!(out, ",{}", fmt_number(v))?;
        }
        let active: Vec<String> = rec.active.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(
            out,
            ",{},{},{},{},{},{}",
            fmt_number(rec.step_norm),
            fmt_number(rec.d.norm()),
            fmt_number(rec.f_val),
            fmt_number(rec.energy),
            fmt_number(rec.inclusion_residual),
            active.join(" ")
        )?;
    }
    Ok(())
}
