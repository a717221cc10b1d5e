use std::io::{self, Write};

use super::game::{RegretEstimate, RegretTrace};

pub const TRACE_HEADER: &str = "seed,trial,alg_loss_cum,comp_loss_cum,regret,bound";
pub const SWEEP_HEADER: &str = "eta,mean_regret,std_error,bound";

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e12)`.
pub fn fmt_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One row per trial of every trace.
pub fn write_traces<W: Write>(out: &mut W, traces: &[RegretTrace]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for t in traces {
        for r in &t.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t.seed,
                r.trial,
                fmt_g12(r.alg_loss_cum),
                fmt_g12(r.comp_loss_cum),
                fmt_g12(r.regret()),
                fmt_g12(t.bound)
            )?;
        }
    }
    Ok(())
}

/// One summary row per trace (its final trial).
pub fn write_summaries<W: Write>(out: &mut W, traces: &[RegretTrace]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for t in traces {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t.seed,
            t.trials(),
            fmt_g12(t.alg_loss),
            fmt_g12(t.comp_loss),
            fmt_g12(t.regret),
            fmt_g12(t.bound)
        )?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(out: &mut W, estimates: &[RegretEstimate]) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for e in estimates {
        writeln!(out, "{},{},{},{}", fmt_g12(e.eta), fmt_g12(e.mean), fmt_g12(e.std_error), fmt_g12(e.bound))?;
    }
    Ok(())
}
