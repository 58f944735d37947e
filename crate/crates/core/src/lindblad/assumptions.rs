use std::f64::consts::PI;

use serde_json::json;

use crate::error::Result;
use crate::linalg;
use crate::operator_core::{PumpOperator, Superoperator};
use crate::report::{Record, Report, Verdict};
use crate::reservoir::{admissible_strip_width, check_strip_analyticity, ReservoirSpec};

use super::commutant::{commutant_dimension, commutant_dimension_blockwise, is_adjoint_closed};
use super::LindbladData;

/// Tunable constants of the assumption checks.
#[derive(Clone, Debug)]
pub struct AssumptionOptions {
    /// Constant `C` in `|eta| <= C lambda^2`.
    pub pump_constant: f64,
    /// Required gap of the averaged generator, in units of `lambda^2`.
    pub gap_floor: f64,
    /// Strip half-width; defaults to `min(1/2, pi / (2 beta))`.
    pub strip_half_width: Option<f64>,
    pub strip_lines: usize,
    pub overflow_ceiling: f64,
    pub seed: u64,
}

impl Default for AssumptionOptions {
    fn default() -> Self {
        Self { pump_constant: 1.0, gap_floor: 1e-3, strip_half_width: None, strip_lines: 8, overflow_ceiling: 1e100, seed: 0 }
    }
}

fn analyticity_record(res: Option<&ReservoirSpec>, opts: &AssumptionOptions) -> Result<Record> {
    let Some(res) = res else {
        return Ok(Record::new(
            "strip_analyticity",
            Verdict::Attested,
            json!({}),
            "jump operators supplied directly; no form factors to check",
        ));
    };
    let r = opts.strip_half_width.unwrap_or((PI / (2.0 * res.beta)).min(0.5));
    let mut per_ff = Vec::new();
    let mut ok = true;
    for ff in &res.form_factors {
        let rep = check_strip_analyticity(ff, res.beta, r, opts.strip_lines, opts.overflow_ceiling)?;
        let width = if rep.finite { admissible_strip_width(ff, res.beta, opts.overflow_ceiling, 9)? } else { 0.0 };
        ok &= rep.finite;
        per_ff.push(json!({
            "finite": rep.finite,
            "max_line_integral": rep.max_value,
            "argmax_y": rep.argmax_y,
            "cutoff_delta": rep.cutoff_delta,
            "largest_admissible_half_width": width,
            "reason": rep.reason,
        }));
    }
    Ok(Record::new(
        "strip_analyticity",
        if ok { Verdict::Pass } else { Verdict::Fail },
        json!({ "half_width": r, "form_factors": per_ff }),
        "supremum over sampled horizontal lines; the reported width is the largest sampled one below the overflow ceiling",
    ))
}

/// Checks every standing assumption and returns one record per assumption.
pub fn check_assumptions(
    data: &LindbladData,
    res: Option<&ReservoirSpec>,
    pump: &PumpOperator,
    lambda: f64,
    eta: f64,
    opts: &AssumptionOptions,
) -> Result<Report> {
    let mut report = Report::new("assumptions");
    report.push(analyticity_record(res, opts)?);

    report.push(if data.gks_jumps.is_some() {
        Record::new(
            "odd_coupling",
            Verdict::Attested,
            json!({ "coupling": "gks" }),
            "the projected interaction must vanish between reservoir-vacuum projections; not checkable for direct jump input",
        )
    } else {
        Record::new(
            "odd_coupling",
            Verdict::Pass,
            json!({ "coupling": "linear", "field_degree": 1 }),
            "linear field couplings are odd, so the condition holds by construction",
        )
    });

    let l2 = lambda * lambda;
    let ratio = if eta == 0.0 { 0.0 } else { eta.abs() / l2 };
    report.push(Record::new(
        "moderate_pump",
        if ratio <= opts.pump_constant { Verdict::Pass } else { Verdict::Fail },
        json!({ "eta_over_lambda_squared": ratio, "constant": opts.pump_constant }),
        "",
    ));

    let avg = &pump.lindbladian.scaled(linalg::r(eta / 2.0)) + &data.l_r.scaled(linalg::r(l2));
    report.push(gap_record(&avg, l2, opts.gap_floor)?);

    let set = data.irreducibility_set();
    let dim = if set.is_empty() { atom_dim_sq(&avg) } else { commutant_dimension(&set)? };
    let closed = set.is_empty() || is_adjoint_closed(&set);
    let dim2 = if set.is_empty() { dim } else { commutant_dimension_blockwise(&set, opts.seed)? };
    report.push(Record::new(
        "irreducibility",
        if dim == 1 { Verdict::Pass } else { Verdict::Fail },
        json!({
            "jump_count": set.len(),
            "commutant_dimension": dim,
            "commutant_dimension_blockwise": dim2,
            "adjoint_closed": closed,
        }),
        if closed { "" } else { "jump set is not closed under adjoints; the blockwise count refers to the generated *-algebra" },
    ));
    Ok(report)
}

fn atom_dim_sq(l: &Superoperator) -> usize {
    l.dim() * l.dim()
}

fn gap_record(avg: &Superoperator, l2: f64, gap_floor: f64) -> Result<Record> {
    let w = avg.eigenvalues()?;
    let tol = 1e-8 * avg.norm().max(f64::MIN_POSITIVE);
    let zeros = w.iter().filter(|z| z.norm() <= tol).count();
    let max_re = w.iter().filter(|z| z.norm() > tol).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let gap = if max_re.is_finite() { -max_re } else { f64::INFINITY };
    let pass = zeros == 1 && l2 > 0.0 && gap >= l2 * gap_floor;
    Ok(Record::new(
        "spectral_gap",
        if pass { Verdict::Pass } else { Verdict::Fail },
        json!({
            "zero_multiplicity": zeros,
            "gap": if gap.is_finite() { Some(gap) } else { None },
            "gap_over_lambda_squared": if l2 > 0.0 && gap.is_finite() { Some(gap / l2) } else { None },
            "gap_floor": gap_floor,
        }),
        "spectrum of the averaged generator (eta/2) L_p + lambda^2 L_R",
    ))
}
