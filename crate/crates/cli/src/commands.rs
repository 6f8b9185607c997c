use serde::Serialize;
use specflow_core::descriptor::spectrum_csv;
use specflow_core::{
    delta_distance, gap_distance, norm_distance, riesz_distance, sfl_crossings, sfl_morse_oracle, sfl_partition,
    sfl_tracking, to_json_string, CrossingOptions, MatrixLiteral, PathDescriptor, SflOptions, SflResult,
    SpecFlowError,
};

use crate::{
    file_or_inline, input_error, path_descriptor, CliError, GapArgs, MethodArg, OutputFormat, Report, SflArgs,
    SpectrumArgs, EXIT_DISAGREEMENT, EXIT_OK,
};

#[derive(Serialize)]
struct Skipped {
    method: &'static str,
    reason: String,
}

#[derive(Serialize)]
struct SflReport<'a> {
    command: &'static str,
    descriptor: &'a PathDescriptor,
    results: &'a [SflResult],
    skipped: Vec<Skipped>,
    value: Option<i64>,
    agreement: bool,
}

fn options(a: &SflArgs) -> Result<(SflOptions, CrossingOptions), CliError> {
    if a.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    for (name, v) in [("--eps0", a.eps0), ("--kernel-tol", a.kernel_tol), ("--continuity-budget", a.continuity_budget)] {
        if v.is_some_and(|v| !(v.is_finite() && v > 0.0)) {
            return Err(CliError::Usage(format!("{name} must be positive")));
        }
    }
    let mut s = SflOptions { samples: a.samples, seed: a.seed, ..SflOptions::default() };
    let mut c = CrossingOptions { samples: a.samples.max(CrossingOptions::default().samples), ..CrossingOptions::default() };
    if let Some(e) = a.eps0 {
        s.eps0 = e;
        c.eps0 = e;
    }
    if let Some(k) = a.kernel_tol {
        c.kernel_tol = k;
    }
    if let Some(b) = a.continuity_budget {
        s.continuity_budget = b;
    }
    if let Some(d) = a.max_depth {
        s.max_depth = d;
    }
    Ok((s, c))
}

/// Errors that make a single method inapplicable rather than the run invalid.
fn skippable(method: MethodArg, e: &SpecFlowError) -> bool {
    match method {
        MethodArg::Morse => matches!(e, SpecFlowError::DegenerateEndpoint { .. }),
        MethodArg::Crossing => matches!(
            e,
            SpecFlowError::IrregularCrossing { .. }
                | SpecFlowError::CrossingCluster { .. }
                | SpecFlowError::DerivativeUnavailable { .. }
        ),
        _ => false,
    }
}

pub(crate) fn sfl(a: &SflArgs) -> Result<Report, CliError> {
    let (sopts, copts) = options(a)?;
    let descriptor = path_descriptor(&a.path)?;
    let path = descriptor.to_path().map_err(input_error)?;

    let methods: Vec<MethodArg> = match a.method {
        MethodArg::All => vec![MethodArg::Partition, MethodArg::Tracking, MethodArg::Crossing, MethodArg::Morse],
        m => vec![m],
    };
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for m in methods {
        let r = match m {
            MethodArg::Partition => sfl_partition(&path, &sopts),
            MethodArg::Tracking => sfl_tracking(&path, &sopts),
            MethodArg::Crossing => sfl_crossings(&path, &copts),
            MethodArg::Morse => sfl_morse_oracle(&path, &sopts),
            MethodArg::All => unreachable!(),
        };
        match r {
            Ok(r) => results.push(r),
            Err(e) if a.method == MethodArg::All && skippable(m, &e) => {
                let method = match m {
                    MethodArg::Morse => "morse",
                    _ => "crossing",
                };
                eprintln!("notice: {method} skipped: {e}");
                skipped.push(Skipped { method, reason: e.to_string() });
            }
            Err(e) => return Err(CliError::Numerical(e)),
        }
    }
    let agreement = results.windows(2).all(|w| w[0].value == w[1].value);
    let value = if agreement { results.first().map(|r| r.value) } else { None };
    let code = if agreement { EXIT_OK } else { EXIT_DISAGREEMENT };
    if !agreement {
        let values: Vec<String> = results.iter().map(|r| format!("{}={}", r.method.name(), r.value)).collect();
        eprintln!("error: methods disagree: {}", values.join(", "));
    }

    let body = match a.output.output {
        OutputFormat::Json => {
            let report = SflReport { command: "sfl", descriptor: &descriptor, results: &results, skipped, value, agreement };
            to_json_string(&report) + "\n"
        }
        OutputFormat::Csv => {
            let mut s = String::from("method,value\n");
            for r in &results {
                s.push_str(&format!("{},{}\n", r.method.name(), r.value));
            }
            s
        }
    };
    Ok(Report { body, code })
}

pub(crate) fn spectrum(a: &SpectrumArgs) -> Result<Report, CliError> {
    if a.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let path = path_descriptor(&a.path)?.to_path().map_err(input_error)?;
    let csv = spectrum_csv(&path, a.samples);
    let body = match a.output {
        OutputFormat::Csv => csv,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                t: f64,
                mu: Vec<f64>,
            }
            let rows: Vec<Row> = csv
                .lines()
                .skip(1)
                .map(|l| {
                    let v: Vec<f64> = l.split(',').map(|x| x.parse().expect("spectrum CSV holds floats")).collect();
                    Row { t: v[0], mu: v[1..].to_vec() }
                })
                .collect();
            to_json_string(&rows) + "\n"
        }
    };
    Ok(Report { body, code: EXIT_OK })
}

#[derive(Serialize)]
struct GapReport {
    command: &'static str,
    dim: usize,
    gap: f64,
    delta: f64,
    riesz: f64,
    norm: f64,
    gap_equals_twice_delta: bool,
}

pub(crate) fn gap(a: &GapArgs) -> Result<Report, CliError> {
    let load = |arg: &str| -> Result<_, CliError> {
        let text = file_or_inline(arg)?;
        let lit: MatrixLiteral =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("matrix literal: {e}")))?;
        lit.to_operator().map_err(input_error)
    };
    let (t1, t2) = (load(&a.a)?, load(&a.b)?);
    if t1.dim() != t2.dim() {
        return Err(CliError::Usage(format!("operators have dimensions {} and {}", t1.dim(), t2.dim())));
    }
    let gap = gap_distance(&t1, &t2)?;
    let delta = delta_distance(&t1, &t2)?;
    let riesz = riesz_distance(&t1, &t2)?;
    let norm = norm_distance(&t1, &t2)?;
    let ok = (gap - 2.0 * delta).abs() <= 1e-12 * gap.max(1.0);
    let body = match a.output.output {
        OutputFormat::Json => {
            let r = GapReport { command: "gap", dim: t1.dim(), gap, delta, riesz, norm, gap_equals_twice_delta: ok };
            to_json_string(&r) + "\n"
        }
        OutputFormat::Csv => {
            use specflow_core::descriptor::format_f64;
            format!(
                "gap,delta,riesz,norm,gap_equals_twice_delta\n{},{},{},{},{}\n",
                format_f64(gap),
                format_f64(delta),
                format_f64(riesz),
                format_f64(norm),
                ok
            )
        }
    };
    Ok(Report { body, code: if ok { EXIT_OK } else { EXIT_DISAGREEMENT } })
}
