use crate::classifiers::Method;
use crate::error::{Error, Result};
use crate::experiments::{aggregate, ErrorRates, ExperimentOutput, MethodResult, RepetitionResult};

pub const DETAIL_HEADER: &str = "config_id,method,rep,seed,type1,type2,accuracy";
pub const AGGREGATE_HEADER: &str =
    "config_id,method,mean_type1,sd_type1,mean_type2,sd_type2,mean_acc,sd_acc,violation_rate";

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six significant digits, shortest form (like C's `%.6g`).
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, v);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    }
}

pub fn render_detail(outputs: &[ExperimentOutput]) -> String {
    let mut s = String::from(DETAIL_HEADER);
    s.push('\n');
    for out in outputs {
        for rep in &out.repetitions {
            for m in &rep.results {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    out.config.id,
                    m.method,
                    rep.rep,
                    rep.seed,
                    format_real(m.rates.type1),
                    format_real(m.rates.type2),
                    format_real(m.rates.accuracy)
                ));
            }
        }
    }
    s
}

pub fn render_aggregate(outputs: &[ExperimentOutput]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for out in outputs {
        for a in &out.aggregate {
            let vals = [
                a.mean_type1,
                a.sd_type1,
                a.mean_type2,
                a.sd_type2,
                a.mean_acc,
                a.sd_acc,
                a.violation_rate,
            ]
            .map(format_real)
            .join(",");
            s.push_str(&format!("{},{},{vals}\n", out.config.id, a.method));
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetailRow {
    pub config_id: String,
    pub method: Method,
    pub rep: usize,
    pub seed: u64,
    pub type1: f64,
    pub type2: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub config_id: String,
    pub method: Method,
    /// mean/sd of type I, type II and accuracy, then the violation rate.
    pub values: [f64; 7],
}

fn rows<'a>(text: &'a str, header: &str, width: usize) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        _ => return Err(Error::Format(format!("expected header '{header}'"))),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != width {
                return Err(Error::Format(format!(
                    "line {}: expected {width} fields, found {}",
                    i + 1,
                    fields.len()
                )));
            }
            Ok((i + 1, fields))
        })
        .collect()
}

fn field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("line {line}: bad {name} '{s}'")))
}

pub fn parse_detail(text: &str) -> Result<Vec<DetailRow>> {
    rows(text, DETAIL_HEADER, 7)?
        .into_iter()
        .map(|(line, f)| {
            Ok(DetailRow {
                config_id: f[0].to_string(),
                method: f[1].parse()?,
                rep: field(line, "rep", f[2])?,
                seed: field(line, "seed", f[3])?,
                type1: field(line, "type1", f[4])?,
                type2: field(line, "type2", f[5])?,
                accuracy: field(line, "accuracy", f[6])?,
            })
        })
        .collect()
}

pub fn parse_aggregate(text: &str) -> Result<Vec<AggregateRow>> {
    rows(text, AGGREGATE_HEADER, 9)?
        .into_iter()
        .map(|(line, f)| {
            let mut values = [0.0; 7];
            for (v, s) in values.iter_mut().zip(&f[2..]) {
                *v = field(line, "value", s)?;
            }
            Ok(AggregateRow {
                config_id: f[0].to_string(),
                method: f[1].parse()?,
                values,
            })
        })
        .collect()
}

/// Recomputes every aggregate row from the detail rows. Values are compared
/// with a tolerance covering the six-digit rounding of the detail file.
pub fn verify_aggregates(detail: &str, aggregate_text: &str, alpha: f64) -> Result<()> {
    let detail = parse_detail(detail)?;
    let agg = parse_aggregate(aggregate_text)?;
    let mut ids: Vec<&str> = Vec::new();
    for r in &detail {
        if !ids.contains(&r.config_id.as_str()) {
            ids.push(&r.config_id);
        }
    }
    let mut expected = Vec::new();
    for id in ids {
        let mut reps: Vec<RepetitionResult> = Vec::new();
        for r in detail.iter().filter(|r| r.config_id == id) {
            let result = MethodResult {
                method: r.method,
                rates: ErrorRates {
                    type1: r.type1,
                    type2: r.type2,
                    accuracy: r.accuracy,
                },
            };
            match reps.iter_mut().find(|x| x.rep == r.rep) {
                Some(x) => x.results.push(result),
                None => reps.push(RepetitionResult {
                    rep: r.rep,
                    seed: r.seed,
                    results: vec![result],
                }),
            }
        }
        for a in aggregate(&reps, alpha)? {
            expected.push((id.to_string(), a));
        }
    }
    if expected.len() != agg.len() {
        return Err(Error::Format(format!(
            "aggregate file has {} rows, the detail file implies {}",
            agg.len(),
            expected.len()
        )));
    }
    const NAMES: [&str; 7] = [
        "mean_type1",
        "sd_type1",
        "mean_type2",
        "sd_type2",
        "mean_acc",
        "sd_acc",
        "violation_rate",
    ];
    for ((id, want), got) in expected.iter().zip(&agg) {
        if *id != got.config_id || want.method != got.method {
            return Err(Error::Format(format!(
                "aggregate row {}/{} found where {id}/{} was expected",
                got.config_id, got.method, want.method
            )));
        }
        let want_vals = [
            want.mean_type1,
            want.sd_type1,
            want.mean_type2,
            want.sd_type2,
            want.mean_acc,
            want.sd_acc,
            want.violation_rate,
        ];
        for ((name, w), g) in NAMES.iter().zip(want_vals).zip(got.values) {
            if (w - g).abs() > 1e-5 * (1.0 + w.abs()) {
                return Err(Error::Format(format!(
                    "{id}/{}: {name} is {g} but the detail rows give {w}",
                    want.method
                )));
            }
        }
    }
    Ok(())
}
