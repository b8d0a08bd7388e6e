//! Result tables. Numbers use six significant digits in the style of C's `%g`;
//! undefined values are written as `NA`. Output contains no timestamps, so the
//! same inputs always give the same bytes.

use std::fmt::Write as _;

use super::experiment::Experiment;
use super::metrics::Summary;

pub const RESULTS_HEADER: &str =
    "protocol,scenario,n_nodes,run,seed,generated,delivered,success_rate_pct,energy_j,efficiency_kbits_per_j,latency_s";

pub const SUMMARY_HEADER: &str = "protocol,scenario,n_nodes,runs,metric,mean,sd,min,max";

pub const NA: &str = "NA";

/// Formats like `printf("%.6g")`.
pub fn fmt_g6(x: f64) -> String {
    if !x.is_finite() {
        return NA.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), fmt_g6)
}

fn mean(s: Option<Summary>) -> String {
    opt(s.map(|s| s.mean))
}

/// Per-run rows followed by one `aggregate` row per (protocol, N) group, sorted by
/// protocol, node count and run index.
pub fn results_csv(experiments: &[Experiment]) -> String {
    let mut groups: Vec<&Experiment> = experiments.iter().collect();
    groups.sort_by(|a, b| (a.protocol, a.n_nodes).cmp(&(b.protocol, b.n_nodes)));
    let mut out = String::new();
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for e in groups {
        let mut runs: Vec<_> = e.runs.iter().collect();
        runs.sort_by_key(|r| r.run);
        for r in runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.protocol,
                r.scenario,
                r.n_nodes,
                r.run,
                r.seed,
                r.generated,
                r.delivered,
                opt(r.success_rate_pct),
                fmt_g6(r.energy_j),
                opt(r.efficiency_kbits_per_j),
                opt(r.latency_s)
            );
        }
        let a = &e.aggregate;
        let _ = writeln!(
            out,
            "{},{},{},aggregate,n={},{},{},{},{},{},{}",
            e.protocol,
            e.scenario,
            e.n_nodes,
            a.runs,
            mean(a.generated),
            mean(a.delivered),
            mean(a.success_rate_pct),
            mean(a.energy_j),
            mean(a.efficiency_kbits_per_j),
            mean(a.latency_s)
        );
    }
    out
}

/// Mean, sample deviation and range of every metric per group.
pub fn summary_csv(experiments: &[Experiment]) -> String {
    let mut groups: Vec<&Experiment> = experiments.iter().collect();
    groups.sort_by(|a, b| (a.protocol, a.n_nodes).cmp(&(b.protocol, b.n_nodes)));
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for e in groups {
        for (name, s) in e.aggregate.metrics() {
            let cells = match s {
                Some(s) => [s.mean, s.sd, s.min, s.max].map(fmt_g6).join(","),
                None => [NA; 4].join(","),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{name},{cells}",
                e.protocol, e.scenario, e.n_nodes, e.aggregate.runs
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_matches_printf() {
        let cases = [
            (0.0, "0"),
            (80.0, "80"),
            (96.4, "96.4"),
            (1.0 / 3.0, "0.333333"),
            (123456.7, "123457"),
            (999999.5, "1e+06"),
            (1234567.0, "1.23457e+06"),
            (0.0001234, "0.0001234"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (8000.0, "8000"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g6(x), want, "{x}");
        }
        assert_eq!(fmt_g6(f64::NAN), "NA");
    }
}
