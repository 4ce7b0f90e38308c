//! Verification-report records and their deterministic serializations.
//! All floats are emitted as `%.12e`, keys in fixed order, so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;

/// One verified identity: the measured defect, the refinement behaviour
/// when a study was run, and the verdict.
#[derive(Clone, Debug)]
pub struct VerifyRecord {
    pub lemma_id: String,
    pub grid_l: f64,
    pub grid_h: f64,
    pub defect: f64,
    pub refinement_ratios: Vec<f64>,
    pub pass: bool,
}

pub fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 {
            "\"inf\"".into()
        } else {
            "\"-inf\"".into()
        };
    }
    format!("{x:.12e}")
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl VerifyRecord {
    pub fn to_json(&self) -> String {
        let ratios = self
            .refinement_ratios
            .iter()
            .map(|r| fmt_float(*r))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{{\"lemma_id\":{},\"grid\":{{\"L\":{},\"h\":{}}},\"defect\":{},\"refinement_ratios\":[{}],\"pass\":{}}}",
            json_string(&self.lemma_id),
            fmt_float(self.grid_l),
            fmt_float(self.grid_h),
            fmt_float(self.defect),
            ratios,
            self.pass
        )
    }
}

/// A whole suite run: records plus provenance.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub config_hash: u64,
    pub records: Vec<VerifyRecord>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        let body = self
            .records
            .iter()
            .map(VerifyRecord::to_json)
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{{\"suite\":{},\"config_hash\":\"{:016x}\",\"pass\":{},\"records\":[{}]}}",
            json_string(&self.suite),
            self.config_hash,
            self.all_pass(),
            body
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,lemma_id,grid_L,grid_h,defect,refinement_ratios,pass\n");
        for r in &self.records {
            let ratios = r
                .refinement_ratios
                .iter()
                .map(|x| format!("{x:.12e}"))
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(
                out,
                "{},{},{:.12e},{:.12e},{:.12e},{},{}",
                self.suite, r.lemma_id, r.grid_l, r.grid_h, r.defect, ratios, r.pass
            );
        }
        out
    }
}

/// CSV dump of a radial decay table: columns radius,value,fit_residual.
pub fn decay_csv(shells: &[(f64, f64)], residual: f64) -> String {
    let mut out = String::from("radius,value,fit_residual\n");
    for &(r, v) in shells {
        let _ = writeln!(out, "{r:.12e},{v:.12e},{residual:.12e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_deterministic() {
        let rec = VerifyRecord {
            lemma_id: "theta-j-homomorphism".into(),
            grid_l: 8.0,
            grid_h: 0.25,
            defect: 1.25e-4,
            refinement_ratios: vec![2.1, 1.97],
            pass: true,
        };
        assert_eq!(rec.to_json(), rec.to_json());
        assert!(rec.to_json().contains("\"defect\":1.250000000000e-4"));
    }

    #[test]
    fn decay_csv_headers() {
        let csv = decay_csv(&[(1.0, 0.5), (2.0, 0.125)], 1e-3);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "radius,value,fit_residual");
        assert_eq!(csv.lines().count(), 3);
    }
}
