//! Run configuration, the report document and the drivers behind each
//! command.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    extensivity_sweep, gap_report, thm1_report, thm2_report, thm3_check, BoundReport, CheckRecord, FockInstance,
    RadiusSettings, Sweep,
};
use crate::error::{Error, Result};
use crate::fock::properties::property_report;
use crate::fock::space::{DEFAULT_FOCK_CAP, HARD_FOCK_CAP};
use crate::fock::wick::wick_report;
use crate::lattice::TorusLattice;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_GAP_TOL: f64 = 1e-12;
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-9;
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const SWEEP_CSV_HEADER: &str = "L,delta,q7_per_vol,a_half,passed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dim: usize,
    pub length: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lengths: Vec<usize>,
    pub coupling: f64,
    pub gap_tol: f64,
    pub identity_tol: f64,
    pub epsilon: f64,
    pub fock_cap: usize,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            length: 4,
            lengths: Vec::new(),
            coupling: 2.0,
            gap_tol: DEFAULT_GAP_TOL,
            identity_tol: DEFAULT_IDENTITY_TOL,
            epsilon: DEFAULT_EPSILON,
            fock_cap: DEFAULT_FOCK_CAP,
            format: OutputFormat::Json,
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<()> {
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(Error::NonPositiveCoupling(self.coupling));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1/2], got {}",
                self.epsilon
            )));
        }
        if self.fock_cap > HARD_FOCK_CAP {
            return Err(Error::InvalidArgument(format!(
                "fock cap {} exceeds the hard limit {HARD_FOCK_CAP}",
                self.fock_cap
            )));
        }
        for tol in [self.gap_tol, self.identity_tol] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<TorusLattice> {
        TorusLattice::new(self.dim, self.length)
    }

    /// Theorem statements are made at coupling 2 and claimed uniform for
    /// couplings up to 2.
    pub fn coupling_warning(&self) -> Option<String> {
        (self.coupling > 2.0).then(|| {
            format!(
                "warning: g = {} > 2; the theorem statements are given for coupling 2 and claimed uniformly only for 0 < g <= 2",
                self.coupling
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verification {
    Wick,
    Thm1,
    Thm2,
    Thm3,
    Car,
    All,
}

impl Verification {
    pub fn needs_fock_space(self) -> bool {
        self != Verification::Thm3
    }

    fn expand(self) -> Vec<Verification> {
        use Verification::*;
        match self {
            All => vec![Wick, Thm1, Thm2, Thm3, Car],
            v => vec![v],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verification::Wick => "wick",
            Verification::Thm1 => "thm1",
            Verification::Thm2 => "thm2",
            Verification::Thm3 => "thm3",
            Verification::Car => "car",
            Verification::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    /// Keyed by check name.
    pub results: BTreeMap<String, BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub passed: bool,
    /// Wall-clock seconds per check; absent unless requested, so that equal
    /// inputs give byte-identical documents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl ReportDocument {
    fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            version: VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            results: BTreeMap::new(),
            sweep: None,
            passed: true,
            timings: None,
        }
    }

    fn insert(&mut self, rep: BoundReport) {
        self.passed &= rep.passed();
        self.results.insert(rep.check.clone(), rep);
    }

    /// `check/record` for every failing record, in key order.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .results
            .values()
            .flat_map(|r| r.failures().map(move |c| c.name.clone()))
            .collect();
        if let Some(s) = &self.sweep {
            if !s.passed() {
                out.extend(
                    s.rows
                        .iter()
                        .filter(|r| !r.passed)
                        .map(|r| format!("sweep.row[L={}]", r.length)),
                );
            }
        }
        out
    }

    pub fn records(&self) -> impl Iterator<Item = (&str, &CheckRecord)> {
        self.results
            .values()
            .flat_map(|r| r.records.iter().map(move |c| (r.check.as_str(), c)))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Sweep documents give the sweep table; others one line per record.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        if let Some(s) = &self.sweep {
            return write_sweep_csv(s, w);
        }
        writeln!(w, "check,name,relation,measured,bound,margin,tolerance,status")?;
        for (check, r) in self.records() {
            let relation = serde_json::to_value(r.relation).map_err(|e| Error::Format(e.to_string()))?;
            let status = match (&r.skipped, r.passed) {
                (Some(why), _) => format!("skipped: {why}"),
                (None, true) => "pass".to_string(),
                (None, false) => "fail".to_string(),
            };
            writeln!(
                w,
                "{check},{},{},{:e},{:e},{:e},{:e},{status}",
                r.name,
                relation.as_str().unwrap_or_default(),
                r.measured,
                r.bound,
                r.margin,
                r.tolerance
            )?;
        }
        Ok(())
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => Ok(self.to_json()? + "\n"),
            OutputFormat::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
            }
        }
    }
}

pub fn write_sweep_csv(s: &Sweep, mut w: impl Write) -> Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in &s.rows {
        writeln!(w, "{},{},{},{},{}", r.length, r.delta, r.q7_per_vol, r.a_half, r.passed)?;
    }
    Ok(())
}

struct Clock {
    enabled: bool,
    times: BTreeMap<String, f64>,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            times: BTreeMap::new(),
        }
    }

    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        if self.enabled {
            self.times.insert(name.to_string(), start.elapsed().as_secs_f64());
        }
        Ok(out)
    }

    fn finish(self, doc: &mut ReportDocument) {
        if self.enabled {
            doc.timings = Some(self.times);
        }
    }
}

pub fn run_gap(config: &RunConfig, timings: bool) -> Result<ReportDocument> {
    config.validate()?;
    let lat = config.lattice()?;
    let mut doc = ReportDocument::new("gap", config);
    let mut clock = Clock::new(timings);
    let rep = clock.time("gap", || gap_report(&lat, config.coupling, config.gap_tol))?;
    doc.insert(rep);
    clock.finish(&mut doc);
    Ok(doc)
}

pub fn run_verify(config: &RunConfig, which: Verification, timings: bool) -> Result<ReportDocument> {
    config.validate()?;
    let lat = config.lattice()?;
    let mut doc = ReportDocument::new(&format!("verify {}", which.name()), config);
    let mut clock = Clock::new(timings);
    let g = config.coupling;
    let inst = if which.needs_fock_space() {
        Some(clock.time("assembly", || {
            FockInstance::build(&lat, g, config.gap_tol, config.fock_cap)
        })?)
    } else {
        None
    };
    for v in which.expand() {
        let rep = match (v, &inst) {
            (Verification::Thm3, _) => clock.time("thm3", || thm3_check(&lat, g, config.gap_tol))?,
            (Verification::Wick, Some(i)) => clock.time("wick", || {
                wick_report(&i.frame, &i.lat, &i.suite, i.hf.delta, config.identity_tol)
            })?,
            (Verification::Thm1, Some(i)) => clock.time("thm1", || {
                thm1_report(&i.suite, &i.hf, &i.lat, &i.frame, RadiusSettings::default())
            })?,
            (Verification::Thm2, Some(i)) => {
                clock.time("thm2", || thm2_report(&i.suite, &i.hf, &i.lat, config.epsilon))?
            }
            (Verification::Car, Some(i)) => clock.time("car", || property_report(i, config.seed))?,
            _ => unreachable!("Fock-space checks always have an instance"),
        };
        doc.insert(rep);
    }
    clock.finish(&mut doc);
    Ok(doc)
}

pub fn run_sweep(config: &RunConfig, timings: bool) -> Result<ReportDocument> {
    config.validate()?;
    let mut doc = ReportDocument::new("sweep", config);
    let mut clock = Clock::new(timings);
    let sweep = clock.time("sweep", || {
        extensivity_sweep(config.dim, &config.lengths, config.coupling, config.gap_tol)
    })?;
    doc.passed = sweep.passed();
    doc.sweep = Some(sweep);
    clock.finish(&mut doc);
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = RunConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut RunConfig)| {
            let mut c = RunConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.coupling = 0.0));
        assert!(bad(|c| c.epsilon = 0.0));
        assert!(bad(|c| c.epsilon = 0.51));
        assert!(bad(|c| c.fock_cap = 25));
        assert!(bad(|c| c.gap_tol = -1.0));
        let mut c = RunConfig::default();
        c.length = 6;
        assert!(matches!(c.lattice(), Err(Error::LengthNotMultipleOfFour(6))));
        assert!(c.coupling_warning().is_none());
        c.coupling = 2.5;
        assert!(c.coupling_warning().is_some());
    }

    #[test]
    fn gap_document_round_trips_and_is_deterministic() {
        let c = RunConfig::default();
        let a = run_gap(&c, false).unwrap();
        let b = run_gap(&c, false).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(ReportDocument::from_json(&a.to_json().unwrap()).unwrap(), a);
        assert!(a.passed);
        let delta = a.results["gap"].record("gap.delta").unwrap().measured;
        assert!((delta - 0.408).abs() < 1e-3);
        assert!(run_gap(&c, true).unwrap().timings.is_some());
    }

    #[test]
    fn sweep_csv_has_one_row_per_length() {
        let c = RunConfig {
            lengths: vec![4, 8, 16, 32],
            ..RunConfig::default()
        };
        let doc = run_sweep(&c, false).unwrap();
        let csv = doc.render(OutputFormat::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(doc.passed);
    }

    #[test]
    fn fock_cap_is_enforced_before_assembly() {
        let c = RunConfig {
            dim: 2,
            length: 4,
            ..RunConfig::default()
        };
        let err = run_verify(&c, Verification::Thm1, false).unwrap_err();
        assert!(matches!(err, Error::FockCapExceeded { modes: 32, cap: 16, .. }));
        // the closed-form check has no cap
        assert!(run_verify(&c, Verification::Thm3, false).unwrap().passed);
    }
}
