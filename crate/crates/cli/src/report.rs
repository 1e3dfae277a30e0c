use serde::Serialize;
use sketchsolve::solver::{SolveState, SolverConfig, Timings};
use sketchsolve::{Complex64, LedgerSnapshot};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 8] = ["n", "p", "k", "kappa", "entry_queries", "samples", "err_max", "tv"];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryError {
    pub j: usize,
    pub estimate: Complex64,
    pub exact: Option<Complex64>,
    pub error: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub matrix_digest: Option<String>,
    pub config: Option<SolverConfig>,
    pub dims: Option<(usize, usize)>,
    pub sigma_hat: Vec<f64>,
    pub kappa_hat: Option<f64>,
    pub w: Vec<Complex64>,
    pub w_prime: Vec<Complex64>,
    pub overlap: Option<f64>,
    pub budget_capped: Option<bool>,
    pub theory_p: Option<f64>,
    pub entries: Vec<EntryError>,
    pub err_max: Option<f64>,
    pub tv: Option<f64>,
    pub samples: Option<u64>,
    pub ledger: Option<LedgerSnapshot>,
    pub timings: Option<Timings>,
    pub extra: serde_json::Map<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            pass: true,
            ..Default::default()
        }
    }

    pub fn absorb_state(&mut self, state: &SolveState, cfg: &SolverConfig) {
        self.config = Some(*cfg);
        self.dims = Some(state.description.dims);
        self.matrix_digest = Some(state.description.digest.clone());
        self.sigma_hat = state.description.sigma_hat.clone();
        self.kappa_hat = Some(state.description.kappa_hat());
        self.w = state.w.clone();
        self.w_prime = state.w_prime.clone();
        self.budget_capped = Some(state.budget_capped);
        self.ledger = Some(state.ledger);
        self.timings = Some(state.timings);
    }

    pub fn check(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.extra
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub kappa: f64,
    pub entry_queries: u64,
    pub samples: u64,
    pub err_max: Option<f64>,
    pub tv: Option<f64>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.p.to_string(),
            r.k.to_string(),
            r.kappa.to_string(),
            r.entry_queries.to_string(),
            r.samples.to_string(),
            opt(r.err_max),
            opt(r.tv),
        ])?;
    }
    w.flush()?;
    Ok(())
}
