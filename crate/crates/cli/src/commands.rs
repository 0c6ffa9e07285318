use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize, Serializer};

use prabhakar_core::criteria::{self, Context};
use prabhakar_core::func::{GridFunction, PowerSum, ScalarFn};
use prabhakar_core::green::{chebyshev_grid, green_property_check, validate_config, BvpConfig, GreensFunction};
use prabhakar_core::inequality::{certify, InequalityReport, Provenance};
use prabhakar_core::json::{self, SCHEMA};
use prabhakar_core::nystrom::{build_operator, spectral_scale, ResidualReport};
use prabhakar_core::prabhakar::{prabhakar_derivative, prabhakar_integral_tol, PrabhakarSpec};
use prabhakar_core::special::{ml3, MlParams};

use crate::args::{Flag, Format, RunConfig};
use crate::error::CliError;

/// What a command produced. The artifact matching `--format` goes to
/// `--output` (or stdout); `--json-out` / `--csv-out` receive extra copies.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub json: Option<String>,
    pub csv: Option<String>,
    /// Lines for stderr, written before any failure status is reported.
    pub log: Vec<String>,
    /// A failure to report after the artifacts are written.
    pub status: Option<CliError>,
}

pub trait Command: Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    /// Library module named in diagnostics.
    fn module(&self) -> &'static str;
    fn flags(&self) -> Vec<Flag>;
    fn formats(&self) -> &'static [Format] {
        &[Format::Json, Format::Csv]
    }
    fn default_format(&self) -> Format {
        Format::Json
    }
    fn validate(&self, _cfg: &RunConfig) -> Result<(), CliError> {
        Ok(())
    }
    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError>;
}

pub fn registry() -> Vec<Box<dyn Command>> {
    vec![
        Box::new(MlEval),
        Box::new(PrabhakarInt),
        Box::new(PrabhakarDeriv),
        Box::new(Greens),
        Box::new(MakeInstance),
        Box::new(Certify),
        Box::new(CertifySweep),
        Box::new(Reproduce),
    ]
}

pub fn find(name: &str) -> Option<Box<dyn Command>> {
    registry().into_iter().find(|c| c.name() == name)
}

fn numerical<'a>(cmd: &'a dyn Command, cfg: &'a RunConfig) -> impl Fn(prabhakar_core::Error) -> CliError + 'a {
    move |source| CliError::Numerical {
        module: cmd.module(),
        source,
        parameters: cfg.parameters.clone(),
    }
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// A flat record: JSON object with fields in insertion order, or a
/// two-line CSV.
#[derive(Debug, Clone)]
struct Record(Vec<(&'static str, Field)>);

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum Field {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(k, v)| (k, v)))
    }
}

impl Record {
    fn new(command: &str) -> Self {
        Record(vec![
            ("schema", Field::Text(SCHEMA.into())),
            ("command", Field::Text(command.into())),
        ])
    }

    fn num(mut self, key: &'static str, v: f64) -> Self {
        self.0.push((key, Field::Num(v)));
        self
    }

    fn int(mut self, key: &'static str, v: u64) -> Self {
        self.0.push((key, Field::Int(v)));
        self
    }

    fn text(mut self, key: &'static str, v: &str) -> Self {
        self.0.push((key, Field::Text(v.into())));
        self
    }

    fn artifacts(&self) -> Result<Artifacts, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.0.iter().map(|(k, _)| *k))?;
        w.write_record(self.0.iter().map(|(_, v)| match v {
            Field::Num(x) => fmt(*x),
            Field::Int(k) => k.to_string(),
            Field::Text(t) => t.clone(),
        }))?;
        Ok(Artifacts {
            json: Some(json::to_pretty(self)),
            csv: Some(csv_string(w)?),
            ..Artifacts::default()
        })
    }
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

// --- potentials -------------------------------------------------------------

/// `q` given either as a power expression in `(s-a)` or as a CSV file of
/// samples `(t, q)`.
pub enum Potential {
    Power(PowerSum),
    Samples(GridFunction),
}

impl Potential {
    pub fn load(spec: &str, a: f64) -> Result<Self, CliError> {
        let path = Path::new(spec);
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv || path.is_file() {
            return read_samples(path).map(Potential::Samples);
        }
        PowerSum::parse(spec, a)
            .map(Potential::Power)
            .map_err(|e| CliError::Usage(format!("--q: {e}")))
    }

    pub fn as_fn(&self) -> &dyn ScalarFn {
        match self {
            Potential::Power(p) => p,
            Potential::Samples(g) => g,
        }
    }
}

fn read_samples(path: &Path) -> Result<GridFunction, CliError> {
    let bad = |msg: String| CliError::Usage(format!("--q {}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let (mut t, mut q) = (Vec::new(), Vec::new());
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.len() < 2 {
            return Err(bad(format!("row {} needs two columns (t, q)", i + 1)));
        }
        let num = |k: usize| {
            row[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("row {}: '{}' is not a finite number", i + 1, &row[k])))
        };
        t.push(num(0)?);
        q.push(num(1)?);
    }
    GridFunction::new(t, q).map_err(|e| bad(e.to_string()))
}

// --- shared flags -------------------------------------------------------------

const RHO: Flag = Flag::num("rho", Some("1"), "Mittag-Leffler exponent ρ > 0");
const MU: Flag = Flag::num("mu", None, "Derivative order μ ∈ (2, 3]");
const GAMMA: Flag = Flag::num("gamma", Some("0"), "Prabhakar parameter γ");
const OMEGA: Flag = Flag::num("omega", Some("0"), "Prabhakar parameter ω");

fn bvp_flags() -> Vec<Flag> {
    vec![
        Flag::num("a", Some("0"), "Left endpoint"),
        Flag::num("b", Some("1"), "Right endpoint"),
        Flag::optional_num("xi", "Interior point of the nonlocal condition [default: midpoint]"),
        Flag::num("beta", Some("0"), "Nonlocal coefficient β ≥ 0"),
        RHO,
        MU,
        GAMMA,
        OMEGA,
    ]
}

fn bvp_config(cfg: &RunConfig) -> BvpConfig {
    let (a, b) = (cfg.num("a"), cfg.num("b"));
    let xi = cfg.num_opt("xi").unwrap_or(0.5 * (a + b));
    BvpConfig::new(
        a,
        b,
        xi,
        cfg.num("beta"),
        cfg.num("rho"),
        cfg.num("mu"),
        cfg.num("gamma"),
        cfg.num("omega"),
    )
}

fn validate_bvp(c: &BvpConfig) -> Result<(), CliError> {
    let report = validate_config(c);
    if report.valid {
        Ok(())
    } else {
        Err(CliError::Usage(report.problems.join("; ")))
    }
}

fn spec_from(cfg: &RunConfig) -> Result<PrabhakarSpec, CliError> {
    PrabhakarSpec::new(
        cfg.num("rho"),
        cfg.num("mu"),
        cfg.num("gamma"),
        cfg.num("omega"),
        cfg.num("a"),
    )
    .map_err(|e| CliError::Usage(e.to_string()))
}

// --- ml-eval ------------------------------------------------------------------

struct MlEval;

impl Command for MlEval {
    fn name(&self) -> &'static str {
        "ml-eval"
    }

    fn about(&self) -> &'static str {
        "Evaluate the three-parameter Mittag-Leffler function"
    }

    fn module(&self) -> &'static str {
        "special_functions"
    }

    fn flags(&self) -> Vec<Flag> {
        vec![
            Flag::num("rho", None, "ρ > 0"),
            Flag::num("mu", None, "μ > 0"),
            Flag::num("gamma", None, "γ"),
            Flag::num("z", None, "Argument"),
        ]
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let (rho, mu, g, z) = (cfg.num("rho"), cfg.num("mu"), cfg.num("gamma"), cfg.num("z"));
        let v = MlParams::new(rho, mu, g, z)
            .and_then(|p| ml3(&p))
            .map_err(numerical(self, cfg))?;
        Record::new(self.name())
            .num("rho", rho)
            .num("mu", mu)
            .num("gamma", g)
            .num("z", z)
            .num("value", v.value)
            .num("error_estimate", v.error_estimate)
            .int("terms", v.terms as u64)
            .artifacts()
    }
}

// --- prabhakar-int / prabhakar-deriv -----------------------------------------------

fn operator_flags(with_order: bool) -> Vec<Flag> {
    let mut f = vec![
        RHO,
        MU,
        GAMMA,
        OMEGA,
        Flag::num("a", Some("0"), "Base point"),
        Flag::num("x", None, "Evaluation point x > a"),
        Flag::text(
            "q",
            Some("1"),
            false,
            "Input f: power expression in (s-a) or CSV file of (t, f)",
        ),
    ];
    if with_order {
        f.push(Flag::optional_num("order", "Integral order [default: mu]"));
        f.push(Flag::num("tol", Some("1e-9"), "Relative tolerance for the quadrature"));
    }
    f
}

struct PrabhakarInt;

impl Command for PrabhakarInt {
    fn name(&self) -> &'static str {
        "prabhakar-int"
    }

    fn about(&self) -> &'static str {
        "Prabhakar integral of f at x"
    }

    fn module(&self) -> &'static str {
        "prabhakar_ops"
    }

    fn flags(&self) -> Vec<Flag> {
        operator_flags(true)
    }

    fn validate(&self, cfg: &RunConfig) -> Result<(), CliError> {
        if cfg.num("tol") <= 0.0 {
            return Err(CliError::Usage("--tol must be > 0".into()));
        }
        if cfg.num_opt("order").is_some_and(|o| o <= 0.0) {
            return Err(CliError::Usage("--order must be > 0".into()));
        }
        spec_from(cfg)?;
        Potential::load(cfg.text("q").unwrap_or("1"), cfg.num("a")).map(|_| ())
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let spec = spec_from(cfg)?;
        let order = cfg.num_opt("order").unwrap_or(spec.mu);
        let f = Potential::load(cfg.text("q").unwrap_or("1"), spec.a)?;
        let x = cfg.num("x");
        let tol = cfg.num("tol");
        let v = prabhakar_integral_tol(f.as_fn(), x, &spec, order, tol).map_err(numerical(self, cfg))?;
        let mut rec = Record::new(self.name())
            .num("x", x)
            .num("order", order)
            .num("value", v.value)
            .num("error_estimate", v.error_estimate);
        if let Potential::Power(p) = &f {
            let exact = p
                .prabhakar_integral(spec.rho, spec.omega, spec.gamma, order)
                .map_err(numerical(self, cfg))?;
            rec = rec.num("closed_form", exact.eval(x));
        }
        rec.artifacts()
    }
}

struct PrabhakarDeriv;

impl Command for PrabhakarDeriv {
    fn name(&self) -> &'static str {
        "prabhakar-deriv"
    }

    fn about(&self) -> &'static str {
        "Prabhakar derivative of order mu of f at x"
    }

    fn module(&self) -> &'static str {
        "prabhakar_ops"
    }

    fn flags(&self) -> Vec<Flag> {
        operator_flags(false)
    }

    fn validate(&self, cfg: &RunConfig) -> Result<(), CliError> {
        spec_from(cfg)?;
        Potential::load(cfg.text("q").unwrap_or("1"), cfg.num("a")).map(|_| ())
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let spec = spec_from(cfg)?;
        let f = Potential::load(cfg.text("q").unwrap_or("1"), spec.a)?;
        let x = cfg.num("x");
        let v = prabhakar_derivative(f.as_fn(), x, &spec).map_err(numerical(self, cfg))?;
        let mut rec = Record::new(self.name())
            .num("x", x)
            .num("value", v.value)
            .num("error_estimate", v.error_estimate);
        if let Potential::Power(p) = &f {
            let exact = p
                .as_ml(spec.rho, spec.omega)
                .and_then(|m| m.prabhakar_derivative(spec.gamma, spec.mu))
                .map_err(numerical(self, cfg))?;
            rec = rec.num("closed_form", exact.eval(x));
        }
        rec.artifacts()
    }
}

// --- greens -------------------------------------------------------------------

struct Greens;

impl Command for Greens {
    fn name(&self) -> &'static str {
        "greens"
    }

    fn about(&self) -> &'static str {
        "Green's function on a Chebyshev grid (CSV) and its property report (JSON)"
    }

    fn module(&self) -> &'static str {
        "greens_function"
    }

    fn flags(&self) -> Vec<Flag> {
        let mut f = bvp_flags();
        f.push(Flag::num("n", Some("64"), "Grid points per axis (>= 16)"));
        f.push(Flag::text(
            "json-out",
            None,
            false,
            "Also write the property report here",
        ));
        f.push(Flag::text("csv-out", None, false, "Also write the grid here"));
        f
    }

    fn default_format(&self) -> Format {
        Format::Csv
    }

    fn validate(&self, cfg: &RunConfig) -> Result<(), CliError> {
        if cfg.count("n")? < 16 {
            return Err(CliError::Usage("--n must be at least 16".into()));
        }
        validate_bvp(&bvp_config(cfg))
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let c = bvp_config(cfg);
        let n = cfg.count("n")?;
        let g = GreensFunction::new(&c).map_err(numerical(self, cfg))?;
        let grid = chebyshev_grid(c.a, c.b, n);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "s", "g", "branch"])?;
        for &t in &grid {
            for &s in &grid {
                let branch = if s <= t { "s_le_t" } else { "t_le_s" };
                w.write_record([fmt(t), fmt(s), fmt(g.eval(t, s)), branch.into()])?;
            }
        }
        let report = green_property_check(&c, n).map_err(numerical(self, cfg))?;

        #[derive(Serialize)]
        struct Out<'a, T> {
            schema: &'a str,
            config: &'a BvpConfig,
            properties: T,
            all_hold: bool,
        }
        Ok(Artifacts {
            json: Some(json::to_pretty(&Out {
                schema: SCHEMA,
                config: &c,
                all_hold: report.all_hold(),
                properties: &report,
            })),
            csv: Some(csv_string(w)?),
            ..Artifacts::default()
        })
    }
}

// --- make-instance --------------------------------------------------------------

const DEFAULT_Q: &str = "1 + (s-a)";

struct MakeInstance;

#[derive(Serialize)]
struct Instance<'a> {
    schema: &'a str,
    config: BvpConfig,
    q: &'a str,
    n: usize,
    lambda_star: f64,
    /// The manufactured potential is `q_scale · q`.
    q_scale: f64,
    nodes: &'a [f64],
    x_values: &'a [f64],
    eigen_residual: f64,
    residuals: ResidualReport,
    certificate: InequalityReport,
}

struct Manufactured {
    lambda_star: f64,
    eigen_residual: f64,
    x: GridFunction,
    residuals: ResidualReport,
    certificate: InequalityReport,
}

fn manufacture(c: &BvpConfig, q: &Potential, n: usize) -> prabhakar_core::Result<Manufactured> {
    let op = build_operator(c, q.as_fn(), n)?;
    let sc = spectral_scale(&op)?;
    let lambda = sc.lambda_star;
    let residuals = op.scaled(1.0 / lambda).verify(&sc.x_star)?;
    let scaled = |s: f64| q.as_fn().eval(s) / lambda;
    let certificate = certify(c, &scaled, Provenance::SpectralScaled)?;
    Ok(Manufactured {
        lambda_star: lambda,
        eigen_residual: sc.residual,
        x: sc.x_star,
        residuals,
        certificate,
    })
}

impl Command for MakeInstance {
    fn name(&self) -> &'static str {
        "make-instance"
    }

    fn about(&self) -> &'static str {
        "Scale q by its dominant Nyström eigenvalue so the BVP has a nontrivial solution"
    }

    fn module(&self) -> &'static str {
        "bvp_spectral"
    }

    fn flags(&self) -> Vec<Flag> {
        let mut f = bvp_flags();
        f.push(Flag::text(
            "q",
            Some(DEFAULT_Q),
            false,
            "Base potential: power expression or CSV file",
        ));
        f.push(Flag::num("n", Some("400"), "Nyström nodes (>= 8)"));
        f.push(Flag::text("json-out", None, false, "Also write the instance JSON here"));
        f.push(Flag::text("csv-out", None, false, "Also write (t, x) here"));
        f
    }

    fn validate(&self, cfg: &RunConfig) -> Result<(), CliError> {
        if cfg.count("n")? < 8 {
            return Err(CliError::Usage("--n must be at least 8".into()));
        }
        let c = bvp_config(cfg);
        validate_bvp(&c)?;
        Potential::load(cfg.text("q").unwrap_or(DEFAULT_Q), c.a).map(|_| ())
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let c = bvp_config(cfg);
        let n = cfg.count("n")?;
        let q_text = cfg.text("q").unwrap_or(DEFAULT_Q);
        let q = Potential::load(q_text, c.a)?;
        let m = manufacture(&c, &q, n).map_err(numerical(self, cfg))?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "x"])?;
        for (t, x) in m.x.nodes().iter().zip(m.x.values()) {
            w.write_record([fmt(*t), fmt(*x)])?;
        }
        let inst = Instance {
            schema: SCHEMA,
            config: c,
            q: q_text,
            n,
            lambda_star: m.lambda_star,
            q_scale: 1.0 / m.lambda_star,
            nodes: m.x.nodes(),
            x_values: m.x.values(),
            eigen_residual: m.eigen_residual,
            residuals: m.residuals,
            certificate: m.certificate,
        };
        Ok(Artifacts {
            json: Some(json::to_pretty(&inst)),
            csv: Some(csv_string(w)?),
            ..Artifacts::default()
        })
    }
}

// --- certify --------------------------------------------------------------------

struct Certify;

impl Command for Certify {
    fn name(&self) -> &'static str {
        "certify"
    }

    fn about(&self) -> &'static str {
        "Evaluate both sides of the Hartman-Wintner-type inequality for a given q"
    }

    fn module(&self) -> &'static str {
        "hw_inequality"
    }

    fn flags(&self) -> Vec<Flag> {
        let mut f = bvp_flags();
        f.push(Flag::text(
            "q",
            None,
            true,
            "Potential: power expression in (s-a) or CSV file of (t, q)",
        ));
        f.push(Flag::switch(
            "spectral",
            "Scale q by 1/λ* first (manufactured instance)",
        ));
        f.push(Flag::num("n", Some("400"), "Nyström nodes for --spectral"));
        f.push(Flag::text("json-out", None, false, "Also write the report here"));
        f
    }

    fn validate(&self, cfg: &RunConfig) -> Result<(), CliError> {
        let c = bvp_config(cfg);
        validate_bvp(&c)?;
        if cfg.switch("spectral") && cfg.count("n")? < 8 {
            return Err(CliError::Usage("--n must be at least 8".into()));
        }
        Potential::load(cfg.text("q").unwrap_or_default(), c.a).map(|_| ())
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let c = bvp_config(cfg);
        let q_text = cfg.text("q").unwrap_or_default();
        let q = Potential::load(q_text, c.a)?;
        let report = if cfg.switch("spectral") {
            manufacture(&c, &q, cfg.count("n")?).map(|m| m.certificate)
        } else {
            certify(&c, q.as_fn(), Provenance::UserSupplied)
        }
        .map_err(numerical(self, cfg))?;

        let r = &report;
        let provenance = match r.instance_provenance {
            Provenance::SpectralScaled => "spectral_scaled",
            Provenance::UserSupplied => "user_supplied",
        };
        let mut rec = Record::new(self.name())
            .num("lhs", r.lhs)
            .num("rhs_stated", r.rhs_stated)
            .num("rhs_proof", r.rhs_proof)
            .num("lambda_xi", r.lambda_xi)
            .num("lambda_b", r.lambda_b)
            .num("margin_stated", r.margin_stated)
            .num("margin_proof", r.margin_proof)
            .text("holds_stated", if r.holds_stated { "true" } else { "false" })
            .text("holds_proof", if r.holds_proof { "true" } else { "false" })
            .text("instance_provenance", provenance)
            .artifacts()?;

        #[derive(Serialize)]
        struct Out<'a> {
            schema: &'a str,
            config: BvpConfig,
            q: &'a str,
            report: &'a InequalityReport,
        }
        rec.json = Some(json::to_pretty(&Out {
            schema: SCHEMA,
            config: c,
            q: q_text,
            report: r,
        }));
        Ok(rec)
    }
}

// --- certify-sweep ---------------------------------------------------------------

/// One entry of a sweep file; `xi` defaults to the midpoint, `q` to
/// `1 + (s-a)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub rho: f64,
    pub mu: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub q: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl SweepEntry {
    fn config(&self) -> BvpConfig {
        let xi = self.xi.unwrap_or(0.5 * (self.a + self.b));
        BvpConfig::new(self.a, self.b, xi, self.beta, self.rho, self.mu, self.gamma, self.omega)
    }
}

fn read_sweep(path: &Path) -> Result<Vec<SweepEntry>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--grid {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--grid {}: {e}", path.display())))
}

struct CertifySweep;

impl Command for CertifySweep {
    fn name(&self) -> &'static str {
        "certify-sweep"
    }

    fn about(&self) -> &'static str {
        "Manufacture and certify one instance per configuration of a JSON sweep file (NDJSON out)"
    }

    fn module(&self) -> &'static str {
        "hw_inequality"
    }

    fn flags(&self) -> Vec<Flag> {
        vec![
            Flag::text(
                "grid",
                None,
                true,
                "JSON array of {a, b, xi?, beta, rho, mu, gamma, omega, q?}",
            ),
            Flag::num("n", Some("400"), "Nyström nodes per instance"),
        ]
    }

    fn formats(&self) -> &'static [Format] {
        &[Format::Json]
    }

    fn validate(&self, cfg: &RunConfig) -> Result<(), CliError> {
        if cfg.count("n")? < 8 {
            return Err(CliError::Usage("--n must be at least 8".into()));
        }
        read_sweep(Path::new(cfg.text("grid").unwrap_or_default())).map(|_| ())
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let entries = read_sweep(Path::new(cfg.text("grid").unwrap_or_default()))?;
        let n = cfg.count("n")?;

        #[derive(Serialize)]
        struct Line<'a> {
            schema: &'a str,
            index: usize,
            config: BvpConfig,
            q: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            lambda_star: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            residuals: Option<ResidualReport>,
            #[serde(skip_serializing_if = "Option::is_none")]
            report: Option<InequalityReport>,
            #[serde(skip_serializing_if = "Option::is_none")]
            error: Option<LineError>,
        }
        #[derive(Serialize)]
        struct LineError {
            kind: String,
            message: String,
        }

        let mut out = String::new();
        let mut failed = 0usize;
        for (index, e) in entries.iter().enumerate() {
            let c = e.config();
            let q_text = e.q.as_deref().unwrap_or(DEFAULT_Q);
            let result = validate_bvp(&c).and_then(|()| {
                let q = Potential::load(q_text, c.a)?;
                manufacture(&c, &q, n).map_err(numerical(self, cfg))
            });
            let mut line = Line {
                schema: SCHEMA,
                index,
                config: c,
                q: q_text,
                lambda_star: None,
                residuals: None,
                report: None,
                error: None,
            };
            match result {
                Ok(m) => {
                    line.lambda_star = Some(m.lambda_star);
                    line.residuals = Some(m.residuals);
                    line.report = Some(m.certificate);
                }
                Err(err) => {
                    failed += 1;
                    let kind = match &err {
                        CliError::Numerical { source, .. } => source.kind(),
                        CliError::Usage(_) => "config",
                        _ => "io",
                    };
                    line.error = Some(LineError {
                        kind: kind.into(),
                        message: err.to_string(),
                    });
                }
            }
            out.push_str(&json::to_compact(&line));
            out.push('\n');
        }
        let status = (failed > 0).then(|| CliError::Numerical {
            module: self.module(),
            source: prabhakar_core::Error::Config(format!("{failed} of {} configurations failed", entries.len())),
            parameters: cfg.parameters.clone(),
        });
        Ok(Artifacts {
            json: Some(out),
            status,
            ..Artifacts::default()
        })
    }
}

// --- reproduce -------------------------------------------------------------------

struct Reproduce;

impl Command for Reproduce {
    fn name(&self) -> &'static str {
        "reproduce"
    }

    fn about(&self) -> &'static str {
        "Run the acceptance suite; exit 4 if any criterion fails"
    }

    fn module(&self) -> &'static str {
        "cli_runner"
    }

    fn flags(&self) -> Vec<Flag> {
        vec![Flag::text(
            "only",
            None,
            false,
            "Comma-separated criterion numbers or names [default: all]",
        )]
    }

    fn formats(&self) -> &'static [Format] {
        &[Format::Json]
    }

    fn validate(&self, cfg: &RunConfig) -> Result<(), CliError> {
        selection(cfg).map(|_| ())
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, CliError> {
        let ctx = Context::new();
        let summary = match selection(cfg)? {
            None => criteria::run_suite(&ctx),
            Some(ids) => criteria::run_selected(&ctx, &ids),
        };
        let failed = summary.criteria.iter().filter(|o| !o.pass).count();
        Ok(Artifacts {
            json: Some(summary.to_json()),
            log: summary.criteria.iter().map(|o| o.line()).collect(),
            status: (failed > 0).then_some(CliError::Reproduce { failed }),
            ..Artifacts::default()
        })
    }
}

fn selection(cfg: &RunConfig) -> Result<Option<Vec<u32>>, CliError> {
    let Some(list) = cfg.text("only") else {
        return Ok(None);
    };
    list.split(',')
        .map(|k| {
            criteria::find(k.trim())
                .map(|c| c.id())
                .ok_or_else(|| CliError::Usage(format!("--only: unknown criterion '{}'", k.trim())))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

/// Extra artifact destinations common to several commands.
pub fn extra_outputs(cfg: &RunConfig) -> (Option<PathBuf>, Option<PathBuf>) {
    (
        cfg.text("json-out").map(PathBuf::from),
        cfg.text("csv-out").map(PathBuf::from),
    )
}
