use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Arg, ArgAction};
use serde::Serialize;

use crate::commands::registry;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Param {
    Number(f64),
    Text(String),
    Switch(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub parameters: BTreeMap<String, Param>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// A numeric parameter; present whenever the flag is required or has a
    /// default.
    pub fn num(&self, key: &str) -> f64 {
        self.num_opt(key)
            .unwrap_or_else(|| panic!("parameter {key} missing after validation"))
    }

    pub fn num_opt(&self, key: &str) -> Option<f64> {
        match self.parameters.get(key) {
            Some(Param::Number(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.parameters.get(key) {
            Some(Param::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn switch(&self, key: &str) -> bool {
        matches!(self.parameters.get(key), Some(Param::Switch(true)))
    }

    /// A count parameter such as `--n`.
    pub fn count(&self, key: &str) -> Result<usize, CliError> {
        let v = self.num(key);
        if v < 1.0 || v.fract() != 0.0 || v > 1e6 {
            return Err(CliError::Usage(format!("--{key} must be a positive integer, got {v}")));
        }
        Ok(v as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Number,
    Text,
    Switch,
}

/// One flag of a subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Flag {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

impl Flag {
    pub const fn num(name: &'static str, default: Option<&'static str>, help: &'static str) -> Self {
        Flag {
            name,
            kind: Kind::Number,
            required: default.is_none(),
            default,
            help,
        }
    }

    pub const fn optional_num(name: &'static str, help: &'static str) -> Self {
        Flag {
            name,
            kind: Kind::Number,
            required: false,
            default: None,
            help,
        }
    }

    pub const fn text(name: &'static str, default: Option<&'static str>, required: bool, help: &'static str) -> Self {
        Flag {
            name,
            kind: Kind::Text,
            required,
            default,
            help,
        }
    }

    pub const fn switch(name: &'static str, help: &'static str) -> Self {
        Flag {
            name,
            kind: Kind::Switch,
            required: false,
            default: None,
            help,
        }
    }

    fn arg(&self) -> Arg {
        let arg = Arg::new(self.name).long(self.name).help(self.help);
        match self.kind {
            Kind::Switch => arg.action(ArgAction::SetTrue),
            _ => {
                let arg = arg.required(self.required).allow_negative_numbers(true);
                match self.default {
                    Some(d) => arg.default_value(d),
                    None => arg,
                }
            }
        }
    }
}

fn format_flag() -> Arg {
    Arg::new("format")
        .long("format")
        .value_parser(["json", "csv"])
        .help("What goes to stdout; the default depends on the subcommand")
}

fn output_flag() -> Arg {
    Arg::new("output")
        .long("output")
        .value_parser(clap::value_parser!(PathBuf))
        .help("Primary artifact file")
}

pub fn cli() -> clap::Command {
    let mut app = clap::Command::new("prabhakar-kit")
        .about("Prabhakar operators, a nonlocal fractional BVP and its Hartman-Wintner-type bound")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true);
    for c in registry() {
        let mut sub = clap::Command::new(c.name()).about(c.about());
        for f in c.flags() {
            sub = sub.arg(f.arg());
        }
        app = app.subcommand(sub.arg(format_flag()).arg(output_flag()));
    }
    app
}

fn parse_number(flag: &str, raw: &str) -> Result<f64, CliError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{flag}: cannot parse '{raw}' as a number")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("--{flag}: value must be finite, got '{raw}'")));
    }
    Ok(v)
}

/// Parses `argv` (without the program name) into a validated [`RunConfig`].
///
/// `--help` and `--version` come back as [`ParseOutcome::Info`] carrying
/// clap's rendered text; [`crate::main_with_args`] prints it and exits 0.
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<RunConfig, ParseOutcome> {
    let full = std::iter::once("prabhakar-kit").chain(argv.iter().map(|s| s.as_ref()));
    let matches = cli().try_get_matches_from(full).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp
        | clap::error::ErrorKind::DisplayVersion
        | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ParseOutcome::Info(e.to_string()),
        _ => ParseOutcome::Error(CliError::Usage(e.render().to_string().trim_end().to_string())),
    })?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = registry()
        .into_iter()
        .find(|c| c.name() == name)
        .expect("clap only accepts registered subcommands");

    let mut parameters = BTreeMap::new();
    for f in command.flags() {
        let value = match f.kind {
            Kind::Switch => Some(Param::Switch(sub.get_flag(f.name))),
            Kind::Number => sub
                .get_one::<String>(f.name)
                .map(|raw| parse_number(f.name, raw).map(Param::Number))
                .transpose()?,
            Kind::Text => sub.get_one::<String>(f.name).map(|s| Param::Text(s.clone())),
        };
        if let Some(v) = value {
            parameters.insert(f.name.to_string(), v);
        }
    }
    let format = match sub.get_one::<String>("format").map(String::as_str) {
        Some("csv") => Format::Csv,
        Some(_) => Format::Json,
        None => command.default_format(),
    };
    let config = RunConfig {
        subcommand: command.name(),
        parameters,
        output_path: sub.get_one::<PathBuf>("output").cloned(),
        format,
    };
    if !command.formats().contains(&format) {
        return Err(CliError::Usage(format!("{name} does not support --format csv")).into());
    }
    command.validate(&config)?;
    Ok(config)
}

/// Why [`parse_args`] did not produce a config.
#[derive(Debug)]
pub enum ParseOutcome {
    /// Help or version text; not an error.
    Info(String),
    Error(CliError),
}

impl From<CliError> for ParseOutcome {
    fn from(e: CliError) -> Self {
        ParseOutcome::Error(e)
    }
}

impl ParseOutcome {
    pub fn into_error(self) -> Option<CliError> {
        match self {
            ParseOutcome::Info(_) => None,
            ParseOutcome::Error(e) => Some(e),
        }
    }
}
