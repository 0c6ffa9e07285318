use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::args::Param;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{module}: {source}")]
    Numerical {
        module: &'static str,
        source: prabhakar_core::Error,
        parameters: BTreeMap<String, Param>,
    },

    #[error("{0}")]
    Io(String),

    #[error("{failed} acceptance criteria failed")]
    Reproduce { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical { .. } | CliError::Io(_) => 3,
            CliError::Reproduce { .. } => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numerical { source, .. } => source.kind(),
            CliError::Io(_) => "io",
            CliError::Reproduce { .. } => "property_violation",
        }
    }

    /// The JSON written to stderr on failure.
    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            module: Option<&'a str>,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            parameters: Option<&'a BTreeMap<String, Param>>,
        }
        #[derive(Serialize)]
        struct Diagnostic<'a> {
            schema: &'a str,
            error: Body<'a>,
        }
        let (module, parameters) = match self {
            CliError::Numerical { module, parameters, .. } => (Some(*module), Some(parameters)),
            _ => (None, None),
        };
        prabhakar_core::json::to_compact(&Diagnostic {
            schema: prabhakar_core::json::SCHEMA,
            error: Body {
                kind: self.kind(),
                module,
                message: self.to_string(),
                parameters,
            },
        })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
