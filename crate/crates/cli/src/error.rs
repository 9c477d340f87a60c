use std::fmt;
use std::path::Path;

/// A failure that ends the run. The variant picks the exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Data(m) => m,
        }
    }

    pub fn data_at(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }

    pub fn write_at(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Data(format!("writing {}: {err}", path.display()))
    }
}

/// One `key=value` line on stderr; values are quoted and escaped.
pub fn log_line(level: &str, kind: &str, message: &str) -> String {
    format!("level={level} kind={kind} msg={message:?}")
}

pub fn warn(kind: &str, message: &str) {
    eprintln!("{}", log_line("warn", kind, message));
}
