use std::fmt::Display;
use std::fs;
use std::path::Path;

use serde::Serialize;

pub const OK: u8 = 0;
pub const INVALID: u8 = 1;
pub const IO: u8 = 2;
pub const EXECUTION: u8 = 3;
pub const USAGE: u8 = 64;

/// A message for the error stream and the exit code that goes with it.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Display) -> Self {
        Self { code, message: message.to_string() }
    }

    pub fn invalid(e: impl Display) -> Self {
        Self::new(INVALID, e)
    }

    pub fn io(path: &Path, e: impl Display) -> Self {
        Self::new(IO, format!("IoError: {}: {e}", path.display()))
    }

    pub fn usage(e: impl Display) -> Self {
        Self::new(USAGE, format!("UsageError: {e}"))
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

/// Prints one JSON document.
pub fn json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

/// Prints `value` as JSON under `--json`, else the human rendering.
pub fn emit<T: Serialize>(as_json: bool, value: &T, human: impl FnOnce(&T) -> String) {
    if as_json {
        json(value);
    } else {
        print!("{}", human(value));
    }
}
