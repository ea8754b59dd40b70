use serde::Serialize;

/// Machine-readable failure written to standard error as
/// `{"error": {"kind": ..., "message": ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("InvalidArguments", message)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: &'a CliError,
        }
        serde_json::to_string(&Wrapper { error: self }).expect("strings always serialize")
    }
}

impl From<lyap_core::Error> for CliError {
    fn from(e: lyap_core::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}
