use std::fmt;

/// Exit status 2.
pub const EXIT_INPUT: i32 = 2;
/// Exit status 3.
pub const EXIT_CAP: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, scenario files, partition text or parameters.
    Input(String),
    /// The request exceeds an enumeration or budget cap.
    Cap(String),
    /// Anything else (I/O while writing, a failed replay).
    Other(anyhow::Error),
}

impl CliError {
    /// The reader went away (`| head`); not worth reporting.
    pub fn is_broken_pipe(&self) -> bool {
        let CliError::Other(e) = self else { return false };
        e.chain().any(|c| {
            let io = c
                .downcast_ref::<std::io::Error>()
                .or_else(|| c.downcast_ref::<csv::Error>().and_then(|e| match e.kind() {
                    csv::ErrorKind::Io(io) => Some(io),
                    _ => None,
                }));
            io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
        })
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Cap(_) => EXIT_CAP,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Cap(m) => write!(f, "refused: {m}"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<coalform::Error> for CliError {
    fn from(e: coalform::Error) -> Self {
        match e {
            coalform::Error::SizeCap { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn cap(msg: impl Into<String>) -> CliError {
    CliError::Cap(msg.into())
}
