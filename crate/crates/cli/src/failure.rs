use std::fmt;

/// A failed command: the error name from the module that raised it and the
/// process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub name: &'static str,
    pub message: String,
    pub exit: u8,
}

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            name: "ValidationError",
            message: message.into(),
            exit: EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.message)
    }
}

impl From<itflow_power::Error> for Failure {
    fn from(e: itflow_power::Error) -> Self {
        let exit = if e.is_validation() {
            EXIT_VALIDATION
        } else {
            EXIT_NUMERICAL
        };
        Self {
            name: e.name(),
            message: e.to_string(),
            exit,
        }
    }
}

impl From<itflow::Error> for Failure {
    fn from(e: itflow::Error) -> Self {
        itflow_power::Error::from(e).into()
    }
}

pub type Outcome<T> = Result<T, Failure>;
