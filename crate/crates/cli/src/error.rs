use surrogate_core::Error as CoreError;

/// A mistake in the invocation, config or input files. Maps to exit code 2.
#[derive(Debug)]
pub struct UserError(pub String);

impl std::fmt::Display for UserError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UserError {}

pub fn user(msg: impl Into<String>) -> anyhow::Error {
    UserError(msg.into()).into()
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USER: i32 = 2;

/// Exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UserError>() {
            return EXIT_USER;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            if matches!(e, CoreError::Parse { .. } | CoreError::CountMismatch { .. } | CoreError::Argument(_) | CoreError::Format { .. }) {
                return EXIT_USER;
            }
        }
    }
    EXIT_INTERNAL
}
