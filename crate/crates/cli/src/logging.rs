//! Log set-up: timestamped records go to stderr and are appended to
//! `run.log` in the output directory. Timestamps appear nowhere else.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Once;

use crate::error::{CliError, CliResult};

pub const LOG_FILE: &str = "run.log";

struct Tee {
    file: File,
}

impl Write for Tee {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        // a log line that fails to reach stderr should still reach the file
        let _ = std::io::stderr().write_all(buf);
        self.file.write_all(buf)?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        let _ = std::io::stderr().flush();
        self.file.flush()
    }
}

static INIT: Once = Once::new();

/// Installs the logger once per process. The level follows `RUST_LOG` and
/// defaults to `info`.
pub fn init(out_dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let path = out_dir.join(LOG_FILE);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| CliError::io(&path, e))?;
    INIT.call_once(|| {
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
            .target(env_logger::Target::Pipe(Box::new(Tee { file })))
            .format_timestamp_millis()
            .init();
    });
    Ok(())
}
