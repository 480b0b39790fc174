use std::path::Path;

use crate::args::ReplayArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

pub fn run(a: &ReplayArgs) -> CliResult<()> {
    let m = Manifest::read_from(&a.manifest)?;
    let mut args = m.args();
    if args.is_empty() {
        return Err(CliError::Usage(format!(
            "{} records no arguments",
            a.manifest.display()
        )));
    }
    if let Some(out) = &a.out {
        replace_flag(&mut args, "--out", out)?;
    }
    if let Some(dir) = &a.trace_dir {
        replace_flag(&mut args, "--trace-dir", dir)?;
    }
    crate::run(&args)
}

fn replace_flag(args: &mut [String], flag: &str, value: &Path) -> CliResult<()> {
    let value = value.display().to_string();
    let inline = format!("{flag}=");
    for i in 0..args.len() {
        if args[i] == flag && i + 1 < args.len() {
            args[i + 1] = value;
            return Ok(());
        }
        if args[i].starts_with(&inline) {
            args[i] = format!("{inline}{value}");
            return Ok(());
        }
    }
    Err(CliError::Usage(format!("recorded command has no {flag}")))
}
