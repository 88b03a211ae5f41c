//! Command-line front end: argument parsing, run configuration and the
//! subcommands that write each module's CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;

use clap::{Arg, ArgAction, ArgMatches};

pub use commands::{run, Command};
pub use config::{RawConfig, RunConfig};
pub use error::{CliError, CliResult};

use config::{flag_name, KEYS};
use error::EXIT_CODE_HELP;

fn with_config_args(mut cmd: clap::Command) -> clap::Command {
    cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value config file, applied before the flags below [default: none]"),
    );
    for key in KEYS {
        let default = if key.default.is_empty() {
            "unset"
        } else {
            key.default
        };
        cmd = cmd.arg(
            Arg::new(key.name)
                .long(flag_name(key.name))
                .value_name("VALUE")
                .action(ArgAction::Set)
                .help(format!(
                    "{} (key {}) [default: {default}]",
                    key.help, key.name
                )),
        );
    }
    cmd
}

pub fn cli() -> clap::Command {
    let mut root = clap::Command::new("topoconc")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Topological concentration analytics for link prediction")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(EXIT_CODE_HELP);
    for c in Command::ALL {
        root = root.subcommand(with_config_args(
            clap::Command::new(c.name())
                .about(c.about())
                .after_help(EXIT_CODE_HELP),
        ));
    }
    root
}

/// Defaults, then the config file, then explicit flags.
pub fn raw_config(m: &ArgMatches) -> CliResult<RawConfig> {
    let mut raw = RawConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::path(path, e))?;
        raw.merge_text(&text)?;
    }
    for key in KEYS {
        if let Some(v) = m.get_one::<String>(key.name) {
            raw.set(key.name, v)?;
        }
    }
    Ok(raw)
}

/// Parses `args`, runs the subcommand and returns the process exit code.
/// Errors are reported on stderr as one JSON object.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = Command::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .expect("registered subcommand");
    match raw_config(sub).and_then(|raw| run(command, &raw)) {
        Ok(()) => error::EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
