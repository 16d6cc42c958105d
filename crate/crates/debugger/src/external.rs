//! Launching an external debugger (gdb or similar) against the runtime.

use std::process::{Child, Command as Process};

use log::info;
use taskscope_wire::{Ack, Command};

use crate::error::{DebuggerError, Result};
use crate::session::Session;

/// A command line with a `{pid}` placeholder and an optional `{function}`
/// placeholder, e.g. `gdb -p {pid} -ex "break {function}"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DebuggerTemplate {
    raw: String,
}

impl DebuggerTemplate {
    pub fn parse(template: &str) -> Result<Self> {
        if !template.contains("{pid}") {
            return Err(DebuggerError::Config(format!(
                "debugger template `{template}` has no {{pid}} placeholder"
            )));
        }
        if split_args(template).is_empty() {
            return Err(DebuggerError::Config("empty debugger template".into()));
        }
        Ok(DebuggerTemplate {
            raw: template.to_owned(),
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    /// Program and arguments with placeholders substituted. Substitution
    /// happens per argument, so a function name never splits an argument.
    pub fn render(&self, pid: u64, function: Option<&str>) -> Vec<String> {
        let pid = pid.to_string();
        split_args(&self.raw)
            .into_iter()
            .map(|arg| {
                arg.replace("{pid}", &pid)
                    .replace("{function}", function.unwrap_or(""))
            })
            .collect()
    }
}

/// Splits on whitespace, honouring double quotes.
fn split_args(s: &str) -> Vec<String> {
    let mut args = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut pending = false;
    for c in s.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                pending = true;
            }
            c if c.is_whitespace() && !quoted => {
                if pending {
                    args.push(std::mem::take(&mut current));
                    pending = false;
                }
            }
            c => {
                current.push(c);
                pending = true;
            }
        }
    }
    if pending {
        args.push(current);
    }
    args
}

pub struct Attached {
    pub child: Child,
    /// Reply to the function breakpoint, when one was requested.
    pub breakpoint: Option<Ack>,
}

/// Spawns the external debugger for the session's runtime process. With a
/// function name, the runtime is also told to stop when a task of that
/// function is dequeued.
pub fn attach_external_debugger(
    session: &mut Session,
    template: &DebuggerTemplate,
    function_name: Option<&str>,
) -> Result<Attached> {
    let breakpoint = match function_name {
        Some(name) => {
            let id = session.model().function_by_name(name).ok_or_else(|| {
                DebuggerError::Config(format!("no task function named `{name}` is registered"))
            })?;
            Some(session.send_command(Command::BreakOnFunction(id))?)
        }
        None => None,
    };
    let argv = template.render(session.pid(), function_name);
    info!("launching external debugger: {}", argv.join(" "));
    let child = Process::new(&argv[0])
        .args(&argv[1..])
        .spawn()
        .map_err(|e| DebuggerError::io(format!("cannot launch `{}`", argv[0]), e))?;
    Ok(Attached { child, breakpoint })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_pid() {
        let t = DebuggerTemplate::parse("dbg -p {pid}").unwrap();
        assert_eq!(t.render(4242, None), vec!["dbg", "-p", "4242"]);
    }

    #[test]
    fn substitutes_function_inside_quotes() {
        let t = DebuggerTemplate::parse(r#"gdb -p {pid} -ex "break {function}""#).unwrap();
        assert_eq!(
            t.render(7, Some("reduce")),
            vec!["gdb", "-p", "7", "-ex", "break reduce"]
        );
    }

    #[test]
    fn missing_pid_is_config_error() {
        assert!(matches!(
            DebuggerTemplate::parse("gdb --attach"),
            Err(DebuggerError::Config(_))
        ));
    }
}
