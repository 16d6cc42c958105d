use std::fmt;

use crate::{read_u64, WireError};

/// Size of an encoded [`Command`].
pub const COMMAND_FRAME_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum CommandId {
    Block = 1,
    Unblock = 2,
    Stop = 3,
    Continue = 4,
    Step = 5,
    Prioritize = 6,
    Deprioritize = 7,
    BreakOnFunction = 8,
    Detach = 9,
}

impl CommandId {
    pub fn from_u64(raw: u64) -> Result<Self, WireError> {
        Ok(match raw {
            1 => CommandId::Block,
            2 => CommandId::Unblock,
            3 => CommandId::Stop,
            4 => CommandId::Continue,
            5 => CommandId::Step,
            6 => CommandId::Prioritize,
            7 => CommandId::Deprioritize,
            8 => CommandId::BreakOnFunction,
            9 => CommandId::Detach,
            other => return Err(WireError::UnknownCommand(other)),
        })
    }
}

/// A scheduling command, debugger to runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Block(u64),
    Unblock(u64),
    Stop,
    Continue,
    Step,
    Prioritize(u64),
    Deprioritize(u64),
    BreakOnFunction(u64),
    Detach,
}

impl Command {
    pub fn id(&self) -> CommandId {
        match self {
            Command::Block(_) => CommandId::Block,
            Command::Unblock(_) => CommandId::Unblock,
            Command::Stop => CommandId::Stop,
            Command::Continue => CommandId::Continue,
            Command::Step => CommandId::Step,
            Command::Prioritize(_) => CommandId::Prioritize,
            Command::Deprioritize(_) => CommandId::Deprioritize,
            Command::BreakOnFunction(_) => CommandId::BreakOnFunction,
            Command::Detach => CommandId::Detach,
        }
    }

    /// Task id or function id argument; 0 for argument-less commands.
    pub fn arg(&self) -> u64 {
        match *self {
            Command::Block(t)
            | Command::Unblock(t)
            | Command::Prioritize(t)
            | Command::Deprioritize(t) => t,
            Command::BreakOnFunction(f) => f,
            Command::Stop | Command::Continue | Command::Step | Command::Detach => 0,
        }
    }

    pub fn from_parts(id: CommandId, arg: u64) -> Result<Self, WireError> {
        let no_arg = |cmd: Command| {
            if arg == 0 {
                Ok(cmd)
            } else {
                Err(WireError::UnexpectedArgument {
                    command: id as u64,
                    arg,
                })
            }
        };
        match id {
            CommandId::Block => Ok(Command::Block(arg)),
            CommandId::Unblock => Ok(Command::Unblock(arg)),
            CommandId::Prioritize => Ok(Command::Prioritize(arg)),
            CommandId::Deprioritize => Ok(Command::Deprioritize(arg)),
            CommandId::BreakOnFunction => Ok(Command::BreakOnFunction(arg)),
            CommandId::Stop => no_arg(Command::Stop),
            CommandId::Continue => no_arg(Command::Continue),
            CommandId::Step => no_arg(Command::Step),
            CommandId::Detach => no_arg(Command::Detach),
        }
    }

    pub fn encode(&self) -> [u8; COMMAND_FRAME_LEN] {
        let mut out = [0u8; COMMAND_FRAME_LEN];
        out[..8].copy_from_slice(&(self.id() as u64).to_le_bytes());
        out[8..16].copy_from_slice(&self.arg().to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() != COMMAND_FRAME_LEN {
            return Err(WireError::Framing {
                expected: COMMAND_FRAME_LEN,
                actual: bytes.len(),
            });
        }
        let id = CommandId::from_u64(read_u64(bytes, 0))?;
        for slot in 2..4 {
            let value = read_u64(bytes, slot);
            if value != 0 {
                return Err(WireError::Reserved { slot, value });
            }
        }
        Command::from_parts(id, read_u64(bytes, 1))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Command::Block(t) => write!(f, "block {t}"),
            Command::Unblock(t) => write!(f, "unblock {t}"),
            Command::Stop => f.write_str("stop"),
            Command::Continue => f.write_str("continue"),
            Command::Step => f.write_str("step"),
            Command::Prioritize(t) => write!(f, "prioritize {t}"),
            Command::Deprioritize(t) => write!(f, "deprioritize {t}"),
            Command::BreakOnFunction(fun) => write!(f, "break-on-function {fun}"),
            Command::Detach => f.write_str("detach"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(bytes: &[u8]) -> Vec<u64> {
        (0..4).map(|i| read_u64(bytes, i)).collect()
    }

    #[test]
    fn block_layout() {
        let bytes = Command::Block(7).encode();
        assert_eq!(words(&bytes), vec![1, 7, 0, 0]);
        assert_eq!(Command::decode(&bytes).unwrap(), Command::Block(7));
    }

    #[test]
    fn stop_layout() {
        assert_eq!(words(&Command::Stop.encode()), vec![3, 0, 0, 0]);
    }

    #[test]
    fn unknown_command_rejected() {
        let mut bytes = Command::Stop.encode();
        bytes[0] = 42;
        assert!(matches!(
            Command::decode(&bytes),
            Err(WireError::UnknownCommand(42))
        ));
        bytes[0] = 0;
        assert!(matches!(
            Command::decode(&bytes),
            Err(WireError::UnknownCommand(0))
        ));
    }

    #[test]
    fn argument_on_stop_rejected() {
        let mut bytes = Command::Stop.encode();
        bytes[8] = 1;
        assert!(matches!(
            Command::decode(&bytes),
            Err(WireError::UnexpectedArgument { command: 3, arg: 1 })
        ));
    }

    #[test]
    fn short_frame_rejected() {
        assert!(matches!(
            Command::decode(&[0u8; 16]),
            Err(WireError::Framing { .. })
        ));
    }
}
