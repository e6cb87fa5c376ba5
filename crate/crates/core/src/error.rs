use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("invalid plant: {0}")]
    InvalidPlant(String),

    #[error("state `{state}` defines {count} events, more than the limit of {limit}")]
    AlphabetTooLarge {
        state: String,
        count: usize,
        limit: usize,
    },

    #[error("event `{event}` is not defined at `{state}`")]
    UndefinedEvent { state: String, event: String },

    #[error("state budget of {0} exceeded")]
    StateBudgetExceeded(usize),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("`{0}` is not a surviving initial observer state")]
    UnknownInitial(String),

    #[error("no ordering of {0} forms a reachability chain")]
    RankUndefined(String),

    #[error("no successor of `{state}` on `{event}` inside {set}")]
    MissingSuccessor {
        state: String,
        event: String,
        set: String,
    },

    #[error("word `{0}` is not generated by the plant")]
    WordNotInPlant(String),

    #[error("policy has no transition from `{state}` on `{event}`")]
    PolicyIncomplete { state: String, event: String },

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
