//! Prompt construction, backend calls and response parsing.

mod backend;
mod mock;
mod parse;
mod pipeline;
mod prompt;

pub use backend::{
    assistant_text, backoff_delay, BackendConfig, BackendError, BackendKind, ChatBackend, ChatMessage, ChatReply,
    ChatRequest, HttpChatBackend, MockOptions, Role,
};
pub use mock::MockBackend;
pub use parse::{fenced_blocks, first_fenced_block, parse_response, FencedBlock, ParsedCode, ResponseError};
pub use pipeline::{
    generate_all, generate_all_observed, generate_script, FailedScript, GenerateError, GeneratedScript, JobReport,
    ScriptEvent, SkippedScript,
};
pub use prompt::{build_prompt, estimate_tokens, ContextScript, PromptBundle};
