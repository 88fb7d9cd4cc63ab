//! Structural analysis of C#-shaped source and automated proxy scores.
//!
//! Proxy scores are heuristics computed from the source text. They are kept
//! apart from human rubric scores everywhere they are reported.

mod proxy;
mod structure;
mod summary;
mod token;

pub use proxy::{
    adherence_score, compilation_score, score_proxies, spec_keywords, validate_script, AdherenceSettings,
    BestPracticeWeights, CompilationWeights, CompilerHook, ModularityWeights, PlanReport, ProxyWeights,
    ValidateOptions, ValidationReport, WeightsError,
};
pub use structure::{check_structure, declared_class_names, declared_type_names, Finding, Severity, TYPE_KEYWORDS};
pub use summary::{
    summarize_class, ClassSummary, Exposure, FieldSig, LineCounts, MethodSig, SummaryError, UNITY_MESSAGES,
};
pub use token::{reconstruct, tokenize, CSharpToken, TokenKind, KEYWORDS};

/// Every finding code the validator can emit, with its default severity.
pub const FINDING_CODES: &[(&str, Severity)] = &[
    ("UnbalancedBraces", Severity::Error),
    ("UnbalancedParens", Severity::Error),
    ("UnbalancedBrackets", Severity::Error),
    ("UnterminatedString", Severity::Error),
    ("UnterminatedComment", Severity::Error),
    ("NoClassDeclaration", Severity::Error),
    ("StatementOutsideType", Severity::Error),
    ("DuplicateClassName", Severity::Error),
    ("MarkdownFenceArtifact", Severity::Error),
    ("TruncatedSource", Severity::Error),
    ("ExternalCompilerFailed", Severity::Error),
    ("ExternalCompilerUnavailable", Severity::Warning),
    ("StructureTooBroken", Severity::Warning),
    ("MissingMonoBehaviourBase", Severity::Warning),
    ("GetComponentInUpdate", Severity::Warning),
    ("NoSerializedFields", Severity::Warning),
    ("NoInputHandling", Severity::Warning),
    ("NameMismatch", Severity::Warning),
    ("UnclosedFence", Severity::Warning),
    ("DiscardedBlocks", Severity::Info),
    ("MethodCountOutOfRange", Severity::Info),
    ("LongMethod", Severity::Info),
    ("MultipleClassesPerFile", Severity::Info),
];
