use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: {msg}")]
    At { line: usize, col: usize, msg: String },
    #[error("undefined stage `{0}`")]
    UndefinedStage(String),
    #[error("undefined vertex `{0}`")]
    UndefinedVertex(String),
    #[error("duplicate stage `{0}`")]
    DuplicateStage(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("stage `{0}` has no labels")]
    EmptyStage(String),
    #[error("label `{label}` appears in stages `{first}` and `{second}`; labels of distinct stages must be disjoint")]
    DuplicateLabel { label: String, first: String, second: String },
    #[error("label `{label}` of stage `{stage}` is reserved for the homogenising parameter")]
    ReservedLabel { stage: String, label: String },
    #[error("vertex `{vertex}` has {found} children but stage `{stage}` has {expected} labels")]
    Arity { vertex: String, stage: String, expected: usize, found: usize },
    #[error("no root declared")]
    NoRoot,
    #[error("more than one root declared")]
    MultipleRoots,
    #[error("the root must be an internal vertex")]
    RootIsLeaf,
    #[error("vertex `{0}` is not reachable from the root")]
    Unreachable(String),
    #[error("vertex `{0}` has more than one parent")]
    MultipleParents(String),
    #[error("cycle through vertex `{0}`")]
    Cycle(String),
    #[error("swap not applicable: {0}")]
    SwapNotApplicable(String),
    #[error("resize not applicable: {0}")]
    ResizeNotApplicable(String),
}
