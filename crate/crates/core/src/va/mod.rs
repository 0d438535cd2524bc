//! Vertex superalgebras freely generated by a presentation, in N=1
//! component form (λ-brackets together with an odd derivation `S`, `S² = T`).

pub mod axioms;
pub mod engine;
pub mod expr;
pub mod presentation;
pub mod sexpr;

pub use engine::Engine;
pub use expr::{Expr, LambdaPoly, Letter, Word};
pub use presentation::{superaffine, Generator, Presentation, PresentationError};
