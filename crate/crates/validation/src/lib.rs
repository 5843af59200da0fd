//! Holds the acceptance suite; run it with `cargo test -p nmrl-validation`.
