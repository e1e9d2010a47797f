//! Holds the `acceptance` test target. Run it with
//! `cargo test -p critnode-verify --release --test acceptance`.
