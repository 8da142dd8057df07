//! Stub linguistic adapter speaking the line-delimited JSON protocol on
//! stdin/stdout. Stands in for the parser/embedding sidecar.

use std::io;

use oracheck::lingua::{serve, StubAdapter};

fn main() -> io::Result<()> {
    serve(&StubAdapter, io::stdin().lock(), io::stdout().lock())
}
