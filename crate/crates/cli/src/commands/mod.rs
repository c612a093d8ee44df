pub mod analyze;
pub mod extract;
pub mod filter;
pub mod ingest;
pub mod verify;
