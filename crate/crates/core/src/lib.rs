pub mod error;
pub mod io;
pub mod matrix;
pub mod qr;
pub mod svd;
pub mod random;
pub mod factor;
pub mod rsvd;
pub mod testmat;
pub mod diagnostics;
pub mod flops;

/// Version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
