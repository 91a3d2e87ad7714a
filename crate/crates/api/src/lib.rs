//! HTTP/JSON service over the ledger, object store and key network.
//!
//! Every mutating endpoint submits exactly one ledger transaction and
//! returns its receipt; reverts come back as 4xx with the receipt attached.

pub mod config;
pub mod error;
pub mod routes;
pub mod session;
pub mod state;
pub mod wire;

use std::sync::Arc;

pub use config::ApiConfig;
pub use error::ApiError;
pub use routes::router;
pub use state::{AppState, StartupError};

/// Binds `config.bind` and serves until ctrl-c.
pub async fn serve(config: ApiConfig) -> Result<(), StartupError> {
    let state = Arc::new(AppState::open(config)?);
    let listener = tokio::net::TcpListener::bind(&state.config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
