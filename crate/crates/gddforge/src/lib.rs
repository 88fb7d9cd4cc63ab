//! HTTP service and command-line front end for the gddforge pipeline.

pub mod api;
pub mod archive;
pub mod cli;

use std::sync::Arc;

use gddforge_core::config::Config;

/// Serves the API on `config.bind` until the process is stopped.
pub fn serve(config: Config) -> Result<(), String> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    runtime.block_on(async move {
        let bind = config.bind.clone();
        let state = Arc::new(api::AppState::new(config)?);
        let listener = tokio::net::TcpListener::bind(&bind)
            .await
            .map_err(|e| format!("binding {bind}: {e}"))?;
        tracing::info!("listening on {bind}");
        axum::serve(listener, api::router(state)).await.map_err(|e| e.to_string())
    })
}
